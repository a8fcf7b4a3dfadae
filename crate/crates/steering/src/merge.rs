//! Building one excursion of prescribed height by merging small ones.

use lattice::path::{format_time, LatticePath, Time};
use lattice::{first_in_interval, SignFamily};
use num_traits::Zero;

use crate::bridge::{excursions_after, BridgeParams};
use crate::certificate::Certificate;
use crate::engine::{with_retries, Steerer};
use crate::reset::{densify_after, reduce_sweep};
use crate::SteerError;

/// Heights of one merge, lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Merge {
    pub prev: i64,
    pub last: i64,
    pub after: i64,
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub path: LatticePath,
    pub certificate: Certificate,
    /// The built excursion as grid indices `(g, d)` and its height.
    pub excursion: (usize, usize),
    pub height: i64,
    pub merges: Vec<Merge>,
    /// Summed heights of the complete excursions in `(D_a, b)` before the
    /// merges, lattice units.
    pub mass: i64,
    pub attempts: usize,
}

/// The postcondition: `r` has a zero in `(b, b + delta)` and a complete
/// excursion after `D_a` and before `b` whose height lies in `(h - dh, h)`
/// and exceeds everything else on `[D_a, D_b]`. Returns that excursion.
pub fn excursion_height_holds(
    r: &LatticePath,
    a: Time,
    b: Time,
    h: f64,
    dh: f64,
    delta: Time,
) -> Option<(usize, usize, i64)> {
    let v = r.coords();
    let da = lattice::first_zero_after(r, a)?;
    let bi = r.index_ceil(b);
    let db = (bi..=r.steps()).find(|&k| v[k] == 0)?;
    let zero_after_b = (r.index_floor(b) + 1..=r.steps()).take_while(|&k| r.time(k) < b + delta).any(|k| v[k] == 0 && r.time(k) > b);
    if !zero_after_b {
        return None;
    }
    let gb = (da..=r.index_floor(b)).rev().find(|&k| v[k] == 0)?;
    let (mut best, mut best_ex) = (0i64, None);
    for (g, d, top) in excursions_after(r, da).take_while(|e| e.1 <= gb) {
        if top > best {
            best = top;
            best_ex = Some((g, d));
        }
    }
    let tail = v[gb..=db].iter().copied().max().unwrap_or(0);
    let height = best as f64 * r.dx();
    let (g, d) = best_ex?;
    (tail < best && h - dh < height && height < h).then_some((g, d, best))
}

/// Reset on `[d, end]` below `h0` with zeros every `gap` steps.
fn reset_window(st: &mut Steerer, d: usize, end: usize, h0: i64, gap: usize) -> Result<(), SteerError> {
    let end = end.min(st.steps_count());
    if end > d {
        reduce_sweep(st, d, end, h0 as f64)?;
        densify_after(st, d, end, st.dt() * Time::from_integer(gap as i128))?;
    }
    Ok(())
}

/// Latest-first chain ending with the excursion at position `last` of
/// `exc`. Each earlier pick is taller than everything skipped since the
/// previous pick. Returns positions in time order.
fn select_chain(exc: &[(usize, usize, i64)], last: usize, lo: i64, hi: i64) -> Option<Vec<usize>> {
    let mut chain = vec![last];
    let mut sum = exc[last].2;
    let mut skipped = 0i64;
    for i in (0..last).rev() {
        if sum > lo {
            break;
        }
        let h = exc[i].2;
        if h > skipped && sum + h < hi {
            chain.push(i);
            sum += h;
            skipped = 0;
        } else {
            skipped = skipped.max(h);
        }
    }
    chain.reverse();
    (sum > lo && sum < hi).then_some(chain)
}

/// Merge the chain from the end: each step restarts at the start of the
/// next earlier pick, with -1 on everything but the current merged block.
/// The negated pick keeps zeros up to its peak, so the merged block starts
/// there. Returns `None` when something between a pick and the block is too
/// tall to stay above the new floor.
fn run_chain(st: &mut Steerer, picks: &[(usize, usize, i64)]) -> Result<Option<Vec<Merge>>, SteerError> {
    let mut merges = Vec::new();
    let (mut bg, mut bh) = (picks[picks.len() - 1].0, picks[picks.len() - 1].2);
    for &(g, d, h) in picks[..picks.len() - 1].iter().rev() {
        let r = st.path();
        if d < bg && st.sup(d, bg) >= h {
            return Ok(None);
        }
        let (_, bd, _) = excursions_after(r, bg).next().expect("the block is an excursion");
        let q = first_in_interval(r.time(bg), r.time(bd)).expect("nonempty excursion");
        st.apply(r.time(g), &SignFamily::minus().set(q, 1));
        let v = st.path().coords();
        let start = (g..=d).rev().find(|&k| v[k] == 0).expect("the negated pick has zeros");
        let (_, _, after) = excursions_after(st.path(), start).next().expect("the merge starts an excursion");
        if after != h + bh {
            return Err(SteerError::Internal(format!(
                "merge at {} gave height {after}, expected {h} + {bh}",
                format_time(st.time(g))
            )));
        }
        merges.push(Merge { prev: h, last: bh, after });
        bg = start;
        bh = after;
    }
    Ok(Some(merges))
}

/// Build a complete excursion of height in `(h - dh, h)` between `D_a` and
/// `b` that dominates `[D_a, D_b]`, followed by a zero in `(b, b + delta)`.
#[allow(clippy::too_many_arguments)]
pub fn build_excursion_height(
    r: &LatticePath,
    a: Time,
    b: Time,
    h: f64,
    dh: f64,
    delta: Time,
    seed: u64,
    params: &BridgeParams,
) -> Result<MergeOutcome, SteerError> {
    if !(dh > 0.0 && dh < h / 2.0) || a >= b || delta <= Time::zero() {
        return Err(SteerError::BadArgument("need 0 < dh < h/2, a < b and delta > 0".into()));
    }
    let mut st = Steerer::new(r.clone())?;
    if st.first_zero_after(a)? >= st.index_ceil(b) {
        return Err(SteerError::BadArgument(format!("no zero in ({}, {})", format_time(a), format_time(b))));
    }
    let dx = r.dx();
    let lo = ((h - dh) / dx).floor() as i64;
    let hi = (h / dx).ceil() as i64;
    if hi - lo < 2 {
        return Err(SteerError::TooCoarse(format!("no lattice height in ({:.4}, {h:.4}) at dx = {dx}", h - dh)));
    }
    let h0 = params.reset_height.min(lo + 1).max(2);
    let end = st.index_ceil(b + delta) + params.margin;
    let mut mass = 0;

    let (st, (excursion, height, merges), attempts) = with_retries(&mut st, a, params.attempts, seed, |work| {
        let d = work.first_zero_after(a)?;
        reset_window(work, d, end, h0, params.reset_gap)?;
        let bi = work.index_ceil(b);
        let exc: Vec<_> = excursions_after(work.path(), d).take_while(|e| e.1 < bi).collect();
        mass = exc.iter().map(|e| e.2).sum();
        for last in (1..exc.len()).rev() {
            let Some(chain) = select_chain(&exc, last, lo, hi) else { continue };
            let mut trial = work.clone();
            let picks: Vec<_> = chain.iter().map(|&i| exc[i]).collect();
            let Some(merges) = run_chain(&mut trial, &picks)? else { continue };
            let v = trial.path().coords();
            let start = (picks[0].0..=picks[0].1).rev().find(|&k| v[k] == 0).expect("merged block start");
            let (_, c, _) = excursions_after(trial.path(), start).next().expect("merged block");
            if trial.time(c) >= b {
                continue;
            }
            reset_window(&mut trial, c, end, h0, params.reset_gap)?;
            if let Some((g, d, top)) = excursion_height_holds(trial.path(), a, b, h, dh, delta) {
                *work = trial;
                return Ok(((g, d), top, merges));
            }
        }
        Err(SteerError::InsufficientMass(format!(
            "excursion heights in ({}, {}) sum to {mass} lattice units, the target needs more than {lo} in one chain; use a smaller dt",
            format_time(a),
            format_time(b)
        )))
    })?;
    let certificate = st.certificate(None);
    Ok(MergeOutcome { path: st.into_parts().0, certificate, excursion, height, merges, mass, attempts })
}
