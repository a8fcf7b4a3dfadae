//! Forward Levy transform, the inverse step F and its restarted variants.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::excursions::{apply_signs, excursions_from, hybrid, Cut, SignFamily};
use crate::path::{LatticePath, PathError, PathKind, Time};
use crate::rationals::RationalIndex;
use crate::seeds;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LevyError {
    #[error("no zero after {0} within the horizon")]
    NoZeroAfter(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Discrete Tanaka decomposition `|w| = w_hat + L`.
///
/// Away from 0 the increment of `w_hat` is `sgn(w) dw`. Leaving 0 counts as
/// +1 and a dwell at 0 as -1, so `L` grows by one per dwell step and equals
/// the running maximum of `-w_hat`.
pub fn levy_transform(w: &LatticePath) -> (LatticePath, Vec<i64>) {
    let v = w.coords();
    let mut hat = Vec::with_capacity(v.len());
    let mut local = Vec::with_capacity(v.len());
    let (mut x, mut l) = (0i64, 0i64);
    hat.push(0);
    local.push(0);
    for k in 1..v.len() {
        let (prev, dw) = (v[k - 1], v[k] - v[k - 1]);
        let step = match (prev.signum(), dw) {
            (0, 0) => {
                l += 1;
                -1
            }
            (0, _) => 1,
            (s, dw) => s * dw,
        };
        x += step;
        hat.push(x);
        local.push(l);
    }
    (LatticePath::from_parts(w.dt(), PathKind::Signed, hat), local)
}

/// `F(e, r) = e.r - min(e.r)`.
pub fn inverse_step(e: &SignFamily, r: &LatticePath) -> LatticePath {
    apply_signs(e, r).reflect()
}

/// Smallest grid index `k >= a/dt` with `r_k = 0`.
pub fn first_zero_after(r: &LatticePath, a: Time) -> Option<usize> {
    let start = r.index_ceil(a);
    (start..=r.steps()).find(|&k| r.coords()[k] == 0)
}

/// `F(hybrid(D_a(r), e), r)`: the path up to `D_a(r)` is kept and `F` acts
/// on the rest. Identity when `r` has no zero after `a`.
pub fn inverse_step_after(a: Time, e: &SignFamily, r: &LatticePath) -> LatticePath {
    let Some(d) = first_zero_after(r, a) else {
        return r.clone();
    };
    let v = r.coords();
    let mut out = v.to_vec();
    match e.uniform_sign() {
        // every excursion after D_a is numbered above D_a, so the cut is moot
        Some(s) if e.cut.is_none() => {
            for x in &mut out[d..] {
                *x *= s as i64;
            }
        }
        _ => {
            let fam = hybrid(Cut::At(r.time(d)), e);
            for ex in excursions_from(r, d) {
                let s = fam.sign(ex.number) as i64;
                for k in ex.g + 1..=ex.d {
                    out[k] = s * v[k].abs();
                }
            }
        }
    }
    let mut m = 0i64;
    for x in &mut out[d..] {
        m = m.min(*x);
        *x -= m;
    }
    LatticePath::from_parts(r.dt(), PathKind::Reflected, out)
}

/// `theta_{D_a}(r)`: the path restarted at its first zero after `a`.
pub fn shift_after(a: Time, r: &LatticePath) -> Result<LatticePath, LevyError> {
    let d = first_zero_after(r, a).ok_or_else(|| LevyError::NoZeroAfter(a.to_string()))?;
    Ok(LatticePath::new(r.dt(), r.kind(), r.coords()[d..].to_vec())?)
}

/// Imposed data for one chain step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainStep {
    /// Restart time; `None` applies `F` on the whole path.
    pub a: Option<Time>,
    pub overrides: BTreeMap<RationalIndex, i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    pub step: usize,
    pub r: LatticePath,
    /// Family used to produce `r`; `None` for the initial state.
    pub family: Option<SignFamily>,
    pub digest: u64,
}

/// Seed of the random family used at chain step `step` (1-based).
pub fn chain_step_seed(seed: u64, step: usize) -> u64 {
    seeds::derive(seed, &[seeds::label("chain"), step as u64])
}

/// Iterate `F` (or `F_a`) `n` times with fresh random families; the family
/// at step `i` is derived from `(seed, i)` plus the optional imposed data.
pub fn run_chain(r0: &LatticePath, n: usize, seed: u64, per_step: Option<&[ChainStep]>) -> Vec<ChainState> {
    assert_eq!(r0.kind(), PathKind::Reflected, "chains run on reflected paths");
    let mut out = Vec::with_capacity(n + 1);
    out.push(ChainState { step: 0, r: r0.clone(), family: None, digest: r0.digest() });
    for i in 1..=n {
        let step = per_step.and_then(|s| s.get(i - 1));
        let family = SignFamily::random(chain_step_seed(seed, i))
            .with_overrides(step.map(|s| s.overrides.clone()).unwrap_or_default());
        let prev = &out[i - 1].r;
        let r = match step.and_then(|s| s.a) {
            Some(a) => inverse_step_after(a, &family, prev),
            None => inverse_step(&family, prev),
        };
        let digest = r.digest();
        out.push(ChainState { step: i, r, family: Some(family), digest });
    }
    out
}
