//! Steering toward a signed piecewise-affine target: approximate `|f|` with
//! a reflected path, then sign its excursions.

use lattice::metrics::{d_cu, d_cz_f64};
use lattice::path::{format_time, LatticePath, Time};
use lattice::{apply_signs, decompose, in_ball, CuczBall, SignFamily, Target};
use num_traits::{ToPrimitive, Zero};

use crate::bridge::{BridgeParams, Builder, Event};
use crate::certificate::{BallSpec, Certificate, Override};
use crate::engine::{with_retries, Steerer};
use crate::segment::Segment;
use crate::SteerError;

#[derive(Debug, Clone)]
pub struct SignedOutcome {
    /// Final signed path.
    pub path: LatticePath,
    /// Reflected path before the sign pass.
    pub reflected: LatticePath,
    pub certificate: Certificate,
    /// Sup radius used for `|f|`.
    pub rho_inner: f64,
    /// Zero radius used for `|f|`.
    pub delta_inner: Time,
    pub d_cu: f64,
    pub d_cz: f64,
    pub attempts: usize,
    pub events: Vec<Event>,
    pub prefix_checks: usize,
    pub prefix_failures: usize,
}

/// Radius for the reflected stage: all of `rho` when `f` keeps one sign,
/// `rho / 5` otherwise.
pub fn inner_radius(f: &Target, rho: f64) -> f64 {
    let nonpos = f.points().iter().all(|p| p.1 <= Time::zero());
    if f.is_nonnegative() || nonpos {
        rho
    } else {
        rho / 5.0
    }
}

/// Largest `delta' = k dt <= delta` with `Osc(f, delta') <= bound`, kept
/// below `gap`.
pub fn choose_delta(f: &Target, dt: Time, delta: Time, bound: f64, gap: Time) -> Result<Time, SteerError> {
    let osc_ok = |k: i128| f.oscillation(dt * Time::from_integer(k)).to_f64().unwrap_or(f64::INFINITY) <= bound;
    let mut hi = (delta / dt).floor().to_integer().min(((gap / dt).ceil().to_integer() - 1).max(0));
    if hi < 1 || !osc_ok(1) {
        return Err(SteerError::TooCoarse(format!(
            "target oscillation too coarse for delta = {} at dt = {}",
            format_time(delta),
            format_time(dt)
        )));
    }
    let mut lo = 1;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if osc_ok(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(dt * Time::from_integer(lo))
}

/// `|f|` on `[0, t]` as one segment ending at 0. When `f(t) != 0` a linear
/// descent is appended, ending halfway to the horizon.
fn abs_profile(f: &Target, t: Time, horizon: Time) -> Result<Segment, SteerError> {
    let g = f.abs();
    let mut pts: Vec<(Time, Time)> = g.points().iter().copied().filter(|&(s, _)| s < t).collect();
    pts.push((t, g.value(t)));
    if !g.value(t).is_zero() {
        pts.push((t + (horizon - t) / Time::from_integer(2), Time::zero()));
    }
    Segment::new(pts)
}

/// Sign of every excursion of `r` starting before `t`, as `-1` overrides on
/// an all-(+1) family. Tall excursions follow the sign of `f` at their peak,
/// the others take the sign with the smaller error, which stays below
/// `5 rho'` when `r` is within `rho'` of `|f|`.
pub fn sign_pass(r: &LatticePath, f: &Target, t: Time, rho_inner: f64) -> Result<Vec<Override>, SteerError> {
    let nonneg = f.is_nonnegative();
    let nonpos = f.points().iter().all(|p| p.1 <= Time::zero());
    let dx = r.dx();
    let fv = |k: usize| f.value(r.time(k)).to_f64().unwrap_or(f64::NAN);
    let last = r.index_floor(t).min(r.steps());
    let mut out = Vec::new();
    for ex in decompose(r).into_iter().filter(|e| e.g < last) {
        let sign = if nonneg {
            1
        } else if nonpos {
            -1
        } else if ex.height as f64 * dx > 2.0 * rho_inner {
            if fv(ex.peak) < 0.0 {
                -1
            } else {
                1
            }
        } else {
            let err = |s: f64| {
                (ex.g..=ex.d.min(last)).map(|k| (s * r.value(k) - fv(k)).abs()).fold(0.0, f64::max)
            };
            let (plus, minus) = (err(1.0), err(-1.0));
            let best = plus.min(minus);
            if best >= 5.0 * rho_inner {
                return Err(SteerError::Internal(format!(
                    "excursion at {} of height {} has error {best:.4}, not below 5 rho' = {:.4}",
                    format_time(r.time(ex.g)),
                    ex.height,
                    5.0 * rho_inner
                )));
            }
            if minus < plus {
                -1
            } else {
                1
            }
        };
        if sign < 0 {
            out.push(Override { q: ex.number, sign: -1 });
        }
    }
    Ok(out)
}

/// Drive `r0` so that one final sign assignment lands in `V_t(f, rho, delta)`.
pub fn approximate_signed_target(
    f: &Target,
    t: Time,
    rho: f64,
    delta: Time,
    r0: &LatticePath,
    seed: u64,
    params: &BridgeParams,
) -> Result<SignedOutcome, SteerError> {
    if rho <= 0.0 || delta <= Time::zero() || t <= Time::zero() {
        return Err(SteerError::BadArgument("t, rho and delta must be positive".into()));
    }
    if r0.horizon() <= t {
        return Err(SteerError::InsufficientHorizon { needed: format_time(t), horizon: format_time(r0.horizon()) });
    }
    let mut st = Steerer::new(r0.clone())?;
    let rho_inner = inner_radius(f, rho);
    let g = abs_profile(f, t, r0.horizon())?;
    let delta_inner = choose_delta(f, st.dt(), delta, rho_inner / 5.0, g.complete_subdivision().min_gap())?;
    Builder::new(st.clone(), params.clone(), rho_inner)?;
    let ball = CuczBall::new(lattice::metrics::Center::Target(f.clone()), t, rho, delta);

    let (st, (signs, signed, events), attempts) = with_retries(&mut st, Time::zero(), params.attempts, seed, |work| {
        let mut builder = Builder::new(work.clone(), params.clone(), rho_inner)?.with_horizon(t);
        builder.bridge(&g, 0)?;
        let r = builder.st.path();
        let signs = sign_pass(r, f, t, rho_inner)?;
        let family = SignFamily::plus().with_overrides(signs.iter().map(|o| (o.q, o.sign)));
        let signed = apply_signs(&family, r);
        if !in_ball(&signed, &ball)? {
            return Err(SteerError::SearchExhausted { what: "target ball".into(), tries: 1 });
        }
        *work = builder.st;
        Ok((signs, signed, builder.events))
    })?;

    let mut certificate = st.certificate(Some(BallSpec { target: f.clone(), t, rho, delta }));
    certificate.signs = Some(signs);
    certificate.final_digest = signed.digest();
    let d_cu = d_cu(f, &signed, t)?;
    let d_cz = d_cz_f64(f, &signed, t)?;
    let (prefix_checks, prefix_failures) = (st.prefix_checks, st.prefix_failures);
    Ok(SignedOutcome {
        path: signed,
        reflected: st.into_parts().0,
        certificate,
        rho_inner,
        delta_inner,
        d_cu,
        d_cz,
        attempts,
        events,
        prefix_checks,
        prefix_failures,
    })
}
