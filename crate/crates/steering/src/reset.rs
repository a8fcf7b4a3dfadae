//! Driving the path to zero after a restart time: oscillation reduction,
//! zero densification and their composition.

use lattice::path::{format_time, LatticePath, Time};
use lattice::SignFamily;

use crate::certificate::Certificate;
use crate::engine::Steerer;
use crate::SteerError;

/// Apply `F_{D}(-1, .)` from the zero at index `d` until every coordinate on
/// `d..=end` is below `h` (lattice units). Returns the number of steps.
pub fn reduce_after(st: &mut Steerer, d: usize, end: usize, h: f64) -> Result<usize, SteerError> {
    assert!(h > 0.0, "threshold must be positive");
    let a = st.time(d);
    let cap = st.steps_count() + 1;
    let mut n = 0;
    while st.sup(d, end) as f64 >= h {
        if n == cap {
            return Err(SteerError::IterationCap { op: "reduce_oscillations", iterations: n });
        }
        st.apply(a, &SignFamily::minus());
        n += 1;
    }
    Ok(n)
}

/// Start of the first excursion beginning in `from..=end` whose length is at
/// least `delta`, if any.
pub fn first_long_excursion(r: &LatticePath, from: usize, end: usize, delta: Time) -> Option<usize> {
    let v = r.coords();
    let n = r.steps();
    let mut k = from;
    while k < n && k <= end {
        if v[k] == 0 && v[k + 1] != 0 {
            let mut d = k + 1;
            while d < n && v[d] != 0 {
                d += 1;
            }
            if r.time(d) - r.time(k) >= delta {
                return Some(k);
            }
            k = d;
        } else {
            k += 1;
        }
    }
    None
}

/// Iterate `f_delta`: `F` with +1 up to the first excursion of length at
/// least `delta` and -1 from there on, until no such excursion starts in
/// `d..=end`.
pub fn densify_after(st: &mut Steerer, d: usize, end: usize, delta: Time) -> Result<usize, SteerError> {
    let cap = st.steps_count() + 1;
    let mut n = 0;
    while let Some(g) = first_long_excursion(st.path(), d, end, delta) {
        if n == cap {
            return Err(SteerError::IterationCap { op: "densify_zeros", iterations: n });
        }
        st.apply(st.time(g), &SignFamily::minus());
        n += 1;
    }
    Ok(n)
}

/// Make the path after `D_a` small (`< h` lattice units) with zeros every
/// `delta` on a window of length `t`. Returns the index of `D_a`.
pub fn reset_after_in(st: &mut Steerer, a: Time, t: Time, h: f64, delta: Time) -> Result<usize, SteerError> {
    let d = st.first_zero_after(a)?;
    let end_t = st.time(d) + t;
    let end = st.index_ceil(end_t);
    if end > st.steps_count() {
        return Err(SteerError::InsufficientHorizon { needed: format_time(end_t), horizon: format_time(st.path().horizon()) });
    }
    reduce_after(st, d, end, h)?;
    densify_after(st, d, end, delta)?;
    Ok(d)
}

/// Drive `r` into the sup-norm ball of radius `h` around 0 on `[0, t]` with
/// all-(-1) steps.
pub fn reduce_oscillations(r: &LatticePath, t: Time, h: f64) -> Result<(LatticePath, Certificate), SteerError> {
    let mut st = Steerer::new(r.clone())?;
    let end = st.index_ceil(t).min(st.steps_count());
    let h = st.lat(h);
    reduce_after(&mut st, 0, end, h)?;
    let cert = st.certificate(None);
    Ok((st.into_parts().0, cert))
}

/// From inside the sup-norm ball around 0, add zeros until every excursion
/// starting before `t` is shorter than `delta`.
pub fn densify_zeros(r: &LatticePath, t: Time, rho: f64, delta: Time) -> Result<(LatticePath, Certificate), SteerError> {
    let mut st = Steerer::new(r.clone())?;
    let end = st.index_ceil(t).min(st.steps_count());
    if st.sup(0, end) as f64 >= st.lat(rho) {
        return Err(SteerError::BadArgument("path must start inside the sup ball".into()));
    }
    densify_after(&mut st, 0, end, delta)?;
    let cert = st.certificate(None);
    Ok((st.into_parts().0, cert))
}

/// Keep `[0, D_a]` and bring the restarted path into `V_t(0, rho, delta)`.
pub fn reset_after(
    r: &LatticePath,
    a: Time,
    t: Time,
    rho: f64,
    delta: Time,
) -> Result<(LatticePath, Certificate), SteerError> {
    let mut st = Steerer::new(r.clone())?;
    let h = st.lat(rho);
    reset_after_in(&mut st, a, t, h, delta)?;
    let cert = st.certificate(None);
    Ok((st.into_parts().0, cert))
}

/// Variant of [`reduce_after`] that restarts at the last zero before the
/// first coordinate `>= h`, so finished stretches are left alone.
pub fn reduce_sweep(st: &mut Steerer, d: usize, end: usize, h: f64) -> Result<usize, SteerError> {
    assert!(h > 0.0, "threshold must be positive");
    let cap = 4 * st.steps_count() + 1;
    let mut z = d;
    let mut n = 0;
    loop {
        let v = st.path().coords();
        let last = end.min(st.steps_count());
        let Some(j) = (z..=last).find(|&k| v[k] as f64 >= h) else { break };
        z = (z..j).rev().find(|&k| v[k] == 0).expect("the sweep anchor is a zero");
        if n == cap {
            return Err(SteerError::IterationCap { op: "reduce_oscillations", iterations: n });
        }
        st.apply(st.time(z), &SignFamily::minus());
        n += 1;
    }
    Ok(n)
}
