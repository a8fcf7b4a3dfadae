//! CUCZ pseudometrics: uniform distance and zero control on `[0, t]`.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::path::{format_time, parse_time, LatticePath, PathKind, Time};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("paths live on different grids ({0} vs {1})")]
    GridMismatch(String, String),
    #[error("time {t} is beyond the horizon {end}")]
    BeyondHorizon { t: String, end: String },
    #[error("invalid target: {0}")]
    BadTarget(String),
}

/// Closed interval `[lo, hi]`; `hi = None` means `[lo, +inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroInterval {
    pub lo: Time,
    pub hi: Option<Time>,
}

/// Zero set as sorted disjoint closed intervals (points are degenerate
/// intervals).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZeroGeometry {
    pub intervals: Vec<ZeroInterval>,
}

impl ZeroGeometry {
    /// Build from sorted grid indices of zeros; runs of consecutive indices
    /// become intervals because the interpolant vanishes between them.
    pub fn from_grid(indices: &[usize], dt: Time) -> Self {
        let mut intervals: Vec<ZeroInterval> = Vec::new();
        let mut prev: Option<usize> = None;
        for &k in indices {
            let t = dt * Time::from_integer(k as i128);
            match (prev, intervals.last_mut()) {
                (Some(p), Some(last)) if p + 1 == k => last.hi = Some(t),
                _ => intervals.push(ZeroInterval { lo: t, hi: Some(t) }),
            }
            prev = Some(k);
        }
        ZeroGeometry { intervals }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, z: Time) -> bool {
        self.dist(z).map_or(false, |d| d.is_zero())
    }

    /// Distance from `z` to the set; `None` for the empty set.
    pub fn dist(&self, z: Time) -> Option<Time> {
        let iv = &self.intervals;
        if iv.is_empty() {
            return None;
        }
        // first interval whose lower end is > z
        let i = iv.partition_point(|c| c.lo <= z);
        let mut best: Option<Time> = None;
        if i > 0 {
            let c = iv[i - 1];
            let d = match c.hi {
                Some(h) if z > h => z - h,
                _ => Time::zero(),
            };
            best = Some(d);
        }
        if i < iv.len() {
            let d = iv[i].lo - z;
            best = Some(best.map_or(d, |b| b.min(d)));
        }
        best
    }

    /// Whether some zero lies in the open interval `(a, b)`.
    pub fn hits_open(&self, a: Time, b: Time) -> bool {
        self.intervals.iter().any(|c| c.hi.map_or(true, |h| h > a) && c.lo < b)
    }
}

/// `sup { min(t - z, dist(z, other)) : z in zf, z <= t }`, or 0 when `zf`
/// has no zero in `[0, t]`.
fn one_sided(zf: &ZeroGeometry, zg: &ZeroGeometry, t: Time) -> Time {
    let mut best = Time::zero();
    let phi = |z: Time| -> Time {
        let room = t - z;
        match zg.dist(z) {
            Some(d) => room.min(d),
            None => room,
        }
    };
    for c in &zf.intervals {
        if c.lo > t {
            break;
        }
        let hi = c.hi.map_or(t, |h| h.min(t));
        best = best.max(phi(c.lo)).max(phi(hi));
        if hi == c.lo {
            continue;
        }
        let two = Time::from_integer(2);
        let g = &zg.intervals;
        let start = g.partition_point(|x| x.hi.map_or(false, |h| h < c.lo)).saturating_sub(1);
        for j in start..g.len() {
            let here = g[j];
            if here.lo > hi {
                break;
            }
            if let Some(u) = here.hi {
                for z in [u, (t + u) / two] {
                    if c.lo <= z && z <= hi {
                        best = best.max(phi(z));
                    }
                }
                if let Some(next) = g.get(j + 1) {
                    let mid = (u + next.lo) / two;
                    if c.lo <= mid && mid <= hi {
                        best = best.max(phi(mid));
                    }
                }
            }
        }
    }
    best
}

/// Something with values on `[0, end]` and an exact zero set.
pub trait Profile {
    fn value_at(&self, t: Time) -> f64;
    fn zero_geometry(&self) -> ZeroGeometry;
    /// Time step of the underlying grid, if any.
    fn grid_step(&self) -> Option<Time>;
    /// End of the domain; `None` when unbounded.
    fn domain_end(&self) -> Option<Time>;
    /// Times at which the profile changes slope, up to `t`.
    fn kinks(&self, t: Time) -> Vec<Time>;
}

impl Profile for LatticePath {
    fn value_at(&self, t: Time) -> f64 {
        let x = t / self.dt();
        let k = x.floor().to_integer().max(0) as usize;
        if k >= self.steps() {
            return self.value(self.steps());
        }
        let frac = (x - Time::from_integer(k as i128)).to_f64().unwrap_or(0.0);
        self.value(k) * (1.0 - frac) + self.value(k + 1) * frac
    }

    fn zero_geometry(&self) -> ZeroGeometry {
        ZeroGeometry::from_grid(&self.zero_indices(self.steps()), self.dt())
    }

    fn grid_step(&self) -> Option<Time> {
        Some(self.dt())
    }

    fn domain_end(&self) -> Option<Time> {
        Some(self.horizon())
    }

    fn kinks(&self, t: Time) -> Vec<Time> {
        (0..=self.index_floor(t)).map(|k| self.time(k)).collect()
    }
}

/// Continuous piecewise-affine function with rational breakpoints, extended
/// by its last value beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    points: Vec<(Time, Time)>,
}

impl Target {
    /// Breakpoints `(time, value)` with strictly increasing times starting at
    /// `(0, 0)`.
    pub fn new(points: Vec<(Time, Time)>) -> Result<Self, MetricError> {
        let first = points.first().ok_or_else(|| MetricError::BadTarget("no breakpoints".into()))?;
        if !first.0.is_zero() {
            return Err(MetricError::BadTarget("first breakpoint must be at time 0".into()));
        }
        if !first.1.is_zero() {
            return Err(MetricError::BadTarget(format!("f(0) = {} is not 0", first.1)));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(MetricError::BadTarget("breakpoint times must increase".into()));
        }
        Ok(Target { points })
    }

    pub fn zero() -> Self {
        Target { points: vec![(Time::zero(), Time::zero())] }
    }

    /// Shorthand for small literal targets: `(num, den)` pairs for time and
    /// value.
    pub fn from_pairs(pairs: &[((i128, i128), (i128, i128))]) -> Result<Self, MetricError> {
        Self::new(pairs.iter().map(|&((a, b), (c, d))| (Time::new(a, b), Time::new(c, d))).collect())
    }

    pub fn points(&self) -> &[(Time, Time)] {
        &self.points
    }

    pub fn last_time(&self) -> Time {
        self.points.last().expect("nonempty").0
    }

    /// Exact value at `t >= 0`.
    pub fn value(&self, t: Time) -> Time {
        let p = &self.points;
        let i = p.partition_point(|&(s, _)| s <= t);
        if i == p.len() {
            return p[i - 1].1;
        }
        if i == 0 {
            return p[0].1;
        }
        let (t0, v0) = p[i - 1];
        let (t1, v1) = p[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|&(_, v)| v >= Time::zero())
    }

    pub fn sup_abs(&self) -> Time {
        self.points.iter().map(|&(_, v)| v.abs()).max().unwrap_or_else(Time::zero)
    }

    /// `|f|`, with sign changes inserted as breakpoints.
    pub fn abs(&self) -> Target {
        let mut pts = Vec::with_capacity(self.points.len() * 2);
        for w in self.points.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            pts.push((t0, v0.abs()));
            if (v0 < Time::zero() && v1 > Time::zero()) || (v0 > Time::zero() && v1 < Time::zero()) {
                let z = t0 + (t1 - t0) * v0 / (v0 - v1);
                pts.push((z, Time::zero()));
            }
        }
        let &(t, v) = self.points.last().expect("nonempty");
        pts.push((t, v.abs()));
        Target { points: pts }
    }

    /// Breakpoint times moved to the nearest multiple of `dt` (ties down).
    pub fn snapped(&self, dt: Time) -> Result<Target, MetricError> {
        let mut out: Vec<(Time, Time)> = Vec::with_capacity(self.points.len());
        for &(t, v) in &self.points {
            let k = nearest_index(t / dt);
            let s = dt * Time::from_integer(k);
            if let Some(&(prev, _)) = out.last() {
                if s <= prev {
                    return Err(MetricError::BadTarget(format!(
                        "breakpoints closer than the grid step near t = {}",
                        format_time(t)
                    )));
                }
            }
            out.push((s, v));
        }
        Target::new(out)
    }

    /// `sup { |f(s) - f(s')| : |s - s'| <= delta }`.
    pub fn oscillation(&self, delta: Time) -> Time {
        let times: Vec<Time> = self.points.iter().map(|p| p.0).collect();
        let mut starts: Vec<Time> = Vec::with_capacity(times.len() * 2);
        for &t in &times {
            starts.push(t);
            if t - delta >= Time::zero() {
                starts.push(t - delta);
            }
        }
        let mut best = Time::zero();
        for s in starts {
            let e = s + delta;
            let mut lo = self.value(s).min(self.value(e));
            let mut hi = self.value(s).max(self.value(e));
            for &(t, v) in &self.points {
                if s < t && t < e {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            best = best.max(hi - lo);
        }
        best
    }

    /// Values on the grid `k * dt`, `k = 0..=n`, as floats.
    pub fn grid_values(&self, dt: Time, n: usize) -> Vec<f64> {
        (0..=n).map(|k| to_f64(self.value(dt * Time::from_integer(k as i128)))).collect()
    }

    /// Lattice path tracking the target: each step moves one unit toward the
    /// rounded target value, which is kept off zero wherever the target is.
    pub fn lattice_approximation(&self, dt: Time, steps: usize) -> LatticePath {
        let dx = to_f64(dt).sqrt();
        let mut coords = Vec::with_capacity(steps + 1);
        coords.push(0i64);
        let mut x = 0i64;
        for k in 1..=steps {
            let f = self.value(dt * Time::from_integer(k as i128));
            let goal = if f.is_zero() {
                0
            } else {
                let m = ((to_f64(f.abs()) / dx).round() as i64).max(1);
                if f < Time::zero() {
                    -m
                } else {
                    m
                }
            };
            x += (goal - x).clamp(-1, 1);
            coords.push(x);
        }
        let kind = if coords.iter().all(|&c| c >= 0) { PathKind::Reflected } else { PathKind::Signed };
        LatticePath::new(dt, kind, coords).expect("tracking path has unit steps")
    }
}

fn nearest_index(x: Time) -> i128 {
    let f = x.floor();
    let i = f.to_integer();
    if x - f > Time::new(1, 2) {
        i + 1
    } else {
        i
    }
}

fn to_f64(x: Time) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl Profile for Target {
    fn value_at(&self, t: Time) -> f64 {
        to_f64(self.value(t))
    }

    fn zero_geometry(&self) -> ZeroGeometry {
        let mut out: Vec<ZeroInterval> = Vec::new();
        let mut push = |lo: Time, hi: Option<Time>| {
            if let Some(last) = out.last_mut() {
                if let Some(h) = last.hi {
                    if lo <= h {
                        last.hi = hi.map(|x| x.max(h));
                        return;
                    }
                } else {
                    return;
                }
            }
            out.push(ZeroInterval { lo, hi });
        };
        let p = &self.points;
        for (i, &(t, v)) in p.iter().enumerate() {
            if v.is_zero() {
                push(t, Some(t));
            }
            if let Some(&(t1, v1)) = p.get(i + 1) {
                if v.is_zero() && v1.is_zero() {
                    push(t, Some(t1));
                } else if (v < Time::zero()) != (v1 < Time::zero()) && !v.is_zero() && !v1.is_zero() {
                    let z = t + (t1 - t) * v / (v - v1);
                    push(z, Some(z));
                }
            }
        }
        let &(t, v) = p.last().expect("nonempty");
        if v.is_zero() {
            push(t, None);
        }
        ZeroGeometry { intervals: out }
    }

    fn grid_step(&self) -> Option<Time> {
        None
    }

    fn domain_end(&self) -> Option<Time> {
        None
    }

    fn kinks(&self, t: Time) -> Vec<Time> {
        self.points.iter().map(|p| p.0).filter(|&s| s <= t).collect()
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.points.iter().map(|&(t, v)| format!("({}, {})", format_time(t), format_time(v))).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    breakpoints: Vec<[String; 2]>,
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TargetJson { breakpoints: self.points.iter().map(|&(t, v)| [format_time(t), format_time(v)]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = TargetJson::deserialize(d)?;
        let mut pts = Vec::with_capacity(raw.breakpoints.len());
        for [t, v] in raw.breakpoints {
            let t = parse_time(&t).ok_or_else(|| D::Error::custom(format!("bad time {t:?}")))?;
            let v = parse_time(&v).ok_or_else(|| D::Error::custom(format!("bad value {v:?}")))?;
            pts.push((t, v));
        }
        Target::new(pts).map_err(D::Error::custom)
    }
}

/// Validates `f` as a lattice target: breakpoints snapped to the grid and,
/// for reflected targets, `f >= 0`.
pub fn snap_target(f: &Target, dt: Time, kind: PathKind) -> Result<Target, MetricError> {
    if kind == PathKind::Reflected && !f.is_nonnegative() {
        return Err(MetricError::BadTarget("reflected targets must be nonnegative".into()));
    }
    f.snapped(dt)
}

fn check_domain(p: &dyn Profile, t: Time) -> Result<(), MetricError> {
    if let Some(end) = p.domain_end() {
        if t > end {
            return Err(MetricError::BeyondHorizon { t: format_time(t), end: format_time(end) });
        }
    }
    Ok(())
}

fn common_grid(f: &dyn Profile, g: &dyn Profile) -> Result<Option<Time>, MetricError> {
    match (f.grid_step(), g.grid_step()) {
        (Some(a), Some(b)) if a != b => Err(MetricError::GridMismatch(format_time(a), format_time(b))),
        (a, b) => Ok(a.or(b)),
    }
}

/// Sup of `|f - g|` over `[0, t]`: at grid points when either side lives on
/// a grid, otherwise at the union of breakpoints.
pub fn d_cu(f: &dyn Profile, g: &dyn Profile, t: Time) -> Result<f64, MetricError> {
    sup_diff(f, g, Time::zero(), t)
}

/// Sup of `|f - g|` over `[a, b]` with the same sampling rule as [`d_cu`].
pub fn sup_diff(f: &dyn Profile, g: &dyn Profile, a: Time, b: Time) -> Result<f64, MetricError> {
    check_domain(f, b)?;
    check_domain(g, b)?;
    let times: Vec<Time> = match common_grid(f, g)? {
        Some(dt) => {
            let k0 = (a / dt).ceil().to_integer();
            let k1 = (b / dt).floor().to_integer();
            (k0..=k1).map(|k| dt * Time::from_integer(k)).collect()
        }
        None => {
            let mut ts = f.kinks(b);
            ts.extend(g.kinks(b));
            ts.push(a);
            ts.push(b);
            ts.retain(|&s| s >= a);
            ts
        }
    };
    Ok(times.into_iter().map(|s| (f.value_at(s) - g.value_at(s)).abs()).fold(0.0, f64::max))
}

/// Exact zero-control distance on `[0, t]`: the least `delta` such that every
/// zero of either profile in `[0, t - delta]` lies within `delta` of a zero
/// of the other. `d_cz < delta` iff both inclusions hold strictly.
pub fn d_cz(f: &dyn Profile, g: &dyn Profile, t: Time) -> Result<Time, MetricError> {
    check_domain(f, t)?;
    check_domain(g, t)?;
    let zf = f.zero_geometry();
    let zg = g.zero_geometry();
    Ok(one_sided(&zf, &zg, t).max(one_sided(&zg, &zf, t)))
}

/// [`d_cz`] on precomputed zero geometries.
pub fn d_cz_geometry(zf: &ZeroGeometry, zg: &ZeroGeometry, t: Time) -> Time {
    one_sided(zf, zg, t).max(one_sided(zg, zf, t))
}

pub fn d_cz_f64(f: &dyn Profile, g: &dyn Profile, t: Time) -> Result<f64, MetricError> {
    d_cz(f, g, t).map(to_f64)
}

/// The inclusion `Z_{t-delta}(f) in Z(g) + (-delta, delta)` in both
/// directions, checked on zero sets sampled at half-grid points. Independent
/// of [`d_cz`]; used as its oracle.
pub fn zero_inclusions_hold(f: &LatticePath, g: &LatticePath, t: Time, delta: Time) -> bool {
    let hf = half_grid_zeros(f);
    let hg = half_grid_zeros(g);
    let half = f.dt() / Time::from_integer(2);
    let one_way = |a: &[i128], b: &[i128]| {
        a.iter().all(|&z| {
            let zt = half * Time::from_integer(z);
            if zt > t - delta {
                return true;
            }
            b.iter().any(|&y| (half * Time::from_integer(y - z)).abs() < delta)
        })
    };
    one_way(&hf, &hg) && one_way(&hg, &hf)
}

fn half_grid_zeros(p: &LatticePath) -> Vec<i128> {
    let v = p.coords();
    let mut out = Vec::new();
    for k in 0..v.len() {
        if v[k] == 0 {
            out.push(2 * k as i128);
            if k + 1 < v.len() && v[k + 1] == 0 {
                out.push(2 * k as i128 + 1);
            }
        }
    }
    out
}

/// Bisection on [`zero_inclusions_hold`] down to width `tol`.
pub fn d_cz_bisect(f: &LatticePath, g: &LatticePath, t: Time, tol: Time) -> Time {
    let (mut lo, mut hi) = (Time::zero(), t + tol);
    while hi - lo > tol {
        let mid = (lo + hi) / Time::from_integer(2);
        if zero_inclusions_hold(f, g, t, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Center of a CUCZ ball.
#[derive(Debug, Clone, PartialEq)]
pub enum Center {
    Path(LatticePath),
    Target(Target),
}

impl Center {
    pub fn as_profile(&self) -> &dyn Profile {
        match self {
            Center::Path(p) => p,
            Center::Target(t) => t,
        }
    }
}

/// `V_t(f, rho, delta) = { g : d_cu(f, g) < rho, d_cz(f, g) < delta }`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuczBall {
    pub center: Center,
    pub t: Time,
    pub rho: f64,
    pub delta: Time,
}

impl CuczBall {
    pub fn new(center: Center, t: Time, rho: f64, delta: Time) -> Self {
        assert!(t > Time::zero() && rho > 0.0 && delta > Time::zero(), "ball radii must be positive");
        CuczBall { center, t, rho, delta }
    }
}

pub fn in_ball(g: &dyn Profile, ball: &CuczBall) -> Result<bool, MetricError> {
    let f = ball.center.as_profile();
    Ok(d_cu(f, g, ball.t)? < ball.rho && d_cz(f, g, ball.t)? < ball.delta)
}

/// `U_{a,b}(f, rho, delta)`: uniform closeness on `[a, b]` plus a zero of
/// `g` in `(a, a + delta)` and in `(b - delta, b)`.
pub fn in_bridge_ball(
    g: &dyn Profile,
    f: &dyn Profile,
    a: Time,
    b: Time,
    rho: f64,
    delta: Time,
) -> Result<bool, MetricError> {
    if sup_diff(f, g, a, b)? >= rho {
        return Ok(false);
    }
    let z = g.zero_geometry();
    Ok(z.hits_open(a, a + delta) && z.hits_open(b - delta, b))
}
