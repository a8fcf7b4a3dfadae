//! Piecewise-affine profiles on a bounded interval, with the level-set
//! helpers the bridge construction needs.

use lattice::path::Time;
use lattice::Target;
use num_traits::{Signed, Zero};

use crate::SteerError;

/// Continuous piecewise-affine function on `[start, end]` given by
/// breakpoints with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pts: Vec<(Time, Time)>,
}

impl Segment {
    pub fn new(pts: Vec<(Time, Time)>) -> Result<Self, SteerError> {
        if pts.len() < 2 {
            return Err(SteerError::BadArgument("a profile needs two breakpoints".into()));
        }
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SteerError::BadArgument("breakpoint times must increase".into()));
        }
        Ok(Segment { pts })
    }

    /// `f` restricted to `[0, t]`.
    pub fn from_target(f: &Target, t: Time) -> Result<Self, SteerError> {
        let mut pts: Vec<(Time, Time)> = f.points().iter().copied().filter(|&(s, _)| s < t).collect();
        pts.push((t, f.value(t)));
        Segment::new(pts)
    }

    pub fn points(&self) -> &[(Time, Time)] {
        &self.pts
    }

    pub fn start(&self) -> Time {
        self.pts[0].0
    }

    pub fn end(&self) -> Time {
        self.pts[self.pts.len() - 1].0
    }

    /// Value at `t`, clamped to the end values outside the interval.
    pub fn value(&self, t: Time) -> Time {
        let p = &self.pts;
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

    pub fn sup(&self) -> Time {
        self.pts.iter().map(|p| p.1).max().expect("nonempty")
    }

    pub fn inf(&self) -> Time {
        self.pts.iter().map(|p| p.1).min().expect("nonempty")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.inf() >= Time::zero()
    }

    pub fn is_zero(&self) -> bool {
        self.pts.iter().all(|p| p.1.is_zero())
    }

    /// `|f|` with sign changes inserted as breakpoints.
    pub fn abs(&self) -> Segment {
        let mut pts = Vec::with_capacity(self.pts.len() * 2);
        for w in self.pts.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            pts.push((t0, v0.abs()));
            if (v0.is_negative() && v1.is_positive()) || (v0.is_positive() && v1.is_negative()) {
                pts.push((t0 + (t1 - t0) * v0 / (v0 - v1), Time::zero()));
            }
        }
        let (t, v) = self.pts[self.pts.len() - 1];
        pts.push((t, v.abs()));
        Segment { pts }
    }

    /// `f` on `[a, b]`, `start <= a < b <= end`.
    pub fn restrict(&self, a: Time, b: Time) -> Segment {
        assert!(self.start() <= a && a < b && b <= self.end(), "restriction outside the domain");
        let mut pts = vec![(a, self.value(a))];
        pts.extend(self.pts.iter().copied().filter(|&(s, _)| a < s && s < b));
        pts.push((b, self.value(b)));
        Segment { pts }
    }

    /// Interior breakpoints, endpoints excluded.
    pub fn interior(&self) -> &[(Time, Time)] {
        &self.pts[1..self.pts.len() - 1]
    }

    /// Smallest value at an interior breakpoint.
    pub fn interior_min(&self) -> Option<Time> {
        self.interior().iter().map(|p| p.1).min()
    }

    /// Adds every point where `f` crosses the value of some breakpoint, so
    /// that each level `f(t_i)` is attained only at breakpoints.
    pub fn complete_subdivision(&self) -> Segment {
        let mut levels: Vec<Time> = self.pts.iter().map(|p| p.1).collect();
        levels.sort();
        levels.dedup();
        let mut pts = Vec::new();
        for w in self.pts.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            pts.push((t0, v0));
            let (lo, hi) = (v0.min(v1), v0.max(v1));
            let mut inner: Vec<Time> = levels
                .iter()
                .filter(|&&y| lo < y && y < hi)
                .map(|&y| t0 + (t1 - t0) * (y - v0) / (v1 - v0))
                .collect();
            inner.sort();
            pts.extend(inner.into_iter().map(|s| (s, self.value(s))));
        }
        pts.push(self.pts[self.pts.len() - 1]);
        Segment { pts }
    }

    /// First time `f` reaches `y`, for `0 <= y <= f(t_1)` on the first piece.
    pub fn tau_left(&self, y: Time) -> Time {
        let (t0, v0) = self.pts[0];
        let (t1, v1) = self.pts[1];
        assert!(v0 <= y && y <= v1, "level outside the left ramp");
        if v1 == v0 {
            return t0;
        }
        t0 + (t1 - t0) * (y - v0) / (v1 - v0)
    }

    /// Last time `f` is at `y`, for levels on the last piece.
    pub fn tau_right(&self, y: Time) -> Time {
        let n = self.pts.len();
        let (t0, v0) = self.pts[n - 2];
        let (t1, v1) = self.pts[n - 1];
        assert!(v1 <= y && y <= v0, "level outside the right ramp");
        if v1 == v0 {
            return t1;
        }
        t0 + (t1 - t0) * (v0 - y) / (v0 - v1)
    }

    /// `f - y` on `[tau_left(y), tau_right(y)]`, for `y` at most the
    /// interior minimum.
    pub fn lowered(&self, y: Time) -> Segment {
        let (a, b) = (self.tau_left(y), self.tau_right(y));
        let r = self.restrict(a, b);
        Segment { pts: r.pts.into_iter().map(|(s, v)| (s, (v - y).max(Time::zero()))).collect() }
    }

    /// Shortest gap between consecutive breakpoints.
    pub fn min_gap(&self) -> Time {
        self.pts.windows(2).map(|w| w[1].0 - w[0].0).min().expect("two points")
    }
}

impl Segment {
    /// The segment as a target on `[0, inf)`: zero before `start`, constant
    /// after `end`. Requires `f(start) = 0`.
    pub fn to_target(&self) -> Result<Target, SteerError> {
        let mut pts = Vec::with_capacity(self.pts.len() + 1);
        if !self.start().is_zero() {
            pts.push((Time::zero(), Time::zero()));
        }
        pts.extend(self.pts.iter().copied());
        Ok(Target::new(pts)?)
    }

    /// Same breakpoints with the value at time `z` replaced by 0.
    pub fn zeroed_at(&self, z: Time) -> Segment {
        Segment { pts: self.pts.iter().map(|&(s, v)| (s, if s == z { Time::zero() } else { v })).collect() }
    }
}
