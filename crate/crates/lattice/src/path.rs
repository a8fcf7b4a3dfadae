//! Lattice paths: scaled simple random walks on a uniform rational time grid.
//!
//! Values are stored as integer lattice coordinates; the real value at step
//! `k` is `coords[k] * dx` with `dx = sqrt(dt)`.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Exact rational; used for grid times and target values.
pub type Time = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    /// Arbitrary sign; increments in {-1, 0, +1} lattice units.
    Signed,
    /// Nonnegative; increments in {-1, 0, +1} lattice units.
    Reflected,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("time step must be positive, got {0}")]
    BadStep(Time),
    #[error("path must contain at least one point")]
    Empty,
    #[error("path must start at 0, got {0}")]
    NonZeroStart(i64),
    #[error("increment {delta} at step {index} is not a lattice move")]
    BadIncrement { index: usize, delta: i64 },
    #[error("reflected path is negative at step {0}")]
    Negative(usize),
    #[error("interval [{a}, {b}] is empty or leaves the grid")]
    BadInterval { a: usize, b: usize },
    #[error("expected a {expected:?} path")]
    WrongKind { expected: PathKind },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    dt: Time,
    kind: PathKind,
    coords: Vec<i64>,
}

/// Grid zeros of a path, as exact times. Always contains 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSet {
    pub times: Vec<Time>,
}

impl LatticePath {
    pub fn new(dt: Time, kind: PathKind, coords: Vec<i64>) -> Result<Self, PathError> {
        if dt <= Time::zero() {
            return Err(PathError::BadStep(dt));
        }
        let first = *coords.first().ok_or(PathError::Empty)?;
        if first != 0 {
            return Err(PathError::NonZeroStart(first));
        }
        for (i, w) in coords.windows(2).enumerate() {
            let delta = w[1] - w[0];
            if delta.abs() > 1 {
                return Err(PathError::BadIncrement { index: i + 1, delta });
            }
        }
        if kind == PathKind::Reflected {
            if let Some(i) = coords.iter().position(|&x| x < 0) {
                return Err(PathError::Negative(i));
            }
        }
        Ok(LatticePath { dt, kind, coords })
    }

    pub fn signed(dt: Time, coords: Vec<i64>) -> Result<Self, PathError> {
        Self::new(dt, PathKind::Signed, coords)
    }

    pub fn reflected(dt: Time, coords: Vec<i64>) -> Result<Self, PathError> {
        Self::new(dt, PathKind::Reflected, coords)
    }

    /// Caller guarantees the invariants of `kind`.
    pub(crate) fn from_parts(dt: Time, kind: PathKind, coords: Vec<i64>) -> Self {
        debug_assert!(Self::new(dt, kind, coords.clone()).is_ok());
        LatticePath { dt, kind, coords }
    }

    pub fn dt(&self) -> Time {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dt.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.coords
    }

    /// Number of increments.
    pub fn steps(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn horizon(&self) -> Time {
        self.time(self.steps())
    }

    pub fn time(&self, k: usize) -> Time {
        self.dt * Time::from_integer(k as i128)
    }

    pub fn time_f64(&self, k: usize) -> f64 {
        self.time(k).to_f64().unwrap_or(f64::NAN)
    }

    pub fn value(&self, k: usize) -> f64 {
        self.coords[k] as f64 * self.dx()
    }

    /// Index of the grid point at exactly `t`, if any.
    pub fn index_at(&self, t: Time) -> Option<usize> {
        let k = t / self.dt;
        if k.is_integer() && *k.numer() >= 0 && (*k.numer() as usize) <= self.steps() {
            Some(*k.numer() as usize)
        } else {
            None
        }
    }

    /// Smallest `k` with `k*dt >= t` (may exceed `steps()`).
    pub fn index_ceil(&self, t: Time) -> usize {
        let k = (t / self.dt).ceil().to_integer();
        k.max(0) as usize
    }

    /// Largest `k` with `k*dt <= t`, clamped to the grid.
    pub fn index_floor(&self, t: Time) -> usize {
        let k = (t / self.dt).floor().to_integer();
        (k.max(0) as usize).min(self.steps())
    }

    /// True when every increment is exactly one lattice unit.
    pub fn is_strict_walk(&self) -> bool {
        self.coords.windows(2).all(|w| (w[1] - w[0]).abs() == 1)
    }

    /// True for reflected paths that only stay flat at 0, the shape produced
    /// by reflecting a strict walk.
    pub fn dwells_only_at_zero(&self) -> bool {
        self.coords.windows(2).all(|w| w[1] != w[0] || w[0] == 0)
    }

    pub fn running_min(&self) -> Vec<i64> {
        prefix_scan(&self.coords, i64::min)
    }

    pub fn running_max(&self) -> Vec<i64> {
        prefix_scan(&self.coords, i64::max)
    }

    /// `w - running_min(w)`.
    pub fn reflect(&self) -> LatticePath {
        let m = self.running_min();
        let coords = self.coords.iter().zip(&m).map(|(x, m)| x - m).collect();
        LatticePath::from_parts(self.dt, PathKind::Reflected, coords)
    }

    /// `running_max(w) - w`, the reflection of `-w`.
    pub fn complement(&self) -> LatticePath {
        let m = self.running_max();
        let coords = self.coords.iter().zip(&m).map(|(x, m)| m - x).collect();
        LatticePath::from_parts(self.dt, PathKind::Reflected, coords)
    }

    pub fn abs(&self) -> LatticePath {
        let coords = self.coords.iter().map(|x| x.abs()).collect();
        LatticePath::from_parts(self.dt, PathKind::Reflected, coords)
    }

    /// Relabel as a signed path (always valid).
    pub fn as_signed(&self) -> LatticePath {
        LatticePath { dt: self.dt, kind: PathKind::Signed, coords: self.coords.clone() }
    }

    pub fn require(&self, kind: PathKind) -> Result<(), PathError> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(PathError::WrongKind { expected: kind })
        }
    }

    /// max - min of the coordinates on grid indices `a..=b`.
    pub fn amplitude(&self, a: usize, b: usize) -> Result<i64, PathError> {
        if a > b || b > self.steps() {
            return Err(PathError::BadInterval { a, b });
        }
        let s = &self.coords[a..=b];
        let hi = s.iter().max().copied().unwrap_or(0);
        let lo = s.iter().min().copied().unwrap_or(0);
        Ok(hi - lo)
    }

    /// Number of completed oscillations of amplitude `h` (lattice units) up
    /// to grid index `t`.
    pub fn oscillation_count(&self, t: usize, h: f64) -> usize {
        assert!(h > 0.0, "oscillation height must be positive");
        let t = t.min(self.steps());
        let mut n = 0;
        let (mut lo, mut hi) = (self.coords[0], self.coords[0]);
        for &x in &self.coords[1..=t] {
            lo = lo.min(x);
            hi = hi.max(x);
            if (hi - lo) as f64 >= h {
                n += 1;
                lo = x;
                hi = x;
            }
        }
        n
    }

    /// Indices `k <= t` with value 0.
    pub fn zero_indices(&self, t: usize) -> Vec<usize> {
        let t = t.min(self.steps());
        (0..=t).filter(|&k| self.coords[k] == 0).collect()
    }

    /// Zero set up to index `t`, or the whole grid for `None`.
    pub fn zero_set(&self, t: Option<usize>) -> ZeroSet {
        let t = t.unwrap_or(self.steps());
        ZeroSet { times: self.zero_indices(t).into_iter().map(|k| self.time(k)).collect() }
    }

    /// First `k + 1` points.
    pub fn prefix(&self, k: usize) -> LatticePath {
        LatticePath { dt: self.dt, kind: self.kind, coords: self.coords[..=k].to_vec() }
    }

    /// Stable 64-bit digest of the lattice coordinates.
    pub fn digest(&self) -> u64 {
        coords_digest(&self.coords)
    }

    /// Digest of the coordinates on indices `0..=k`.
    pub fn prefix_digest(&self, k: usize) -> u64 {
        coords_digest(&self.coords[..=k.min(self.steps())])
    }

    /// Sup of |value| on indices `a..=b`, in lattice units.
    pub fn sup_abs(&self, a: usize, b: usize) -> i64 {
        let b = b.min(self.steps());
        if a > b {
            return 0;
        }
        self.coords[a..=b].iter().map(|x| x.abs()).max().unwrap_or(0)
    }
}

fn prefix_scan(xs: &[i64], f: fn(i64, i64) -> i64) -> Vec<i64> {
    let mut acc = xs[0];
    xs.iter()
        .map(|&x| {
            acc = f(acc, x);
            acc
        })
        .collect()
}

pub fn coords_digest(coords: &[i64]) -> u64 {
    let mut h = Sha256::new();
    for x in coords {
        h.update(x.to_le_bytes());
    }
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}

/// Scaled simple random walk with `steps` iid increments.
pub fn sample_srw(steps: usize, dt: Time, seed: u64) -> LatticePath {
    assert!(steps >= 1, "a walk needs at least one step");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(steps + 1);
    coords.push(0i64);
    let mut word = 0u64;
    let mut x = 0i64;
    for i in 0..steps {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        x += if (word >> (i % 64)) & 1 == 1 { 1 } else { -1 };
        coords.push(x);
    }
    LatticePath::signed(dt, coords).expect("walk increments are unit steps")
}

/// Parse `"p/q"`, an integer or a plain decimal such as `"-0.125"` into an
/// exact rational.
pub fn parse_time(s: &str) -> Option<Time> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().ok()?;
        let q: i128 = q.trim().parse().ok()?;
        return (q != 0).then(|| Time::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: i128 = match int.trim_start_matches(['-', '+']) {
            "" => 0,
            digits => digits.parse().ok()?,
        };
        let den = 10i128.checked_pow(frac.len() as u32)?;
        let num = int_part.checked_mul(den)?.checked_add(frac.parse::<i128>().ok()?)?;
        return Some(Time::new(if neg { -num } else { num }, den));
    }
    s.parse::<i128>().ok().map(Time::from_integer)
}

pub fn format_time(t: Time) -> String {
    if t.is_integer() {
        t.numer().to_string()
    } else {
        format!("{}/{}", t.numer(), t.denom())
    }
}

/// Exact rational value of a finite float, if it fits in 128-bit terms.
pub fn time_from_f64(x: f64) -> Option<Time> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(Time::zero());
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i128;
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1i128 << 52), exp - 1075) };
    if e >= 0 {
        if e > 70 {
            return None;
        }
        Some(Time::from_integer(sign * (mant << e)))
    } else {
        let shift = -e;
        let tz = (mant.trailing_zeros() as i32).min(shift);
        let (m, s) = (mant >> tz, shift - tz);
        if s > 125 {
            return None;
        }
        Some(Time::new(sign * m, 1i128 << s))
    }
}
