//! Positive rationals ordered by numerator + denominator, then numerator.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::path::{time_from_f64, Time};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RationalError {
    #[error("empty interval ({a}, {b})")]
    EmptyInterval { a: String, b: String },
    #[error("interval endpoint must be nonnegative and finite")]
    BadEndpoint,
    #[error("cannot parse {0:?} as a reduced positive fraction")]
    Parse(String),
}

/// Reduced positive fraction `p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalIndex {
    p: u64,
    q: u64,
}

impl RationalIndex {
    /// Reduces `p/q`; both must be positive.
    pub fn new(p: u64, q: u64) -> Option<Self> {
        if p == 0 || q == 0 {
            return None;
        }
        let g = p.gcd(&q);
        Some(RationalIndex { p: p / g, q: q / g })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> Time {
        Time::new(self.p as i128, self.q as i128)
    }

    fn key(&self) -> (u64, u64) {
        (self.p + self.q, self.p)
    }
}

impl Ord for RationalIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for RationalIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RationalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalIndex {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || RationalError::Parse(s.to_string());
        let (p, q) = s.trim().split_once('/').ok_or_else(err)?;
        let p: u64 = p.trim().parse().map_err(|_| err())?;
        let q: u64 = q.trim().parse().map_err(|_| err())?;
        let r = RationalIndex::new(p, q).ok_or_else(err)?;
        if r.p != p || r.q != q {
            return Err(err());
        }
        Ok(r)
    }
}

impl Serialize for RationalIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The first `limit` reduced fractions in enumeration order.
pub fn enumerate(limit: usize) -> Vec<RationalIndex> {
    let mut out = Vec::with_capacity(limit);
    let mut s = 2u64;
    while out.len() < limit {
        for p in 1..s {
            if out.len() == limit {
                break;
            }
            if p.gcd(&(s - p)) == 1 {
                out.push(RationalIndex { p, q: s - p });
            }
        }
        s += 1;
    }
    out
}

/// Order-minimal reduced fraction strictly inside `(a, b)`.
///
/// The minimal element coincides with the Stern-Brocot simplest fraction of
/// the interval, which minimises numerator and denominator simultaneously,
/// so it is found by a continued-fraction descent instead of a scan.
pub fn first_in_interval(a: Time, b: Time) -> Result<RationalIndex, RationalError> {
    check_interval(a, b)?;
    let (p, q) = simplest_between(a, Some(b));
    Ok(RationalIndex::new(p as u64, q as u64).expect("positive fraction"))
}

/// Float front end; endpoints are converted to their exact binary values.
pub fn first_in_interval_f64(a: f64, b: f64) -> Result<RationalIndex, RationalError> {
    let a = time_from_f64(a).ok_or(RationalError::BadEndpoint)?;
    let b = time_from_f64(b).ok_or(RationalError::BadEndpoint)?;
    first_in_interval(a, b)
}

/// Direct scan over sums `s = 2, 3, ...`; slow for short intervals but
/// transparent. Used to cross-check [`first_in_interval`].
pub fn first_in_interval_scan(a: Time, b: Time) -> Result<RationalIndex, RationalError> {
    check_interval(a, b)?;
    let one = Time::one();
    let bound = (b.ceil() + one) * ((one / (b - a)).ceil() + Time::from_integer(2));
    let mut s: i128 = 2;
    loop {
        assert!(Time::from_integer(s) <= bound, "scan exceeded its termination bound");
        let st = Time::from_integer(s);
        // a < p/(s-p) < b  <=>  a*s/(1+a) < p < b*s/(1+b)
        let lo = (a * st / (one + a)).floor().to_integer() + 1;
        let hi = (b * st / (one + b)).ceil().to_integer() - 1;
        for p in lo.max(1)..=hi.min(s - 1) {
            let q = s - p;
            let x = Time::new(p, q);
            if p.gcd(&q) == 1 && a < x && x < b {
                return Ok(RationalIndex { p: p as u64, q: q as u64 });
            }
        }
        s += 1;
    }
}

fn check_interval(a: Time, b: Time) -> Result<(), RationalError> {
    if a < Time::zero() {
        return Err(RationalError::BadEndpoint);
    }
    if a >= b {
        return Err(RationalError::EmptyInterval { a: a.to_string(), b: b.to_string() });
    }
    Ok(())
}

/// Simplest fraction in the open interval `(a, b)`, `b = None` meaning +inf.
fn simplest_between(a: Time, b: Option<Time>) -> (i128, i128) {
    let n = a.floor().to_integer();
    let next = Time::from_integer(n + 1);
    if b.map_or(true, |b| next < b) {
        return (n + 1, 1);
    }
    let b = b.expect("bounded here");
    let a_frac = a - Time::from_integer(n);
    let b_frac = b - Time::from_integer(n);
    // x in (a_frac, b_frac) within (0, 1]; write x = 1/y.
    let lo = Time::one() / b_frac;
    let (yp, yq) = if a_frac.is_zero() {
        simplest_between(lo, None)
    } else {
        simplest_between(lo, Some(Time::one() / a_frac))
    };
    (n * yp + yq, yp)
}
