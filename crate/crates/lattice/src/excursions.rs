//! Excursion decomposition, excursion numbering and sign families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::path::{LatticePath, PathKind, Time};
use crate::rationals::{first_in_interval, RationalIndex};
use crate::seeds::mix64;

/// A maximal run of positive values, bounded by zeros at grid indices `g`
/// and `d`. An excursion cut by the horizon has `d = steps()` and
/// `complete = false`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Excursion {
    pub g: usize,
    pub d: usize,
    pub complete: bool,
    pub number: RationalIndex,
    /// Maximum on `[g, d]`, lattice units.
    pub height: i64,
    /// First index where the maximum is attained.
    pub peak: usize,
}

impl Excursion {
    pub fn length(&self) -> usize {
        self.d - self.g
    }

    /// True when `k` is strictly inside the excursion interval.
    pub fn contains(&self, k: usize) -> bool {
        self.g < k && k < self.d
    }
}

/// Excursions of `|w|` in time order.
pub fn decompose(w: &LatticePath) -> Vec<Excursion> {
    excursions_from(w, 0)
}

/// Excursions of `|w|` whose left end is at index `start` or later.
/// `w` must vanish at `start`.
pub fn excursions_from(w: &LatticePath, start: usize) -> Vec<Excursion> {
    let v = w.coords();
    let n = w.steps();
    let mut out = Vec::new();
    let mut k = start;
    while k < n {
        if v[k + 1] == 0 {
            k += 1;
            continue;
        }
        let g = k;
        let mut d = k + 1;
        let (mut height, mut peak) = (v[d].abs(), d);
        while d < n && v[d] != 0 {
            d += 1;
            if v[d].abs() > height {
                height = v[d].abs();
                peak = d;
            }
        }
        let complete = v[d] == 0;
        let number = first_in_interval(w.time(g), w.time(d)).expect("excursion interval is nonempty");
        out.push(Excursion { g, d, complete, number, height, peak });
        k = d;
    }
    out
}

/// Base rule of a sign family, used where no override or cut applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignBase {
    /// Pseudorandom sign keyed by `(seed, p, q)`.
    Random(u64),
    Plus,
    Minus,
}

/// Cut point of a hybrid family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cut {
    At(Time),
    Infinite,
}

/// A map from positive rationals to signs with finitely many imposed values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFamily {
    pub base: SignBase,
    pub overrides: BTreeMap<RationalIndex, i8>,
    /// Rationals `<= cut` map to +1 unless overridden.
    pub cut: Option<Time>,
}

impl SignFamily {
    pub fn random(seed: u64) -> Self {
        Self::with_base(SignBase::Random(seed))
    }

    pub fn plus() -> Self {
        Self::with_base(SignBase::Plus)
    }

    pub fn minus() -> Self {
        Self::with_base(SignBase::Minus)
    }

    pub fn with_base(base: SignBase) -> Self {
        SignFamily { base, overrides: BTreeMap::new(), cut: None }
    }

    /// Builder form of a single override.
    pub fn set(mut self, q: RationalIndex, sign: i8) -> Self {
        self.overrides.insert(q, normalize(sign));
        self
    }

    pub fn with_overrides(mut self, overrides: impl IntoIterator<Item = (RationalIndex, i8)>) -> Self {
        for (q, s) in overrides {
            self.overrides.insert(q, normalize(s));
        }
        self
    }

    pub fn sign(&self, q: RationalIndex) -> i8 {
        if let Some(&s) = self.overrides.get(&q) {
            return s;
        }
        if let Some(c) = self.cut {
            if q.value() <= c {
                return 1;
            }
        }
        match self.base {
            SignBase::Plus => 1,
            SignBase::Minus => -1,
            SignBase::Random(seed) => random_sign(seed, q),
        }
    }

    /// The constant sign of the family, when it has one.
    pub fn uniform_sign(&self) -> Option<i8> {
        if !self.overrides.is_empty() {
            return None;
        }
        match (self.base, self.cut) {
            (SignBase::Plus, _) => Some(1),
            (SignBase::Minus, None) => Some(-1),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match self.base {
            SignBase::Random(s) => s,
            _ => 0,
        }
    }
}

fn normalize(sign: i8) -> i8 {
    if sign < 0 {
        -1
    } else {
        1
    }
}

fn random_sign(seed: u64, q: RationalIndex) -> i8 {
    let h = mix64(seed ^ mix64(q.p().wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ mix64(q.q())));
    if h >> 63 == 1 {
        1
    } else {
        -1
    }
}

/// Family equal to +1 on rationals `<= cut` and to `e` beyond.
pub fn hybrid(cut: Cut, e: &SignFamily) -> SignFamily {
    match cut {
        Cut::Infinite => SignFamily::plus(),
        Cut::At(c) => {
            let overrides = e.overrides.iter().filter(|(q, _)| q.value() > c).map(|(q, s)| (*q, *s)).collect();
            let cut = Some(e.cut.map_or(c, |old| old.max(c)));
            SignFamily { base: e.base, overrides, cut }
        }
    }
}

/// `e . w`: each excursion of `|w|` is multiplied by the sign of its number.
/// Signed input is multiplied as is, so the action is an involution.
pub fn apply_signs(e: &SignFamily, w: &LatticePath) -> LatticePath {
    let mut coords: Vec<i64> = w.coords().iter().map(|x| x.abs()).collect();
    let base = match w.kind() {
        PathKind::Reflected => None,
        PathKind::Signed => Some(w.coords()),
    };
    match e.uniform_sign() {
        Some(s) => {
            for (k, x) in coords.iter_mut().enumerate() {
                let orig = base.map_or(1, |b| b[k].signum());
                *x *= s as i64 * if orig == 0 { 1 } else { orig };
            }
        }
        None => {
            for ex in decompose(w) {
                let s = e.sign(ex.number) as i64;
                for k in ex.g + 1..=ex.d {
                    let orig = base.map_or(1, |b| b[k].signum());
                    coords[k] *= s * if orig == 0 { 1 } else { orig };
                }
            }
        }
    }
    LatticePath::from_parts(w.dt(), PathKind::Signed, coords)
}

/// Sign of `w` on each excursion of `|w|`, keyed by excursion number.
pub fn extract_signs(w: &LatticePath) -> BTreeMap<RationalIndex, i8> {
    decompose(w)
        .into_iter()
        .map(|ex| {
            let s = w.coords()[ex.g + 1].signum() as i8;
            (ex.number, s)
        })
        .collect()
}
