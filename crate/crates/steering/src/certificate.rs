//! Replayable records of steering runs.

use std::collections::BTreeMap;

use lattice::levy::inverse_step_after;
use lattice::path::{format_time, parse_time, LatticePath, Time};
use lattice::{apply_signs, RationalIndex, SignBase, SignFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub q: RationalIndex,
    pub sign: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    Random,
    Plus,
    Minus,
}

/// One application of `F_a` with a family given by base rule, seed and
/// overrides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(with = "time_str")]
    pub a: Time,
    pub seed: u64,
    pub overrides: Vec<Override>,
    #[serde(default = "random_base")]
    pub base: Base,
}

fn random_base() -> Base {
    Base::Random
}

impl Step {
    pub fn new(a: Time, family: &SignFamily) -> Self {
        assert!(family.cut.is_none(), "certificate families carry no cut");
        let (base, seed) = match family.base {
            SignBase::Random(s) => (Base::Random, s),
            SignBase::Plus => (Base::Plus, 0),
            SignBase::Minus => (Base::Minus, 0),
        };
        let overrides = family.overrides.iter().map(|(&q, &sign)| Override { q, sign }).collect();
        Step { a, seed, overrides, base }
    }

    pub fn family(&self) -> SignFamily {
        let base = match self.base {
            Base::Random => SignBase::Random(self.seed),
            Base::Plus => SignBase::Plus,
            Base::Minus => SignBase::Minus,
        };
        let overrides: BTreeMap<_, _> = self.overrides.iter().map(|o| (o.q, o.sign)).collect();
        SignFamily { base, overrides, cut: None }
    }

    pub fn apply(&self, r: &LatticePath) -> LatticePath {
        inverse_step_after(self.a, &self.family(), r)
    }
}

/// Ball the run aimed at, in the exchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub target: lattice::Target,
    #[serde(with = "time_str")]
    pub t: Time,
    pub rho: f64,
    #[serde(with = "time_str")]
    pub delta: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub initial_digest: u64,
    pub final_digest: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<BallSpec>,
    pub steps: Vec<Step>,
    /// Final sign assignment on the excursions of the last reflected path,
    /// +1 where not listed. The final digest is then that of the signed path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<Override>>,
}

impl Certificate {
    pub fn sign_family(&self) -> Option<SignFamily> {
        self.signs.as_ref().map(|s| SignFamily::plus().with_overrides(s.iter().map(|o| (o.q, o.sign))))
    }

    pub fn override_count(&self) -> usize {
        self.steps.iter().map(|s| s.overrides.len()).sum::<usize>() + self.signs.as_ref().map_or(0, Vec::len)
    }

    /// Replays every step from `initial`; checks both digests.
    pub fn replay(&self, initial: &LatticePath) -> Result<LatticePath, ReplayError> {
        if initial.digest() != self.initial_digest {
            return Err(ReplayError::InitialDigest { expected: self.initial_digest, got: initial.digest() });
        }
        let mut r = initial.clone();
        for s in &self.steps {
            r = s.apply(&r);
        }
        if let Some(e) = self.sign_family() {
            r = apply_signs(&e, &r);
        }
        if r.digest() != self.final_digest {
            return Err(ReplayError::FinalDigest { expected: self.final_digest, got: r.digest() });
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("initial path digest {got} does not match certificate ({expected})")]
    InitialDigest { expected: u64, got: u64 },
    #[error("replayed path digest {got} does not match certificate ({expected})")]
    FinalDigest { expected: u64, got: u64 },
}

mod time_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Time, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_time(*t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Time, D::Error> {
        let s = String::deserialize(d)?;
        parse_time(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}
