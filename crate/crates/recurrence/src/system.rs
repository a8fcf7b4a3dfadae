//! Finite measure-preserving systems with exact rational weights.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Prob = BigRational;
pub type StateSet = BTreeSet<usize>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("a system needs at least one state")]
    Empty,
    #[error("n = {n} but T has {t} entries and pi has {pi}")]
    Length { n: usize, t: usize, pi: usize },
    #[error("T({x}) = {y} is not a state")]
    OutOfRange { x: usize, y: usize },
    #[error("pi({0}) is negative")]
    Negative(usize),
    #[error("pi sums to {0}, not 1")]
    Mass(String),
    #[error("pi(T^-1 {{{y}}}) = {pre} but pi({y}) = {own}")]
    NotInvariant { y: usize, pre: String, own: String },
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
}

/// A map `T` on `{0, .., n-1}` with a `T`-invariant law `pi` and its
/// retrograde kernel
/// `K(y, x) = pi(x) [T(x) = y] / pi(T^-1 {y})`.
///
/// Rows at states `y` with `pi(T^-1 {y}) = 0` are uniform over all states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct FiniteSystem {
    t: Vec<usize>,
    pi: Vec<Prob>,
    k: Vec<Vec<Prob>>,
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    n: usize,
    #[serde(rename = "T")]
    t: Vec<usize>,
    pi: Vec<String>,
}

impl TryFrom<SystemJson> for FiniteSystem {
    type Error = SystemError;

    fn try_from(j: SystemJson) -> Result<Self, SystemError> {
        if j.t.len() != j.n || j.pi.len() != j.n {
            return Err(SystemError::Length { n: j.n, t: j.t.len(), pi: j.pi.len() });
        }
        let pi = j.pi.iter().map(|s| parse_prob(s)).collect::<Result<Vec<_>, _>>()?;
        FiniteSystem::new(j.t, pi)
    }
}

impl From<FiniteSystem> for SystemJson {
    fn from(s: FiniteSystem) -> Self {
        SystemJson { n: s.n(), t: s.t, pi: s.pi.iter().map(|p| p.to_string()).collect() }
    }
}

/// Parses `p/q` or an integer.
pub fn parse_prob(s: &str) -> Result<Prob, SystemError> {
    s.trim().parse::<Prob>().map_err(|_| SystemError::Parse(s.to_string()))
}

impl FiniteSystem {
    pub fn new(t: Vec<usize>, pi: Vec<Prob>) -> Result<Self, SystemError> {
        let n = t.len();
        if n == 0 {
            return Err(SystemError::Empty);
        }
        if pi.len() != n {
            return Err(SystemError::Length { n, t: n, pi: pi.len() });
        }
        if let Some((x, &y)) = t.iter().enumerate().find(|(_, &y)| y >= n) {
            return Err(SystemError::OutOfRange { x, y });
        }
        if let Some(x) = pi.iter().position(|p| p.is_negative()) {
            return Err(SystemError::Negative(x));
        }
        let total: Prob = pi.iter().sum();
        if !total.is_one() {
            return Err(SystemError::Mass(total.to_string()));
        }
        let mut pre = vec![Prob::zero(); n];
        for (x, &y) in t.iter().enumerate() {
            pre[y] += &pi[x];
        }
        for y in 0..n {
            if pre[y] != pi[y] {
                return Err(SystemError::NotInvariant { y, pre: pre[y].to_string(), own: pi[y].to_string() });
            }
        }
        let uniform = Prob::new(BigInt::one(), BigInt::from(n));
        let k = (0..n)
            .map(|y| {
                if pre[y].is_zero() {
                    vec![uniform.clone(); n]
                } else {
                    (0..n).map(|x| if t[x] == y { &pi[x] / &pre[y] } else { Prob::zero() }).collect()
                }
            })
            .collect();
        Ok(FiniteSystem { t, pi, k })
    }

    /// `T = id` with the uniform law.
    pub fn identity(n: usize) -> Result<Self, SystemError> {
        Self::new((0..n).collect(), uniform(n))
    }

    /// `T(x) = x + 1 mod n` with the uniform law.
    pub fn cyclic_shift(n: usize) -> Result<Self, SystemError> {
        Self::new((0..n).map(|x| (x + 1) % n).collect(), uniform(n))
    }

    /// A uniformly random permutation; `pi` is constant on each cycle with
    /// small random integer weights, some of which may be zero.
    pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Result<Self, SystemError> {
        let mut t: Vec<usize> = (0..n).collect();
        t.shuffle(rng);
        Self::weighted_on_cycles(t, rng)
    }

    /// A uniformly random map; `pi` lives on its cycles (the eventual image)
    /// and is constant on each cycle. Transient states are null.
    pub fn random_map<R: Rng>(n: usize, rng: &mut R) -> Result<Self, SystemError> {
        let t: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        Self::weighted_on_cycles(t, rng)
    }

    fn weighted_on_cycles<R: Rng>(t: Vec<usize>, rng: &mut R) -> Result<Self, SystemError> {
        let cycles = cycles(&t);
        if cycles.is_empty() {
            return Err(SystemError::Empty);
        }
        let mut w: Vec<u32> = cycles.iter().map(|_| rng.gen_range(0..5)).collect();
        if w.iter().all(|&x| x == 0) {
            let i = rng.gen_range(0..w.len());
            w[i] = 1;
        }
        let total: u64 = cycles.iter().zip(&w).map(|(c, &wi)| c.len() as u64 * wi as u64).sum();
        let mut pi = vec![Prob::zero(); t.len()];
        for (c, &wi) in cycles.iter().zip(&w) {
            for &x in c {
                pi[x] = Prob::new(BigInt::from(wi), BigInt::from(total));
            }
        }
        Self::new(t, pi)
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.t
    }

    pub fn pi(&self) -> &[Prob] {
        &self.pi
    }

    pub fn kernel(&self) -> &[Vec<Prob>] {
        &self.k
    }

    pub fn all(&self) -> StateSet {
        (0..self.n()).collect()
    }

    pub fn mass(&self, b: &StateSet) -> Prob {
        b.iter().map(|&x| &self.pi[x]).sum()
    }

    pub fn is_null(&self, x: usize) -> bool {
        self.pi[x].is_zero()
    }

    pub fn preimage(&self, b: &StateSet) -> StateSet {
        (0..self.n()).filter(|&x| b.contains(&self.t[x])).collect()
    }

    /// `T^k(x)`.
    pub fn iterate(&self, mut x: usize, k: usize) -> usize {
        for _ in 0..k {
            x = self.t[x];
        }
        x
    }

    /// Exact `K^n` as a dense matrix.
    pub fn kernel_power(&self, n: usize) -> Vec<Vec<Prob>> {
        let mut m = identity_matrix(self.n());
        for _ in 0..n {
            m = mat_mul(&m, &self.k);
        }
        m
    }

    /// States `x` with `K(x, x') > 0` for some `x'` in `b`.
    pub fn kernel_predecessors(&self, b: &StateSet) -> StateSet {
        (0..self.n()).filter(|&x| b.iter().any(|&y| !self.k[x][y].is_zero())).collect()
    }
}

impl fmt::Display for FiniteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T = {:?}, pi = [", self.t)?;
        for (i, p) in self.pi.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

fn uniform(n: usize) -> Vec<Prob> {
    if n == 0 {
        return vec![];
    }
    vec![Prob::new(BigInt::one(), BigInt::from(n)); n]
}

/// Cycles of the functional graph of `t`, each listed from its smallest state.
pub fn cycles(t: &[usize]) -> Vec<Vec<usize>> {
    let n = t.len();
    let mut on_cycle = vec![false; n];
    for start in 0..n {
        // after n steps every orbit is on its cycle
        let mut x = start;
        for _ in 0..n {
            x = t[x];
        }
        on_cycle[x] = true;
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for x in 0..n {
        if on_cycle[x] && !seen[x] {
            let mut c = vec![x];
            seen[x] = true;
            let mut y = t[x];
            while y != x {
                seen[y] = true;
                c.push(y);
                y = t[y];
            }
            out.push(c);
        }
    }
    out
}

fn identity_matrix(n: usize) -> Vec<Vec<Prob>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Prob::one() } else { Prob::zero() }).collect()).collect()
}

pub(crate) fn mat_mul(a: &[Vec<Prob>], b: &[Vec<Prob>]) -> Vec<Vec<Prob>> {
    let n = b.len();
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter().zip(b).filter(|(r, _)| !r.is_zero()).map(|(r, bk)| r * &bk[j]).sum()
                })
                .collect()
        })
        .collect()
}
