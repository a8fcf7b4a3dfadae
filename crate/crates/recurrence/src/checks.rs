use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::sets::{accessible_set, infinitely_often_set, orbit_visit_set, positive_reach_sets};
use crate::system::{mat_mul, FiniteSystem, Prob, StateSet};

fn ser_prob<S: Serializer>(p: &Prob, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn ser_probs<S: Serializer>(v: &[Prob], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.to_string()))
}

fn ser_opt_prob<S: Serializer>(p: &Option<Prob>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_some(&p.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareReport {
    pub b: StateSet,
    pub accessible: StateSet,
    pub visit: StateSet,
    pub infinitely_often: StateSet,
    /// States of `A(B)` outside `U(B)`.
    pub accessible_not_visit: Vec<usize>,
    /// States of `U(B)` and `R(B)` that are in exactly one of them.
    pub visit_delta_often: Vec<usize>,
    /// Every listed state is null.
    pub holds: bool,
}

pub fn check_poincare_refinement(sys: &FiniteSystem, b: &StateSet) -> PoincareReport {
    let accessible = accessible_set(sys, b);
    let visit = orbit_visit_set(sys, b);
    let infinitely_often = infinitely_often_set(sys, b);
    let accessible_not_visit: Vec<usize> = accessible.difference(&visit).copied().collect();
    let visit_delta_often: Vec<usize> = visit.symmetric_difference(&infinitely_often).copied().collect();
    let holds = accessible_not_visit.iter().chain(&visit_delta_often).all(|&x| sys.is_null(x));
    PoincareReport { b: b.clone(), accessible, visit, infinitely_often, accessible_not_visit, visit_delta_often, holds }
}

/// Non-null states of `from` that cannot reach `to`.
fn unreached(sys: &FiniteSystem, from: &StateSet, to: &StateSet) -> Vec<usize> {
    let a = accessible_set(sys, to);
    from.iter().copied().filter(|x| !sys.is_null(*x) && !a.contains(x)).collect()
}

/// `to` is reached with positive probability from almost every point of `from`.
pub fn accessible_ae(sys: &FiniteSystem, from: &StateSet, to: &StateSet) -> bool {
    unreached(sys, from, to).is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ChainingReport {
    NotApplicable { reason: String },
    Holds,
    Violated { states: Vec<usize> },
}

pub fn check_chaining(sys: &FiniteSystem, b0: &StateSet, b1: &StateSet, b2: &StateSet) -> ChainingReport {
    for (i, b) in [b0, b1, b2].into_iter().enumerate() {
        if sys.mass(b).is_zero() {
            return ChainingReport::NotApplicable { reason: format!("B{i} is null") };
        }
    }
    if !accessible_ae(sys, b1, b2) {
        return ChainingReport::NotApplicable { reason: "B2 is not accessible from almost every point of B1".into() };
    }
    if !accessible_ae(sys, b0, b1) {
        return ChainingReport::NotApplicable { reason: "B1 is not accessible from almost every point of B0".into() };
    }
    let bad = unreached(sys, b0, b2);
    if bad.is_empty() {
        ChainingReport::Holds
    } else {
        ChainingReport::Violated { states: bad }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_prob")]
    pub eta: Prob,
    /// Smallest `n` whose measure passes all checks with `nu(G) > 1 - eta`.
    pub n: Option<usize>,
    #[serde(serialize_with = "ser_opt_prob")]
    pub nu_g: Option<Prob>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtteignabilityReport {
    pub g: StateSet,
    /// `pi(A_n)` for `n = 0, 1, ..` until the sets `A_n` repeat.
    #[serde(serialize_with = "ser_probs")]
    pub masses: Vec<Prob>,
    #[serde(serialize_with = "ser_prob")]
    pub sup: Prob,
    pub monotone: bool,
    pub strongly_accessible: bool,
    pub witnesses: Vec<Witness>,
    /// Smallest `n` with a verified measure giving `G` full mass.
    pub exact: Option<usize>,
    pub atteignable: bool,
    pub holds: bool,
}

pub fn etas() -> Vec<Prob> {
    [(1, 2), (1, 10), (1, 100)].iter().map(|&(p, q)| BigRational::new(p.into(), q.into())).collect()
}

/// `nu(y) = sum_x pi(x) L(x, y)` where `L(x, .)` is `K^n(x, .)` restricted
/// to `G` and renormalised when `K^n(x, G) > 0`, and `K^n(x, .)` otherwise.
pub fn witness_measure(sys: &FiniteSystem, g: &StateSet, kn: &[Vec<Prob>]) -> Vec<Prob> {
    let n = sys.n();
    let mut nu = vec![Prob::zero(); n];
    for (x, row) in kn.iter().enumerate() {
        let px = &sys.pi()[x];
        if px.is_zero() {
            continue;
        }
        let kg: Prob = g.iter().map(|&y| &row[y]).sum();
        if kg.is_zero() {
            for y in 0..n {
                nu[y] += px * &row[y];
            }
        } else {
            for &y in g {
                nu[y] += px * &row[y] / &kg;
            }
        }
    }
    nu
}

/// `nu << pi` and `T^n(nu) = pi`.
pub fn is_witness(sys: &FiniteSystem, nu: &[Prob], n: usize) -> bool {
    if nu.iter().zip(sys.pi()).any(|(v, p)| p.is_zero() && !v.is_zero()) {
        return false;
    }
    let mut image = vec![Prob::zero(); sys.n()];
    for (x, v) in nu.iter().enumerate() {
        image[sys.iterate(x, n)] += v;
    }
    image == sys.pi()
}

pub fn check_atteignability_equivalence(sys: &FiniteSystem, g: &StateSet) -> AtteignabilityReport {
    let (sets, _) = positive_reach_sets(sys, g);
    let masses: Vec<Prob> = sets.iter().map(|a| sys.mass(a)).collect();
    let monotone = masses.windows(2).all(|w| w[0] <= w[1]);
    let sup = masses.iter().max().cloned().unwrap_or_else(Prob::zero);
    let strongly_accessible = sup.is_one();

    // witness search, on its own powers of K
    let horizon = sets.len().max(sys.n());
    let mut kn = sys.kernel_power(0);
    let mut found: Vec<(usize, Prob)> = Vec::new();
    for n in 0..=horizon {
        if n > 0 {
            kn = mat_mul(&kn, sys.kernel());
        }
        let nu = witness_measure(sys, g, &kn);
        if is_witness(sys, &nu, n) {
            let nu_g: Prob = g.iter().map(|&y| &nu[y]).sum();
            found.push((n, nu_g));
        }
    }
    let witnesses: Vec<Witness> = etas()
        .into_iter()
        .map(|eta| {
            let floor = Prob::one() - &eta;
            let hit = found.iter().find(|(_, m)| *m > floor);
            Witness { eta, n: hit.map(|h| h.0), nu_g: hit.map(|h| h.1.clone()) }
        })
        .collect();
    let exact = found.iter().find(|(_, m)| m.is_one()).map(|h| h.0);
    let atteignable = exact.is_some();
    let per_eta = witnesses.iter().all(|w| w.n.is_some() == (sup > Prob::one() - &w.eta));
    let holds = monotone && per_eta && atteignable == strongly_accessible;
    AtteignabilityReport {
        g: g.clone(),
        masses,
        sup,
        monotone,
        strongly_accessible,
        witnesses,
        exact,
        atteignable,
        holds,
    }
}

/// `pi K`.
pub fn pi_kernel(sys: &FiniteSystem) -> Vec<Prob> {
    let n = sys.n();
    (0..n).map(|y| (0..n).map(|x| &sys.pi()[x] * &sys.kernel()[x][y]).sum()).collect()
}

/// Law of `(X_0, .., X_n)` for the `K`-chain started from `pi`, positive entries only.
pub fn forward_law(sys: &FiniteSystem, n: usize) -> BTreeMap<Vec<usize>, Prob> {
    let mut law: BTreeMap<Vec<usize>, Prob> =
        (0..sys.n()).filter(|&x| !sys.is_null(x)).map(|x| (vec![x], sys.pi()[x].clone())).collect();
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (path, p) in law {
            let last = *path.last().unwrap();
            for (y, k) in sys.kernel()[last].iter().enumerate() {
                if !k.is_zero() {
                    let mut q = path.clone();
                    q.push(y);
                    next.insert(q, &p * k);
                }
            }
        }
        law = next;
    }
    law
}

/// Law of `(T^n(Y), .., T(Y), Y)` for `Y` of law `pi`, positive entries only.
pub fn reversed_law(sys: &FiniteSystem, n: usize) -> BTreeMap<Vec<usize>, Prob> {
    let mut law: BTreeMap<Vec<usize>, Prob> = BTreeMap::new();
    for y in (0..sys.n()).filter(|&y| !sys.is_null(y)) {
        let path: Vec<usize> = (0..=n).rev().map(|k| sys.iterate(y, k)).collect();
        *law.entry(path).or_insert_with(Prob::zero) += &sys.pi()[y];
    }
    law
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepReport {
    pub systems: usize,
    pub poincare_checks: usize,
    pub poincare_violations: usize,
    pub atteignability_cases: usize,
    pub atteignability_violations: usize,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.poincare_violations == 0 && self.atteignability_violations == 0
    }
}

/// Random subset of the states, each kept with probability 1/2.
pub fn random_subset<R: Rng>(n: usize, rng: &mut R) -> StateSet {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

/// Every subset of `{0, .., n-1}`.
pub fn all_subsets(n: usize) -> impl Iterator<Item = StateSet> {
    (0u64..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// Poincare check over every `B` for `systems` random permutation systems
/// with 1 to 6 states, then the atteignability equivalence on `cases`
/// random (system, G) pairs drawn from permutations and general maps.
pub fn sweep(seed: u64, systems: usize, cases: usize) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SweepReport { systems, ..Default::default() };
    for _ in 0..systems {
        let n = rng.gen_range(1..=6);
        let sys = FiniteSystem::random_permutation(n, &mut rng).expect("generated systems are valid");
        for b in all_subsets(n) {
            rep.poincare_checks += 1;
            if !check_poincare_refinement(&sys, &b).holds {
                rep.poincare_violations += 1;
                rep.failures.push(format!("poincare: {sys}, B = {b:?}"));
            }
        }
    }
    for i in 0..cases {
        let n = rng.gen_range(1..=6);
        let sys = if i % 2 == 0 {
            FiniteSystem::random_permutation(n, &mut rng)
        } else {
            FiniteSystem::random_map(n, &mut rng)
        }
        .expect("generated systems are valid");
        let g = random_subset(n, &mut rng);
        rep.atteignability_cases += 1;
        if !check_atteignability_equivalence(&sys, &g).holds {
            rep.atteignability_violations += 1;
            rep.failures.push(format!("atteignability: {sys}, G = {g:?}"));
        }
    }
    rep
}
