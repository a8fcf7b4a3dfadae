use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recurrence::checks::{all_subsets, is_witness, random_subset, witness_measure};
use recurrence::*;

fn set(xs: &[usize]) -> StateSet {
    xs.iter().copied().collect()
}

fn q(p: i64, d: i64) -> Prob {
    Prob::new(p.into(), d.into())
}

/// Forward orbit of `x` meets `b` within `n` steps (enough on `n` states).
fn visits(sys: &FiniteSystem, x: usize, b: &StateSet) -> bool {
    (0..=sys.n()).any(|k| b.contains(&sys.iterate(x, k)))
}

/// Orbit of `x` meets `b` on its eventual cycle.
fn visits_forever(sys: &FiniteSystem, x: usize, b: &StateSet) -> bool {
    let y = sys.iterate(x, sys.n());
    (0..sys.n()).any(|k| b.contains(&sys.iterate(y, k)))
}

fn reach_oracle(sys: &FiniteSystem, b: &StateSet) -> StateSet {
    let mut out = StateSet::new();
    for m in 0..=sys.n() {
        let km = sys.kernel_power(m);
        for x in 0..sys.n() {
            if b.iter().any(|&y| !km[x][y].is_zero()) {
                out.insert(x);
            }
        }
    }
    out
}

fn every_permutation(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in every_permutation(n - 1) {
        for i in 0..n {
            let mut v = p.clone();
            v.insert(i, n - 1);
            out.push(v);
        }
    }
    out
}

/// Permutation with a law that is constant on cycles, weights 1, 2, ..
fn permutation_system(t: Vec<usize>) -> FiniteSystem {
    let cs = cycles(&t);
    let total: i64 = cs.iter().enumerate().map(|(i, c)| (i as i64 + 1) * c.len() as i64).sum();
    let mut pi = vec![Prob::zero(); t.len()];
    for (i, c) in cs.iter().enumerate() {
        for &x in c {
            pi[x] = q(i as i64 + 1, total);
        }
    }
    FiniteSystem::new(t, pi).unwrap()
}

/// 2-cycle {0, 1} carrying the mass, 2 a null transient state mapped into it.
fn with_transient() -> FiniteSystem {
    FiniteSystem::new(vec![1, 0, 0], vec![q(1, 2), q(1, 2), q(0, 1)]).unwrap()
}

#[test]
fn validation() {
    assert_eq!(FiniteSystem::new(vec![], vec![]), Err(SystemError::Empty));
    assert!(matches!(FiniteSystem::new(vec![0, 2], vec![q(1, 2), q(1, 2)]), Err(SystemError::OutOfRange { .. })));
    assert!(matches!(FiniteSystem::new(vec![0, 1], vec![q(1, 2), q(1, 3)]), Err(SystemError::Mass(_))));
    assert!(matches!(FiniteSystem::new(vec![0, 1], vec![q(3, 2), q(-1, 2)]), Err(SystemError::Negative(1))));
    // mass flows from 1 to 0
    assert!(matches!(
        FiniteSystem::new(vec![0, 0], vec![q(1, 2), q(1, 2)]),
        Err(SystemError::NotInvariant { y: 0, .. })
    ));
}

#[test]
fn kernel_rows() {
    let sys = FiniteSystem::new(vec![1, 2, 0, 3], vec![q(1, 5), q(1, 5), q(1, 5), q(2, 5)]).unwrap();
    let k = sys.kernel();
    assert_eq!(k[1][0], Prob::one());
    assert_eq!(k[0][2], Prob::one());
    assert_eq!(k[3][3], Prob::one());
    for row in k {
        assert!(row.iter().sum::<Prob>().is_one());
    }
    let t = with_transient();
    // state 2 has no mass above it: uniform row
    assert!(t.kernel()[2].iter().all(|p| *p == q(1, 3)));
    // state 0 is hit by 1 and the null state 2
    assert_eq!(t.kernel()[0], vec![q(0, 1), q(1, 1), q(0, 1)]);
}

#[test]
fn json_round_trip() {
    let sys = with_transient();
    let s = serde_json::to_string(&sys).unwrap();
    assert_eq!(s, r#"{"n":3,"T":[1,0,0],"pi":["1/2","1/2","0"]}"#);
    let back: FiniteSystem = serde_json::from_str(&s).unwrap();
    assert_eq!(back, sys);
    assert!(serde_json::from_str::<FiniteSystem>(r#"{"n":2,"T":[1,0],"pi":["1/2"]}"#).is_err());
    assert!(serde_json::from_str::<FiniteSystem>(r#"{"n":2,"T":[1,0],"pi":["a","1/2"]}"#).is_err());
}

#[test]
fn trivial_sets() {
    let sys = FiniteSystem::cyclic_shift(4).unwrap();
    let all = sys.all();
    let empty = StateSet::new();
    assert_eq!(orbit_visit_set(&sys, &all), all);
    assert_eq!(orbit_visit_set(&sys, &empty), empty);
    assert_eq!(infinitely_often_set(&sys, &empty), empty);
    assert_eq!(accessible_set(&sys, &empty), empty);
    assert!(check_poincare_refinement(&sys, &empty).holds);
}

#[test]
fn cyclic_shift_from_one_state() {
    let sys = FiniteSystem::cyclic_shift(4).unwrap();
    let b = set(&[0]);
    // T^-1{0} = {3}, T^-2{0} = {2}, T^-3{0} = {1}
    assert_eq!(sys.preimage(&b), set(&[3]));
    assert_eq!(orbit_visit_set(&sys, &b), set(&[0, 1, 2, 3]));
    assert_eq!(infinitely_often_set(&sys, &b), set(&[0, 1, 2, 3]));
    assert_eq!(accessible_set(&sys, &b), set(&[0, 1, 2, 3]));
}

#[test]
fn identity_kernel_accesses_only_b() {
    let sys = FiniteSystem::identity(5).unwrap();
    for b in all_subsets(5) {
        assert_eq!(accessible_set(&sys, &b), b);
    }
}

#[test]
fn invariant_b_recurs_on_itself() {
    // two cycles {0,1} and {2,3,4}
    let sys = permutation_system(vec![1, 0, 3, 4, 2]);
    let b = set(&[2, 3, 4]);
    assert_eq!(sys.preimage(&b), b);
    assert_eq!(infinitely_often_set(&sys, &b), b);
}

#[test]
fn sets_match_orbit_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..200 {
        let n = 1 + i % 7;
        let sys = if i % 2 == 0 {
            FiniteSystem::random_map(n, &mut rng).unwrap()
        } else {
            FiniteSystem::random_permutation(n, &mut rng).unwrap()
        };
        let b = random_subset(n, &mut rng);
        let u = orbit_visit_set(&sys, &b);
        let r = infinitely_often_set(&sys, &b);
        let a = accessible_set(&sys, &b);
        for x in 0..n {
            assert_eq!(u.contains(&x), visits(&sys, x, &b), "{sys} {b:?} U at {x}");
            assert_eq!(r.contains(&x), visits_forever(&sys, x, &b), "{sys} {b:?} R at {x}");
        }
        assert_eq!(a, reach_oracle(&sys, &b), "{sys} {b:?}");
        assert!(b.is_subset(&a));
        assert!(r.is_subset(&u));
    }
}

#[test]
fn permutations_recur_everywhere_they_visit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rand::Rng::gen_range(&mut rng, 1..=7);
        let sys = FiniteSystem::random_permutation(n, &mut rng).unwrap();
        for b in all_subsets(n) {
            assert_eq!(infinitely_often_set(&sys, &b), orbit_visit_set(&sys, &b));
        }
    }
}

#[test]
fn poincare_exhaustive_on_small_permutations() {
    let mut checks = 0;
    for n in 1..=6 {
        for t in every_permutation(n) {
            let sys = permutation_system(t);
            for b in all_subsets(n) {
                let rep = check_poincare_refinement(&sys, &b);
                assert!(rep.holds, "{sys} B={b:?}");
                // all states carry mass here, so nothing may be listed
                assert!(rep.accessible_not_visit.is_empty() && rep.visit_delta_often.is_empty());
                checks += 1;
            }
        }
    }
    assert_eq!(checks, 2 + 2 * 4 + 6 * 8 + 24 * 16 + 120 * 32 + 720 * 64);
}

#[test]
fn null_transient_state_is_the_only_violation() {
    let sys = with_transient();
    let rep = check_poincare_refinement(&sys, &set(&[2]));
    // 2 is visited once and never again, and no row puts mass on it
    assert_eq!(rep.visit, set(&[2]));
    assert!(rep.infinitely_often.is_empty());
    assert_eq!(rep.accessible, set(&[2]));
    assert_eq!(rep.visit_delta_often, vec![2]);
    assert!(rep.accessible_not_visit.is_empty());
    assert!(rep.holds);
    for b in all_subsets(3) {
        let rep = check_poincare_refinement(&sys, &b);
        assert!(rep.holds);
        assert!(rep.accessible_not_visit.iter().chain(&rep.visit_delta_often).all(|&x| x == 2), "{b:?}");
    }
}

#[test]
fn chaining() {
    let sys = permutation_system(vec![1, 2, 0, 4, 3]);
    let b = set(&[0]);
    assert_eq!(check_chaining(&sys, &b, &b, &b), ChainingReport::Holds);
    // {3,4} is closed and cannot reach {0}
    assert!(matches!(check_chaining(&sys, &set(&[3]), &set(&[4]), &set(&[0])), ChainingReport::NotApplicable { .. }));
    assert!(matches!(check_chaining(&sys, &set(&[3]), &set(&[0]), &set(&[1])), ChainingReport::NotApplicable { .. }));
    assert_eq!(check_chaining(&sys, &set(&[0, 3]), &set(&[1, 4]), &set(&[2, 3])), ChainingReport::Holds);
    let null = with_transient();
    assert!(matches!(check_chaining(&null, &set(&[2]), &set(&[0]), &set(&[1])), ChainingReport::NotApplicable { .. }));
}

#[test]
fn chaining_never_violated_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut applicable = 0;
    for i in 0..1000 {
        let n = 1 + i % 6;
        let sys = FiniteSystem::random_permutation(n, &mut rng).unwrap();
        let bs: Vec<StateSet> = (0..3).map(|_| random_subset(n, &mut rng)).collect();
        match check_chaining(&sys, &bs[0], &bs[1], &bs[2]) {
            ChainingReport::Violated { states } => panic!("{sys} {bs:?}: {states:?}"),
            ChainingReport::Holds => applicable += 1,
            ChainingReport::NotApplicable { .. } => {}
        }
    }
    assert!(applicable > 100);
}

#[test]
fn atteignability_full_and_null() {
    let sys = with_transient();
    let rep = check_atteignability_equivalence(&sys, &sys.all());
    assert!(rep.strongly_accessible && rep.atteignable && rep.holds);
    assert_eq!(rep.exact, Some(0));
    assert_eq!(witness_measure(&sys, &sys.all(), &sys.kernel_power(0)), sys.pi().to_vec());

    let rep = check_atteignability_equivalence(&sys, &set(&[2]));
    assert!(!rep.atteignable && !rep.strongly_accessible && rep.holds);
    assert!(rep.sup.is_zero());
    assert!(rep.witnesses.iter().all(|w| w.n.is_none()));
}

#[test]
fn partial_mass_is_neither() {
    let sys = permutation_system(vec![1, 0, 2]);
    // pi = (1/4, 1/4, 2/4); G = {0,1} has mass 1/2
    let rep = check_atteignability_equivalence(&sys, &set(&[0, 1]));
    assert_eq!(rep.sup, q(1, 2));
    assert!(!rep.strongly_accessible && !rep.atteignable && rep.holds);
    assert!(rep.witnesses.iter().all(|w| w.n.is_none()));
    let rep = check_atteignability_equivalence(&sys, &set(&[0, 1, 2]));
    assert!(rep.witnesses.iter().all(|w| w.n == Some(0)));
}

#[test]
fn null_complement_is_reached_after_one_step() {
    // the transient state 2 is outside G but null: G is reached and atteignable
    let sys = with_transient();
    let rep = check_atteignability_equivalence(&sys, &set(&[0, 1]));
    assert!(rep.strongly_accessible && rep.atteignable && rep.holds);
    assert_eq!(rep.masses[0], Prob::one());
}

#[test]
fn atteignability_on_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut both = 0;
    for i in 0..1000 {
        let n = 1 + i % 6;
        let sys = if i % 2 == 0 {
            FiniteSystem::random_permutation(n, &mut rng).unwrap()
        } else {
            FiniteSystem::random_map(n, &mut rng).unwrap()
        };
        let g = random_subset(n, &mut rng);
        let rep = check_atteignability_equivalence(&sys, &g);
        assert!(rep.holds, "{sys} G={g:?}: {rep:?}");
        assert!(rep.monotone);
        if let Some(n) = rep.exact {
            let nu = witness_measure(&sys, &g, &sys.kernel_power(n));
            assert!(is_witness(&sys, &nu, n));
            both += 1;
        }
    }
    assert!(both > 50);
}

#[test]
fn witness_gives_g_the_mass_of_a_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let n = 1 + i % 6;
        let sys = FiniteSystem::random_map(n, &mut rng).unwrap();
        let g = random_subset(n, &mut rng);
        let (sets, _) = positive_reach_sets(&sys, &g);
        for (k, a) in sets.iter().enumerate() {
            let nu = witness_measure(&sys, &g, &sys.kernel_power(k));
            assert!(is_witness(&sys, &nu, k), "{sys} G={g:?} n={k}");
            let nu_g: Prob = g.iter().map(|&y| &nu[y]).sum();
            assert_eq!(nu_g, sys.mass(a));
        }
    }
}

#[test]
fn sweep_is_clean() {
    let rep = sweep(1, 20, 100);
    assert!(rep.passed(), "{:?}", rep.failures);
    assert_eq!(rep.atteignability_cases, 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pi_is_kernel_invariant(seed in any::<u64>(), n in 1usize..8, perm in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = if perm { FiniteSystem::random_permutation(n, &mut rng) } else { FiniteSystem::random_map(n, &mut rng) }.unwrap();
        prop_assert_eq!(pi_kernel(&sys), sys.pi().to_vec());
        for row in sys.kernel() {
            prop_assert!(row.iter().sum::<Prob>().is_one());
        }
    }

    #[test]
    fn reach_masses_are_nondecreasing(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = FiniteSystem::random_map(n, &mut rng).unwrap();
        let g = random_subset(n, &mut rng);
        let (sets, _) = positive_reach_sets(&sys, &g);
        let masses: Vec<Prob> = sets.iter().map(|a| sys.mass(a)).collect();
        prop_assert!(masses.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn time_reversal(seed in any::<u64>(), n in 1usize..=5, steps in 0usize..=3, perm in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = if perm { FiniteSystem::random_permutation(n, &mut rng) } else { FiniteSystem::random_map(n, &mut rng) }.unwrap();
        prop_assert_eq!(forward_law(&sys, steps), reversed_law(&sys, steps));
    }
}
