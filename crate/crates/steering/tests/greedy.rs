use lattice::{sample_srw, LatticePath, Target, Time};
use proptest::prelude::*;
use steering::{greedy_orbit_search, GreedyParams};

fn t(a: i128, b: i128) -> Time {
    Time::new(a, b)
}

/// The path itself as a piecewise-affine target.
fn as_target(r: &LatticePath) -> Target {
    let dx = t(1, (1.0 / r.dx()).round() as i128);
    Target::new((0..=r.steps()).map(|k| (r.time(k), dx * Time::from_integer(r.coords()[k] as i128))).collect()).unwrap()
}

#[test]
fn current_path_is_an_immediate_hit() {
    let r = sample_srw(256, t(1, 256), 5).reflect();
    let f = as_target(&r);
    let out = greedy_orbit_search(&f, t(1, 1), 0.05, t(1, 32), &r, 1, 10, &GreedyParams::default()).unwrap();
    assert!(out.hit());
    assert_eq!(out.steps, 0);
    let cert = out.certificate.unwrap();
    assert!(cert.steps.is_empty());
    assert_eq!(cert.replay(&r).unwrap(), r);
    assert_eq!(out.trace, vec![0.0]);
}

#[test]
fn zero_budget_is_rejected() {
    let r = sample_srw(64, t(1, 64), 5).reflect();
    assert!(greedy_orbit_search(&Target::zero(), t(1, 1), 0.1, t(1, 10), &r, 1, 0, &GreedyParams::default()).is_err());
}

#[test]
fn hit_certificate_replays() {
    let r = sample_srw(1024, t(1, 1024), 9).reflect();
    let f = Target::zero();
    let out = greedy_orbit_search(&f, t(1, 2), 0.3, t(1, 4), &r, 3, 50, &GreedyParams::default()).unwrap();
    let cert = out.certificate.as_ref().expect("zero ball is hit");
    assert!(out.steps > 0);
    assert_eq!(cert.replay(&r).unwrap(), out.path);
    assert_eq!(cert.steps.len(), out.steps);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn best_distance_never_increases(seed in any::<u64>()) {
        let r = sample_srw(512, t(1, 512), seed).reflect();
        let f = Target::from_pairs(&[((0, 1), (0, 1)), ((1, 2), (1, 2)), ((1, 1), (0, 1))]).unwrap();
        let out = greedy_orbit_search(&f, t(1, 1), 0.05, t(1, 20), &r, seed, 20, &GreedyParams { k: 4, lambda: 1.0 }).unwrap();
        prop_assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(out.trace.len(), out.steps + 1);
    }
}

#[test]
fn tent_hit_rate() {
    let dt = t(1, 4096);
    let tent = Target::from_pairs(&[((0, 1), (0, 1)), ((1, 2), (1, 1)), ((1, 1), (0, 1))]).unwrap();
    let mut hits = 0;
    for seed in 0..20u64 {
        let r = sample_srw(4096, dt, 500 + seed).reflect();
        let out = greedy_orbit_search(&tent, t(1, 1), 0.15, t(1, 10), &r, seed, 200, &GreedyParams::default()).unwrap();
        if let Some(cert) = &out.certificate {
            assert_eq!(cert.replay(&r).unwrap(), out.path);
            hits += 1;
        }
    }
    assert!(hits >= 16, "tent ball hit in {hits} of 20 runs, need 16");
}
