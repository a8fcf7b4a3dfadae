use lattice::exhaustive::all_reflected;
use lattice::levy::shift_after;
use lattice::metrics::Center;
use lattice::{in_ball, sample_srw, CuczBall, LatticePath, PathKind, Target, Time};
use proptest::prelude::*;
use steering::reset::first_long_excursion;
use steering::{densify_zeros, reduce_oscillations, reset_after, SteerError};

fn t(a: i128, b: i128) -> Time {
    Time::new(a, b)
}

fn reflected(dt: Time, v: Vec<i64>) -> LatticePath {
    LatticePath::new(dt, PathKind::Reflected, v).unwrap()
}

#[test]
fn reduction_law_exhaustive() {
    let one = Time::from_integer(1);
    let mut checked = 0;
    for n in 1..=12 {
        for v in all_reflected(n) {
            let r = reflected(one, v);
            let bar = r.complement();
            for h in 1..=3 {
                let before = r.oscillation_count(n, h as f64);
                let after = bar.oscillation_count(n, h as f64);
                assert!(after <= before.saturating_sub(1), "{:?} h={h}: {before} -> {after}", r.coords());
                checked += 1;
            }
        }
    }
    assert!(checked > 100_000);
}

#[test]
fn small_path_needs_no_step() {
    let r = reflected(t(1, 64), vec![0, 1, 0, 1, 2, 1, 0]);
    let (out, cert) = reduce_oscillations(&r, t(6, 64), 3.0 / 8.0).unwrap();
    assert!(cert.steps.is_empty());
    assert_eq!(out, r);
}

#[test]
fn tent_of_height_three_h() {
    let one = Time::from_integer(1);
    for h in 1..=4i64 {
        let mut v: Vec<i64> = (0..=3 * h).collect();
        v.extend((0..3 * h).rev());
        let r = reflected(one, v);
        let n = r.steps();
        let (out, cert) = reduce_oscillations(&r, Time::from_integer(n as i128), h as f64).unwrap();
        assert!(cert.steps.len() <= 3, "h={h}: {} steps", cert.steps.len());
        assert!(out.coords().iter().all(|&x| x < h));
    }
}

#[test]
fn reset_before_a_missing_zero_fails() {
    let r = reflected(t(1, 16), vec![0, 1, 2, 3, 4, 5, 6, 7, 8]);
    let err = reset_after(&r, t(1, 16), t(1, 4), 0.5, t(1, 8)).unwrap_err();
    assert!(matches!(err, SteerError::NoZeroAfter(_)), "{err}");
}

#[test]
fn reset_keeps_prefix_and_lands_in_zero_ball() {
    let dt = t(1, 1024);
    let (a, span, rho, delta) = (t(1, 4), t(1, 2), 0.1, t(1, 20));
    let usable = (0..).map(|seed| (seed, sample_srw(1536, dt, 40 + seed).reflect())).filter(|(_, r)| {
        lattice::first_zero_after(r, a).map_or(false, |d| r.time(d) + span <= r.horizon())
    });
    for (seed, r) in usable.take(10) {
        let d = lattice::first_zero_after(&r, a).unwrap();
        let (out, cert) = reset_after(&r, a, span, rho, delta).unwrap();
        assert_eq!(out.prefix_digest(d), r.prefix_digest(d), "seed {seed}");
        assert!(cert.steps.iter().all(|s| s.a >= a));
        assert_eq!(cert.replay(&r).unwrap(), out);
        let ball = CuczBall::new(Center::Target(Target::zero()), span, rho, delta);
        assert!(in_ball(&shift_after(a, &out).unwrap(), &ball).unwrap(), "seed {seed}");
    }
}

fn sup_to(r: &LatticePath, end: usize) -> i64 {
    r.coords()[..=end].iter().copied().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn iterations_bounded_by_oscillation_count(seed in any::<u64>(), h in 1u32..6) {
        let dt = t(1, 256);
        let r = sample_srw(256, dt, seed).reflect();
        let hx = h as f64 / 16.0;
        let (out, cert) = reduce_oscillations(&r, Time::from_integer(1), hx).unwrap();
        prop_assert!(cert.steps.len() <= r.oscillation_count(256, h as f64));
        prop_assert!(sup_to(&out, 256) < h as i64);
    }

    #[test]
    fn densify_moves_first_long_excursion_right(seed in any::<u64>(), gap in 4i128..24) {
        let dt = t(1, 256);
        let (rho, delta) = (3.0 / 16.0, dt * Time::from_integer(gap));
        let r = sample_srw(256, dt, seed).reflect();
        let (small, _) = reduce_oscillations(&r, Time::from_integer(1), rho).unwrap();
        let (out, cert) = densify_zeros(&small, Time::from_integer(1), rho, delta).unwrap();
        let mut cur = small.clone();
        let mut g = first_long_excursion(&cur, 0, 256, delta);
        let mut sup = sup_to(&cur, 256);
        for step in &cert.steps {
            cur = step.apply(&cur);
            let g_next = first_long_excursion(&cur, 0, 256, delta);
            prop_assert!(g_next.map_or(true, |x| Some(x) > g), "{g:?} -> {g_next:?}");
            let s = sup_to(&cur, 256);
            prop_assert!(s <= sup);
            g = g_next;
            sup = s;
        }
        prop_assert!(g.is_none());
        prop_assert_eq!(cur, out);
    }
}

#[test]
fn densify_inside_ball_is_a_no_op() {
    let r = reflected(t(1, 16), vec![0, 1, 0, 1, 0, 0, 1, 0, 1]);
    let (out, cert) = densify_zeros(&r, t(1, 2), 0.5, t(3, 16)).unwrap();
    assert!(cert.steps.is_empty());
    assert_eq!(out, r);
}

#[test]
fn densify_rejects_tall_start() {
    let r = reflected(t(1, 16), vec![0, 1, 2, 3, 4, 3, 2, 1, 0]);
    assert!(densify_zeros(&r, t(1, 2), 0.5, t(1, 8)).is_err());
}
