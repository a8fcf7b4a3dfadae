use lattice::excursions::{apply_signs, hybrid, Cut, SignFamily};
use lattice::exhaustive::{all_reflected, all_walks};
use lattice::levy::{
    first_zero_after, inverse_step, inverse_step_after, levy_transform, run_chain, shift_after, ChainStep,
};
use lattice::path::{sample_srw, LatticePath};
use lattice::{RationalIndex, Time};
use proptest::prelude::*;

fn one() -> Time {
    Time::from_integer(1)
}

fn ri(p: u64, q: u64) -> RationalIndex {
    RationalIndex::new(p, q).unwrap()
}

fn refl(v: &[i64]) -> LatticePath {
    LatticePath::reflected(one(), v.to_vec()).unwrap()
}

/// Direct summation of the Tanaka increments.
fn tanaka_oracle(w: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut hat = vec![0i64];
    let mut l = vec![0i64];
    for k in 1..w.len() {
        let inc = if w[k - 1] > 0 {
            w[k] - w[k - 1]
        } else if w[k - 1] < 0 {
            w[k - 1] - w[k]
        } else if w[k] == 0 {
            -1
        } else {
            1
        };
        hat.push(hat[k - 1] + inc);
        l.push(w[k].abs() - hat[k]);
    }
    (hat, l)
}

#[test]
fn tanaka_examples() {
    let w = LatticePath::signed(one(), vec![0, -1, -2]).unwrap();
    let (hat, l) = levy_transform(&w);
    assert_eq!(hat.coords(), [0, 1, 2]);
    assert_eq!(l, vec![0, 0, 0]);
    let w = LatticePath::signed(one(), vec![0, 1, 0, -1, 0]).unwrap();
    let (hat, l) = levy_transform(&w);
    assert_eq!(hat.coords(), [0, 1, 0, 1, 0]);
    assert_eq!(l, vec![0; 5]);
    let w = LatticePath::signed(one(), vec![0, 0, 0, 1, 0, 0]).unwrap();
    let (hat, l) = levy_transform(&w);
    assert_eq!(hat.coords(), [0, -1, -2, -1, -2, -3]);
    assert_eq!(l, vec![0, 1, 2, 2, 2, 3]);
}

#[test]
fn tanaka_exhaustive_on_walks() {
    for n in 1..=12 {
        for v in all_walks(n) {
            let w = LatticePath::signed(one(), v.clone()).unwrap();
            let (hat, l) = levy_transform(&w);
            let (oh, ol) = tanaka_oracle(&v);
            assert_eq!(hat.coords(), &oh[..]);
            assert_eq!(l, ol);
            let mut run = 0i64;
            for k in 0..v.len() {
                run = run.max(-hat.coords()[k]);
                assert_eq!(l[k], run);
                if k > 0 {
                    assert!(l[k] >= l[k - 1]);
                    if l[k] > l[k - 1] {
                        assert_eq!(v[k - 1], 0);
                    }
                }
            }
            assert_eq!(hat.reflect().coords(), w.abs().coords());
        }
    }
}

#[test]
fn forward_transform_of_walk_is_a_walk() {
    for v in all_walks(12) {
        let (hat, _) = levy_transform(&LatticePath::signed(one(), v).unwrap());
        assert!(hat.is_strict_walk());
    }
}

#[test]
fn inverse_step_examples() {
    let r = refl(&[0, 1, 0, 0, 1, 0]);
    let e = SignFamily::plus().set(ri(1, 1), -1).set(ri(4, 1), 1);
    assert_eq!(apply_signs(&e, &r).coords(), [0, -1, 0, 0, 1, 0]);
    assert_eq!(inverse_step(&e, &r).coords(), [0, 0, 1, 1, 2, 1]);
    assert_eq!(inverse_step(&SignFamily::plus(), &r), r);
    let r = refl(&[0, 1, 2, 1, 0, 1, 2, 3, 2]);
    let bar: Vec<i64> = {
        let m = r.running_max();
        m.iter().zip(r.coords()).map(|(m, x)| m - x).collect()
    };
    assert_eq!(inverse_step(&SignFamily::minus(), &r).coords(), &bar[..]);
}

#[test]
fn round_trip_exhaustive_small() {
    for n in 1..=9 {
        for v in all_reflected(n) {
            let r = refl(&v);
            for s in 0..8 {
                let w = apply_signs(&SignFamily::random(s), &r);
                assert_eq!(levy_transform(&w).0.reflect(), r.clone());
            }
        }
    }
}

#[test]
fn first_zero_examples() {
    let r = refl(&[0, 1, 0]);
    assert_eq!(first_zero_after(&r, Time::new(1, 2)), Some(2));
    assert_eq!(first_zero_after(&r, Time::from_integer(2)), Some(2));
    assert_eq!(first_zero_after(&refl(&[0, 1, 2, 1]), Time::new(1, 3)), None);
}

#[test]
fn shift_examples() {
    let r = refl(&[0, 1, 0, 1, 0]);
    assert_eq!(shift_after(Time::from_integer(0), &r).unwrap(), r);
    assert_eq!(shift_after(one(), &r).unwrap().coords(), [0, 1, 0]);
    assert!(shift_after(one(), &refl(&[0, 1, 2])).is_err());
}

#[test]
fn restarted_step_examples() {
    let r = sample_srw(400, Time::new(1, 400), 5).reflect();
    let e = SignFamily::random(9);
    assert_eq!(inverse_step_after(Time::from_integer(0), &e, &r), inverse_step(&e, &r));
    assert_eq!(inverse_step_after(Time::new(1, 3), &SignFamily::plus(), &r), r);
}

#[test]
fn chain_basics() {
    let r0 = sample_srw(200, Time::new(1, 200), 1).reflect();
    let c = run_chain(&r0, 0, 3, None);
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].r, r0);
    let plus: Vec<ChainStep> = (0..5)
        .map(|_| ChainStep { a: None, overrides: lattice::decompose(&r0).into_iter().map(|e| (e.number, 1)).collect() })
        .collect();
    let c = run_chain(&r0, 5, 3, Some(&plus));
    assert!(c.iter().all(|s| s.r == r0));
    assert_eq!(run_chain(&r0, 4, 8, None), run_chain(&r0, 4, 8, None));
}

fn case() -> impl Strategy<Value = (LatticePath, Time, u64)> {
    (any::<u64>(), 2usize..400, 0i128..400, any::<u64>()).prop_map(|(s, n, a, e)| {
        let dt = Time::new(1, 256);
        let r = sample_srw(n, dt, s).reflect();
        (r, dt * Time::from_integer(a % (n as i128 + 1)), e)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn restart_matches_hybrid_and_keeps_prefix((r, a, seed) in case()) {
        let e = SignFamily::random(seed).set(ri(1, 2), -1);
        let out = inverse_step_after(a, &e, &r);
        match first_zero_after(&r, a) {
            None => prop_assert_eq!(&out, &r),
            Some(d) => {
                let full = inverse_step(&hybrid(Cut::At(r.time(d)), &e), &r);
                prop_assert_eq!(&out, &full);
                prop_assert_eq!(&out.coords()[..=d], &r.coords()[..=d]);
                prop_assert_eq!(out.prefix_digest(d), r.prefix_digest(d));
                prop_assert_eq!(first_zero_after(&out, a), Some(d));
            }
        }
    }

    #[test]
    fn round_trip_long((r, _a, seed) in case()) {
        let w = apply_signs(&SignFamily::random(seed), &r);
        prop_assert_eq!(levy_transform(&w).0.reflect(), r);
    }
}
