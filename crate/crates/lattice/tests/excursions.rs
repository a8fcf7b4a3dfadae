use std::collections::BTreeMap;

use lattice::excursions::{apply_signs, decompose, extract_signs, hybrid, Cut, SignFamily};
use lattice::path::{sample_srw, LatticePath};
use lattice::{RationalIndex, Time};
use proptest::prelude::*;

fn one() -> Time {
    Time::from_integer(1)
}

fn ri(p: u64, q: u64) -> RationalIndex {
    RationalIndex::new(p, q).unwrap()
}

#[test]
fn decomposition_example() {
    let r = LatticePath::reflected(one(), vec![0, 1, 0, 0, 1, 0]).unwrap();
    let ex = decompose(&r);
    assert_eq!(ex.len(), 2);
    assert_eq!((ex[0].g, ex[0].d, ex[0].number), (0, 2, ri(1, 1)));
    assert_eq!((ex[1].g, ex[1].d, ex[1].number), (3, 5, ri(4, 1)));
    assert!(ex.iter().all(|e| e.complete && e.height == 1));
    assert!(decompose(&LatticePath::reflected(one(), vec![0; 7]).unwrap()).is_empty());
}

#[test]
fn incomplete_final_excursion() {
    let r = LatticePath::reflected(one(), vec![0, 1, 2, 2, 1]).unwrap();
    let ex = decompose(&r);
    assert_eq!(ex.len(), 1);
    assert!(!ex[0].complete);
    assert_eq!((ex[0].g, ex[0].d, ex[0].height, ex[0].peak, ex[0].length()), (0, 4, 2, 2, 4));
    assert_eq!(ex[0].number, ri(1, 1));
}

#[test]
fn sign_action_examples() {
    let r = LatticePath::reflected(one(), vec![0, 1, 0]).unwrap();
    assert_eq!(apply_signs(&SignFamily::plus(), &r).coords(), r.coords());
    let e = SignFamily::plus().set(ri(1, 1), -1);
    assert_eq!(apply_signs(&e, &r).coords(), [0, -1, 0]);
}

#[test]
fn extraction_example() {
    let w = LatticePath::signed(one(), vec![0, -1, 0, 1, 0]).unwrap();
    let want: BTreeMap<_, _> = [(ri(1, 1), -1), (ri(3, 1), 1)].into_iter().collect();
    assert_eq!(extract_signs(&w), want);
    let pos = LatticePath::signed(one(), vec![0, 1, 2, 1, 0, 0, 1]).unwrap();
    assert!(extract_signs(&pos).values().all(|&s| s == 1));
}

#[test]
fn hybrid_examples() {
    let e = SignFamily::random(11).set(ri(1, 3), -1).set(ri(5, 2), 1);
    let h0 = hybrid(Cut::At(Time::from_integer(0)), &e);
    for q in lattice::enumerate(200) {
        assert_eq!(h0.sign(q), e.sign(q));
    }
    let inf = hybrid(Cut::Infinite, &e);
    assert!(lattice::enumerate(200).iter().all(|&q| inf.sign(q) == 1));
    let c = Time::new(3, 2);
    let h = hybrid(Cut::At(c), &e);
    for q in lattice::enumerate(500) {
        if q.value() <= c {
            assert_eq!(h.sign(q), 1, "{q}");
        } else {
            assert_eq!(h.sign(q), e.sign(q), "{q}");
        }
    }
}

#[test]
fn random_family_is_balanced() {
    let e = SignFamily::random(3);
    let plus = lattice::enumerate(20_000).iter().filter(|&&q| e.sign(q) == 1).count();
    assert!((9_600..10_400).contains(&plus), "{plus}");
}

#[test]
fn apply_extract_round_trip_on_walks() {
    let dt = Time::new(1, 256);
    for seed in 0..1000 {
        let w = sample_srw(256, dt, seed);
        let e = SignFamily::plus().with_overrides(extract_signs(&w));
        assert_eq!(apply_signs(&e, &w.abs()).coords(), w.coords(), "seed {seed}");
    }
}

fn reflected_path() -> impl Strategy<Value = LatticePath> {
    (any::<u64>(), 1usize..300).prop_map(|(s, n)| sample_srw(n, Time::new(1, 64), s).reflect())
}

proptest! {
    #[test]
    fn action_preserves_zeros_and_modulus(r in reflected_path(), seed in any::<u64>()) {
        let e = SignFamily::random(seed);
        let w = apply_signs(&e, &r);
        prop_assert_eq!(w.zero_set(None), r.zero_set(None));
        let m = w.abs();
        prop_assert_eq!(m.coords(), r.coords());
        let back = apply_signs(&e, &w);
        prop_assert_eq!(back.coords(), r.coords());
    }

    #[test]
    fn numbers_inside_intervals_and_distinct(r in reflected_path()) {
        let ex = decompose(&r);
        let mut seen = std::collections::BTreeSet::new();
        for e in &ex {
            prop_assert!(r.time(e.g) < e.number.value() && e.number.value() < r.time(e.d));
            prop_assert!(seen.insert(e.number));
            prop_assert!((e.g + 1..e.d).all(|k| r.coords()[k] > 0));
            prop_assert_eq!(r.coords()[e.g], 0);
        }
    }
}
