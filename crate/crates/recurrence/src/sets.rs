use std::collections::HashMap;

use crate::system::{FiniteSystem, StateSet};

/// `U(B)`: states whose forward orbit meets `B`.
pub fn orbit_visit_set(sys: &FiniteSystem, b: &StateSet) -> StateSet {
    let mut u = b.clone();
    loop {
        let next: StateSet = u.union(&sys.preimage(&u)).copied().collect();
        if next.len() == u.len() {
            return u;
        }
        u = next;
    }
}

/// `R(B) = limsup T^-k(B)`: states whose orbit meets `B` infinitely often.
///
/// The sequence `S_k = T^-k(B)` is eventually periodic; the limsup is the
/// union over one period of the tail.
pub fn infinitely_often_set(sys: &FiniteSystem, b: &StateSet) -> StateSet {
    let mut seen: HashMap<StateSet, usize> = HashMap::new();
    let mut seq: Vec<StateSet> = Vec::new();
    let mut s = b.clone();
    let start = loop {
        if let Some(&i) = seen.get(&s) {
            break i;
        }
        seen.insert(s.clone(), seq.len());
        let next = sys.preimage(&s);
        seq.push(s);
        s = next;
    };
    seq[start..].iter().flatten().copied().collect()
}

/// `A(B)`: states from which `B` is reached with positive probability by
/// some power of `K` (including `K^0`).
pub fn accessible_set(sys: &FiniteSystem, b: &StateSet) -> StateSet {
    let mut a = b.clone();
    loop {
        let next: StateSet = a.union(&sys.kernel_predecessors(&a)).copied().collect();
        if next.len() == a.len() {
            return a;
        }
        a = next;
    }
}

/// `A_n = {x : K^n(x, G) > 0}` for `n = 0, 1, ..` until the sequence of
/// sets repeats. Returns the sets and the index where the periodic tail
/// starts.
pub fn positive_reach_sets(sys: &FiniteSystem, g: &StateSet) -> (Vec<StateSet>, usize) {
    let mut seen: HashMap<StateSet, usize> = HashMap::new();
    let mut seq = Vec::new();
    let mut a = g.clone();
    loop {
        if let Some(&i) = seen.get(&a) {
            return (seq, i);
        }
        seen.insert(a.clone(), seq.len());
        let next = sys.kernel_predecessors(&a);
        seq.push(a);
        a = next;
    }
}
