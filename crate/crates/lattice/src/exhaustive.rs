//! Enumeration of all small lattice paths, for exhaustive checks.

/// All strict walks with `n` unit steps (`2^n` of them), as coordinates.
pub fn all_walks(n: usize) -> impl Iterator<Item = Vec<i64>> {
    (0u64..1 << n).map(move |bits| {
        let mut x = 0i64;
        let mut v = Vec::with_capacity(n + 1);
        v.push(0);
        for i in 0..n {
            x += if (bits >> i) & 1 == 1 { 1 } else { -1 };
            v.push(x);
        }
        v
    })
}

/// All nonnegative paths with `n` steps in {-1, 0, +1} starting at 0.
pub fn all_reflected(n: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64];
    extend(&mut cur, n, &mut out);
    out
}

fn extend(cur: &mut Vec<i64>, n: usize, out: &mut Vec<Vec<i64>>) {
    if cur.len() == n + 1 {
        out.push(cur.clone());
        return;
    }
    let x = *cur.last().expect("nonempty");
    for d in [-1, 0, 1] {
        if x + d >= 0 {
            cur.push(x + d);
            extend(cur, n, out);
            cur.pop();
        }
    }
}
