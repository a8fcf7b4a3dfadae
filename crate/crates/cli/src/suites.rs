//! Verification suites shared by `levy verify` and the acceptance test.

use lattice::exhaustive::{all_reflected, all_walks};
use lattice::metrics::d_cz_bisect;
use lattice::{
    apply_signs, d_cz, enumerate, levy_transform, run_chain, sample_srw, seeds, LatticePath, SignFamily, Time,
};
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, Normal};

pub const SUITES: [&str; 7] = ["tanaka", "roundtrip", "oscillation", "distribution", "rationals", "metrics", "recurrence"];

/// Tolerance on the KS statistic for the chain marginals.
pub const KS_LIMIT: f64 = 0.03;
/// Tolerance between exact and bisected `d_cz`, in units of `dt`.
pub const BISECT_TOL_DT: (i128, i128) = (1, 4);

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub result: &'static str,
    pub checked: u64,
    pub failures: u64,
    pub details: Value,
}

impl SuiteReport {
    fn new(suite: &str, checked: u64, failures: u64, details: Value) -> Self {
        let result = if failures == 0 { "PASS" } else { "FAIL" };
        SuiteReport { suite: suite.to_string(), result, checked, failures, details }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn run(name: &str, seed: u64) -> Option<SuiteReport> {
    Some(match name {
        "tanaka" => tanaka(14),
        "roundtrip" => roundtrip(12, 64, seed),
        "oscillation" => oscillation(12),
        "distribution" => distribution(10_000, 1024, seed),
        "rationals" => rationals(),
        "metrics" => metrics(1000, seed),
        "recurrence" => recurrence(seed),
        _ => return None,
    })
}

fn one() -> Time {
    Time::from_integer(1)
}

/// `|w| = w_hat + L`, `L_n = max_{k<=n} (-w_hat_k)` and `reflect(w_hat) = |w|`
/// on every walk of length `n`.
pub fn tanaka(n: usize) -> SuiteReport {
    let (mut checked, mut failures) = (0, 0);
    let mut first = None;
    for v in all_walks(n) {
        let w = LatticePath::signed(one(), v).expect("walks are valid");
        let (hat, l) = levy_transform(&w);
        let abs = w.abs();
        let mut run = 0i64;
        let mut ok = hat.reflect() == abs;
        for k in 0..=n {
            run = run.max(-hat.coords()[k]);
            ok &= abs.coords()[k] == hat.coords()[k] + l[k] && l[k] == run;
        }
        checked += 1;
        if !ok {
            failures += 1;
            first.get_or_insert_with(|| w.coords().to_vec());
        }
    }
    SuiteReport::new("tanaka", checked, failures, json!({ "length": n, "first_failure": first }))
}

/// `reflect(levy_transform(apply_signs(e, r))) = r` on every reflected path
/// of length at most `n`, for `families` seeded sign families.
pub fn roundtrip(n: usize, families: u64, seed: u64) -> SuiteReport {
    let (mut checked, mut failures) = (0, 0);
    let es: Vec<SignFamily> =
        (0..families).map(|i| SignFamily::random(seeds::derive(seed, &[seeds::label("roundtrip"), i]))).collect();
    for len in 1..=n {
        for v in all_reflected(len) {
            let r = LatticePath::reflected(one(), v).expect("reflected paths are valid");
            for e in &es {
                let w = apply_signs(e, &r);
                checked += 1;
                if levy_transform(&w).0.reflect() != r {
                    failures += 1;
                }
            }
        }
    }
    SuiteReport::new("roundtrip", checked, failures, json!({ "max_length": n, "families": families }))
}

/// `N_t(rbar - r, h) <= max(N_t(r, h) - 1, 0)` for every reflected path of
/// length at most `n` and `h` in 1..=3.
pub fn oscillation(n: usize) -> SuiteReport {
    let (mut checked, mut failures) = (0, 0);
    for len in 1..=n {
        for v in all_reflected(len) {
            let r = LatticePath::reflected(one(), v).expect("reflected paths are valid");
            let bar = r.complement();
            for h in 1..=3 {
                let before = r.oscillation_count(len, h as f64);
                let after = bar.oscillation_count(len, h as f64);
                checked += 1;
                if after > before.saturating_sub(1) {
                    failures += 1;
                }
            }
        }
    }
    SuiteReport::new("oscillation", checked, failures, json!({ "max_length": n, "h": [1, 2, 3] }))
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Marginals at `t = 1` of `chains` independent chains started from
/// reflected walks with `steps` steps of size `1/steps`.
pub fn distribution(chains: u64, steps: usize, seed: u64) -> SuiteReport {
    let dt = Time::new(1, steps as i128);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let half = |x: f64| if x <= 0.0 { 0.0 } else { 2.0 * normal.cdf(x) - 1.0 };
    let mut at = vec![Vec::with_capacity(chains as usize); 6];
    let mut signed = Vec::with_capacity(chains as usize);
    for c in 0..chains {
        let path_seed = seeds::derive(seed, &[seeds::label("dist-path"), c]);
        let chain_seed = seeds::derive(seed, &[seeds::label("dist-chain"), c]);
        let r0 = sample_srw(steps, dt, path_seed).reflect();
        let e = SignFamily::random(seeds::derive(seed, &[seeds::label("dist-signs"), c]));
        signed.push(apply_signs(&e, &r0).value(steps));
        for st in run_chain(&r0, 5, chain_seed, None) {
            at[st.step].push(st.r.value(steps));
        }
    }
    let ks_r0 = ks_statistic(&mut at[0], half);
    let ks_1 = ks_statistic(&mut at[1], half);
    let ks_5 = ks_statistic(&mut at[5], half);
    let ks_signed = ks_statistic(&mut signed, |x| normal.cdf(x));
    let failures = [ks_1, ks_5, ks_signed].iter().filter(|&&k| k >= KS_LIMIT).count() as u64;
    SuiteReport::new(
        "distribution",
        3,
        failures,
        json!({
            "chains": chains,
            "dt": format!("1/{steps}"),
            "limit": KS_LIMIT,
            "ks_r0": ks_r0,
            "ks_n1": ks_1,
            "ks_n5": ks_5,
            "ks_signed": ks_signed,
        }),
    )
}

pub const FIRST_ELEVEN: [(u64, u64); 11] =
    [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (1, 4), (2, 3), (3, 2), (4, 1), (1, 5), (5, 1)];

pub fn rationals() -> SuiteReport {
    let got = enumerate(11);
    let failures = got.iter().zip(FIRST_ELEVEN).filter(|(r, (p, q))| (r.p(), r.q()) != (*p, *q)).count() as u64;
    let shown: Vec<String> = got.iter().map(|r| r.to_string()).collect();
    SuiteReport::new("rationals", 11, failures, json!({ "first": shown }))
}

fn triangle_failures(ps: &[LatticePath], t: Time) -> (u64, u64) {
    let d: Vec<Vec<Time>> = ps.iter().map(|f| ps.iter().map(|g| d_cz(f, g, t).expect("same grid")).collect()).collect();
    let (mut checked, mut failures) = (0, 0);
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            for k in 0..ps.len() {
                checked += 1;
                if d[i][k] > d[i][j] + d[j][k] {
                    failures += 1;
                }
            }
        }
    }
    (checked, failures)
}

/// Exact `d_cz` against bisection on random pairs, and the triangle
/// inequality exhaustively for short walks and on sampled long paths.
pub fn metrics(pairs: u64, seed: u64) -> SuiteReport {
    let dt = Time::new(1, 256);
    let tol = dt * Time::new(BISECT_TOL_DT.0, BISECT_TOL_DT.1);
    let mut oracle_failures = 0;
    let mut worst = Time::from_integer(0);
    for i in 0..pairs {
        let s = |k: u64| seeds::derive(seed, &[seeds::label("metrics"), i, k]);
        let (mut f, mut g) = (sample_srw(256, dt, s(0)), sample_srw(256, dt, s(1)));
        if i % 2 == 1 {
            f = f.reflect();
            g = g.reflect();
        }
        let t = dt * Time::from_integer(1 + (s(2) % 256) as i128);
        let exact = d_cz(&f, &g, t).expect("same grid");
        let approx = d_cz_bisect(&f, &g, t, dt / Time::from_integer(64));
        let err = (exact - approx).abs();
        worst = worst.max(err);
        if err > tol {
            oracle_failures += 1;
        }
    }
    let (mut tri_checked, mut tri_failures) = (0, 0);
    for n in 1..=6 {
        let ps: Vec<LatticePath> = all_walks(n).map(|v| LatticePath::signed(one(), v).expect("walk")).collect();
        let (c, f) = triangle_failures(&ps, Time::from_integer(n as i128));
        tri_checked += c;
        tri_failures += f;
    }
    for i in 0..(pairs / 10).max(1) {
        let ps: Vec<LatticePath> = (0..3)
            .map(|k| sample_srw(256, dt, seeds::derive(seed, &[seeds::label("triangle"), i, k])).reflect())
            .collect();
        let (c, f) = triangle_failures(&ps, one());
        tri_checked += c;
        tri_failures += f;
    }
    SuiteReport::new(
        "metrics",
        pairs + tri_checked,
        oracle_failures + tri_failures,
        json!({
            "pairs": pairs,
            "oracle_failures": oracle_failures,
            "worst_error_in_dt": (worst / dt).to_f64(),
            "triangle_checked": tri_checked,
            "triangle_failures": tri_failures,
        }),
    )
}

pub fn recurrence(seed: u64) -> SuiteReport {
    let rep = recurrence::sweep(seed, 100, 1000);
    let failures = (rep.poincare_violations + rep.atteignability_violations) as u64;
    let checked = (rep.poincare_checks + rep.atteignability_cases) as u64;
    SuiteReport::new("recurrence", checked, failures, serde_json::to_value(&rep).expect("plain data"))
}
