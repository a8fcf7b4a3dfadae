//! One PASS/FAIL line per acceptance criterion. Thresholds are pinned here.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lattice::metrics::{Center, CuczBall};
use lattice::{in_ball, sample_srw, Time};
use levy_cli::suites;
use levy_cli::targets::{canonical, CANONICAL};
use steering::{approximate_signed_target, BridgeParams};

const SEED: u64 = 1;

const TANAKA_LIMIT: Duration = Duration::from_secs(10);
const ROUNDTRIP_LIMIT: Duration = Duration::from_secs(60);
const DISTRIBUTION_LIMIT: Duration = Duration::from_secs(120);
const STEER_RUN_LIMIT: Duration = Duration::from_secs(60);
const STEER_SEEDS: u64 = 20;
const STEER_MIN_HITS: usize = 18;
const RECURRENCE_LIMIT: Duration = Duration::from_secs(120);

struct Line {
    id: u32,
    pass: bool,
    what: String,
}

fn suite_line(id: u32, report: &suites::SuiteReport, elapsed: Duration, limit: Option<Duration>) -> Line {
    let in_time = limit.map_or(true, |l| elapsed < l);
    Line {
        id,
        pass: report.passed() && in_time,
        what: format!(
            "{}: {} checked, {} failures, {:.1}s{} {}",
            report.suite,
            report.checked,
            report.failures,
            elapsed.as_secs_f64(),
            limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs())),
            report.details
        ),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Criteria 7 and 8 share the steering runs.
fn steering_lines() -> (Line, Line) {
    let dt = Time::new(1, 4096);
    let (t, rho, delta) = (Time::from_integer(1), 0.15, Time::new(1, 10));
    let mut ok7 = true;
    let mut per_target = Vec::new();
    let (mut checks, mut prefix_failures) = (0usize, 0usize);
    let mut slowest = Duration::ZERO;
    for name in CANONICAL {
        let f = canonical(name).unwrap();
        let ball = CuczBall::new(Center::Target(f.clone()), t, rho, delta);
        let mut hits = 0;
        for seed in 0..STEER_SEEDS {
            let r = sample_srw(5120, dt, 1000 + seed).reflect();
            let (out, elapsed) = timed(|| approximate_signed_target(&f, t, rho, delta, &r, seed, &BridgeParams::default()));
            slowest = slowest.max(elapsed);
            if elapsed >= STEER_RUN_LIMIT {
                ok7 = false;
            }
            let Ok(out) = out else { continue };
            checks += out.prefix_checks;
            prefix_failures += out.prefix_failures;
            let replays = out.certificate.replay(&r).map_or(false, |p| p == out.path);
            if !replays {
                ok7 = false;
            }
            if replays && in_ball(&out.path, &ball).unwrap() {
                hits += 1;
            }
        }
        ok7 &= hits >= STEER_MIN_HITS;
        per_target.push(format!("{name} {hits}/{STEER_SEEDS}"));
    }
    let seven = Line {
        id: 7,
        pass: ok7,
        what: format!(
            "steering into V_1(f, 0.15, 0.1) at dt 1/4096: {} (need {STEER_MIN_HITS}), slowest run {:.2}s",
            per_target.join(", "),
            slowest.as_secs_f64()
        ),
    };
    let eight = Line {
        id: 8,
        pass: prefix_failures == 0 && checks > 0,
        what: format!("prefix digests: {checks} restarted steps checked, {prefix_failures} changed"),
    };
    (seven, eight)
}

fn levy(args: &[&str], dir: &Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_levy")).args(args).current_dir(dir).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism_line() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let runs: Vec<Vec<&str>> = vec![
        vec!["simulate", "--seed", "7", "--steps", "512", "--out", "w.csv"],
        vec!["simulate", "--seed", "7", "--steps", "512", "--reflect", "--out", "r.csv"],
        vec!["simulate", "--seed", "7", "--steps", "512", "--format", "json"],
        vec!["levy", "--in", "w.csv", "--steps", "512"],
        vec!["inverse-chain", "--in", "r.csv", "--n", "5", "--seed", "3"],
        vec!["inverse-chain", "--in", "r.csv", "--n", "3", "--a", "1/4", "--format", "json"],
        vec!["dist", "--a", "w.csv", "--b", "r.csv", "--t", "1/2"],
        vec!["simulate", "--seed", "1000", "--steps", "5120", "--dt", "1/4096", "--reflect", "--out", "s.csv"],
        vec!["steer", "--in", "s.csv", "--dt", "1/4096", "--target", "w", "--seed", "2", "--cert", "c.json"],
        vec!["replay", "--cert", "c.json", "--in", "s.csv", "--dt", "1/4096"],
        vec!["verify", "--suite", "rationals"],
        vec!["verify", "--suite", "metrics", "--seed", "5"],
        vec!["recurrence", "--states", "6", "--op", "atteignability", "--set", "0,2,4"],
        vec!["recurrence", "--states", "5", "--permutation", "--op", "poincare", "--set", "1"],
    ];
    let files = ["w.csv", "r.csv", "s.csv", "c.json"];
    let transcript = |tag: &str| -> Vec<(i32, Vec<u8>)> {
        let mut out = Vec::new();
        for args in &runs {
            out.push(levy(args, d));
        }
        for f in files {
            out.push((0, std::fs::read(d.join(f)).unwrap_or_else(|_| panic!("{tag}: {f} missing"))));
        }
        out
    };
    let first = transcript("first");
    let second = transcript("second");
    let codes: Vec<i32> = first.iter().take(runs.len()).map(|x| x.0).collect();
    let differing: Vec<usize> = (0..first.len()).filter(|&i| first[i] != second[i]).collect();
    let all_ok = codes.iter().all(|&c| c == 0);
    Line {
        id: 10,
        pass: differing.is_empty() && all_ok,
        what: format!(
            "{} invocations and {} output files repeated: {} differ, exit codes {:?}",
            runs.len(),
            files.len(),
            differing.len(),
            codes
        ),
    }
}

#[test]
fn acceptance_criteria() {
    let mut lines = Vec::new();

    let (rep, el) = timed(|| suites::tanaka(14));
    lines.push(suite_line(1, &rep, el, Some(TANAKA_LIMIT)));

    let (rep, el) = timed(|| suites::roundtrip(12, 64, SEED));
    lines.push(suite_line(2, &rep, el, Some(ROUNDTRIP_LIMIT)));

    let (rep, el) = timed(|| suites::oscillation(12));
    lines.push(suite_line(3, &rep, el, None));

    let (rep, el) = timed(|| suites::distribution(10_000, 1024, SEED));
    lines.push(suite_line(4, &rep, el, Some(DISTRIBUTION_LIMIT)));

    let (rep, el) = timed(suites::rationals);
    lines.push(suite_line(5, &rep, el, None));

    let (rep, el) = timed(|| suites::metrics(1000, SEED));
    lines.push(suite_line(6, &rep, el, None));

    let (seven, eight) = steering_lines();
    lines.push(seven);
    lines.push(eight);

    let (rep, el) = timed(|| suites::recurrence(SEED));
    lines.push(suite_line(9, &rep, el, Some(RECURRENCE_LIMIT)));

    lines.push(determinism_line());

    for l in &lines {
        println!("criterion {:>2}: {} {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.what);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
