use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lattice::io::{read_csv, write_csv};
use lattice::path::format_time;
use lattice::{d_cu, d_cz, levy_transform, parse_time, run_chain, sample_srw, ChainStep, LatticePath, Target, Time};
use levy_cli::{suites, targets};
use num_traits::ToPrimitive;
use rand::RngCore;
use recurrence::{FiniteSystem, StateSet};
use serde_json::{json, Value};
use steering::{approximate_signed_target, BridgeParams, Certificate};

/// Lattice Levy transformation toolkit.
///
/// Every random choice is derived from `--seed`; `--seed 0` draws a seed
/// from the OS and prints it on stderr. Exit codes: 0 success, 1
/// verification or steering failure, 2 usage, file or parse error.
#[derive(Parser)]
#[command(name = "levy", version)]
struct Cli {
    /// Root seed (0: derive from OS entropy).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Grid step as a rational, e.g. 1/1024.
    #[arg(long, global = true, default_value = "1/1024")]
    dt: String,
    /// Number of grid steps for generated paths.
    #[arg(long, global = true, default_value_t = 1024)]
    steps: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a scaled simple random walk.
    Simulate {
        /// Output the reflected walk.
        #[arg(long)]
        reflect: bool,
    },
    /// Forward transform `w -> w_hat` with local time.
    Levy {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Iterate random inverse steps from a reflected path.
    InverseChain {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Restart time for every step.
        #[arg(long)]
        a: Option<String>,
        /// Directory receiving one CSV per step.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// CU and CZ distances between two paths up to time t.
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "1")]
        t: String,
    },
    /// Steer a reflected path into a ball around a target.
    Steer {
        #[arg(long = "in")]
        input: PathBuf,
        /// Canonical target: zero, tent, plateau, w or stairs.
        #[arg(long, conflicts_with = "target_file")]
        target: Option<String>,
        /// Target JSON with a "breakpoints" list of [time, value] strings.
        #[arg(long)]
        target_file: Option<PathBuf>,
        #[arg(long, default_value = "1")]
        t: String,
        #[arg(long, default_value_t = 0.15)]
        rho: f64,
        #[arg(long, default_value = "1/10")]
        delta: String,
        /// Certificate output.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Replay a certificate on its initial path.
    Replay {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run verification suites and print a JSON summary.
    Verify {
        /// tanaka, roundtrip, oscillation, distribution, rationals, metrics, recurrence or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Finite-system recurrence operations.
    Recurrence {
        /// System JSON {"n", "T", "pi"}; a random system when absent.
        #[arg(long)]
        system: Option<PathBuf>,
        /// State count of the random system.
        #[arg(long, default_value_t = 5)]
        states: usize,
        /// Random system is a permutation.
        #[arg(long)]
        permutation: bool,
        #[arg(long, value_enum, default_value_t = Op::Poincare)]
        op: Op,
        /// Comma-separated states; chaining takes three sets separated by ';'.
        #[arg(long, default_value = "0")]
        set: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Visit,
    Often,
    Accessible,
    Poincare,
    Chaining,
    Atteignability,
    System,
}

enum Fail {
    Usage(String),
    Failed(Value),
}

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if cli.seed == 0 {
        cli.seed = rand::rngs::OsRng.next_u64().max(1);
        eprintln!("seed: {}", cli.seed);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Failed(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::from(1)
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn time_arg(s: &str, what: &str) -> Result<Time, Fail> {
    parse_time(s).ok_or_else(|| usage(format!("{what}: cannot parse {s:?} as a rational")))
}

fn read_path(p: &Path, dt: Time) -> Result<LatticePath, Fail> {
    let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    read_csv(&text, dt).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn emit(cli: &Cli, text: &str) -> Result<(), Fail> {
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cli: &Cli, v: &Value) -> Result<(), Fail> {
    emit(cli, &(serde_json::to_string_pretty(v).expect("json") + "\n"))
}

fn path_json(p: &LatticePath) -> Value {
    json!({ "dt": format_time(p.dt()), "coords": p.coords(), "digest": p.digest() })
}

fn emit_path(cli: &Cli, p: &LatticePath) -> Result<(), Fail> {
    match cli.format {
        Format::Csv => emit(cli, &write_csv(p)),
        Format::Json => emit_json(cli, &path_json(p)),
    }
}

fn run(cli: &Cli) -> Result<(), Fail> {
    let dt = time_arg(&cli.dt, "--dt")?;
    if dt <= Time::from_integer(0) {
        return Err(usage("--dt must be positive"));
    }
    match &cli.cmd {
        Cmd::Simulate { reflect } => {
            let w = sample_srw(cli.steps, dt, cli.seed);
            emit_path(cli, &if *reflect { w.reflect() } else { w })
        }
        Cmd::Levy { input } => {
            let w = read_path(input, dt)?;
            let (hat, l) = levy_transform(&w.as_signed());
            match cli.format {
                Format::Csv => emit(cli, &write_csv(&hat)),
                Format::Json => {
                    let mut v = path_json(&hat);
                    v["local_time"] = json!(l);
                    emit_json(cli, &v)
                }
            }
        }
        Cmd::InverseChain { input, n, a, dump } => {
            let r0 = read_path(input, dt)?;
            if r0.kind() != lattice::PathKind::Reflected {
                return Err(usage("inverse-chain needs a nonnegative path"));
            }
            let a = a.as_deref().map(|s| time_arg(s, "--a")).transpose()?;
            let per: Vec<ChainStep> = (0..*n).map(|_| ChainStep { a, ..Default::default() }).collect();
            let states = run_chain(&r0, *n, cli.seed, Some(&per));
            if let Some(dir) = dump {
                fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
                for st in &states {
                    let p = dir.join(format!("step{:04}.csv", st.step));
                    fs::write(&p, write_csv(&st.r)).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                }
            }
            match cli.format {
                Format::Csv => {
                    let mut s = String::from("step,digest,final_value,max\n");
                    for st in &states {
                        let max = st.r.coords().iter().max().copied().unwrap_or(0) as f64 * st.r.dx();
                        s += &format!(
                            "{},{},{},{}\n",
                            st.step,
                            st.digest,
                            lattice::io::format_value(st.r.value(st.r.steps())),
                            lattice::io::format_value(max)
                        );
                    }
                    emit(cli, &s)
                }
                Format::Json => {
                    let v: Vec<Value> =
                        states.iter().map(|st| json!({ "step": st.step, "path": path_json(&st.r) })).collect();
                    emit_json(cli, &json!(v))
                }
            }
        }
        Cmd::Dist { a, b, t } => {
            let t = time_arg(t, "--t")?;
            let (pa, pb) = (read_path(a, dt)?, read_path(b, dt)?);
            let cu = d_cu(&pa, &pb, t).map_err(usage)?;
            let cz = d_cz(&pa, &pb, t).map_err(usage)?;
            emit_json(
                cli,
                &json!({ "d_cu": cu, "d_cz": format_time(cz), "d_cz_f64": cz.to_f64(), "t": format_time(t) }),
            )
        }
        Cmd::Steer { input, target, target_file, t, rho, delta, cert } => {
            let f: Target = match (target, target_file) {
                (Some(name), _) => targets::canonical(name)
                    .ok_or_else(|| usage(format!("unknown target {name:?}; known: {:?}", targets::CANONICAL)))?,
                (None, Some(p)) => {
                    let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
                }
                (None, None) => return Err(usage("steer needs --target or --target-file")),
            };
            let (t, delta) = (time_arg(t, "--t")?, time_arg(delta, "--delta")?);
            let r0 = read_path(input, dt)?;
            match approximate_signed_target(&f, t, *rho, delta, &r0, cli.seed, &BridgeParams::default()) {
                Ok(out) => {
                    let replayed = out.certificate.replay(&r0).map(|p| p == out.path).unwrap_or(false);
                    if let Some(p) = cert {
                        let text = serde_json::to_string_pretty(&out.certificate).expect("json") + "\n";
                        fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    }
                    let summary = json!({
                        "result": if replayed { "PASS" } else { "FAIL" },
                        "target": f.to_string(),
                        "d_cu": out.d_cu,
                        "d_cz": out.d_cz,
                        "steps": out.certificate.steps.len(),
                        "overrides": out.certificate.override_count(),
                        "initial_digest": out.certificate.initial_digest,
                        "final_digest": out.certificate.final_digest,
                        "prefix_checks": out.prefix_checks,
                        "prefix_failures": out.prefix_failures,
                    });
                    if !replayed {
                        return Err(Fail::Failed(summary));
                    }
                    if cli.out.is_some() && cli.format == Format::Csv {
                        emit(cli, &write_csv(&out.path))?;
                        println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
                        Ok(())
                    } else {
                        emit_json(cli, &summary)
                    }
                }
                Err(e) => Err(Fail::Failed(json!({ "result": "FAIL", "error": e.to_string() }))),
            }
        }
        Cmd::Replay { cert, input } => {
            let text = fs::read_to_string(cert).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
            let c: Certificate = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", cert.display())))?;
            let r0 = read_path(input, dt)?;
            match c.replay(&r0) {
                Ok(p) => emit_json(cli, &json!({ "result": "PASS", "final_digest": p.digest(), "steps": c.steps.len() })),
                Err(e) => Err(Fail::Failed(json!({ "result": "FAIL", "error": e.to_string() }))),
            }
        }
        Cmd::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" { suites::SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut reports = Vec::new();
            for name in names {
                reports.push(
                    suites::run(name, cli.seed)
                        .ok_or_else(|| usage(format!("unknown suite {name:?}; known: {:?}", suites::SUITES)))?,
                );
            }
            let pass = reports.iter().all(|r| r.passed());
            let v = json!({ "result": if pass { "PASS" } else { "FAIL" }, "suites": reports });
            if pass {
                emit_json(cli, &v)
            } else {
                Err(Fail::Failed(v))
            }
        }
        Cmd::Recurrence { system, states, permutation, op, set } => {
            let sys = match system {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    serde_json::from_str::<FiniteSystem>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
                }
                None => {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
                    if *permutation {
                        FiniteSystem::random_permutation(*states, &mut rng)
                    } else {
                        FiniteSystem::random_map(*states, &mut rng)
                    }
                    .map_err(usage)?
                }
            };
            let sets = set.split(';').map(|s| parse_set(s, sys.n())).collect::<Result<Vec<_>, _>>()?;
            let b = &sets[0];
            let body = match op {
                Op::System => serde_json::to_value(&sys).expect("json"),
                Op::Visit => json!({ "B": b, "U": recurrence::orbit_visit_set(&sys, b) }),
                Op::Often => json!({ "B": b, "R": recurrence::infinitely_often_set(&sys, b) }),
                Op::Accessible => json!({ "B": b, "A": recurrence::accessible_set(&sys, b) }),
                Op::Poincare => {
                    let rep = recurrence::check_poincare_refinement(&sys, b);
                    if !rep.holds {
                        return Err(Fail::Failed(json!({ "system": sys, "report": rep })));
                    }
                    serde_json::to_value(&rep).expect("json")
                }
                Op::Chaining => {
                    if sets.len() != 3 {
                        return Err(usage("chaining needs three sets: --set 'B0;B1;B2'"));
                    }
                    let rep = recurrence::check_chaining(&sys, &sets[0], &sets[1], &sets[2]);
                    if matches!(rep, recurrence::ChainingReport::Violated { .. }) {
                        return Err(Fail::Failed(json!({ "system": sys, "report": rep })));
                    }
                    serde_json::to_value(&rep).expect("json")
                }
                Op::Atteignability => {
                    let rep = recurrence::check_atteignability_equivalence(&sys, b);
                    if !rep.holds {
                        return Err(Fail::Failed(json!({ "system": sys, "report": rep })));
                    }
                    serde_json::to_value(&rep).expect("json")
                }
            };
            emit_json(cli, &json!({ "system": sys, "result": body }))
        }
    }
}

fn parse_set(s: &str, n: usize) -> Result<StateSet, Fail> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x.parse::<usize>() {
            Ok(v) if v < n => Ok(v),
            _ => Err(usage(format!("bad state {x:?} (system has {n} states)"))),
        })
        .collect()
}
