//! `loggas`: command-line front end.
//!
//! Every subcommand builds an effective [`RunConfig`] (the `--config` file
//! with command-line flags applied on top), calls one library operation,
//! and writes JSON (or CSV for measures) stamped with the config hash and
//! library version.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use loggas::config::{read_measure, RunConfig};
use loggas::equilibrium::{free_entropy, rate_functional, solve_equilibrium, weighted_energy};
use loggas::fekete::{solve_fekete, transfinite_diameter};
use loggas::montecarlo::{bm_ratio, log_j, log_prob, log_z};
use loggas::vdm::WeightSpec;
use loggas::verify::verify;
use loggas::{Error, Rectangle, Result};

#[derive(Parser)]
#[command(
    name = "loggas",
    version,
    about = "Weighted log-gas computations on rectangles"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every stochastic step (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

/// Flags shared by commands that need a rectangle and a weight.
#[derive(Args, Clone)]
struct Setup {
    /// `a,b` for an interval or `x_min,x_max,y_min,y_max`.
    #[arg(long)]
    rect: Option<Rectangle>,
    /// Weight JSON file: {"kind": ..., "coefficients": [[n1, n2, c], ...]}.
    #[arg(long)]
    weight: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "Z", alias = "z")]
    Z,
    #[value(name = "J", alias = "j")]
    J,
    #[value(name = "prob")]
    Prob,
}

#[derive(Subcommand)]
enum Command {
    /// Weighted Fekete points for one d, or a transfinite-diameter table.
    Fekete {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated d values; produces the diameter table.
        #[arg(long, value_delimiter = ',')]
        d_list: Option<Vec<usize>>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Discretized equilibrium measure (CSV unless --out ends in .json).
    Eqmeasure {
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Free entropy of a measure file.
    Entropy {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Large-deviation rate I(m) = I_phi(m) - I_phi(mu_eq).
    Rate {
        #[arg(long)]
        measure: PathBuf,
        #[command(flatten)]
        setup: Setup,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Monte Carlo estimates of log Z, log J or log Prob.
    Sample {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Bernstein-Markov ratio table.
    Bm {
        #[command(flatten)]
        setup: Setup,
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<u32>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run check suites; exit status 0 iff all pass.
    Verify {
        /// Suite names (repeatable); the config's list or all suites otherwise.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

fn load_config(global: &Global) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_setup(cfg: &mut RunConfig, setup: &Setup) -> Result<()> {
    if let Some(r) = setup.rect {
        cfg.rectangle = r;
    }
    if let Some(path) = &setup.weight {
        let spec: WeightSpec = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.weight = spec;
    }
    Ok(())
}

fn stamp<T: Serialize>(cfg: &RunConfig, command: &str, result: &T) -> Result<Value> {
    Ok(json!({
        "command": command,
        "version": loggas::VERSION,
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "result": serde_json::to_value(result)?,
    }))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn is_json(path: Option<&Path>) -> bool {
    path.and_then(Path::extension)
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let mut cfg = load_config(&cli.global)?;
    let out = cli.global.out.as_deref();
    match cli.command {
        Command::Fekete {
            setup,
            d,
            d_list,
            restarts,
        } => {
            apply_setup(&mut cfg, &setup)?;
            if let Some(r) = restarts {
                cfg.fekete.restarts = r;
            }
            cfg.d = d.or(cfg.d);
            cfg.d_list = d_list.or(cfg.d_list.take());
            let w = cfg.weight()?;
            let v = match (&cfg.d_list, cfg.d) {
                (Some(list), _) => {
                    let t = transfinite_diameter(&cfg.rectangle, &w, list, &cfg.fekete, cfg.seed)?;
                    stamp(&cfg, "fekete", &t)?
                }
                (None, Some(d)) => {
                    let r = solve_fekete(&cfg.rectangle, &w, d, &cfg.fekete, cfg.seed)?;
                    let mut v = stamp(&cfg, "fekete", &r)?;
                    let rows: Vec<[f64; 2]> = r
                        .configuration
                        .points()
                        .iter()
                        .map(|z| [z.re, z.im])
                        .collect();
                    v["result"]["configuration_xy"] = json!(rows);
                    v
                }
                (None, None) => {
                    return Err(Error::InvalidArgument(
                        "fekete needs --d or --d-list".into(),
                    ))
                }
            };
            emit_json(out, &v)?;
        }
        Command::Eqmeasure { setup, grid } => {
            apply_setup(&mut cfg, &setup)?;
            cfg.grid = grid.unwrap_or(cfg.grid);
            let w = cfg.weight()?;
            let sol = solve_equilibrium(&cfg.rectangle, &w, cfg.grid, &cfg.equilibrium)?;
            if is_json(out) {
                emit_json(out, &stamp(&cfg, "eqmeasure", &sol)?)?;
            } else {
                let header = vec![
                    format!("version {}", loggas::VERSION),
                    format!("config_hash {}", cfg.hash()),
                    format!("weighted_energy {:e}", sol.energy.weighted_energy),
                    format!("converged {}", sol.converged),
                ];
                let mut buf = Vec::new();
                sol.measure.write_csv(&mut buf, &header)?;
                emit(out, &buf)?;
            }
        }
        Command::Entropy { measure } => {
            let m = read_measure(&measure)?;
            let v =
                json!({ "measure": measure, "free_entropy": free_entropy(&m), "atoms": m.len() });
            emit_json(out, &stamp(&cfg, "entropy", &v)?)?;
        }
        Command::Rate {
            measure,
            setup,
            grid,
        } => {
            apply_setup(&mut cfg, &setup)?;
            cfg.grid = grid.unwrap_or(cfg.grid);
            let w = cfg.weight()?;
            let m = read_measure(&measure)?;
            let rate = rate_functional(&m, &w, &cfg.rectangle, cfg.grid)?;
            let energy = weighted_energy(&m, &w)?;
            let v = json!({ "rate": rate, "energy": energy });
            emit_json(out, &stamp(&cfg, "rate", &v)?)?;
        }
        Command::Sample { mode, d } => {
            cfg.d = d.or(cfg.d);
            let d = cfg.require_d()?;
            let w = cfg.weight()?;
            let tau = cfg.base_measure()?;
            let v = match mode {
                Mode::Z => stamp(&cfg, "sample", &log_z(&w, &tau, d, cfg.seed, &cfg.chain)?)?,
                Mode::J => {
                    let nb = cfg.neighborhood()?;
                    stamp(
                        &cfg,
                        "sample",
                        &log_j(&w, &tau, &nb, d, cfg.seed, &cfg.chain)?,
                    )?
                }
                Mode::Prob => {
                    let nb = cfg.neighborhood()?;
                    stamp(
                        &cfg,
                        "sample",
                        &log_prob(&w, &tau, &nb, d, cfg.seed, &cfg.chain)?,
                    )?
                }
            };
            emit_json(out, &v)?;
        }
        Command::Bm {
            setup,
            k_list,
            trials,
        } => {
            apply_setup(&mut cfg, &setup)?;
            if let Some(k) = k_list {
                cfg.bm.k_list = k;
            }
            if let Some(t) = trials {
                cfg.bm.trials = t;
            }
            let w = cfg.weight()?;
            let tau = cfg.base_measure()?;
            let t = bm_ratio(&w, &tau, &cfg.bm.k_list, cfg.bm.trials, cfg.seed)?;
            emit_json(out, &stamp(&cfg, "bm", &t)?)?;
        }
        Command::Verify { suites } => {
            if !suites.is_empty() {
                cfg.suites = suites;
            }
            let report = verify(&cfg)?;
            let report_path = out
                .map(Path::to_path_buf)
                .or_else(|| cfg.outputs.get("report").map(|p| cfg.resolve(p)));
            emit_json(report_path.as_deref(), &serde_json::to_value(&report)?)?;
            for s in &report.suites {
                let mark = if s.passed { "PASS" } else { "FAIL" };
                eprintln!("{mark} {}", s.name);
                if let Some(e) = &s.error {
                    eprintln!("     {e}");
                }
                for c in s.checks.iter().filter(|c| !c.passed) {
                    eprintln!("     failed: {} (value {})", c.name, c.value);
                }
            }
            return Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
