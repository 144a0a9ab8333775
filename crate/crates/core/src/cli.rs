//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 numerical
//! failure, 3 failed check.

use crate::analysis::{
    dedup_preserving, reach_comparison, weak_limit_experiment, write_covering_csv, write_reach_csv,
    write_weak_limit_csv, ReachSetup, RunRecord, WeakLimitRow,
};
use crate::config::RunConfig;
use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::output::OutputDir;
use crate::state::fmt_f64;
use crate::verify::{run_suite, transform_checks, Check, Fault, Suite};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bilinear-gp",
    version,
    about = "Hermite-spectral bilinear-controlled Gross-Pitaevskii simulator"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the configured initial state and write the trajectory.
    Simulate,
    /// Run a property suite and print PASS/FAIL per check.
    Verify {
        #[arg(long, value_parser = ["conservation", "energy_bound", "hardy", "lemma_kpsi", "convergence"])]
        suite: String,
        #[arg(long, hide = true, value_parser = ["control-sign"])]
        inject_fault: Option<String>,
    },
    /// Tabulate ε_n and sup_t ‖ψ_n - ψ‖_{H¹} for u_n = u + sin(2πnt).
    WeakLimit {
        /// Comma-separated; an empty string gives an empty table.
        #[arg(long, default_value = "4,8,16,32,64")]
        n_list: String,
    },
    /// Sample terminal states under bounded controls and compare covering
    /// numbers with uniform H¹-sphere states.
    Reach {
        #[arg(long, default_value_t = 200)]
        n_samples: usize,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Bound on the control L^r norm.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value = "0.05,0.1,0.2,0.4,0.8")]
        eps_list: String,
        #[arg(long, default_value_t = 8)]
        pieces: usize,
    },
    /// Transform round trip, discrete orthonormality and free-propagator
    /// checks. Needs no config.
    TransformCheck {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value = "8,16,32,64")]
        n_modes: String,
    },
}

fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::config(field, format!("cannot parse `{s}`")))
        })
        .collect()
}

fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("config", "--config PATH is required for this command"))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_echo(cfg: &RunConfig) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate => simulate(&load_config(cli)?),
        Command::Verify { suite, inject_fault } => {
            let cfg = load_config(cli)?;
            let suite =
                Suite::parse(suite).ok_or_else(|| Error::config("suite", format!("unknown suite `{suite}`")))?;
            let fault = inject_fault.as_ref().map(|_| Fault::ControlSign);
            Ok(report(&run_suite(suite, &cfg, fault)?))
        }
        Command::WeakLimit { n_list } => weak_limit(&load_config(cli)?, &parse_list("n_list", n_list)?),
        Command::Reach {
            n_samples,
            r,
            radius,
            eps_list,
            pieces,
        } => {
            let cfg = load_config(cli)?;
            if *n_samples == 0 {
                return Err(Error::config("n_samples", "must be at least 1"));
            }
            if !(*r >= 1.0) {
                return Err(Error::config("r", format!("must be >= 1, got {r}")));
            }
            if !(*radius >= 0.0 && radius.is_finite()) {
                return Err(Error::config(
                    "radius",
                    format!("must be finite and >= 0, got {radius}"),
                ));
            }
            let eps_list: Vec<f64> = parse_list("eps_list", eps_list)?;
            if eps_list.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::config("eps_list", "entries must be positive"));
            }
            let setup = ReachSetup {
                n_samples: *n_samples,
                r: *r,
                radius: *radius,
                pieces: *pieces,
                t_max: cfg.t_final,
                eps_list,
                seed: cfg.seed,
            };
            reach(&cfg, &setup)
        }
        Command::TransformCheck { dim, n_modes } => {
            let list: Vec<usize> = parse_list("n_modes", n_modes)?;
            let mut checks = Vec::new();
            for n in list {
                for mut c in transform_checks(*dim, n, cli.seed.unwrap_or(0), 0.01, 10)? {
                    c.name = format!("N = {n}: {}", c.name);
                    checks.push(c);
                }
            }
            Ok(report(&checks))
        }
    }
}

fn report(checks: &[Check]) -> i32 {
    for c in checks {
        println!("{c}");
    }
    if checks.iter().all(|c| c.pass) {
        EXIT_OK
    } else {
        EXIT_CHECK
    }
}

fn simulate(cfg: &RunConfig) -> Result<i32> {
    let basis = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let traj = evolve(&psi0, &cfg.control, &cfg.evolution())?;
    let record = RunRecord::from_trajectory(&traj, &cfg.control, cfg.sigma, false)?;
    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.write_with("record.csv", |w| record.write_csv(w))?;

    let stride = cfg.snapshot_stride.unwrap_or(1);
    let mut index = csv::Writer::from_writer(Vec::new());
    index.write_record(["index", "t", "file"])?;
    let last = traj.states.len() - 1;
    for (j, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        if j % stride != 0 && j != last {
            continue;
        }
        let name = format!("snapshots/state_{j:06}.csv");
        out.write_with(&name, |w| s.write_csv(w))?;
        index.write_record([j.to_string(), fmt_f64(*t), name])?;
    }
    let index = index.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write_bytes("times.csv", &index)?;

    if !traj.picard.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["start", "steps", "iterations", "contraction"])?;
        for p in &traj.picard {
            w.write_record([
                fmt_f64(p.start),
                p.steps.to_string(),
                p.iterations.to_string(),
                fmt_f64(p.contraction),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        out.write_bytes("picard.csv", &bytes)?;
    }
    eprintln!(
        "simulate: {} steps, mass drift {:.3e}, energy drift {:.3e}",
        last,
        record.mass_drift(),
        record.energy_drift()
    );
    let root = out.root().display().to_string();
    out.finish("simulate", &config_echo(cfg)?)?;
    eprintln!("wrote {root}");
    Ok(EXIT_OK)
}

/// One-line verdict on a weak-limit table.
pub fn weak_limit_summary(rows: &[WeakLimitRow]) -> String {
    if rows.is_empty() {
        return "weak-limit: empty table".into();
    }
    let mut sorted: Vec<&WeakLimitRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.n);
    let monotone = sorted.windows(2).all(|w| w[1].eps_n < w[0].eps_n);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let first = sorted[0];
    let last = sorted[sorted.len() - 1];
    format!(
        "weak-limit: eps_n strictly decreasing: {}; eps_{}/eps_{} = {:.4}; max ratio {:.4}",
        if monotone { "yes" } else { "no" },
        last.n,
        first.n,
        last.eps_n / first.eps_n,
        max_ratio
    )
}

fn weak_limit(cfg: &RunConfig, n_list: &[u32]) -> Result<i32> {
    let (unique, removed) = dedup_preserving(n_list);
    if removed {
        eprintln!("warning: duplicate entries removed from n_list, using {unique:?}");
    }
    let basis = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let rows = weak_limit_experiment(&psi0, &cfg.control, &unique, &cfg.evolution())?;
    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.write_with("weak_limit.csv", |w| write_weak_limit_csv(&rows, w))?;
    out.finish("weak-limit", &config_echo(cfg)?)?;
    println!("{}", weak_limit_summary(&rows));
    Ok(EXIT_OK)
}

fn reach(cfg: &RunConfig, setup: &ReachSetup) -> Result<i32> {
    let basis = cfg.basis()?;
    let psi0 = cfg.initial_state(&basis)?;
    let cmp = reach_comparison(&psi0, setup, &cfg.evolution())?;
    for s in cmp.samples.iter().filter(|s| s.error.is_some()) {
        eprintln!(
            "warning: sample {} failed: {}",
            s.sample_id,
            s.error.as_deref().unwrap_or("")
        );
    }
    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.write_with("reach.csv", |w| write_reach_csv(&cmp.samples, w))?;
    out.write_with("covering.csv", |w| {
        write_covering_csv(&setup.eps_list, &cmp.reach_sizes, w)
    })?;
    out.write_with("covering_uniform.csv", |w| {
        write_covering_csv(&setup.eps_list, &cmp.uniform_sizes, w)
    })?;
    let mut echo = config_echo(cfg)?;
    echo["reach"] = serde_json::json!({
        "n_samples": setup.n_samples,
        "r": setup.r,
        "radius": setup.radius,
        "pieces": setup.pieces,
        "eps_list": setup.eps_list,
        "matched_radius": cmp.matched_radius,
    });
    out.finish("reach", &echo)?;
    println!(
        "reach: terminal-state net smaller than uniform sphere net (radius {:.6}) at {} of {} eps values",
        cmp.matched_radius,
        cmp.smaller_count(),
        setup.eps_list.len()
    );
    Ok(EXIT_OK)
}
