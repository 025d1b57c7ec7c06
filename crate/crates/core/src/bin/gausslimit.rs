use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use gausslimit::config::{CaseSelection, ExperimentConfig};
use gausslimit::harness::{
    alternating_closed_form, identity_violations, imaginary_closed_form, run_convergence_study,
    simulate_normalized_outputs, Experiment,
};
use gausslimit::lti::ImpulseResponse;
use gausslimit::output::{csv, write_text, RunManifest};
use gausslimit::stein::{bound_for_case, prop1_bound, AlphaMode, BoundReport};
use gausslimit::variance::{sigma2_exact, VarianceReport};
use gausslimit::wasserstein::{estimate, EmpiricalSample, W1Estimate};
use gausslimit::{Error, Result};

const COUNTEREXAMPLE1: &str = include_str!("../../configs/counterexample1.cfg");
const COUNTEREXAMPLE2: &str = include_str!("../../configs/counterexample2.cfg");

#[derive(Parser)]
#[command(name = "gausslimit", version, about = "Gaussianity bounds for LTI outputs driven by dependent noise")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "GAUSSLIMIT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Impulse response G_0..G_T and its dominant-pole envelope.
    Impulse {
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assembled bound f(alpha, t) for one or more t.
    Bound {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        alpha_mode: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact output variance and its lower bounds.
    Variance {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Normalized outputs y_t/sigma_t, one per line.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// W1 distance of a sample file (one value per line) to N(0,1).
    W1 {
        sample: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convergence study: study.csv, plot.dat and manifest.json in --out.
    Study {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Both counterexamples: identities, variance and non-vanishing W1.
    Counterexamples {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        replicates: Option<usize>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_impulse(config: &Path, horizon: usize, out: Option<&Path>) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let ir = ImpulseResponse::analyze(&cfg.spec()?, horizon, cfg.study.epsilon, cfg.policy())?;
    let text = csv("index,G", ir.g.iter().enumerate().map(|(j, g)| format!("{j},{g}")));
    emit(out, &text)?;
    let e = &ir.envelope;
    eprintln!(
        "dominant |r1| = {} ({:?}, multiplicity {}), alpha = {}, d = {}, c_lo = {}, c_hi = {}, T_eps = {}, T'_eps = {}",
        ir.dominant_modulus,
        ir.kind,
        ir.d1,
        e.alpha,
        e.d,
        e.c_lo,
        e.c_hi,
        e.t_eps,
        e.t_eps_prime()
    );
    Ok(())
}

fn cmd_bound(config: &Path, ts: &[usize], case: Option<&str>, alpha_mode: Option<&str>, out: Option<&Path>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(case) = case {
        cfg.study.case = CaseSelection::parse(case)?;
    }
    if let Some(mode) = alpha_mode {
        cfg.study.alpha_mode = mode.parse::<AlphaMode>()?;
    }
    cfg.study.t_grid = ts.to_vec();
    cfg.study.t_grid.sort_unstable();
    cfg.study.t_grid.dedup();
    let exp = Experiment::prepare(&cfg)?;
    let Some(case) = exp.case else {
        return Err(Error::InvalidExperiment(
            "no assembled bound applies to this input (class 'other' or case = none)".into(),
        ));
    };
    let mut rows = Vec::new();
    for &t in &cfg.study.t_grid {
        let stats = exp.process.statistics(t)?;
        let report: BoundReport = bound_for_case(case, &exp.ir, &exp.process, &stats, t, cfg.study.alpha_mode)?;
        let sigma2 = sigma2_exact(&exp.ir.g, &exp.process, t)?;
        let prop1 = prop1_bound(&exp.ir.g, &stats, stats.profile.dependency, t, sigma2)?;
        eprintln!("t = {t}: prop1 = {prop1}, f = {}", report.f);
        rows.push(report.csv_row());
    }
    emit(out, &csv(BoundReport::CSV_HEADER, rows))
}

fn cmd_variance(config: &Path, ts: &[usize], out: Option<&Path>) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let horizon = ts.iter().copied().max().unwrap_or(1);
    let ir = ImpulseResponse::analyze(&cfg.spec()?, horizon, cfg.study.epsilon, cfg.policy())?;
    let process = cfg.process()?;
    let rows = ts
        .iter()
        .map(|&t| VarianceReport::compute(&ir, &process, t).map(|r| r.csv_row()))
        .collect::<Result<Vec<_>>>()?;
    emit(out, &csv(VarianceReport::CSV_HEADER, rows))
}

fn cmd_simulate(config: &Path, t: usize, replicates: Option<usize>, out: Option<&Path>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    cfg.study.t_grid = vec![t];
    if let Some(n) = replicates {
        cfg.study.replicates = n;
    }
    let exp = Experiment::prepare(&cfg)?;
    let sample = simulate_normalized_outputs(&exp, t)?;
    let mut text = String::new();
    for v in sample.values() {
        text.push_str(&format!("{v}\n"));
    }
    emit(out, &text)
}

fn cmd_w1(path: &Path, seed: u64) -> Result<()> {
    let text = fs::read_to_string(path)?;
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::Config {
                line: Some(i + 1),
                message: format!("not a number: {e}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let est = estimate(&EmpiricalSample::new(values)?, seed);
    emit(None, &csv(W1Estimate::CSV_HEADER, [est.csv_row()]))
}

/// Returns whether every row passed the dominance check.
fn cmd_study(config: &Path, out: &Path) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let mut manifest = RunManifest::start(cfg.hash(), cfg.noise.seed);
    let study = run_convergence_study(&cfg)?;
    fs::create_dir_all(out)?;
    let csv_path = out.join("study.csv");
    let plot_path = out.join("plot.dat");
    write_text(&csv_path, &study.to_csv())?;
    write_text(&plot_path, &study.to_plot_data())?;
    let min_w1 = study.rows.iter().map(|r| r.w1_hat).fold(f64::INFINITY, f64::min);
    match study.fit() {
        Ok(fit) => info!("rate fit: slope {} (r^2 {}, {} points)", fit.slope, fit.r_squared, fit.points),
        Err(e) => info!("rate fit skipped: {e}"),
    }
    if min_w1 >= 0.1 {
        println!("non-vanishing: W1 >= {min_w1:.4} over the whole grid");
    }
    let failures = study.dominance_failures();
    for r in &failures {
        warn!(
            "dominance failure at t = {}: W1 {} (se {}) vs prop1 {} / f {:?}",
            r.t, r.w1_hat, r.se, r.prop1, r.bound_f
        );
    }
    manifest.outputs = vec![csv_path, plot_path, out.join("manifest.json")];
    manifest.finish();
    manifest.write(&out.join("manifest.json"))?;
    print!("{}", study.to_csv());
    Ok(failures.is_empty())
}

fn cmd_counterexamples(out: Option<&Path>, replicates: Option<usize>) -> Result<()> {
    let mut table = Vec::new();
    for (name, text, closed_form) in [
        ("alternating", COUNTEREXAMPLE1, alternating_closed_form as fn(&_, usize) -> f64),
        ("imaginary", COUNTEREXAMPLE2, imaginary_closed_form),
    ] {
        let mut cfg = ExperimentConfig::parse(text)?;
        if let Some(n) = replicates {
            cfg.study.replicates = n;
        }
        let exp = Experiment::prepare(&cfg)?;
        let horizon = 1000;
        let violations = identity_violations(&exp.spec, &exp.process, horizon, 1000, exp.seed(), closed_form);
        println!("{name}: closed form violated at {violations} of {} (replicate, n) pairs", horizon * 1000);
        let study = run_convergence_study(&cfg)?;
        for r in &study.rows {
            table.push(format!("{name},{},{},{},{},{}", r.t, r.w1_hat, r.se, r.sigma2, violations));
        }
    }
    for rho in [0.5, 0.9, 0.99] {
        let mut cfg = ExperimentConfig::parse(COUNTEREXAMPLE1)?;
        cfg.system.ar = vec![-rho];
        cfg.system.edge_override = false;
        let ir = ImpulseResponse::analyze(&cfg.spec()?, 20_000, cfg.study.epsilon, cfg.policy())?;
        let v = sigma2_exact(&ir.g, &cfg.process()?, 20_000)?;
        println!("a = (-{rho}): sigma^2 at t = 20000 is {v} (bounded limit 2/(1+rho) = {})", 2.0 / (1.0 + rho));
    }
    let text = csv("example,t,w1_hat,se,sigma2,identity_violations", table);
    emit(out, &text)
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidExperiment(e.to_string()))?;
    }
    match cli.command {
        Command::Impulse { config, horizon, out } => cmd_impulse(&config, horizon, out.as_deref())?,
        Command::Bound {
            config,
            t,
            case,
            alpha_mode,
            out,
        } => cmd_bound(&config, &t, case.as_deref(), alpha_mode.as_deref(), out.as_deref())?,
        Command::Variance { config, t, out } => cmd_variance(&config, &t, out.as_deref())?,
        Command::Simulate {
            config,
            t,
            replicates,
            out,
        } => cmd_simulate(&config, t, replicates, out.as_deref())?,
        Command::W1 { sample, seed } => cmd_w1(&sample, seed)?,
        Command::Study { config, out } => {
            if !cmd_study(&config, &out)? {
                eprintln!("error: empirical W1 exceeded a bound by more than 3 standard errors");
                return Ok(ExitCode::from(3));
            }
        }
        Command::Counterexamples { out, replicates } => cmd_counterexamples(out.as_deref(), replicates)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
