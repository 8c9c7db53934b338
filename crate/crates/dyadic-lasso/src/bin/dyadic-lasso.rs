//! Batch front-end: parse a run configuration, dispatch one experiment,
//! write CSV reports and a replayable manifest.

// validation guards use `!(x > 0.0)` on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};

use dyadic_lasso::config::RunConfig;
use dyadic_lasso::dictionaries::{
    enumerate_heaviside, make_fourier_grid, make_gaussian_design, make_haar_grid,
    make_orthonormal_sequence, Dictionary,
};
use dyadic_lasso::error::{Error, Result};
use dyadic_lasso::geometry::{Design, SampleVector};
use dyadic_lasso::harness::{
    delta_m_check, lemma_identity_checks, mc_risk, minimax_hypercube_experiment,
    oracle_ratio_experiment, packing_check, rates_experiment, selected_oracle_experiment,
    Estimator, Model,
};
use dyadic_lasso::report::{write_manifest, Cell, CsvReport};
use dyadic_lasso::rng::RandomStream;
use dyadic_lasso::selection::lambda_nn;
use dyadic_lasso::solver::DEFAULT_TOL;
use dyadic_lasso::spaces::{
    make_custom_target, make_power_law_target, make_sparse_target, TargetSpec,
};

const EXIT_CODES: &str = "Exit codes:\n  \
    0  success\n  \
    1  I/O or serialization failure\n  \
    2  invalid configuration, parameter, or regime violation\n  \
    3  unknown experiment name\n  \
    4  solver failure (non-convergence, level or replication failure)";

#[derive(Parser)]
#[command(
    name = "dyadic-lasso",
    version,
    about = "L1-penalized least squares with dyadic level selection: batch experiments",
    after_help = EXIT_CODES
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a config file; writes CSVs and manifest.json
    Run {
        /// Flat `section.key = value` configuration file
        config: PathBuf,
        /// Output directory (created if missing)
        out_dir: PathBuf,
        /// Override experiment.seed
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for replications (default: all cores)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiment names and the result each one verifies
    ListExperiments,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::ListExperiments => {
            print!("{}", list_experiments());
            0
        }
        Command::Run {
            config,
            out_dir,
            seed,
            threads,
        } => match run(&config, &out_dir, seed, threads) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    };
    std::process::exit(code);
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnknownExperiment(_) => 3,
        Error::NonConvergence { .. }
        | Error::SolverAtLevel { .. }
        | Error::Replication { .. }
        | Error::GridWidening { .. } => 4,
        Error::Io(_) | Error::Serialize(_) => 1,
        _ => 2,
    }
}

fn list_experiments() -> String {
    [
        ("fit", "Monte Carlo risk of the Lasso at a fixed truncation level (Theorem 3.1)"),
        ("select", "Monte Carlo risk of the selected Lasso over dyadic levels (Theorem 4.1)"),
        ("oracle-ratio", "Lasso risk over the deterministic oracle value (Theorem 3.1; Theorem 6.1 with the Heaviside dictionary)"),
        ("selected-oracle", "selected-Lasso risk over the level-minimized oracle value (Theorem 4.1)"),
        ("rates", "convergence-rate slope on power-law targets (Proposition 5.6)"),
        ("delta-m", "supremum of the isonormal process on the l1 ball vs its bound (Theorem 3.1 proof)"),
        ("lemma-checks", "truncation inequality and identity (Lemmas 8.2 and 8.3)"),
        ("packing", "Heaviside dictionary packing vs the covering bound (Lemma 8.1)"),
        ("minimax-hypercube", "selected-Lasso risk on least-favorable hypercubes (Proposition 5.8)"),
    ]
    .iter()
    .map(|(name, desc)| format!("{name:<18}{desc}\n"))
    .collect()
}

fn run(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    threads: Option<usize>,
) -> Result<()> {
    let text = std::fs::read_to_string(config_path)?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = seed_override {
        cfg.set("experiment.seed", seed.to_string());
    }
    let seed = cfg.opt_u64("experiment.seed", 0)?;
    cfg.set("experiment.seed", seed.to_string());

    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let outputs = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(|| dispatch(&cfg, seed)),
        None => dispatch(&cfg, seed),
    }?;

    let mut names = Vec::new();
    for (file, csv) in &outputs {
        csv.write(&out_dir.join(file))?;
        names.push(file.clone());
    }
    write_manifest(
        &out_dir.join("manifest.json"),
        &cfg,
        seed,
        started.elapsed(),
        &names,
    )?;
    Ok(())
}

fn dispatch(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    match cfg.get_str("experiment.name")? {
        "fit" => run_fit(cfg, seed, false),
        "select" => run_fit(cfg, seed, true),
        "oracle-ratio" => run_oracle_ratio(cfg, seed),
        "selected-oracle" => run_selected_oracle(cfg, seed),
        "rates" => run_rates(cfg, seed),
        "delta-m" => run_delta_m(cfg, seed),
        "lemma-checks" => run_lemma_checks(cfg, seed),
        "packing" => run_packing(cfg, seed),
        "minimax-hypercube" => run_minimax(cfg, seed),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn build_target(cfg: &RunConfig) -> Result<TargetSpec> {
    let q = cfg.opt_f64("target.q", 1.5)?;
    let r = cfg.opt_f64("target.r", 0.1)?;
    let radius = cfg.opt_f64("target.R", 1.0)?;
    let length = cfg.opt_usize("target.length", 256)?;
    match cfg.opt_str("target.kind").unwrap_or("power-law") {
        "power-law" => make_power_law_target(q, r, radius, length),
        "sparse" => {
            let k = cfg.get_usize("target.k")?;
            let value = cfg.get_f64("target.value")?;
            make_sparse_target(q, r, k, value, length)
        }
        "zero" => make_custom_target(q, r, vec![0.0; length]),
        "custom" => make_custom_target(q, r, cfg.get_f64_list("target.coefficients")?),
        "step" => Err(Error::Config(
            "target.kind = step requires model.kind = regression".into(),
        )),
        other => Err(Error::Config(format!(
            "unknown target.kind `{other}` (expected power-law, sparse, zero, custom, or step)"
        ))),
    }
}

struct ResolvedModel {
    model: Model,
    eps: f64,
    /// Largest usable truncation level.
    p_cap: usize,
}

fn build_design(cfg: &RunConfig, seed: u64) -> Result<Design> {
    let n = cfg.get_usize("model.n")?;
    match cfg.opt_str("model.design").unwrap_or("grid") {
        "grid" => Design::grid_1d(n),
        "uniform-random" => {
            let d = cfg.opt_usize("model.d", 1)?;
            let mut rng = RandomStream::derive(seed, u64::MAX - 1);
            Design::uniform_random(n, d, &mut rng)
        }
        other => Err(Error::Config(format!(
            "unknown model.design `{other}` (expected grid or uniform-random)"
        ))),
    }
}

fn build_dictionary(cfg: &RunConfig, design: &Design, seed: u64) -> Result<Dictionary> {
    let n = design.n();
    match cfg.get_str("dictionary.family")? {
        "haar" => make_haar_grid(n),
        "fourier" => make_fourier_grid(n, cfg.opt_usize("dictionary.p_max", n)?),
        "gaussian" => {
            let p = cfg.opt_usize("dictionary.p_max", n)?;
            let mut rng = RandomStream::derive(seed, u64::MAX - 2);
            make_gaussian_design(n, p, &mut rng)
        }
        "heaviside" => enumerate_heaviside(design),
        "orthonormal" => Err(Error::Config(
            "dictionary.family = orthonormal belongs to model.kind = sequence".into(),
        )),
        other => Err(Error::Config(format!(
            "unknown dictionary.family `{other}` (expected haar, fourier, gaussian, or heaviside)"
        ))),
    }
}

fn step_target_on_design(cfg: &RunConfig, design: &Design) -> SampleVector {
    let at = cfg.opt_f64("target.threshold", 0.5).unwrap_or(0.5);
    SampleVector::new(
        design
            .points()
            .iter()
            .map(|x| if x[0] > at { 1.0 } else { 0.0 })
            .collect(),
    )
}

fn resolve_model(cfg: &RunConfig, target: &TargetSpec, seed: u64) -> Result<ResolvedModel> {
    match cfg.opt_str("model.kind").unwrap_or("sequence") {
        "sequence" => {
            let eps = cfg.get_f64("model.eps")?;
            let p_cap = cfg.opt_usize("dictionary.p_max", target.coefficients.len())?;
            Ok(ResolvedModel {
                model: Model::Sequence,
                eps,
                p_cap,
            })
        }
        "regression" => {
            let design = build_design(cfg, seed)?;
            let sigma = cfg.get_f64("model.sigma")?;
            if !(sigma > 0.0) {
                return Err(Error::Config(format!(
                    "model.sigma must be > 0, got {sigma}"
                )));
            }
            let n = design.n();
            let eps = sigma / (n as f64).sqrt();
            let dictionary = build_dictionary(cfg, &design, seed)?;
            let p_cap = cfg
                .opt_usize("dictionary.p_max", dictionary.len())?
                .min(dictionary.len());
            let f_on_design = if cfg.opt_str("target.kind") == Some("step") {
                step_target_on_design(cfg, dictionary.design())
            } else {
                let mut coeffs = target.coefficients.clone();
                coeffs.resize(dictionary.len(), 0.0);
                dictionary.combine(&coeffs)?
            };
            let lambda_override = match cfg.opt_str("solver.lambda_rule") {
                Some("nn") => Some(lambda_nn(n, design.dim(), sigma)?),
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unknown solver.lambda_rule `{other}` (expected nn)"
                    )))
                }
                None => match cfg.opt_str("solver.lambda") {
                    Some(_) => Some(cfg.get_f64("solver.lambda")?),
                    None => None,
                },
            };
            Ok(ResolvedModel {
                model: Model::Design {
                    dictionary: Arc::new(dictionary),
                    f_on_design,
                    lambda_override,
                },
                eps,
                p_cap,
            })
        }
        other => Err(Error::Config(format!(
            "unknown model.kind `{other}` (expected sequence or regression)"
        ))),
    }
}

fn run_fit(cfg: &RunConfig, seed: u64, selected: bool) -> Result<Vec<(String, CsvReport)>> {
    let target = if cfg.opt_str("target.kind") == Some("step") {
        make_custom_target(
            cfg.opt_f64("target.q", 1.5)?,
            cfg.opt_f64("target.r", 0.1)?,
            Vec::new(),
        )?
    } else {
        build_target(cfg)?
    };
    let resolved = resolve_model(cfg, &target, seed)?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 200)?;
    let tol = cfg.opt_f64("solver.tol", DEFAULT_TOL)?;
    let estimator = if selected {
        Estimator::Selected {
            p_max: resolved.p_cap,
        }
    } else {
        Estimator::Lasso { p: resolved.p_cap }
    };
    let s = mc_risk(
        estimator,
        &resolved.model,
        &target,
        resolved.eps,
        n_rep,
        seed,
        tol,
    )?;
    if selected {
        let mut csv = CsvReport::new(vec![
            "p_max",
            "eps",
            "risk_mean",
            "risk_stderr",
            "numerator_mean",
            "numerator_stderr",
            "l1_mean",
            "support_mean",
            "p_hat_median",
        ]);
        csv.push(vec![
            Cell::Int(resolved.p_cap as i64),
            Cell::Float(resolved.eps),
            Cell::Float(s.mean_risk),
            Cell::Float(s.stderr_risk),
            Cell::Float(s.mean_numerator),
            Cell::Float(s.stderr_numerator),
            Cell::Float(s.mean_l1),
            Cell::Float(s.mean_support),
            Cell::Float(s.p_hat_median().unwrap_or(f64::NAN)),
        ]);
        Ok(vec![("select.csv".into(), csv)])
    } else {
        let mut csv = CsvReport::new(vec![
            "p",
            "eps",
            "risk_mean",
            "risk_stderr",
            "numerator_mean",
            "numerator_stderr",
            "l1_mean",
            "support_mean",
        ]);
        csv.push(vec![
            Cell::Int(resolved.p_cap as i64),
            Cell::Float(resolved.eps),
            Cell::Float(s.mean_risk),
            Cell::Float(s.stderr_risk),
            Cell::Float(s.mean_numerator),
            Cell::Float(s.stderr_numerator),
            Cell::Float(s.mean_l1),
            Cell::Float(s.mean_support),
        ]);
        Ok(vec![("fit.csv".into(), csv)])
    }
}

fn run_oracle_ratio(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let target = build_target(cfg).or_else(|_| {
        make_custom_target(
            cfg.opt_f64("target.q", 1.5)?,
            cfg.opt_f64("target.r", 0.1)?,
            Vec::new(),
        )
    })?;
    let resolved = resolve_model(cfg, &target, seed)?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 200)?;
    let tol = cfg.opt_f64("solver.tol", DEFAULT_TOL)?;
    let row = oracle_ratio_experiment(
        &resolved.model,
        &target,
        resolved.p_cap,
        resolved.eps,
        n_rep,
        seed,
        tol,
    )?;
    let mut csv = CsvReport::new(vec![
        "p",
        "eps",
        "numerator",
        "numerator_stderr",
        "denominator",
        "ratio",
        "ratio_stderr",
    ]);
    csv.push(vec![
        Cell::Int(row.p as i64),
        Cell::Float(row.eps),
        Cell::Float(row.numerator),
        Cell::Float(row.numerator_stderr),
        Cell::Float(row.denominator),
        Cell::Float(row.ratio),
        Cell::Float(row.ratio_stderr),
    ]);
    Ok(vec![("oracle-ratio.csv".into(), csv)])
}

fn run_selected_oracle(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let target = build_target(cfg)?;
    let resolved = resolve_model(cfg, &target, seed)?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 200)?;
    let tol = cfg.opt_f64("solver.tol", DEFAULT_TOL)?;
    let report = selected_oracle_experiment(
        &resolved.model,
        &target,
        resolved.p_cap,
        resolved.eps,
        n_rep,
        seed,
        tol,
    )?;
    let mut csv = CsvReport::new(vec![
        "p_max",
        "eps",
        "numerator",
        "numerator_stderr",
        "denominator",
        "ratio",
        "ratio_stderr",
        "p_hat_median",
    ]);
    csv.push(vec![
        Cell::Int(resolved.p_cap as i64),
        Cell::Float(resolved.eps),
        Cell::Float(report.numerator),
        Cell::Float(report.numerator_stderr),
        Cell::Float(report.denominator),
        Cell::Float(report.ratio),
        Cell::Float(report.ratio_stderr),
        Cell::Float(report.p_hat_median),
    ]);
    let mut levels = CsvReport::new(vec!["p", "det_lasso", "pen"]);
    for row in &report.levels {
        levels.push(vec![
            Cell::Int(row.p as i64),
            Cell::Float(row.det_lasso),
            Cell::Float(row.pen),
        ]);
    }
    Ok(vec![
        ("selected-oracle.csv".into(), csv),
        ("selected-oracle-levels.csv".into(), levels),
    ])
}

fn run_rates(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let target = build_target(cfg)?;
    let eps_grid = cfg.get_f64_list("experiment.eps_grid")?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 200)?;
    let report = rates_experiment(&target, &eps_grid, n_rep, seed)?;
    let mut csv = CsvReport::new(vec![
        "eps",
        "risk_mean",
        "risk_stderr",
        "p_hat_median",
        "slope",
        "slope_stderr",
    ]);
    for row in &report.rows {
        csv.push(vec![
            Cell::Float(row.eps),
            Cell::Float(row.risk_mean),
            Cell::Float(row.risk_stderr),
            Cell::Float(row.p_hat_median),
            Cell::Float(report.slope),
            Cell::Float(report.slope_stderr),
        ]);
    }
    Ok(vec![("rates.csv".into(), csv)])
}

fn run_delta_m(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let eps = cfg.opt_f64("model.eps", 1.0)?;
    let m = cfg.opt_usize("experiment.m", 1)?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 100_000)?;
    let dictionary = match cfg.opt_str("model.kind").unwrap_or("sequence") {
        "sequence" => make_orthonormal_sequence(cfg.opt_usize("dictionary.p_max", 16)?)?,
        "regression" => {
            let design = build_design(cfg, seed)?;
            build_dictionary(cfg, &design, seed)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown model.kind `{other}` (expected sequence or regression)"
            )))
        }
    };
    let check = delta_m_check(&dictionary, m, eps, n_rep, seed)?;
    let mut csv = CsvReport::new(vec![
        "p",
        "m",
        "eps",
        "mc_estimate",
        "stderr",
        "bound",
        "pass",
    ]);
    csv.push(vec![
        Cell::Int(dictionary.len() as i64),
        Cell::Int(m as i64),
        Cell::Float(eps),
        Cell::Float(check.mc_estimate),
        Cell::Float(check.stderr),
        Cell::Float(check.bound),
        Cell::Bool(check.pass),
    ]);
    Ok(vec![("delta-m.csv".into(), csv)])
}

fn run_lemma_checks(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let n_cases = cfg.opt_usize("experiment.n_cases", 1000)?;
    let length = cfg.opt_usize("experiment.length", 10)?;
    let mut csv = CsvReport::new(vec![
        "case",
        "gamma",
        "lemma82_lhs",
        "lemma82_rhs",
        "lemma83_lhs",
        "lemma83_rhs",
        "pass",
    ]);
    for case in 0..n_cases {
        let mut rng = RandomStream::derive(seed, case as u64);
        let a = rng.normal_vec(length);
        let gamma = rng.uniform() * 2.0 + 1e-9;
        let c = lemma_identity_checks(&a, gamma)?;
        csv.push(vec![
            Cell::Int(case as i64),
            Cell::Float(gamma),
            Cell::Float(c.lemma82_lhs),
            Cell::Float(c.lemma82_rhs),
            Cell::Float(c.lemma83_lhs),
            Cell::Float(c.lemma83_rhs),
            Cell::Bool(c.pass(1e-12)),
        ]);
    }
    Ok(vec![("lemma-checks.csv".into(), csv)])
}

fn run_packing(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let design = build_design(cfg, seed)?;
    let t_grid = cfg.get_f64_list("experiment.t_grid")?;
    let rows = packing_check(&design, &t_grid)?;
    let mut csv = CsvReport::new(vec!["t", "greedy_count", "bound", "pass"]);
    for row in rows {
        csv.push(vec![
            Cell::Float(row.t),
            Cell::Int(row.greedy_count as i64),
            Cell::Float(row.bound),
            Cell::Bool(row.pass),
        ]);
    }
    Ok(vec![("packing.csv".into(), csv)])
}

fn run_minimax(cfg: &RunConfig, seed: u64) -> Result<Vec<(String, CsvReport)>> {
    let q = cfg.opt_f64("target.q", 1.5)?;
    let r = cfg.opt_f64("target.r", 0.1)?;
    let radius = cfg.opt_f64("target.R", 1.0)?;
    let eps = cfg.get_f64("model.eps")?;
    let n_targets = cfg.opt_usize("experiment.n_targets", 5)?;
    let n_rep = cfg.opt_usize("experiment.n_rep", 200)?;
    let report = minimax_hypercube_experiment(q, r, radius, eps, n_targets, n_rep, seed)?;
    let mut csv = CsvReport::new(vec![
        "target",
        "p",
        "d",
        "m_value",
        "risk_mean",
        "risk_stderr",
        "ratio",
        "ratio_stderr",
    ]);
    for row in &report.rows {
        csv.push(vec![
            Cell::Int(row.target_index as i64),
            Cell::Int(row.p as i64),
            Cell::Int(row.d as i64),
            Cell::Float(row.m_value),
            Cell::Float(row.risk_mean),
            Cell::Float(row.risk_stderr),
            Cell::Float(report.ratio),
            Cell::Float(report.ratio_stderr),
        ]);
    }
    Ok(vec![("minimax-hypercube.csv".into(), csv)])
}
