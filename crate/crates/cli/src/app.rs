//! Subcommand dispatch.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use quasisol_core::{
    solver::mountain_pass_solve, sweep, verify, Error as CoreError, Model, Problem, Solution,
    SweepResult, TransformTable, VerificationReport,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::io::{self, IoError, Record};

#[derive(Debug, Parser)]
#[command(name = "quasisol", version, about = "Mountain-pass solver and certificate checker for quasilinear Schrodinger solitons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Number of grid nodes.
    #[arg(long = "grid-n", global = true)]
    pub grid_n: Option<usize>,
    /// Truncation radius.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Only warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Compute a ground state and write `profile.csv` and `solution.json`.
    Solve,
    /// Check all certificates, either on a fresh solve or on a previous `solve` output.
    Verify {
        /// Directory holding `profile.csv` and `solution.json` from `solve`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solve and verify over the `[sweep]` κ values.
    Sweep,
    /// Tabulate g, g', G, G⁻¹, f and F.
    Table,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("certificate failed: {0}")]
    Certificate(String),
    #[error("io: {0}")]
    Io(#[from] IoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Certificate(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn solver_err(e: CoreError) -> CliError {
    CliError::Solver(e.to_string())
}

/// Headline numbers kept next to the full report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub passed: bool,
    pub failures: Vec<String>,
    pub j_value: f64,
    pub mp_level: f64,
    pub iterations: usize,
    pub radius: f64,
    pub nodes: usize,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub sweep: SweepResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<sweep::ThresholdSearch>,
}

/// Load the config file (or defaults) and apply command-line overrides.
pub fn resolve_config(args: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| IoError::Fs { path: path.clone(), source })?;
            RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::with_model(Model::PowerQ, 0.01),
    };
    let overridden = args.grid_n.is_some() || args.radius.is_some() || args.kappa.is_some();
    if let Some(n) = args.grid_n {
        cfg.grid.nodes = n;
    }
    if let Some(r) = args.radius {
        cfg.grid.radius = r;
    }
    if let Some(k) = args.kappa {
        cfg.model.kappa = k;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    if overridden {
        cfg.validate().map_err(|(key, msg)| CliError::Config(format!("override {key}: {msg}")))?;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Verify { input: Some(dir) } => {
            if cli.global.config.is_some() {
                warn!("--config is ignored with --input; using the config recorded in {}", io::SOLUTION_FILE);
            }
            let out = cli.global.out.clone().unwrap_or_else(|| dir.clone());
            verify_saved(dir, &out)
        }
        command => {
            let cfg = resolve_config(&cli.global)?;
            match command {
                Command::Solve => solve(&cfg).map(|_| ()),
                Command::Verify { .. } => {
                    let sol = solve(&cfg)?;
                    verify_solution(&cfg, &sol, &cfg.output.dir)
                }
                Command::Sweep => run_sweep(&cfg),
                Command::Table => table(&cfg),
            }
        }
    }
}

fn solve(cfg: &RunConfig) -> Result<Solution, CliError> {
    let dir = &cfg.output.dir;
    io::ensure_dir(dir)?;
    let start = Instant::now();
    let sol = mountain_pass_solve(&cfg.solver_config()).map_err(solver_err)?;
    info!(
        "solved in {:.2} s: J = {:.8}, |u|_inf = {:.6}, {} iterations, R = {}",
        start.elapsed().as_secs_f64(),
        sol.energy.j_value,
        sol.u.max_abs(),
        sol.iterations,
        sol.radius
    );
    let grid = sol.grid(cfg.model.dim).map_err(solver_err)?;
    io::write_profile(&dir.join(io::PROFILE_FILE), &grid, &sol.v, &sol.u)?;
    io::write_json(&dir.join(io::SOLUTION_FILE), &Record::new("solve", cfg, &sol))?;
    if !sol.converged {
        return Err(CliError::Solver(format!(
            "descent did not reach tolerance in {} iterations (grad norm {:.3e})",
            sol.iterations, sol.energy.grad_norm
        )));
    }
    Ok(sol)
}

fn verify_saved(dir: &Path, out: &Path) -> Result<(), CliError> {
    let record: Record<Solution> = io::read_json(&dir.join(io::SOLUTION_FILE))?;
    let profile = io::read_profile(&dir.join(io::PROFILE_FILE))?;
    let mut sol = record.result;
    if profile.grid.nodes() != sol.nodes || profile.grid.radius() != sol.radius {
        return Err(IoError::Format {
            path: dir.join(io::PROFILE_FILE),
            message: format!(
                "grid (R = {}, n = {}) does not match {} (R = {}, n = {})",
                profile.grid.radius(),
                profile.grid.nodes(),
                io::SOLUTION_FILE,
                sol.radius,
                sol.nodes
            ),
        }
        .into());
    }
    sol.v = profile.v;
    sol.u = profile.u;
    let mut cfg = record.config;
    cfg.output.dir = out.to_path_buf();
    verify_solution(&cfg, &sol, out)
}

fn verify_solution(cfg: &RunConfig, sol: &Solution, dir: &Path) -> Result<(), CliError> {
    io::ensure_dir(dir)?;
    let problem: Problem = cfg.solver_config().problem(sol.radius).map_err(solver_err)?;
    let report = verify::verify(&problem, sol, cfg.verify_options()).map_err(solver_err)?;
    let failures: Vec<String> = report.failures().into_iter().map(String::from).collect();
    let output = VerifyOutput {
        passed: failures.is_empty(),
        failures: failures.clone(),
        j_value: sol.energy.j_value,
        mp_level: sol.energy.mp_level,
        iterations: sol.iterations,
        radius: sol.radius,
        nodes: sol.nodes,
        report,
    };
    io::write_json(&dir.join(io::REPORT_FILE), &Record::new("verify", cfg, &output))?;
    info!(
        "residual {:.3e} (normalized), |u|_inf = {:.6} vs {:.6}",
        output.report.pde_residual.max_normalized, output.report.linf.linf_u, output.report.linf.threshold
    );
    if failures.is_empty() {
        info!("all certificates passed");
        Ok(())
    } else {
        Err(CliError::Certificate(failures.join(", ")))
    }
}

fn run_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let section = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] section".into()))?;
    let dir = &cfg.output.dir;
    io::ensure_dir(dir)?;
    let base = cfg.solver_config();
    let kappas = section.values();
    let start = Instant::now();
    let result = sweep::kappa_sweep(&base, &kappas, cfg.verify_options()).map_err(solver_err)?;
    info!("sweep of {} values took {:.2} s", kappas.len(), start.elapsed().as_secs_f64());

    let mut threshold = None;
    if let Some(tol) = section.threshold_tol {
        let pass = result.entries.iter().rposition(|e| e.all_pass);
        if let Some(i) = pass.filter(|&i| i + 1 < result.entries.len()) {
            let (lo, hi) = (result.entries[i].kappa, result.entries[i + 1].kappa);
            threshold =
                Some(sweep::find_threshold(&base, lo, hi, tol, cfg.verify_options()).map_err(solver_err)?);
        } else {
            warn!("no pass/fail transition in the sweep; skipping threshold refinement");
        }
    }
    io::write_sweep_csv(&dir.join(io::SWEEP_CSV), &result)?;
    let output = SweepOutput { sweep: result, threshold };
    io::write_json(&dir.join(io::SWEEP_FILE), &Record::new("sweep", cfg, &output))?;

    let result = &output.sweep;
    info!(
        "empirical threshold {:?}, formula threshold {:?}",
        result.empirical_threshold, result.formula_threshold
    );
    if result.entries.iter().all(|e| e.error.is_some()) {
        return Err(CliError::Solver("every sweep point failed to solve".into()));
    }
    if result.empirical_threshold.is_none() {
        return Err(CliError::Certificate("no kappa passed every certificate".into()));
    }
    if result.anomaly {
        return Err(CliError::Certificate("formula threshold exceeds the empirical threshold".into()));
    }
    Ok(())
}

fn table(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.output.dir;
    io::ensure_dir(dir)?;
    let table = TransformTable::new(cfg.model_spec()).map_err(|e| CliError::Config(e.to_string()))?;
    let n = cfg.table.points;
    let rows = (0..n)
        .map(|i| table.row(cfg.table.t_max * i as f64 / (n - 1) as f64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(solver_err)?;
    io::write_table(&dir.join(io::TABLE_FILE), &rows)?;
    info!("wrote {} rows to {}", rows.len(), dir.join(io::TABLE_FILE).display());
    Ok(())
}
