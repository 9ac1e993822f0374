//! Parameter studies in κ.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use log::{info, warn};

use crate::error::{Error, Result};
use crate::grid::{Field, RadialGrid};
use crate::solver::{mountain_pass_solve_from, Solution, SolverConfig};
use crate::verify::{self, VerificationReport, VerifyOptions};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepEntry {
    pub kappa: f64,
    pub converged: bool,
    pub linf_u: Option<f64>,
    /// `sqrt(1/(3κ))` or `1`.
    pub threshold: Option<f64>,
    pub linf_pass: bool,
    /// Every certificate passed.
    pub all_pass: bool,
    pub j_value: Option<f64>,
    pub mp_level: Option<f64>,
    /// `C₀` or `C₁` measured on this solution.
    pub threshold_constant: Option<f64>,
    /// Names of failed certificates.
    pub failures: Vec<String>,
    /// Solver or configuration error, if the solve did not complete.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    /// Largest tested κ with all certificates passing.
    pub empirical_threshold: Option<f64>,
    /// `κ₀` / `κ₁` from the largest measured constant.
    pub formula_threshold: Option<f64>,
    /// `formula_threshold > empirical_threshold`.
    pub anomaly: bool,
}

/// Solve and verify at one κ, optionally warm-started.
pub fn evaluate(
    base: &SolverConfig,
    kappa: f64,
    seed: Option<(&RadialGrid, &[f64])>,
    options: VerifyOptions,
) -> Result<(Solution, VerificationReport)> {
    let mut config = *base;
    config.model.kappa = kappa;
    config.model.reference = false;
    config.validate()?;
    let sol = mountain_pass_solve_from(&config, seed)?;
    let problem = config.problem(sol.radius)?;
    let report = verify::verify(&problem, &sol, options)?;
    Ok((sol, report))
}

fn failed_entry(kappa: f64, err: &Error) -> SweepEntry {
    SweepEntry {
        kappa,
        converged: false,
        linf_u: None,
        threshold: None,
        linf_pass: false,
        all_pass: false,
        j_value: None,
        mp_level: None,
        threshold_constant: None,
        failures: Vec::new(),
        error: Some(err.to_string()),
    }
}

fn check_kappas(kappas: &[f64]) -> Result<()> {
    if kappas.is_empty() {
        return Err(Error::InvalidSolver { reason: "empty kappa list".into() });
    }
    if kappas.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::InvalidSolver { reason: "kappa values must be positive".into() });
    }
    if kappas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSolver { reason: "kappa values must be strictly increasing".into() });
    }
    Ok(())
}

/// Sequential sweep; each κ is warm-started from the previous converged profile.
pub fn kappa_sweep(base: &SolverConfig, kappas: &[f64], options: VerifyOptions) -> Result<SweepResult> {
    check_kappas(kappas)?;
    let mut entries = Vec::with_capacity(kappas.len());
    let mut seed: Option<(RadialGrid, Field)> = None;
    for &kappa in kappas {
        let warm = seed.as_ref().map(|(g, v)| (g, v.values()));
        match evaluate(base, kappa, warm, options) {
            Ok((sol, report)) => {
                info!("kappa {kappa:.4e}: |u|_inf = {:.6}, failures {:?}", report.linf.linf_u, report.failures());
                if sol.converged {
                    seed = Some((sol.grid(base.model.dim)?, sol.v.clone()));
                }
                entries.push(SweepEntry {
                    kappa,
                    converged: sol.converged,
                    linf_u: Some(report.linf.linf_u),
                    threshold: Some(report.linf.threshold),
                    linf_pass: report.linf.pass,
                    all_pass: report.passed(),
                    j_value: Some(sol.energy.j_value),
                    mp_level: Some(sol.energy.mp_level),
                    threshold_constant: Some(report.threshold_constant),
                    failures: report.failures().into_iter().map(String::from).collect(),
                    error: None,
                });
            }
            Err(err) => {
                warn!("kappa {kappa:.4e}: {err}");
                entries.push(failed_entry(kappa, &err));
            }
        }
    }
    let empirical_threshold =
        entries.iter().filter(|e| e.all_pass).map(|e| e.kappa).fold(None, |m: Option<f64>, k| {
            Some(m.map_or(k, |m| m.max(k)))
        });
    let constant = entries
        .iter()
        .filter_map(|e| e.threshold_constant)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    let formula_threshold = constant.map(|c| verify::kappa_threshold_formula(&base.model, c));
    let anomaly = match (formula_threshold, empirical_threshold) {
        (Some(f), Some(e)) => f > e,
        _ => false,
    };
    Ok(SweepResult { entries, empirical_threshold, formula_threshold, anomaly })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdSearch {
    /// Midpoint of the final bracket.
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// `false` when the endpoints did not pass / fail as required.
    pub monotone: bool,
    pub evaluations: usize,
    pub warning: Option<String>,
}

/// Bisection on the "all certificates pass" predicate.
pub fn find_threshold(
    base: &SolverConfig,
    lo: f64,
    hi: f64,
    tol: f64,
    options: VerifyOptions,
) -> Result<ThresholdSearch> {
    if !(lo > 0.0 && hi >= lo && tol > 0.0) {
        return Err(Error::InvalidSolver { reason: format!("bad bracket [{lo}, {hi}] / tol {tol}") });
    }
    if lo == hi {
        return Ok(ThresholdSearch { value: lo, lo, hi, monotone: true, evaluations: 0, warning: None });
    }
    let mut evaluations = 0usize;
    let mut seed: Option<(RadialGrid, Field)> = None;
    let mut passes = |kappa: f64, seed: &mut Option<(RadialGrid, Field)>| -> Result<bool> {
        evaluations += 1;
        let warm = seed.as_ref().map(|(g, v)| (g, v.values()));
        Ok(match evaluate(base, kappa, warm, options) {
            Ok((sol, report)) => {
                if report.passed() {
                    *seed = Some((sol.grid(base.model.dim)?, sol.v));
                }
                report.passed()
            }
            Err(_) => false,
        })
    };
    let pass_lo = passes(lo, &mut seed)?;
    let pass_hi = passes(hi, &mut seed)?;
    if !pass_lo || pass_hi {
        let warning = format!("predicate not monotone across [{lo}, {hi}]: pass(lo) = {pass_lo}, pass(hi) = {pass_hi}");
        warn!("{warning}");
        return Ok(ThresholdSearch {
            value: 0.5 * (lo + hi),
            lo,
            hi,
            monotone: false,
            evaluations: 2,
            warning: Some(warning),
        });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if passes(mid, &mut seed)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(ThresholdSearch { value: 0.5 * (a + b), lo: a, hi: b, monotone: true, evaluations, warning: None })
}

/// `n` log-spaced values covering `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    let mut out: Vec<f64> = (0..n).map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    out[0] = lo;
    out[n - 1] = hi;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PotentialSpec;
    use crate::transforms::ModelSpec;

    fn base() -> SolverConfig {
        let mut c = SolverConfig::new(ModelSpec::power(0.01, 3.0, 3), PotentialSpec::constant(1.0));
        c.grid.nodes = 401;
        c.grid.adaptive = false;
        c
    }

    #[test]
    fn rejects_unsorted_kappas() {
        assert!(kappa_sweep(&base(), &[0.02, 0.01], VerifyOptions::default()).is_err());
        assert!(kappa_sweep(&base(), &[], VerifyOptions::default()).is_err());
    }

    #[test]
    fn degenerate_bracket() {
        let t = find_threshold(&base(), 0.01, 0.01, 1e-3, VerifyOptions::default()).unwrap();
        assert_eq!(t.value, 0.01);
        assert_eq!(t.evaluations, 0);
    }

    #[test]
    fn log_spacing_endpoints() {
        let k = log_spaced(1e-3, 0.3, 7);
        assert_eq!((k[0], k[6]), (1e-3, 0.3));
        assert!(k.windows(2).all(|w| w[1] > w[0]));
    }
}
