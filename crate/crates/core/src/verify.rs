//! Certificates evaluated on a computed solution.
//!
//! All checks are pure functions of the stored fields, so re-running them
//! on a deserialized solution reproduces the report bit for bit.

use alloc::vec::Vec;

use libm::{log, pow, sqrt};

use crate::error::{Error, Result};
use crate::functional::Problem;
use crate::grid::{unit_sphere_area, RadialGrid};
use crate::solver::Solution;
use crate::transforms::{Model, ModelSpec};

/// Tolerances used to turn measured quantities into pass/fail flags.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyOptions {
    /// Bound on the scale-normalized maximum PDE residual.
    pub residual_tol: f64,
    pub pohozaev_tol: f64,
    /// Minimum coefficient of determination of the tail fit.
    pub decay_r2: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-3, pohozaev_tol: 1e-3, decay_r2: 0.99 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Residual {
    pub max: f64,
    /// `(∫ res² dx)^{1/2}` over the checked nodes.
    pub l2: f64,
    /// `max |V u| + |l(u)|`, the size of the terms being balanced.
    pub scale: f64,
    pub max_normalized: f64,
    pub l2_normalized: f64,
}

impl Residual {
    fn from_nodes(grid: &RadialGrid, res: &[f64], scale: f64) -> Self {
        let max = res.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let w = grid.weights();
        let l2 = sqrt(res.iter().zip(w).map(|(r, w)| w * r * r).sum::<f64>());
        let div = if scale > 0.0 { scale } else { 1.0 };
        Self { max, l2, scale, max_normalized: max / div, l2_normalized: l2 / div }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinfCheck {
    pub linf_v: f64,
    pub linf_u: f64,
    /// `sqrt(1/(3κ))` (power model) or `1` (saturable model).
    pub threshold: f64,
    pub pass: bool,
    /// `‖u‖∞ / ‖v‖∞`.
    pub ratio: f64,
    /// Nodewise `v ≤ u ≤ c v` with `c = sqrt 6` or `3`.
    pub chain_pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBoundCheck {
    /// `‖v‖²` (power model) or `‖∇v‖₂²` (saturable model).
    pub lhs: f64,
    /// `2q c / (q - 2)` with `c` the path level.
    pub rhs: f64,
    pub pass: bool,
    /// Same bound with the comparison level `d_∞`.
    pub rhs_comparison: Option<f64>,
    pub pass_comparison: Option<bool>,
    pub seminorm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PohozaevCheck {
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoserStep {
    pub index: usize,
    pub beta: f64,
    /// `β 2*`, the exponent on the left.
    pub exponent: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `false` when fewer than 10 nodes carry the `L^p` mass.
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoserCheck {
    pub q1: f64,
    pub sigma: f64,
    pub theta: f64,
    /// Sobolev constant in `‖w‖²_{2*} ≤ S ‖∇w‖²₂`.
    pub sobolev: f64,
    pub steps: Vec<MoserStep>,
    /// `C` in `‖v‖² ≤ C`, from the comparison level.
    pub norm_bound: f64,
    pub c0: f64,
    /// `C₀ κ^{-1/4}`.
    pub linf_bound: f64,
    pub linf_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QualitativeCheck {
    pub nontrivial: bool,
    pub positivity: bool,
    pub monotonicity: bool,
    /// `δ` in `u ~ exp(-δ r)`.
    pub decay_rate: f64,
    pub fit_r2: f64,
    pub decay_pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub converged: bool,
    /// Equation with the truncated `g` and modified nonlinearity, on `u`.
    pub pde_residual: Residual,
    /// Dual equation `-Δv + (V u - l(u)) / g(u)`, on `v`.
    pub transformed_residual: Residual,
    /// Unmodified equation with `κ/2 [Δ|u|²] u`, on `u`.
    pub original_residual: Residual,
    pub linf: LinfCheck,
    pub energy_bound: EnergyBoundCheck,
    pub pohozaev: Option<PohozaevCheck>,
    pub moser: Option<MoserCheck>,
    pub qualitative: Option<QualitativeCheck>,
    /// `C₀` (power model) or `C₁` (saturable model) from the measured levels.
    pub threshold_constant: f64,
    /// `κ₀` or `κ₁` from that constant.
    pub kappa_formula: f64,
    pub options: VerifyOptions,
}

impl VerificationReport {
    /// Names of failed certificates; empty when everything passes.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.converged {
            out.push("converged");
        }
        if self.pde_residual.max_normalized.is_nan() || self.pde_residual.max_normalized > self.options.residual_tol {
            out.push("pde_residual");
        }
        if !self.linf.pass {
            out.push("linf");
        }
        if !self.linf.chain_pass {
            out.push("linf_chain");
        }
        if !self.energy_bound.pass {
            out.push("energy_bound");
        }
        if let Some(p) = &self.pohozaev {
            if !p.pass {
                out.push("pohozaev");
            }
        }
        if let Some(m) = &self.moser {
            if !m.pass {
                out.push("moser_chain");
            }
        }
        if let Some(q) = &self.qualitative {
            if !(q.nontrivial && q.positivity && q.monotonicity) {
                out.push("qualitative");
            }
            if !q.decay_pass {
                out.push("decay");
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// `S` with `‖w‖²_{2*} ≤ S ‖∇w‖²₂` on ℝᴺ (the reciprocal of the sharp
/// constant `N(N-2)/4 |S^N|^{2/N}`).
pub fn sobolev_constant(dim: usize) -> f64 {
    let n = dim as f64;
    let sphere = unit_sphere_area(dim + 1);
    1.0 / (0.25 * n * (n - 2.0) * pow(sphere, 2.0 / n))
}

/// Fourth-order central first and second derivatives at node `i`, with
/// even reflection through the origin. Requires `i + 2 < n`.
fn derivatives(values: &[f64], h: f64, i: usize) -> (f64, f64) {
    let at = |k: isize| values[k.unsigned_abs()];
    let k = i as isize;
    let (m2, m1, c, p1, p2) = (at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2));
    let d1 = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let d2 = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
    (d1, d2)
}

fn laplacian4(grid: &RadialGrid, values: &[f64], i: usize) -> (f64, f64) {
    let n = grid.dim() as f64;
    let (d1, d2) = derivatives(values, grid.spacing(), i);
    let lap = if i == 0 { n * d2 } else { d2 + (n - 1.0) / grid.r()[i] * d1 };
    (d1, lap)
}

/// Residual of `-div(g²(u)∇u) + g(u)g'(u)|∇u|² + V u - l(u)` on the nodes
/// `0..n-2` (the stencil needs two neighbours on each side).
pub fn pde_residual(problem: &Problem, u: &[f64]) -> Result<Residual> {
    let grid = problem.grid();
    grid.check_len(u)?;
    let table = problem.table();
    let pot = problem.potential();
    let m = u.len() - 2;
    let mut res = alloc::vec![0.0; u.len()];
    let mut scale = 0.0_f64;
    for i in 0..m {
        let (d1, lap) = laplacian4(grid, u, i);
        let g = table.g(u[i]);
        let gp = table.g_prime(u[i]);
        let l = table.nonlinearity(u[i]).0;
        res[i] = -g * g * lap - g * gp * d1 * d1 + pot[i] * u[i] - l;
        scale = scale.max((pot[i] * u[i]).abs() + l.abs());
    }
    Ok(Residual::from_nodes(grid, &res, scale))
}

/// Residual of `-Δv + (V u - l(u)) / g(u)` with the same stencil.
pub fn transformed_residual(problem: &Problem, v: &[f64], u: &[f64]) -> Result<Residual> {
    let grid = problem.grid();
    grid.check_len(v)?;
    grid.check_len(u)?;
    let table = problem.table();
    let pot = problem.potential();
    let m = v.len() - 2;
    let mut res = alloc::vec![0.0; v.len()];
    let mut scale = 0.0_f64;
    for i in 0..m {
        let (_, lap) = laplacian4(grid, v, i);
        let g = table.g(u[i]);
        let l = table.nonlinearity(u[i]).0;
        res[i] = -lap + (pot[i] * u[i] - l) / g;
        scale = scale.max(((pot[i] * u[i]).abs() + l.abs()) / g);
    }
    Ok(Residual::from_nodes(grid, &res, scale))
}

/// Residual of the unmodified equation
/// `-Δu + V u + (κ/2)[Δ|u|²] u - l₀(u)`, expanded as
/// `-(1 - κu²)Δu + κ u |∇u|² + V u - l₀(u)`.
pub fn original_residual(problem: &Problem, u: &[f64]) -> Result<Residual> {
    let grid = problem.grid();
    grid.check_len(u)?;
    let table = problem.table();
    let kappa = if problem.spec().reference { 0.0 } else { problem.spec().kappa };
    let pot = problem.potential();
    let m = u.len() - 2;
    let mut res = alloc::vec![0.0; u.len()];
    let mut scale = 0.0_f64;
    for i in 0..m {
        let (d1, lap) = laplacian4(grid, u, i);
        let l = table.original_nonlinearity(u[i]);
        res[i] = -(1.0 - kappa * u[i] * u[i]) * lap + kappa * u[i] * d1 * d1 + pot[i] * u[i] - l;
        scale = scale.max((pot[i] * u[i]).abs() + l.abs());
    }
    Ok(Residual::from_nodes(grid, &res, scale))
}

pub fn check_linf(spec: &ModelSpec, v: &[f64], u: &[f64]) -> LinfCheck {
    let linf_v = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let linf_u = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let (threshold, pass) = match spec.model {
        Model::PowerQ => {
            let t = if spec.reference { f64::INFINITY } else { sqrt(1.0 / (3.0 * spec.kappa)) };
            (t, linf_u < t)
        }
        Model::Saturable => (1.0, linf_u <= 1.0),
    };
    let c = match spec.model {
        Model::PowerQ => sqrt(6.0),
        Model::Saturable => 3.0,
    };
    let slack = 1e-12;
    let chain_pass = v.iter().zip(u).all(|(&a, &b)| {
        let (a, b) = (a.abs(), b.abs());
        b >= a * (1.0 - slack) && b <= c * a * (1.0 + slack) + f64::MIN_POSITIVE
    });
    let ratio = if linf_v > 0.0 { linf_u / linf_v } else { 1.0 };
    LinfCheck { linf_v, linf_u, threshold, pass, ratio, chain_pass }
}

pub fn check_energy_bound(problem: &Problem, sol: &Solution) -> EnergyBoundCheck {
    let q = problem.spec().q;
    let seminorm = problem.spec().model == Model::Saturable;
    let lhs = if seminorm { problem.grid().dirichlet(&sol.v) } else { problem.h1_norm_sq(&sol.v) };
    let factor = 2.0 * q / (q - 2.0);
    let rhs = factor * sol.energy.mp_level;
    let rhs_comparison = sol.energy.comparison_level.map(|d| factor * d);
    EnergyBoundCheck {
        lhs,
        rhs,
        pass: lhs <= rhs,
        rhs_comparison,
        pass_comparison: rhs_comparison.map(|r| lhs <= r),
        seminorm,
    }
}

/// Scale-free residual of
/// `(N-2)/(2N) ∫|∇v|² + (V_∞/2) ∫|u|² - ∫L(u) = 0`.
pub fn pohozaev_residual(problem: &Problem, v: &[f64]) -> Result<f64> {
    if !problem.potential_spec().is_constant() {
        return Err(Error::NonConstantPotential);
    }
    let terms = problem.terms(v)?;
    let n = problem.spec().dim as f64;
    let grad = (n - 2.0) / (2.0 * n) * terms.gradient;
    if grad == 0.0 {
        return Ok(0.0);
    }
    let vinf = problem.potential_spec().v_infty;
    Ok((grad + 0.5 * vinf * terms.plain_mass - terms.nonlinear).abs() / grad)
}

pub fn check_pohozaev(problem: &Problem, v: &[f64], tol: f64) -> Result<PohozaevCheck> {
    let residual = pohozaev_residual(problem, v)?;
    Ok(PohozaevCheck { residual, pass: residual <= tol })
}

/// Exponents of the Moser iteration: `(q₁, σ, θ)`.
pub fn moser_exponents(spec: &ModelSpec) -> (f64, f64, f64) {
    let crit = spec.critical_exponent();
    let q = spec.q;
    let q1 = 1.0 / (1.0 - (q - 2.0) / crit);
    let sigma = crit / (2.0 * q1);
    let theta = (crit - q) / 4.0;
    (q1, sigma, theta)
}

/// `σ^{σ/(σ-1)²} (a S^{q/2} C^{(q-2)/2})^{1/(2(σ-1))} S^{1/2} C^{1/2}`, the
/// limit of the iterated chain with prefactor `a`.
fn chain_constant(spec: &ModelSpec, prefactor: f64, norm_bound: f64) -> f64 {
    let (_, sigma, _) = moser_exponents(spec);
    let s = sobolev_constant(spec.dim);
    let q = spec.q;
    let c = norm_bound;
    pow(sigma, sigma / ((sigma - 1.0) * (sigma - 1.0)))
        * pow(prefactor * pow(s, q / 2.0) * pow(c, (q - 2.0) / 2.0), 1.0 / (2.0 * (sigma - 1.0)))
        * sqrt(s * c)
}

/// `C₀` for the power model given `C ≥ ‖v‖²`.
pub fn c0_constant(spec: &ModelSpec, norm_bound: f64) -> f64 {
    chain_constant(spec, pow(6.0, (spec.q - 1.0) / 2.0), norm_bound)
}

/// `C₁` for the saturable model given `C ≥ ‖∇v‖²₂`.
pub fn c1_constant(spec: &ModelSpec, norm_bound: f64) -> f64 {
    chain_constant(spec, pow(3.0, spec.q) * sqrt(2.0), norm_bound)
}

fn lp_reliable(v: &[f64], p: f64) -> bool {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return true;
    }
    let carried = v.iter().filter(|x| pow(x.abs() / m, p) >= 1e-3).count();
    carried >= 10
}

/// Both sides of
/// `‖v‖_{β2*} ≤ β^{1/β} (6^{(q-1)/2} S κ^{-θ} ‖v‖_{2*}^{q-2})^{1/(2β)} ‖v‖_{2βq₁}`
/// for `β = σ, σ², σ³`, plus `C₀` and `‖v‖∞ ≤ C₀ κ^{-1/4}`.
pub fn check_moser_chain(problem: &Problem, sol: &Solution) -> Result<MoserCheck> {
    let spec = problem.spec();
    if spec.model != Model::PowerQ {
        return Err(Error::WrongModel { expected: Model::PowerQ });
    }
    if spec.reference {
        return Err(Error::Domain { reason: "Moser chain needs kappa > 0".into() });
    }
    let grid = problem.grid();
    let v = &sol.v;
    let q = spec.q;
    let kappa = spec.kappa;
    let crit = spec.critical_exponent();
    let (q1, sigma, theta) = moser_exponents(spec);
    let s = sobolev_constant(spec.dim);
    let base = grid.lp_norm(v, crit);
    let k = pow(6.0, (q - 1.0) / 2.0) * s * pow(kappa, -theta) * pow(base, q - 2.0);
    let mut steps = Vec::with_capacity(3);
    let mut beta = 1.0;
    for index in 1..=3 {
        beta *= sigma;
        let exponent = beta * crit;
        let lhs = grid.lp_norm(v, exponent);
        let rhs = pow(beta, 1.0 / beta) * pow(k, 1.0 / (2.0 * beta)) * grid.lp_norm(v, 2.0 * beta * q1);
        steps.push(MoserStep {
            index,
            beta,
            exponent,
            lhs,
            rhs,
            pass: lhs <= rhs,
            reliable: lp_reliable(v, exponent),
        });
    }
    let level = sol.energy.comparison_level.unwrap_or(sol.energy.mp_level);
    let norm_bound = 2.0 * q * level / (q - 2.0);
    let c0 = c0_constant(spec, norm_bound);
    let linf_bound = c0 * pow(kappa, -0.25);
    let linf_v = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let linf_pass = linf_v <= linf_bound;
    let pass = linf_pass && steps.iter().all(|s| s.pass);
    Ok(MoserCheck { q1, sigma, theta, sobolev: s, steps, norm_bound, c0, linf_bound, linf_pass, pass })
}

/// Positivity and monotonicity of `u`, and a least-squares fit of
/// `log u = a - δ r` over the outer third of `{u ≥ 1e-6 ‖u‖∞}`.
pub fn check_qualitative(grid: &RadialGrid, u: &[f64], min_r2: f64) -> QualitativeCheck {
    let n = u.len();
    let peak = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let nontrivial = peak > 0.0;
    let interior = &u[..n - 1];
    let positivity = nontrivial && interior.iter().all(|&x| x > 0.0);
    let monotonicity = u.windows(2).all(|w| w[1] <= w[0]);
    let cutoff = 1e-6 * peak;
    let end = u.iter().position(|&x| x < cutoff).unwrap_or(n);
    let start = 2 * end / 3;
    let r = grid.r();
    let pts: Vec<(f64, f64)> =
        (start..end).filter(|&i| u[i] > 0.0).map(|i| (r[i], log(u[i]))).collect();
    let (decay_rate, fit_r2) = if nontrivial && pts.len() >= 3 {
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 };
        (-slope, r2)
    } else {
        (0.0, 0.0)
    };
    QualitativeCheck {
        nontrivial,
        positivity,
        monotonicity,
        decay_rate,
        fit_r2,
        decay_pass: decay_rate > 0.0 && fit_r2 >= min_r2,
    }
}

/// `κ₀ = min{6^{2/(q-2*)}, 1/(C₀ sqrt 18)}` (power model) or
/// `κ₁ = min{1/3, (1/(18 C₁²))^{(2*-q)/(2*-q+1)}}` (saturable model).
pub fn kappa_threshold_formula(spec: &ModelSpec, constant: f64) -> f64 {
    let crit = spec.critical_exponent();
    let q = spec.q;
    match spec.model {
        Model::PowerQ => pow(6.0, 2.0 / (q - crit)).min(1.0 / (constant * sqrt(18.0))),
        Model::Saturable => {
            let e = (crit - q) / (crit - q + 1.0);
            (1.0 / 3.0_f64).min(pow(1.0 / (18.0 * constant * constant), e))
        }
    }
}

/// Run every applicable certificate.
pub fn verify(problem: &Problem, sol: &Solution, options: VerifyOptions) -> Result<VerificationReport> {
    let grid = problem.grid();
    grid.check_len(&sol.v)?;
    grid.check_len(&sol.u)?;
    let spec = problem.spec();
    let constant_potential = problem.potential_spec().is_constant();
    let pde = pde_residual(problem, &sol.u)?;
    let transformed = transformed_residual(problem, &sol.v, &sol.u)?;
    let original = original_residual(problem, &sol.u)?;
    let linf = check_linf(spec, &sol.v, &sol.u);
    let energy_bound = check_energy_bound(problem, sol);
    let pohozaev = if constant_potential {
        Some(check_pohozaev(problem, &sol.v, options.pohozaev_tol)?)
    } else {
        None
    };
    let moser = if spec.model == Model::PowerQ && !spec.reference {
        Some(check_moser_chain(problem, sol)?)
    } else {
        None
    };
    let qualitative = if constant_potential {
        Some(check_qualitative(grid, &sol.u, options.decay_r2))
    } else {
        None
    };
    let level = sol.energy.comparison_level.unwrap_or(sol.energy.mp_level);
    let bound = 2.0 * spec.q * level / (spec.q - 2.0);
    let threshold_constant = match spec.model {
        Model::PowerQ => c0_constant(spec, bound),
        Model::Saturable => c1_constant(spec, bound),
    };
    Ok(VerificationReport {
        converged: sol.converged,
        pde_residual: pde,
        transformed_residual: transformed,
        original_residual: original,
        linf,
        energy_bound,
        pohozaev,
        moser,
        qualitative,
        threshold_constant,
        kappa_formula: kappa_threshold_formula(spec, threshold_constant),
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use crate::grid::{Field, PotentialSpec};

    fn problem(spec: ModelSpec, n: usize) -> Problem {
        Problem::new(spec, PotentialSpec::constant(1.0), RadialGrid::new(3, 20.0, n).unwrap()).unwrap()
    }

    #[test]
    fn sobolev_constant_three_dimensions() {
        let sharp = 0.75 * pow(2.0 * PI * PI, 2.0 / 3.0);
        assert!((1.0 / sobolev_constant(3) - sharp).abs() < 1e-12);
        assert!((sharp - 5.4779).abs() < 1e-3);
    }

    #[test]
    fn moser_exponents_for_cubic() {
        let (q1, sigma, theta) = moser_exponents(&ModelSpec::power(0.02, 3.0, 3));
        assert!((q1 - 1.2).abs() < 1e-14);
        assert!((sigma - 2.5).abs() < 1e-14);
        assert!((theta - 0.75).abs() < 1e-14);
    }

    #[test]
    fn kappa_formula_limits() {
        let spec = ModelSpec::power(0.02, 3.0, 3);
        assert!((kappa_threshold_formula(&spec, 1e-9) - pow(6.0, -2.0 / 3.0)).abs() < 1e-15);
        assert!(kappa_threshold_formula(&spec, 1e12) < 1e-12);
        let sat = ModelSpec::saturable(0.05, 2.5, 3);
        for c in [1e-6, 0.1, 1.0, 10.0] {
            assert!(kappa_threshold_formula(&sat, c) <= 1.0 / 3.0);
        }
    }

    #[test]
    fn zero_field_is_clean() {
        let p = problem(ModelSpec::power(0.02, 3.0, 3), 201);
        let z = Field::zeros(p.grid());
        assert_eq!(pde_residual(&p, &z).unwrap().max, 0.0);
        assert_eq!(pohozaev_residual(&p, &z).unwrap(), 0.0);
        let l = check_linf(p.spec(), &z, &z);
        assert!(l.pass && l.chain_pass);
        assert!(!check_qualitative(p.grid(), &z, 0.99).nontrivial);
    }

    #[test]
    fn stencil_is_fourth_order_on_gaussian() {
        let grid = RadialGrid::new(3, 6.0, 601).unwrap();
        let f = Field::from_fn(&grid, |r| libm::exp(-r * r));
        let mut err = 0.0_f64;
        for i in 0..grid.nodes() - 2 {
            let r = grid.r()[i];
            let exact = (4.0 * r * r - 6.0) * libm::exp(-r * r);
            err = err.max((laplacian4(&grid, &f, i).1 - exact).abs());
        }
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn pohozaev_rejects_well() {
        let pot = PotentialSpec::gaussian_well(1.0, 0.5, 1.0);
        let p = Problem::new(ModelSpec::power(0.02, 3.0, 3), pot, RadialGrid::new(3, 20.0, 101).unwrap()).unwrap();
        let z = Field::zeros(p.grid());
        assert_eq!(pohozaev_residual(&p, &z), Err(Error::NonConstantPotential));
    }
}
