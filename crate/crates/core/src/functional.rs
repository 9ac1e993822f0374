//! Discrete energy functionals and their gradients.
//!
//! With `u = G⁻¹(v)` the dual functional is
//!
//! ```text
//! J(v) = ½∫|∇v|² + ½∫V |u|² - ∫L(u)
//! ```
//!
//! where `L(t) = |t|^q / q` (power model) or the primitive `F` of the
//! modified saturable nonlinearity. The discrete energy is built so that its
//! exact derivative, divided by the quadrature weights, is the collocated
//! strong form `-Δv + (V u - l(u)) / g(u)`.

use alloc::vec::Vec;

use libm::{pow, sqrt};

use crate::error::{Error, Result};
use crate::grid::{Field, PotentialSpec, RadialGrid};
use crate::linalg;
use crate::transforms::{Model, ModelSpec, TransformTable};

/// Energy summary attached to a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyReport {
    /// `J_κ(v)` (or `J̃_κ(v)` for the saturable model).
    pub j_value: f64,
    /// `I_κ(u)` evaluated directly on `u`.
    pub i_value: f64,
    /// Dual H¹ norm of `J'(v)`.
    pub grad_norm: f64,
    /// Path-maximum estimate of the mountain-pass level.
    pub mp_level: f64,
    /// Ray-maximum estimate of the comparison level `d_∞` of `P_∞` / `Q_∞`.
    pub comparison_level: Option<f64>,
    pub descent_tol: f64,
}

/// The separate integrals that make up `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// `∫|∇v|²`
    pub gradient: f64,
    /// `∫V |u|²`
    pub mass: f64,
    /// `∫|u|²`
    pub plain_mass: f64,
    /// `∫L(u)`
    pub nonlinear: f64,
}

impl EnergyTerms {
    pub fn energy(&self) -> f64 {
        0.5 * self.gradient + 0.5 * self.mass - self.nonlinear
    }
}

/// A discretized variational problem: model, potential and grid.
#[derive(Debug, Clone)]
pub struct Problem {
    table: TransformTable,
    grid: RadialGrid,
    potential_spec: PotentialSpec,
    potential: Field,
    /// `A + diag(W V)` on the free nodes, the H¹ Riesz map.
    precond_diag: Vec<f64>,
    precond_off: Vec<f64>,
}

impl Problem {
    pub fn new(spec: ModelSpec, potential: PotentialSpec, grid: RadialGrid) -> Result<Self> {
        let table = TransformTable::new(spec)?;
        if grid.dim() != spec.dim {
            return Err(Error::InvalidGrid {
                reason: alloc::format!("grid dimension {} != model dimension {}", grid.dim(), spec.dim),
            });
        }
        let values = potential.eval(&grid, spec.model)?;
        let (mut precond_diag, precond_off) = grid.stiffness();
        for (i, d) in precond_diag.iter_mut().enumerate() {
            *d += grid.weights()[i] * values[i];
        }
        Ok(Self {
            table,
            grid,
            potential_spec: potential,
            potential: values,
            precond_diag,
            precond_off,
        })
    }

    pub fn table(&self) -> &TransformTable {
        &self.table
    }

    pub fn spec(&self) -> &ModelSpec {
        self.table.spec()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    pub fn potential_spec(&self) -> &PotentialSpec {
        &self.potential_spec
    }

    /// Nodewise `u = G⁻¹(v)`.
    pub fn recover_u(&self, v: &[f64]) -> Result<Field> {
        v.iter().map(|&x| self.table.inverse(x)).collect::<Result<Vec<_>>>().map(Field::from)
    }

    fn terms_with(&self, v: &[f64], u: &[f64], pot: impl Fn(usize) -> f64) -> EnergyTerms {
        let w = self.grid.weights();
        let mut mass = 0.0;
        let mut plain_mass = 0.0;
        let mut nonlinear = 0.0;
        for i in 0..v.len() {
            let u2 = u[i] * u[i];
            plain_mass += w[i] * u2;
            mass += w[i] * pot(i) * u2;
            nonlinear += w[i] * self.table.nonlinearity(u[i]).1;
        }
        EnergyTerms { gradient: self.grid.dirichlet(v), mass, plain_mass, nonlinear }
    }

    pub fn terms(&self, v: &[f64]) -> Result<EnergyTerms> {
        self.grid.check_len(v)?;
        let u = self.recover_u(v)?;
        Ok(self.terms_with(v, &u, |i| self.potential[i]))
    }

    /// `J_κ(v)` for the power model, `J̃_κ(v)` for the saturable model.
    pub fn energy(&self, v: &[f64]) -> Result<f64> {
        Ok(self.terms(v)?.energy())
    }

    /// `J̃_κ`; only defined for the saturable model.
    pub fn energy_tilde(&self, v: &[f64]) -> Result<f64> {
        if self.spec().model != Model::Saturable {
            return Err(Error::WrongModel { expected: Model::Saturable });
        }
        self.energy(v)
    }

    /// `J_{κ,∞}`: `J` with `V` replaced by `V_∞`.
    pub fn energy_infty(&self, v: &[f64]) -> Result<f64> {
        self.grid.check_len(v)?;
        let u = self.recover_u(v)?;
        let vinf = self.potential_spec.v_infty;
        Ok(self.terms_with(v, &u, |_| vinf).energy())
    }

    /// `P_∞(v) = 3∫(|∇v|² + V_∞ v²) - (1/q)∫|v|^q`.
    pub fn energy_p_infty(&self, v: &[f64]) -> Result<f64> {
        self.grid.check_len(v)?;
        let q = self.spec().q;
        let vinf = self.potential_spec.v_infty;
        let g = &self.grid;
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        Ok(3.0 * (g.dirichlet(v) + vinf * g.integrate(&sq)) - g.integrate_power(v, q) / q)
    }

    /// `Q_∞(v) = ½∫|∇v|² + (9V_∞/2)∫v² - ∫F(v)`.
    pub fn energy_q_infty(&self, v: &[f64]) -> Result<f64> {
        self.grid.check_len(v)?;
        let vinf = self.potential_spec.v_infty;
        let g = &self.grid;
        let mut mass = 0.0;
        let mut nonlinear = 0.0;
        for (x, w) in v.iter().zip(g.weights()) {
            mass += w * x * x;
            nonlinear += w * self.table.nonlinearity(*x).1;
        }
        Ok(0.5 * g.dirichlet(v) + 4.5 * vinf * mass - nonlinear)
    }

    /// Maximum of `P_∞` (power model) or `Q_∞` (saturable model) along the
    /// ray `t ↦ t v`, `t ≥ 0`: an upper bound for the level `d_∞`.
    pub fn comparison_level(&self, v: &[f64]) -> Result<f64> {
        self.grid.check_len(v)?;
        match self.spec().model {
            Model::PowerQ => {
                let q = self.spec().q;
                let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
                let a = self.grid.dirichlet(v) + self.potential_spec.v_infty * self.grid.integrate(&sq);
                let b = self.grid.integrate_power(v, q);
                if a <= 0.0 || b <= 0.0 {
                    return Ok(0.0);
                }
                let t2 = pow(6.0 * a / b, 2.0 / (q - 2.0));
                Ok(3.0 * a * t2 * (1.0 - 2.0 / q))
            }
            Model::Saturable => {
                let ray = |s: f64| -> Result<f64> {
                    let t = libm::exp(s);
                    let w: Vec<f64> = v.iter().map(|x| t * x).collect();
                    self.energy_q_infty(&w)
                };
                let (mut best_s, mut best) = (0.0, f64::NEG_INFINITY);
                for k in -40..=40 {
                    let s = 0.25 * k as f64;
                    let val = ray(s)?;
                    if val > best {
                        best = val;
                        best_s = s;
                    }
                }
                let (mut a, mut b) = (best_s - 0.25, best_s + 0.25);
                let ratio = 0.5 * (sqrt(5.0) - 1.0);
                for _ in 0..60 {
                    let c = b - ratio * (b - a);
                    let d = a + ratio * (b - a);
                    if ray(c)? >= ray(d)? {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                Ok(best.max(ray(0.5 * (a + b))?).max(0.0))
            }
        }
    }

    /// `I_κ(u) = ½∫g²(u)|∇u|² + ½∫V u² - ∫L(u)`, evaluated on `u` directly.
    pub fn original_energy(&self, u: &[f64]) -> Result<f64> {
        self.grid.check_len(u)?;
        let h = self.grid.spacing();
        let grad: f64 = u
            .windows(2)
            .zip(self.grid.edge_coefficients())
            .map(|(p, c)| {
                let gm = self.table.g(0.5 * (p[0] + p[1]));
                c * gm * gm * (p[1] - p[0]) * (p[1] - p[0]) / h
            })
            .sum();
        let w = self.grid.weights();
        let rest: f64 = (0..u.len())
            .map(|i| w[i] * (0.5 * self.potential[i] * u[i] * u[i] - self.table.nonlinearity(u[i]).1))
            .sum();
        Ok(0.5 * grad + rest)
    }

    /// `(V u - l(u)) / g(u)` at one node, given `u`.
    pub(crate) fn reaction(&self, i: usize, u: f64) -> f64 {
        (self.potential[i] * u - self.table.nonlinearity(u).0) / self.table.g(u)
    }

    /// `d/dv` of [`Self::reaction`].
    pub(crate) fn reaction_prime(&self, i: usize, u: f64) -> f64 {
        let g = self.table.g(u);
        let vi = self.potential[i];
        let (l, _) = self.table.nonlinearity(u);
        let lp = self.table.nonlinearity_prime(u);
        ((vi - lp) * g - (vi * u - l) * self.table.g_prime(u)) / (g * g * g)
    }

    /// Strong-form gradient `-Δv + (V u - l(u)) / g(u)`; zero at the boundary node.
    pub fn gradient(&self, v: &[f64]) -> Result<Field> {
        self.grid.check_len(v)?;
        let u = self.recover_u(v)?;
        Ok(self.gradient_with(v, &u))
    }

    pub(crate) fn gradient_with(&self, v: &[f64], u: &[f64]) -> Field {
        let mut out = self.grid.laplacian(v);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.reaction(i, u[i]) - *o;
        }
        if let Some(last) = out.last_mut() {
            *last = 0.0;
        }
        Field::from(out)
    }

    /// Apply the inverse H¹ Riesz map to a strong-form field: returns `d`
    /// with `P d = W ∘ grad` on the free nodes, `d(R) = 0`.
    pub fn riesz(&self, grad: &[f64]) -> Field {
        let m = self.precond_diag.len();
        let rhs: Vec<f64> = (0..m).map(|i| self.grid.weights()[i] * grad[i]).collect();
        let mut d = linalg::solve_spd(&self.precond_diag, &self.precond_off, &rhs);
        d.push(0.0);
        Field::from(d)
    }

    /// Dual norm `sup_ψ ⟨J'(v), ψ⟩ / ‖ψ‖` of a strong-form gradient.
    pub fn dual_norm(&self, grad: &[f64]) -> f64 {
        let d = self.riesz(grad);
        sqrt(self.grid.inner(grad, &d).max(0.0))
    }

    pub fn grad_norm(&self, v: &[f64]) -> Result<f64> {
        let g = self.gradient(v)?;
        Ok(self.dual_norm(&g))
    }

    /// `‖v‖² = ∫|∇v|² + ∫V v²`.
    pub fn h1_norm_sq(&self, v: &[f64]) -> f64 {
        let vv: Vec<f64> = v.iter().zip(self.potential.iter()).map(|(x, p)| p * x * x).collect();
        self.grid.dirichlet(v) + self.grid.integrate(&vv)
    }

    pub fn h1_norm(&self, v: &[f64]) -> f64 {
        sqrt(self.h1_norm_sq(v))
    }

    /// Weak-form Jacobian of the gradient, `A + diag(W φ'(v))`, restricted
    /// to the free nodes, as `(lower, diag, upper)`.
    pub(crate) fn jacobian(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut diag, off) = self.grid.stiffness();
        let w = self.grid.weights();
        for (i, d) in diag.iter_mut().enumerate() {
            *d += w[i] * self.reaction_prime(i, u[i]);
        }
        (off.clone(), diag, off)
    }

    fn require_constant_potential(&self) -> Result<f64> {
        if self.potential_spec.is_constant() {
            Ok(self.potential_spec.v_infty)
        } else {
            Err(Error::NonConstantPotential)
        }
    }

    /// `J_{κ,∞}(v(·/t))` from the scaling of each term.
    pub fn dilation_energy(&self, v: &[f64], t: f64) -> Result<f64> {
        let terms = self.dilation_terms(v, t)?;
        let n = self.spec().dim as f64;
        Ok(0.5 * pow(t, n - 2.0) * terms.gradient + pow(t, n) * (0.5 * terms.mass - terms.nonlinear))
    }

    /// `d/dt J_{κ,∞}(v(·/t))`.
    pub fn dilation_slope(&self, v: &[f64], t: f64) -> Result<f64> {
        let terms = self.dilation_terms(v, t)?;
        let n = self.spec().dim as f64;
        Ok(0.5 * (n - 2.0) * pow(t, n - 3.0) * terms.gradient
            + n * pow(t, n - 1.0) * (0.5 * terms.mass - terms.nonlinear))
    }

    fn dilation_terms(&self, v: &[f64], t: f64) -> Result<EnergyTerms> {
        self.require_constant_potential()?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain { reason: alloc::format!("dilation factor t = {t} must be > 0") });
        }
        self.terms(v)
    }

    /// Smallest `J` over a family of Gaussian profiles scaled to `‖v‖ = ρ`.
    pub fn sphere_minimum(&self, rho: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for k in 0..24 {
            let width = 0.25 * libm::pow(1.25, k as f64);
            let mut phi = Field::from_fn(&self.grid, |r| libm::exp(-(r / width) * (r / width)));
            phi.clamp_boundary();
            let norm = self.h1_norm(&phi);
            if norm == 0.0 {
                continue;
            }
            for x in phi.iter_mut() {
                *x *= rho / norm;
            }
            best = best.min(self.energy(&phi)?);
        }
        Ok(best)
    }
}
