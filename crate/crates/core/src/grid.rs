//! Uniform radial grids on `[0, R]`, nodal fields, and the potential.
//!
//! Integration uses the trapezoidal rule against `ω_{N-1} r^{N-1} dr`,
//! except that the origin node carries the exact volume of the ball of
//! radius `h/2` instead of the trapezoidal weight `0`. The Laplacian is the
//! flux form `L v_i = (F_{i+1/2} - F_{i-1/2}) / W_i` with edge fluxes
//! `F = c (v_{i+1} - v_i) / h` and `c_{i+1/2} = N Vol(r_{i+1/2}) / r_{i+1/2}`,
//! `Vol` being the quadrature volume enclosed by the edge. This makes `-L`
//! symmetric under the quadrature inner product, exact on `a + b r²`, and
//! equal to `2N (v_1 - v_0) / h²` at the origin (the ghost-node reflection
//! encoding `v'(0) = 0`).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Deref, DerefMut};

use libm::{exp, pow, tgamma};

use crate::error::{Error, Result};
use crate::transforms::Model;

pub const MIN_NODES: usize = 16;

/// Surface area of the unit sphere in ℝᴺ.
pub fn unit_sphere_area(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    2.0 * pow(PI, half) / tgamma(half)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    spacing: f64,
    r: Vec<f64>,
    weights: Vec<f64>,
    /// `c_{i+1/2}`, one per edge.
    edge: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, nodes: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidGrid { reason: format!("dimension {dim} < 3") });
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid { reason: format!("radius {radius} must be positive") });
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidGrid {
                reason: format!("{nodes} nodes, need at least {MIN_NODES}"),
            });
        }
        let n = dim as f64;
        let h = radius / (nodes - 1) as f64;
        let omega = unit_sphere_area(dim);
        let r: Vec<f64> = (0..nodes).map(|i| i as f64 * h).collect();
        let mut weights: Vec<f64> = r.iter().map(|&ri| omega * h * pow(ri, n - 1.0)).collect();
        weights[0] = omega * pow(0.5 * h, n) / n;
        weights[nodes - 1] *= 0.5;

        let mut edge = Vec::with_capacity(nodes - 1);
        let mut enclosed = 0.0;
        for i in 0..nodes - 1 {
            enclosed += weights[i];
            let mid = (i as f64 + 0.5) * h;
            edge.push(n * enclosed / mid);
        }
        Ok(Self { dim, radius, spacing: h, r, weights, edge })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.r.len()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn edge_coefficients(&self) -> &[f64] {
        &self.edge
    }

    pub fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() == self.nodes() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.nodes(), found: values.len() })
        }
    }

    /// `∫_{B_R} w dx` for a radial `w`.
    pub fn integrate(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.nodes());
        w.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    /// Quadrature inner product `∫ a b dx`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    /// `∫ |w|^p dx`.
    pub fn integrate_power(&self, w: &[f64], p: f64) -> f64 {
        w.iter().zip(&self.weights).map(|(x, wt)| pow(x.abs(), p) * wt).sum()
    }

    /// `‖w‖_p` over the ball.
    pub fn lp_norm(&self, w: &[f64], p: f64) -> f64 {
        let m = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if m == 0.0 {
            return 0.0;
        }
        // scaled to avoid overflow for large p
        let s: f64 = w.iter().zip(&self.weights).map(|(x, wt)| pow(x.abs() / m, p) * wt).sum();
        m * pow(s, 1.0 / p)
    }

    /// `∫ |∇v|² dx` with edge differences.
    pub fn dirichlet(&self, v: &[f64]) -> f64 {
        let h = self.spacing;
        v.windows(2).zip(&self.edge).map(|(p, c)| c * (p[1] - p[0]) * (p[1] - p[0]) / h).sum()
    }

    /// Radial Laplacian `v'' + (N-1)/r v'` at every node. The last node is a
    /// boundary node and only sees its inner edge.
    pub fn laplacian(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.nodes());
        let h = self.spacing;
        let mut out = alloc::vec![0.0; v.len()];
        for (i, (p, c)) in v.windows(2).zip(&self.edge).enumerate() {
            let flux = c * (p[1] - p[0]) / h;
            out[i] += flux;
            out[i + 1] -= flux;
        }
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        out
    }

    /// Stiffness matrix of `∫ |∇v|²` restricted to the interior nodes
    /// `0..n-1`, as `(diag, off)` of a symmetric tridiagonal matrix.
    pub(crate) fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.nodes() - 1;
        let h = self.spacing;
        let mut diag = alloc::vec![0.0; m];
        let mut off = alloc::vec![0.0; m.saturating_sub(1)];
        for (i, c) in self.edge.iter().enumerate() {
            let k = c / h;
            if i < m {
                diag[i] += k;
            }
            if i + 1 < m {
                diag[i + 1] += k;
                off[i] = -k;
            }
        }
        (diag, off)
    }

    /// Index of the first node with `r >= x`.
    pub fn node_at(&self, x: f64) -> usize {
        let i = libm::ceil(x / self.spacing - 1e-9) as isize;
        i.clamp(0, self.nodes() as isize - 1) as usize
    }
}

/// Nodal values of a radial function on a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(grid: &RadialGrid) -> Self {
        Self(alloc::vec![0.0; grid.nodes()])
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self(grid.r().iter().map(|&r| f(r)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Enforce the Dirichlet condition `v(R) = 0`.
    pub fn clamp_boundary(&mut self) {
        if let Some(last) = self.0.last_mut() {
            *last = 0.0;
        }
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PotentialShape {
    Constant,
    /// `V(r) = V_inf - depth exp(-(r/width)²)`.
    GaussianWell { depth: f64, width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PotentialSpec {
    pub v_infty: f64,
    pub shape: PotentialShape,
}

impl PotentialSpec {
    pub fn constant(v_infty: f64) -> Self {
        Self { v_infty, shape: PotentialShape::Constant }
    }

    pub fn gaussian_well(v_infty: f64, depth: f64, width: f64) -> Self {
        Self { v_infty, shape: PotentialShape::GaussianWell { depth, width } }
    }

    pub fn is_constant(&self) -> bool {
        match self.shape {
            PotentialShape::Constant => true,
            PotentialShape::GaussianWell { depth, .. } => depth == 0.0,
        }
    }

    /// Lower bound `V₀`.
    pub fn v0(&self) -> f64 {
        match self.shape {
            PotentialShape::Constant => self.v_infty,
            PotentialShape::GaussianWell { depth, .. } => self.v_infty - depth,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.shape {
            PotentialShape::Constant => self.v_infty,
            PotentialShape::GaussianWell { depth, width } => {
                let s = r / width;
                self.v_infty - depth * exp(-s * s)
            }
        }
    }

    pub fn validate(&self, model: Model) -> Result<()> {
        let fail = |reason| Err(Error::InvalidPotential { reason });
        if !(self.v_infty.is_finite() && self.v_infty > 0.0) {
            return fail(format!("V_inf = {} must be positive", self.v_infty));
        }
        if let PotentialShape::GaussianWell { depth, width } = self.shape {
            if !(depth >= 0.0 && depth < self.v_infty) {
                return fail(format!(
                    "well depth {depth} must lie in [0, V_inf) so that V >= V_0 > 0"
                ));
            }
            if !(width.is_finite() && width > 0.0) {
                return fail(format!("well width {width} must be positive"));
            }
        }
        if model == Model::Saturable && self.v0() < 1.0 {
            return fail(format!("saturable model requires V_0 >= 1, got V_0 = {}", self.v0()));
        }
        Ok(())
    }

    /// Nodal values of `V`; fails if `V(R)` is not within `1e-8` of `V_inf`.
    pub fn eval(&self, grid: &RadialGrid, model: Model) -> Result<Field> {
        self.validate(model)?;
        let tail = self.value(grid.radius());
        if (self.v_infty - tail).abs() > 1e-8 {
            return Err(Error::InvalidPotential {
                reason: format!(
                    "V(R) = {tail} differs from V_inf = {} by more than 1e-8; enlarge R",
                    self.v_infty
                ),
            });
        }
        Ok(Field::from_fn(grid, |r| self.value(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_area() {
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn integrate_constants_and_exponential() {
        let g = RadialGrid::new(3, 1.0, 2001).unwrap();
        assert_eq!(g.integrate(&Field::zeros(&g)), 0.0);
        let one = Field::from_fn(&g, |_| 1.0);
        assert_relative_eq!(g.integrate(&one), 4.0 * PI / 3.0, max_relative = 1e-6);

        // ∫ e^{-r} 4π r² dr = 8π
        let g = RadialGrid::new(3, 40.0, 2001).unwrap();
        let w = Field::from_fn(&g, |r| exp(-r));
        assert_relative_eq!(g.integrate(&w), 8.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn weights_are_positive() {
        let g = RadialGrid::new(5, 3.0, 64).unwrap();
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let g = RadialGrid::new(3, 10.0, 101).unwrap();
        let lap = g.laplacian(&Field::from_fn(&g, |_| 2.5));
        assert!(lap.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        for dim in [3, 4, 7] {
            let g = RadialGrid::new(dim, 1.0, 101).unwrap();
            let lap = g.laplacian(&Field::from_fn(&g, |r| 1.0 - r * r));
            for x in &lap[..lap.len() - 1] {
                assert!((x + 2.0 * dim as f64).abs() < 1e-10, "{x}");
            }
        }
    }

    #[test]
    fn laplacian_second_order() {
        let errors: Vec<f64> = [201, 401, 801]
            .iter()
            .map(|&n| {
                let g = RadialGrid::new(3, 6.0, n).unwrap();
                let v = Field::from_fn(&g, |r| exp(-r * r));
                let lap = g.laplacian(&v);
                g.r()
                    .iter()
                    .zip(&lap)
                    .take(n - 1)
                    .map(|(&r, l)| (l - (4.0 * r * r - 6.0) * exp(-r * r)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for pair in errors.windows(2) {
            let order = libm::log2(pair[0] / pair[1]);
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn origin_row_is_ghost_reflection() {
        let g = RadialGrid::new(3, 2.0, 41).unwrap();
        let v = Field::from_fn(&g, libm::cos);
        let lap = g.laplacian(&v);
        let h = g.spacing();
        assert_relative_eq!(lap[0], 6.0 * (v[1] - v[0]) / (h * h), max_relative = 1e-12);
    }

    #[test]
    fn potential_shapes() {
        let g = RadialGrid::new(3, 20.0, 201).unwrap();
        let c = PotentialSpec::constant(1.0).eval(&g, Model::PowerQ).unwrap();
        assert!(c.iter().all(|&x| x == 1.0));

        let well = PotentialSpec::gaussian_well(1.0, 0.5, 1.0);
        let v = well.eval(&g, Model::PowerQ).unwrap();
        assert_relative_eq!(v[0], 0.5, max_relative = 1e-15);
        assert!((v[v.len() - 1] - 1.0).abs() < 1e-8);
        assert!(v.iter().all(|&x| x >= well.v0()));
    }

    #[test]
    fn potential_rejections() {
        assert!(PotentialSpec::gaussian_well(1.0, 1.0, 1.0).validate(Model::PowerQ).is_err());
        assert!(PotentialSpec::constant(0.0).validate(Model::PowerQ).is_err());
        assert!(PotentialSpec::constant(0.5).validate(Model::Saturable).is_err());
        let g = RadialGrid::new(3, 2.0, 64).unwrap();
        assert!(PotentialSpec::gaussian_well(1.0, 0.5, 3.0).eval(&g, Model::PowerQ).is_err());
    }
}
