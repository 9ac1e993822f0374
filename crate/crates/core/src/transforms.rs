//! Truncated diffusion coefficient `g`, its primitive `G`, the inverse
//! `G⁻¹` and the (modified) nonlinearities for the two model equations.
//!
//! The power model uses
//!
//! ```text
//! g(t) = sqrt(1 - κt²)                       0 <= t < t* = sqrt(1/(3κ))
//! g(t) = 1/(3 sqrt(2κ) t) + sqrt(1/6)        t >= t*
//! ```
//!
//! and the saturable model replaces the outer piece by
//! `κ/(t sqrt(1-κ)) + (1-2κ)/sqrt(1-κ)` with breakpoint `t* = 1`. Both are
//! extended evenly to negative arguments, so `G` and `G⁻¹` are odd.
//!
//! Every outer piece has the form `a/t + b`, which integrates to
//! `a ln(t/t*) + b (t - t*)`; the inner piece integrates to the elliptic
//! arcsine form. No quadrature is involved.

use alloc::format;
use libm::{asin, fabs, log, pow, sqrt};

use crate::error::{Error, Result};

/// Which of the two model equations is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Model {
    /// Power nonlinearity `|u|^(q-2) u`.
    PowerQ,
    /// Saturable nonlinearity `[1 - (1+u²)^-3] u`, modified to `7/8 u^(q-1)` above 1.
    Saturable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub model: Model,
    pub kappa: f64,
    pub q: f64,
    pub dim: usize,
    /// Semilinear reference mode: `κ = 0`, `g ≡ 1`. Only meaningful as an oracle.
    #[cfg_attr(feature = "serde", serde(default))]
    pub reference: bool,
}

impl ModelSpec {
    pub fn power(kappa: f64, q: f64, dim: usize) -> Self {
        Self { model: Model::PowerQ, kappa, q, dim, reference: false }
    }

    pub fn saturable(kappa: f64, q: f64, dim: usize) -> Self {
        Self { model: Model::Saturable, kappa, q, dim, reference: false }
    }

    /// The `κ = 0` semilinear problem, flagged explicitly.
    pub fn reference(model: Model, q: f64, dim: usize) -> Self {
        Self { model, kappa: 0.0, q, dim, reference: true }
    }

    /// Default exponent inside each model's admissible window.
    pub fn default_q(model: Model) -> f64 {
        match model {
            Model::PowerQ => 3.0,
            Model::Saturable => 2.5,
        }
    }

    /// Critical Sobolev exponent `2* = 2N/(N-2)`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.dim as f64;
        2.0 * n / (n - 2.0)
    }

    /// Upper end of the open window for `q`.
    pub fn q_upper(&self) -> f64 {
        match self.model {
            Model::PowerQ => self.critical_exponent(),
            Model::Saturable => self.critical_exponent().min(14.0 / 5.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: alloc::string::String| Err(Error::InvalidModel { reason });
        if self.dim < 3 {
            return fail(format!("dimension N = {} must be at least 3", self.dim));
        }
        if !self.q.is_finite() || self.q <= 2.0 || self.q >= self.q_upper() {
            let window = match self.model {
                Model::PowerQ => "2 < q < 2N/(N-2)",
                Model::Saturable => "2 < q < min{14/5, 2N/(N-2)}",
            };
            return fail(format!(
                "q = {} outside the open window {window} (upper end {:.6})",
                self.q,
                self.q_upper()
            ));
        }
        if !self.kappa.is_finite() {
            return fail(format!("kappa = {} is not finite", self.kappa));
        }
        if self.reference {
            if self.kappa != 0.0 {
                return fail(format!("reference mode requires kappa = 0, got {}", self.kappa));
            }
            return Ok(());
        }
        if self.kappa <= 0.0 {
            return fail(format!(
                "kappa = {} must be positive (kappa = 0 only in reference mode)",
                self.kappa
            ));
        }
        if self.model == Model::Saturable && self.kappa >= 1.0 / 3.0 {
            return fail(format!(
                "saturable model requires 0 < kappa < 1/3, got kappa = {}",
                self.kappa
            ));
        }
        Ok(())
    }
}

/// Closed-form description of `g`, `G` and `G⁻¹` for one validated spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformTable {
    spec: ModelSpec,
    breakpoint: f64,
    /// Outer piece `g(t) = outer_a / t + outer_b`.
    outer_a: f64,
    outer_b: f64,
    primitive_at_break: f64,
}

const INVERSE_MAX_ITERS: usize = 200;

impl TransformTable {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.kappa;
        let (breakpoint, outer_a, outer_b) = if spec.reference {
            (f64::INFINITY, 0.0, 1.0)
        } else {
            match spec.model {
                Model::PowerQ => (
                    sqrt(1.0 / (3.0 * k)),
                    1.0 / (3.0 * sqrt(2.0 * k)),
                    sqrt(1.0 / 6.0),
                ),
                Model::Saturable => {
                    let s = sqrt(1.0 - k);
                    (1.0, k / s, (1.0 - 2.0 * k) / s)
                }
            }
        };
        let mut table = Self { spec, breakpoint, outer_a, outer_b, primitive_at_break: 0.0 };
        if breakpoint.is_finite() {
            table.primitive_at_break = table.inner_primitive(breakpoint);
        }
        Ok(table)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// `t*`; infinite in reference mode.
    pub fn breakpoint(&self) -> f64 {
        self.breakpoint
    }

    /// Infimum of `g` over ℝ (never attained).
    pub fn g_floor(&self) -> f64 {
        self.outer_b
    }

    /// Constant `c` of the sandwich `t <= G⁻¹(t) <= c t` for `t >= 0`.
    pub fn inverse_slope_bound(&self) -> f64 {
        match self.spec.model {
            Model::PowerQ => sqrt(6.0),
            Model::Saturable => 3.0,
        }
    }

    fn inner_primitive(&self, u: f64) -> f64 {
        let k = self.spec.kappa;
        if k == 0.0 {
            return u;
        }
        let sk = sqrt(k);
        0.5 * u * sqrt(1.0 - k * u * u) + asin(sk * u) / (2.0 * sk)
    }

    pub fn g(&self, t: f64) -> f64 {
        let t = fabs(t);
        if t < self.breakpoint {
            sqrt(1.0 - self.spec.kappa * t * t)
        } else {
            self.outer_a / t + self.outer_b
        }
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        let s = if t < 0.0 { -1.0 } else { 1.0 };
        let a = fabs(t);
        let k = self.spec.kappa;
        let d = if a < self.breakpoint {
            -k * a / sqrt(1.0 - k * a * a)
        } else {
            -self.outer_a / (a * a)
        };
        s * d
    }

    /// `t g'(t) / g(t)`, the quantity bounded in `[-1/2, 0]` (power) or
    /// `[-3/2, 0]` (saturable) for `t >= 0`.
    pub fn log_slope(&self, t: f64) -> f64 {
        t * self.g_prime(t) / self.g(t)
    }

    /// `G(u) = ∫₀ᵘ g(s) ds`.
    pub fn primitive(&self, u: f64) -> f64 {
        let s = if u < 0.0 { -1.0 } else { 1.0 };
        let a = fabs(u);
        let value = if a < self.breakpoint {
            self.inner_primitive(a)
        } else {
            let tb = self.breakpoint;
            self.primitive_at_break + self.outer_a * log(a / tb) + self.outer_b * (a - tb)
        };
        s * value
    }

    /// `G⁻¹(t)` by Newton's method inside the sandwich bracket, bisecting
    /// whenever a Newton step leaves the bracket.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if !t.is_finite() {
            return Err(Error::InverseNoConvergence { target: t });
        }
        if self.spec.kappa == 0.0 {
            return Ok(t);
        }
        let s = if t < 0.0 { -1.0 } else { 1.0 };
        let target = fabs(t);
        let mut lo = target;
        let mut hi = self.inverse_slope_bound() * target;
        let tol = 1e-13 * target.max(1.0);
        let mut u = target;
        for _ in 0..INVERSE_MAX_ITERS {
            let r = self.primitive(u) - target;
            if r == 0.0 {
                return Ok(s * u);
            }
            if r > 0.0 {
                hi = hi.min(u);
            } else {
                lo = lo.max(u);
            }
            let mut next = u - r / self.g(u);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = fabs(next - u);
            u = next;
            let stalled = step <= 4.0 * f64::EPSILON * u || (hi - lo) <= 4.0 * f64::EPSILON * hi;
            if stalled && fabs(self.primitive(u) - target) <= tol {
                return Ok(s * u);
            }
        }
        if fabs(self.primitive(u) - target) <= tol {
            Ok(s * u)
        } else {
            Err(Error::InverseNoConvergence { target: t })
        }
    }

    /// `(l(t), L(t))`: the nonlinearity and its primitive. For the power
    /// model `l(t) = |t|^(q-2) t`; for the saturable model the three-piece
    /// modified `f`, vanishing for `t <= 0`.
    pub fn nonlinearity(&self, t: f64) -> (f64, f64) {
        let q = self.spec.q;
        match self.spec.model {
            Model::PowerQ => {
                let a = fabs(t);
                let p = pow(a, q - 2.0);
                (p * t, p * a * a / q)
            }
            Model::Saturable => {
                if t <= 0.0 {
                    (0.0, 0.0)
                } else if t <= 1.0 {
                    let w = 1.0 + t * t;
                    let w3 = w * w * w;
                    ((1.0 - 1.0 / w3) * t, 0.5 * t * t + 0.25 / (w * w) - 0.25)
                } else {
                    let p = pow(t, q - 1.0);
                    (0.875 * p, 0.875 * p * t / q + (5.0 * q - 14.0) / (16.0 * q))
                }
            }
        }
    }

    /// Derivative of the nonlinearity.
    pub fn nonlinearity_prime(&self, t: f64) -> f64 {
        let q = self.spec.q;
        match self.spec.model {
            Model::PowerQ => (q - 1.0) * pow(fabs(t), q - 2.0),
            Model::Saturable => {
                if t <= 0.0 {
                    0.0
                } else if t <= 1.0 {
                    let w = 1.0 + t * t;
                    let w3 = w * w * w;
                    1.0 - 1.0 / w3 + 6.0 * t * t / (w3 * w)
                } else {
                    0.875 * (q - 1.0) * pow(t, q - 2.0)
                }
            }
        }
    }

    /// `l(t)` for the unmodified equations: `|t|^(q-2) t` or `[1-(1+t²)^-3] t`.
    pub fn original_nonlinearity(&self, t: f64) -> f64 {
        match self.spec.model {
            Model::PowerQ => self.nonlinearity(t).0,
            Model::Saturable => {
                let w = 1.0 + t * t;
                (1.0 - 1.0 / (w * w * w)) * t
            }
        }
    }
}

/// One row of the `table` output: `(t, g, g', G, G⁻¹, f, F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TableRow {
    pub t: f64,
    pub g: f64,
    pub g_prime: f64,
    pub primitive: f64,
    pub inverse: f64,
    pub f: f64,
    pub f_primitive: f64,
}

impl TransformTable {
    pub fn row(&self, t: f64) -> Result<TableRow> {
        let (f, f_primitive) = self.nonlinearity(t);
        Ok(TableRow {
            t,
            g: self.g(t),
            g_prime: self.g_prime(t),
            primitive: self.primitive(t),
            inverse: self.inverse(t)?,
            f,
            f_primitive,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn power(k: f64) -> TransformTable {
        TransformTable::new(ModelSpec::power(k, 3.0, 3)).unwrap()
    }

    fn saturable(k: f64) -> TransformTable {
        TransformTable::new(ModelSpec::saturable(k, 2.5, 3)).unwrap()
    }

    /// Composite Gauss-Legendre (5 points) on `m` panels.
    fn gauss_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
            0.236_926_885_056_189_08,
        ];
        let h = (b - a) / m as f64;
        (0..m)
            .map(|i| {
                let c = a + (i as f64 + 0.5) * h;
                X.iter().zip(W.iter()).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn g_at_origin_is_one() {
        assert_eq!(power(0.1).g(0.0), 1.0);
        assert_eq!(saturable(0.2).g(0.0), 1.0);
    }

    #[test]
    fn power_branches_agree_at_breakpoint() {
        let k = 0.1;
        let ts = sqrt(1.0 / (3.0 * k));
        let inner = sqrt(1.0 - k * ts * ts);
        let outer = 1.0 / (3.0 * sqrt(2.0 * k) * ts) + sqrt(1.0 / 6.0);
        assert!((inner - outer).abs() <= 1e-12);
        assert!((inner - sqrt(2.0 / 3.0)).abs() <= 1e-12);
        let t = power(k);
        assert!((t.g(ts) - sqrt(2.0 / 3.0)).abs() <= 1e-12);

        let d_inner = -k * ts / sqrt(1.0 - k * ts * ts);
        let d_outer = -1.0 / (3.0 * sqrt(2.0 * k) * ts * ts);
        assert!((d_inner - d_outer).abs() <= 1e-12);
        assert!((d_inner + sqrt(k / 2.0)).abs() <= 1e-12);
        assert!((t.g_prime(ts) + sqrt(k / 2.0)).abs() <= 1e-12);
    }

    #[test]
    fn saturable_branches_agree_at_one() {
        let k = 0.2;
        let inner = sqrt(1.0 - k);
        let outer = (k + 1.0 - 2.0 * k) / sqrt(1.0 - k);
        assert!((inner - outer).abs() <= 1e-12);
        assert_relative_eq!(saturable(k).g(1.0), 0.894_427_190_999_915_9, epsilon = 1e-12);
        let d_inner = -k / sqrt(1.0 - k);
        let d_outer = -k / sqrt(1.0 - k);
        assert!((d_inner - d_outer).abs() <= 1e-12);
        assert!((saturable(k).g_prime(1.0) + k / sqrt(1.0 - k)).abs() <= 1e-12);
    }

    #[test]
    fn derivative_at_origin_vanishes() {
        assert_eq!(power(0.1).g_prime(0.0), 0.0);
        assert_eq!(saturable(0.1).g_prime(0.0), 0.0);
    }

    #[test]
    fn primitive_matches_quadrature() {
        let t = power(0.1);
        let closed = 0.5 * sqrt(1.0 - 0.1) + asin(sqrt(0.1)) / (2.0 * sqrt(0.1));
        let quad = gauss_integral(|s| sqrt(1.0 - 0.1 * s * s), 0.0, 1.0, 64);
        assert!((closed - quad).abs() <= 1e-12);
        assert!((t.primitive(1.0) - quad).abs() <= 1e-12);

        // Across the breakpoint the outer pieces must also match quadrature.
        for table in [power(0.05), power(0.3), saturable(0.05), saturable(0.3)] {
            for u in [0.5, 1.0, 2.0, 5.0, 12.0] {
                let tb = table.breakpoint();
                let quad = if u <= tb {
                    gauss_integral(|s| table.g(s), 0.0, u, 200)
                } else {
                    gauss_integral(|s| table.g(s), 0.0, tb, 200)
                        + gauss_integral(|s| table.g(s), tb, u, 400)
                };
                assert!(
                    (table.primitive(u) - quad).abs() <= 1e-12 * quad.max(1.0),
                    "u = {u}: {} vs {quad}",
                    table.primitive(u)
                );
            }
        }
    }

    #[test]
    fn primitive_is_odd_and_sandwiched() {
        for table in [power(0.1), saturable(0.2)] {
            assert_eq!(table.primitive(0.0), 0.0);
            for i in 0..200 {
                let u = 0.05 * i as f64;
                let g = table.primitive(u);
                assert_eq!(table.primitive(-u), -g);
                assert!(g <= u + 1e-15);
                assert!(g >= table.g(u) * u - 1e-15);
            }
        }
    }

    #[test]
    fn inverse_round_trip_and_bounds() {
        for table in [power(0.01), power(0.3), saturable(0.05), saturable(0.3)] {
            assert_eq!(table.inverse(0.0).unwrap(), 0.0);
            let c = table.inverse_slope_bound();
            for i in 0..=2000 {
                let u = -100.0 + 0.1 * i as f64;
                let v = table.primitive(u);
                let back = table.inverse(v).unwrap();
                assert!((back - u).abs() <= 1e-10 * u.abs().max(1.0));
                assert!((table.primitive(back) - v).abs() <= 1e-12 * v.abs().max(1.0));
                if v >= 0.0 {
                    assert!(back >= v && back <= c * v + 1e-12);
                }
                assert_eq!(table.inverse(-v).unwrap(), -back);
            }
        }
    }

    #[test]
    fn inverse_limits() {
        let p = power(0.1);
        assert!((p.inverse(1e-6).unwrap() / 1e-6 - 1.0).abs() <= 1e-4);
        assert!((p.inverse(1e6).unwrap() / 1e6 - sqrt(6.0)).abs() <= 1e-3);
        let k = 0.2;
        let s = saturable(k);
        let limit = sqrt(1.0 - k) / (1.0 - 2.0 * k);
        assert!((s.inverse(1e-6).unwrap() / 1e-6 - 1.0).abs() <= 1e-4);
        assert!((s.inverse(1e6).unwrap() / 1e6 - limit).abs() <= 1e-3);
    }

    #[test]
    fn log_slope_bounds() {
        for (table, low) in [(power(0.1), -0.5), (power(0.3), -0.5), (saturable(0.3), -1.5)] {
            for i in 0..10_000 {
                let t = 0.01 * i as f64;
                let r = table.log_slope(t);
                assert!(r <= 0.0 && r >= low - 1e-14, "t = {t}, ratio = {r}");
            }
        }
    }

    #[test]
    fn saturable_nonlinearity_pieces() {
        let s = saturable(0.1);
        assert_eq!(s.nonlinearity(0.0), (0.0, 0.0));
        assert_eq!(s.nonlinearity(-3.0), (0.0, 0.0));
        // f(1) = 7/8 from both sides, F continuous at 1.
        let (f1, big_f1) = s.nonlinearity(1.0);
        assert!((f1 - 0.875).abs() <= 1e-15);
        let (f1p, big_f1p) = s.nonlinearity(1.0 + 1e-12);
        assert!((f1p - 0.875).abs() <= 1e-10);
        assert!((big_f1 - 5.0 / 16.0).abs() <= 1e-15);
        assert!((big_f1p - big_f1).abs() <= 1e-10);
        for i in 0..5000 {
            let t = 0.002 * i as f64 * 5.0;
            let (f, big_f) = s.nonlinearity(t);
            assert!(f <= 7.0 * pow(t, 1.5) + 1e-15);
            assert!(2.0 * big_f - f * t <= 1e-14);
            let quad = gauss_integral(|x| s.nonlinearity(x).0, 0.0, t.min(1.0), 50)
                + if t > 1.0 { gauss_integral(|x| s.nonlinearity(x).0, 1.0, t, 50) } else { 0.0 };
            assert!((big_f - quad).abs() <= 1e-11 * quad.max(1.0));
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TransformTable::new(ModelSpec::power(0.0, 3.0, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::power(-0.1, 3.0, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::power(0.1, 2.0, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::power(0.1, 6.0, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::saturable(0.4, 2.5, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::saturable(0.1, 2.8, 3)).is_err());
        assert!(TransformTable::new(ModelSpec::power(0.1, 3.0, 2)).is_err());
        assert!(TransformTable::new(ModelSpec::reference(Model::PowerQ, 3.0, 3)).is_ok());
    }

    #[test]
    fn reference_mode_is_identity() {
        let t = TransformTable::new(ModelSpec::reference(Model::PowerQ, 3.0, 3)).unwrap();
        for u in [-3.0, 0.5, 7.0] {
            assert_eq!(t.g(u), 1.0);
            assert_eq!(t.primitive(u), u);
            assert_eq!(t.inverse(u).unwrap(), u);
        }
    }
}
