//! TOML run configuration.
//!
//! Every section except `[model]` is optional; missing keys take the
//! defaults below. Unknown keys are rejected. All errors carry the line
//! of the offending key (or of its section when the key is absent).

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use quasisol_core::{
    solver::GridSettings, Error as CoreError, Model, ModelSpec, PotentialSpec, SolverConfig,
    VerifyOptions,
};
use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub table: TableSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub model: Model,
    pub kappa: f64,
    /// Defaults to 3 for `power_q`, 2.5 for `saturable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

fn default_dim() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeName {
    Constant,
    GaussianWell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    pub v_infty: f64,
    pub shape: ShapeName,
    /// Ignored for `constant`.
    pub depth: f64,
    pub width: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { v_infty: 1.0, shape: ShapeName::Constant, depth: 0.0, width: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub nodes: usize,
    pub radius: f64,
    /// Double `R` until the profile has decayed.
    pub adaptive: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSettings::default();
        Self { nodes: g.nodes, radius: g.radius, adaptive: g.adaptive }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub path_points: usize,
    pub descent_tol: f64,
    pub max_iters: usize,
    pub seed_amplitude: f64,
    pub seed_radius: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::new(ModelSpec::power(0.01, 3.0, 3), PotentialSpec::constant(1.0));
        Self {
            path_points: c.path_points,
            descent_tol: c.descent_tol,
            max_iters: c.max_iters,
            seed_amplitude: c.seed_amplitude,
            seed_radius: c.seed_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub residual_tol: f64,
    pub pohozaev_tol: f64,
    pub decay_r2: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        let o = VerifyOptions::default();
        Self { residual_tol: o.residual_tol, pohozaev_tol: o.pohozaev_tol, decay_r2: o.decay_r2 }
    }
}

/// Either an explicit `kappas` list or a log-spaced `kappa_min..kappa_max`
/// range with `count` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Refine the pass/fail boundary by bisection down to this width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_tol: Option<f64>,
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        match (&self.kappas, self.kappa_min, self.kappa_max, self.count) {
            (Some(k), ..) => k.clone(),
            (None, Some(lo), Some(hi), Some(n)) => quasisol_core::sweep::log_spaced(lo, hi, n),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableSection {
    pub t_max: f64,
    pub points: usize,
}

impl Default for TableSection {
    fn default() -> Self {
        Self { t_max: 10.0, points: 101 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "line {}: {key}: {}", self.line, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(text: &str, offset: usize) -> usize {
    let end = offset.min(text.len());
    text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Span of `path` (dotted) in `text`, falling back to the closest
/// enclosing table that exists.
fn locate(text: &str, path: &str) -> Option<Range<usize>> {
    let root = DeTable::parse(text).ok()?;
    let mut table = root.get_ref();
    let mut best = None;
    for part in path.split('.') {
        let (key, value) = table.iter().find(|(k, _)| k.get_ref().as_ref() == part)?;
        best = Some(key.span());
        match value.get_ref() {
            DeValue::Table(t) => table = t,
            _ => break,
        }
    }
    best
}

impl RunConfig {
    /// A config with every default filled in.
    pub fn with_model(model: Model, kappa: f64) -> Self {
        let mut cfg = Self {
            model: ModelSection { model, kappa, q: None, dim: 3 },
            potential: PotentialSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            verify: VerifySection::default(),
            sweep: None,
            table: TableSection::default(),
            output: OutputSection::default(),
        };
        cfg.normalize();
        cfg
    }

    /// Parse and validate. The result is normalized: `q` is always present.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            key: None,
            message: e.message().trim().to_string(),
        })?;
        cfg.normalize();
        cfg.validate().map_err(|(key, message)| {
            let line = locate(text, &key).map_or(1, |s| line_of(text, s.start));
            ConfigError { line, key: Some(key), message }
        })?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    fn normalize(&mut self) {
        if self.model.q.is_none() {
            self.model.q = Some(ModelSpec::default_q(self.model.model));
        }
    }

    pub fn model_spec(&self) -> ModelSpec {
        let q = self.model.q.unwrap_or_else(|| ModelSpec::default_q(self.model.model));
        ModelSpec { model: self.model.model, kappa: self.model.kappa, q, dim: self.model.dim, reference: false }
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        let p = &self.potential;
        match p.shape {
            ShapeName::Constant => PotentialSpec::constant(p.v_infty),
            ShapeName::GaussianWell => PotentialSpec::gaussian_well(p.v_infty, p.depth, p.width),
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.model_spec(), self.potential_spec());
        c.grid = GridSettings { nodes: self.grid.nodes, radius: self.grid.radius, adaptive: self.grid.adaptive };
        c.path_points = self.solver.path_points;
        c.descent_tol = self.solver.descent_tol;
        c.max_iters = self.solver.max_iters;
        c.seed_amplitude = self.solver.seed_amplitude;
        c.seed_radius = self.solver.seed_radius;
        c
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            residual_tol: self.verify.residual_tol,
            pohozaev_tol: self.verify.pohozaev_tol,
            decay_r2: self.verify.decay_r2,
        }
    }

    /// Cross-field checks. Errors name the dotted key they concern.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let fail = |key: &str, msg: String| Err((key.to_string(), msg));
        if let Err(e) = self.solver_config().validate() {
            return fail(core_error_key(&e), e.to_string());
        }
        for (key, value) in [
            ("verify.residual_tol", self.verify.residual_tol),
            ("verify.pohozaev_tol", self.verify.pohozaev_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return fail(key, format!("{value} must be positive"));
            }
        }
        if !(self.verify.decay_r2 > 0.0 && self.verify.decay_r2 <= 1.0) {
            return fail("verify.decay_r2", format!("{} must lie in (0, 1]", self.verify.decay_r2));
        }
        if !(self.table.t_max.is_finite() && self.table.t_max > 0.0) {
            return fail("table.t_max", format!("{} must be positive", self.table.t_max));
        }
        if self.table.points < 2 {
            return fail("table.points", "need at least 2 points".into());
        }
        if let Some(s) = &self.sweep {
            self.validate_sweep(s)?;
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepSection) -> Result<(), (String, String)> {
        let fail = |key: &str, msg: &str| Err((key.to_string(), msg.to_string()));
        let range = [s.kappa_min.is_some(), s.kappa_max.is_some(), s.count.is_some()];
        match (&s.kappas, range) {
            (Some(_), r) if r.iter().any(|&x| x) => {
                return fail("sweep.kappas", "give either kappas or kappa_min/kappa_max/count, not both")
            }
            (None, [true, true, true]) => {
                let (lo, hi, n) = (s.kappa_min.unwrap_or(0.0), s.kappa_max.unwrap_or(0.0), s.count.unwrap_or(0));
                if !(lo > 0.0 && lo.is_finite()) {
                    return fail("sweep.kappa_min", "must be positive");
                }
                if !(hi > lo && hi.is_finite()) {
                    return fail("sweep.kappa_max", "must exceed kappa_min");
                }
                if n < 2 {
                    return fail("sweep.count", "need at least 2 points");
                }
            }
            (None, _) => return fail("sweep", "needs kappas or all of kappa_min, kappa_max, count"),
            (Some(k), _) => {
                if k.is_empty() {
                    return fail("sweep.kappas", "empty list");
                }
                if k.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return fail("sweep.kappas", "values must be positive");
                }
                if k.windows(2).any(|w| w[1] <= w[0]) {
                    return fail("sweep.kappas", "values must be strictly increasing");
                }
            }
        }
        let values = s.values();
        for &kappa in &values {
            let mut spec = self.model_spec();
            spec.kappa = kappa;
            if let Err(e) = spec.validate() {
                return Err(("sweep".to_string(), e.to_string()));
            }
        }
        if let Some(tol) = s.threshold_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return fail("sweep.threshold_tol", "must be positive");
            }
        }
        Ok(())
    }
}

/// Best guess at which key a core validation error refers to.
fn core_error_key(e: &CoreError) -> &'static str {
    let reason = match e {
        CoreError::InvalidModel { reason }
        | CoreError::InvalidPotential { reason }
        | CoreError::InvalidGrid { reason }
        | CoreError::InvalidSolver { reason } => reason.as_str(),
        _ => "",
    };
    match e {
        CoreError::InvalidModel { .. } if reason.starts_with("dimension") => "model.dim",
        CoreError::InvalidModel { .. } if reason.starts_with("q =") => "model.q",
        CoreError::InvalidModel { .. } => "model.kappa",
        CoreError::InvalidPotential { .. } if reason.starts_with("well depth") => "potential.depth",
        CoreError::InvalidPotential { .. } if reason.starts_with("well width") => "potential.width",
        CoreError::InvalidPotential { .. } => "potential.v_infty",
        CoreError::InvalidGrid { .. } if reason.starts_with("radius") => "grid.radius",
        CoreError::InvalidGrid { .. } if reason.starts_with("dimension") => "model.dim",
        CoreError::InvalidGrid { .. } => "grid.nodes",
        CoreError::InvalidSolver { .. } => {
            ["path_points", "descent_tol", "max_iters", "seed_amplitude", "seed_radius"]
                .into_iter()
                .find(|k| reason.starts_with(k))
                .map_or("solver", |k| match k {
                    "path_points" => "solver.path_points",
                    "descent_tol" => "solver.descent_tol",
                    "max_iters" => "solver.max_iters",
                    "seed_amplitude" => "solver.seed_amplitude",
                    _ => "solver.seed_radius",
                })
        }
        _ => "model",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::parse("[model]\nmodel = \"power_q\"\nkappa = 0.02\n").unwrap();
        assert_eq!(cfg.model.q, Some(3.0));
        assert_eq!(cfg.grid.nodes, 2001);
        assert_eq!(cfg.potential.shape, ShapeName::Constant);
    }

    #[test]
    fn line_of_counts_newlines() {
        assert_eq!(line_of("a\nb\nc", 0), 1);
        assert_eq!(line_of("a\nb\nc", 2), 2);
        assert_eq!(line_of("a\nb\nc", 4), 3);
    }

    #[test]
    fn locate_nested_key() {
        let text = "[model]\nmodel = \"saturable\"\n\nkappa = 0.4\n";
        let span = locate(text, "model.kappa").unwrap();
        assert_eq!(line_of(text, span.start), 4);
    }
}
