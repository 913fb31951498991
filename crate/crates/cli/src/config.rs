//! Problem configuration file.
//!
//! ```toml
//! interval = [0.0, 1.0]
//! n_points = 257
//! t_obs = 1.0
//! alpha = 0.9
//! beta = 1.0
//! gamma = [0.0, 1.0]
//! function = "identity"   # ops only
//! output = "results"      # overridden by --out
//!
//! [lagrangian]
//! kind = "oscillator"     # free | oscillator | linear-velocity
//! coefficients = { mass = 1.0, stiffness = 1.0 }
//!
//! [boundary]
//! q_a = [0.0]
//! q_b = [1.0]
//!
//! [solver]
//! max_iterations = 500
//! gradient_tolerance = 1e-8
//! shrink = 0.5
//! sufficient_decrease = 1e-4
//! memory = 12
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use fracal::action::Lagrangian;
use fracal::builtin::{Free, LinearVelocity, Oscillator};
use fracal::solver::SolveOptions;
use fracal::{Grid, OrderSpec, C64};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub interval: [f64; 2],
    pub n_points: usize,
    pub t_obs: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: [f64; 2],
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub lagrangian: LagrangianConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianConfig {
    pub kind: String,
    #[serde(default)]
    pub coefficients: BTreeMap<String, f64>,
}

impl Default for LagrangianConfig {
    fn default() -> Self {
        LagrangianConfig {
            kind: "free".into(),
            coefficients: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub q_a: Vec<f64>,
    pub q_b: Vec<f64>,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            q_a: vec![0.0],
            q_b: vec![1.0],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: Option<usize>,
    pub gradient_tolerance: Option<f64>,
    pub shrink: Option<f64>,
    pub sufficient_decrease: Option<f64>,
    pub memory: Option<usize>,
}

/// A validated configuration.
pub struct Problem {
    pub grid: Grid,
    pub order: OrderSpec,
    pub lagrangian: Arc<dyn Lagrangian>,
    pub lagrangian_kind: String,
    pub q_a: Vec<f64>,
    pub q_b: Vec<f64>,
    pub solve: SolveOptions,
    pub function: Option<String>,
    pub output: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Problem, CliError> {
    let raw: ProblemConfig = toml::from_str(text).map_err(|e| CliError::Config {
        field: "config".into(),
        reason: e.to_string().trim_end().to_string(),
    })?;
    raw.validate()
}

fn invalid(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn from_core(e: fracal::Error) -> CliError {
    match e {
        fracal::Error::Domain { field, reason } => invalid(field, reason),
        other => CliError::Core(other),
    }
}

impl ProblemConfig {
    fn validate(self) -> Result<Problem, CliError> {
        let [a, b] = self.interval;
        let grid = Grid::new(a, b, self.n_points, self.t_obs).map_err(from_core)?;
        let gamma = C64::new(self.gamma[0], self.gamma[1]);
        let order = OrderSpec::new(self.alpha, self.beta, gamma).map_err(from_core)?;

        let BoundaryConfig { q_a, q_b } = self.boundary;
        if q_a.is_empty() || q_a.len() != q_b.len() {
            return Err(invalid("boundary", "q_a and q_b must be non-empty and of equal length"));
        }
        if q_a.iter().chain(&q_b).any(|v| !v.is_finite()) {
            return Err(invalid("boundary", "boundary values must be finite"));
        }
        let dim = q_a.len();
        let lagrangian = build_lagrangian(&self.lagrangian, dim)?;

        let defaults = SolveOptions::default();
        let s = self.solver;
        let solve = SolveOptions {
            max_iterations: s.max_iterations.unwrap_or(defaults.max_iterations),
            gradient_tolerance: s.gradient_tolerance.unwrap_or(defaults.gradient_tolerance),
            shrink: s.shrink.unwrap_or(defaults.shrink),
            sufficient_decrease: s.sufficient_decrease.unwrap_or(defaults.sufficient_decrease),
            memory: s.memory.unwrap_or(defaults.memory),
            seed_path: None,
        };
        solve.validate().map_err(|e| match e {
            fracal::Error::Domain { field, reason } => invalid(&format!("solver.{field}"), reason),
            other => CliError::Core(other),
        })?;

        Ok(Problem {
            grid,
            order,
            lagrangian,
            lagrangian_kind: self.lagrangian.kind,
            q_a,
            q_b,
            solve,
            function: self.function,
            output: self.output,
        })
    }
}

fn build_lagrangian(cfg: &LagrangianConfig, dim: usize) -> Result<Arc<dyn Lagrangian>, CliError> {
    let allowed: &[&str] = match cfg.kind.as_str() {
        "free" => &["mass"],
        "oscillator" => &["mass", "stiffness"],
        "linear-velocity" => &["coupling", "stiffness"],
        other => {
            return Err(invalid(
                "lagrangian.kind",
                format!("unknown kind `{other}` (expected free, oscillator or linear-velocity)"),
            ))
        }
    };
    for (key, value) in &cfg.coefficients {
        if !allowed.contains(&key.as_str()) {
            return Err(invalid(
                "lagrangian.coefficients",
                format!(
                    "`{key}` is not a coefficient of `{}` (allowed: {})",
                    cfg.kind,
                    allowed.join(", ")
                ),
            ));
        }
        if !value.is_finite() {
            return Err(invalid("lagrangian.coefficients", format!("`{key}` must be finite")));
        }
    }
    let get = |key: &str, default: f64| cfg.coefficients.get(key).copied().unwrap_or(default);
    let l: Arc<dyn Lagrangian> = match cfg.kind.as_str() {
        "free" => Arc::new(Free {
            mass: get("mass", 1.0),
            dim,
        }),
        "oscillator" => Arc::new(Oscillator {
            mass: get("mass", 1.0),
            stiffness: get("stiffness", 1.0),
            dim,
        }),
        _ => Arc::new(LinearVelocity {
            coupling: get("coupling", 1.0),
            stiffness: get("stiffness", 1.0),
            dim,
        }),
    };
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str =
        "interval = [0.0, 1.0]\nn_points = 33\nt_obs = 1.0\nalpha = 0.5\nbeta = 1.0\ngamma = [0.0, -1.0]\n";

    fn field_of(text: &str) -> String {
        match parse(text) {
            Err(CliError::Config { field, .. }) => field,
            Err(other) => panic!("unexpected error {other}"),
            Ok(_) => panic!("accepted invalid config"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let p = parse(BASE).unwrap();
        assert_eq!(p.grid.n_points(), 33);
        assert_eq!(p.lagrangian_kind, "free");
        assert_eq!(p.q_b, vec![1.0]);
        assert_eq!(p.solve.max_iterations, 500);
    }

    #[test]
    fn invalid_fields_are_named() {
        assert_eq!(field_of(&BASE.replace("alpha = 0.5", "alpha = 1.5")), "alpha");
        assert_eq!(field_of(&BASE.replace("n_points = 33", "n_points = 1")), "n_points");
        assert_eq!(field_of(&BASE.replace("t_obs = 1.0", "t_obs = 0.5")), "t_obs");
        assert_eq!(
            field_of(&format!("{BASE}[lagrangian]\nkind = \"quartic\"\n")),
            "lagrangian.kind"
        );
        assert_eq!(
            field_of(&format!(
                "{BASE}[lagrangian]\nkind = \"free\"\ncoefficients = {{ stiffness = 2.0 }}\n"
            )),
            "lagrangian.coefficients"
        );
        assert_eq!(field_of(&format!("{BASE}[solver]\nshrink = 1.5\n")), "solver.shrink");
        assert_eq!(
            field_of(&format!("{BASE}[boundary]\nq_a = [0.0]\nq_b = [1.0, 2.0]\n")),
            "boundary"
        );
        assert_eq!(field_of(&format!("{BASE}unknown = 3\n")), "config");
    }

    #[test]
    fn vector_boundary_sets_dimension() {
        let p = parse(&format!(
            "{BASE}[lagrangian]\nkind = \"oscillator\"\ncoefficients = {{ stiffness = -1.0 }}\n[boundary]\nq_a = [0.0, 1.0]\nq_b = [1.0, 0.0]\n"
        ))
        .unwrap();
        assert_eq!(p.lagrangian.dim(), 2);
    }
}
