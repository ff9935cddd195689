//! Experiment configuration documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::carleman::DEFAULT_SIGMAS;
use crate::fields::{CoefficientPreset, CoefficientSet, FieldPreset};
use crate::forward::{GridSpec, Resolution, SpaceOrder};
use crate::geometry::{construct_diverse, DiverseConstruction};
use crate::inversion::{QMode, Theorem};
use crate::quad::norm;
use crate::{Error, Result};

pub const CONFIG_SCHEMA: &str = "conewave-config/1";

/// Grid section. `n` falls back to the `--resolution` preset and `l` to the
/// smallest box holding every smooth part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub l: Option<f64>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub order: SpaceOrder,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    0.9
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { l: None, n: None, horizon: 1.0, cfl: 0.9, dt: None, order: SpaceOrder::Second }
    }
}

/// Cone sampling for `traces` and `invert-q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSampling {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_r: usize,
}

impl Default for ConeSampling {
    fn default() -> Self {
        ConeSampling { n_theta: 4, n_phi: 8, n_r: 200 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub coefficients: CoefficientPreset,
    /// Second set for difference experiments (relative q inversion).
    #[serde(default)]
    pub perturbed: Option<CoefficientPreset>,
    /// Perturbation direction for `stability`; scaled by each amplitude.
    #[serde(default)]
    pub direction: Option<CoefficientPreset>,
    #[serde(default = "default_amplitudes")]
    pub amplitudes: Vec<f64>,
    /// Explicit source locations.
    #[serde(default)]
    pub sources: Vec<[f64; 3]>,
    /// Four locations built from a recipe; used when `sources` is empty.
    #[serde(default)]
    pub diverse: Option<DiverseConstruction>,
    /// Radius of the domain checked by `diverse`.
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Expansion order N of the forward pipeline.
    #[serde(default)]
    pub expansion_order: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Weights for `identity`.
    #[serde(default = "default_identity_sigmas")]
    pub identity_sigmas: Vec<f64>,
    #[serde(default = "default_theorem")]
    pub theorem: Theorem,
    #[serde(default = "default_true")]
    pub include_psi: bool,
    #[serde(default = "default_q_mode")]
    pub q_mode: QMode,
    /// Field for `identity`; defaults to a bump in the unit ball.
    #[serde(default)]
    pub field: Option<FieldPreset>,
    #[serde(default)]
    pub cone: ConeSampling,
    /// Sample points for `invert-ab`.
    #[serde(default = "default_points")]
    pub ab_points: usize,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_amplitudes() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1]
}

fn default_rho() -> f64 {
    1.0
}

fn default_taus() -> Vec<f64> {
    vec![-1.5]
}

fn default_sigmas() -> Vec<f64> {
    DEFAULT_SIGMAS.to_vec()
}

fn default_identity_sigmas() -> Vec<f64> {
    vec![0.0, 5.0]
}

fn default_theorem() -> Theorem {
    Theorem::Q
}

fn default_true() -> bool {
    true
}

fn default_q_mode() -> QMode {
    QMode::Absolute
}

fn default_points() -> usize {
    64
}

impl ExperimentConfig {
    /// A minimal valid document.
    pub fn minimal() -> ExperimentConfig {
        serde_json::from_str(&format!("{{\"schema\": \"{CONFIG_SCHEMA}\"}}")).expect("minimal config parses")
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks every clause before any compute; the first failure is named.
    pub fn validate(&self) -> Result<()> {
        let fail = |clause: &str, detail: String| Err(Error::Config(format!("{clause}: {detail}")));
        if self.schema != CONFIG_SCHEMA {
            return fail("schema", format!("expected {CONFIG_SCHEMA:?}, got {:?}", self.schema));
        }
        self.coefficients.build().map_err(|e| Error::Config(format!("coefficients: {e}")))?;
        for (name, p) in [("perturbed", &self.perturbed), ("direction", &self.direction)] {
            if let Some(p) = p {
                p.build().map_err(|e| Error::Config(format!("{name}: {e}")))?;
            }
        }
        if let Some(f) = &self.field {
            f.build().map_err(|e| Error::Config(format!("field: {e}")))?;
        }
        if !(self.rho > 0.0) {
            return fail("rho", format!("must be positive, got {}", self.rho));
        }
        if !self.sources.is_empty() && self.diverse.is_some() {
            return fail("sources", "give either `sources` or `diverse`, not both".into());
        }
        if let Some(d) = &self.diverse {
            construct_diverse(d).map_err(|e| Error::Config(format!("diverse: {e}")))?;
        }
        if self.sources.iter().flatten().any(|v| !v.is_finite()) {
            return fail("sources", "coordinates must be finite".into());
        }
        if self.taus.iter().any(|t| !t.is_finite()) || self.taus.windows(2).any(|w| w[1] <= w[0]) {
            return fail("taus", "must be finite and strictly increasing".into());
        }
        let g = &self.grid;
        if !g.horizon.is_finite() {
            return fail("grid.horizon", "must be finite".into());
        }
        if g.l.is_some_and(|l| !(l > 0.0)) {
            return fail("grid.l", "must be positive".into());
        }
        if g.n.is_some_and(|n| n < 8) {
            return fail("grid.n", "must be at least 8".into());
        }
        self.grid_spec(Resolution::Default).validate().map_err(|e| Error::Config(format!("grid: {e}")))?;
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return fail("sigmas", "need at least one finite non-negative value".into());
        }
        if self.identity_sigmas.iter().any(|s| !s.is_finite()) {
            return fail("identity_sigmas", "must be finite".into());
        }
        if self.amplitudes.iter().any(|a| !a.is_finite()) {
            return fail("amplitudes", "must be finite".into());
        }
        if self.cone.n_theta == 0 || self.cone.n_phi == 0 || self.cone.n_r < 4 {
            return fail("cone", "n_theta and n_phi must be positive and n_r at least 4".into());
        }
        if self.ab_points == 0 {
            return fail("ab_points", "must be positive".into());
        }
        Ok(())
    }

    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        self.coefficients.build()
    }

    pub fn source_locations(&self) -> Result<Vec<[f64; 3]>> {
        match &self.diverse {
            Some(d) => Ok(construct_diverse(d)?.to_vec()),
            None => Ok(self.sources.clone()),
        }
    }

    /// Radius of the ball holding every configured coefficient.
    pub fn coefficient_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for p in [Some(&self.coefficients), self.perturbed.as_ref(), self.direction.as_ref()].into_iter().flatten() {
            if let Ok(cs) = p.build() {
                let b = cs.bounds();
                if b.radius.is_finite() {
                    r = r.max(b.radius);
                }
            }
        }
        if r == 0.0 {
            1.0
        } else {
            r
        }
    }

    pub fn grid_spec(&self, res: Resolution) -> GridSpec {
        let g = &self.grid;
        let n = g.n.unwrap_or(res.cells());
        let base = match g.l {
            Some(l) => GridSpec::new(l, n, g.horizon),
            None => GridSpec::for_support(self.coefficient_radius(), g.horizon, n),
        };
        GridSpec { cfl: g.cfl, dt: g.dt, order: g.order, ..base }
    }

    /// Largest |xi| among the sources, for tau windows.
    pub fn max_source_distance(&self) -> f64 {
        self.source_locations().unwrap_or_default().iter().map(|x| norm(*x)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_is_valid() {
        assert!(ExperimentConfig::minimal().validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{{\"schema\": \"{CONFIG_SCHEMA}\", \"colour\": 1}}");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))));
        let nested = format!("{{\"schema\": \"{CONFIG_SCHEMA}\", \"grid\": {{\"n\": 16, \"size\": 2}}}}");
        assert!(ExperimentConfig::parse(&nested).is_err());
    }

    #[test]
    fn wrong_schema_is_named() {
        let err = ExperimentConfig::parse("{\"schema\": \"conewave-config/0\"}").unwrap_err();
        assert!(err.to_string().contains("schema"), "{err}");
    }

    #[test]
    fn cfl_violation_is_a_config_error() {
        let text = format!("{{\"schema\": \"{CONFIG_SCHEMA}\", \"grid\": {{\"l\": 2.0, \"n\": 16, \"dt\": 1.0}}}}");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(matches!(err, Error::Config(_)) && err.to_string().contains("CFL"), "{err}");
    }

    #[test]
    fn round_trip_through_json() {
        let mut c = ExperimentConfig::minimal();
        c.diverse = Some(DiverseConstruction::Standard { rho: 1.0, n: 2.0 });
        let back = ExperimentConfig::parse(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.source_locations().unwrap().len(), 4);
    }

    #[test]
    fn resolution_sets_cells_unless_given() {
        let c = ExperimentConfig::minimal();
        assert_eq!(c.grid_spec(Resolution::Coarse).n, 24);
        assert_eq!(c.grid_spec(Resolution::Fine).n, 48);
        let mut d = c.clone();
        d.grid.n = Some(20);
        assert_eq!(d.grid_spec(Resolution::Fine).n, 20);
    }
}
