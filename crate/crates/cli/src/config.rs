//! TOML run configuration: one optional section per suite, every field
//! optional. Command-line flags override anything set here.

use std::path::Path;

use dslab_core::exact::parse_rational;
use dslab_core::quad::QuadratureConfig;
use dslab_core::suites::{BridgeGrid, GenfunGrid, WalkGrid};
use dslab_core::Rational;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub gamma: GammaSection,
    #[serde(default)]
    pub integrals: IntegralsSection,
    #[serde(default)]
    pub walks: GridSection,
    #[serde(default)]
    pub genfun: GenfunSection,
    #[serde(default)]
    pub bridge: BridgeSection,
    #[serde(default)]
    pub simulate: SimulateSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    pub mu_max: Option<u64>,
    pub nu_max: Option<u64>,
    pub r_max: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralsSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<u32>,
    pub laplace_truncation: Option<f64>,
    /// Relative tolerance of the identity checks themselves.
    pub identity_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub level_max: Option<i64>,
    pub n_max: Option<u64>,
    pub probabilities: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenfunSection {
    pub order: Option<usize>,
    pub level_max: Option<i64>,
    pub probabilities: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeSection {
    pub r_max: Option<u64>,
    pub probabilities: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub horizon: Option<u64>,
    pub alpha: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let d = QuadratureConfig::default();
        QuadratureConfig {
            rel_tol: self.integrals.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.integrals.abs_tol.unwrap_or(d.abs_tol),
            max_subdivisions: self.integrals.max_subdivisions.unwrap_or(d.max_subdivisions),
            laplace_truncation: self.integrals.laplace_truncation.unwrap_or(d.laplace_truncation),
        }
    }

    pub fn walk_grid(&self) -> Result<WalkGrid, String> {
        let d = WalkGrid::default();
        Ok(WalkGrid {
            level_max: self.walks.level_max.unwrap_or(d.level_max),
            n_max: self.walks.n_max.unwrap_or(d.n_max),
            probabilities: parse_probs(&self.walks.probabilities, d.probabilities)?,
        })
    }

    pub fn genfun_grid(&self) -> Result<GenfunGrid, String> {
        let d = GenfunGrid::default();
        Ok(GenfunGrid {
            order: self.genfun.order.unwrap_or(d.order),
            level_max: self.genfun.level_max.unwrap_or(d.level_max),
            probabilities: parse_probs(&self.genfun.probabilities, d.probabilities)?,
        })
    }

    pub fn bridge_grid(&self) -> Result<BridgeGrid, String> {
        let d = BridgeGrid::default();
        Ok(BridgeGrid {
            r_max: self.bridge.r_max.unwrap_or(d.r_max),
            probabilities: parse_probs(&self.bridge.probabilities, d.probabilities)?,
        })
    }
}

fn parse_probs(
    given: &Option<Vec<String>>,
    fallback: Vec<Rational>,
) -> Result<Vec<Rational>, String> {
    match given {
        None => Ok(fallback),
        Some(list) => list
            .iter()
            .map(|s| parse_rational(s).map_err(|e| format!("bad probability {s:?}: {e}")))
            .collect(),
    }
}
