use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toric_bath::couplings::{build_pattern_square, CouplingPattern, ModelParams};
use toric_bath::decoder::ErrorList;
use toric_bath::geometry::CodeLattice;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PatternSpec {
    Uniform,
    Square { a_strong: f64, a_weak: f64 },
}

impl PatternSpec {
    pub fn build(&self, lattice: &CodeLattice, a: f64) -> Result<CouplingPattern, CliError> {
        Ok(match *self {
            PatternSpec::Uniform => CouplingPattern::uniform(lattice, a),
            PatternSpec::Square { a_strong, a_weak } => {
                build_pattern_square(lattice, a_strong, a_weak)?
            }
        })
    }
}

/// Everything one run needs. Unused fields are ignored by experiments that
/// do not consume them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<PatternSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_events: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decode_stride: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Code sizes for `sum-scan` and `mu-scan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// `beta delta(0)` grid for `meanfield` and `simulate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_delta0: Option<Vec<f64>>,
    /// Bath sizes for `oracle-displacement`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<usize>>,
    /// Bath separations for `oracle-displacement`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<[i64; 3]>>,
    /// Wavevectors in units of `2 pi / Lambda` for `chi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<[i64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_refine: Option<usize>,
    /// Moment orders for `moments`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wick_xi: Option<f64>,
    /// Chemical offset for `oracle-density`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chem_offset: Option<f64>,
    /// Weak amplitudes scanned by `hinder`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_weak: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeded_pairs: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupied: Option<Vec<usize>>,
    /// Also write the single-particle spectrum (`oracle-density`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_eigenvalues: Option<bool>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::InvalidParameter(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn pattern(&self) -> PatternSpec {
        self.pattern.clone().unwrap_or(PatternSpec::Uniform)
    }

    /// Master seed; required by stochastic experiments.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::InvalidParameter("seed: stochastic experiments need a master seed".into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_json(r#"{"params": {"a": 1.0, "t": 1.0, "beta": 0.5, "l": 8}}"#)
            .unwrap();
        assert_eq!(c.params.l, 8);
        assert_eq!(c.pattern(), PatternSpec::Uniform);
        assert!(c.require_seed().is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{"experiment":"hinder","params":{"a":1.0,"t":1.0,"beta":0.3,"l":16,"rate_law":"metropolis"},
            "pattern":{"kind":"square","a_strong":1.0,"a_weak":0.5},"seed":7,"a_weak":[0.8,0.5],"seeded_pairs":[[1,2]]}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_json(
            r#"{"params": {"a": 1, "t": 1, "beta": 1, "l": 8}, "bogus": 1}"#
        )
        .is_err());
    }
}
