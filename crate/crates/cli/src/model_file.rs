use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use singmech::lagrangian::{LagrangianModel, RankConfig};
use singmech::partial::AnalysisConfig;

use crate::{resolve_seed, CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub seed: Option<u64>,
    /// Samples for rank decisions.
    pub samples: Option<usize>,
    /// Relative pivot threshold for rank decisions.
    pub threshold: Option<f64>,
    /// Samples and tolerance of the numeric zero test.
    pub zero_samples: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub coordinates: Vec<String>,
    pub lagrangian: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub sampling: Sampling,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("malformed model file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        ModelFile::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn model(&self) -> Result<LagrangianModel> {
        let coords: Vec<&str> = self.coordinates.iter().map(String::as_str).collect();
        Ok(LagrangianModel::new(self.name.clone(), &coords, &self.lagrangian, self.parameters.clone())?)
    }

    /// Analysis settings; `seed` overrides the file.
    pub fn config(&self, seed: Option<u64>) -> Result<AnalysisConfig> {
        let s = &self.sampling;
        let defaults = AnalysisConfig::default();
        let rank = RankConfig {
            seed: resolve_seed(seed, s.seed)?,
            samples: s.samples.unwrap_or(defaults.rank.samples),
            threshold: s.threshold.unwrap_or(defaults.rank.threshold),
        };
        if rank.samples == 0 || !(rank.threshold > 0.0) {
            return Err(CliError::Input("sampling.samples must be positive and sampling.threshold > 0".into()));
        }
        Ok(AnalysisConfig {
            rank,
            zero_samples: s.zero_samples.unwrap_or(defaults.zero_samples),
            tol: s.tolerance.unwrap_or(defaults.tol),
        })
    }
}

pub fn load_model(path: &Path) -> Result<(LagrangianModel, ModelFile)> {
    let file = ModelFile::read(path)?;
    Ok((file.model()?, file))
}
