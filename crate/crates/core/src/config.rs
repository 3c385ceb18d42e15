//! Run configuration shared by the command-line tool and the verify suites.
//!
//! A `RunConfig` is a JSON document. Every field has a default, so `{}` is a
//! valid configuration describing [-1, 1] with the unit weight and
//! Lebesgue base measure. Relative file paths inside the document resolve
//! against the directory of the config file.
//!
//! The config hash is the SHA-256 of the canonical JSON serialization of
//! the parsed configuration (defaults filled in), so two documents that
//! differ only in formatting or omitted defaults share a hash.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::equilibrium::{cached_equilibrium, EquilibriumOptions};
use crate::error::{Error, Result};
use crate::fekete::{FeketeOptions, PenaltyOptions};
use crate::measures::{GridMeasure, MomentNeighborhood, Rectangle};
use crate::montecarlo::{BaseMeasure, BaseSpec, ChainOptions};
use crate::vdm::{WeightFunction, WeightSpec};

/// Where the reference measure of a moment neighborhood comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// A measure file: JSON if the extension is `.json`, CSV otherwise.
    Measure { path: PathBuf },
    /// A neighborhood JSON file; its moments (truncated to `k`) are used.
    Moments { path: PathBuf },
    /// The discretized arcsine law of [a, b] on `n` cells.
    Arcsine {
        a: f64,
        b: f64,
        #[serde(default = "default_grid")]
        n: usize,
    },
    /// The equilibrium measure of the configured rectangle and weight.
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub reference: ReferenceSpec,
    pub k: u32,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BmOptions {
    pub k_list: Vec<u32>,
    pub trials: usize,
}

impl Default for BmOptions {
    fn default() -> Self {
        Self {
            k_list: (20..=60).step_by(5).collect(),
            trials: 20,
        }
    }
}

fn default_grid() -> usize {
    512
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rectangle: Rectangle,
    pub weight: WeightSpec,
    pub base: BaseSpec,
    pub d: Option<usize>,
    pub d_list: Option<Vec<usize>>,
    /// Cell count for equilibrium and rate computations.
    pub grid: usize,
    pub neighborhood: Option<NeighborhoodSpec>,
    pub chain: ChainOptions,
    pub fekete: FeketeOptions,
    pub penalty: PenaltyOptions,
    pub equilibrium: EquilibriumOptions,
    pub bm: BmOptions,
    /// Check suites run by `verify`; empty means the default set.
    pub suites: Vec<String>,
    pub seed: u64,
    /// Output paths by name (for example `report`).
    pub outputs: std::collections::BTreeMap<String, PathBuf>,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rectangle: Rectangle::interval(-1.0, 1.0).expect("valid interval"),
            weight: WeightSpec::Unit,
            base: BaseSpec::Lebesgue,
            d: None,
            d_list: None,
            grid: default_grid(),
            neighborhood: None,
            chain: ChainOptions::default(),
            fekete: FeketeOptions::default(),
            penalty: PenaltyOptions::default(),
            equilibrium: EquilibriumOptions::default(),
            bm: BmOptions::default(),
            suites: Vec::new(),
            seed: 0,
            outputs: Default::default(),
            base_dir: None,
        }
    }
}

/// Reads a measure from JSON (by extension) or CSV.
pub fn read_measure(path: &Path) -> Result<GridMeasure> {
    let file = fs::File::open(path)?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    {
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    } else {
        GridMeasure::read_csv(file)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Resolves a path from the document against the config directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn weight(&self) -> Result<WeightFunction> {
        WeightFunction::new(self.weight.clone(), self.rectangle)
    }

    pub fn base_measure(&self) -> Result<BaseMeasure> {
        BaseMeasure::from_spec(&self.base, self.rectangle)
    }

    pub fn require_d(&self) -> Result<usize> {
        self.d
            .ok_or_else(|| Error::InvalidArgument("configuration needs `d`".into()))
    }

    pub fn d_list_or(&self, default: &[usize]) -> Vec<usize> {
        self.d_list.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn reference_measure(&self, spec: &ReferenceSpec) -> Result<GridMeasure> {
        match spec {
            ReferenceSpec::Measure { path } => read_measure(&self.resolve(path)),
            ReferenceSpec::Arcsine { a, b, n } => {
                GridMeasure::arcsine(&Rectangle::interval(*a, *b)?, *n)
            }
            ReferenceSpec::Equilibrium => {
                Ok(
                    cached_equilibrium(&self.rectangle, &self.weight()?, self.grid)?
                        .measure
                        .clone(),
                )
            }
            ReferenceSpec::Moments { .. } => Err(Error::InvalidArgument(
                "a moments reference has no underlying measure".into(),
            )),
        }
    }

    pub fn neighborhood(&self) -> Result<MomentNeighborhood> {
        let spec = self
            .neighborhood
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("configuration needs `neighborhood`".into()))?;
        match &spec.reference {
            ReferenceSpec::Moments { path } => {
                let text = fs::read_to_string(self.resolve(path))?;
                let file: MomentNeighborhood = serde_json::from_str(&text)?;
                if spec.k > file.k() {
                    return Err(Error::InvalidArgument(format!(
                        "k = {} exceeds the {} moments stored in {}",
                        spec.k,
                        file.k(),
                        path.display()
                    )));
                }
                MomentNeighborhood::new(file.reference().truncated(spec.k), spec.epsilon)
            }
            other => {
                MomentNeighborhood::around(&self.reference_measure(other)?, spec.k, spec.epsilon)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_and_hash_ignores_formatting() {
        let a = RunConfig::from_json("{}").unwrap();
        assert_eq!(a, RunConfig::default());
        let b = RunConfig::from_json(r#"{ "seed": 0, "grid": 512 }"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::from_json(r#"{"seed": 1}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"sed": 3}"#).is_err());
    }

    #[test]
    fn arcsine_neighborhood_from_config() {
        let cfg = RunConfig::from_json(
            r#"{"neighborhood": {"reference": {"kind": "arcsine", "a": -1, "b": 1, "n": 256}, "k": 2, "epsilon": 0.1}}"#,
        )
        .unwrap();
        let nb = cfg.neighborhood().unwrap();
        assert_eq!(nb.k(), 2);
        assert!((nb.reference().get(2, 0).unwrap() - 0.5).abs() < 1e-3);
    }
}
