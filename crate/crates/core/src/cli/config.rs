use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::ChainParams;
use crate::error::{Error, Result};
use crate::fock::DEFAULT_DIM_GUARD;

/// One experiment grid. TOML by default; JSON when the file ends in
/// `.json` or starts with `{`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "L", deserialize_with = "one_or_many")]
    pub l: Vec<usize>,
    #[serde(rename = "L_A", default)]
    pub l_a: Option<usize>,
    #[serde(default, deserialize_with = "opt_one_or_many")]
    pub n_max: Option<Vec<usize>>,
    /// Inclusive `[low, high]` scanned by the convergence protocol.
    #[serde(default)]
    pub n_max_range: Option<[usize; 2]>,
    #[serde(rename = "N_cap", default)]
    pub n_cap: Option<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub beta: Vec<f64>,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub mu: f64,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_dim_guard")]
    pub dim_guard: usize,
    #[serde(default = "default_sector_cutoff")]
    pub sector_cutoff: f64,
    #[serde(default)]
    pub pinsker: bool,
    #[serde(default = "default_converge_tol")]
    pub converge_tol: f64,
    /// Wall-clock budget in seconds for a convergence scan.
    #[serde(default)]
    pub time_budget: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_quad_tol() -> f64 {
    1e-12
}

fn default_dim_guard() -> usize {
    DEFAULT_DIM_GUARD
}

fn default_sector_cutoff() -> f64 {
    1e-15
}

fn default_converge_tol() -> f64 {
    1e-4
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
    d: D,
) -> std::result::Result<Vec<T>, D::Error> {
    OneOrMany::deserialize(d).map(Vec::from)
}

fn opt_one_or_many<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
    d: D,
) -> std::result::Result<Option<Vec<T>>, D::Error> {
    Option::<OneOrMany<T>>::deserialize(d).map(|v| v.map(Vec::from))
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let json =
            path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        Self::parse(&text, json)
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let config: ExperimentConfig = if json {
            serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| config_error(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(config_error(format!("{name} must be > 0, got {x}")))
            }
        };
        if self.d == 0 {
            return Err(config_error("d must be >= 1"));
        }
        if self.l.is_empty() || self.l.iter().any(|&l| l < 2) {
            return Err(config_error("every L must be >= 2"));
        }
        if let Some(w) = self.l_a {
            if let Some(&l) = self.l.iter().find(|&&l| w == 0 || w >= l) {
                return Err(config_error(format!("L_A = {w} must lie in 1..{l}")));
            }
        }
        match (&self.n_max, &self.n_max_range) {
            (Some(_), Some(_)) => {
                return Err(config_error("give either n_max or n_max_range, not both"))
            }
            (None, None) => return Err(config_error("one of n_max or n_max_range is required")),
            (Some(v), None) if v.is_empty() || v.contains(&0) => {
                return Err(config_error("n_max values must be >= 1"));
            }
            (None, Some([lo, hi])) if *lo == 0 || lo >= hi => {
                return Err(config_error("n_max_range needs 1 <= low < high"));
            }
            _ => {}
        }
        if self.beta.is_empty() {
            return Err(config_error("beta list is empty"));
        }
        for &b in &self.beta {
            positive("beta", b)?;
        }
        if !(self.j >= 0.0 && self.j.is_finite()) {
            return Err(config_error(format!("J must be >= 0, got {}", self.j)));
        }
        positive("U", self.u)?;
        positive("mu", self.mu)?;
        if let Some(g) = self.gamma {
            positive("gamma", g)?;
        }
        positive("quad_tol", self.quad_tol)?;
        positive("converge_tol", self.converge_tol)?;
        if let Some(t) = self.time_budget {
            positive("time_budget", t)?;
        }
        if !(self.sector_cutoff >= 0.0) {
            return Err(config_error("sector_cutoff must be >= 0"));
        }
        Ok(())
    }

    /// Chain parameters for one side length and truncation.
    pub fn params(&self, side: usize, n_max: usize) -> ChainParams {
        let mut p = ChainParams::new(self.d, side, n_max, self.j, self.u, self.mu);
        p.width = self.l_a;
        p.n_cap = self.n_cap;
        p.gamma = self.gamma;
        p.quad_tol = self.quad_tol;
        p.dim_guard = self.dim_guard;
        p.sector_cutoff = self.sector_cutoff;
        p.pinsker = self.pinsker;
        p
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring the output path.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&ExperimentConfig {
            out: None,
            ..self.clone()
        })
        .expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "d = 1\nL = 4\nL_A = 2\nn_max = 3\nbeta = 1.0\nJ = 1.0\nU = 1.0\nmu = 1.0\n";

    #[test]
    fn minimal_toml() {
        let c = ExperimentConfig::parse(MINIMAL, false).unwrap();
        assert_eq!(c.l, vec![4]);
        assert_eq!(c.n_max, Some(vec![3]));
        assert_eq!(c.beta, vec![1.0]);
        assert_eq!(c.dim_guard, DEFAULT_DIM_GUARD);
        let p = c.params(4, 3);
        assert_eq!(p.width(), 2);
    }

    #[test]
    fn json_matches_toml() {
        let json = r#"{"d": 1, "L": [4], "L_A": 2, "n_max": 3, "beta": [1.0], "J": 1.0, "U": 1.0, "mu": 1.0}"#;
        let a = ExperimentConfig::parse(json, true).unwrap();
        let b = ExperimentConfig::parse(MINIMAL, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn hypotheses_checked_at_parse_time() {
        for bad in ["U = 1.0", "mu = 1.0", "J = 1.0", "beta = 1.0"] {
            let replaced = match bad {
                "U = 1.0" => "U = 0.0",
                "mu = 1.0" => "mu = -1.0",
                "J = 1.0" => "J = -0.5",
                _ => "beta = [1.0, 0.0]",
            };
            let text = MINIMAL.replace(bad, replaced);
            let err = ExperimentConfig::parse(&text, false).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn unknown_and_conflicting_keys_rejected() {
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}lattice = 3\n"), false).is_err());
        assert!(
            ExperimentConfig::parse(&format!("{MINIMAL}n_max_range = [2, 4]\n"), false).is_err()
        );
        let range = MINIMAL.replace("n_max = 3", "n_max_range = [3, 3]");
        assert!(ExperimentConfig::parse(&range, false).is_err());
        assert!(ExperimentConfig::parse(&MINIMAL.replace("L_A = 2", "L_A = 4"), false).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::parse(MINIMAL, false).unwrap();
        let b = ExperimentConfig::parse(&MINIMAL.replace("mu = 1.0", "mu = 1.5"), false).unwrap();
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), b.hash());
        let mut moved = a.clone();
        moved.out = Some("elsewhere".into());
        assert_eq!(a.hash(), moved.hash());
    }
}
