//! Declarative run configuration (TOML).
//!
//! ```toml
//! seed = 7
//! format = "json"        # json | csv | md
//! threads = 2
//!
//! [budgets]
//! energy = 4096          # largest |A| for energies
//! gowers = 256           # largest |A| for Gowers norms
//! triples = 128          # largest |A| for collinear triples
//! oracle = 12            # largest |A| for exhaustive searches
//! set_cap = 1048576      # largest derived set
//!
//! [[suite]]
//! claims = ["cs_floor", "e_cs"]
//! families = ["gp:1:2", "random"]
//! sizes = "4..64"        # optional; each claim has defaults
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::DEFAULT_SET_CAP;

/// Per-statistic size limits. Costs grow as `|A|²` for energies, `|A|⁴` for
/// collinear triples, `2^|A|` for exhaustive subset searches, and with the
/// number of distinct fibers for Gowers norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub energy: usize,
    pub gowers: usize,
    pub triples: usize,
    pub oracle: usize,
    pub set_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { energy: 4096, gowers: 256, triples: 128, oracle: 12, set_cap: DEFAULT_SET_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub claims: Vec<String>,
    pub families: Vec<String>,
    #[serde(default)]
    pub sizes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub threads: Option<usize>,
    pub timings: bool,
    pub budgets: Budgets,
    pub suite: Vec<SuiteConfig>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
            seed = 7
            format = "json"
            threads = 2
            [budgets]
            energy = 1024
            [[suite]]
            claims = ["cs_floor", "e_cs"]
            families = ["gp:1:2", "random"]
            sizes = "4..64"
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.budgets.energy, 1024);
        assert_eq!(cfg.budgets.triples, 128);
        assert_eq!(cfg.suite[0].families, vec!["gp:1:2", "random"]);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
