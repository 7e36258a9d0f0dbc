//! Pipeline configuration: a TOML file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dbgraph::embeddings::{DEFAULT_DIM, DEFAULT_THRESHOLD, DEFAULT_TILE};
use dbgraph::ged::DEFAULT_EXACT_NODE_LIMIT;
use dbgraph::profiler::DEFAULT_KL_EPSILON;
use dbgraph::serializer::DEFAULT_SAMPLES_PER_COLUMN;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus_root: PathBuf,
    pub output_dir: PathBuf,
    pub samples_per_column: usize,
    /// train : val : test.
    pub split_ratios: [u32; 3],
    pub seed: u64,
    pub negatives_k: usize,
    pub threshold: f64,
    pub tile: usize,
    /// 0 lets rayon decide.
    pub workers: usize,
    /// Prefix of a `.f32le` / `.meta.json` pair.
    pub embedding_store: Option<PathBuf>,
    pub embedding_endpoint: Option<String>,
    pub embedding_dim: usize,
    pub batch_size: usize,
    pub max_retries: usize,
    pub request_timeout_secs: u64,
    pub louvain_max_passes: usize,
    pub unit_weights: bool,
    pub ged_exact_node_limit: usize,
    pub kl_epsilon: f64,
    pub symmetric_kl: bool,
    /// `db_id<TAB>cluster` file.
    pub cluster_labels: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus_root: PathBuf::from("corpus"),
            output_dir: PathBuf::from("out"),
            samples_per_column: DEFAULT_SAMPLES_PER_COLUMN,
            split_ratios: [7, 1, 2],
            seed: 0,
            negatives_k: 6,
            threshold: DEFAULT_THRESHOLD,
            tile: DEFAULT_TILE,
            workers: 0,
            embedding_store: None,
            embedding_endpoint: None,
            embedding_dim: DEFAULT_DIM,
            batch_size: 32,
            max_retries: 3,
            request_timeout_secs: 60,
            louvain_max_passes: 32,
            unit_weights: false,
            ged_exact_node_limit: DEFAULT_EXACT_NODE_LIMIT,
            kl_epsilon: DEFAULT_KL_EPSILON,
            symmetric_kl: false,
            cluster_labels: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

/// A validated config with paths resolved against the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: PipelineConfig,
    /// SHA-256 of the config as written (after overrides), output_dir excluded.
    pub config_sha256: String,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if !(self.threshold > -1.0 && self.threshold <= 1.0) {
            return fail(format!("threshold {} outside (-1, 1]", self.threshold));
        }
        if self.negatives_k == 0 {
            return fail("negatives_k must be >= 1".into());
        }
        if self.split_ratios.contains(&0) {
            return fail("split ratios must be positive".into());
        }
        for (name, v) in [
            ("samples_per_column", self.samples_per_column),
            ("tile", self.tile),
            ("embedding_dim", self.embedding_dim),
            ("batch_size", self.batch_size),
        ] {
            if v == 0 {
                return fail(format!("{name} must be >= 1"));
            }
        }
        if self.kl_epsilon.is_nan() || self.kl_epsilon <= 0.0 {
            return fail("kl_epsilon must be positive".into());
        }
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(t) = o.threshold {
            self.threshold = t;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
    }

    pub fn sha256(&self) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = PathBuf::new();
        let json = serde_json::to_string(&hashed).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus_root);
        join(&mut self.output_dir);
        if let Some(p) = self.embedding_store.as_mut() {
            join(p);
        }
        if let Some(p) = self.cluster_labels.as_mut() {
            join(p);
        }
    }
}

impl Settings {
    pub fn from_config(mut config: PipelineConfig, base: &Path, overrides: &Overrides) -> Result<Self> {
        config.apply(overrides);
        config.validate()?;
        let config_sha256 = config.sha256();
        config.resolve(base);
        if let Some(out) = &overrides.output_dir {
            config.output_dir = out.clone();
        }
        Ok(Settings { config, config_sha256 })
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = PipelineConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_config(config, base, overrides)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let c = PipelineConfig::parse("corpus_root = \"dbs\"\nseed = 7\n").unwrap();
        assert_eq!(c.corpus_root, PathBuf::from("dbs"));
        assert_eq!((c.seed, c.negatives_k, c.threshold), (7, 6, 0.94));
        assert_eq!(c.split_ratios, [7, 1, 2]);
        assert_eq!(c.embedding_dim, 768);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(PipelineConfig::parse("treshold = 0.9\n").is_err());
    }

    #[test]
    fn invariants() {
        for bad in ["threshold = -1.0", "threshold = 1.5", "negatives_k = 0", "split_ratios = [7, 0, 2]"] {
            let c = PipelineConfig::parse(bad).unwrap();
            assert!(c.validate().is_err(), "{bad}");
        }
        assert!(PipelineConfig::parse("threshold = 1.0").unwrap().validate().is_ok());
    }

    #[test]
    fn overrides_win_and_output_dir_is_not_hashed() {
        let base = PipelineConfig::parse("seed = 1\noutput_dir = \"a\"\n").unwrap();
        let o = Overrides {
            seed: Some(9),
            threshold: Some(0.5),
            workers: Some(2),
            output_dir: Some(PathBuf::from("/tmp/x")),
        };
        let s = Settings::from_config(base.clone(), Path::new("/cfg"), &o).unwrap();
        assert_eq!((s.config.seed, s.config.threshold, s.config.workers), (9, 0.5, 2));
        assert_eq!(s.config.output_dir, PathBuf::from("/tmp/x"));
        assert_eq!(s.config.corpus_root, PathBuf::from("/cfg/corpus"));

        let mut other = base.clone();
        other.output_dir = PathBuf::from("b");
        assert_eq!(base.sha256(), other.sha256());
        other.seed = 2;
        assert_ne!(base.sha256(), other.sha256());
    }
}
