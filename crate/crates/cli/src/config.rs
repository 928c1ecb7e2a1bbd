//! Run configuration: one TOML file, every field defaulted, flags applied
//! on top by `main`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wdaug_core::augment::bt::DEFAULT_PIVOT;
use wdaug_core::augment::eda::EdaParams;
use wdaug_core::augment::llm::GenParams;
use wdaug_core::classify::tables::Average;
use wdaug_core::corpus::ValidationMode;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub split: Split,
    pub augment: Augment,
    pub llm: Llm,
    pub embed: Embed,
    pub bt: Bt,
    pub report: Report,
    /// Hyperparameters for out-of-repo fine-tuning scripts. Carried into the
    /// manifest only.
    pub external_bert: ExternalBert,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub input: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub exemplars: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Split {
    /// Overrides the computed `R` when set.
    pub per_class_test: Option<usize>,
    pub validation_fraction: f64,
    pub validation_mode: ValidationMode,
    pub seed: u64,
}

impl Default for Split {
    fn default() -> Self {
        Split { per_class_test: None, validation_fraction: 0.2, validation_mode: ValidationMode::Stratified, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Eda,
    Bt,
    Llm,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Augment {
    pub method: Method,
    pub eda_alpha: f64,
    /// Chain all four EDA operations instead of picking one per record.
    pub eda_compose: bool,
}

impl Default for Augment {
    fn default() -> Self {
        let eda = EdaParams::default();
        Augment { method: Method::Eda, eda_alpha: eda.alpha, eda_compose: eda.compose }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Llm {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub max_retries: u32,
    pub dedup_retries: u32,
    pub rate_limit_retries: u32,
    pub backoff_base_ms: u64,
    /// Shared cap on in-flight remote calls across all providers.
    pub concurrency: usize,
    pub timeout_secs: u64,
}

impl Default for Llm {
    fn default() -> Self {
        let g = GenParams::default();
        Llm {
            base_url: "https://api.openai.com".into(),
            model: g.model,
            temperature: g.temperature,
            max_tokens: g.max_tokens,
            max_retries: g.max_retries,
            dedup_retries: g.dedup_retries,
            rate_limit_retries: g.rate_limit_retries,
            backoff_base_ms: g.backoff_base_ms,
            concurrency: 4,
            timeout_secs: 60,
        }
    }
}

impl Llm {
    pub fn gen_params(&self) -> GenParams {
        GenParams {
            model: self.model.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            max_retries: self.max_retries,
            dedup_retries: self.dedup_retries,
            rate_limit_retries: self.rate_limit_retries,
            backoff_base_ms: self.backoff_base_ms,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Embed {
    /// Remote embedding service; the builtin embedder is always included.
    pub base_url: Option<String>,
    pub models: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bt {
    pub endpoint: Option<String>,
    pub pivot: String,
}

impl Default for Bt {
    fn default() -> Self {
        Bt { endpoint: None, pivot: DEFAULT_PIVOT.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AverageArg {
    Macro,
    Weighted,
}

impl From<AverageArg> for Average {
    fn from(a: AverageArg) -> Average {
        match a {
            AverageArg::Macro => Average::Macro,
            AverageArg::Weighted => Average::Weighted,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Report {
    pub average: AverageArg,
    pub smoothing: f64,
}

impl Default for Report {
    fn default() -> Self {
        Report { average: AverageArg::Macro, smoothing: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExternalBert {
    pub epochs: u32,
    pub batch_size: u32,
    pub learning_rate: f64,
    pub max_length: u32,
}

impl Default for ExternalBert {
    fn default() -> Self {
        ExternalBert { epochs: 10, batch_size: 32, learning_rate: 3e-5, max_length: 256 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&raw).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), String> {
        for p in [&self.paths.lexicon, &self.paths.exemplars].into_iter().flatten() {
            if !p.is_file() {
                return Err(format!("{}: file not found", p.display()));
            }
        }
        if !(0.0..1.0).contains(&self.split.validation_fraction) {
            return Err(format!("validation_fraction must be in [0, 1), got {}", self.split.validation_fraction));
        }
        if self.report.smoothing <= 0.0 {
            return Err("smoothing must be positive".into());
        }
        if self.llm.concurrency == 0 {
            return Err("llm.concurrency must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig = toml::from_str("").unwrap();
        assert_eq!(c.split.validation_fraction, 0.2);
        assert_eq!(c.llm.concurrency, 4);
        assert_eq!(c.bt.pivot, "fr");
        assert_eq!(c.external_bert.batch_size, 32);
        assert_eq!(c.external_bert.max_length, 256);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn example_config_restates_defaults() {
        let c: RunConfig = toml::from_str(include_str!("../../../configs/example.toml")).unwrap();
        let d = RunConfig::default();
        assert_eq!(c.paths.input.as_deref(), Some(Path::new("data/synthetic_corpus.jsonl")));
        let json = |c: &RunConfig| {
            let mut v = serde_json::to_value(c).unwrap();
            v.as_object_mut().unwrap().remove("paths");
            v
        };
        assert_eq!(json(&c), json(&d));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[llm]\nmodle = \"x\"").is_err());
    }

    #[test]
    fn sections_parse() {
        let c: RunConfig = toml::from_str(
            "[augment]\nmethod = \"llm\"\n[llm]\nbase_url = \"http://x\"\nmodel = \"text-curie-001\"\n[embed]\nmodels = [\"a\", \"b\"]\n[report]\naverage = \"weighted\"",
        )
        .unwrap();
        assert_eq!(c.augment.method, Method::Llm);
        assert_eq!(c.embed.models.len(), 2);
        assert_eq!(c.report.average, AverageArg::Weighted);
    }
}
