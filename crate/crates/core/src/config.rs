//! The JSON run configuration shared by every subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::inference::InferenceConfig;
use crate::io::read_json;
use crate::model::HyperParams;

/// Shape of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_observed: usize,
    pub n_instances: usize,
    /// Redraw unlinked factors so that every generated factor reaches the data.
    pub linked_factors: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_observed: 16,
            n_instances: 200,
            linked_factors: false,
        }
    }
}

/// Every section is optional; missing sections and keys take their
/// defaults, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfigFile {
    pub hyper: HyperParams,
    pub dataset: DatasetConfig,
    pub inference: InferenceConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfigFile {
    /// Reads and validates a configuration; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: RunConfigFile = match path {
            Some(p) => read_json(p)?,
            None => RunConfigFile::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |section: &str, r: Result<()>| r.map_err(|e| Error::Config(format!("{section}: {e}")));
        wrap("hyper", self.hyper.validate())?;
        wrap("inference", self.inference.validate())?;
        wrap("experiment", self.experiment.validate())?;
        if self.dataset.n_observed == 0 {
            return Err(Error::Config("dataset: n_observed must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: RunConfigFile =
            serde_json::from_str(r#"{"inference": {"iterations": 5, "init_k": {"uniform": {"lo": 3, "hi": 10}}}}"#)
                .unwrap();
        assert_eq!(cfg.inference.iterations, 5);
        assert_eq!(cfg.hyper, HyperParams::default());
        assert!(cfg.validate().is_ok());
        let json = serde_json::to_string(&RunConfigFile::default()).unwrap();
        assert_eq!(serde_json::from_str::<RunConfigFile>(&json).unwrap(), RunConfigFile::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(serde_json::from_str::<RunConfigFile>(r#"{"hyperr": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfigFile>(r#"{"inference": {"iters": 3}}"#).is_err());
        let cfg: RunConfigFile = serde_json::from_str(r#"{"inference": {"iterations": 0}}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg: RunConfigFile = serde_json::from_str(r#"{"hyper": {"sigma_floor": 2.0}}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_errors_carry_locations() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, "{\n  \"hyper\": {\n    \"sigma_top\": \"x\"\n  }\n}\n").unwrap();
        match RunConfigFile::load(Some(&p)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
