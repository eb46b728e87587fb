//! Run manifest: the command echo, resolved configuration, seeds, and a
//! dataset content hash. Written before training starts; a run is fully
//! reconstructable from it.

use crate::config::RunConfig;
use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;
use vqkan_gan::data::Dataset;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub created_utc: String,
    pub seeds: Vec<u64>,
    pub dataset_fingerprint: String,
    /// Methodological note: the kernel distance runs on raw pixel vectors
    /// with the cubic polynomial kernel, not on network embeddings.
    pub kid_features: String,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: String, seeds: Vec<u64>, dataset: &Dataset, config: RunConfig) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            seeds,
            dataset_fingerprint: fingerprint(dataset),
            kid_features: "raw-pixel cubic polynomial kernel".to_string(),
            config,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self)
            .map_err(|e| CliError::Runtime(format!("cannot write manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Data(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("invalid manifest {}: {e}", path.display())))
    }
}

/// Content hash over dimensions, labels, and byte-quantized pixels.
pub fn fingerprint(dataset: &Dataset) -> String {
    let mut hasher = Sha256::new();
    hasher.update((dataset.width() as u64).to_le_bytes());
    hasher.update((dataset.height() as u64).to_le_bytes());
    hasher.update((dataset.len() as u64).to_le_bytes());
    hasher.update(dataset.labels());
    for image in dataset.images() {
        let bytes: Vec<u8> = image
            .iter()
            .map(|&p| (p.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        hasher.update(&bytes);
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
