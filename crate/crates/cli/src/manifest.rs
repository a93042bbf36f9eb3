use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use fpplab::experiments::{ExperimentConfig, EXPERIMENT_SCHEMA, SUMMARY_SCHEMA};
use fpplab::seed::stream;
use fpplab::{Result, SeedChain};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA: &str = "fpplab.manifest/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedStreams {
    pub chain: SeedChain,
    pub points: u64,
    pub speeds: u64,
    pub pairs: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timings {
    pub started_unix: f64,
    pub wall_seconds: f64,
    pub jobs: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub git_describe: String,
    pub config_schema: String,
    pub summary_schema: String,
    pub config: ExperimentConfig,
    pub seeds: SeedStreams,
    pub timings: Timings,
    pub outputs: Vec<OutputFile>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

pub fn hash_file(path: &Path) -> Result<(u64, String)> {
    let bytes = std::fs::read(path)?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

impl RunManifest {
    pub fn new(
        cfg: &ExperimentConfig,
        jobs: usize,
        started_unix: f64,
        wall_seconds: f64,
        dir: &Path,
        files: &[PathBuf],
    ) -> Result<Self> {
        let mut outputs = Vec::with_capacity(files.len());
        for f in files {
            let (bytes, sha256) = hash_file(f)?;
            let rel = f.strip_prefix(dir).unwrap_or(f);
            outputs.push(OutputFile {
                file: rel.to_string_lossy().into_owned(),
                bytes,
                sha256,
            });
        }
        Ok(RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            tool: "fpplab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            git_describe: env!("FPPLAB_GIT_DESCRIBE").into(),
            config_schema: EXPERIMENT_SCHEMA.into(),
            summary_schema: SUMMARY_SCHEMA.into(),
            config: cfg.clone(),
            seeds: SeedStreams {
                chain: SeedChain::new(cfg.seed),
                points: stream::POINTS,
                speeds: stream::SPEEDS,
                pairs: stream::PAIRS,
            },
            timings: Timings {
                started_unix,
                wall_seconds,
                jobs,
            },
            outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let p = dir.join("manifest.json");
        std::fs::write(&p, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(p)
    }
}
