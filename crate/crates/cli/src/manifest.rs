use anyhow::{Context, Result};
use graphblock::catalog::{format_fingerprints, PUBLISHED_ROWS};
use graphblock::EnsembleConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the fingerprint table every catalog is reconstructed from.
pub fn catalog_version() -> String {
    format!("sha256:{}", sha256_hex(format_fingerprints(PUBLISHED_ROWS).as_bytes()))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Serialize)]
struct HashedPart<'a> {
    code_version: &'a str,
    catalog_version: &'a str,
    config: &'a EnsembleConfig,
    threshold: f64,
    command: &'a str,
}

/// Deterministic identity of a run: everything that determines its outputs.
pub fn manifest_hash(command: &str, config: &EnsembleConfig, threshold: f64) -> String {
    let catalog = catalog_version();
    let part = HashedPart { code_version: CODE_VERSION, catalog_version: &catalog, config, threshold, command };
    format!("sha256:{}", sha256_hex(&serde_json::to_vec(&part).expect("config serializes")))
}

#[derive(Serialize)]
pub struct RunManifest {
    pub manifest_hash: String,
    pub command: String,
    pub code_version: String,
    pub catalog_version: String,
    pub config: EnsembleConfig,
    pub threshold: f64,
    pub seed_generated: bool,
    pub outputs: Vec<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

/// Output directory: explicit flag, else `GRAPHBLOCK_OUT` (resolved by clap),
/// else `./out`.
pub fn out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag.unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Write a CSV body under a `# manifest` comment line.
pub fn write_csv(path: &Path, hash: &str, body: &str) -> Result<()> {
    fs::write(path, format!("# manifest {hash}\n{body}")).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
