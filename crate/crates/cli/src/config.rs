//! Flat `key = value` run configuration. Later sources override earlier ones:
//! defaults, then the config file, then command-line flags.

use crate::block::resolve_block;
use graphblock::engine::{default_probe_site, OtocProbe, PlacementPolicy};
use graphblock::{Boundary, EnsembleConfig, EntropyUnit, GraphSpec, Letter, Region};
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{BuildHasher, Hasher};
use std::path::Path;

pub const KEYS: &[(&str, &str)] = &[
    ("block", "star-N, path-N, ring-N, complete-N, nN-gK (catalog row) or N:u-v,..."),
    ("n_sites", "chain length N (default 200)"),
    ("alpha", "sparsity in (0, 1] (default 0.5)"),
    ("boundary", "periodic or open"),
    ("layers", "depth T, or auto"),
    ("realizations", "ensemble size R (default 200)"),
    ("seed", "master seed; generated and recorded when absent"),
    ("log_base", "2 (bits) or e (nats)"),
    ("otoc_site", "1-indexed site of the initial operator (default ceil(N/2))"),
    ("otoc_initial", "initial Pauli letter (default X)"),
    ("otoc_probe", "probe Pauli letter (default Y)"),
    ("region_start", "1-indexed first site of the entropy region (default 1)"),
    ("region_len", "entropy region length (default N/2)"),
    ("placement", "uniform or rejection"),
    ("threshold", "OTOC front threshold c* (default 0.1)"),
];

/// A bad configuration value, reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), reason: reason.into() }
}

#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(&format!("line {}", i + 1), format!("expected key = value, got '{line}'")))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(bad(key, "unknown key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let (k, v) = pair.split_once('=').ok_or_else(|| bad(pair, "expected key=value"))?;
        self.set(k.trim(), v.trim())
    }

    pub fn merge(&mut self, over: &Settings) {
        self.values.extend(over.values.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| bad(key, format!("'{v}': {e}")))).transpose()
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        self.resolve_with(None)
    }

    /// Build the ensemble configuration, with `block` taking the place of the
    /// `block` key when given.
    pub fn resolve_with(&self, block: Option<GraphSpec>) -> Result<Resolved, ConfigError> {
        let block = match block {
            Some(g) => g,
            None => {
                let spec = self.get("block").ok_or_else(|| bad("block", "required"))?;
                resolve_block(spec).map_err(|e| bad("block", e.to_string()))?
            }
        };
        let n_sites = self.parsed::<usize>("n_sites")?.unwrap_or(200);
        let mut cfg = EnsembleConfig::new(block, n_sites);
        if let Some(a) = self.parsed::<f64>("alpha")? {
            cfg.alpha = a;
        }
        if let Some(b) = self.parsed::<Boundary>("boundary")? {
            cfg.boundary = b;
        }
        cfg.layers = match self.get("layers") {
            None | Some("auto") => None,
            Some(_) => self.parsed::<usize>("layers")?,
        };
        if let Some(r) = self.parsed::<usize>("realizations")? {
            cfg.realizations = r;
        }
        let seed = self.parsed::<u64>("seed")?;
        let seed_generated = seed.is_none();
        cfg.master_seed = seed.unwrap_or_else(generated_seed);
        if let Some(u) = self.parsed::<EntropyUnit>("log_base")? {
            cfg.log_base = u;
        }
        let site = match self.parsed::<usize>("otoc_site")? {
            Some(0) => return Err(bad("otoc_site", "sites are 1-indexed")),
            Some(s) => s - 1,
            None => default_probe_site(n_sites.max(1)),
        };
        cfg.otoc_probe = OtocProbe {
            site,
            initial: self.parsed::<Letter>("otoc_initial")?.unwrap_or(Letter::X),
            probe: self.parsed::<Letter>("otoc_probe")?.unwrap_or(Letter::Y),
        };
        let start = match self.parsed::<usize>("region_start")? {
            Some(0) => return Err(bad("region_start", "sites are 1-indexed")),
            Some(s) => s - 1,
            None => 0,
        };
        cfg.entropy_region = Region::new(start, self.parsed::<usize>("region_len")?.unwrap_or(n_sites / 2));
        if let Some(p) = self.parsed::<PlacementPolicy>("placement")? {
            cfg.placement = p;
        }
        let threshold =
            self.parsed::<f64>("threshold")?.unwrap_or(graphblock::analysis::FrontFitPolicy::default().threshold);
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(bad("threshold", format!("must lie in (0, 1), got {threshold}")));
        }
        Ok(Resolved { config: cfg, threshold, seed_generated })
    }
}

#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: EnsembleConfig,
    pub threshold: f64,
    pub seed_generated: bool,
}

fn generated_seed() -> u64 {
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos()));
    h.finish()
}
