use serde::{Deserialize, Serialize};
use std::fmt;

/// The two gates used by graph-state preparation circuits. Sites are 0-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    Cz(usize, usize),
}

impl Gate {
    /// Relabel the gate's qubits through `f`.
    pub fn map_sites(self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::Cz(a, b) => Gate::Cz(f(a), f(b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H{q}"),
            Gate::Cz(a, b) => write!(f, "CZ({a},{b})"),
        }
    }
}

/// Chain boundary handling for block windows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            "open" | "obc" => Ok(Boundary::Open),
            other => Err(format!("unknown boundary '{other}' (expected periodic or open)")),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        })
    }
}

/// Map the `n` vertices of a block onto chain sites starting at `start`.
/// Vertex `k` (0-indexed) lands on `start + k`, wrapped when periodic.
pub fn window_sites(start: usize, width: usize, chain: usize, boundary: Boundary) -> crate::Result<Vec<usize>> {
    if width > chain || start >= chain {
        return Err(crate::Error::BlockOverflow { width, start, n: chain });
    }
    match boundary {
        Boundary::Periodic => Ok((0..width).map(|k| (start + k) % chain).collect()),
        Boundary::Open => {
            if start + width > chain {
                Err(crate::Error::BlockOverflow { width, start, n: chain })
            } else {
                Ok((start..start + width).collect())
            }
        }
    }
}

/// Entropy unit: log base 2 (bits) or e (nats).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyUnit {
    #[default]
    Bits,
    Nats,
}

impl EntropyUnit {
    /// Multiplier converting an entropy in bits to this unit.
    pub fn per_bit(self) -> f64 {
        match self {
            EntropyUnit::Bits => 1.0,
            EntropyUnit::Nats => std::f64::consts::LN_2,
        }
    }
}

impl std::str::FromStr for EntropyUnit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "bits" | "bit" => Ok(EntropyUnit::Bits),
            "e" | "nats" | "nat" => Ok(EntropyUnit::Nats),
            other => Err(format!("unknown log base '{other}' (expected 2 or e)")),
        }
    }
}

impl fmt::Display for EntropyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntropyUnit::Bits => "2",
            EntropyUnit::Nats => "e",
        })
    }
}
