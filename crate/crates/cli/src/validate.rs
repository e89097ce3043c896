//! Strict schema checks for every CSV the tool writes.

use anyhow::{bail, Context, Result};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    Entropy,
    Otoc,
    Sweep,
    Velocities,
    VeGamma,
    VbWp,
}

pub const SWEEP_HEADER: &str = "axis,value,block_name,n,gamma,wp,layers,v_E,v_E_stderr,v_B,v_B_stderr,status";

impl Schema {
    pub fn header(self) -> &'static str {
        match self {
            Schema::Entropy => "t,S_mean,S_var,R",
            Schema::Otoc => "t,x,C_mean",
            Schema::Sweep => SWEEP_HEADER,
            Schema::Velocities => "block_name,n,v_E,v_E_stderr,v_B,v_B_stderr,gamma,wp,policy_id",
            Schema::VeGamma => "block_name,n,gamma,v_E",
            Schema::VbWp => "block_name,n,wp,v_B",
        }
    }

    const ALL: [Schema; 6] =
        [Schema::Entropy, Schema::Otoc, Schema::Sweep, Schema::Velocities, Schema::VeGamma, Schema::VbWp];
}

#[derive(Debug, PartialEq)]
pub struct Summary {
    pub schema: Schema,
    pub rows: usize,
    pub manifest: Option<String>,
}

fn int(field: &str, what: &str, line: u64) -> Result<u64> {
    field.parse().with_context(|| format!("line {line}: {what} '{field}' is not a nonnegative integer"))
}

fn real(field: &str, what: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().with_context(|| format!("line {line}: {what} '{field}' is not a number"))?;
    if !v.is_finite() {
        bail!("line {line}: {what} is not finite");
    }
    Ok(v)
}

fn optional_real(field: &str, what: &str, line: u64) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        real(field, what, line).map(Some)
    }
}

pub fn validate_text(text: &str) -> Result<Summary> {
    let manifest =
        text.lines().take_while(|l| l.starts_with('#')).find_map(|l| l.strip_prefix("# manifest ").map(str::to_string));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    let Some(schema) = Schema::ALL.into_iter().find(|s| s.header() == header) else {
        bail!("unrecognized header '{header}'");
    };
    let mut rows = 0;
    let mut prev_t: Option<u64> = None;
    let mut prev_x = 0u64;
    let mut n_sites: Option<u64> = None;
    let mut r_const: Option<u64> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let f: Vec<&str> = record.iter().collect();
        match schema {
            Schema::Entropy => {
                let t = int(f[0], "t", line)?;
                if t != prev_t.map_or(0, |p| p + 1) {
                    bail!("line {line}: t={t} breaks the sequence 0, 1, 2, ...");
                }
                prev_t = Some(t);
                if real(f[1], "S_mean", line)? < 0.0 || real(f[2], "S_var", line)? < 0.0 {
                    bail!("line {line}: negative entropy statistic");
                }
                let r = int(f[3], "R", line)?;
                if r == 0 || r_const.is_some_and(|c| c != r) {
                    bail!("line {line}: R must be a positive constant");
                }
                r_const = Some(r);
            }
            Schema::Otoc => {
                let (t, x) = (int(f[0], "t", line)?, int(f[1], "x", line)?);
                let c = real(f[2], "C_mean", line)?;
                if !(0.0..=1.0).contains(&c) {
                    bail!("line {line}: C_mean={c} outside [0, 1]");
                }
                match prev_t {
                    None if t == 0 && x == 1 => {}
                    Some(p) if t == p && x == prev_x + 1 => {}
                    Some(p) if t == p + 1 && x == 1 => match n_sites {
                        None => n_sites = Some(prev_x),
                        Some(n) if n == prev_x => {}
                        Some(_) => bail!("line {line}: row of layer {p} has the wrong length"),
                    },
                    _ => bail!("line {line}: (t, x) = ({t}, {x}) out of order"),
                }
                prev_t = Some(t);
                prev_x = x;
            }
            Schema::Sweep => {
                int(f[3], "n", line)?;
                real(f[4], "gamma", line)?;
                int(f[5], "wp", line)?;
                let status = f[11];
                let cells =
                    [(f[6], "layers"), (f[7], "v_E"), (f[8], "v_E_stderr"), (f[9], "v_B"), (f[10], "v_B_stderr")];
                for (v, what) in cells {
                    let value = optional_real(v, what, line)?;
                    if status == "ok" && value.is_none() {
                        bail!("line {line}: {what} missing on an ok row");
                    }
                }
                if status.is_empty() {
                    bail!("line {line}: empty status");
                }
            }
            Schema::Velocities => {
                int(f[1], "n", line)?;
                for (i, what) in [(2, "v_E"), (3, "v_E_stderr"), (4, "v_B"), (5, "v_B_stderr"), (6, "gamma")] {
                    real(f[i], what, line)?;
                }
                int(f[7], "wp", line)?;
            }
            Schema::VeGamma | Schema::VbWp => {
                int(f[1], "n", line)?;
                real(f[2], if schema == Schema::VeGamma { "gamma" } else { "wp" }, line)?;
                real(f[3], "velocity", line)?;
            }
        }
        rows += 1;
    }
    if let (Schema::Otoc, Some(n), Some(_)) = (schema, n_sites, prev_t) {
        if prev_x != n {
            bail!("last layer has {prev_x} sites, expected {n}");
        }
    }
    Ok(Summary { schema, rows, manifest })
}

pub fn validate_file(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    validate_text(&text).with_context(|| format!("{} fails its schema", path.display()))
}
