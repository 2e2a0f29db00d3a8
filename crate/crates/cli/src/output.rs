//! Byte-deterministic artifact encoding.

use std::path::Path;

use clbath::dynamics::PhaseState;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// One trajectory sample.
#[derive(Debug, Clone)]
pub struct Sample {
    pub state: PhaseState,
    pub system_energy: f64,
    pub total_energy: f64,
}

/// Seventeen significant digits: exact round trip for every `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `t,x_1..x_d,p_1..p_d,E_S,E_total`, then `y_1..y_N,k_1..k_N` when
/// `emit_bath` is set.
pub fn trajectory_header(d: usize, n: usize, emit_bath: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=d).map(|i| format!("x_{i}")));
    h.extend((1..=d).map(|i| format!("p_{i}")));
    h.push("E_S".into());
    h.push("E_total".into());
    if emit_bath {
        h.extend((1..=n).map(|a| format!("y_{a}")));
        h.extend((1..=n).map(|a| format!("k_{a}")));
    }
    h
}

pub fn trajectory_csv(samples: &[Sample], d: usize, n: usize, emit_bath: bool) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(trajectory_header(d, n, emit_bath))?;
    for s in samples {
        let st = &s.state;
        let mut row = Vec::with_capacity(3 + 2 * d + if emit_bath { 2 * n } else { 0 });
        row.push(fmt_f64(st.t));
        row.extend(st.x.iter().chain(st.p.iter()).map(|&v| fmt_f64(v)));
        row.push(fmt_f64(s.system_energy));
        row.push(fmt_f64(s.total_energy));
        if emit_bath {
            row.extend(st.y.iter().chain(st.k.iter()).map(|&v| fmt_f64(v)));
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::io("trajectory buffer", e.into_error()))
}

/// Pretty JSON with a trailing newline; object keys are sorted.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let v = serde_json::to_value(value)?;
    let mut out = serde_json::to_vec_pretty(&v)?;
    out.push(b'\n');
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    let parent = path.parent().unwrap_or(dir);
    std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    std::fs::write(&path, bytes).map_err(|e| CliError::io(path, e))
}
