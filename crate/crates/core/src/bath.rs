//! Bath spectra: the flat Markovian-limit spectrum, a finite band, or an
//! explicit list of modes.

use std::io::Read;

use crate::model::BathSpec;
use crate::{Error, Result};

/// How bath frequencies and couplings are laid out.
///
/// Built-in spectra use equal spacing and the constant coupling
/// `g_α = c/√N`, so `Σ g_α² = c²` regardless of `N`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralModel {
    /// `ν_α = α·ν_max/N` for `α = 1..=N`.
    UniformFlat { nu_max: f64, coupling_scale: f64 },
    /// `N` equally spaced frequencies covering `[lo, hi]` inclusive.
    BandLimited { nu_max: f64, band: (f64, f64), coupling_scale: f64 },
    /// Frequencies and couplings passed through after validation.
    Explicit { frequencies: Vec<f64>, couplings: Vec<f64> },
}

fn check_scale(nu_max: f64, c: f64) -> Result<()> {
    if !(nu_max.is_finite() && nu_max > 0.0) {
        return Err(Error::invalid("bath.nu_max", format!("must be positive, got {nu_max}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("bath.coupling_scale", format!("must be positive, got {c}")));
    }
    Ok(())
}

/// Realizes a spectral model with `n` modes. `n` is ignored for explicit lists.
pub fn generate(model: &SpectralModel, n: usize) -> Result<BathSpec> {
    match model {
        SpectralModel::UniformFlat { nu_max, coupling_scale } => {
            check_scale(*nu_max, *coupling_scale)?;
            if n == 0 {
                return Err(Error::invalid("bath.n_modes", "must be at least 1"));
            }
            let g = coupling_scale / (n as f64).sqrt();
            let freqs = (1..=n).map(|a| (a as f64 * nu_max / n as f64).min(*nu_max)).collect();
            BathSpec::new(freqs, vec![g; n])
        }
        SpectralModel::BandLimited { nu_max, band: (lo, hi), coupling_scale } => {
            check_scale(*nu_max, *coupling_scale)?;
            if n == 0 {
                return Err(Error::invalid("bath.n_modes", "must be at least 1"));
            }
            if !(*lo > 0.0 && lo < hi && *hi <= *nu_max) {
                return Err(Error::invalid(
                    "bath.band",
                    format!("need 0 < lo < hi <= nu_max = {nu_max}, got [{lo}, {hi}]"),
                ));
            }
            let g = coupling_scale / (n as f64).sqrt();
            let freqs = if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                let step = (hi - lo) / (n - 1) as f64;
                (0..n).map(|a| if a == n - 1 { *hi } else { lo + a as f64 * step }).collect()
            };
            BathSpec::new(freqs, vec![g; n])
        }
        SpectralModel::Explicit { frequencies, couplings } => BathSpec::new(frequencies.clone(), couplings.clone()),
    }
}

/// Reads a two-column `nu,g` CSV with a one-line header.
pub fn read_explicit_csv<R: Read>(reader: R) -> Result<BathSpec> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut freqs = Vec::new();
    let mut couplings = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid(format!("bath.csv row {}", row + 1), e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::invalid(
                format!("bath.csv row {}", row + 1),
                format!("expected 2 columns, got {}", rec.len()),
            ));
        }
        let parse = |s: &str, col: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::invalid(format!("bath.csv row {} column {col}", row + 1), e.to_string()))
        };
        freqs.push(parse(&rec[0], "nu")?);
        couplings.push(parse(&rec[1], "g")?);
    }
    BathSpec::new(freqs, couplings)
}
