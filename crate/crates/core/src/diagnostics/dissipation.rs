use serde::Serialize;

use crate::{Error, Result};

/// Fraction of the initial primary energy that counts as having come back.
pub const DEFAULT_RECURRENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// `γ` in `|x_*| ∝ e^{−γt}`.
    pub rate: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub peaks: usize,
}

/// Local maxima of `|signal|`, refined by a parabola through the three
/// samples around each one. Requires uniform sampling.
pub fn envelope_peaks(times: &[f64], signal: &[f64]) -> Vec<(f64, f64)> {
    let a: Vec<f64> = signal.iter().map(|v| v.abs()).collect();
    let mut peaks = Vec::new();
    for i in 1..a.len().saturating_sub(1) {
        let (l, c, r) = (a[i - 1], a[i], a[i + 1]);
        if !(c > l && c >= r) {
            continue;
        }
        let curv = l - 2.0 * c + r;
        let (offset, value) = if curv < 0.0 {
            let off = 0.5 * (l - r) / curv;
            (off, c - 0.25 * (l - r) * off)
        } else {
            (0.0, c)
        };
        let dt = times[i + 1] - times[i];
        peaks.push((times[i] + offset * dt, value));
    }
    peaks
}

/// Least-squares fit of `ln` of the envelope peaks against time, restricted
/// to `window` (default: the whole trace).
pub fn decay_fit(times: &[f64], signal: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    if times.len() != signal.len() {
        return Err(Error::DimensionMismatch { what: "decay-fit samples", expected: times.len(), got: signal.len() });
    }
    if times.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    let window = window.unwrap_or((times[0], times[times.len() - 1]));
    let pts: Vec<(f64, f64)> = envelope_peaks(times, signal)
        .into_iter()
        .filter(|&(t, v)| t >= window.0 && t <= window.1 && v > 0.0)
        .map(|(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("{} envelope peaks in the fit window, need 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let scale = pts.iter().map(|p| p.1 * p.1).sum::<f64>().max(1.0);
    let r_squared = if ss_tot <= 1e-24 * scale { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(DecayFit { rate: -slope, r_squared, window, peaks: pts.len() })
}

/// First time `H_S` climbs back to `θ·H_S(0)` after having fallen below
/// `θ/2·H_S(0)`.
pub fn recurrence_time(times: &[f64], energy: &[f64], theta: f64) -> Option<f64> {
    let e0 = *energy.first()?;
    if !(e0 > 0.0) {
        return None;
    }
    let dropped = energy.iter().position(|&e| e < 0.5 * theta * e0)?;
    energy[dropped..].iter().position(|&e| e >= theta * e0).map(|k| times[dropped + k])
}
