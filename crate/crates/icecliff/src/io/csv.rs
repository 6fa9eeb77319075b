//! CSV export of damage traces, stability envelopes and yield surfaces.
//!
//! Shortest round-trip decimals, rows in parameter order, deterministic.

use super::IoError;
use crate::analysis::EnvelopePoint;
use crate::constitutive::YieldSample;
use crate::solver::DamageTrace;
use std::fmt::Write as _;
use std::path::Path;

/// Writes a damage trace with header `t_s,normalized_damage`.
pub fn export_trace(trace: &DamageTrace, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut out = String::from("t_s,normalized_damage\n");
    for (t, d) in trace.times.iter().zip(&trace.normalized_damage) {
        let _ = writeln!(out, "{t},{d}");
    }
    write_file(path, out)
}

/// Writes envelope points with header
/// `H_m,h_w_m,tau_c_Pa,mu,mode,h_w_crit_m,freeboard_m`.
///
/// The critical-waterline columns are empty for probes whose enclosing
/// search did not resolve (partial envelopes are valid output).
pub fn export_envelope(points: &[EnvelopePoint], path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut out = String::from("H_m,h_w_m,tau_c_Pa,mu,mode,h_w_crit_m,freeboard_m\n");
    for p in points {
        let crit = p.h_w_crit.map_or(String::new(), |v| v.to_string());
        let freeboard = p.freeboard.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.h, p.h_w, p.tau_c, p.mu, p.outcome.mode, crit, freeboard
        );
    }
    write_file(path, out)
}

/// Writes yield-surface samples with header `sxx_Pa,szz_Pa,D_d`.
pub fn export_yield_surface(
    samples: &[YieldSample<f64>],
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let mut out = String::from("sxx_Pa,szz_Pa,D_d\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.sxx, s.szz, s.d_d);
    }
    write_file(path, out)
}

fn write_file(path: impl AsRef<Path>, contents: String) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}
