//! Recomputes every infidelity recorded in an artifact.

use vqgo_core::analysis::CartanCoordinates;
use vqgo_core::ansatz::agi_cost;
use vqgo_core::channels::agi;
use vqgo_core::devices::{syndrome_target, tpcx};
use vqgo_core::gates::cnot;
use vqgo_core::{CircuitParams, ComplexMatrix, SourceGateSet};

use crate::artifact::{config_hash, ParsedArtifact};
use crate::commands::{canonical_sources, cr_sources, single_problem, syndrome_sources, SingleReport};
use crate::config::{Crosstalk, Experiment, ExperimentConfig};
use crate::error::CliError;

/// Recorded and recomputed values may differ by at most this much.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows_checked: usize,
    /// Rows flagged as aborted, which carry nothing to check.
    pub rows_skipped: usize,
    pub max_abs_diff: f64,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Verify(msg.into())
}

fn vqgo_agi(target: &ComplexMatrix, sources: &SourceGateSet, theta: Vec<f64>) -> Result<f64, CliError> {
    let params = CircuitParams::from_vec(sources.shape(), theta).map_err(|e| bad(format!("theta: {e}")))?;
    Ok(agi_cost(&params, sources, target)?)
}

fn check(report: &mut VerifyReport, line: usize, recorded: f64, recomputed: f64) -> Result<(), CliError> {
    let diff = (recorded - recomputed).abs();
    if diff.is_nan() || diff > VERIFY_TOL {
        return Err(bad(format!(
            "row {line}: recorded agi {recorded:e}, recomputed {recomputed:e}"
        )));
    }
    report.rows_checked += 1;
    report.max_abs_diff = report.max_abs_diff.max(diff);
    Ok(())
}

/// Verifies a CSV artifact or a single-run JSON report.
pub fn verify_text(text: &str) -> Result<VerifyReport, CliError> {
    if text.trim_start().starts_with('{') {
        verify_report(text)
    } else {
        verify_csv(text)
    }
}

fn verify_report(text: &str) -> Result<VerifyReport, CliError> {
    let report: SingleReport = serde_json::from_str(text).map_err(|e| bad(format!("report: {e}")))?;
    let Experiment::SingleOptimize(single) = &report.config.experiment else {
        return Err(bad("report does not hold a single_optimize config"));
    };
    let (target, sources) = single_problem(single)?;
    let mut out = VerifyReport {
        rows_checked: 0,
        rows_skipped: 0,
        max_abs_diff: 0.0,
    };
    let recomputed = vqgo_agi(&target, &sources, report.theta.clone())?;
    check(&mut out, 1, report.agi, recomputed)?;
    Ok(out)
}

fn verify_csv(text: &str) -> Result<VerifyReport, CliError> {
    let art = ParsedArtifact::parse(text).map_err(bad)?;
    let raw = art.metadata.get("config").ok_or_else(|| bad("missing config metadata"))?;
    let cfg = ExperimentConfig::from_json(raw).map_err(|e| bad(format!("embedded {e}")))?;
    if let Some(h) = art.metadata.get("config_sha256") {
        if *h != config_hash(&cfg) {
            return Err(bad("config_sha256 does not match the embedded config"));
        }
    }
    let mut out = VerifyReport {
        rows_checked: 0,
        rows_skipped: 0,
        max_abs_diff: 0.0,
    };
    let cnot_target = cnot();
    let four_target = syndrome_target();
    for (i, row) in art.rows.iter().enumerate() {
        let line = i + 1;
        let f = |name: &str| art.float(row, name).map_err(bad);
        if art.field(row, "status").map_err(bad)? != "ok" {
            out.rows_skipped += 1;
            continue;
        }
        let recorded = f("agi")?;
        let theta = art.floats(row, "theta").map_err(bad)?;
        let recomputed = match &cfg.experiment {
            Experiment::CnotSweep(s) => {
                let pair = s.pair(f("eps")?);
                let (omega, t) = (f("omega_mhz")?, f("t_ns")?);
                match art.field(row, "method").map_err(bad)? {
                    "tpcx" => agi(&cnot_target, &tpcx(&pair, omega, t)?)?,
                    "vqgo" => vqgo_agi(&cnot_target, &cr_sources(&pair, omega, t, s.depth)?, theta)?,
                    m => return Err(bad(format!("row {line}: unknown method {m:?}"))),
                }
            }
            Experiment::SyndromeSweep(s) => {
                let crosstalk = match art.field(row, "crosstalk").map_err(bad)? {
                    "off" => Crosstalk::Off,
                    "on" => Crosstalk::On,
                    c => return Err(bad(format!("row {line}: unknown crosstalk {c:?}"))),
                };
                let omegas = [f("omega1_mhz")?, f("omega2_mhz")?, f("omega3_mhz")?, f("omega4_mhz")?];
                let sources =
                    syndrome_sources(&s.device(crosstalk), &omegas, f("t_ns")?, s.layer_signs)?;
                vqgo_agi(&four_target, &sources, theta)?
            }
            Experiment::CartanMap(m) => {
                let sources = canonical_sources(CartanCoordinates::new(f("c_x")?, f("c_y")?, f("c_z")?), m.depth)?;
                vqgo_agi(&cnot_target, &sources, theta)?
            }
            Experiment::SingleOptimize(_) => return Err(bad("single_optimize output is JSON, not CSV")),
        };
        check(&mut out, line, recorded, recomputed)?;
    }
    Ok(out)
}
