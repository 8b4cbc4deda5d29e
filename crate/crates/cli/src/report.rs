//! Run outputs: the diagnostics CSV, snapshot directory and structured
//! `report.json` with named pass/fail checks.

use anyhow::{Context, Result};
use nsm_core::{DiagnosticRecord, PlasmaState, Trajectory};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// One asserted (or merely reported) quantity.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// None = reported only, not asserted.
    pub pass: Option<bool>,
    pub value: f64,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn asserted(name: &str, value: f64, bound: f64, pass: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            pass: Some(pass),
            value,
            bound: Some(bound),
            detail,
        }
    }

    pub fn upper(name: &str, value: f64, bound: f64, detail: String) -> Self {
        Check::asserted(name, value, bound, value <= bound, detail)
    }

    pub fn reported(name: &str, value: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            pass: None,
            value,
            bound: None,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub extra: serde_json::Value,
}

impl ScenarioReport {
    pub fn new(scenario: &str, checks: Vec<Check>, extra: serde_json::Value) -> Self {
        let passed = checks.iter().all(|c| c.pass != Some(false));
        ScenarioReport {
            scenario: scenario.into(),
            passed,
            checks,
            extra,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join("report.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Fixed-width scientific float formatting: 17 significant decimals make the
/// CSV bit-faithful to the f64 values, so identical runs produce identical
/// bytes.
fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

/// Which optional columns carry values; absent quantities stay empty.
#[derive(Clone, Copy, Debug)]
pub struct CsvColumns {
    pub with_e: bool,
    pub with_v: bool,
    pub with_helicity: bool,
    pub with_ball: bool,
}

pub const CSV_HEADER: &str = "t,energy_total,diss_visc,diss_ohmic,l2_v,l2_E,l2_B,hs_v,hs_E,hs_B,linf_v,linf_B,helicity,ball_energy";

pub fn write_csv(path: &Path, records: &[DiagnosticRecord], cols: CsvColumns) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 256);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let opt = |on: bool, x: f64| if on { fmt_f64(x) } else { String::new() };
        let row = [
            fmt_f64(r.t),
            fmt_f64(r.energy_total),
            opt(cols.with_v, r.diss_visc),
            fmt_f64(r.diss_ohmic),
            opt(cols.with_v, r.l2_v),
            opt(cols.with_e, r.l2_e),
            fmt_f64(r.l2_b),
            opt(cols.with_v, r.hs_v),
            opt(cols.with_e, r.hs_e),
            fmt_f64(r.hs_b),
            opt(cols.with_v, r.linf_v),
            fmt_f64(r.linf_b),
            opt(cols.with_helicity, r.helicity),
            opt(cols.with_ball, r.ball_energy),
        ];
        let _ = writeln!(out, "{}", row.join(","));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Persist the trajectory's sparse snapshots as `snapshots/NNNN.nsms`,
/// returning the written paths.
pub fn write_snapshots(out_dir: &Path, traj: &Trajectory) -> Result<Vec<std::path::PathBuf>> {
    let dir = out_dir.join("snapshots");
    std::fs::create_dir_all(&dir)?;
    let mut paths = Vec::new();
    for (i, s) in traj.snapshots.iter().enumerate() {
        let p = dir.join(format!("{i:04}.nsms"));
        crate::snapshot::save(&p, s)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Resolve which optional CSV columns are live for a given final state.
pub fn columns_for(state: &PlasmaState, helicity: bool, ball: bool) -> CsvColumns {
    CsvColumns {
        with_e: state.e.is_some(),
        with_v: true,
        with_helicity: helicity,
        with_ball: ball,
    }
}
