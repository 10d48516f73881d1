//! Result files: CSV trajectories and tables, JSON summaries, atomic writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::adjoint::CostBreakdown;
use crate::fbs::{FbsReport, StopReason};
use crate::integrate::{ControlPath, Trajectory};
use crate::model::SvirState;
use crate::scenarios::{CostTable, ScenarioResult, Strategy};

/// `%.10g`: ten significant digits, positional for moderate exponents,
/// trailing zeros dropped.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Writes through a temporary file in the target directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_bytes<F>(header: &[&str], fill: F) -> std::io::Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))
}

pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory,
    controls: &ControlPath,
) -> std::io::Result<()> {
    let bytes = csv_bytes(&["t", "S", "V", "I", "R", "u0", "u1"], |w| {
        for ((t, x), u) in traj.grid.nodes().zip(&traj.states).zip(controls.samples()) {
            w.write_record([t, x.s, x.v, x.i, x.r, u.u0, u.u1].map(fmt_g))?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

pub fn write_table_csv(path: &Path, table: &CostTable) -> std::io::Result<()> {
    let header = [
        "strategy",
        "social",
        "infection",
        "vaccination",
        "total",
        "social_pct",
        "infection_pct",
        "vaccination_pct",
        "final_S",
        "final_V",
        "final_I",
        "final_R",
    ];
    let bytes = csv_bytes(&header, |w| {
        for row in &table.rows {
            let c = row.cost;
            let [ps, pi, pv] = c.percentages();
            let x = row.final_state;
            let mut record = vec![row.strategy.short_name().to_string()];
            record.extend(
                [
                    c.social,
                    c.infection,
                    c.vaccination,
                    c.total,
                    ps,
                    pi,
                    pv,
                    x.s,
                    x.v,
                    x.i,
                    x.r,
                ]
                .map(fmt_g),
            );
            w.write_record(&record)?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

pub fn write_sweep_controls_csv(path: &Path, runs: &[(f64, &ControlPath)]) -> std::io::Result<()> {
    let bytes = csv_bytes(&["param_value", "t", "u0", "u1"], |w| {
        for (value, controls) in runs {
            for (t, u) in controls.grid().nodes().zip(controls.samples()) {
                w.write_record([*value, t, u.u0, u.u1].map(fmt_g))?;
            }
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

#[derive(Debug, Serialize)]
pub struct Percentages {
    pub social: f64,
    pub infection: f64,
    pub vaccination: f64,
}

impl From<&CostBreakdown> for Percentages {
    fn from(c: &CostBreakdown) -> Self {
        let [social, infection, vaccination] = c.percentages();
        Percentages {
            social,
            infection,
            vaccination,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FbsSummary {
    pub iterations_run: usize,
    pub best_iteration: usize,
    pub stop_reason: StopReason,
    pub cost_trace: Vec<f64>,
    /// Share of grid nodes where `u1` sits at its bound.
    pub u1_pinned_fraction: f64,
}

/// Relative tolerance for counting a vaccination control as saturated.
pub const PINNED_TOL: f64 = 1e-3;

impl From<&FbsReport> for FbsSummary {
    fn from(r: &FbsReport) -> Self {
        FbsSummary {
            iterations_run: r.iterations_run,
            best_iteration: r.best_iteration,
            stop_reason: r.stop_reason,
            cost_trace: r.cost_trace.clone(),
            u1_pinned_fraction: r.best_controls.fraction_u1_at_bound(PINNED_TOL),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CostReport {
    pub strategy: Strategy,
    pub social: f64,
    pub infection: f64,
    pub vaccination: f64,
    pub total: f64,
    pub percentages: Percentages,
    pub r0: f64,
    pub final_state: SvirState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fbs: Option<FbsSummary>,
}

impl CostReport {
    pub fn from_result(r: &ScenarioResult) -> Self {
        Self::new(r.strategy, &r.cost, r.r0, r.final_state, r.fbs.as_ref())
    }

    pub fn new(
        strategy: Strategy,
        cost: &CostBreakdown,
        r0: f64,
        final_state: SvirState,
        fbs: Option<&FbsReport>,
    ) -> Self {
        CostReport {
            strategy,
            social: cost.social,
            infection: cost.infection,
            vaccination: cost.vaccination,
            total: cost.total,
            percentages: cost.into(),
            r0,
            final_state,
            fbs: fbs.map(FbsSummary::from),
        }
    }
}
