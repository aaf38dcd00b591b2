//! On-disk artifacts: CSV norm tables, JSON-lines ledger, text summary and
//! field dumps.
//!
//! Column layout of `norms.csv` (gnuplot: `plot "norms.csv" using 1:N`):
//! eps, g0s_l2, g0s_w1p, gs_lp, gs_linf, c1_sup, c1_lp, u_dev, v_dev, rho_dev,
//! field_dev, grad_dev, remainder_x, remainder_w, ns_residual, truncation,
//! outer_iterations, max_q, quad_min, c_weighted, c_energy, gbar_l2.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::case::CaseOutput;
use crate::error::CliError;
use crate::suites::{ConvergenceReport, CriterionResult, SweepOutput};

pub const NORMS_HEADER: &str = "eps,g0s_l2,g0s_w1p,gs_lp,gs_linf,c1_sup,c1_lp,u_dev,v_dev,rho_dev,field_dev,grad_dev,\
remainder_x,remainder_w,ns_residual,truncation,outer_iterations,max_q,quad_min,c_weighted,c_energy,gbar_l2";

pub const SLOPES_HEADER: &str = "quantity,target,threshold,slope,intercept,fit_residual,pass";

/// Contents of the two CSV tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOutputs {
    pub norms: String,
    pub slopes: String,
}

fn e(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn render_csv(sweep: &SweepOutput, report: &ConvergenceReport) -> CsvOutputs {
    CsvOutputs { norms: render_norms(sweep), slopes: render_slopes(report) }
}

pub fn render_norms(sweep: &SweepOutput) -> String {
    let mut norms = String::from(NORMS_HEADER);
    norms.push('\n');
    for s in sweep.summaries() {
        let n = &s.norms;
        let max_q = s.contraction.iter().copied().fold(0.0, f64::max);
        let row = [
            e(s.eps),
            e(s.residual.g0_l2),
            e(s.residual.g0_w1p),
            e(s.residual.gs_lp),
            e(s.residual.gs_linf),
            e(s.c1_sup),
            e(s.c1_lp),
            e(n.u_dev),
            e(n.v_dev),
            e(n.rho_dev),
            e(n.field_dev),
            e(n.grad_dev),
            e(n.remainder_x),
            e(n.remainder_w),
            e(n.ns_residual),
            e(n.truncation),
            n.outer_iterations.to_string(),
            e(max_q),
            e(s.quad_min),
            e(s.c_weighted),
            e(s.c_energy),
            e(s.gbar_l2),
        ];
        norms.push_str(&row.join(","));
        norms.push('\n');
    }
    norms
}

pub fn render_slopes(report: &ConvergenceReport) -> String {
    let mut slopes = String::from(SLOPES_HEADER);
    slopes.push('\n');
    for q in &report.quantities {
        let (slope, intercept, resid) = match q.verdict {
            crate::fit::SlopeVerdict::Fitted(f) => (e(f.slope), e(f.intercept), e(f.residual)),
            crate::fit::SlopeVerdict::Exact => ("exact".into(), "exact".into(), "exact".into()),
        };
        let threshold = if q.threshold.is_finite() { e(q.threshold) } else { "none".into() };
        let _ = writeln!(slopes, "{},{},{threshold},{slope},{intercept},{resid},{}", q.name, e(q.target), q.pass);
    }
    slopes
}

/// Per-iteration and per-solve telemetry, one JSON object per line.
pub fn render_ledger(sweep: &SweepOutput) -> String {
    let mut out = String::new();
    for s in sweep.summaries() {
        for (n, d) in s.history.iter().enumerate() {
            let q = if n == 0 { None } else { s.contraction.get(n - 1).copied() };
            let row = json!({"kind": "outer", "eps": s.eps, "n": n + 1, "delta": d, "q": q});
            let _ = writeln!(out, "{row}");
        }
        for l in &s.linear {
            let en = &l.energy;
            let row = json!({
                "kind": "energy",
                "eps": s.eps,
                "outer": l.outer,
                "iterations": l.iterations,
                "weighted_lhs": en.weighted_lhs,
                "weighted_rhs": en.weighted_rhs,
                "energy_lhs": en.energy_lhs,
                "energy_rhs": en.energy_rhs,
                "c_weighted": en.weighted_constant(),
                "c_energy": en.energy_constant(),
                "quadratic_form_min": en.quadratic_form_min,
                "map_deviation": l.map_deviation,
            });
            let _ = writeln!(out, "{row}");
        }
        let row = json!({"kind": "case", "eps": s.eps, "amplitude": s.amplitude, "norms": s.norms});
        let _ = writeln!(out, "{row}");
    }
    out
}

pub fn render_summary(report: &ConvergenceReport, criteria: &[CriterionResult]) -> String {
    let mut out = String::new();
    for q in &report.quantities {
        let _ = writeln!(
            out,
            "{:<12} slope {:>8} target {:.3} threshold {}",
            q.name,
            q.verdict.describe(),
            q.target,
            if q.threshold.is_finite() { format!("{:.3}", q.threshold) } else { "none".into() }
        );
    }
    if !criteria.is_empty() {
        out.push('\n');
        for c in criteria {
            let _ = writeln!(out, "{c}");
        }
        let verdict = if criteria.iter().all(|c| c.pass) { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "\noverall: {verdict}");
    }
    out
}

/// Nodal values x1, x2, u, v, rho, u - mu.
pub fn render_fields(case: &CaseOutput) -> String {
    let f = &case.fields;
    let mut out = String::from("x1,x2,u,v,rho,u_minus_mu\n");
    for i in 0..=f.grid.n1 {
        for j in 0..=f.grid.n2 {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e(f.grid.x1[i]),
                e(f.grid.x2[j]),
                e(f.u[[i, j]]),
                e(f.v[[i, j]]),
                e(f.rho[[i, j]]),
                e(f.u[[i, j]] - f.mu[[i, j]])
            );
        }
    }
    out
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Writes norms.csv, slopes.csv, ledger.jsonl and summary.txt.
pub fn write_sweep(
    dir: &Path,
    sweep: &SweepOutput,
    report: &ConvergenceReport,
    criteria: &[CriterionResult],
) -> Result<Vec<PathBuf>, CliError> {
    let csv = render_csv(sweep, report);
    Ok(vec![
        write(dir, "norms.csv", &csv.norms)?,
        write(dir, "slopes.csv", &csv.slopes)?,
        write(dir, "ledger.jsonl", &render_ledger(sweep))?,
        write(dir, "summary.txt", &render_summary(report, criteria))?,
    ])
}

/// Writes norms.csv, ledger.jsonl and a JSON summary.txt for cases without a fit.
pub fn write_case(dir: &Path, sweep: &SweepOutput) -> Result<Vec<PathBuf>, CliError> {
    let summaries: Vec<_> = sweep.summaries().collect();
    let summary = serde_json::to_string_pretty(&summaries).unwrap_or_default() + "\n";
    Ok(vec![
        write(dir, "norms.csv", &render_norms(sweep))?,
        write(dir, "ledger.jsonl", &render_ledger(sweep))?,
        write(dir, "summary.txt", &summary)?,
    ])
}

pub fn field_file_name(eps: f64) -> String {
    format!("fields_eps{eps}.csv")
}

pub fn write_fields(dir: &Path, case: &CaseOutput) -> Result<PathBuf, CliError> {
    write(dir, &field_file_name(case.summary.eps), &render_fields(case))
}
