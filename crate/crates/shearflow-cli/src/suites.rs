//! ε sweeps and the acceptance criteria evaluated on them.

use rayon::prelude::*;
use serde::Serialize;
use shearflow::domain::BaseFlow;

use crate::case::{run_case_with, CaseOutput, CaseSummary};
use crate::config::{RunConfig, Suite};
use crate::error::CliError;
use crate::fit::{slope_verdict, SlopeVerdict};
use crate::report::render_csv;
use crate::verification::{run_verification, VerificationReport};

/// Outputs of every case of a sweep, in sweep order.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub eps: Vec<f64>,
    pub cases: Vec<CaseOutput>,
}

impl SweepOutput {
    pub fn summaries(&self) -> impl Iterator<Item = &CaseSummary> {
        self.cases.iter().map(|c| &c.summary)
    }

    fn collect(&self, f: impl Fn(&CaseSummary) -> f64) -> Vec<f64> {
        self.summaries().map(f).collect()
    }
}

fn sweep_with(cfg: &RunConfig, flow: &BaseFlow, factor: f64) -> Result<SweepOutput, CliError> {
    let cases = cfg
        .run
        .sweep
        .par_iter()
        .map(|&eps| run_case_with(cfg, flow, eps, factor))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepOutput { eps: cfg.run.sweep.clone(), cases })
}

/// Runs every sweep value in parallel with the configured profile.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    cfg.validate()?;
    let flow = cfg.flow.base_flow().map_err(|e| CliError::Config(format!("[flow]: {e}")))?;
    sweep_with(cfg, &flow, cfg.boundary.factor)
}

/// Linear Couette profile between the configured wall speeds, unperturbed.
pub fn run_couette_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    let flow = cfg.flow.base_flow().map_err(|e| CliError::Config(format!("[flow]: {e}")))?;
    let couette = BaseFlow::couette(flow.v0, flow.v1).map_err(|e| CliError::Config(format!("[flow]: {e}")))?;
    sweep_with(cfg, &couette, 0.0)
}

/// One fitted quantity of the convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityFit {
    pub name: String,
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    pub verdict: SlopeVerdict,
    pub target: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub quantities: Vec<QuantityFit>,
    pub verdict: bool,
}

impl ConvergenceReport {
    pub fn get(&self, name: &str) -> Option<&QuantityFit> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

/// Fits every swept quantity with its target and pass threshold.
pub fn convergence_report(sweep: &SweepOutput, p: f64, sigma: f64) -> Result<ConvergenceReport, CliError> {
    let lp_target = 1.5 + 1.0 / (2.0 * p);
    let c_lp_target = 0.5 + 1.0 / (2.0 * p);
    let rows: Vec<(&str, Vec<f64>, f64, f64)> = vec![
        ("g0s_l2", sweep.collect(|s| s.residual.g0_l2), 2.0, 1.9),
        ("gs_lp", sweep.collect(|s| s.residual.gs_lp), lp_target, lp_target - 0.1),
        ("c1_sup", sweep.collect(|s| s.c1_sup), 0.5, 0.45),
        ("c1_lp", sweep.collect(|s| s.c1_lp), c_lp_target, 0.45 + 1.0 / (2.0 * p) - 0.05),
        ("field_dev", sweep.collect(|s| s.norms.field_dev), 1.0, 0.9),
        ("grad_dev", sweep.collect(|s| s.norms.grad_dev), sigma / 2.0, sigma / 2.0 - 0.05),
        ("remainder_x", sweep.collect(|s| s.norms.remainder_x), 2.5 - 2.0 / p + sigma, f64::NEG_INFINITY),
        ("remainder_w", sweep.collect(|s| s.norms.remainder_w), 1.0 + sigma / 2.0, f64::NEG_INFINITY),
        ("gbar_l2", sweep.collect(|s| s.gbar_l2), 2.5 - 2.0 / p + sigma, f64::NEG_INFINITY),
    ];
    let mut quantities = Vec::new();
    for (name, norms, target, threshold) in rows {
        let verdict = slope_verdict(&sweep.eps, &norms)?;
        let pass = verdict.passes(threshold);
        quantities.push(QuantityFit { name: name.into(), eps: sweep.eps.clone(), norms, verdict, target, threshold, pass });
    }
    let verdict = quantities.iter().all(|q| q.pass);
    Ok(ConvergenceReport { quantities, verdict })
}

/// One line of the acceptance table.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} [{tag}] {}: {}", self.id, self.name, self.detail)
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn criterion_solver(report: &VerificationReport) -> CriterionResult {
    CriterionResult {
        id: 1,
        name: "solver verification",
        pass: report.passes(),
        detail: format!(
            "hyperbolic min order {:.3} (>= 0.9); erfc error {:.2e} (<= 2e-3), order {:.3} (>= 0.9); Lame min order {:.3} (>= 1.9)",
            report.hyperbolic.min_order(),
            report.parabolic_error,
            report.parabolic.min_order(),
            report.lame.min_order()
        ),
    }
}

pub fn criterion_exactness(couette: &SweepOutput) -> CriterionResult {
    let corr = couette.summaries().map(|s| s.corrector_max).fold(0.0, f64::max);
    let dev = couette
        .summaries()
        .map(|s| s.norms.u_dev.max(s.norms.v_dev).max(s.norms.rho_dev))
        .fold(0.0, f64::max);
    let rem = couette.summaries().map(|s| s.norms.remainder_x).fold(0.0, f64::max);
    CriterionResult {
        id: 2,
        name: "trivial-flow exactness",
        pass: corr <= 1e-10 && dev <= 1e-10 && rem <= 1e-10,
        detail: format!("max corrector {corr:.2e}, max remainder {rem:.2e}, max |(u,v,rho) - (mu,0,rho*)| {dev:.2e} (all <= 1e-10)"),
    }
}

fn slope_pair(report: &ConvergenceReport, a: &str, b: &str) -> (bool, String) {
    let (qa, qb) = (report.get(a).expect("fitted"), report.get(b).expect("fitted"));
    (
        qa.pass && qb.pass,
        format!(
            "{a} slope {} (>= {:.3}, norms {}); {b} slope {} (>= {:.3}, norms {})",
            qa.verdict.describe(),
            qa.threshold,
            fmt_list(&qa.norms),
            qb.verdict.describe(),
            qb.threshold,
            fmt_list(&qb.norms)
        ),
    )
}

pub fn criterion_residual_orders(report: &ConvergenceReport) -> CriterionResult {
    let (pass, detail) = slope_pair(report, "g0s_l2", "gs_lp");
    CriterionResult { id: 3, name: "residual orders", pass, detail }
}

pub fn criterion_layer_orders(report: &ConvergenceReport) -> CriterionResult {
    let (pass, detail) = slope_pair(report, "c1_sup", "c1_lp");
    CriterionResult { id: 4, name: "layer error-term orders", pass, detail }
}

pub fn criterion_quadratic_form(sweep: &SweepOutput) -> CriterionResult {
    let min = sweep.summaries().map(|s| s.quad_min).fold(f64::INFINITY, f64::min);
    let solves: usize = sweep.summaries().map(|s| s.linear.len()).sum();
    CriterionResult {
        id: 5,
        name: "supersonic quadratic form",
        pass: min >= -1e-14 && solves > 0,
        detail: format!("min over {solves} linear solves {min:.3e} (>= -1e-14)"),
    }
}

/// Single constants per sweep, finite, and not growing as ε decreases.
pub fn criterion_energy(sweep: &SweepOutput) -> CriterionResult {
    let cw: Vec<f64> = sweep.summaries().map(|s| s.c_weighted).collect();
    let ce: Vec<f64> = sweep.summaries().map(|s| s.c_energy).collect();
    let trend = |c: &[f64]| match slope_verdict(&sweep.eps, c) {
        Ok(v @ SlopeVerdict::Exact) => (true, v.describe()),
        Ok(v @ SlopeVerdict::Fitted(f)) => (f.slope >= -0.1, v.describe()),
        Err(e) => (false, e.to_string()),
    };
    let finite = cw.iter().chain(&ce).all(|c| c.is_finite());
    let (tw, sw) = trend(&cw);
    let (te, se) = trend(&ce);
    let max = |c: &[f64]| c.iter().copied().fold(0.0, f64::max);
    CriterionResult {
        id: 6,
        name: "energy inequalities",
        pass: finite && tw && te,
        detail: format!(
            "weighted C = {:.3e} per eps {} slope {sw}; energy C = {:.3e} per eps {} slope {se} (finite, slope vs eps >= -0.1)",
            max(&cw),
            fmt_list(&cw),
            max(&ce),
            fmt_list(&ce)
        ),
    }
}

/// Every recorded qₙ of every case, which covers n ≥ 2 and never leaves the
/// check empty.
pub fn criterion_contraction(sweep: &SweepOutput) -> CriterionResult {
    let per_case: Vec<f64> =
        sweep.summaries().map(|s| s.contraction.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
    let counts: Vec<usize> = sweep.summaries().map(|s| s.contraction.len()).collect();
    let worst = per_case.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CriterionResult {
        id: 7,
        name: "contraction",
        pass: counts.iter().all(|&c| c > 0) && worst <= 0.6,
        detail: format!("max q_n per eps {} over {counts:?} ratios (<= 0.6)", fmt_list(&per_case)),
    }
}

pub fn criterion_zero_viscosity(sweep: &SweepOutput, report: &ConvergenceReport) -> CriterionResult {
    let q = report.get("field_dev").expect("fitted");
    let grad: Vec<f64> = sweep.summaries().map(|s| s.norms.grad_dev).collect();
    let decreasing = grad.windows(2).all(|w| w[1] < w[0]);
    CriterionResult {
        id: 8,
        name: "zero-viscosity limit",
        pass: q.pass && decreasing,
        detail: format!(
            "field deviation slope {} (>= 0.9, norms {}); gradient deviation {} strictly decreasing: {decreasing}",
            q.verdict.describe(),
            fmt_list(&q.norms),
            fmt_list(&grad)
        ),
    }
}

pub fn criterion_end_to_end(sweep: &SweepOutput, tol: f64) -> CriterionResult {
    let ratios: Vec<f64> =
        sweep.summaries().map(|s| s.norms.ns_residual / (10.0 * (tol + s.norms.truncation))).collect();
    CriterionResult {
        id: 9,
        name: "end-to-end residual",
        pass: ratios.iter().all(|&r| r <= 1.0),
        detail: format!(
            "residual {} vs truncation {}; residual / (10 (tol + truncation)) {} (<= 1)",
            fmt_list(&sweep.collect(|s| s.norms.ns_residual)),
            fmt_list(&sweep.collect(|s| s.norms.truncation)),
            fmt_list(&ratios)
        ),
    }
}

/// Reruns the sweep and checks that a subsonic profile is rejected.
pub fn criterion_plumbing(cfg: &RunConfig, sweep: &SweepOutput, report: &ConvergenceReport) -> Result<CriterionResult, CliError> {
    let again = run_sweep(cfg)?;
    let again_report = convergence_report(&again, cfg.params.p, cfg.params.sigma)?;
    let identical = render_csv(sweep, report) == render_csv(&again, &again_report);
    let mut bad = cfg.clone();
    bad.flow.profile = crate::config::ProfileKind::Constant;
    bad.flow.base = 0.5 * cfg.params_at(cfg.params.eps).sound_speed();
    let rejected = match bad.validate() {
        Err(e @ CliError::Subsonic { .. }) => Some(e.to_string()),
        _ => None,
    };
    Ok(CriterionResult {
        id: 10,
        name: "determinism and plumbing",
        pass: identical && rejected.is_some(),
        detail: format!(
            "rerun CSV byte-identical: {identical}; subsonic profile rejected: {}",
            rejected.unwrap_or_else(|| "no".into())
        ),
    })
}

/// Everything needed to print the acceptance table.
#[derive(Debug, Clone)]
pub struct Acceptance {
    pub sweep: SweepOutput,
    pub report: ConvergenceReport,
    pub criteria: Vec<CriterionResult>,
}

impl Acceptance {
    pub fn passes(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// Runs the selected suites and returns their criteria in order.
pub fn run_acceptance(cfg: &RunConfig) -> Result<Acceptance, CliError> {
    let sweep = run_sweep(cfg)?;
    let report = convergence_report(&sweep, cfg.params.p, cfg.params.sigma)?;
    let want = |s: Suite| cfg.run.suites.contains(&s);
    let mut criteria = Vec::new();
    if want(Suite::SolverVerification) {
        let v = run_verification().map_err(|source| CliError::Case { eps: f64::NAN, stage: "verification", source })?;
        criteria.push(criterion_solver(&v));
    }
    if want(Suite::Exactness) {
        criteria.push(criterion_exactness(&run_couette_sweep(cfg)?));
    }
    if want(Suite::ResidualOrders) {
        criteria.push(criterion_residual_orders(&report));
    }
    if want(Suite::LayerOrders) {
        criteria.push(criterion_layer_orders(&report));
    }
    if want(Suite::LinearEstimates) {
        criteria.push(criterion_quadratic_form(&sweep));
        criteria.push(criterion_energy(&sweep));
    }
    if want(Suite::Contraction) {
        criteria.push(criterion_contraction(&sweep));
    }
    if want(Suite::ZeroViscosity) {
        criteria.push(criterion_zero_viscosity(&sweep, &report));
    }
    if want(Suite::EndToEnd) {
        criteria.push(criterion_end_to_end(&sweep, cfg.run.tol));
    }
    if want(Suite::Plumbing) {
        criteria.push(criterion_plumbing(cfg, &sweep, &report)?);
    }
    Ok(Acceptance { sweep, report, criteria })
}
