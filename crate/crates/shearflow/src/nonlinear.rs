//! Outer Picard iteration for the remainder about the approximate solution,
//! homogenization of the boundary data and the final norm table.

use serde::Serialize;

use crate::assembly::ApproxSolution;
use crate::domain::{BoundaryData, Grid, PhysicalParams};
use crate::error::{Error, Result};
use crate::field::{self, Diff, Field};
use crate::linear::{mollify, EnergyReport, InnerOptions, LinearProblem, LinearSolver};

/// Lifts removing the boundary mismatch and the forcing they generate.
#[derive(Debug, Clone)]
pub struct HomogenizationShift {
    pub b1: Field,
    pub b2: Field,
    /// ρ₀(x₂) − ρ_s(0, x₂) extended constantly in x₁.
    pub r0: Field,
    pub r0_x2: Field,
    /// −div b; the term −v^ε r₀′ is added per iterate.
    pub g0_static: Field,
    pub g1: Field,
    pub g2: Field,
}

impl HomogenizationShift {
    /// ḡ₀ for the transport velocity component `v_speed`.
    pub fn g0(&self, v_speed: &Field) -> Field {
        &self.g0_static - &(v_speed * &self.r0_x2)
    }

    pub fn is_zero(&self) -> bool {
        [&self.b1, &self.b2, &self.r0].iter().all(|f| f.iter().all(|&v| v == 0.0))
    }
}

/// Blends the inflow and outflow mismatches linearly in x₁ and collects the
/// forcing that the lifts produce under the linearized operator.
pub fn homogenize(
    boundary: &BoundaryData,
    approx: &ApproxSolution,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<HomogenizationShift> {
    let (n1, n2) = (grid.n1, grid.n2);
    if boundary.len() != n2 + 1 || approx.u_s.dim() != grid.shape() {
        return Err(Error::GridMismatch(format!(
            "boundary traces of length {} on a grid with {} x2 nodes",
            boundary.len(),
            n2 + 1
        )));
    }
    let [us_in, vs_in, us_out, vs_out, rs_in] = approx.traces();
    let du_in: Vec<f64> = boundary.u_in.iter().zip(&us_in).map(|(a, b)| a - b).collect();
    let dv_in: Vec<f64> = boundary.v_in.iter().zip(&vs_in).map(|(a, b)| a - b).collect();
    let du_out: Vec<f64> = boundary.u_out.iter().zip(&us_out).map(|(a, b)| a - b).collect();
    let dv_out: Vec<f64> = boundary.v_out.iter().zip(&vs_out).map(|(a, b)| a - b).collect();
    let dr: Vec<f64> = boundary.rho_in.iter().zip(&rs_in).map(|(a, b)| a - b).collect();
    let blend = |a: &[f64], b: &[f64]| {
        Field::from_shape_fn(grid.shape(), |(i, j)| {
            let s = grid.x1[i] / grid.length;
            (1.0 - s) * a[j] + s * b[j]
        })
    };
    let b1 = blend(&du_in, &du_out);
    let b2 = blend(&dv_in, &dv_out);
    let dr_x2 = field::deriv_1d(&grid.x2, &dr);
    let r0 = Field::from_shape_fn(grid.shape(), |(_, j)| dr[j]);
    let r0_x2 = Field::from_shape_fn(grid.shape(), |(_, j)| dr_x2[j]);
    debug_assert_eq!(r0.nrows(), n1 + 1);

    let diff = Diff::new(grid);
    let (eps, lam, c2) = (params.eps, params.lambda_bulk, params.sound_speed().powi(2));
    let div_b = &diff.dx1(&b1) + &diff.dx2(&b2);
    let us_x2 = diff.dx2(&approx.u_s);
    let g0_static = -&div_b;
    let g1 = -(&approx.u_s * &diff.dx1(&b1)) - &us_x2 * &b2
        + eps * &diff.lap(&b1)
        + lam * eps * &diff.dx1(&div_b);
    let g2 = -(&approx.u_s * &diff.dx1(&b2)) + eps * &diff.lap(&b2) + lam * eps * &diff.dx2(&div_b)
        - c2 * &r0_x2;
    Ok(HomogenizationShift { b1, b2, r0, r0_x2, g0_static, g1, g2 })
}

/// Residual of the steady isentropic Navier–Stokes system under the grid
/// differences: continuity, then the two momentum rows.
pub fn navier_stokes_residual(u: &Field, v: &Field, rho: &Field, params: &PhysicalParams, diff: &Diff) -> [Field; 3] {
    let (eps, lam) = (params.eps, params.lambda_bulk);
    let (ux, uy, vx, vy) = (diff.dx1(u), diff.dx2(u), diff.dx1(v), diff.dx2(v));
    let (rx, ry) = (diff.dx1(rho), diff.dx2(rho));
    let div = &ux + &vy;
    let slope = rho.mapv(|r| params.pressure_slope(r));
    let g0 = rho * &div + &(u * &rx) + &(v * &ry);
    let g1 = rho * &(u * &ux + v * &uy) - eps * diff.lap(u) - lam * eps * &diff.dx1(&div) + &slope * &rx;
    let g2 = rho * &(u * &vx + v * &vy) - eps * diff.lap(v) - lam * eps * &diff.dx2(&div) + &slope * &ry;
    [g0, g1, g2]
}

/// Homogeneous remainder iterate with its norms.
#[derive(Debug, Clone)]
pub struct RemainderState {
    pub n: usize,
    pub u: Field,
    pub v: Field,
    pub rho: Field,
    pub x_norm: f64,
    pub rho_w1p: f64,
    /// ε‖(u, v)‖_{W^{2,p}} from second differences.
    pub u_w2p: f64,
    /// Successive differences Δₙ.
    pub history: Vec<f64>,
    /// qₙ = Δₙ₊₁/Δₙ.
    pub contraction: Vec<f64>,
}

impl RemainderState {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            n: 0,
            u: field::zeros(grid),
            v: field::zeros(grid),
            rho: field::zeros(grid),
            x_norm: 0.0,
            rho_w1p: 0.0,
            u_w2p: 0.0,
            history: Vec::new(),
            contraction: Vec::new(),
        }
    }
}

/// Nonlinear remainder forcing and the full right-hand side of one linear solve.
#[derive(Debug, Clone)]
pub struct RemainderForcing {
    pub gr: [Field; 3],
    pub total: [Field; 3],
    pub u_speed: Field,
    pub v_speed: Field,
}

/// Everything fixed during the outer iteration.
#[derive(Debug, Clone)]
pub struct RemainderProblem {
    pub params: PhysicalParams,
    pub grid: Grid,
    pub diff: Diff,
    pub approx: ApproxSolution,
    pub shift: HomogenizationShift,
    /// −N_h(u_s, v_s, ρ_s) with the true pressure law.
    pub steady: [Field; 3],
    ds: [Field; 7],
}

impl RemainderProblem {
    pub fn new(approx: &ApproxSolution, shift: HomogenizationShift, params: &PhysicalParams, grid: &Grid) -> Self {
        let diff = Diff::new(grid);
        let (us, vs, rs) = (&approx.u_s, &approx.v_s, &approx.rho_s);
        let steady = navier_stokes_residual(us, vs, rs, params, &diff).map(|f| -f);
        let ds = [
            diff.dx1(us),
            diff.dx2(us),
            diff.dx1(vs),
            diff.dx2(vs),
            diff.dx1(rs),
            diff.dx2(rs),
            &diff.dx1(us) + &diff.dx2(vs),
        ];
        Self { params: *params, grid: grid.clone(), diff, approx: approx.clone(), shift, steady, ds }
    }

    /// Full remainder (u, v, ρ) = homogeneous part + lifts.
    pub fn full(&self, state: &RemainderState) -> (Field, Field, Field) {
        (&state.u + &self.shift.b1, &state.v + &self.shift.b2, &state.rho + &self.shift.r0)
    }
}

/// Nonlinear terms −[N(s + r) − N(s) − L(r)] at the current iterate plus the
/// steady and homogenization forcing.
pub fn nonlinear_rhs(state: &RemainderState, pb: &RemainderProblem) -> Result<RemainderForcing> {
    let params = &pb.params;
    let diff = &pb.diff;
    let a = &pb.approx;
    let c2 = params.sound_speed().powi(2);
    let (u, v, rho) = pb.full(state);
    for f in [&u, &v, &rho] {
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::DensityFloor { detail: "non-finite remainder iterate".into() });
        }
    }
    let rho_amp = field::linf(&rho);
    if rho_amp > 0.5 * params.rho_star {
        return Err(Error::DensityFloor {
            detail: format!("|rho| reached {rho_amp:.3e} > rho*/2 at iterate {}", state.n),
        });
    }
    let rho_eps = &a.rho_s + &rho;
    if let Some(min) = rho_eps.iter().copied().reduce(f64::min).filter(|&m| m <= 0.0) {
        return Err(Error::DensityFloor { detail: format!("rho_s + rho = {min:.3e} at iterate {}", state.n) });
    }
    let [us_x1, us_x2, vs_x1, vs_x2, rs_x1, rs_x2, div_s] = &pb.ds;
    let (ux, uy, vx, vy) = (diff.dx1(&u), diff.dx2(&u), diff.dx1(&v), diff.dx2(&v));
    let (rx, ry) = (diff.dx1(&rho), diff.dx2(&rho));
    let div = &ux + &vy;
    let (us, vs, rs) = (&a.u_s, &a.v_s, &a.rho_s);
    let rs1 = rs - 1.0;
    let w1 = us + &u;
    let w2 = vs + &v;
    let slope_eps = rho_eps.mapv(|r| params.pressure_slope(r));
    let slope_s = rs.mapv(|r| params.pressure_slope(r));
    let dp_lin = &slope_eps - c2;
    let dp_s = &slope_eps - &slope_s;

    let q0 = &rs1 * &div + &(&rho * div_s) + &(&rho * &div) + &(&u * rs_x1) + &(&v * rs_x2);
    let q1 = &rs1 * &(us * &ux)
        + &(&rs1 * &(&v * us_x2))
        + &(rs * &(vs * &uy + &u * us_x1 + &u * &ux + &v * &uy))
        + &(&rho * &(&w1 * &(us_x1 + &ux) + &w2 * &(us_x2 + &uy)))
        + &(&dp_lin * &rx)
        + &(&dp_s * rs_x1);
    let q2 = &rs1 * &(us * &vx)
        + &(rs * &(&u * vs_x1 + &u * &vx + vs * &vy + &v * vs_x2 + &v * &vy))
        + &(&rho * &(&w1 * &(vs_x1 + &vx) + &w2 * &(vs_x2 + &vy)))
        + &(&dp_lin * &ry)
        + &(&dp_s * rs_x2);
    let gr = [-q0, -q1, -q2];

    let u_speed = us + &u;
    let v_speed = vs + &v;
    let total = [
        &pb.steady[0] + &gr[0] + &pb.shift.g0(&v_speed),
        &pb.steady[1] + &gr[1] + &pb.shift.g1,
        &pb.steady[2] + &gr[2] + &pb.shift.g2,
    ];
    Ok(RemainderForcing { gr, total, u_speed, v_speed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterOptions {
    pub tol: f64,
    pub max_outer: usize,
    /// Mollification radius in cells.
    pub delta: f64,
    pub inner: InnerOptions,
}

impl Default for OuterOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_outer: 50, delta: 2.0, inner: InnerOptions::default() }
    }
}

/// Diagnostics of one converged linear solve.
#[derive(Debug, Clone, Serialize)]
pub struct LinearRecord {
    pub outer: usize,
    pub iterations: usize,
    pub energy: EnergyReport,
    pub map_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub state: RemainderState,
    pub linear: Vec<LinearRecord>,
    /// X-norm + ‖ρ‖ of every iterate.
    pub iterate_norms: Vec<f64>,
    /// Right-hand side of the last solve.
    pub forcing: [Field; 3],
}

fn state_norms(state: &mut RemainderState, pb: &RemainderProblem) {
    let (grid, diff, p, eps) = (&pb.grid, &pb.diff, pb.params.p, pb.params.eps);
    state.x_norm = field::x_norm(&state.u, &state.v, diff, grid, eps);
    state.rho_w1p = field::w1p(&state.rho, diff, grid, p);
    let second = |f: &Field| {
        field::lp(&diff.dx1x1(f), grid, p) + field::lp(&diff.dx2x2(f), grid, p) + 2.0 * field::lp(&diff.dx1x2(f), grid, p)
    };
    state.u_w2p = eps * (second(&state.u) + second(&state.v));
}

/// Iterates linear solves from the zero state until the combined X + L²
/// step falls below `opts.tol`.
pub fn picard_iterate(pb: &RemainderProblem, solver: &LinearSolver, opts: &OuterOptions) -> Result<PicardOutcome> {
    let grid = &pb.grid;
    let inner = InnerOptions { tol: opts.inner.tol.min(1e-2 * opts.tol), ..opts.inner };
    let mut state = RemainderState::zero(grid);
    let mut linear = Vec::new();
    let mut iterate_norms = Vec::new();
    let mut forcing;
    loop {
        if state.n >= opts.max_outer {
            let last = state.history.last().copied().unwrap_or(f64::NAN);
            return Err(Error::NoConvergence { iterations: state.n, last, history: state.history });
        }
        let rhs = nonlinear_rhs(&state, pb)?;
        let [f0, f1, f2] = rhs.total.clone();
        let problem = LinearProblem {
            u_speed: rhs.u_speed,
            v_speed: rhs.v_speed,
            u_conv: pb.approx.u_s.clone(),
            f0,
            f1,
            f2,
            delta: opts.delta,
            t: 1.0,
        };
        let guess = (state.n > 0).then_some((&state.u, &state.v, &state.rho));
        let sol = solver.solve_from(&problem, &inner, guess)?;
        linear.push(LinearRecord {
            outer: state.n,
            iterations: sol.iterations,
            energy: sol.energy,
            map_deviation: sol.map_deviation,
        });
        let step = field::x_norm(&(&sol.u - &state.u), &(&sol.v - &state.v), &pb.diff, grid, pb.params.eps)
            + field::l2(&(&sol.rho - &state.rho), grid);
        if let Some(&prev) = state.history.last() {
            state.contraction.push(step / prev);
        }
        state.history.push(step);
        state.u = sol.u;
        state.v = sol.v;
        state.rho = sol.rho;
        state.n += 1;
        state_norms(&mut state, pb);
        iterate_norms.push(state.x_norm + field::l2(&state.rho, grid));
        forcing = rhs.total;
        if !step.is_finite() {
            return Err(Error::NoConvergence { iterations: state.n, last: step, history: state.history });
        }
        if step <= opts.tol {
            break;
        }
    }
    Ok(PicardOutcome { state, linear, iterate_norms, forcing })
}

/// Norms of the reconstructed solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub eps: f64,
    /// ‖u^ε − μ‖_∞.
    pub u_dev: f64,
    /// ‖v^ε‖_∞.
    pub v_dev: f64,
    /// ‖ρ^ε − ρ*‖_∞.
    pub rho_dev: f64,
    /// Sum of the three deviations.
    pub field_dev: f64,
    /// ‖∇u^ε − ∇U⁰‖_∞.
    pub grad_dev: f64,
    /// ‖r‖_{L²} + ε^{1/2}‖∇r‖_{L²} + ‖ρ‖_{L²} of the full remainder.
    pub remainder_x: f64,
    /// ε‖∇²r‖_{L^p} + ‖ρ‖_{W^{1,p}} of the full remainder.
    pub remainder_w: f64,
    /// L² norm of the discrete Navier–Stokes residual on interior nodes.
    pub ns_residual: f64,
    /// L² norm of the local truncation estimate.
    pub truncation: f64,
    pub outer_iterations: usize,
}

/// Reconstructed solution (u^ε, v^ε, ρ^ε).
pub fn reconstruct(state: &RemainderState, pb: &RemainderProblem) -> (Field, Field, Field) {
    let (u, v, rho) = pb.full(state);
    (&pb.approx.u_s + &u, &pb.approx.v_s + &v, &pb.approx.rho_s + &rho)
}

fn interior(f: &Field) -> Field {
    let mut g = f.clone();
    let (n, m) = g.dim();
    for ((i, j), x) in g.indexed_iter_mut() {
        if i == 0 || j == 0 || i + 1 == n || j + 1 == m {
            *x = 0.0;
        }
    }
    g
}

/// Pointwise truncation bound for the linear operators applied to the
/// homogeneous iterate: Taylor remainders of the momentum stencils, the
/// mollification defect of the transport data, and the transport quadrature.
pub fn truncation_estimate(state: &RemainderState, pb: &RemainderProblem, forcing: &[Field; 3], delta: f64) -> Field {
    let (grid, diff) = (&pb.grid, &pb.diff);
    let eps = pb.params.eps;
    let lam = pb.params.lambda_bulk;
    let h1 = grid.h1();
    let h2 = Field::from_shape_fn(grid.shape(), |(_, j)| grid.h2(j.min(grid.n2 - 1)));
    let dh = Field::from_shape_fn(grid.shape(), |(_, j)| {
        if j == 0 || j == grid.n2 {
            0.0
        } else {
            (grid.h2(j) - grid.h2(j - 1)).abs()
        }
    });
    let momentum = |w: &Field| {
        let (w11, w22) = (diff.dx1x1(w), diff.dx2x2(w));
        let t = (h1 * h1 / 6.0) * diff.dx1x1(&w11).mapv(f64::abs)
            + &(&h2 * &h2 / 6.0 * &diff.dx2x2(&w22).mapv(f64::abs))
            + &((&h2 * &h2 + h1 * h1) / 6.0 * &diff.dx1x1(&w22).mapv(f64::abs))
            + &(&dh / 3.0 * &diff.dx2(&w22).mapv(f64::abs));
        eps * (1.0 + lam) * t
    };
    let div = &diff.dx1(&state.u) + &diff.dx2(&state.v);
    let g = &forcing[0] - &div;
    let moll = (&mollify(&g, delta) - &g).mapv(f64::abs);
    let (u, v, _) = pb.full(state);
    let speed1 = (&pb.approx.u_s + &u).mapv(f64::abs);
    let speed2 = (&pb.approx.v_s + &v).mapv(f64::abs);
    let r11 = diff.dx1x1(&state.rho);
    let r22 = diff.dx2x2(&state.rho);
    let transport = (h1 * h1 / 6.0) * &(&speed1 * &diff.dx1(&r11).mapv(f64::abs))
        + &(&h2 * &h2 / 6.0 * &(&speed2 * &diff.dx2(&r22).mapv(f64::abs)))
        + &(&h2 * &h2 / 8.0 * &r22.mapv(f64::abs));
    let t0 = &moll + &transport;
    let (t1, t2) = (momentum(&state.u), momentum(&state.v));
    (&t0 * &t0 + &t1 * &t1 + &t2 * &t2).mapv(f64::sqrt)
}

/// Norm table of the reconstructed solution against the base flow.
pub fn final_report(outcome: &PicardOutcome, pb: &RemainderProblem, delta: f64) -> NormReport {
    let state = &outcome.state;
    let (grid, diff, params) = (&pb.grid, &pb.diff, &pb.params);
    let (ue, ve, re) = reconstruct(state, pb);
    let du = &ue - &pb.approx.mu;
    let u_dev = field::linf(&du);
    let v_dev = field::linf(&ve);
    let rho_dev = field::linf(&(&re - params.rho_star));
    let grad_dev = [diff.dx1(&du), diff.dx2(&ue) - &pb.approx.mu1, diff.dx1(&ve), diff.dx2(&ve)]
        .iter()
        .map(field::linf)
        .fold(0.0, f64::max);
    let (u, v, rho) = pb.full(state);
    let remainder_x = field::x_norm(&u, &v, diff, grid, params.eps) + field::l2(&rho, grid);
    let p = params.p;
    let hess = |f: &Field| {
        field::lp(&diff.dx1x1(f), grid, p) + field::lp(&diff.dx2x2(f), grid, p) + 2.0 * field::lp(&diff.dx1x2(f), grid, p)
    };
    let remainder_w = params.eps * (hess(&u) + hess(&v)) + field::w1p(&rho, diff, grid, p);
    let res = navier_stokes_residual(&ue, &ve, &re, params, diff);
    let ns_residual = res.iter().map(|r| field::l2(&interior(r), grid).powi(2)).sum::<f64>().sqrt();
    let tau = truncation_estimate(state, pb, &outcome.forcing, delta);
    let truncation = field::l2(&interior(&tau), grid);
    NormReport {
        eps: params.eps,
        u_dev,
        v_dev,
        rho_dev,
        field_dev: u_dev + v_dev + rho_dev,
        grad_dev,
        remainder_x,
        remainder_w,
        ns_residual,
        truncation,
        outer_iterations: state.n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, build_correctors, CorrectorOptions};
    use crate::domain::{build_grid, BaseFlow, Grading, PERTURBATION_MODES};
    use approx::assert_relative_eq;

    fn setup(flow: &BaseFlow, eps: f64) -> (PhysicalParams, Grid, ApproxSolution) {
        let params = PhysicalParams { eps, ..Default::default() };
        let grid = build_grid(&params, 16, 64, Grading::default()).unwrap();
        let c = build_correctors(flow, &params, &grid, &CorrectorOptions::default()).unwrap();
        let approx = assemble([&c.euler[0], &c.euler[1]], [&c.layer[0], &c.layer[1]], flow, eps, &grid).unwrap();
        (params, grid, approx)
    }

    fn exact_boundary(approx: &ApproxSolution) -> BoundaryData {
        let [a, b, c, d, e] = approx.traces();
        BoundaryData::new(a, b, c, d, e).unwrap()
    }

    #[test]
    fn matched_boundary_gives_zero_shift() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let shift = homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap();
        assert!(shift.is_zero());
        for g in [&shift.g0_static, &shift.g1, &shift.g2] {
            assert_eq!(field::linf(g), 0.0);
        }
    }

    #[test]
    fn inflow_mismatch_blends_linearly() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let mut bd = exact_boundary(&approx);
        let phi: Vec<f64> = grid.x2.iter().map(|&y| 1e-3 * (std::f64::consts::PI * y).sin()).collect();
        bd.u_in.iter_mut().zip(&phi).for_each(|(u, p)| *u += p);
        let shift = homogenize(&bd, &approx, &params, &grid).unwrap();
        for i in 0..=grid.n1 {
            for j in 0..=grid.n2 {
                let s = 1.0 - grid.x1[i] / grid.length;
                assert_relative_eq!(shift.b1[[i, j]], s * phi[j], epsilon = 1e-15);
            }
        }
        assert_eq!(field::linf(&shift.b2), 0.0);
    }

    #[test]
    fn zero_state_has_zero_nonlinear_terms() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let shift = homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap();
        let pb = RemainderProblem::new(&approx, shift, &params, &grid);
        let rhs = nonlinear_rhs(&RemainderState::zero(&grid), &pb).unwrap();
        for g in &rhs.gr {
            assert_eq!(field::linf(g), 0.0);
        }
        for k in 0..3 {
            assert_eq!(rhs.total[k], pb.steady[k]);
        }
    }

    #[test]
    fn quadratic_pressure_defect_closed_form() {
        // γ = 2, a = 1/2: p'(ρ) = ρ, so c² − p'(ρ_s + ρ̄) = 1 − ρ_s − ρ̄.
        let flow = BaseFlow::constant(2.0).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let rho_bar = 0.01;
        let pb = RemainderProblem::new(&approx, homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap(), &params, &grid);
        let defect = approx.rho_s.mapv(|r| params.sound_speed().powi(2) - params.pressure_slope(r + rho_bar));
        let closed = approx.rho_s.mapv(|r| 1.0 - (r + rho_bar));
        assert!(field::linf(&(&defect - &closed)) < 1e-15);
        // Constant ρ̄ and zero velocity: the only nonlinear momentum terms are
        // the pressure couplings to ∇ρ_s.
        let mut state = RemainderState::zero(&grid);
        state.rho.fill(rho_bar);
        let rhs = nonlinear_rhs(&state, &pb).unwrap();
        let expect = (&approx.rho_s + rho_bar).mapv(|r| -(params.pressure_slope(r))) + &approx.rho_s.mapv(|r| params.pressure_slope(r));
        let want = &expect * &pb.diff.dx1(&approx.rho_s);
        assert!(field::linf(&(&rhs.gr[1] - &want)) < 1e-14);
    }

    #[test]
    fn quadratic_terms_scale_with_amplitude_squared() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let shift = homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap();
        let pb = RemainderProblem::new(&approx, shift, &params, &grid);
        let shape = |x: f64, y: f64| (std::f64::consts::PI * x / grid.length).sin() * (std::f64::consts::PI * y / 2.0).sin();
        let base = field::from_fn(&grid, shape);
        let eval = |a: f64| {
            let mut s = RemainderState::zero(&grid);
            s.u = a * &base;
            s.v = (0.5 * a) * &base;
            s.rho = (0.3 * a) * &base;
            nonlinear_rhs(&s, &pb).unwrap().gr
        };
        // Second differences in the amplitude isolate the quadratic part.
        let quad = |a: f64| {
            let (p, m) = (eval(a), eval(-a));
            (0..3).map(|k| field::l2(&(0.5 * (&p[k] + &m[k])), &grid).powi(2)).sum::<f64>().sqrt()
        };
        let a = 1e-4;
        let ratio = quad(2.0 * a) / quad(a);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn couette_remainder_vanishes() {
        let flow = BaseFlow::couette(2.0, 2.5).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let shift = homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap();
        let pb = RemainderProblem::new(&approx, shift, &params, &grid);
        let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
        let out = picard_iterate(&pb, &solver, &OuterOptions::default()).unwrap();
        assert!(field::linf(&out.state.u) <= 1e-10);
        assert!(field::linf(&out.state.rho) <= 1e-10);
        let rep = final_report(&out, &pb, 2.0);
        assert!(rep.u_dev <= 1e-10 && rep.v_dev <= 1e-10 && rep.rho_dev <= 1e-10, "{rep:?}");
    }

    #[test]
    fn perturbed_case_contracts() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let amp = params.eps.powf(params.perturbation_exponent());
        let coeffs = [[1.0, -0.4, 0.2], [0.5, 0.3, -0.2], [-0.7, 0.2, 0.1], [0.2, -0.5, 0.3], [0.6, 0.1, -0.3]];
        assert_eq!(coeffs[0].len(), PERTURBATION_MODES);
        let bd = exact_boundary(&approx).perturbed(&grid.x2, &coeffs, amp).unwrap();
        let shift = homogenize(&bd, &approx, &params, &grid).unwrap();
        let pb = RemainderProblem::new(&approx, shift, &params, &grid);
        let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
        let out = picard_iterate(&pb, &solver, &OuterOptions::default()).unwrap();
        println!("history {:?}", out.state.history);
        println!("q {:?}", out.state.contraction);
        let rep = final_report(&out, &pb, 2.0);
        println!("{rep:?}");
        assert!(out.state.contraction.iter().skip(1).all(|&q| q <= 0.6));
    }

    #[test]
    fn density_floor_guard() {
        let flow = BaseFlow::constant(2.0).unwrap();
        let (params, grid, approx) = setup(&flow, 0.1);
        let pb = RemainderProblem::new(&approx, homogenize(&exact_boundary(&approx), &approx, &params, &grid).unwrap(), &params, &grid);
        let mut state = RemainderState::zero(&grid);
        state.rho.fill(0.6);
        assert!(matches!(nonlinear_rhs(&state, &pb), Err(Error::DensityFloor { .. })));
    }
}
