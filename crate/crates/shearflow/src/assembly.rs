//! Approximate solution u_s = μ + εU, v_s = εV, ρ_s = 1 + εP assembled from
//! the four correctors, and its forcing residuals.

use serde::Serialize;

use crate::domain::{BaseFlow, Grid, PhysicalParams};
use crate::error::{Error, Result};
use crate::euler::{second_corrector_boundary_data, solve_hyperbolic, EulerCorrector, HyperbolicSystem};
use crate::field::{self, Diff, Field};
use crate::prandtl::{build_layer, LayerCorrector, LayerGrid, LayerInputs};

/// Tuning knobs of the corrector construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectorOptions {
    /// Cutoff width of the second corrector's inflow data.
    pub b: f64,
    /// Layer cutoff scale.
    pub a0: f64,
    pub cfl: f64,
    pub layer_dy: f64,
    pub layer_y_max: f64,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        Self {
            b: 0.25,
            a0: 0.4,
            cfl: 0.9,
            layer_dy: 0.025,
            layer_y_max: 12.0,
        }
    }
}

/// The two Euler and two layer correctors.
#[derive(Debug, Clone)]
pub struct Correctors {
    pub euler: [EulerCorrector; 2],
    pub layer: [LayerCorrector; 2],
    pub systems: [HyperbolicSystem; 2],
}

/// Builds e¹, then the first layer, then e² from the layer traces, then the second layer.
pub fn build_correctors(
    flow: &BaseFlow,
    params: &PhysicalParams,
    grid: &Grid,
    opts: &CorrectorOptions,
) -> Result<Correctors> {
    let c = params.sound_speed();
    let mut lgrid = LayerGrid::new(grid.x1.clone(), opts.layer_dy, opts.layer_y_max)?;
    lgrid.max_dx = lgrid.max_dx.min(grid.h1());
    let mut sys1 = HyperbolicSystem::first(flow, params, grid);
    sys1.cfl = opts.cfl;
    let e1 = solve_hyperbolic(&sys1, grid)?;
    let (lower, upper) = (e1.u.column(0).to_vec(), e1.u.column(grid.n2).to_vec());
    let l1 = build_layer(
        &LayerInputs {
            order: 1,
            corner_derivs: e1.corner_derivs.unwrap_or_default(),
            wall_u: [&lower, &upper],
        },
        flow,
        params,
        grid,
        &lgrid,
        opts.a0,
    )?;
    let [w0, w1] = l1.wall_v();
    // Corner values from the discrete layer so that the wall traces cancel exactly.
    let mut traces = l1.corner_traces;
    traces.v = [w0[0], w1[0]];
    let inflow = second_corrector_boundary_data(&traces, opts.b, flow, c, &grid.x2)?;
    let wall_v = [w0.iter().map(|v| -v).collect(), w1.iter().map(|v| -v).collect()];
    let mut sys2 = HyperbolicSystem::second(flow, params, grid, &inflow, wall_v)?;
    sys2.cfl = opts.cfl;
    let e2 = solve_hyperbolic(&sys2, grid)?;
    let lower: Vec<f64> = e2.u.column(0).to_vec();
    let upper: Vec<f64> = e2.u.column(grid.n2).to_vec();
    let l2 = build_layer(
        &LayerInputs {
            order: 2,
            corner_derivs: e2.corner_derivs.unwrap_or_default(),
            wall_u: [&lower, &upper],
        },
        flow,
        params,
        grid,
        &lgrid,
        opts.a0,
    )?;
    Ok(Correctors {
        euler: [e1, e2],
        layer: [l1, l2],
        systems: [sys1, sys2],
    })
}

/// Base flow plus correctors with the component bundles used by the residuals.
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub eps: f64,
    pub u_s: Field,
    pub v_s: Field,
    pub rho_s: Field,
    /// μ on the grid.
    pub mu: Field,
    pub mu1: Field,
    /// u_e¹ + √ε u_e².
    pub ue: Field,
    /// u_p¹ + √ε u_p².
    pub up: Field,
    /// v_e¹ + √ε v_e².
    pub ve: Field,
    /// √ε v_p¹ + ε v_p².
    pub vp: Field,
    /// ρ_e¹ + √ε ρ_e².
    pub pe: Field,
    pub vp1: Field,
    pub vp2: Field,
    /// C_cut + C_app of each order.
    pub c1: Field,
    pub c2: Field,
    /// max|u_s − μ(wall)| on the walls.
    pub wall_u_error: f64,
    /// max|v_s| on the walls.
    pub wall_v_error: f64,
}

impl ApproxSolution {
    /// Traces of (u_s, v_s) at x₁ = 0 and x₁ = L and ρ_s at x₁ = 0.
    pub fn traces(&self) -> [Vec<f64>; 5] {
        let n1 = self.u_s.nrows() - 1;
        [
            self.u_s.row(0).to_vec(),
            self.v_s.row(0).to_vec(),
            self.u_s.row(n1).to_vec(),
            self.v_s.row(n1).to_vec(),
            self.rho_s.row(0).to_vec(),
        ]
    }
}

fn check_shape(f: &Field, grid: &Grid, what: &str) -> Result<()> {
    if f.dim() != grid.shape() {
        return Err(Error::GridMismatch(format!(
            "{what} has shape {:?}, grid is {:?}",
            f.dim(),
            grid.shape()
        )));
    }
    Ok(())
}

/// Linear combination with the ε powers of the expansion (reference density 1).
pub fn assemble(
    euler: [&EulerCorrector; 2],
    layer: [&LayerCorrector; 2],
    flow: &BaseFlow,
    eps: f64,
    grid: &Grid,
) -> Result<ApproxSolution> {
    for (k, e) in euler.iter().enumerate() {
        check_shape(&e.u, grid, &format!("euler corrector {}", k + 1))?;
    }
    for (k, l) in layer.iter().enumerate() {
        check_shape(&l.u, grid, &format!("layer corrector {}", k + 1))?;
    }
    let se = eps.sqrt();
    let mu = field::from_fn(grid, |_, y| flow.mu(y));
    let mu1 = field::from_fn(grid, |_, y| flow.deriv(1, y));
    let ue = &euler[0].u + &(se * &euler[1].u);
    let ve = &euler[0].v + &(se * &euler[1].v);
    let pe = &euler[0].rho + &(se * &euler[1].rho);
    let up = &layer[0].u + &(se * &layer[1].u);
    let vp = &(se * &layer[0].v) + &(eps * &layer[1].v);
    let u_s = &mu + &(eps * (&ue + &up));
    let v_s = eps * (&ve + &vp);
    let rho_s = 1.0 + eps * &pe;
    let n2 = grid.n2;
    let mut wall_u_error: f64 = 0.0;
    let mut wall_v_error: f64 = 0.0;
    for i in 0..=grid.n1 {
        wall_u_error = wall_u_error.max((u_s[[i, 0]] - flow.v0).abs()).max((u_s[[i, n2]] - flow.v1).abs());
        wall_v_error = wall_v_error.max(v_s[[i, 0]].abs()).max(v_s[[i, n2]].abs());
    }
    Ok(ApproxSolution {
        eps,
        c1: &layer[0].c_cut + &layer[0].c_app,
        c2: &layer[1].c_cut + &layer[1].c_app,
        vp1: layer[0].v.clone(),
        vp2: layer[1].v.clone(),
        u_s,
        v_s,
        rho_s,
        mu,
        mu1,
        ue,
        up,
        ve,
        vp,
        pe,
        wall_u_error,
        wall_v_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Centered differences of the full operator.
    Operator,
    /// Term-by-term expansion remainders.
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub g0_l2: f64,
    pub g0_w1p: f64,
    pub gs_lp: f64,
    pub gs_linf: f64,
}

#[derive(Debug, Clone)]
pub struct ForcingResiduals {
    pub g0: Field,
    pub g1: Field,
    pub g2: Field,
    pub canonical: Route,
    pub operator: [Field; 3],
    pub expansion: [Field; 3],
    /// ‖operator − expansion‖ in L².
    pub discrepancy: f64,
    /// ‖discrete corrector residuals‖ in L², the size the discrepancy should match.
    pub corrector_residual: f64,
    pub floor: f64,
    pub agree: bool,
    pub norms: ResidualNorms,
}

fn vec_l2(f: &[Field; 3], grid: &Grid) -> f64 {
    f.iter().map(|g| field::l2(g, grid).powi(2)).sum::<f64>().sqrt()
}

/// ‖(g₁, g₂)‖ in L^p with the pointwise Euclidean magnitude.
pub fn vector_lp(g1: &Field, g2: &Field, grid: &Grid, p: f64) -> f64 {
    let mag = ndarray::Zip::from(g1).and(g2).map_collect(|a, b| a.hypot(*b));
    field::lp(&mag, grid, p)
}

pub fn vector_linf(g1: &Field, g2: &Field) -> f64 {
    g1.iter().zip(g2).fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
}

/// Steady operator with linearized pressure: (ρ div u + u·∇ρ, ρu·∇u − εΔu − λε∇div u + c²∇ρ).
pub fn operator(u: &Field, v: &Field, rho: &Field, params: &PhysicalParams, diff: &Diff) -> [Field; 3] {
    let (eps, lam, c2) = (params.eps, params.lambda_bulk, params.sound_speed().powi(2));
    let (ux, uy, vx, vy) = (diff.dx1(u), diff.dx2(u), diff.dx1(v), diff.dx2(v));
    let (rx, ry) = (diff.dx1(rho), diff.dx2(rho));
    let div = &ux + &vy;
    let (divx, divy) = (diff.dx1(&div), diff.dx2(&div));
    let g0 = rho * &div + &(u * &rx) + &(v * &ry);
    let g1 = rho * &(u * &ux + v * &uy) - eps * diff.lap(u) - lam * eps * &divx + c2 * &rx;
    let g2 = rho * &(u * &vx + v * &vy) - eps * diff.lap(v) - lam * eps * &divy + c2 * &ry;
    [g0, g1, g2]
}

/// Both residual routes and their cross-check.
pub fn forcing_residuals(
    approx: &ApproxSolution,
    correctors: &Correctors,
    params: &PhysicalParams,
    grid: &Grid,
    flow: &BaseFlow,
) -> ForcingResiduals {
    let diff = Diff::new(grid);
    let eps = params.eps;
    let se = eps.sqrt();
    let e15 = eps * se;
    let e2 = eps * eps;
    let lam = params.lambda_bulk;
    let operator_route = operator(&approx.u_s, &approx.v_s, &approx.rho_s, params, &diff);

    let u = &approx.ue + &approx.up;
    let v = &approx.ve + &approx.vp;
    let p = &approx.pe;
    let (ux, uy, vx, vy) = (diff.dx1(&u), diff.dx2(&u), diff.dx1(&v), diff.dx2(&v));
    let (px, py) = (diff.dx1(p), diff.dx2(p));
    let div_e = &diff.dx1(&approx.ue) + &diff.dx2(&approx.ve);
    let (div_ex, div_ey) = (diff.dx1(&div_e), diff.dx2(&div_e));
    let mu = &approx.mu;
    let mu1 = &approx.mu1;
    let rho_s = &approx.rho_s;

    let g0 = e2 * &(p * &div_e + &(&u * &px) + &(&v * &py));
    let vp_sum = &approx.vp1 + &(se * &approx.vp2);
    let g1 = eps * &approx.c1
        + e15 * &approx.c2
        + e15 * &(mu1 * &vp_sum)
        + e2 * &(p * &(mu * &ux + mu1 * &v))
        + e2 * &(rho_s * &(&u * &ux + &v * &uy))
        - e2 * &(diff.lap(&approx.ue) + diff.dx1x1(&approx.up))
        - lam * e2 * &div_ex;
    let g2 = mu * &(e15 * &diff.dx1(&approx.vp1) + e2 * &diff.dx1(&approx.vp2))
        + e2 * &(p * &(mu * &vx))
        + e2 * &(rho_s * &(&u * &vx + &v * &vy))
        - e2 * &diff.lap(&approx.ve)
        - e2 * &diff.lap(&approx.vp)
        - lam * e2 * &div_ey;
    let expansion = [g0, g1, g2];

    // Discrete residuals of the corrector equations under the same differences.
    let mut r = [field::zeros(grid), field::zeros(grid), field::zeros(grid)];
    for (k, (e, sys)) in correctors.euler.iter().zip(&correctors.systems).enumerate() {
        let w = if k == 0 { eps } else { e15 };
        let rows = euler_rows(sys, grid, e, &diff);
        for c in 0..3 {
            r[c] = &r[c] + &(w * &rows[c]);
        }
    }
    for (k, l) in correctors.layer.iter().enumerate() {
        let w = if k == 0 { eps } else { e15 };
        let vphys = if k == 0 { se * &l.v } else { eps * &l.v };
        let lay_div = &diff.dx1(&l.u) + &(diff.dx2(&vphys) / if k == 0 { 1.0 } else { se });
        let cfield = &l.c_cut + &l.c_app;
        let heat = &(mu * &diff.dx1(&l.u)) - &(eps * &diff.dx2x2(&l.u)) - &cfield;
        let div_w = w * &lay_div;
        r[0] = &r[0] + &(rho_s * &div_w);
        r[1] = &r[1] + &(w * &heat) - lam * eps * &diff.dx1(&div_w);
        r[2] = &r[2] - lam * eps * &diff.dx2(&div_w);
    }
    let mut dif = [field::zeros(grid), field::zeros(grid), field::zeros(grid)];
    for c in 0..3 {
        dif[c] = &operator_route[c] - &expansion[c];
    }
    let discrepancy = vec_l2(&dif, grid);
    let corrector_residual = vec_l2(&r, grid);
    let floor = 1e-12 + 10.0 * eps * grid.h_max().powi(2) * (1.0 + flow.derivative_bound());
    let agree = discrepancy <= 10.0 * corrector_residual + floor;
    let (canonical, [g0, g1, g2]) = if agree {
        (Route::Expansion, expansion.clone())
    } else {
        (Route::Operator, operator_route.clone())
    };
    let norms = ResidualNorms {
        g0_l2: field::l2(&g0, grid),
        g0_w1p: field::w1p(&g0, &diff, grid, params.p),
        gs_lp: vector_lp(&g1, &g2, grid, params.p),
        gs_linf: vector_linf(&g1, &g2),
    };
    ForcingResiduals {
        g0,
        g1,
        g2,
        canonical,
        operator: operator_route,
        expansion,
        discrepancy,
        corrector_residual,
        floor,
        agree,
        norms,
    }
}

/// Pointwise A U_x₁ + B U_x₂ + D U − F with the shared differences.
fn euler_rows(sys: &HyperbolicSystem, grid: &Grid, e: &EulerCorrector, diff: &Diff) -> [Field; 3] {
    let c2 = sys.c * sys.c;
    let (ux, vx, rx, vy, ry) = (
        diff.dx1(&e.u),
        diff.dx1(&e.v),
        diff.dx1(&e.rho),
        diff.dx2(&e.v),
        diff.dx2(&e.rho),
    );
    let mut rows = [field::zeros(grid), field::zeros(grid), field::zeros(grid)];
    for i in 0..=grid.n1 {
        for j in 0..=grid.n2 {
            let y = grid.x2[j];
            let (mu, mu1) = (sys.flow.mu(y), sys.flow.deriv(1, y));
            let f = match sys.order {
                1 => [0.0, sys.flow.deriv(2, y), 0.0],
                _ => [0.0; 3],
            };
            rows[0][[i, j]] = ux[[i, j]] + vy[[i, j]] + mu * rx[[i, j]] - f[0];
            rows[1][[i, j]] = mu * ux[[i, j]] + mu1 * e.v[[i, j]] + c2 * rx[[i, j]] - f[1];
            rows[2][[i, j]] = mu * vx[[i, j]] + c2 * ry[[i, j]] - f[2];
        }
    }
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub violation: f64,
    pub estimate: f64,
    pub pass: bool,
}

/// Checks ∂x₁u + ∂_Y v = 0 for the post-cutoff layer profiles on the layer grid,
/// node by node against the local centered-difference truncation estimate.
pub fn divergence_free_layer_check(layers: &[&LayerCorrector]) -> DivergenceReport {
    let mut violation: f64 = 0.0;
    let mut estimate: f64 = 0.0;
    let mut pass = true;
    for l in layers {
        let dy = l.lgrid.dy;
        let beta = l.sqrt_eps / l.a0;
        let y = l.lgrid.y();
        let psi: Vec<f64> = y.iter().map(|&t| crate::smooth::chi(beta * t, 0)).collect();
        for w in &l.walls {
            let (nx, ny) = w.u.dim();
            for i in 0..nx {
                let pv: Vec<f64> = (0..ny).map(|j| psi[j] * w.v0[[i, j]]).collect();
                let mut est = vec![0.0; ny];
                for j in 2..ny - 2 {
                    let ux = &w.pre.ux1;
                    let uyy = (ux[[i, j + 1]] - 2.0 * ux[[i, j]] + ux[[i, j - 1]]) / (dy * dy);
                    let vyyy = (pv[j + 2] - 2.0 * pv[j + 1] + 2.0 * pv[j - 1] - pv[j - 2]) / (2.0 * dy.powi(3));
                    est[j] = dy * dy * (psi[j] * uyy.abs() / 4.0 + vyyy.abs() / 6.0);
                }
                for j in 2..ny - 2 {
                    let dv = (w.v[[i, j + 1]] - w.v[[i, j - 1]]) / (2.0 * dy);
                    let vi = (w.u_x1[[i, j]] + dv).abs();
                    let local = est[j.saturating_sub(2)..(j + 3).min(ny)]
                        .iter()
                        .fold(0.0, |m: f64, &e| m.max(e));
                    violation = violation.max(vi);
                    estimate = estimate.max(local);
                    if vi > 10.0 * local + 1e-12 {
                        pass = false;
                    }
                }
            }
        }
    }
    DivergenceReport {
        violation,
        estimate,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, Grading};

    fn setup(flow: &BaseFlow, eps: f64) -> (PhysicalParams, Grid, Correctors) {
        let params = PhysicalParams {
            eps,
            ..Default::default()
        };
        let grid = build_grid(&params, 16, 96, Grading::default()).unwrap();
        let c = build_correctors(flow, &params, &grid, &CorrectorOptions::default()).unwrap();
        (params, grid, c)
    }

    #[test]
    fn couette_assembles_to_base_flow() {
        let flow = BaseFlow::couette(2.0, 2.5).unwrap();
        let (params, grid, c) = setup(&flow, 0.1);
        let a = assemble(
            [&c.euler[0], &c.euler[1]],
            [&c.layer[0], &c.layer[1]],
            &flow,
            params.eps,
            &grid,
        )
        .unwrap();
        assert!(field::linf(&(&a.u_s - &a.mu)) < 1e-14);
        assert!(field::linf(&a.v_s) < 1e-14);
        assert!(field::linf(&(&a.rho_s - 1.0)) < 1e-14);
        let r = forcing_residuals(&a, &c, &params, &grid, &flow);
        assert!(r.norms.g0_l2 < 1e-14 && r.norms.gs_linf < 1e-12);
    }

    #[test]
    fn zero_eps_returns_base_flow() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (_, grid, c) = setup(&flow, 0.1);
        let a = assemble(
            [&c.euler[0], &c.euler[1]],
            [&c.layer[0], &c.layer[1]],
            &flow,
            0.0,
            &grid,
        )
        .unwrap();
        assert_eq!(field::linf(&(&a.u_s - &a.mu)), 0.0);
        assert_eq!(field::linf(&a.v_s), 0.0);
    }

    #[test]
    fn default_wall_traces_vanish() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, c) = setup(&flow, 0.1);
        let a = assemble(
            [&c.euler[0], &c.euler[1]],
            [&c.layer[0], &c.layer[1]],
            &flow,
            params.eps,
            &grid,
        )
        .unwrap();
        assert!(a.wall_v_error <= 1e-12, "{}", a.wall_v_error);
        assert!(a.wall_u_error <= 1e-12, "{}", a.wall_u_error);
        assert!(a.rho_s.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn routes_agree_for_default_profile() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, grid, c) = setup(&flow, 0.1);
        let a = assemble(
            [&c.euler[0], &c.euler[1]],
            [&c.layer[0], &c.layer[1]],
            &flow,
            params.eps,
            &grid,
        )
        .unwrap();
        let r = forcing_residuals(&a, &c, &params, &grid, &flow);
        assert!(
            r.agree,
            "discrepancy {} vs corrector residual {}",
            r.discrepancy, r.corrector_residual
        );
        assert_eq!(r.canonical, Route::Expansion);
    }

    #[test]
    fn layer_continuity_and_fault_injection() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (_, _, mut c) = setup(&flow, 0.1);
        let ok = divergence_free_layer_check(&[&c.layer[0]]);
        assert!(ok.pass, "{ok:?}");
        let l = &mut c.layer[0].walls[0];
        for i in 0..l.v.nrows() {
            for j in 20..40 {
                l.v[[i, j]] += 0.01;
            }
        }
        assert!(!divergence_free_layer_check(&[&c.layer[0]]).pass);
    }

    #[test]
    fn mismatched_grid_rejected() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        let (params, _, c) = setup(&flow, 0.1);
        let other = build_grid(&params, 8, 96, Grading::default()).unwrap();
        assert!(matches!(
            assemble(
                [&c.euler[0], &c.euler[1]],
                [&c.layer[0], &c.layer[1]],
                &flow,
                params.eps,
                &other
            ),
            Err(Error::GridMismatch(_))
        ));
    }
}
