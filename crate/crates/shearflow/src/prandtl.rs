//! Weak boundary-layer correctors: constant-coefficient heat problems
//! A·∂x₁u − ∂YYu = 0 on the half strip, continuity for v, and the cutoff into
//! physical space.

use ndarray::Array2;
use serde::Serialize;

use crate::domain::{BaseFlow, Grid, PhysicalParams};
use crate::error::{Error, Result};
use crate::euler::LayerCornerTraces;
use crate::field::{self, Field};
use crate::smooth::{chi, far_weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wall {
    Lower,
    Upper,
}

impl Wall {
    pub fn position(self) -> f64 {
        match self {
            Wall::Lower => 0.0,
            Wall::Upper => 2.0,
        }
    }

    /// Sign relating layer-frame v to physical v.
    pub fn v_sign(self) -> f64 {
        match self {
            Wall::Lower => 1.0,
            Wall::Upper => -1.0,
        }
    }
}

/// Uniform stretched-coordinate grid shared by both walls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerGrid {
    pub x1: Vec<f64>,
    pub dy: f64,
    pub y_max: f64,
    /// Largest implicit substep in x₁.
    pub max_dx: f64,
}

impl LayerGrid {
    pub fn new(x1: Vec<f64>, dy: f64, y_max: f64) -> Result<Self> {
        if y_max < 8.0 || !(dy > 0.0 && dy <= 0.05) {
            return Err(Error::InvalidParams(format!("layer grid needs Y_max >= 8 and dY <= 0.05, got {y_max}, {dy}")));
        }
        if x1.len() < 2 {
            return Err(Error::InvalidParams("layer grid needs x1 nodes".into()));
        }
        Ok(Self { x1, dy, y_max, max_dx: 1e-4 })
    }

    pub fn standard(grid: &Grid) -> Self {
        Self { x1: grid.x1.clone(), dy: 0.025, y_max: 12.0, max_dx: 1e-4 }
    }

    pub fn ny(&self) -> usize {
        (self.y_max / self.dy).round() as usize
    }

    pub fn y(&self) -> Vec<f64> {
        (0..=self.ny()).map(|j| j as f64 * self.dy).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x1.len(), self.ny() + 1)
    }
}

/// Coefficients a₂ₖ of the polynomial part −Σₖ Aᵏ/(2k)!·dₖ·Y²ᵏ, indexed by power.
pub fn initial_coefficients(order: u8, corner_derivs: &[f64], wall_const: f64) -> Vec<f64> {
    let terms = if order == 1 { 4 } else { 2 };
    let mut coef = vec![0.0; 2 * terms + 1];
    for k in 1..=terms {
        let d = corner_derivs.get(k - 1).copied().unwrap_or(0.0);
        let fact: f64 = (1..=2 * k).map(|v| v as f64).product();
        coef[2 * k] = -wall_const.powi(k as i32) / fact * d;
    }
    coef
}

fn poly(coef: &[f64], y: f64, k: usize) -> f64 {
    coef.iter().enumerate().skip(k).rev().fold(0.0, |acc, (p, &c)| {
        let fall: f64 = (p - k + 1..=p).map(|v| v as f64).product();
        acc * y + c * fall
    })
}

/// Inflow profile of the layer problem: the polynomial times χ(Y).
pub fn layer_initial_polynomial(order: u8, corner_derivs: &[f64], wall_const: f64, y: &[f64]) -> Vec<f64> {
    let coef = initial_coefficients(order, corner_derivs, wall_const);
    y.iter().map(|&t| poly(&coef, t, 0) * chi(t, 0)).collect()
}

/// Physical v_p and ∂x₁v_p at the inflow corner implied by the polynomial data:
/// v(0) = −u′(0)/A and ∂x₁v(0) = −u‴(0)/A² for the order-1 profile.
pub fn inflow_corner_traces(coefs: [&[f64]; 2], wall_consts: [f64; 2]) -> LayerCornerTraces {
    let mut t = LayerCornerTraces::default();
    for (w, wall) in [Wall::Lower, Wall::Upper].into_iter().enumerate() {
        let a = wall_consts[w];
        t.v[w] = wall.v_sign() * (-poly(coefs[w], 0.0, 1) / a);
        t.v_x1[w] = wall.v_sign() * (-poly(coefs[w], 0.0, 3) / (a * a));
    }
    t
}

/// Pre-cutoff solution on the layer grid.
#[derive(Debug, Clone)]
pub struct HalfStripSolution {
    pub u: Array2<f64>,
    /// x₁-derivative taken from the scheme's last backward difference.
    pub ux1: Array2<f64>,
    pub residual: f64,
    pub substeps: usize,
}

fn thomas(sub: f64, diag: f64, sup: f64, rhs: &mut [f64]) {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut b = diag;
    c[0] = sup / b;
    rhs[0] /= b;
    for k in 1..n {
        b = diag - sub * c[k - 1];
        c[k] = sup / b;
        rhs[k] = (rhs[k] - sub * rhs[k - 1]) / b;
    }
    for k in (0..n - 1).rev() {
        rhs[k] -= c[k] * rhs[k + 1];
    }
}

fn second_difference(u: &[f64], dy: f64) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dy * dy);
    }
    out
}

/// Implicit Euler marching for A·u_x₁ − u_YY = rhs with u(x₁,0) = −wall_data(x₁),
/// u(x₁,Y_max) = 0 and u(0,·) = init.
pub fn solve_half_strip_parabolic(
    wall_const: f64,
    init: &[f64],
    wall_data: &[f64],
    rhs: Option<&Array2<f64>>,
    lgrid: &LayerGrid,
) -> Result<HalfStripSolution> {
    let (nx, ny1) = lgrid.shape();
    if init.len() != ny1 || wall_data.len() != nx || rhs.is_some_and(|r| r.dim() != (nx, ny1)) {
        return Err(Error::GridMismatch("layer data does not match the layer grid".into()));
    }
    if !(wall_const > 0.0) {
        return Err(Error::InvalidParams("wall constant must be positive".into()));
    }
    let mismatch = (init[0] + wall_data[0]).abs();
    if mismatch > 1e-12 {
        return Err(Error::CornerMismatch { mismatch });
    }
    let dy = lgrid.dy;
    let a = wall_const;
    let mut u = Array2::zeros((nx, ny1));
    let mut ux1 = Array2::zeros((nx, ny1));
    let mut cur = init.to_vec();
    cur[ny1 - 1] = 0.0;
    let d2 = second_difference(&cur, dy);
    for j in 0..ny1 {
        u[[0, j]] = cur[j];
        let r = rhs.map_or(0.0, |r| r[[0, j]]);
        ux1[[0, j]] = if j == 0 || j == ny1 - 1 { 0.0 } else { (d2[j] + r) / a };
    }
    let slope0 = (wall_data[1] - wall_data[0]) / (lgrid.x1[1] - lgrid.x1[0]);
    ux1[[0, 0]] = -slope0;
    let mut total = 0;
    for i in 0..nx - 1 {
        let h = lgrid.x1[i + 1] - lgrid.x1[i];
        let nsub = (h / lgrid.max_dx).ceil().max(1.0) as usize;
        let dx = h / nsub as f64;
        let (sub, diag) = (-1.0 / (dy * dy), a / dx + 2.0 / (dy * dy));
        let mut prev = cur.clone();
        for s in 0..nsub {
            let xb = lgrid.x1[i] + (s + 1) as f64 * dx;
            let theta = (s + 1) as f64 / nsub as f64;
            prev.clone_from(&cur);
            let wall = -field::interp_linear(&lgrid.x1, wall_data, xb);
            let n_in = ny1 - 2;
            let mut b = vec![0.0; n_in];
            for k in 0..n_in {
                let j = k + 1;
                let r = rhs.map_or(0.0, |r| (1.0 - theta) * r[[i, j]] + theta * r[[i + 1, j]]);
                b[k] = a / dx * cur[j] + r;
            }
            b[0] -= sub * wall;
            thomas(sub, diag, sub, &mut b);
            cur[0] = wall;
            cur[1..ny1 - 1].copy_from_slice(&b);
            cur[ny1 - 1] = 0.0;
            total += 1;
            if s + 1 == nsub {
                for j in 0..ny1 {
                    ux1[[i + 1, j]] = (cur[j] - prev[j]) / dx;
                }
            }
        }
        for j in 0..ny1 {
            u[[i + 1, j]] = cur[j];
        }
    }
    let mut residual: f64 = 0.0;
    for i in 1..nx {
        let row: Vec<f64> = u.row(i).to_vec();
        let d2 = second_difference(&row, dy);
        for j in 1..ny1 - 1 {
            let r = rhs.map_or(0.0, |r| r[[i, j]]);
            residual = residual.max((a * ux1[[i, j]] - d2[j] - r).abs());
        }
    }
    Ok(HalfStripSolution { u, ux1, residual, substeps: total })
}

/// v from continuity: ∫_Y^{Y_max} u_x₁ for order 1, −∫_0^Y u_x₁ for order 2.
pub fn vertical_velocity_from_continuity(ux1: &Array2<f64>, lgrid: &LayerGrid, order: u8) -> Array2<f64> {
    let y = lgrid.y();
    let mut v = Array2::zeros(ux1.dim());
    for (i, row) in ux1.outer_iter().enumerate() {
        let cum = field::cumulative_trapezoid(&y, row.as_slice().unwrap_or(&row.to_vec()));
        let total = *cum.last().unwrap_or(&0.0);
        for j in 0..y.len() {
            v[[i, j]] = if order == 1 { total - cum[j] } else { -cum[j] };
        }
    }
    v
}

/// ∫₀^{x₁} f ds along each Y line by the trapezoid rule.
fn integrate_x1(f: &Array2<f64>, x1: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros(f.dim());
    for i in 1..x1.len() {
        let h = x1[i] - x1[i - 1];
        for j in 0..f.ncols() {
            out[[i, j]] = out[[i - 1, j]] + 0.5 * h * (f[[i, j]] + f[[i - 1, j]]);
        }
    }
    out
}

fn dy_centered(f: &Array2<f64>, dy: f64) -> Array2<f64> {
    let (nx, ny) = f.dim();
    let mut out = Array2::zeros((nx, ny));
    for i in 0..nx {
        for j in 0..ny {
            out[[i, j]] = if j == 0 {
                (-3.0 * f[[i, 0]] + 4.0 * f[[i, 1]] - f[[i, 2]]) / (2.0 * dy)
            } else if j == ny - 1 {
                (3.0 * f[[i, j]] - 4.0 * f[[i, j - 1]] + f[[i, j - 2]]) / (2.0 * dy)
            } else {
                (f[[i, j + 1]] - f[[i, j - 1]]) / (2.0 * dy)
            };
        }
    }
    out
}

/// One wall's layer data in its own frame.
#[derive(Debug, Clone)]
pub struct WallLayer {
    pub wall: Wall,
    pub wall_const: f64,
    pub coefficients: Vec<f64>,
    pub init: Vec<f64>,
    pub pre: HalfStripSolution,
    pub v0: Array2<f64>,
    /// ∫₀^{x₁} v⁰.
    pub iv: Array2<f64>,
    /// Post-cutoff u, ∂x₁u and v on the layer grid.
    pub u: Array2<f64>,
    pub u_x1: Array2<f64>,
    pub v: Array2<f64>,
}

/// Layer corrector of a given order for both walls.
#[derive(Debug, Clone)]
pub struct LayerCorrector {
    pub order: u8,
    pub lgrid: LayerGrid,
    pub a0: f64,
    pub sqrt_eps: f64,
    pub walls: [WallLayer; 2],
    /// Physical u_p and v_p on the grid, v with its physical sign.
    pub u: Field,
    pub v: Field,
    pub c_cut: Field,
    pub c_app: Field,
    pub corner_traces: LayerCornerTraces,
    /// max|v⁰(x₁, Y_max)| of the pre-cutoff profile.
    pub far_trace: f64,
}

impl LayerCorrector {
    /// Physical v_p on x₂ = 0 and x₂ = 2 at the x₁ nodes.
    pub fn wall_v(&self) -> [Vec<f64>; 2] {
        let n2 = self.v.ncols() - 1;
        [self.v.column(0).to_vec(), self.v.column(n2).to_vec()]
    }
}

/// Inputs for one order of the layer construction.
#[derive(Debug, Clone)]
pub struct LayerInputs<'a> {
    pub order: u8,
    /// ∂x₁ᵏu_e at (0,0) and (0,2) for k = 0..=4.
    pub corner_derivs: [[f64; 5]; 2],
    /// u_e on x₂ = 0 and x₂ = 2 at the x₁ nodes.
    pub wall_u: [&'a [f64]; 2],
}

/// Solves both wall problems, builds v by continuity and applies the cutoff.
pub fn build_layer(
    inputs: &LayerInputs,
    flow: &BaseFlow,
    params: &PhysicalParams,
    grid: &Grid,
    lgrid: &LayerGrid,
    a0: f64,
) -> Result<LayerCorrector> {
    if !(a0 > 0.0 && a0 <= 0.5) {
        return Err(Error::InvalidParams(format!("cutoff scale a0 = {a0} must lie in (0, 1/2]")));
    }
    if lgrid.x1 != grid.x1 {
        return Err(Error::GridMismatch("layer grid x1 nodes differ from the grid".into()));
    }
    let y = lgrid.y();
    let terms = if inputs.order == 1 { 4 } else { 2 };
    let mut walls = Vec::with_capacity(2);
    let mut far_trace: f64 = 0.0;
    for (w, wall) in [Wall::Lower, Wall::Upper].into_iter().enumerate() {
        let a = flow.mu(wall.position());
        let d = &inputs.corner_derivs[w][1..=terms];
        let coefficients = initial_coefficients(inputs.order, d, a);
        let init = layer_initial_polynomial(inputs.order, d, a, &y);
        let pre = solve_half_strip_parabolic(a, &init, inputs.wall_u[w], None, lgrid)?;
        let v0 = vertical_velocity_from_continuity(&pre.ux1, lgrid, inputs.order);
        far_trace = far_trace.max(v0.column(v0.ncols() - 1).iter().fold(0.0, |m, v| m.max(v.abs())));
        let iv = integrate_x1(&v0, &lgrid.x1);
        walls.push(WallLayer {
            wall,
            wall_const: a,
            coefficients,
            init,
            u: Array2::zeros(pre.u.dim()),
            u_x1: Array2::zeros(pre.u.dim()),
            v: Array2::zeros(pre.u.dim()),
            pre,
            v0,
            iv,
        });
    }
    let mut walls: [WallLayer; 2] = [walls.remove(0), walls.remove(0)];
    let corner_traces = inflow_corner_traces(
        [&walls[0].coefficients, &walls[1].coefficients],
        [walls[0].wall_const, walls[1].wall_const],
    );
    let out = apply_cutoff(&mut walls, flow, params, grid, lgrid, a0)?;
    Ok(LayerCorrector {
        order: inputs.order,
        lgrid: lgrid.clone(),
        a0,
        sqrt_eps: params.eps.sqrt(),
        walls,
        u: out.u,
        v: out.v,
        c_cut: out.c_cut,
        c_app: out.c_app,
        corner_traces,
        far_trace,
    })
}

#[derive(Debug, Clone)]
pub struct CutoffFields {
    pub u: Field,
    pub v: Field,
    pub c_cut: Field,
    pub c_app: Field,
}

/// Cuts off the pre-cutoff profiles at wall distance a₀ and maps them to the grid.
///
/// With ψ(Y) = χ(βY), β = √ε/a₀ and I = ∫₀^{x₁}v⁰:
/// u = ψu⁰ − ψ′I, v = ψv⁰, and A·u_x₁ − u_YY = C_cut with
/// C_cut = −Aψ′v⁰ − 3ψ′u⁰_Y − 3ψ″u⁰ + ψ‴I + 2ψ″u⁰(0,·) + ψ′u⁰_Y(0,·).
pub fn apply_cutoff(
    walls: &mut [WallLayer; 2],
    flow: &BaseFlow,
    params: &PhysicalParams,
    grid: &Grid,
    lgrid: &LayerGrid,
    a0: f64,
) -> Result<CutoffFields> {
    let sqrt_eps = params.eps.sqrt();
    let beta = sqrt_eps / a0;
    let y = lgrid.y();
    let dy = lgrid.dy;
    let psi = |t: f64, k: usize| beta.powi(k as i32) * chi(beta * t, k);
    let mut u = field::zeros(grid);
    let mut v = field::zeros(grid);
    let mut c_cut = field::zeros(grid);
    let mut c_app = field::zeros(grid);
    for layer in walls.iter_mut() {
        let a = layer.wall_const;
        let u0 = &layer.pre.u;
        let u0y = dy_centered(u0, dy);
        let init_y = field::deriv_1d(&y, &layer.init);
        let (nx, ny) = u0.dim();
        let mut cut = Array2::zeros((nx, ny));
        for i in 0..nx {
            for j in 0..ny {
                let t = y[j];
                let (p0, p1, p2, p3) = (psi(t, 0), psi(t, 1), psi(t, 2), psi(t, 3));
                let (uu, vv, ii) = (u0[[i, j]], layer.v0[[i, j]], layer.iv[[i, j]]);
                layer.u[[i, j]] = p0 * uu - p1 * ii;
                layer.u_x1[[i, j]] = p0 * layer.pre.ux1[[i, j]] - p1 * vv;
                layer.v[[i, j]] = p0 * vv;
                cut[[i, j]] = -a * p1 * vv - 3.0 * p1 * u0y[[i, j]] - 3.0 * p2 * uu
                    + p3 * ii
                    + 2.0 * p2 * layer.init[j]
                    + p1 * init_y[j];
            }
        }
        let wall_pos = layer.wall.position();
        let mu_wall = flow.mu(wall_pos);
        let sign = layer.wall.v_sign();
        for jg in 0..=grid.n2 {
            let dist = (grid.x2[jg] - wall_pos).abs();
            if dist >= a0 {
                continue;
            }
            let t = dist / sqrt_eps;
            let dmu = flow.mu(grid.x2[jg]) - mu_wall;
            for i in 0..=grid.n1 {
                let at = |f: &Array2<f64>| field::interp_cubic_uniform(0.0, dy, f.row(i).as_slice().unwrap(), t);
                u[[i, jg]] += at(&layer.u);
                v[[i, jg]] += sign * at(&layer.v);
                c_cut[[i, jg]] += at(&cut);
                c_app[[i, jg]] += dmu * at(&layer.u_x1);
            }
        }
        // Exact wall traces.
        let jw = if layer.wall == Wall::Lower { 0 } else { grid.n2 };
        for i in 0..=grid.n1 {
            u[[i, jw]] = layer.u[[i, 0]];
            v[[i, jw]] = sign * layer.v[[i, 0]];
        }
    }
    Ok(CutoffFields { u, v, c_cut, c_app })
}

/// Decay diagnostics of a layer profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayNorms {
    /// sup (1+Y)^m w(Y) |∇^j u|.
    pub weighted_sup: f64,
    /// ‖∇^j u‖ in L^p over (0, L) × (0, Y_max).
    pub lp: f64,
}

/// |∇^j u| is taken as Σ_{a+b=j} |∂x₁^a ∂_Y^b u| with centered differences.
pub fn weighted_decay_norms(profile: &Array2<f64>, lgrid: &LayerGrid, m: i32, j: usize, p: f64) -> DecayNorms {
    let y = lgrid.y();
    let mut grad = Array2::<f64>::zeros(profile.dim());
    for a in 0..=j {
        let mut f = profile.clone();
        for _ in 0..a {
            f = dx1_layer(&f, &lgrid.x1);
        }
        for _ in 0..(j - a) {
            f = dy_centered(&f, lgrid.dy);
        }
        grad = grad + f.mapv(f64::abs);
    }
    let mut sup: f64 = 0.0;
    for ((_, jj), g) in grad.indexed_iter() {
        sup = sup.max((1.0 + y[jj]).powi(m) * far_weight(y[jj]) * g);
    }
    let w1 = crate::domain::trapezoid_weights(&lgrid.x1);
    let w2 = crate::domain::trapezoid_weights(&y);
    let mut acc = 0.0;
    for ((ii, jj), g) in grad.indexed_iter() {
        acc += w1[ii] * w2[jj] * g.powf(p);
    }
    DecayNorms { weighted_sup: sup, lp: acc.powf(1.0 / p) }
}

fn dx1_layer(f: &Array2<f64>, x1: &[f64]) -> Array2<f64> {
    let mut out = Array2::zeros(f.dim());
    for jj in 0..f.ncols() {
        let col: Vec<f64> = f.column(jj).to_vec();
        let d = field::deriv_1d(x1, &col);
        for (ii, v) in d.into_iter().enumerate() {
            out[[ii, jj]] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lgrid(n: usize, length: f64) -> LayerGrid {
        let x1 = (0..=n).map(|k| length * k as f64 / n as f64).collect();
        LayerGrid::new(x1, 0.025, 12.0).unwrap()
    }

    #[test]
    fn polynomial_examples() {
        let y = [0.0, 0.3, 0.5];
        let p = layer_initial_polynomial(1, &[0.7, 0.0, 0.0, 0.0], 2.0, &y);
        for (k, &t) in y.iter().enumerate() {
            assert_relative_eq!(p[k], -0.7 * t * t, epsilon = 1e-15);
        }
        let p = layer_initial_polynomial(2, &[0.7, -1.1], 1.0, &y);
        for (k, &t) in y.iter().enumerate() {
            assert_relative_eq!(p[k], -(0.7 * t * t / 2.0 - 1.1 * t.powi(4) / 24.0), epsilon = 1e-15);
        }
        assert!(layer_initial_polynomial(1, &[0.0; 4], 2.0, &y).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn polynomial_satisfies_corner_identities() {
        let d = [0.3, -0.8, 1.7, 2.2];
        let a = 2.3;
        let c = initial_coefficients(1, &d, a);
        for k in 1..=4 {
            // ∂x₁ᵏ(−u_e) = A⁻ᵏ ∂_Y^{2k} u(0)
            assert_relative_eq!(poly(&c, 0.0, 2 * k) / a.powi(k as i32), -d[k - 1], epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_data_zero_solution() {
        let g = lgrid(10, 0.05);
        let ny = g.ny() + 1;
        let s = solve_half_strip_parabolic(2.0, &vec![0.0; ny], &[0.0; 11], None, &g).unwrap();
        assert_eq!(s.u.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0);
    }

    #[test]
    fn corner_mismatch_rejected() {
        let g = lgrid(10, 0.05);
        let ny = g.ny() + 1;
        let mut init = vec![0.0; ny];
        init[0] = 0.5;
        assert!(matches!(
            solve_half_strip_parabolic(2.0, &init, &[0.0; 11], None, &g),
            Err(Error::CornerMismatch { .. })
        ));
    }

    #[test]
    fn maximum_principle() {
        let g = lgrid(20, 0.05);
        let y = g.y();
        let init: Vec<f64> = y.iter().map(|&t| t * t * (-t).exp()).collect();
        let s = solve_half_strip_parabolic(1.5, &init, &[0.0; 21], None, &g).unwrap();
        let mut last = f64::INFINITY;
        for row in s.u.outer_iter() {
            let m = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(m <= last + 1e-15);
            last = m;
        }
    }

    #[test]
    fn continuity_integrals() {
        let g = lgrid(4, 0.05);
        let y = g.y();
        let ux1 = Array2::from_shape_fn(g.shape(), |(_, j)| (-y[j]).exp());
        let v1 = vertical_velocity_from_continuity(&ux1, &g, 1);
        let v2 = vertical_velocity_from_continuity(&ux1, &g, 2);
        for j in (0..y.len()).step_by(37) {
            let tail = (-12f64).exp();
            assert_relative_eq!(v1[[2, j]], (-y[j]).exp() - tail, epsilon = 1e-4);
            assert_relative_eq!(v2[[2, j]], -(1.0 - (-y[j]).exp()), epsilon = 1e-4);
        }
        assert_eq!(v1[[1, y.len() - 1]], 0.0);
        assert_eq!(v2[[1, 0]], 0.0);
        let flat = Array2::zeros(g.shape());
        assert!(vertical_velocity_from_continuity(&flat, &g, 1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn decay_norms_of_exponential() {
        let g = lgrid(4, 0.05);
        let y = g.y();
        let u = Array2::from_shape_fn(g.shape(), |(_, j)| (-y[j]).exp());
        let n = weighted_decay_norms(&u, &g, 2, 0, 2.5);
        // Dense 1-D maximisation of (1+Y)² w(Y) e^{−Y}.
        let oracle = (0..=200_000)
            .map(|k| 3.0 + 9.0 * k as f64 / 200_000.0)
            .map(|t| (1.0 + t).powi(2) * far_weight(t) * (-t).exp())
            .fold(0.0, f64::max);
        assert_relative_eq!(n.weighted_sup, oracle, max_relative = 1e-3);
        assert!(n.weighted_sup <= 25.0 * (-3f64).exp());
        let z = weighted_decay_norms(&Array2::zeros(g.shape()), &g, 3, 2, 2.5);
        assert_eq!(z.weighted_sup, 0.0);
        assert_eq!(z.lp, 0.0);
    }
}
