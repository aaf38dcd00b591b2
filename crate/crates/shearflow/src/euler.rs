//! Linear hyperbolic Euler corrector systems A U_x₁ + B U_x₂ + D U = F with
//! A = [[1,0,μ],[μ,0,c²],[0,μ,0]], B = diag-like coupling of v_x₂ and c²ρ_x₂,
//! and D carrying μ′v. x₁ is the marching direction.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{BaseFlow, Grid, PhysicalParams};
use crate::error::{Error, Result};
use crate::field::{self, Diff, Field};
use crate::jet::Jet;
use crate::smooth::chi;

/// Right-hand side F(x₁, x₂) of the system.
#[derive(Clone)]
pub enum Forcing {
    None,
    /// F = (0, μ″, 0).
    Shear,
    Custom(Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::None => write!(f, "None"),
            Forcing::Shear => write!(f, "Shear"),
            Forcing::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Values of (u, v, ρ) near a corner as jets in x₂ about the wall.
pub type CornerJets = [Jet; 3];

#[derive(Debug, Clone)]
pub struct HyperbolicSystem {
    pub order: u8,
    pub flow: BaseFlow,
    pub c: f64,
    pub forcing: Forcing,
    /// Inflow traces of (u, v, ρ) on the x₂ nodes.
    pub inflow: [Vec<f64>; 3],
    /// Inflow data near (0,0) and (0,2) as jets, when available analytically.
    pub corner_jets: Option<[CornerJets; 2]>,
    /// v on x₂ = 0 and x₂ = 2, tabulated on the x₁ nodes.
    pub wall_v: [Vec<f64>; 2],
    pub cfl: f64,
}

impl HyperbolicSystem {
    /// First corrector: F = (0, μ″, 0), zero inflow and wall data.
    pub fn first(flow: &BaseFlow, params: &PhysicalParams, grid: &Grid) -> Self {
        let z2 = vec![0.0; grid.n2 + 1];
        let z1 = vec![0.0; grid.n1 + 1];
        Self {
            order: 1,
            flow: flow.clone(),
            c: params.sound_speed(),
            forcing: Forcing::Shear,
            inflow: [z2.clone(), z2.clone(), z2],
            corner_jets: Some([[Jet::zero(); 3]; 2]),
            wall_v: [z1.clone(), z1],
            cfl: 0.9,
        }
    }

    /// Second corrector: no forcing, inflow (0, v⁰, ρ⁰), wall data −v_p¹.
    pub fn second(
        flow: &BaseFlow,
        params: &PhysicalParams,
        grid: &Grid,
        inflow: &SecondInflow,
        wall_v: [Vec<f64>; 2],
    ) -> Result<Self> {
        if wall_v.iter().any(|w| w.len() != grid.n1 + 1) || inflow.v0.len() != grid.n2 + 1 {
            return Err(Error::GridMismatch("second corrector data does not match the grid".into()));
        }
        Ok(Self {
            order: 2,
            flow: flow.clone(),
            c: params.sound_speed(),
            forcing: Forcing::None,
            inflow: [vec![0.0; grid.n2 + 1], inflow.v0.clone(), inflow.rho0.clone()],
            corner_jets: Some(inflow.jets),
            wall_v,
            cfl: 0.9,
        })
    }

    fn force(&self, x1: f64, x2: f64) -> [f64; 3] {
        match &self.forcing {
            Forcing::None => [0.0; 3],
            Forcing::Shear => [0.0, self.flow.deriv(2, x2), 0.0],
            Forcing::Custom(f) => f(x1, x2),
        }
    }

    fn force_jet(&self, wall: f64) -> Option<[Jet; 3]> {
        match &self.forcing {
            Forcing::None => Some([Jet::zero(); 3]),
            Forcing::Shear => {
                let mu = Jet::from_derivatives(&self.flow.jet(wall));
                Some([Jet::zero(), mu.deriv().deriv(), Jet::zero()])
            }
            Forcing::Custom(_) => None,
        }
    }
}

/// λ₁ = 0, λ₂ = c/√(μ² − c²), λ₃ = −λ₂.
pub fn eigenvalues(mu: f64, c: f64) -> Result<(f64, f64, f64)> {
    let m = mu * mu - c * c;
    if !(m > 0.0) {
        return Err(Error::SubsonicPoint { x2: f64::NAN, margin: m });
    }
    let l = c / m.sqrt();
    Ok((0.0, l, -l))
}

/// det(B − λA) = λμ[c² + λ²(c² − μ²)].
pub fn characteristic_determinant(mu: f64, c: f64, lambda: f64) -> f64 {
    let a = [[1.0, 0.0, mu], [mu, 0.0, c * c], [0.0, mu, 0.0]];
    let b = [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, c * c]];
    let m: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| b[i][j] - lambda * a[i][j]));
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Largest relative determinant residual at the analytic eigenvalues over the nodes.
pub fn eigen_residual(flow: &BaseFlow, c: f64, x2: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &y in x2 {
        let mu = flow.mu(y);
        let (_, l2, l3) = eigenvalues(mu, c).map_err(|_| Error::SubsonicPoint { x2: y, margin: mu * mu - c * c })?;
        let scale = mu * c * c * (1.0 + l2.abs()).powi(3);
        for l in [l2, l3] {
            worst = worst.max(characteristic_determinant(mu, c, l).abs() / scale);
        }
    }
    Ok(worst)
}

/// Integrates dy/dx₁ = λᵢ(y) from y(0) = y0 with RK4, sampled on `x1_nodes`
/// and clamped to [0, 2].
pub fn trace_characteristic(i: usize, y0: f64, flow: &BaseFlow, c: f64, x1_nodes: &[f64]) -> Result<Vec<f64>> {
    if !(1..=3).contains(&i) || !(0.0..=2.0).contains(&y0) {
        return Err(Error::InvalidParams(format!("bad characteristic request i={i}, y0={y0}")));
    }
    let speed = |y: f64| -> Result<f64> {
        let y = y.clamp(0.0, 2.0);
        let mu = flow.mu(y);
        let (l1, l2, l3) = eigenvalues(mu, c).map_err(|_| Error::SubsonicPoint { x2: y, margin: mu * mu - c * c })?;
        Ok([l1, l2, l3][i - 1])
    };
    let mut out = Vec::with_capacity(x1_nodes.len());
    let mut y = y0;
    out.push(y);
    for w in x1_nodes.windows(2) {
        let steps = 8;
        let h = (w[1] - w[0]) / steps as f64;
        for _ in 0..steps {
            let k1 = speed(y)?;
            let k2 = speed(y + 0.5 * h * k1)?;
            let k3 = speed(y + 0.5 * h * k2)?;
            let k4 = speed(y + h * k3)?;
            y = (y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(0.0, 2.0);
        }
        out.push(y);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Below y₂(·; 0).
    Lower,
    Middle,
    /// Above y₃(·; 2).
    Upper,
}

/// Characteristics bounding the three sub-regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Partition {
    pub fn trace(flow: &BaseFlow, c: f64, grid: &Grid) -> Result<Self> {
        let lower = trace_characteristic(2, 0.0, flow, c, &grid.x1)?;
        let upper = trace_characteristic(3, 2.0, flow, c, &grid.x1)?;
        for (k, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if k > 0 && a >= b {
                return Err(Error::CharacteristicsCross { x1: grid.x1[k] });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Region label at (x₁, x₂) on the given x₁ nodes.
    pub fn region(&self, x1_nodes: &[f64], x1: f64, x2: f64) -> Region {
        let lo = field::interp_linear(x1_nodes, &self.lower, x1);
        let hi = field::interp_linear(x1_nodes, &self.upper, x1);
        if x2 < lo {
            Region::Lower
        } else if x2 > hi {
            Region::Upper
        } else {
            Region::Middle
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    pub zeroth: f64,
    pub first: f64,
    /// |∂x₁x₂ρ| at each inflow corner from the inflow side; along the wall it is 0.
    pub second: [f64; 2],
    pub tol: f64,
    pub warnings: Vec<String>,
}

/// Threshold above which the analytic second-order corner mismatch is reported.
pub const SECOND_ORDER_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct EulerCorrector {
    pub order: u8,
    pub u: Field,
    pub v: Field,
    pub rho: Field,
    pub partition: Partition,
    /// ∂x₁ᵏu at (0,0) and (0,2) for k = 0..=4.
    pub corner_derivs: Option<[[f64; 5]; 2]>,
    pub residual_l1: f64,
    pub compatibility: CompatibilityReport,
    pub substeps: usize,
}

/// Exact x₁-derivatives at x₁ = 0 of (u, v, ρ) near a wall, obtained by
/// differentiating the system with Taylor jets in x₂.
pub fn corner_series(mu: Jet, c: f64, force: [Jet; 3], data: CornerJets, depth: usize) -> Vec<[Jet; 3]> {
    let c2 = c * c;
    let mu1 = mu.deriv();
    let denom = (Jet::constant(c2) - mu * mu).recip();
    let inv_mu = mu.recip();
    let mut out = vec![data];
    for k in 0..depth {
        let [_, v, r] = out[k];
        let f = if k == 0 { force } else { [Jet::zero(); 3] };
        let r1 = f[0] - v.deriv();
        let r2 = f[1] - mu1 * v;
        let r3 = f[2] - r.deriv().scale(c2);
        let x3 = (r2 - mu * r1) * denom;
        let x2 = r3 * inv_mu;
        let x1 = r1 - mu * x3;
        out.push([x1, x2, x3]);
    }
    out
}

pub fn solve_hyperbolic(sys: &HyperbolicSystem, grid: &Grid) -> Result<EulerCorrector> {
    let (n1, n2) = (grid.n1, grid.n2);
    if sys.inflow.iter().any(|t| t.len() != n2 + 1) || sys.wall_v.iter().any(|t| t.len() != n1 + 1) {
        return Err(Error::GridMismatch("boundary data does not match the grid".into()));
    }
    if !(sys.cfl > 0.0 && sys.cfl <= 1.0) {
        return Err(Error::CflViolation { cfl: sys.cfl });
    }
    let c = sys.c;
    let c2 = c * c;
    let x2 = &grid.x2;
    let mu: Vec<f64> = x2.iter().map(|&y| sys.flow.mu(y)).collect();
    let mu1: Vec<f64> = x2.iter().map(|&y| sys.flow.deriv(1, y)).collect();
    let mut lam = vec![0.0; n2 + 1];
    for j in 0..=n2 {
        lam[j] = eigenvalues(mu[j], c)
            .map_err(|_| Error::SubsonicPoint { x2: x2[j], margin: mu[j] * mu[j] - c2 })?
            .1;
    }
    let m: Vec<f64> = mu.iter().map(|v| v * v - c2).collect();
    let kk: Vec<f64> = mu.iter().map(|v| c2 / v).collect();
    let gg: Vec<f64> = (0..=n2).map(|j| mu[j] / m[j]).collect();
    let partition = Partition::trace(&sys.flow, c, grid)?;
    let compatibility = check_compatibility(sys, grid)?;

    let lam_max = lam.iter().cloned().fold(0.0, f64::max);
    let h1 = grid.h1();
    let dx_max = sys.cfl * grid.h2_min() / lam_max;
    let nsub = (h1 / dx_max).ceil().max(1.0) as usize;
    let dx = h1 / nsub as f64;

    let mut u = field::zeros(grid);
    let mut v = field::zeros(grid);
    let mut rho = field::zeros(grid);
    let (mut cu, mut cv, mut cr) = (sys.inflow[0].clone(), sys.inflow[1].clone(), sys.inflow[2].clone());
    for j in 0..=n2 {
        u[[0, j]] = cu[j];
        v[[0, j]] = cv[j];
        rho[[0, j]] = cr[j];
    }
    let mut nv = vec![0.0; n2 + 1];
    let mut nr = vec![0.0; n2 + 1];
    let mut f = vec![[0.0; 3]; n2 + 1];
    for i in 0..n1 {
        for s in 0..nsub {
            let xa = grid.x1[i] + s as f64 * dx;
            let xb = if s + 1 == nsub { grid.x1[i + 1] } else { xa + dx };
            for j in 0..=n2 {
                let fj = sys.force(xa, x2[j]);
                // A⁻¹F
                let f3 = (fj[1] - mu[j] * fj[0]) / (c2 - mu[j] * mu[j]);
                f[j] = [fj[0] - mu[j] * f3, fj[2] / mu[j], f3];
            }
            let dm = |w: &[f64], j: usize| (w[j] - w[j - 1]) / (x2[j] - x2[j - 1]);
            let dp = |w: &[f64], j: usize| (w[j + 1] - w[j]) / (x2[j + 1] - x2[j]);
            for j in 1..n2 {
                let (l, k, g) = (lam[j], kk[j], gg[j]);
                let (dvm, drm, dvp, drp) = (dm(&cv, j), dm(&cr, j), dp(&cv, j), dp(&cr, j));
                let flux_v = 0.5 * (l * dvm + k * drm) + 0.5 * (-l * dvp + k * drp);
                let flux_r = 0.5 * (g * dvm + l * drm) + 0.5 * (g * dvp - l * drp);
                nv[j] = cv[j] + dx * (f[j][1] - flux_v);
                nr[j] = cr[j] + dx * (f[j][2] + mu1[j] * cv[j] / m[j] - flux_r);
            }
            let wall_at = |w: &[f64]| if s + 1 == nsub { w[i + 1] } else { field::interp_linear(&grid.x1, w, xb) };
            let (vw0, vw1) = (wall_at(&sys.wall_v[0]), wall_at(&sys.wall_v[1]));
            {
                let j = 0;
                let (l, k, g) = (lam[j], kk[j], gg[j]);
                let (dvp, drp) = (dp(&cv, j), dp(&cr, j));
                let vs = cv[j] + dx * (f[j][1] - 0.5 * (-l * dvp + k * drp));
                let rs = cr[j] + dx * (f[j][2] + mu1[j] * cv[j] / m[j] - 0.5 * (g * dvp - l * drp));
                let rminus = g * vs - l * rs;
                nv[j] = vw0;
                nr[j] = (g * vw0 - rminus) / l;
            }
            {
                let j = n2;
                let (l, k, g) = (lam[j], kk[j], gg[j]);
                let (dvm, drm) = (dm(&cv, j), dm(&cr, j));
                let vs = cv[j] + dx * (f[j][1] - 0.5 * (l * dvm + k * drm));
                let rs = cr[j] + dx * (f[j][2] + mu1[j] * cv[j] / m[j] - 0.5 * (g * dvm + l * drm));
                let rplus = g * vs + l * rs;
                nv[j] = vw1;
                nr[j] = (rplus - g * vw1) / l;
            }
            let vx2 = field::deriv_1d(x2, &cv);
            for j in 0..=n2 {
                cu[j] += dx * (f[j][0] + mu[j] * f[j][2] - vx2[j]) - mu[j] * (nr[j] - cr[j]);
            }
            std::mem::swap(&mut cv, &mut nv);
            std::mem::swap(&mut cr, &mut nr);
        }
        for j in 0..=n2 {
            u[[i + 1, j]] = cu[j];
            v[[i + 1, j]] = cv[j];
            rho[[i + 1, j]] = cr[j];
        }
    }

    let residual_l1 = system_residual(sys, grid, &u, &v, &rho);
    let corner_derivs = corner_derivatives(sys);
    Ok(EulerCorrector {
        order: sys.order,
        u,
        v,
        rho,
        partition,
        corner_derivs,
        residual_l1,
        compatibility,
        substeps: nsub,
    })
}

/// L¹ norm over interior nodes of A U_x₁ + B U_x₂ + D U − F with centered differences.
pub fn system_residual(sys: &HyperbolicSystem, grid: &Grid, u: &Field, v: &Field, rho: &Field) -> f64 {
    let d = Diff::new(grid);
    let (ux, vx, rx) = (d.dx1(u), d.dx1(v), d.dx1(rho));
    let (vy, ry) = (d.dx2(v), d.dx2(rho));
    let c2 = sys.c * sys.c;
    let mut res = field::zeros(grid);
    for i in 1..grid.n1 {
        for j in 1..grid.n2 {
            let y = grid.x2[j];
            let mu = sys.flow.mu(y);
            let mu1 = sys.flow.deriv(1, y);
            let f = sys.force(grid.x1[i], y);
            let r1 = ux[[i, j]] + mu * rx[[i, j]] + vy[[i, j]] - f[0];
            let r2 = mu * ux[[i, j]] + c2 * rx[[i, j]] + mu1 * v[[i, j]] - f[1];
            let r3 = mu * vx[[i, j]] + c2 * ry[[i, j]] - f[2];
            res[[i, j]] = r1.abs() + r2.abs() + r3.abs();
        }
    }
    field::l1(&res, grid)
}

fn corner_derivatives(sys: &HyperbolicSystem) -> Option<[[f64; 5]; 2]> {
    let jets = sys.corner_jets?;
    let mut out = [[0.0; 5]; 2];
    for (w, wall) in [0.0, 2.0].into_iter().enumerate() {
        let mu = Jet::from_derivatives(&sys.flow.jet(wall));
        let series = corner_series(mu, sys.c, sys.force_jet(wall)?, jets[w], 4);
        for (k, s) in series.iter().enumerate() {
            out[w][k] = s[0].value();
        }
    }
    Some(out)
}

fn check_compatibility(sys: &HyperbolicSystem, grid: &Grid) -> Result<CompatibilityReport> {
    let n2 = grid.n2;
    let bound = sys.flow.derivative_bound();
    let tol = 10.0 * (grid.h1() + grid.h2_min()) * (1.0 + bound);
    let c2 = sys.c * sys.c;
    let zeroth = [
        (sys.inflow[1][0] - sys.wall_v[0][0]).abs(),
        (sys.inflow[1][n2] - sys.wall_v[1][0]).abs(),
    ];
    // v_x₁ from the third equation along the inflow edge versus the wall trace slope.
    let rho_y = field::deriv_1d(&grid.x2, &sys.inflow[2]);
    let mut first = [0.0; 2];
    for (w, j) in [(0usize, 0usize), (1, n2)] {
        let y = grid.x2[j];
        let f3 = sys.force(0.0, y)[2];
        let from_inflow = (f3 - c2 * rho_y[j]) / sys.flow.mu(y);
        let wall = &sys.wall_v[w];
        let from_wall = (wall[1] - wall[0]) / (grid.x1[1] - grid.x1[0]);
        first[w] = (from_inflow - from_wall).abs();
    }
    let zeroth = zeroth[0].max(zeroth[1]);
    let first_max = first[0].max(first[1]);
    if zeroth > tol {
        return Err(Error::CompatibilityViolation { corner: "zeroth order".into(), mismatch: zeroth, tol });
    }
    if first_max > tol {
        let corner = if first[0] >= first[1] { "(0,0) first order" } else { "(0,2) first order" };
        return Err(Error::CompatibilityViolation { corner: corner.into(), mismatch: first_max, tol });
    }
    let mut second = [0.0; 2];
    let mut warnings = Vec::new();
    if let Some(jets) = sys.corner_jets {
        for (w, wall) in [0.0, 2.0].into_iter().enumerate() {
            if let Some(force) = sys.force_jet(wall) {
                let mu = Jet::from_derivatives(&sys.flow.jet(wall));
                let series = corner_series(mu, sys.c, force, jets[w], 1);
                second[w] = series[1][2].derivative_at(1).abs();
                if second[w] > SECOND_ORDER_TOL {
                    warnings.push(format!(
                        "second-order corner mismatch {:.3e} in d2 rho/dx1dx2 at (0,{wall})",
                        second[w]
                    ));
                }
            }
        }
    }
    Ok(CompatibilityReport { zeroth, first: first_max, second, tol, warnings })
}

/// Inflow data (v⁰, ρ⁰) of the second corrector and its corner jets.
#[derive(Debug, Clone)]
pub struct SecondInflow {
    pub v0: Vec<f64>,
    pub rho0: Vec<f64>,
    pub jets: [CornerJets; 2],
}

/// Physical traces of the first layer corrector at the inflow corners.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LayerCornerTraces {
    /// v_p¹(0,0) and v_p¹(0,2).
    pub v: [f64; 2],
    /// ∂x₁v_p¹(0,0) and ∂x₁v_p¹(0,2).
    pub v_x1: [f64; 2],
}

/// Builds v⁰ and ρ⁰ on the x₂ nodes with cutoff width `b`.
pub fn second_corrector_boundary_data(
    traces: &LayerCornerTraces,
    b: f64,
    flow: &BaseFlow,
    c: f64,
    x2: &[f64],
) -> Result<SecondInflow> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidParams(format!("cutoff width b = {b} must lie in (0, 1)")));
    }
    let c2 = c * c;
    let mut v0 = Vec::with_capacity(x2.len());
    let mut rho0 = Vec::with_capacity(x2.len());
    for &y in x2 {
        let mu = flow.mu(y);
        if y < 1.0 {
            let k = chi(y / b, 0);
            v0.push(-traces.v[0] * k);
            rho0.push(mu / c2 * traces.v_x1[0] * y * k);
        } else {
            let k = chi((2.0 - y) / b, 0);
            v0.push(-traces.v[1] * k);
            rho0.push(-mu / c2 * traces.v_x1[1] * (2.0 - y) * k);
        }
    }
    // Near each wall χ ≡ 1, so the data are polynomial in the wall offset.
    let mut jets = [[Jet::zero(); 3]; 2];
    for (w, wall) in [0.0, 2.0].into_iter().enumerate() {
        let mu = Jet::from_derivatives(&flow.jet(wall));
        let offset = Jet::from_derivatives(&[0.0, 1.0]);
        jets[w][1] = Jet::constant(-traces.v[w]);
        jets[w][2] = (mu * offset).scale(traces.v_x1[w] / c2);
    }
    Ok(SecondInflow { v0, rho0, jets })
}
