//! Solver verification against manufactured and similarity solutions.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use shearflow::domain::{build_grid, BaseFlow, Grading, Grid, PhysicalParams};
use shearflow::euler::{solve_hyperbolic, Forcing, HyperbolicSystem};
use shearflow::field::{self, Field};
use shearflow::linear::{LameMethod, LameOperator};
use shearflow::prandtl::{solve_half_strip_parabolic, LayerGrid};
use statrs::function::erf::erfc;

/// Errors under refinement and the observed orders between successive levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl Refinement {
    fn from_errors(errors: Vec<f64>) -> Self {
        let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Self { errors, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub hyperbolic: Refinement,
    /// |u − erfc(Y/(2√x₁))| at x₁ = 0.04, Y = 0.2 on the default layer grid.
    pub parabolic_error: f64,
    pub parabolic: Refinement,
    pub lame: Refinement,
}

impl VerificationReport {
    pub fn passes(&self) -> bool {
        self.hyperbolic.min_order() >= 0.9
            && self.parabolic_error <= 2e-3
            && self.parabolic.min_order() >= 0.9
            && self.lame.min_order() >= 1.9
    }
}

// U = sin(x₁)·(cos(kx₂), sin(kx₂), cos(kx₂)/2), k = π/2, with μ ≡ 2 and c = 1.
fn hyperbolic_exact(x1: f64, x2: f64) -> [f64; 3] {
    let k = PI / 2.0;
    let s = x1.sin();
    [s * (k * x2).cos(), s * (k * x2).sin(), 0.5 * s * (k * x2).cos()]
}

fn hyperbolic_forcing(x1: f64, x2: f64) -> [f64; 3] {
    let (mu, c2, k) = (2.0, 1.0, PI / 2.0);
    let (s, co) = (x1.sin(), x1.cos());
    let (u1, v1, r1) = (co * (k * x2).cos(), co * (k * x2).sin(), 0.5 * co * (k * x2).cos());
    let v2 = s * k * (k * x2).cos();
    let r2 = -0.5 * s * k * (k * x2).sin();
    [u1 + mu * r1 + v2, mu * u1 + c2 * r1, mu * v1 + c2 * r2]
}

fn hyperbolic_error(n: usize) -> shearflow::Result<f64> {
    let params = PhysicalParams { length: 0.5, eps: 0.2, ..Default::default() };
    let grid = build_grid(&params, n, 4 * n, Grading::Uniform)?;
    let flow = BaseFlow::constant(2.0)?;
    let mut sys = HyperbolicSystem::first(&flow, &params, &grid);
    sys.forcing = Forcing::Custom(Arc::new(hyperbolic_forcing));
    sys.corner_jets = None;
    let e = solve_hyperbolic(&sys, &grid)?;
    let mut err: f64 = 0.0;
    for (k, f) in [&e.u, &e.v, &e.rho].into_iter().enumerate() {
        let ex: Field = field::from_fn(&grid, |a, b| hyperbolic_exact(a, b)[k]);
        err = err.max(field::linf(&(f - &ex)));
    }
    Ok(err)
}

// Unit wall step: u(x₁, 0) = 1, u(0, Y > 0) = 0, A = 1.
fn parabolic_error(dy: f64, max_dx: f64) -> shearflow::Result<f64> {
    let x1: Vec<f64> = (0..=5).map(|k| 0.01 * k as f64).collect();
    let mut g = LayerGrid::new(x1, dy, 12.0)?;
    g.max_dx = max_dx;
    let mut init = vec![0.0; g.ny() + 1];
    init[0] = 1.0;
    let s = solve_half_strip_parabolic(1.0, &init, &[-1.0; 6], None, &g)?;
    let j = (0.2 / dy).round() as usize;
    Ok((s.u[[4, j]] - erfc(0.5)).abs())
}

// u = v = sin(πx₁/L) sin(πx₂/2) on uniform n × 2n grids.
fn lame_error(n: usize) -> shearflow::Result<f64> {
    let (eps, lam, length) = (0.1, 1.0, 0.5);
    let (a, b) = (PI / length, PI / 2.0);
    let s = |x: f64, y: f64| (a * x).sin() * (b * y).sin();
    let cc = |x: f64, y: f64| (a * x).cos() * (b * y).cos();
    let f1 = |x: f64, y: f64| eps * (a * a + b * b) * s(x, y) + eps * lam * (a * a * s(x, y) - a * b * cc(x, y));
    let f2 = |x: f64, y: f64| eps * (a * a + b * b) * s(x, y) + eps * lam * (b * b * s(x, y) - a * b * cc(x, y));
    let g = Grid::uniform(n, 2 * n, length);
    let op = LameOperator::new(&g, eps, lam);
    let (u, v) = op.solve(&field::from_fn(&g, f1), &field::from_fn(&g, f2), LameMethod::Direct)?;
    let exact = field::from_fn(&g, s);
    Ok(field::linf(&(&u - &exact)).max(field::linf(&(&v - &exact))))
}

pub fn run_verification() -> shearflow::Result<VerificationReport> {
    let hyperbolic = [8, 16, 32, 64].iter().map(|&n| hyperbolic_error(n)).collect::<shearflow::Result<Vec<_>>>()?;
    let parabolic = [(0.05, 4e-4), (0.025, 1e-4), (0.0125, 2.5e-5)]
        .iter()
        .map(|&(dy, dx)| parabolic_error(dy, dx))
        .collect::<shearflow::Result<Vec<_>>>()?;
    let lame = [8, 16, 32, 64].iter().map(|&n| lame_error(n)).collect::<shearflow::Result<Vec<_>>>()?;
    Ok(VerificationReport {
        hyperbolic: Refinement::from_errors(hyperbolic),
        parabolic_error: parabolic_error(0.025, 1e-4)?,
        parabolic: Refinement::from_errors(parabolic),
        lame: Refinement::from_errors(lame),
    })
}
