//! One linearized hyperbolic–elliptic solve: transport for ρ along straightened
//! streamlines, a Lamé solve for (u, v), coupled by an accelerated fixed point.

mod energy;
mod lame;
mod streamline;
mod transport;

pub use energy::{
    density_derivative_identity_check, supersonic_quadratic_form, weighted_energy_report, EnergyReport,
    IdentityReport,
};
pub use lame::{energy_identity_gap, solve_lame, LameMethod, LameOperator};
pub use streamline::{straighten_streamlines, CoordinateMap};
pub use transport::{mollify, solve_transport, transport_along_streamlines};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::field::{self, Diff, Field};

/// Data of one linear solve.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    /// Transport speed (u^ε, v^ε).
    pub u_speed: Field,
    pub v_speed: Field,
    /// Convection coefficient u_s of the momentum equations.
    pub u_conv: Field,
    pub f0: Field,
    pub f1: Field,
    pub f2: Field,
    /// Mollification radius in grid cells.
    pub delta: f64,
    /// Continuation parameter.
    pub t: f64,
}

impl LinearProblem {
    /// Problem with zero forcing and the given speeds.
    pub fn unforced(u_speed: Field, v_speed: Field, u_conv: Field) -> Self {
        let z = Field::zeros(u_speed.raw_dim());
        Self { u_speed, v_speed, u_conv, f0: z.clone(), f1: z.clone(), f2: z, delta: 2.0, t: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Damping of the transport update.
    pub theta: f64,
    /// Anderson history length; 0 disables acceleration.
    pub depth: usize,
    pub method: LameMethod,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, theta: 0.7, depth: 10, method: LameMethod::Direct }
    }
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub u: Field,
    pub v: Field,
    pub rho: Field,
    pub iterations: usize,
    /// Successive-iterate differences.
    pub history: Vec<f64>,
    pub energy: EnergyReport,
    pub map_deviation: f64,
}

impl LinearSolution {
    pub fn outflow_trace(&self) -> Vec<f64> {
        self.rho.row(self.rho.nrows() - 1).to_vec()
    }
}

/// Grid-bound workspace reused across solves with the same coefficients.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    pub grid: Grid,
    pub diff: Diff,
    pub lame: LameOperator,
    pub eps: f64,
    pub lambda: f64,
    pub c: f64,
}

impl LinearSolver {
    pub fn new(grid: &Grid, eps: f64, lambda: f64, c: f64) -> Self {
        let mut lame = LameOperator::new(grid, eps, lambda);
        lame.prepare();
        Self { grid: grid.clone(), diff: Diff::new(grid), lame, eps, lambda, c }
    }

    fn div(&self, u: &Field, v: &Field) -> Field {
        self.diff.dx1(u) + self.diff.dx2(v)
    }

    /// Alternates transport and Lamé solves until the X-norm step is below `tol`.
    pub fn solve(&self, pb: &LinearProblem, opts: &InnerOptions) -> Result<LinearSolution> {
        self.solve_from(pb, opts, None)
    }

    /// As [`LinearSolver::solve`], starting from `guess = (u, v, ρ)`.
    pub fn solve_from(
        &self,
        pb: &LinearProblem,
        opts: &InnerOptions,
        guess: Option<(&Field, &Field, &Field)>,
    ) -> Result<LinearSolution> {
        let grid = &self.grid;
        let shape = grid.shape();
        for f in [&pb.u_speed, &pb.v_speed, &pb.u_conv, &pb.f0, &pb.f1, &pb.f2] {
            if f.dim() != shape {
                return Err(Error::GridMismatch(format!("linear problem field {:?} vs grid {shape:?}", f.dim())));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams("non-finite linear problem data".into()));
            }
        }
        let min_speed = pb.u_speed.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        if !(min_speed > self.c) {
            return Err(Error::InvalidParams(format!(
                "transport speed {min_speed} does not exceed the sound speed {}",
                self.c
            )));
        }
        let map = straighten_streamlines(&pb.u_speed, &pb.v_speed, grid)?;
        let f0d = mollify(&pb.f0, pb.delta);
        let us_x2 = self.diff.dx2(&pb.u_conv);
        let c2 = self.c * self.c;
        let n = shape.0 * shape.1;

        let transport = |u: &Field, v: &Field| {
            let divd = mollify(&self.div(u, v), pb.delta);
            transport_along_streamlines(&map, &pb.u_speed, &f0d, &divd, grid)
        };
        let step = |z: &[f64]| -> Result<Vec<f64>> {
            let (u, v, rho) = split(z, shape);
            let rho_t = transport(&u, &v);
            let rho_d = opts.theta * &rho_t + (1.0 - opts.theta) * &rho;
            let (ux, vx) = (self.diff.dx1(&u), self.diff.dx1(&v));
            let (rx, ry) = (self.diff.dx1(&rho_d), self.diff.dx2(&rho_d));
            let r1 = pb.t * (&pb.f1 - &(&pb.u_conv * &ux) - &(&us_x2 * &v) - c2 * &rx);
            let r2 = pb.t * (&pb.f2 - &(&pb.u_conv * &vx) - c2 * &ry);
            let (un, vn) = self.lame.solve(&r1, &r2, opts.method)?;
            Ok(join(&un, &vn, &rho_d))
        };
        let metric = |a: &[f64], b: &[f64]| {
            let (ua, va, ra) = split(a, shape);
            let (ub, vb, rb) = split(b, shape);
            field::x_norm(&(&ua - &ub), &(&va - &vb), &self.diff, grid, self.eps) + field::l2(&(&ra - &rb), grid)
        };

        let mut z = match guess {
            Some((u, v, rho)) if [u, v, rho].iter().all(|f| f.dim() == shape) => join(u, v, rho),
            Some(_) => return Err(Error::GridMismatch("initial guess does not match the grid".into())),
            None => vec![0.0; 3 * n],
        };
        let mut history = Vec::new();
        let mut dg: Vec<Vec<f64>> = Vec::new();
        let mut df: Vec<Vec<f64>> = Vec::new();
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut best = f64::INFINITY;
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            iterations += 1;
            let g = step(&z)?;
            let delta = metric(&g, &z);
            history.push(delta);
            if !delta.is_finite() {
                return Err(Error::NoConvergence { iterations, last: delta, history });
            }
            if delta <= opts.tol {
                z = g;
                converged = true;
                break;
            }
            let f: Vec<f64> = g.iter().zip(&z).map(|(a, b)| a - b).collect();
            if delta > 1e3 * best {
                dg.clear();
                df.clear();
                prev = None;
            }
            best = best.min(delta);
            if let Some((gp, fp)) = prev.take() {
                dg.push(g.iter().zip(&gp).map(|(a, b)| a - b).collect());
                df.push(f.iter().zip(&fp).map(|(a, b)| a - b).collect());
                if dg.len() > opts.depth {
                    dg.remove(0);
                    df.remove(0);
                }
            }
            let mut next = g.clone();
            if opts.depth > 0 && !df.is_empty() {
                let m = df.len();
                let a = DMatrix::from_fn(3 * n, m, |r, c| df[c][r]);
                let rhs = DVector::from_column_slice(&f);
                if let Ok(gamma) = a.svd(true, true).solve(&rhs, 1e-12) {
                    for (c, gcol) in dg.iter().enumerate() {
                        let w = gamma[c];
                        for (x, d) in next.iter_mut().zip(gcol) {
                            *x -= w * d;
                        }
                    }
                }
            }
            prev = Some((g, f));
            z = next;
        }
        if !converged {
            let last = *history.last().unwrap_or(&f64::NAN);
            return Err(Error::NoConvergence { iterations, last, history });
        }
        let (u, v, _) = split(&z, shape);
        let rho = transport(&u, &v);
        let energy = weighted_energy_report(&u, &v, &rho, pb, self, grid);
        Ok(LinearSolution { u, v, rho, iterations, history, energy, map_deviation: map.max_jacobian_deviation() })
    }
}

fn split(z: &[f64], shape: (usize, usize)) -> (Field, Field, Field) {
    let n = shape.0 * shape.1;
    let f = |k: usize| Field::from_shape_vec(shape, z[k * n..(k + 1) * n].to_vec()).expect("shape");
    (f(0), f(1), f(2))
}

fn join(u: &Field, v: &Field, rho: &Field) -> Vec<f64> {
    u.iter().chain(v.iter()).chain(rho.iter()).copied().collect()
}

/// One-off solve building a fresh workspace.
pub fn linear_fixed_point(
    pb: &LinearProblem,
    grid: &Grid,
    eps: f64,
    lambda: f64,
    c: f64,
    opts: &InnerOptions,
) -> Result<LinearSolution> {
    LinearSolver::new(grid, eps, lambda, c).solve(pb, opts)
}
