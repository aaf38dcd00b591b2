//! Two-sided weighted energy evaluations, the supersonic quadratic form and the
//! density-derivative identity.

use serde::Serialize;

use crate::domain::Grid;
use crate::field::{self, Field};

use super::transport::mollify;
use super::{LinearProblem, LinearSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct EnergyReport {
    /// t‖u‖² + t‖ρ‖² + ε‖√(L−x₁)∇u‖².
    pub weighted_lhs: f64,
    /// ‖f₀^δ‖² + ε²λ²‖v_x₂‖² + δ‖u‖²_{H¹} + |(t(L−x₁)u, f)|.
    pub weighted_rhs: f64,
    /// t|ρ(L,·)|² + ε‖∇u‖².
    pub energy_lhs: f64,
    /// ‖f₀^δ‖² + t‖u‖² + t‖ρ‖² + |(u, f)|.
    pub energy_rhs: f64,
    /// min over nodes of (u_s−c)u² + c(cρ+u)² + c²(u_s−c)ρ².
    pub quadratic_form_min: f64,
}

impl EnergyReport {
    pub fn weighted_constant(&self) -> f64 {
        ratio(self.weighted_lhs, self.weighted_rhs)
    }

    pub fn energy_constant(&self) -> f64 {
        ratio(self.energy_lhs, self.energy_rhs)
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// (u_s−c)u² + c(cρ+u)² + c²(u_s−c)ρ² at every node.
pub fn supersonic_quadratic_form(u_s: &Field, u: &Field, rho: &Field, c: f64) -> Field {
    let mut q = Field::zeros(u.raw_dim());
    ndarray::Zip::from(&mut q).and(u_s).and(u).and(rho).for_each(|q, &us, &u, &r| {
        let m = us - c;
        let s = c * r + u;
        *q = m * u * u + c * s * s + c * c * m * r * r;
    });
    q
}

pub fn weighted_energy_report(
    u: &Field,
    v: &Field,
    rho: &Field,
    pb: &LinearProblem,
    solver: &LinearSolver,
    grid: &Grid,
) -> EnergyReport {
    let d = &solver.diff;
    let (eps, lam, t) = (solver.eps, solver.lambda, pb.t);
    let w = field::weights(grid);
    let lw = field::from_fn(grid, |x, _| grid.length - x);
    let grads = [d.dx1(u), d.dx2(u), d.dx1(v), d.dx2(v)];
    let grad_sq = grads.iter().fold(field::zeros(grid), |acc, g| acc + g * g);
    let sq = |f: &Field| (f * f * &w).sum();
    let vel_sq = sq(u) + sq(v);
    let f0d = mollify(&pb.f0, pb.delta);
    let delta_phys = pb.delta * grid.h1();
    let h1_sq = vel_sq + (&grad_sq * &w).sum();
    let wf = (&lw * &(u * &pb.f1 + v * &pb.f2) * &w).sum();
    let uf = field::inner(u, &pb.f1, grid) + field::inner(v, &pb.f2, grid);
    let weighted_lhs = t * vel_sq + t * sq(rho) + eps * (&lw * &grad_sq * &w).sum();
    let weighted_rhs = sq(&f0d) + eps * eps * lam * lam * sq(&grads[3]) + delta_phys * h1_sq + (t * wf).abs();
    let energy_lhs = t * field::outflow_trace_l2(rho, grid).powi(2) + eps * (&grad_sq * &w).sum();
    let energy_rhs = sq(&f0d) + t * vel_sq + t * sq(rho) + uf.abs();
    let q = supersonic_quadratic_form(&pb.u_conv, u, rho, solver.c);
    EnergyReport {
        weighted_lhs,
        weighted_rhs,
        energy_lhs,
        energy_rhs,
        quadratic_form_min: q.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityReport {
    /// ‖LHS − RHS‖ in L² over nodes at least two cells from ∂Ω.
    pub mismatch: f64,
    /// ‖momentum residual‖ + ε(1+λ)‖∂x₂ mass residual‖ under the same differences.
    pub estimate: f64,
    pub pass: bool,
}

/// Both sides of c²ρ_x₂ + ε(1+λ)u_sρ_x₁x₂ = f₂ + ε(1+λ)[∂x₂div u − ∂x₂div u^δ
/// + ∂x₂f₀^δ − u_s,x₂ρ_x₁] − u_s v_x₁ − ε(u_x₂ − v_x₁)_x₁.
pub fn density_derivative_identity_check(
    u: &Field,
    v: &Field,
    rho: &Field,
    pb: &LinearProblem,
    solver: &LinearSolver,
) -> IdentityReport {
    let d = &solver.diff;
    let grid = &solver.grid;
    let (eps, lam, c2) = (solver.eps, solver.lambda, solver.c * solver.c);
    let k = eps * (1.0 + lam);
    let us = &pb.u_conv;
    let (rx, ry) = (d.dx1(rho), d.dx2(rho));
    let div = d.dx1(u) + d.dx2(v);
    let divd = mollify(&div, pb.delta);
    let f0d = mollify(&pb.f0, pb.delta);
    let vx = d.dx1(v);
    let curl_x1 = d.dx1(&(d.dx2(u) - &vx));
    let lhs = c2 * &ry + k * &(us * &d.dx2(&rx));
    let rhs = &pb.f2 + &(k * &(d.dx2(&div) - d.dx2(&divd) + d.dx2(&f0d) - &(d.dx2(us) * &rx)))
        - &(us * &vx)
        - eps * &curl_x1;
    let r2 = us * &vx - eps * d.lap(v) - eps * lam * d.dx2(&div) + c2 * &ry - &pb.f2;
    let r0 = &divd + &(us * &rx) - &f0d;
    let est = r2.mapv(f64::abs) + k * d.dx2(&r0).mapv(f64::abs);
    // Nested differences are one-sided within two nodes of ∂Ω.
    let interior = |f: Field| {
        let mut g = Field::zeros(f.raw_dim());
        let (n1, n2) = (grid.n1, grid.n2);
        g.slice_mut(ndarray::s![2..n1 - 1, 2..n2 - 1]).assign(&f.slice(ndarray::s![2..n1 - 1, 2..n2 - 1]));
        g
    };
    let mismatch = field::l2(&interior(lhs - rhs), grid);
    let estimate = field::l2(&interior(est), grid);
    IdentityReport { mismatch, estimate, pass: mismatch <= 10.0 * estimate + 1e-14 }
}
