use std::f64::consts::PI;
use std::sync::Arc;

use shearflow::domain::{build_grid, BaseFlow, Grading, PhysicalParams};
use shearflow::euler::{solve_hyperbolic, Forcing, HyperbolicSystem};
use shearflow::field::{self, Field};

// U = sin(x₁)·(cos(πx₂/2), sin(πx₂/2), cos(πx₂/2)/2) with μ ≡ 2, c = 1.
fn exact(x1: f64, x2: f64) -> [f64; 3] {
    let k = PI / 2.0;
    let s = x1.sin();
    [s * (k * x2).cos(), s * (k * x2).sin(), 0.5 * s * (k * x2).cos()]
}

fn forcing(x1: f64, x2: f64) -> [f64; 3] {
    let (mu, c2, k) = (2.0, 1.0, PI / 2.0);
    let (s, co) = (x1.sin(), x1.cos());
    let (u1, v1, r1) = (co * (k * x2).cos(), co * (k * x2).sin(), 0.5 * co * (k * x2).cos());
    let v2 = s * k * (k * x2).cos();
    let r2 = -0.5 * s * k * (k * x2).sin();
    [u1 + mu * r1 + v2, mu * u1 + c2 * r1, mu * v1 + c2 * r2]
}

fn error(n: usize) -> f64 {
    let params = PhysicalParams { length: 0.5, eps: 0.2, ..Default::default() };
    let grid = build_grid(&params, n, 4 * n, Grading::Uniform).unwrap();
    let flow = BaseFlow::constant(2.0).unwrap();
    let mut sys = HyperbolicSystem::first(&flow, &params, &grid);
    sys.forcing = Forcing::Custom(Arc::new(forcing));
    sys.corner_jets = None;
    let e = solve_hyperbolic(&sys, &grid).unwrap();
    let mut err: f64 = 0.0;
    for (k, f) in [&e.u, &e.v, &e.rho].into_iter().enumerate() {
        let ex: Field = field::from_fn(&grid, |a, b| exact(a, b)[k]);
        err = err.max(field::linf(&(f - &ex)));
    }
    err
}

#[test]
fn manufactured_solution_converges_first_order() {
    let errs: Vec<f64> = [8, 16, 32, 64].iter().map(|&n| error(n)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "errors {errs:?}");
        println!("observed order {order:.3}");
    }
}
