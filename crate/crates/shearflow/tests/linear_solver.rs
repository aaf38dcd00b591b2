use proptest::prelude::*;
use shearflow::assembly::{assemble, build_correctors, CorrectorOptions};
use shearflow::domain::{build_grid, BaseFlow, Grading, Grid, PhysicalParams};
use shearflow::error::Error;
use shearflow::field::{self, Field};
use shearflow::linear::{
    density_derivative_identity_check, supersonic_quadratic_form, InnerOptions, LinearProblem, LinearSolver,
};

fn base_case(eps: f64, length: f64, n1: usize, n2: usize) -> (PhysicalParams, Grid, Field, Field) {
    let params = PhysicalParams { eps, length, ..Default::default() };
    let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
    let grid = build_grid(&params, n1, n2, Grading::default()).unwrap();
    let c = build_correctors(&flow, &params, &grid, &CorrectorOptions::default()).unwrap();
    let a = assemble([&c.euler[0], &c.euler[1]], [&c.layer[0], &c.layer[1]], &flow, eps, &grid).unwrap();
    (params, grid, a.u_s, a.v_s)
}

fn forced(grid: &Grid, us: &Field, vs: &Field, scale: f64) -> LinearProblem {
    let mut pb = LinearProblem::unforced(us.clone(), vs.clone(), us.clone());
    pb.f0 = field::from_fn(grid, |x, y| scale * (1.0 + x) * (std::f64::consts::PI * y).sin());
    pb.f1 = field::from_fn(grid, |x, y| scale * (y * (2.0 - y) + x));
    pb.f2 = field::from_fn(grid, |x, y| scale * (3.0 * x).cos() * (y - 1.0));
    pb
}

#[test]
fn zero_forcing_returns_zero_in_one_sweep() {
    let (params, grid, us, vs) = base_case(0.1, 0.05, 16, 96);
    let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
    let sol = solver.solve(&LinearProblem::unforced(us.clone(), vs, us), &InnerOptions::default()).unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(field::linf(&sol.u) + field::linf(&sol.v) + field::linf(&sol.rho), 0.0);
    assert_eq!(sol.energy.weighted_lhs + sol.energy.weighted_rhs + sol.energy.energy_lhs, 0.0);
}

#[test]
fn small_forcing_converges_with_energy_slack() {
    let (params, grid, us, vs) = base_case(0.1, 0.05, 16, 96);
    let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
    let pb = forced(&grid, &us, &vs, 1e-3);
    let sol = solver.solve(&pb, &InnerOptions::default()).unwrap();
    let e = sol.energy;
    eprintln!("iterations {} energy {e:?} C {} {}", sol.iterations, e.weighted_constant(), e.energy_constant());
    assert!(sol.iterations < 200);
    assert!(e.quadratic_form_min >= -1e-14);
    assert!(e.weighted_constant().is_finite() && e.energy_constant().is_finite());
    assert!(e.weighted_constant() < 1e3 && e.energy_constant() < 1e3);
    // Boundary blocks imposed exactly.
    assert!(sol.rho.row(0).iter().all(|&r| r == 0.0));
    assert!(sol.u.row(0).iter().chain(sol.v.column(0).iter()).all(|&x| x == 0.0));
    let id = density_derivative_identity_check(&sol.u, &sol.v, &sol.rho, &pb, &solver);
    eprintln!("identity {id:?}");
    assert!(id.pass);
}

#[test]
fn smaller_viscosity_still_converges() {
    let (params, grid, us, vs) = base_case(0.025, 0.05, 16, 128);
    let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
    let sol = solver.solve(&forced(&grid, &us, &vs, 1e-3), &InnerOptions::default()).unwrap();
    eprintln!("eps 0.025 iterations {}", sol.iterations);
}

#[test]
fn long_domain_small_viscosity_is_logged() {
    let params = PhysicalParams { eps: 0.01, length: 1.0, ..Default::default() };
    let grid = build_grid(&params, 32, 128, Grading::default()).unwrap();
    let us = field::from_fn(&grid, |_, y| 2.0 + 0.25 * y);
    let pb = forced(&grid, &us, &field::zeros(&grid), 1e-3);
    let solver = LinearSolver::new(&grid, params.eps, params.lambda_bulk, params.sound_speed());
    match solver.solve(&pb, &InnerOptions { depth: 0, ..Default::default() }) {
        Ok(sol) => eprintln!("L = 1, eps = 0.01 undamped Anderson-free solve: {} iterations", sol.iterations),
        Err(Error::NoConvergence { iterations, last, .. }) => {
            eprintln!("L = 1, eps = 0.01: no convergence after {iterations} sweeps, last step {last:e}")
        }
        Err(e) => eprintln!("L = 1, eps = 0.01: {e}"),
    }
}

#[test]
fn manufactured_density_identity_converges() {
    let pi = std::f64::consts::PI;
    let (eps, lam, c, length) = (0.1, 1.0, 1.0, 0.5);
    let mut mism = Vec::new();
    for n in [16, 32, 64] {
        let grid = Grid::uniform(n, 2 * n, length);
        let us_f = |_: f64, y: f64| 2.0 + 0.25 * y * y;
        let u = field::from_fn(&grid, |x, y| (pi * x / length).sin() * (pi * y / 2.0).sin());
        let v = field::from_fn(&grid, |x, y| 0.5 * (pi * x / length).sin() * (pi * y).sin());
        let rho = field::from_fn(&grid, |x, y| x * (y + 1.0).cos());
        // f₀ = div u + u_s ρ_x₁, f₂ = u_s v_x₁ − εΔv − ελ∂x₂div u + c²ρ_x₂.
        let a = pi / length;
        let f0 = field::from_fn(&grid, |x, y| {
            a * (a * x).cos() * (pi * y / 2.0).sin()
                + 0.5 * pi * (a * x).sin() * (pi * y).cos()
                + us_f(x, y) * (y + 1.0).cos()
        });
        let f2 = field::from_fn(&grid, |x, y| {
            let vx1 = 0.5 * a * (a * x).cos() * (pi * y).sin();
            let lap_v = -0.5 * (a * a + pi * pi) * (a * x).sin() * (pi * y).sin();
            let div_y = a * (pi / 2.0) * (a * x).cos() * (pi * y / 2.0).cos()
                - 0.5 * pi * pi * (a * x).sin() * (pi * y).sin();
            us_f(x, y) * vx1 - eps * lap_v - eps * lam * div_y - c * c * x * (y + 1.0).sin()
        });
        let us = field::from_fn(&grid, us_f);
        let mut pb = LinearProblem::unforced(us.clone(), field::zeros(&grid), us);
        pb.f0 = f0;
        pb.f2 = f2;
        pb.delta = 0.0;
        let solver = LinearSolver::new(&grid, eps, lam, c);
        mism.push(density_derivative_identity_check(&u, &v, &rho, &pb, &solver).mismatch);
    }
    let orders: Vec<f64> = mism.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("identity mismatch {mism:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p > 1.8));
}

proptest! {
    #[test]
    fn quadratic_form_nonnegative(us in 1.0001f64..5.0, u in -10.0f64..10.0, r in -10.0f64..10.0, c in 0.1f64..1.0) {
        let one = |x: f64| Field::from_elem((1, 1), x);
        let q = supersonic_quadratic_form(&one(us.max(c * 1.0001)), &one(u), &one(r), c);
        prop_assert!(q[[0, 0]] >= -1e-14);
    }
}
