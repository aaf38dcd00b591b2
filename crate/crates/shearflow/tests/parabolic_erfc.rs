use ndarray::Array2;
use shearflow::prandtl::{solve_half_strip_parabolic, LayerGrid};
use statrs::function::erf::erfc;

// u(x₁, 0) = 1, u(0, Y>0) = 0: the step is carried by the wall node alone.
fn error_at(dy: f64, max_dx: f64) -> f64 {
    let x1: Vec<f64> = (0..=5).map(|k| 0.01 * k as f64).collect();
    let mut g = LayerGrid::new(x1, dy, 12.0).unwrap();
    g.max_dx = max_dx;
    let mut init = vec![0.0; g.ny() + 1];
    init[0] = 1.0;
    let s = solve_half_strip_parabolic(1.0, &init, &[-1.0; 6], None, &g).unwrap();
    let j = (0.2 / dy).round() as usize;
    (s.u[[4, j]] - erfc(0.5)).abs()
}

#[test]
fn matches_similarity_solution() {
    let e = error_at(0.025, 1e-4);
    println!("erfc error on the default layer grid: {e:.3e}");
    assert!(e <= 2e-3);
}

#[test]
fn refinement_order() {
    let errs: Vec<f64> = [(0.05, 4e-4), (0.025, 1e-4), (0.0125, 2.5e-5)]
        .iter()
        .map(|&(dy, dx)| error_at(dy, dx))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        println!("observed order {order:.3}");
        assert!(order >= 0.9, "errors {errs:?}");
    }
}

#[test]
fn forced_problem_residual_is_small() {
    let x1: Vec<f64> = (0..=10).map(|k| 0.005 * k as f64).collect();
    let g = LayerGrid::new(x1, 0.025, 10.0).unwrap();
    let y = g.y();
    let rhs = Array2::from_shape_fn(g.shape(), |(_, j)| (-y[j]).exp());
    let s = solve_half_strip_parabolic(2.0, &vec![0.0; y.len()], &[0.0; 11], Some(&rhs), &g).unwrap();
    assert!(s.residual < 1e-9, "{}", s.residual);
    assert!(s.u[[10, 40]] > 0.0);
}
