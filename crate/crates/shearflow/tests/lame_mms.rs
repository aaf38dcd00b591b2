use shearflow::domain::Grid;
use shearflow::field;
use shearflow::linear::{LameMethod, LameOperator};

#[test]
fn lame_manufactured_solution_second_order() {
    let (eps, lam, length) = (0.1, 1.0, 0.5);
    let pi = std::f64::consts::PI;
    let (a, b) = (pi / length, pi / 2.0);
    // u* = v* = sin(a x₁) sin(b x₂).
    let s = |x: f64, y: f64| (a * x).sin() * (b * y).sin();
    let cc = |x: f64, y: f64| (a * x).cos() * (b * y).cos();
    let f1 = move |x: f64, y: f64| eps * (a * a + b * b) * s(x, y) + eps * lam * (a * a * s(x, y) - a * b * cc(x, y));
    let f2 = move |x: f64, y: f64| eps * (a * a + b * b) * s(x, y) + eps * lam * (b * b * s(x, y) - a * b * cc(x, y));
    let mut errs = Vec::new();
    for n in [8, 16, 32, 64] {
        let g = Grid::uniform(n, 2 * n, length);
        let op = LameOperator::new(&g, eps, lam);
        let (u, v) = op
            .solve(&field::from_fn(&g, f1), &field::from_fn(&g, f2), LameMethod::Direct)
            .unwrap();
        let exact = field::from_fn(&g, s);
        errs.push(field::linf(&(&u - &exact)).max(field::linf(&(&v - &exact))));
    }
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    eprintln!("lame errors {errs:?} orders {orders:?}");
    assert!(orders.iter().all(|&p| p >= 1.9), "{orders:?}");
}
