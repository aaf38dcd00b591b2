//! Grid fields, finite differences on nonuniform nodes, quadrature norms and
//! interpolation.

use ndarray::{Array2, Axis};

use crate::domain::{locate, trapezoid_weights, Grid};

/// Scalar field indexed `[i, j]` with i along x₁ and j along x₂.
pub type Field = Array2<f64>;

pub fn zeros(grid: &Grid) -> Field {
    Array2::zeros(grid.shape())
}

/// Evaluates `f(x₁, x₂)` at every node.
pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Field {
    Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.x1[i], grid.x2[j]))
}

#[derive(Debug, Clone, Copy)]
struct Row {
    start: usize,
    w: [f64; 3],
}

/// Derivative weights of the quadratic through nodes `x[s..s+3]` evaluated at `t`.
fn lagrange3(x: &[f64], s: usize, t: f64) -> ([f64; 3], [f64; 3]) {
    let (a, b, c) = (x[s], x[s + 1], x[s + 2]);
    let da = (a - b) * (a - c);
    let db = (b - a) * (b - c);
    let dc = (c - a) * (c - b);
    let d1 = [
        ((t - b) + (t - c)) / da,
        ((t - a) + (t - c)) / db,
        ((t - a) + (t - b)) / dc,
    ];
    let d2 = [2.0 / da, 2.0 / db, 2.0 / dc];
    (d1, d2)
}

fn stencils(x: &[f64]) -> (Vec<Row>, Vec<Row>) {
    let n = x.len();
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for k in 0..n {
        let s = k.saturating_sub(1).min(n - 3);
        let (d1, d2) = lagrange3(x, s, x[k]);
        first.push(Row { start: s, w: d1 });
        second.push(Row { start: s, w: d2 });
    }
    (first, second)
}

/// Three-point finite differences on a tensor grid, one-sided at the ends.
#[derive(Debug, Clone)]
pub struct Diff {
    d1: [Vec<Row>; 2],
    d2: [Vec<Row>; 2],
}

impl Diff {
    pub fn new(grid: &Grid) -> Self {
        let (a1, a2) = stencils(&grid.x1);
        let (b1, b2) = stencils(&grid.x2);
        Self { d1: [a1, b1], d2: [a2, b2] }
    }

    fn apply(rows: &[Row], f: &Field, axis: usize) -> Field {
        let mut out = Field::zeros(f.raw_dim());
        for (lane_in, mut lane_out) in f.lanes(Axis(axis)).into_iter().zip(out.lanes_mut(Axis(axis))) {
            for (k, r) in rows.iter().enumerate() {
                lane_out[k] = r.w[0] * lane_in[r.start] + r.w[1] * lane_in[r.start + 1] + r.w[2] * lane_in[r.start + 2];
            }
        }
        out
    }

    pub fn dx1(&self, f: &Field) -> Field {
        Self::apply(&self.d1[0], f, 0)
    }

    pub fn dx2(&self, f: &Field) -> Field {
        Self::apply(&self.d1[1], f, 1)
    }

    pub fn dx1x1(&self, f: &Field) -> Field {
        Self::apply(&self.d2[0], f, 0)
    }

    pub fn dx2x2(&self, f: &Field) -> Field {
        Self::apply(&self.d2[1], f, 1)
    }

    pub fn dx1x2(&self, f: &Field) -> Field {
        self.dx2(&self.dx1(f))
    }

    pub fn lap(&self, f: &Field) -> Field {
        self.dx1x1(f) + self.dx2x2(f)
    }
}

/// First derivative of samples on nonuniform 1-D nodes.
pub fn deriv_1d(x: &[f64], f: &[f64]) -> Vec<f64> {
    let (rows, _) = stencils(x);
    rows.iter()
        .map(|r| r.w[0] * f[r.start] + r.w[1] * f[r.start + 1] + r.w[2] * f[r.start + 2])
        .collect()
}

/// Second derivative of samples on nonuniform 1-D nodes.
pub fn deriv2_1d(x: &[f64], f: &[f64]) -> Vec<f64> {
    let (_, rows) = stencils(x);
    rows.iter()
        .map(|r| r.w[0] * f[r.start] + r.w[1] * f[r.start + 1] + r.w[2] * f[r.start + 2])
        .collect()
}

/// Trapezoid quadrature weights on the tensor grid.
pub fn weights(grid: &Grid) -> Field {
    let w1 = grid.weights1();
    let w2 = grid.weights2();
    Array2::from_shape_fn(grid.shape(), |(i, j)| w1[i] * w2[j])
}

pub fn integral(f: &Field, grid: &Grid) -> f64 {
    (f * &weights(grid)).sum()
}

pub fn inner(f: &Field, g: &Field, grid: &Grid) -> f64 {
    (f * g * &weights(grid)).sum()
}

pub fn l1(f: &Field, grid: &Grid) -> f64 {
    (f.mapv(f64::abs) * &weights(grid)).sum()
}

pub fn l2(f: &Field, grid: &Grid) -> f64 {
    inner(f, f, grid).sqrt()
}

pub fn lp(f: &Field, grid: &Grid, p: f64) -> f64 {
    (f.mapv(|v| v.abs().powf(p)) * &weights(grid)).sum().powf(1.0 / p)
}

pub fn linf(f: &Field) -> f64 {
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// max |f| over nodes not on ∂Ω.
pub fn linf_interior(f: &Field) -> f64 {
    let (n, m) = f.dim();
    if n < 3 || m < 3 {
        return 0.0;
    }
    f.slice(ndarray::s![1..n - 1, 1..m - 1]).iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// L² norm of the outflow trace f(L, ·).
pub fn outflow_trace_l2(f: &Field, grid: &Grid) -> f64 {
    let w2 = grid.weights2();
    let row = f.row(grid.n1);
    row.iter().zip(&w2).map(|(v, w)| v * v * w).sum::<f64>().sqrt()
}

/// ‖∇f‖ in L².
pub fn grad_l2(f: &Field, diff: &Diff, grid: &Grid) -> f64 {
    let a = diff.dx1(f);
    let b = diff.dx2(f);
    (inner(&a, &a, grid) + inner(&b, &b, grid)).sqrt()
}

/// ε^{1/2}‖∇(u, v)‖ + ‖(u, v)‖.
pub fn x_norm(u: &Field, v: &Field, diff: &Diff, grid: &Grid, eps: f64) -> f64 {
    let g = (grad_l2(u, diff, grid).powi(2) + grad_l2(v, diff, grid).powi(2)).sqrt();
    let l = (l2(u, grid).powi(2) + l2(v, grid).powi(2)).sqrt();
    eps.sqrt() * g + l
}

/// Discrete W^{1,p} norm using the centered quotients of `diff`.
pub fn w1p(f: &Field, diff: &Diff, grid: &Grid, p: f64) -> f64 {
    lp(f, grid, p) + lp(&diff.dx1(f), grid, p) + lp(&diff.dx2(f), grid, p)
}

/// Piecewise linear interpolation, constant beyond the ends.
pub fn interp_linear(x: &[f64], y: &[f64], t: f64) -> f64 {
    if t <= x[0] {
        return y[0];
    }
    let n = x.len();
    if t >= x[n - 1] {
        return y[n - 1];
    }
    let k = locate(x, t);
    let s = (t - x[k]) / (x[k + 1] - x[k]);
    y[k] + s * (y[k + 1] - y[k])
}

/// Four-point Lagrange interpolation on uniform nodes `y0 + k·dy`.
/// Returns 0 beyond the last node.
pub fn interp_cubic_uniform(y0: f64, dy: f64, vals: &[f64], t: f64) -> f64 {
    let n = vals.len();
    let last = y0 + dy * (n - 1) as f64;
    if t > last || n < 4 {
        return 0.0;
    }
    let s = ((t - y0) / dy).max(0.0);
    let k = (s.floor() as usize).min(n - 2);
    let base = k.saturating_sub(1).min(n - 4);
    let r = s - base as f64;
    let nodes = [0.0, 1.0, 2.0, 3.0];
    (0..4)
        .map(|a| {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (r - nodes[b]) / (nodes[a] - nodes[b]);
                }
            }
            l * vals[base + a]
        })
        .sum()
}

/// Cumulative trapezoid integral from the first node.
pub fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in 1..x.len() {
        out[k] = out[k - 1] + 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
    }
    out
}

pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    trapezoid_weights(x).iter().zip(f).map(|(w, v)| w * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, Grading, PhysicalParams};
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        let p = PhysicalParams { eps: 0.05, length: 0.05, ..Default::default() };
        build_grid(&p, 16, 64, Grading::default()).unwrap()
    }

    #[test]
    fn quadratics_differentiated_exactly() {
        let g = grid();
        let d = Diff::new(&g);
        let f = from_fn(&g, |x, y| 3.0 * x * x + 2.0 * x * y - y * y + y);
        let fx = d.dx1(&f);
        let fy = d.dx2(&f);
        let fyy = d.dx2x2(&f);
        let fxy = d.dx1x2(&f);
        for i in 0..=g.n1 {
            for j in 0..=g.n2 {
                let (x, y) = (g.x1[i], g.x2[j]);
                assert_relative_eq!(fx[[i, j]], 6.0 * x + 2.0 * y, epsilon = 1e-9);
                assert_relative_eq!(fy[[i, j]], 2.0 * x - 2.0 * y + 1.0, epsilon = 1e-9);
                assert_relative_eq!(fyy[[i, j]], -2.0, epsilon = 1e-7);
                assert_relative_eq!(fxy[[i, j]], 2.0, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn quadrature_of_linear_field() {
        let g = grid();
        let f = from_fn(&g, |x, y| 1.0 + x + y);
        assert_relative_eq!(integral(&f, &g), 2.0 * 0.05 + 0.05 * 0.05 + 0.05 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let vals: Vec<f64> = (0..20).map(|k| (0.1 * k as f64).powi(3)).collect();
        assert_relative_eq!(interp_cubic_uniform(0.0, 0.1, &vals, 0.73), 0.73f64.powi(3), epsilon = 1e-12);
        assert_relative_eq!(interp_cubic_uniform(0.0, 0.1, &vals, 0.03), 0.03f64.powi(3), epsilon = 1e-12);
        assert_relative_eq!(interp_cubic_uniform(0.0, 0.1, &vals, 1.87), 1.87f64.powi(3), epsilon = 1e-12);
        assert_eq!(interp_cubic_uniform(0.0, 0.1, &vals, 2.5), 0.0);
    }

    #[test]
    fn linear_interpolation_clamps() {
        let x = [0.0, 1.0, 3.0];
        let y = [1.0, 2.0, 0.0];
        assert_eq!(interp_linear(&x, &y, -1.0), 1.0);
        assert_relative_eq!(interp_linear(&x, &y, 2.0), 1.0);
        assert_eq!(interp_linear(&x, &y, 4.0), 0.0);
    }
}
