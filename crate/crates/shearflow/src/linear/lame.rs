//! Bilinear-element discretization of −εΔu − ελ∇div u with homogeneous
//! Dirichlet data, solved by banded Cholesky or conjugate gradients.

use serde::Serialize;

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LameMethod {
    /// Cached banded Cholesky factor.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient { max_iter: usize },
}

/// Symmetric positive-definite Lamé operator on the interior nodes.
#[derive(Debug, Clone)]
pub struct LameOperator {
    n1: usize,
    n2: usize,
    /// Interior nodes along the inner (faster) index.
    inner: usize,
    x1_inner: bool,
    ndof: usize,
    bw: usize,
    band: Vec<f64>,
    factor: Option<Vec<f64>>,
    mass: Vec<f64>,
    pub eps: f64,
    pub lambda: f64,
}

/// Gauss points on [0, 1].
const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

fn element_matrix(a: f64, b: f64, eps: f64, lambda: f64) -> [[f64; 8]; 8] {
    let mut k = [[0.0; 8]; 8];
    for &xi in &GAUSS {
        for &eta in &GAUSS {
            let gx = [-(1.0 - eta) / a, (1.0 - eta) / a, eta / a, -eta / a];
            let gy = [-(1.0 - xi) / b, -xi / b, xi / b, (1.0 - xi) / b];
            let w = eps * a * b / 4.0;
            for p in 0..4 {
                for q in 0..4 {
                    let lap = gx[p] * gx[q] + gy[p] * gy[q];
                    k[p][q] += w * (lap + lambda * gx[p] * gx[q]);
                    k[p][4 + q] += w * lambda * gx[p] * gy[q];
                    k[4 + p][q] += w * lambda * gy[p] * gx[q];
                    k[4 + p][4 + q] += w * (lap + lambda * gy[p] * gy[q]);
                }
            }
        }
    }
    k
}

impl LameOperator {
    pub fn new(grid: &Grid, eps: f64, lambda: f64) -> Self {
        let (n1, n2) = (grid.n1, grid.n2);
        let (ni, nj) = (n1 - 1, n2 - 1);
        let x1_inner = ni <= nj;
        let inner = if x1_inner { ni } else { nj };
        let ndof = 2 * ni * nj;
        let bw = 2 * (inner + 1) + 1;
        let mut op = Self {
            n1,
            n2,
            inner,
            x1_inner,
            ndof,
            bw,
            band: vec![0.0; ndof * (bw + 1)],
            factor: None,
            mass: Vec::with_capacity(ni * nj),
            eps,
            lambda,
        };
        let h1 = grid.h1();
        for j in 0..n2 {
            let ke = element_matrix(h1, grid.h2(j), eps, lambda);
            for i in 0..n1 {
                let nodes = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let dofs: Vec<Option<usize>> = (0..8).map(|l| op.dof(nodes[l % 4], l / 4)).collect();
                for (p, dp) in dofs.iter().enumerate() {
                    let Some(r) = *dp else { continue };
                    for (q, dq) in dofs.iter().enumerate() {
                        let Some(c) = *dq else { continue };
                        if c <= r {
                            op.band[r * (bw + 1) + (r - c)] += ke[p][q];
                        }
                    }
                }
            }
        }
        let (w1, w2) = (grid.weights1(), grid.weights2());
        op.mass = vec![0.0; ni * nj];
        for j in 1..n2 {
            for i in 1..n1 {
                let k = op.node(i, j);
                op.mass[k] = w1[i] * w2[j];
            }
        }
        op
    }

    fn node(&self, i: usize, j: usize) -> usize {
        if self.x1_inner {
            (i - 1) + self.inner * (j - 1)
        } else {
            (j - 1) + self.inner * (i - 1)
        }
    }

    fn dof(&self, (i, j): (usize, usize), comp: usize) -> Option<usize> {
        if i == 0 || j == 0 || i == self.n1 || j == self.n2 {
            None
        } else {
            Some(2 * self.node(i, j) + comp)
        }
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    /// Packs interior values of (u, v) into a dof vector.
    pub fn pack(&self, u: &Field, v: &Field) -> Vec<f64> {
        let mut x = vec![0.0; self.ndof];
        for j in 1..self.n2 {
            for i in 1..self.n1 {
                let k = self.node(i, j);
                x[2 * k] = u[[i, j]];
                x[2 * k + 1] = v[[i, j]];
            }
        }
        x
    }

    /// Unpacks a dof vector into fields with zero boundary values.
    pub fn unpack(&self, x: &[f64]) -> (Field, Field) {
        let mut u = Field::zeros((self.n1 + 1, self.n2 + 1));
        let mut v = u.clone();
        for j in 1..self.n2 {
            for i in 1..self.n1 {
                let k = self.node(i, j);
                u[[i, j]] = x[2 * k];
                v[[i, j]] = x[2 * k + 1];
            }
        }
        (u, v)
    }

    /// Lumped load vector ∫ rhs·φ.
    pub fn load(&self, f1: &Field, f2: &Field) -> Vec<f64> {
        let mut b = self.pack(f1, f2);
        for (k, m) in self.mass.iter().enumerate() {
            b[2 * k] *= m;
            b[2 * k + 1] *= m;
        }
        b
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = vec![0.0; self.ndof];
        for r in 0..self.ndof {
            let row = &self.band[r * w..(r + 1) * w];
            y[r] += row[0] * x[r];
            for d in 1..w.min(r + 1) {
                let a = row[d];
                if a != 0.0 {
                    y[r] += a * x[r - d];
                    y[r - d] += a * x[r];
                }
            }
        }
        y
    }

    /// ε∫(|∇u|² + λ(div u)²) in the element quadrature.
    pub fn energy(&self, u: &Field, v: &Field) -> f64 {
        let x = self.pack(u, v);
        dot(&x, &self.apply(&x))
    }

    /// ∫ rhs·u with the lumped quadrature.
    pub fn work(&self, f1: &Field, f2: &Field, u: &Field, v: &Field) -> f64 {
        dot(&self.load(f1, f2), &self.pack(u, v))
    }

    fn factorize(&self) -> Vec<f64> {
        let (n, bw, w) = (self.ndof, self.bw, self.bw + 1);
        let mut l = self.band.clone();
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let rj = j * w;
            let mut s = l[rj];
            for k in lo..j {
                let v = l[rj + (j - k)];
                s -= v * v;
            }
            let d = s.sqrt();
            l[rj] = d;
            for i in j + 1..(j + w).min(n) {
                let ri = i * w;
                let lo_i = i.saturating_sub(bw).max(lo);
                let mut s = l[ri + (i - j)];
                for k in lo_i..j {
                    s -= l[ri + (i - k)] * l[rj + (j - k)];
                }
                l[ri + (i - j)] = s / d;
            }
        }
        l
    }

    /// Computes and caches the Cholesky factor.
    pub fn prepare(&mut self) {
        if self.factor.is_none() {
            self.factor = Some(self.factorize());
        }
    }

    fn solve_direct(&self, b: &[f64]) -> Vec<f64> {
        let owned;
        let l = match &self.factor {
            Some(l) => l,
            None => {
                owned = self.factorize();
                &owned
            }
        };
        let (n, bw, w) = (self.ndof, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= l[i * w + (i - k)] * y[k];
            }
            y[i] = s / l[i * w];
        }
        for i in (0..n).rev() {
            y[i] /= l[i * w];
            let yi = y[i];
            for k in i.saturating_sub(bw)..i {
                y[k] -= l[i * w + (i - k)] * yi;
            }
        }
        y
    }

    fn solve_cg(&self, b: &[f64], max_iter: usize) -> Result<Vec<f64>> {
        let w = self.bw + 1;
        let diag: Vec<f64> = (0..self.ndof).map(|r| self.band[r * w]).collect();
        let bnorm = dot(b, b).sqrt();
        let mut x = vec![0.0; self.ndof];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..max_iter {
            let ap = self.apply(&p);
            let alpha = rz / dot(&p, &ap);
            for k in 0..self.ndof {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if dot(&r, &r).sqrt() <= 1e-13 * bnorm {
                return Ok(x);
            }
            for k in 0..self.ndof {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..self.ndof {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::SolverDiverged { iterations: max_iter, residual: dot(&r, &r).sqrt() / bnorm })
    }

    /// Solves −εΔu − ελ∇div u = (f₁, f₂) with u = 0 on ∂Ω.
    pub fn solve(&self, f1: &Field, f2: &Field, method: LameMethod) -> Result<(Field, Field)> {
        let b = self.load(f1, f2);
        let x = match method {
            LameMethod::Direct => self.solve_direct(&b),
            LameMethod::ConjugateGradient { max_iter } => self.solve_cg(&b, max_iter)?,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverDiverged { iterations: 0, residual: f64::NAN });
        }
        Ok(self.unpack(&x))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One-off Lamé solve with conjugate gradients.
pub fn solve_lame(f1: &Field, f2: &Field, grid: &Grid, eps: f64, lambda: f64) -> Result<(Field, Field)> {
    let op = LameOperator::new(grid, eps, lambda);
    let cap = 20 * op.ndof().max(100);
    op.solve(f1, f2, LameMethod::ConjugateGradient { max_iter: cap })
}

/// Relative gap between ε∫(|∇u|² + λ(div u)²) and ∫rhs·u.
pub fn energy_identity_gap(op: &LameOperator, f1: &Field, f2: &Field, u: &Field, v: &Field) -> f64 {
    let lhs = op.energy(u, v);
    let rhs = op.work(f1, f2, u, v);
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}
