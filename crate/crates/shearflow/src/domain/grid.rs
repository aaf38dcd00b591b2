use serde::Serialize;

use super::params::PhysicalParams;
use crate::error::{Error, Result};

/// Distribution of nodes across the channel height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Grading {
    Uniform,
    /// Geometric growth away from both walls, capped by a uniform bulk spacing.
    /// The first cell is `wall_fraction·√ε` wide.
    Geometric { ratio: f64, wall_fraction: f64 },
}

impl Default for Grading {
    fn default() -> Self {
        Grading::Geometric { ratio: 1.1, wall_fraction: 1.0 / 16.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryTag {
    Inflow,
    Outflow,
    LowerWall,
    UpperWall,
}

/// Tensor grid on [0, L] × [0, 2].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub length: f64,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl Grid {
    /// Uniform grid without the wall-resolution check.
    pub fn uniform(n1: usize, n2: usize, length: f64) -> Self {
        Self {
            n1,
            n2,
            length,
            x1: (0..=n1).map(|i| length * i as f64 / n1 as f64).collect(),
            x2: (0..=n2).map(|j| 2.0 * j as f64 / n2 as f64).collect(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1 + 1, self.n2 + 1)
    }

    pub fn h1(&self) -> f64 {
        self.length / self.n1 as f64
    }

    pub fn h2(&self, j: usize) -> f64 {
        self.x2[j + 1] - self.x2[j]
    }

    pub fn h2_min(&self) -> f64 {
        (0..self.n2).map(|j| self.h2(j)).fold(f64::INFINITY, f64::min)
    }

    pub fn h2_max(&self) -> f64 {
        (0..self.n2).map(|j| self.h2(j)).fold(0.0, f64::max)
    }

    pub fn h_max(&self) -> f64 {
        self.h1().max(self.h2_max())
    }

    /// Trapezoid weights along x₁.
    pub fn weights1(&self) -> Vec<f64> {
        trapezoid_weights(&self.x1)
    }

    /// Trapezoid weights along x₂.
    pub fn weights2(&self) -> Vec<f64> {
        trapezoid_weights(&self.x2)
    }

    pub fn tags(&self, i: usize, j: usize) -> Vec<BoundaryTag> {
        let mut t = Vec::new();
        if i == 0 {
            t.push(BoundaryTag::Inflow);
        }
        if i == self.n1 {
            t.push(BoundaryTag::Outflow);
        }
        if j == 0 {
            t.push(BoundaryTag::LowerWall);
        }
        if j == self.n2 {
            t.push(BoundaryTag::UpperWall);
        }
        t
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n1 || j == self.n2
    }

    /// Index of the cell [x₂ⱼ, x₂ⱼ₊₁] containing `y`, clamped to the grid.
    pub fn locate2(&self, y: f64) -> usize {
        locate(&self.x2, y)
    }
}

/// Index of the interval of `nodes` containing `t`, clamped.
pub(crate) fn locate(nodes: &[f64], t: f64) -> usize {
    let n = nodes.len();
    match nodes.partition_point(|&v| v <= t) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    }
}

pub(crate) fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = x[k + 1] - x[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

pub fn build_grid(params: &PhysicalParams, n1: usize, n2: usize, grading: Grading) -> Result<Grid> {
    if n1 < 8 || n2 < 8 {
        return Err(Error::GridTooCoarse(format!("need n1, n2 >= 8, got {n1} x {n2}")));
    }
    let x1: Vec<f64> = (0..=n1)
        .map(|i| if i == n1 { params.length } else { params.length * i as f64 / n1 as f64 })
        .collect();
    let sqrt_eps = params.eps.sqrt();
    let x2 = match grading {
        Grading::Uniform => (0..=n2).map(|j| 2.0 * j as f64 / n2 as f64).collect(),
        Grading::Geometric { ratio, wall_fraction } => {
            if n2 % 2 != 0 {
                return Err(Error::GridTooCoarse("graded grids need an even n2".into()));
            }
            if !(ratio >= 1.0 && ratio <= 1.15) || wall_fraction <= 0.0 {
                return Err(Error::InvalidParams("grading ratio must lie in [1, 1.15]".into()));
            }
            let half = n2 / 2;
            let spacing = half_spacing(half, wall_fraction * sqrt_eps, ratio)
                .or_else(|| half_spacing(half, 0.25 * sqrt_eps, ratio))
                .ok_or_else(|| {
                    Error::GridTooCoarse(format!(
                        "n2 = {n2} cannot resolve the wall layer of width {sqrt_eps:.3e}"
                    ))
                })?;
            let mut x2 = vec![0.0; n2 + 1];
            for j in 0..half {
                x2[j + 1] = x2[j] + spacing[j];
            }
            x2[half] = 1.0;
            for j in 0..half {
                x2[n2 - j] = 2.0 - x2[j];
            }
            x2
        }
    };
    let grid = Grid { n1, n2, length: params.length, x1, x2 };
    check_wall_resolution(&grid, sqrt_eps)?;
    Ok(grid)
}

/// Cell widths for one half channel: geometric growth from `hw` capped at a
/// bulk width chosen so that the widths sum to 1.
fn half_spacing(m: usize, hw: f64, ratio: f64) -> Option<Vec<f64>> {
    let widths = |cap: f64| -> Vec<f64> {
        (0..m).map(|k| (hw * ratio.powi(k as i32)).min(cap)).collect()
    };
    if m as f64 * hw >= 1.0 {
        return Some(vec![1.0 / m as f64; m]);
    }
    let free: f64 = (0..m).map(|k| hw * ratio.powi(k as i32)).sum();
    if free < 1.0 {
        return None;
    }
    let (mut lo, mut hi) = (hw, hw * ratio.powi(m as i32));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if widths(mid).iter().sum::<f64>() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = widths(0.5 * (lo + hi));
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    Some(w)
}

fn check_wall_resolution(grid: &Grid, sqrt_eps: f64) -> Result<()> {
    let limit = 0.25 * sqrt_eps;
    for j in 0..grid.n2 {
        let near = grid.x2[j] < sqrt_eps || grid.x2[j + 1] > 2.0 - sqrt_eps;
        if near && grid.h2(j) > limit * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse(format!(
                "spacing {:.3e} at x2 = {:.3} exceeds sqrt(eps)/4 = {:.3e}",
                grid.h2(j),
                grid.x2[j],
                limit
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(eps: f64, length: f64) -> PhysicalParams {
        PhysicalParams { eps, length, ..Default::default() }
    }

    #[test]
    fn graded_grid_resolves_layer() {
        let g = build_grid(&params(0.01, 0.1), 64, 128, Grading::default()).unwrap();
        assert!(g.h2(0) <= 0.025);
        assert!(g.h2(g.n2 - 1) <= 0.025);
        assert_eq!(g.x2[0], 0.0);
        assert_eq!(g.x2[g.n2], 2.0);
        assert_eq!(g.x1[g.n1], 0.1);
        assert!(g.x2.windows(2).all(|w| w[1] > w[0]));
        for j in 0..=g.n2 {
            assert_relative_eq!(g.x2[j], 2.0 - g.x2[g.n2 - j], epsilon = 1e-14);
        }
    }

    #[test]
    fn too_few_cells() {
        assert!(matches!(
            build_grid(&params(0.1, 0.05), 4, 64, Grading::default()),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn uniform_cannot_resolve_thin_layer() {
        assert!(matches!(
            build_grid(&params(1e-4, 0.05), 16, 16, Grading::Uniform),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn growth_ratio_respected() {
        let g = build_grid(&params(0.05, 0.05), 16, 128, Grading::default()).unwrap();
        for j in 0..g.n2 / 2 - 1 {
            assert!(g.h2(j + 1) / g.h2(j) <= 1.1 + 1e-9);
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let g = build_grid(&params(0.1, 0.05), 16, 64, Grading::default()).unwrap();
        assert_relative_eq!(g.weights2().iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(g.weights1().iter().sum::<f64>(), 0.05, epsilon = 1e-15);
    }
}
