//! Streamline straightening: x₂ = X(x₁, x̄₂) with dX/dx₁ = v/u from X(0, x̄₂) = x̄₂.

use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::field::{self, Field};

/// Tabulated map from straightened labels x̄₂ (the grid's x₂ nodes) to physical x₂.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    /// X[i, j]: physical x₂ of the streamline with label x₂ⱼ at x₁ᵢ.
    pub x2_of: Field,
    /// ∂x̄₂/∂x₂ at the streamline points.
    pub jacobian: Field,
    /// ∂x̄₂/∂x₁ at the streamline points.
    pub dlabel_dx1: Field,
}

impl CoordinateMap {
    pub fn identity(grid: &Grid) -> Self {
        Self {
            x2_of: field::from_fn(grid, |_, y| y),
            jacobian: Field::ones(grid.shape()),
            dlabel_dx1: field::zeros(grid),
        }
    }

    /// max |∂x̄₂/∂x₂ − 1| + max |∂x̄₂/∂x₁|.
    pub fn max_jacobian_deviation(&self) -> f64 {
        field::linf(&self.jacobian.mapv(|v| v - 1.0)) + field::linf(&self.dlabel_dx1)
    }

    /// Samples a physical field at the streamline points.
    pub fn to_straight(&self, f: &Field, grid: &Grid) -> Field {
        let mut out = field::zeros(grid);
        for i in 0..=grid.n1 {
            let row = f.row(i).to_vec();
            for j in 0..=grid.n2 {
                out[[i, j]] = field::interp_linear(&grid.x2, &row, self.x2_of[[i, j]]);
            }
        }
        out
    }

    /// Maps a field given on streamline points back to the physical nodes.
    pub fn to_physical(&self, f: &Field, grid: &Grid) -> Field {
        let mut out = field::zeros(grid);
        for i in 0..=grid.n1 {
            let xs = self.x2_of.row(i).to_vec();
            let row = f.row(i).to_vec();
            for j in 0..=grid.n2 {
                out[[i, j]] = field::interp_linear(&xs, &row, grid.x2[j]);
            }
        }
        out
    }
}

fn slope(u: &Field, v: &Field, grid: &Grid, i: usize, s: f64, y: f64) -> f64 {
    let at = |f: &Field, r: usize| field::interp_linear(&grid.x2, f.row(r).as_slice().unwrap(), y);
    let (u0, u1) = (at(u, i), at(u, i + 1));
    let (v0, v1) = (at(v, i), at(v, i + 1));
    let uu = u0 + s * (u1 - u0);
    let vv = v0 + s * (v1 - v0);
    vv / uu
}

/// Integrates dx₂/dx₁ = v/u from every inflow node with classical RK4.
pub fn straighten_streamlines(u_eps: &Field, v_eps: &Field, grid: &Grid) -> Result<CoordinateMap> {
    if u_eps.iter().any(|&u| !(u > 0.0)) {
        return Err(Error::InvalidParams("transport speed must be positive".into()));
    }
    if field::linf(v_eps) == 0.0 {
        return Ok(CoordinateMap::identity(grid));
    }
    const SUB: usize = 4;
    let mut x2_of = field::zeros(grid);
    for j in 0..=grid.n2 {
        x2_of[[0, j]] = grid.x2[j];
    }
    let h = grid.h1() / SUB as f64;
    for i in 0..grid.n1 {
        for j in 0..=grid.n2 {
            let mut y = x2_of[[i, j]];
            if j > 0 && j < grid.n2 {
                for k in 0..SUB {
                    let s0 = k as f64 / SUB as f64;
                    let ds = 1.0 / SUB as f64;
                    let f = |s: f64, y: f64| slope(u_eps, v_eps, grid, i, s, y.clamp(0.0, 2.0));
                    let k1 = f(s0, y);
                    let k2 = f(s0 + ds / 2.0, y + h * k1 / 2.0);
                    let k3 = f(s0 + ds / 2.0, y + h * k2 / 2.0);
                    let k4 = f(s0 + ds, y + h * k3);
                    y += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
                }
            }
            x2_of[[i + 1, j]] = y;
        }
        let row = x2_of.row(i + 1);
        if row.windows(2).into_iter().any(|w| w[1] <= w[0]) {
            return Err(Error::StreamlineCrossing { x1: grid.x1[i + 1] });
        }
    }
    // X_x̄₂ and X_x₁ by differences in label space.
    let mut jacobian = field::zeros(grid);
    let mut dlabel_dx1 = field::zeros(grid);
    for i in 0..=grid.n1 {
        let dx_dl = field::deriv_1d(&grid.x2, x2_of.row(i).as_slice().unwrap());
        for j in 0..=grid.n2 {
            jacobian[[i, j]] = 1.0 / dx_dl[j];
        }
    }
    for j in 0..=grid.n2 {
        let col: Vec<f64> = x2_of.column(j).to_vec();
        let dx_dx1 = field::deriv_1d(&grid.x1, &col);
        for i in 0..=grid.n1 {
            dlabel_dx1[[i, j]] = -dx_dx1[i] * jacobian[[i, j]];
        }
    }
    Ok(CoordinateMap { x2_of, jacobian, dlabel_dx1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, Grading, PhysicalParams};
    use approx::assert_relative_eq;

    #[test]
    fn zero_slope_is_identity() {
        let g = build_grid(&PhysicalParams::default(), 8, 32, Grading::default()).unwrap();
        let u = Field::from_elem(g.shape(), 2.0);
        let m = straighten_streamlines(&u, &field::zeros(&g), &g).unwrap();
        assert_eq!(m.max_jacobian_deviation(), 0.0);
        let f = field::from_fn(&g, |x, y| x * y);
        assert_eq!(m.to_physical(&m.to_straight(&f, &g), &g), f);
    }

    #[test]
    fn constant_band_slope() {
        let g = build_grid(&PhysicalParams::default(), 8, 64, Grading::Uniform).unwrap();
        let s = 0.01;
        let u = Field::from_elem(g.shape(), 2.0);
        let v = field::from_fn(&g, |_, y| if (0.5..=1.5).contains(&y) { s } else { 0.0 });
        let m = straighten_streamlines(&u, &v, &g).unwrap();
        let j = 32;
        for i in 0..=g.n1 {
            assert_relative_eq!(m.x2_of[[i, j]], g.x2[j] + s / 2.0 * g.x1[i], epsilon = 1e-13);
        }
        assert_eq!(m.x2_of[[g.n1, 0]], 0.0);
        assert_eq!(m.x2_of[[g.n1, g.n2]], 2.0);
    }

    #[test]
    fn crossing_detected() {
        let g = build_grid(&PhysicalParams::default(), 8, 32, Grading::Uniform).unwrap();
        let u = Field::from_elem(g.shape(), 0.01);
        let v = field::from_fn(&g, |_, y| (3.0 * std::f64::consts::PI * y).sin());
        assert!(matches!(straighten_streamlines(&u, &v, &g), Err(Error::StreamlineCrossing { .. })));
    }
}
