//! Mollification and the explicit density transport.

use crate::domain::Grid;
use crate::field::{self, Field};

use super::streamline::CoordinateMap;

fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn reflect(k: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if k < 0 {
        -k
    } else if k > n {
        2 * n - k
    } else {
        k
    };
    r.clamp(0, n) as usize
}

/// Normalized radial bump of radius `delta` grid cells, reflected at the boundary.
pub fn mollify(f: &Field, delta: f64) -> Field {
    if delta <= 0.0 {
        return f.clone();
    }
    let (n1, n2) = (f.nrows() - 1, f.ncols() - 1);
    let r = delta.ceil() as isize;
    let mut kernel = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let w = bump(((a * a + b * b) as f64).sqrt() / delta);
            if w > 0.0 {
                kernel.push((a, b, w));
            }
        }
    }
    let total: f64 = kernel.iter().map(|k| k.2).sum();
    let mut out = Field::zeros(f.raw_dim());
    for i in 0..=n1 {
        for j in 0..=n2 {
            let mut s = 0.0;
            for &(a, b, w) in &kernel {
                s += w * f[[reflect(i as isize + a, n1), reflect(j as isize + b, n2)]];
            }
            out[[i, j]] = s / total;
        }
    }
    out
}

/// ρ = ∫₀^{x₁} (f₀ − div u)/u ds per row in straightened coordinates.
pub fn solve_transport(u_speed: &Field, f0: &Field, div_u: &Field, x1: &[f64]) -> Field {
    let mut rho = Field::zeros(f0.raw_dim());
    for j in 0..f0.ncols() {
        for i in 1..x1.len() {
            let h = x1[i] - x1[i - 1];
            let a = (f0[[i - 1, j]] - div_u[[i - 1, j]]) / u_speed[[i - 1, j]];
            let b = (f0[[i, j]] - div_u[[i, j]]) / u_speed[[i, j]];
            rho[[i, j]] = rho[[i - 1, j]] + 0.5 * h * (a + b);
        }
    }
    rho
}

/// Transport along the straightened streamlines, returned on the physical nodes.
pub fn transport_along_streamlines(
    map: &CoordinateMap,
    u_speed: &Field,
    f0: &Field,
    div_u: &Field,
    grid: &Grid,
) -> Field {
    let integrand = (f0 - div_u) / u_speed;
    let ones = Field::ones(grid.shape());
    let zero = field::zeros(grid);
    let bar = map.to_straight(&integrand, grid);
    let rho_bar = solve_transport(&ones, &bar, &zero, &grid.x1);
    map.to_physical(&rho_bar, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n1: usize, n2: usize) -> Grid {
        Grid::uniform(n1, n2, 1.0)
    }

    #[test]
    fn zero_delta_is_identity() {
        let g = grid(8, 16);
        let f = field::from_fn(&g, |x, y| (x * 7.0).sin() + y);
        assert_eq!(mollify(&f, 0.0), f);
    }

    #[test]
    fn constants_preserved() {
        let g = grid(8, 16);
        let f = Field::from_elem(g.shape(), 3.25);
        assert!(field::linf(&(mollify(&f, 2.0) - 3.25)) < 1e-14);
    }

    #[test]
    fn spike_mass_preserved() {
        let g = grid(16, 32);
        let mut f = field::zeros(&g);
        let w = field::weights(&g);
        f[[8, 16]] = 1.0 / w[[8, 16]];
        let m = field::integral(&mollify(&f, 2.0), &g);
        assert!((m - 1.0).abs() < 1e-10, "{m}");
    }

    #[test]
    fn transport_trivial_cases() {
        let g = grid(8, 16);
        let z = field::zeros(&g);
        let two = Field::from_elem(g.shape(), 2.0);
        assert_eq!(field::linf(&solve_transport(&two, &z, &z, &g.x1)), 0.0);
        let rho = solve_transport(&two, &two, &z, &g.x1);
        for i in 0..=g.n1 {
            assert_relative_eq!(rho[[i, 5]], g.x1[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn manufactured_density_second_order() {
        let pi = std::f64::consts::PI;
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let g = grid(n, 2 * n);
            let us = field::from_fn(&g, |_, y| 2.0 + 0.1 * y);
            let f0 = field::from_fn(&g, |x, y| (2.0 + 0.1 * y) * x.cos() * (pi * y).cos());
            let rho = solve_transport(&us, &f0, &field::zeros(&g), &g.x1);
            let exact = field::from_fn(&g, |x, y| x.sin() * (pi * y).cos());
            errs.push(field::linf(&(&rho - &exact)));
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() > 1.9, "{errs:?}");
        }
    }
}
