use serde::Serialize;

use crate::error::{Error, Result};

/// Boundary traces tabulated on the x₂ nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryData {
    pub u_in: Vec<f64>,
    pub v_in: Vec<f64>,
    pub u_out: Vec<f64>,
    pub v_out: Vec<f64>,
    pub rho_in: Vec<f64>,
    pub amplitude: f64,
}

/// Number of sine modes in a generated perturbation.
pub const PERTURBATION_MODES: usize = 3;

impl BoundaryData {
    pub fn new(
        u_in: Vec<f64>,
        v_in: Vec<f64>,
        u_out: Vec<f64>,
        v_out: Vec<f64>,
        rho_in: Vec<f64>,
    ) -> Result<Self> {
        let n = u_in.len();
        if n < 2 || [v_in.len(), u_out.len(), v_out.len(), rho_in.len()].iter().any(|&m| m != n) {
            return Err(Error::GridMismatch("boundary traces must share one length".into()));
        }
        Ok(Self { u_in, v_in, u_out, v_out, rho_in, amplitude: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.u_in.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_in.is_empty()
    }

    /// Adds sine-mode perturbations to every trace.
    ///
    /// `coeffs[t][k]` weights sin((k+1)πx₂/2) in trace t, ordered as
    /// u_in, v_in, u_out, v_out, rho_in. Each trace perturbation is scaled to
    /// C² norm `amplitude` on [0, 2].
    pub fn perturbed(
        &self,
        x2: &[f64],
        coeffs: &[[f64; PERTURBATION_MODES]; 5],
        amplitude: f64,
    ) -> Result<Self> {
        if x2.len() != self.len() {
            return Err(Error::GridMismatch("node count differs from trace length".into()));
        }
        let mut out = self.clone();
        let traces = [
            &mut out.u_in,
            &mut out.v_in,
            &mut out.u_out,
            &mut out.v_out,
            &mut out.rho_in,
        ];
        for (trace, c) in traces.into_iter().zip(coeffs) {
            let norm = sine_c2_norm(c);
            if norm == 0.0 {
                continue;
            }
            for (t, &x) in trace.iter_mut().zip(x2) {
                *t += amplitude * sine_series(c, x, 0) / norm;
            }
        }
        out.amplitude = amplitude;
        Ok(out)
    }

    /// Largest violation of the corner conditions: u = wall speed and v = 0 at
    /// both ends of the inflow and outflow traces.
    pub fn corner_mismatch(&self, v0: f64, v1: f64) -> f64 {
        let last = self.len() - 1;
        [
            self.u_in[0] - v0,
            self.u_out[0] - v0,
            self.u_in[last] - v1,
            self.u_out[last] - v1,
            self.v_in[0],
            self.v_in[last],
            self.v_out[0],
            self.v_out[last],
        ]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// k-th derivative of Σ cₘ sin((m+1)πx/2).
pub fn sine_series(c: &[f64; PERTURBATION_MODES], x: f64, k: usize) -> f64 {
    c.iter()
        .enumerate()
        .map(|(m, &cm)| {
            let w = (m + 1) as f64 * std::f64::consts::FRAC_PI_2;
            cm * w.powi(k as i32) * (w * x + k as f64 * std::f64::consts::FRAC_PI_2).sin()
        })
        .sum()
}

/// max|f| + max|f′| + max|f″| on [0, 2], sampled finely.
pub fn sine_c2_norm(c: &[f64; PERTURBATION_MODES]) -> f64 {
    let samples = 2000;
    (0..3)
        .map(|k| {
            (0..=samples)
                .map(|i| sine_series(c, 2.0 * i as f64 / samples as f64, k).abs())
                .fold(0.0, f64::max)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(n: usize) -> BoundaryData {
        let x: Vec<f64> = (0..=n).map(|j| 2.0 * j as f64 / n as f64).collect();
        let u: Vec<f64> = x.iter().map(|v| 2.0 + 0.25 * v).collect();
        let z = vec![0.0; n + 1];
        BoundaryData::new(u.clone(), z.clone(), u, z, vec![1.0; n + 1]).unwrap()
    }

    #[test]
    fn unperturbed_traces_are_compatible() {
        assert_eq!(flat(32).corner_mismatch(2.0, 2.5), 0.0);
    }

    #[test]
    fn perturbation_keeps_corners() {
        let base = flat(32);
        let x: Vec<f64> = (0..=32).map(|j| 2.0 * j as f64 / 32.0).collect();
        let c = [[1.0, -0.5, 0.25]; 5];
        let p = base.perturbed(&x, &c, 1e-3).unwrap();
        assert!(p.corner_mismatch(2.0, 2.5) < 1e-15);
        let dev = p.v_in.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dev > 0.0 && dev <= 1e-3);
    }

    #[test]
    fn c2_norm_of_single_mode() {
        let w = std::f64::consts::FRAC_PI_2;
        assert_relative_eq!(sine_c2_norm(&[1.0, 0.0, 0.0]), 1.0 + w + w * w, epsilon = 1e-5);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(BoundaryData::new(vec![0.0; 3], vec![0.0; 2], vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]).is_err());
    }
}
