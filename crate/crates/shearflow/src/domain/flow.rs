use serde::Serialize;

use super::params::PhysicalParams;
use crate::error::{Error, Result};

/// Shape of the base shear profile μ(x₂) on [0, 2].
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Σ cₖ x₂ᵏ.
    Polynomial(Vec<f64>),
    /// base + amp·sin(πx₂).
    Sine { base: f64, amp: f64 },
    /// Natural cubic spline through the given knots.
    Tabulated(Spline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::InvalidParams("spline needs at least 3 matching knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("spline knots must increase".into()));
        }
        // Second derivatives with natural end conditions.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let a = h0 / 6.0;
            let b = (h0 + h1) / 3.0;
            let cc = h1 / 6.0;
            let r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    fn eval(&self, t: f64, k: usize) -> f64 {
        let n = self.x.len();
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        match k {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0,
            2 => a * m0 + b * m1,
            3 => (m1 - m0) / h,
            _ => 0.0,
        }
    }
}

/// Base shear flow (μ(x₂), 0) with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseFlow {
    pub profile: Profile,
    pub v0: f64,
    pub v1: f64,
}

impl BaseFlow {
    pub fn new(profile: Profile) -> Result<Self> {
        let mut flow = Self { profile, v0: 0.0, v1: 0.0 };
        flow.v0 = flow.mu(0.0);
        flow.v1 = flow.mu(2.0);
        if !(flow.v0 > 0.0 && flow.v1 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "wall speeds must be positive, got {} and {}",
                flow.v0, flow.v1
            )));
        }
        Ok(flow)
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(Profile::Polynomial(vec![v]))
    }

    /// Linear profile between the wall speeds.
    pub fn couette(v0: f64, v1: f64) -> Result<Self> {
        Self::new(Profile::Polynomial(vec![v0, (v1 - v0) / 2.0]))
    }

    /// Couette profile plus κx₂²(2−x₂)², so μ″ = 8κ at both walls.
    pub fn quartic(v0: f64, v1: f64, kappa: f64) -> Result<Self> {
        Self::new(Profile::Polynomial(vec![
            v0,
            (v1 - v0) / 2.0,
            4.0 * kappa,
            -4.0 * kappa,
            kappa,
        ]))
    }

    /// base + amp·x₂(2−x₂).
    pub fn parabolic(base: f64, amp: f64) -> Result<Self> {
        Self::new(Profile::Polynomial(vec![base, 2.0 * amp, -amp]))
    }

    pub fn sine(base: f64, amp: f64) -> Result<Self> {
        Self::new(Profile::Sine { base, amp })
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let (lo, hi) = (x.first().copied(), x.last().copied());
        if lo != Some(0.0) || hi != Some(2.0) {
            return Err(Error::InvalidParams("tabulated profile must span [0, 2]".into()));
        }
        Self::new(Profile::Tabulated(Spline::new(x, y)?))
    }

    pub fn mu(&self, x2: f64) -> f64 {
        self.deriv(0, x2)
    }

    /// k-th derivative of μ at x₂.
    pub fn deriv(&self, k: usize, x2: f64) -> f64 {
        match &self.profile {
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(k)
                .rev()
                .fold(0.0, |acc, (p, &coef)| {
                    let fall: f64 = (p - k + 1..=p).map(|v| v as f64).product();
                    acc * x2 + coef * fall
                }),
            Profile::Sine { base, amp } => {
                let w = std::f64::consts::PI;
                let phase = (x2 * w) + k as f64 * std::f64::consts::FRAC_PI_2;
                let v = amp * w.powi(k as i32) * phase.sin();
                if k == 0 {
                    base + v
                } else {
                    v
                }
            }
            Profile::Tabulated(s) => s.eval(x2, k),
        }
    }

    /// μ and its first six derivatives at x₂.
    pub fn jet(&self, x2: f64) -> [f64; 7] {
        std::array::from_fn(|k| self.deriv(k, x2))
    }

    /// max over [0,2] of |μ⁽ᵏ⁾| for k ≤ 6, sampled on a fine mesh.
    pub fn derivative_bound(&self) -> f64 {
        (0..=400)
            .map(|i| {
                let x = 2.0 * i as f64 / 400.0;
                (0..=6).map(|k| self.deriv(k, x).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupersonicReport {
    pub min_margin: f64,
    pub location: f64,
}

/// Minimum of μ² − c² over the supplied nodes.
pub fn validate_supersonic(
    flow: &BaseFlow,
    params: &PhysicalParams,
    x2_nodes: &[f64],
) -> Result<SupersonicReport> {
    let c2 = params.sound_speed().powi(2);
    let mut report = SupersonicReport { min_margin: f64::INFINITY, location: 0.0 };
    for &x in x2_nodes {
        let m = flow.mu(x).powi(2) - c2;
        if m < report.min_margin {
            report = SupersonicReport { min_margin: m, location: x };
        }
    }
    if !(report.min_margin > 0.0) {
        return Err(Error::SubsonicPoint { x2: report.location, margin: report.min_margin });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn nodes(n: usize) -> Vec<f64> {
        (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect()
    }

    #[test]
    fn constant_profile_margin() {
        let flow = BaseFlow::constant(2.0).unwrap();
        let params = PhysicalParams::default();
        let r = validate_supersonic(&flow, &params, &nodes(16)).unwrap();
        assert_relative_eq!(r.min_margin, 3.0);
    }

    #[test]
    fn sine_profile_margin() {
        let flow = BaseFlow::sine(2.0, 0.1).unwrap();
        let params = PhysicalParams::default();
        let r = validate_supersonic(&flow, &params, &nodes(16)).unwrap();
        assert_relative_eq!(r.min_margin, 2.61, epsilon = 1e-12);
        assert_relative_eq!(r.location, 1.5);
    }

    #[test]
    fn subsonic_rejected() {
        let flow = BaseFlow::constant(1.0).unwrap();
        let params = PhysicalParams { a: 0.72, ..Default::default() };
        match validate_supersonic(&flow, &params, &nodes(8)) {
            Err(Error::SubsonicPoint { margin, .. }) => assert_relative_eq!(margin, -0.44, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quartic_wall_curvature() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.1).unwrap();
        assert_relative_eq!(flow.v0, 2.0);
        assert_relative_eq!(flow.v1, 2.5);
        assert_relative_eq!(flow.deriv(2, 0.0), 0.8, epsilon = 1e-14);
        assert_relative_eq!(flow.deriv(2, 2.0), 0.8, epsilon = 1e-14);
        assert_eq!(flow.deriv(5, 0.3), 0.0);
    }

    #[test]
    fn polynomial_derivatives_match_differences() {
        let flow = BaseFlow::quartic(2.0, 2.5, 0.3).unwrap();
        let h = 1e-5;
        for k in 0..4 {
            let x = 0.7;
            let fd = (flow.deriv(k, x + h) - flow.deriv(k, x - h)) / (2.0 * h);
            assert_relative_eq!(fd, flow.deriv(k + 1, x), epsilon = 1e-6);
        }
    }

    #[test]
    fn sine_derivatives_cycle() {
        let flow = BaseFlow::sine(2.0, 0.5).unwrap();
        let x = 0.37;
        let pi = std::f64::consts::PI;
        assert_relative_eq!(flow.deriv(1, x), 0.5 * pi * (pi * x).cos(), epsilon = 1e-14);
        assert_relative_eq!(flow.deriv(2, x), -0.5 * pi * pi * (pi * x).sin(), epsilon = 1e-12);
        assert_relative_eq!(flow.deriv(4, x), 0.5 * pi.powi(4) * (pi * x).sin(), epsilon = 1e-10);
    }

    #[test]
    fn spline_reproduces_cubic_interior_data() {
        let x: Vec<f64> = nodes(40);
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 0.1 * v).collect();
        let flow = BaseFlow::tabulated(x, y).unwrap();
        assert_relative_eq!(flow.mu(0.55), 2.055, epsilon = 1e-12);
        assert_relative_eq!(flow.deriv(1, 1.3), 0.1, epsilon = 1e-12);
        assert_eq!(flow.deriv(4, 1.3), 0.0);
    }
}
