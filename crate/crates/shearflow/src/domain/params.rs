use serde::Serialize;

use crate::error::{Error, Result};

/// Scalar constants of the isentropic model with shear viscosity normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub eps: f64,
    pub a: f64,
    pub gamma: f64,
    pub rho_star: f64,
    pub lambda_bulk: f64,
    pub length: f64,
    pub p: f64,
    pub sigma: f64,
    pub p0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            eps: 0.1,
            a: 0.5,
            gamma: 2.0,
            rho_star: 1.0,
            lambda_bulk: 1.0,
            length: 0.05,
            p: 2.5,
            sigma: 0.05,
            p0: 8.0 / 3.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let finite = [
            self.eps,
            self.a,
            self.gamma,
            self.rho_star,
            self.lambda_bulk,
            self.length,
            self.p,
            self.sigma,
            self.p0,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return bad("all constants must be finite");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad("eps must lie in (0, 1]");
        }
        if self.a <= 0.0 {
            return bad("a must be positive");
        }
        if self.gamma <= 1.0 {
            return bad("gamma must exceed 1");
        }
        if self.rho_star <= 0.0 {
            return bad("rho_star must be positive");
        }
        if self.lambda_bulk <= 0.0 {
            return bad("lambda_bulk must be positive");
        }
        if self.length <= 0.0 {
            return bad("length must be positive");
        }
        if !(self.p0 > 2.0 && self.p0 <= 8.0 / 3.0) {
            return bad("p0 must lie in (2, 8/3]");
        }
        if !(self.p > 2.0 && self.p < self.p0) {
            return bad("p must satisfy 2 < p < p0");
        }
        if self.sigma <= 0.0 {
            return bad("sigma must be positive");
        }
        Ok(())
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }

    pub fn sound_speed(&self) -> f64 {
        sound_speed(self)
    }

    /// Pressure derivative p'(ρ) = aγρ^(γ−1).
    pub fn pressure_slope(&self, rho: f64) -> f64 {
        self.a * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// Equivalent constants with reference density 1.
    ///
    /// Dividing the momentum equations by ρ* maps (ε, a, ρ*) to
    /// (ε/ρ*, aρ*^(γ−1), 1) and leaves c unchanged.
    pub fn normalized(&self) -> Self {
        Self {
            eps: self.eps / self.rho_star,
            a: self.a * self.rho_star.powf(self.gamma - 1.0),
            rho_star: 1.0,
            ..*self
        }
    }

    /// Exponent 5/2 − 2/p + σ of the admissible perturbation size.
    pub fn perturbation_exponent(&self) -> f64 {
        2.5 - 2.0 / self.p + self.sigma
    }
}

/// c = sqrt(aγρ*^(γ−1)).
pub fn sound_speed(params: &PhysicalParams) -> f64 {
    (params.a * params.gamma * params.rho_star.powf(params.gamma - 1.0)).sqrt()
}
