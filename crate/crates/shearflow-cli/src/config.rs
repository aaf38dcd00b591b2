//! Run configuration: TOML sections [params], [flow], [grid], [boundary], [run].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shearflow::domain::{build_grid, validate_supersonic, BaseFlow, Grading, Grid, PhysicalParams};

use crate::error::CliError;

/// Environment variable overriding `[run].out`.
pub const OUT_ENV: &str = "SHEARFLOW_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
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

impl Default for ParamsSection {
    fn default() -> Self {
        let d = PhysicalParams::default();
        Self {
            eps: d.eps,
            a: d.a,
            gamma: d.gamma,
            rho_star: d.rho_star,
            lambda_bulk: d.lambda_bulk,
            length: d.length,
            p: d.p,
            sigma: d.sigma,
            p0: d.p0,
        }
    }
}

impl ParamsSection {
    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams {
            eps: self.eps,
            a: self.a,
            gamma: self.gamma,
            rho_star: self.rho_star,
            lambda_bulk: self.lambda_bulk,
            length: self.length,
            p: self.p,
            sigma: self.sigma,
            p0: self.p0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Constant,
    Couette,
    Quartic,
    Parabolic,
    Sine,
    Polynomial,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSection {
    pub profile: ProfileKind,
    /// Wall speeds for couette and quartic.
    pub v0: f64,
    pub v1: f64,
    /// Wall curvature weight of the quartic profile.
    pub kappa: f64,
    /// Base value and amplitude for constant, parabolic and sine.
    pub base: f64,
    pub amp: f64,
    /// Power-series coefficients for polynomial.
    pub coeffs: Vec<f64>,
    /// Knots for tabulated.
    pub knots_x: Vec<f64>,
    pub knots_y: Vec<f64>,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Quartic,
            v0: 2.0,
            v1: 2.5,
            kappa: 0.1,
            base: 2.0,
            amp: 0.1,
            coeffs: Vec::new(),
            knots_x: Vec::new(),
            knots_y: Vec::new(),
        }
    }
}

impl FlowSection {
    pub fn base_flow(&self) -> shearflow::Result<BaseFlow> {
        match self.profile {
            ProfileKind::Constant => BaseFlow::constant(self.base),
            ProfileKind::Couette => BaseFlow::couette(self.v0, self.v1),
            ProfileKind::Quartic => BaseFlow::quartic(self.v0, self.v1, self.kappa),
            ProfileKind::Parabolic => BaseFlow::parabolic(self.base, self.amp),
            ProfileKind::Sine => BaseFlow::sine(self.base, self.amp),
            ProfileKind::Polynomial => BaseFlow::new(shearflow::domain::Profile::Polynomial(self.coeffs.clone())),
            ProfileKind::Tabulated => BaseFlow::tabulated(self.knots_x.clone(), self.knots_y.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradingKind {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
    pub grading: GradingKind,
    pub ratio: f64,
    pub wall_fraction: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n1: 64, n2: 256, grading: GradingKind::Geometric, ratio: 1.1, wall_fraction: 1.0 / 16.0 }
    }
}

impl GridSection {
    pub fn grading(&self) -> Grading {
        match self.grading {
            GradingKind::Uniform => Grading::Uniform,
            GradingKind::Geometric => Grading::Geometric { ratio: self.ratio, wall_fraction: self.wall_fraction },
        }
    }

    pub fn build(&self, params: &PhysicalParams) -> shearflow::Result<Grid> {
        build_grid(params, self.n1, self.n2, self.grading())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    /// Perturbation C² size is `factor · ε^(5/2 − 2/p + σ)`.
    pub factor: f64,
}

impl Default for BoundarySection {
    fn default() -> Self {
        Self { factor: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    SolverVerification,
    Exactness,
    ResidualOrders,
    LayerOrders,
    LinearEstimates,
    Contraction,
    ZeroViscosity,
    EndToEnd,
    Plumbing,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::SolverVerification,
        Suite::Exactness,
        Suite::ResidualOrders,
        Suite::LayerOrders,
        Suite::LinearEstimates,
        Suite::Contraction,
        Suite::ZeroViscosity,
        Suite::EndToEnd,
        Suite::Plumbing,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub sweep: Vec<f64>,
    pub suites: Vec<Suite>,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: f64,
    pub max_outer: usize,
    /// Mollification radius in cells.
    pub delta: f64,
    /// Layer cutoff scale and corner-jet width.
    pub a0: f64,
    pub b: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            sweep: vec![0.2, 0.1, 0.05, 0.025],
            suites: Suite::ALL.to_vec(),
            out: PathBuf::from("shearflow-out"),
            seed: 7,
            tol: 1e-9,
            max_outer: 50,
            delta: 2.0,
            a0: 0.4,
            b: 0.25,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub flow: FlowSection,
    pub grid: GridSection,
    pub boundary: BoundarySection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("cannot parse config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Output directory after the environment override.
    pub fn out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.run.out.clone(),
        }
    }

    /// Parameters at sweep value `eps`.
    pub fn params_at(&self, eps: f64) -> PhysicalParams {
        self.params.physical().with_eps(eps)
    }

    /// Checks every constraint that can fail before a case starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| CliError::Config(m);
        self.params.physical().validate().map_err(|e| cfg(format!("[params]: {e}")))?;
        let sweep = &self.run.sweep;
        if sweep.len() < 3 {
            return Err(cfg(format!("[run].sweep needs at least 3 values, got {}", sweep.len())));
        }
        if sweep.windows(2).any(|w| w[1] >= w[0]) {
            return Err(cfg("[run].sweep must be strictly decreasing".into()));
        }
        if self.run.tol <= 0.0 || self.run.max_outer == 0 {
            return Err(cfg("[run].tol and [run].max_outer must be positive".into()));
        }
        if self.boundary.factor < 0.0 || !self.boundary.factor.is_finite() {
            return Err(cfg("[boundary].factor must be a finite non-negative number".into()));
        }
        let flow = self.flow.base_flow().map_err(|e| cfg(format!("[flow]: {e}")))?;
        for &eps in sweep.iter().chain(std::iter::once(&self.params.eps)) {
            let params = self.params_at(eps);
            params.validate().map_err(|e| cfg(format!("eps = {eps}: {e}")))?;
            let grid = self.grid.build(&params).map_err(|e| cfg(format!("[grid] at eps = {eps}: {e}")))?;
            validate_supersonic(&flow, &params, &grid.x2).map_err(|source| CliError::Subsonic { source })?;
        }
        Ok(())
    }
}
