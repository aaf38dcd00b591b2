//! Least-squares power-law fits in log–log coordinates.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("eps values must be positive")]
    NonPositiveEps,
    #[error("norm sequence has a non-positive entry")]
    DegenerateFit,
    #[error("eps and norm lists differ in length")]
    LengthMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the fitted line in log space.
    pub residual: f64,
}

/// Fits log(norm) = intercept + slope·log(ε).
pub fn fit_slope(eps: &[f64], norms: &[f64]) -> Result<SlopeFit, FitError> {
    if eps.len() != norms.len() {
        return Err(FitError::LengthMismatch);
    }
    if eps.len() < 3 {
        return Err(FitError::TooFewPoints(eps.len()));
    }
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(FitError::NonPositiveEps);
    }
    if norms.iter().any(|&v| !(v > 1e-300)) {
        return Err(FitError::DegenerateFit);
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit { slope, intercept, residual })
}

/// Outcome of a slope check where an exactly-zero sequence counts as a pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SlopeVerdict {
    Fitted(SlopeFit),
    Exact,
}

impl SlopeVerdict {
    pub fn passes(&self, threshold: f64) -> bool {
        match self {
            SlopeVerdict::Fitted(f) => f.slope >= threshold,
            SlopeVerdict::Exact => true,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SlopeVerdict::Fitted(f) => format!("{:.3}", f.slope),
            SlopeVerdict::Exact => "exact".into(),
        }
    }
}

pub fn slope_verdict(eps: &[f64], norms: &[f64]) -> Result<SlopeVerdict, FitError> {
    match fit_slope(eps, norms) {
        Ok(f) => Ok(SlopeVerdict::Fitted(f)),
        Err(FitError::DegenerateFit) if norms.iter().all(|&v| v.abs() <= 1e-300) => Ok(SlopeVerdict::Exact),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    #[test]
    fn exact_square_law() {
        let n: Vec<f64> = SWEEP.iter().map(|e| e * e).collect();
        let f = fit_slope(&SWEEP, &n).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn scaled_three_halves() {
        let n: Vec<f64> = SWEEP.iter().map(|e| 3.0 * e.powf(1.5)).collect();
        let f = fit_slope(&SWEEP, &n).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_sequence_is_exact() {
        assert_eq!(fit_slope(&SWEEP, &[0.0; 4]), Err(FitError::DegenerateFit));
        let v = slope_verdict(&SWEEP, &[0.0; 4]).unwrap();
        assert_eq!(v, SlopeVerdict::Exact);
        assert!(v.passes(10.0));
        assert_eq!(v.describe(), "exact");
    }

    #[test]
    fn partial_zero_is_an_error() {
        assert_eq!(slope_verdict(&SWEEP, &[1.0, 0.0, 1.0, 1.0]), Err(FitError::DegenerateFit));
    }

    #[test]
    fn too_few_points() {
        assert_eq!(fit_slope(&[0.1, 0.05], &[1.0, 0.5]), Err(FitError::TooFewPoints(2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]
        #[test]
        fn recovers_power_laws(k in -3.0f64..3.0, c in 0.01f64..100.0) {
            let n: Vec<f64> = SWEEP.iter().map(|e| c * e.powf(k)).collect();
            let f = fit_slope(&SWEEP, &n).unwrap();
            prop_assert!((f.slope - k).abs() < 1e-10);
            prop_assert!((f.intercept - c.ln()).abs() < 1e-9);
        }
    }
}
