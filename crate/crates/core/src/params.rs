use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("params.n must be a positive integer (got {0})")]
    Dimension(u32),
    #[error("params.sigma must be a finite real > 1 (got {0})")]
    Sigma(f64),
    #[error("params.mu must be a finite real > 0 (got {0})")]
    Mu(f64),
}

/// Model parameters (n, σ, μ) of
/// `u_tt + (−Δ)^σ u + μ/(1+t) u_t = |u|^p` on ℝⁿ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    n: u32,
    sigma: f64,
    mu: f64,
}

impl ModelParams {
    pub fn new(n: u32, sigma: f64, mu: f64) -> Result<Self, ParamError> {
        if n == 0 {
            return Err(ParamError::Dimension(n));
        }
        if !(sigma.is_finite() && sigma > 1.0) {
            return Err(ParamError::Sigma(sigma));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(ParamError::Mu(mu));
        }
        Ok(Self { n, sigma, mu })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// ρ = (1 − μ)/2, the Bessel order of the mode equation.
    pub fn rho(&self) -> f64 {
        0.5 * (1.0 - self.mu)
    }
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: u32,
    sigma: f64,
    mu: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = ParamError;
    fn try_from(r: RawParams) -> Result<Self, ParamError> {
        ModelParams::new(r.n, r.sigma, r.mu)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n: p.n,
            sigma: p.sigma,
            mu: p.mu,
        }
    }
}
