//! Priors and Gaussian likelihoods on an unconstrained parameter vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// How an unconstrained coordinate maps to the reported parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transform {
    Identity,
    /// the coordinate is the logarithm of a positive parameter
    Log,
}

impl Transform {
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::Log => u.exp(),
        }
    }
}

/// Prior family of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Prior {
    Normal { mu: f64, sigma: f64 },
    /// `ln x ~ N(mu, sigma)`; sampled on `ln x`.
    LogNormal { mu: f64, sigma: f64 },
    /// half-Cauchy on `x > 0`; sampled on `ln x`.
    HalfCauchy { beta: f64 },
}

impl Prior {
    pub fn transform(&self) -> Transform {
        match self {
            Prior::Normal { .. } => Transform::Identity,
            Prior::LogNormal { .. } | Prior::HalfCauchy { .. } => Transform::Log,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Normal { sigma, .. } | Prior::LogNormal { sigma, .. } => sigma > 0.0,
            Prior::HalfCauchy { beta } => beta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("prior scale must be positive: {self:?}")))
        }
    }

    /// Log-density in the unconstrained coordinate `u` (Jacobian included)
    /// and its derivative.
    pub fn log_density(&self, u: f64) -> (f64, f64) {
        match *self {
            Prior::Normal { mu, sigma } | Prior::LogNormal { mu, sigma } => {
                // for the log-normal, the density of ln x is exactly this normal
                let z = (u - mu) / sigma;
                (-LN_SQRT_2PI - sigma.ln() - 0.5 * z * z, -z / sigma)
            }
            Prior::HalfCauchy { beta } => {
                let s = (u.exp() / beta).powi(2);
                let lp = std::f64::consts::LN_2 - (std::f64::consts::PI * beta).ln() - s.ln_1p() + u;
                (lp, 1.0 - 2.0 * s / (1.0 + s))
            }
        }
    }
}

/// One prior per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub priors: Vec<Prior>,
}

impl PriorSpec {
    pub fn new(priors: Vec<Prior>) -> Result<Self> {
        for p in &priors {
            p.validate()?;
        }
        Ok(Self { priors })
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn transforms(&self) -> Vec<Transform> {
        self.priors.iter().map(Prior::transform).collect()
    }
}

/// Sum of independent component log-densities; `grad` receives their
/// derivatives added in place.
pub fn log_prior(spec: &PriorSpec, u: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
    if u.len() != spec.len() {
        return Err(Error::Dimension {
            expected: spec.len(),
            actual: u.len(),
        });
    }
    let mut total = 0.0;
    match grad {
        Some(g) => {
            for ((p, &x), gi) in spec.priors.iter().zip(u).zip(g.iter_mut()) {
                let (lp, d) = p.log_density(x);
                total += lp;
                *gi += d;
            }
        }
        None => {
            for (p, &x) in spec.priors.iter().zip(u) {
                total += p.log_density(x).0;
            }
        }
    }
    Ok(total)
}

fn gaussian_sum(sse: f64, n: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("likelihood width must be positive, got {sigma}")));
    }
    Ok(-(n as f64) * (LN_SQRT_2PI + sigma.ln()) - sse / (2.0 * sigma * sigma))
}

/// `Σ [−ln(√(2π) σ) − (x̂ᵢ − xᵢ)² / (2σ²)]`.
pub fn log_lik_data(model: &[f64], data: &[f64], sigma: f64) -> Result<f64> {
    if model.len() != data.len() {
        return Err(Error::Dimension {
            expected: data.len(),
            actual: model.len(),
        });
    }
    let sse: f64 = model.iter().zip(data).map(|(m, d)| (m - d).powi(2)).sum();
    gaussian_sum(sse, data.len(), sigma)
}

/// Gaussian log-likelihood of residuals around zero.
pub fn log_lik_physics(residuals: &[f64], sigma_r: f64) -> Result<f64> {
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    gaussian_sum(sse, residuals.len(), sigma_r)
}

/// Normalising constant `−n ln(√(2π) σ)` of a Gaussian likelihood.
pub(crate) fn gaussian_norm(n: usize, sigma: f64) -> f64 {
    -(n as f64) * (LN_SQRT_2PI + sigma.ln())
}
