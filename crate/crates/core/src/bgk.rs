//! The homogeneous relaxation equation `∂f/∂t = M − f` with `M` the
//! standard normal density, its explicit solution, and distances between
//! simulated passive marginals and that solution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{
    ks_statistic, l1_distance, passive_histogram, passive_samples, DEFAULT_HIST_BINS,
    DEFAULT_HIST_HI, DEFAULT_HIST_LO,
};
use crate::quadrature::simpson;
use crate::sampler::{
    gaussian_cdf, gaussian_density, marginal_cdf_unchecked, marginal_density_unchecked,
};
use crate::simulator::EnsembleResult;

/// Mass checks integrate over `[-QUAD_HALF_WIDTH, QUAD_HALF_WIDTH]`.
pub const QUAD_HALF_WIDTH: f64 = 12.0;
pub const QUAD_PANELS: usize = 4800;

/// Initial one-particle density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDensity {
    /// Centered normal with standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// First-coordinate marginal of the uniform measure on `S^{m−1}(√m)`.
    ScaledSphereMarginal { m: usize },
}

impl InitialDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParams(format!("Gaussian sigma must be positive (got {sigma})")),
            ),
            Self::ScaledSphereMarginal { m } if m < 3 => Err(Error::InvalidParams(format!(
                "sphere marginal needs m >= 3 (got {m})"
            ))),
            _ => Ok(()),
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        match *self {
            Self::Gaussian { sigma } => gaussian_density(v / sigma) / sigma,
            Self::ScaledSphereMarginal { m } => marginal_density_unchecked(m, v),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        match *self {
            Self::Gaussian { sigma } => gaussian_cdf(v / sigma),
            Self::ScaledSphereMarginal { m } => marginal_cdf_unchecked(m, v),
        }
    }
}

/// `f(v, t) = e^{−t} f₀(v) + (1 − e^{−t}) M(v)`.
pub fn bgk_solution(f0: &InitialDensity, v: f64, t: f64) -> f64 {
    let w = (-t).exp();
    w * f0.density(v) + (1.0 - w) * gaussian_density(v)
}

/// Distribution function of [`bgk_solution`] at time `t`.
pub fn bgk_cdf(f0: &InitialDensity, v: f64, t: f64) -> f64 {
    let w = (-t).exp();
    w * f0.cdf(v) + (1.0 - w) * gaussian_cdf(v)
}

/// Mass of `f(·, t)` by composite Simpson on the standard window.
pub fn bgk_mass(f0: &InitialDensity, t: f64) -> f64 {
    simpson(
        |v| bgk_solution(f0, v, t),
        -QUAD_HALF_WIDTH,
        QUAD_HALF_WIDTH,
        QUAD_PANELS,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitDistance {
    pub t: f64,
    pub l1: f64,
    pub ks: f64,
}

/// L1 distance (default 120-bin histogram on `[−6, 6]`) and KS statistic
/// between the pooled passive coordinates at `t` and `f(·, t)`.
pub fn compare_to_limit(
    ensemble: &EnsembleResult,
    f0: &InitialDensity,
    t: f64,
) -> Result<LimitDistance> {
    f0.validate()?;
    let hist = passive_histogram(ensemble, t, DEFAULT_HIST_LO, DEFAULT_HIST_HI, DEFAULT_HIST_BINS)?;
    let l1 = l1_distance(&hist, |v| bgk_solution(f0, v, t));
    let samples = passive_samples(ensemble, t)?;
    let ks = ks_statistic(&samples, |v| bgk_cdf(f0, v, t))?;
    Ok(LimitDistance { t, l1, ks })
}

/// Active standard deviation for which a `TwoTemperature` draw with passive
/// deviation `sigma_passive` already has expected energy `N + M`, so that
/// the projection onto the sphere barely rescales it.
pub fn energy_matched_sigma_active(n_passive: usize, n_active: usize, sigma_passive: f64) -> Result<f64> {
    let n = n_passive as f64;
    let m = n_active as f64;
    let rest = n + m - sigma_passive * sigma_passive * n;
    if !(rest > 0.0) || n_active == 0 {
        return Err(Error::InvalidParams(format!(
            "passive deviation {sigma_passive} leaves no energy for the active species"
        )));
    }
    Ok((rest / m).sqrt())
}
