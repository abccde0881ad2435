//! Initial data on the state sphere and the analytic sphere densities
//! that serve as references for it.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erf;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::model::{sum_squares, ModelParams, SystemState};

/// Radius of the small active sphere used by `PassiveSpike` before projection.
pub const SPIKE_ACTIVE_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Uniform on the whole sphere `|V|² + |W|² = N + M`.
    UniformSphere,
    /// Independent Gaussians with separate passive/active standard
    /// deviations, jointly rescaled onto the sphere.
    TwoTemperature,
    /// All energy in the passive coordinates, split equally.
    PassiveSpike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub kind: InitKind,
    #[serde(default = "one")]
    pub sigma_passive: f64,
    #[serde(default = "one")]
    pub sigma_active: f64,
}

fn one() -> f64 {
    1.0
}

impl InitSpec {
    pub fn uniform() -> Self {
        Self {
            kind: InitKind::UniformSphere,
            sigma_passive: 1.0,
            sigma_active: 1.0,
        }
    }

    pub fn two_temperature(sigma_passive: f64, sigma_active: f64) -> Self {
        Self {
            kind: InitKind::TwoTemperature,
            sigma_passive,
            sigma_active,
        }
    }

    pub fn passive_spike() -> Self {
        Self {
            kind: InitKind::PassiveSpike,
            sigma_passive: 1.0,
            sigma_active: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == InitKind::TwoTemperature {
            for (name, s) in [
                ("sigma_passive", self.sigma_passive),
                ("sigma_active", self.sigma_active),
            ] {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "{name} must be positive and finite (got {s})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Natural log of the surface measure of `S^{n−1}(r)`.
pub fn log_sphere_area(n: usize, r: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("sphere dimension must be >= 1".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "sphere radius must be positive (got {r})"
        )));
    }
    let half = 0.5 * n as f64;
    Ok((n as f64 - 1.0) * r.ln() + 2f64.ln() + half * PI.ln() - ln_gamma(half))
}

/// Surface measure `r^{n−1} 2π^{n/2} / Γ(n/2)` of the sphere `S^{n−1}(r)` in `ℝⁿ`.
pub fn sphere_area(n: usize, r: f64) -> Result<f64> {
    log_sphere_area(n, r).map(f64::exp)
}

/// Uniform point on `S^{dim−1}(radius)`: normalized Gaussian vector.
pub fn sample_uniform_sphere<R: Rng + ?Sized>(
    dim: usize,
    radius: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::InvalidParams("sphere dimension must be >= 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "sphere radius must be positive (got {radius})"
        )));
    }
    loop {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = sum_squares(&x).sqrt();
        if norm > 0.0 {
            let scale = radius / norm;
            x.iter_mut().for_each(|a| *a *= scale);
            return Ok(x);
        }
    }
}

/// Draws an initial state on `|V|² + |W|² = N + M` from the given family.
pub fn sample_initial<R: Rng + ?Sized>(
    params: &ModelParams,
    spec: &InitSpec,
    rng: &mut R,
) -> Result<SystemState> {
    params.validate()?;
    spec.validate()?;
    let n = params.n_passive;
    let m = params.n_active;
    let radius = params.total_energy().sqrt();
    let mut x = match spec.kind {
        InitKind::UniformSphere => sample_uniform_sphere(n + m, radius, rng)?,
        InitKind::TwoTemperature => {
            let mut x = Vec::with_capacity(n + m);
            x.extend((0..n).map(|_| spec.sigma_passive * rng.sample::<f64, _>(StandardNormal)));
            x.extend((0..m).map(|_| spec.sigma_active * rng.sample::<f64, _>(StandardNormal)));
            x
        }
        InitKind::PassiveSpike => {
            let amp = (params.total_energy() / n as f64).sqrt();
            let mut x: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { amp } else { -amp })
                .collect();
            x.extend(sample_uniform_sphere(m, SPIKE_ACTIVE_RADIUS, rng)?);
            x
        }
    };
    let norm = sum_squares(&x).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let scale = radius / norm;
    x.iter_mut().for_each(|a| *a *= scale);
    let w = x.split_off(n);
    Ok(SystemState::new(x, w))
}

/// Density of the first coordinate of a uniform point on `S^{m−1}(√m)`:
/// `(1/√m)(|S^{m−2}|/|S^{m−1}|)(1 − x²/m)^{(m−3)/2}` inside `|x| < √m`.
pub fn marginal_density(m: usize, x: f64) -> Result<f64> {
    if m < 3 {
        return Err(Error::InvalidParams(format!(
            "sphere marginal needs m >= 3 (got {m})"
        )));
    }
    Ok(marginal_density_unchecked(m, x))
}

pub(crate) fn marginal_density_unchecked(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let u = 1.0 - x * x / mf;
    if u <= 0.0 {
        return 0.0;
    }
    // |S^{m−2}|/|S^{m−1}| for unit spheres = Γ(m/2) / (√π Γ((m−1)/2))
    let log_ratio = ln_gamma(0.5 * mf) - ln_gamma(0.5 * (mf - 1.0)) - 0.5 * PI.ln();
    (log_ratio - 0.5 * mf.ln() + 0.5 * (mf - 3.0) * u.ln()).exp()
}

/// Distribution function of [`marginal_density`]. Uses `x²/m ~ Beta(½, (m−1)/2)`.
pub fn marginal_cdf(m: usize, x: f64) -> Result<f64> {
    if m < 3 {
        return Err(Error::InvalidParams(format!(
            "sphere marginal needs m >= 3 (got {m})"
        )));
    }
    Ok(marginal_cdf_unchecked(m, x))
}

pub(crate) fn marginal_cdf_unchecked(m: usize, x: f64) -> f64 {
    let mf = m as f64;
    let u = x * x / mf;
    if u >= 1.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let half_mass = 0.5 * beta_reg(0.5, 0.5 * (mf - 1.0), u);
    if x >= 0.0 {
        0.5 + half_mass
    } else {
        0.5 - half_mass
    }
}

/// Standard normal density.
pub fn gaussian_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn gaussian_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}
