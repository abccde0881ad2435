//! Ensemble statistics: moment functionals with standard errors, pooled
//! passive histograms, distribution distances and the pair-correlation
//! diagnostic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::m4_tilde_from_tau;
use crate::quadrature::{composite_gauss, gauss_legendre};
use crate::simulator::EnsembleResult;

/// Default histogram window and resolution.
pub const DEFAULT_HIST_LO: f64 = -6.0;
pub const DEFAULT_HIST_HI: f64 = 6.0;
pub const DEFAULT_HIST_BINS: usize = 120;

/// A replica mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Sample mean and `std/√n` of `xs`; needs at least two values.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "standard error needs at least 2 samples (got {})",
                xs.len()
            )));
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Ok(Self {
            value: mean,
            stderr: (var / n).sqrt(),
        })
    }

    /// `|value − target| <= k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Ensemble moments at one sample time:
/// `η = E[τ−1]`, `ψ = E[(τ−1)²]`, `ζ = E[m₄(W) − m̃₄(V)]`, `ξ = E[m₄(V)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub t: f64,
    pub eta: Estimate,
    pub psi: Estimate,
    pub zeta: Estimate,
    pub xi: Estimate,
}

pub fn empirical_moments(ensemble: &EnsembleResult) -> Result<Vec<MomentRecord>> {
    if ensemble.replicas < 2 {
        return Err(Error::InsufficientData(format!(
            "moments need at least 2 replicas (got {})",
            ensemble.replicas
        )));
    }
    let m = ensemble.params.n_active;
    let r = ensemble.samples.len();
    let mut eta = vec![0.0; r];
    let mut psi = vec![0.0; r];
    let mut zeta = vec![0.0; r];
    let mut xi = vec![0.0; r];
    ensemble
        .schedule
        .sample_times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            for (rep, traj) in ensemble.samples.iter().enumerate() {
                let s = &traj[i];
                let x = s.tau - 1.0;
                eta[rep] = x;
                psi[rep] = x * x;
                zeta[rep] = s.m4_active - m4_tilde_from_tau(m, s.tau);
                xi[rep] = s.m4_passive;
            }
            Ok(MomentRecord {
                t,
                eta: Estimate::from_samples(&eta)?,
                psi: Estimate::from_samples(&psi)?,
                zeta: Estimate::from_samples(&zeta)?,
                xi: Estimate::from_samples(&xi)?,
            })
        })
        .collect()
}

/// Uniform-bin histogram on `[lo, hi)`; values outside are counted in
/// `below` / `above` and still contribute to `total`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
    pub counts: Vec<u64>,
    pub total: u64,
    pub below: u64,
    pub above: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParams("histogram needs at least one bin".into()));
        }
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "histogram range must satisfy lo < hi (got [{lo}, {hi}])"
            )));
        }
        Ok(Self {
            lo,
            hi,
            bins,
            counts: vec![0; bins],
            total: 0,
            below: 0,
            above: 0,
        })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edges(&self, bin: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + w * bin as f64, self.lo + w * (bin + 1) as f64)
    }

    pub fn add(&mut self, x: f64) {
        self.total += 1;
        if x < self.lo {
            self.below += 1;
            return;
        }
        let idx = ((x - self.lo) / self.width()).floor();
        if idx >= self.bins as f64 || x >= self.hi {
            self.above += 1;
        } else {
            self.counts[idx as usize] += 1;
        }
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        xs.into_iter().for_each(|x| self.add(x));
    }

    /// Fraction of the mass outside `[lo, hi)`.
    pub fn out_of_range_mass(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        (self.below + self.above) as f64 / self.total as f64
    }

    /// Number of bins with a nonzero count.
    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

fn snapshot_index(ensemble: &EnsembleResult, t: f64) -> Result<usize> {
    let i = ensemble.schedule.index_of(t).ok_or_else(|| {
        Error::InsufficientData(format!("t = {t} is not a scheduled sample time"))
    })?;
    if ensemble
        .samples
        .iter()
        .any(|traj| traj[i].v_snapshot.is_none())
    {
        return Err(Error::InsufficientData(format!(
            "passive snapshots were not recorded at t = {t}"
        )));
    }
    Ok(i)
}

/// All passive coordinates of all replicas at sample time `t`.
pub fn passive_samples(ensemble: &EnsembleResult, t: f64) -> Result<Vec<f64>> {
    let i = snapshot_index(ensemble, t)?;
    Ok(ensemble
        .samples
        .iter()
        .flat_map(|traj| traj[i].v_snapshot.as_deref().unwrap_or_default().iter().copied())
        .collect())
}

/// Histogram of the pooled passive coordinates at sample time `t`.
pub fn passive_histogram(
    ensemble: &EnsembleResult,
    t: f64,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<Histogram> {
    let i = snapshot_index(ensemble, t)?;
    let mut hist = Histogram::new(lo, hi, bins)?;
    for traj in &ensemble.samples {
        hist.extend(traj[i].v_snapshot.as_deref().unwrap_or_default().iter().copied());
    }
    Ok(hist)
}

/// Total-variation style distance between the empirical measure of `hist`
/// and a density:
/// `Σ_bins |count/total − ∫_bin f| + (empirical mass outside) + (∫ f outside)`.
///
/// The density's outer mass is integrated over `max(12, hi − lo)` beyond
/// each edge. Returns 0 for an empty histogram.
pub fn l1_distance<F: Fn(f64) -> f64>(hist: &Histogram, density: F) -> f64 {
    if hist.total == 0 {
        return 0.0;
    }
    let total = hist.total as f64;
    let inside: f64 = (0..hist.bins)
        .map(|b| {
            let (a, c) = hist.edges(b);
            let mass = gauss_legendre(&density, a, c);
            (hist.counts[b] as f64 / total - mass).abs()
        })
        .sum();
    let reach = (hist.hi - hist.lo).max(12.0);
    let pieces = 4 * hist.bins.max(16);
    let tail = composite_gauss(&density, hist.lo - reach, hist.lo, pieces)
        + composite_gauss(&density, hist.hi, hist.hi + reach, pieces);
    inside + hist.out_of_range_mass() + tail
}

/// Kolmogorov–Smirnov statistic `sup |F_n − F|` of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("ks_statistic needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Ensemble covariance of `v_i²` and `v_j²` for distinct passive indices,
/// averaged over all ordered pairs `i ≠ j` of each replica.
///
/// Per replica, the pair mean of `v_i² v_j²` is `(S² − Σ v⁴)/(N(N−1))` with
/// `S = |V|²`, and the single-coordinate mean is `S/N`; the covariance is
/// the replica average of the former minus the square of the replica
/// average of the latter. The standard error uses the delta method.
pub fn pair_energy_covariance(ensemble: &EnsembleResult, t: f64) -> Result<Estimate> {
    let i = snapshot_index(ensemble, t)?;
    let snaps: Vec<&[f64]> = ensemble
        .samples
        .iter()
        .map(|traj| traj[i].v_snapshot.as_deref().unwrap_or_default())
        .collect();
    pair_energy_covariance_of(&snaps)
}

/// [`pair_energy_covariance`] on explicit passive vectors, one per replica.
pub fn pair_energy_covariance_of(replicas: &[&[f64]]) -> Result<Estimate> {
    if replicas.len() < 2 {
        return Err(Error::InsufficientData(
            "pair covariance needs at least 2 replicas".into(),
        ));
    }
    let n = replicas[0].len();
    if n < 2 || replicas.iter().any(|v| v.len() != n) {
        return Err(Error::InsufficientData(
            "pair covariance needs N >= 2 coordinates in every replica".into(),
        ));
    }
    let nf = n as f64;
    let (pair_means, single_means): (Vec<f64>, Vec<f64>) = replicas
        .iter()
        .map(|v| {
            let s: f64 = v.iter().map(|x| x * x).sum();
            let q: f64 = v.iter().map(|x| (x * x) * (x * x)).sum();
            ((s * s - q) / (nf * (nf - 1.0)), s / nf)
        })
        .unzip();
    let r = replicas.len() as f64;
    let pair_bar = pair_means.iter().sum::<f64>() / r;
    let single_bar = single_means.iter().sum::<f64>() / r;
    let linearized: Vec<f64> = pair_means
        .iter()
        .zip(&single_means)
        .map(|(c, s)| c - 2.0 * single_bar * s)
        .collect();
    let spread = Estimate::from_samples(&linearized)?;
    Ok(Estimate {
        value: pair_bar - single_bar * single_bar,
        stderr: spread.stderr,
    })
}
