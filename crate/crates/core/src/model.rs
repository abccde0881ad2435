//! Domain types of the two-species particle system and the functionals
//! evaluated on its states.
//!
//! A state is a point `(V, W)` on the sphere `|V|² + |W|² = N + M`, where
//! `V` holds the `N` passive velocities and `W` the `M` active ones. Two
//! jumps act on it: a Kac rotation of an active pair, and an exchange of
//! one passive with one active coordinate. Both conserve `|V|² + |W|²`.
//!
//! Indices are 0-based throughout the public API.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sizes, Kac intensity and master seed of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_passive: usize,
    pub n_active: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl ModelParams {
    /// Builds and validates a parameter set.
    pub fn new(n_passive: usize, n_active: usize, lambda: f64, seed: u64) -> Result<Self> {
        let params = Self {
            n_passive,
            n_active,
            lambda,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_active < 2 {
            return Err(Error::InvalidParams(format!(
                "n_active must be at least 2 (got {})",
                self.n_active
            )));
        }
        if self.n_passive <= self.n_active {
            return Err(Error::InvalidParams(format!(
                "n_passive must exceed n_active (got N = {}, M = {})",
                self.n_passive, self.n_active
            )));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive and finite (got {})",
                self.lambda
            )));
        }
        Ok(())
    }

    /// `N + M`, the squared radius of the state sphere.
    pub fn total_energy(&self) -> f64 {
        (self.n_passive + self.n_active) as f64
    }

    /// `ν = 1 + N/M`, the relaxation rate of the active temperature.
    pub fn nu(&self) -> f64 {
        1.0 + self.n_passive as f64 / self.n_active as f64
    }

    /// Total rate of Kac rotations, `λNM`.
    pub fn kac_rate(&self) -> f64 {
        self.lambda * self.n_passive as f64 * self.n_active as f64
    }

    /// Total rate of exchange jumps, `N` (one per passive particle).
    pub fn exchange_rate(&self) -> f64 {
        self.n_passive as f64
    }

    /// Decay rate `λNΔ_M` of the Kac eigenfunction under the pure Kac walk.
    pub fn gap_rate(&self) -> f64 {
        self.lambda * self.n_passive as f64 * gap_value(self.n_active)
    }
}

/// Passive and active velocities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    KacRotation,
    Exchange,
}

/// One jump of the process.
///
/// For `KacRotation`, `j < k` index the active pair and `theta` is the
/// rotation angle. For `Exchange`, `j` indexes the passive coordinate and
/// `k` the active one; `theta` is unused and set to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub dt: f64,
    pub kind: EventKind,
    pub j: usize,
    pub k: usize,
    pub theta: f64,
}

impl SystemState {
    pub fn new(v: Vec<f64>, w: Vec<f64>) -> Self {
        Self { v, w }
    }

    pub fn n_passive(&self) -> usize {
        self.v.len()
    }

    pub fn n_active(&self) -> usize {
        self.w.len()
    }

    pub fn passive_energy(&self) -> f64 {
        sum_squares(&self.v)
    }

    pub fn active_energy(&self) -> f64 {
        sum_squares(&self.w)
    }

    /// Rotates the active pair `(w_j, w_k)` by `theta` in place.
    pub fn rotate_pair(&mut self, j: usize, k: usize, theta: f64) -> Result<()> {
        let m = self.w.len();
        if k >= m {
            return Err(Error::IndexOutOfRange {
                what: "k",
                index: k,
                bound: m,
            });
        }
        if j >= k {
            return Err(Error::BadPair { j, k });
        }
        self.rotate_pair_unchecked(j, k, theta);
        Ok(())
    }

    #[inline]
    pub(crate) fn rotate_pair_unchecked(&mut self, j: usize, k: usize, theta: f64) {
        let (s, c) = theta.sin_cos();
        let (a, b) = (self.w[j], self.w[k]);
        self.w[j] = a * c - b * s;
        self.w[k] = a * s + b * c;
    }

    /// Swaps `v_j` and `w_k` in place.
    pub fn swap_species(&mut self, j: usize, k: usize) -> Result<()> {
        if j >= self.v.len() {
            return Err(Error::IndexOutOfRange {
                what: "j",
                index: j,
                bound: self.v.len(),
            });
        }
        if k >= self.w.len() {
            return Err(Error::IndexOutOfRange {
                what: "k",
                index: k,
                bound: self.w.len(),
            });
        }
        self.swap_species_unchecked(j, k);
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_species_unchecked(&mut self, j: usize, k: usize) {
        std::mem::swap(&mut self.v[j], &mut self.w[k]);
    }
}

#[inline]
pub(crate) fn sum_squares(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum()
}

/// `|v|² + |w|²`.
pub fn total_energy(state: &SystemState) -> f64 {
    state.passive_energy() + state.active_energy()
}

/// Returns the state with `(w_j, w_k)` rotated by `theta`.
pub fn kac_rotation(state: &SystemState, j: usize, k: usize, theta: f64) -> Result<SystemState> {
    let mut out = state.clone();
    out.rotate_pair(j, k, theta)?;
    Ok(out)
}

/// Returns the state with `v_j` and `w_k` swapped.
pub fn exchange(state: &SystemState, j: usize, k: usize) -> Result<SystemState> {
    let mut out = state.clone();
    out.swap_species(j, k)?;
    Ok(out)
}

/// Mean energy per active particle implied by the sphere constraint,
/// `(N + M − |V|²)/M`.
pub fn tau(state: &SystemState) -> f64 {
    tau_from_passive(state.passive_energy(), state.n_passive(), state.n_active())
}

#[inline]
pub(crate) fn tau_from_passive(passive_energy: f64, n: usize, m: usize) -> f64 {
    ((n + m) as f64 - passive_energy) / m as f64
}

/// Mean of fourth powers.
pub fn fourth_moment(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty("fourth_moment needs at least one value"));
    }
    Ok(fourth_moment_unchecked(x))
}

#[inline]
pub(crate) fn fourth_moment_unchecked(x: &[f64]) -> f64 {
    x.iter().map(|a| (a * a) * (a * a)).sum::<f64>() / x.len() as f64
}

/// Sphere average of `m₄(W)` given `τ`: `3M/(M+2) · τ²`.
#[inline]
pub fn m4_tilde_from_tau(m: usize, tau: f64) -> f64 {
    let m = m as f64;
    3.0 * m / (m + 2.0) * tau * tau
}

/// Average of `m₄(W)` over the active sphere selected by `V`.
pub fn m4_tilde(state: &SystemState) -> f64 {
    m4_tilde_from_tau(state.n_active(), tau(state))
}

/// The degree-4 eigenfunction of the Kac generator,
/// `Σ_j w_j⁴ − 3|W|⁴/(M + 2)`.
///
/// On the state sphere this equals `M · (m₄(W) − m̃₄(V))`.
pub fn kac_eigenfunction(state: &SystemState) -> f64 {
    kac_eigenfunction_of(&state.w)
}

pub(crate) fn kac_eigenfunction_of(w: &[f64]) -> f64 {
    let m = w.len() as f64;
    let r2 = sum_squares(w);
    let sum4: f64 = w.iter().map(|a| (a * a) * (a * a)).sum();
    sum4 - 3.0 * r2 * r2 / (m + 2.0)
}

/// Spectral gap `Δ_m = (m + 2) / (2(m − 1))` of the normalized Kac generator.
pub fn spectral_gap(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParams(format!(
            "spectral gap needs m >= 2 (got {m})"
        )));
    }
    Ok(gap_value(m))
}

#[inline]
fn gap_value(m: usize) -> f64 {
    let m = m as f64;
    (m + 2.0) / (2.0 * (m - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn state(v: &[f64], w: &[f64]) -> SystemState {
        SystemState::new(v.to_vec(), w.to_vec())
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(3, 2, 1.0, 0).is_ok());
        assert!(ModelParams::new(3, 1, 1.0, 0).is_err());
        assert!(ModelParams::new(2, 2, 1.0, 0).is_err());
        assert!(ModelParams::new(1, 5, 1.0, 0).is_err());
        assert!(ModelParams::new(3, 2, 0.0, 0).is_err());
        assert!(ModelParams::new(3, 2, f64::NAN, 0).is_err());
    }

    #[test]
    fn total_energy_examples() {
        assert_eq!(total_energy(&state(&[1.0, 1.0, 1.0], &[1.0, 1.0])), 5.0);
        let s = state(&[5f64.sqrt(), 0.0, 0.0], &[0.0, 0.0]);
        assert!((total_energy(&s) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_examples() {
        let s = state(&[0.3, -0.2], &[1.0, 0.0, 2.5]);
        assert_eq!(kac_rotation(&s, 0, 1, 0.0).unwrap(), s);

        let r = kac_rotation(&s, 0, 1, FRAC_PI_2).unwrap();
        assert!(r.w[0].abs() < 1e-15);
        assert!((r.w[1] - 1.0).abs() < 1e-15);
        assert_eq!(r.w[2].to_bits(), s.w[2].to_bits());
        assert_eq!(r.v, s.v);

        let s = state(&[0.0], &[3.0, 4.0]);
        for theta in [0.1, 1.0, 2.0, PI, 5.9] {
            let r = kac_rotation(&s, 0, 1, theta).unwrap();
            assert!((r.w[0].powi(2) + r.w[1].powi(2) - 25.0).abs() / 25.0 < 1e-12);
        }
    }

    #[test]
    fn rotation_rejects_bad_indices() {
        let s = state(&[0.0], &[1.0, 2.0, 3.0]);
        assert!(matches!(kac_rotation(&s, 1, 1, 0.3), Err(Error::BadPair { .. })));
        assert!(matches!(kac_rotation(&s, 2, 1, 0.3), Err(Error::BadPair { .. })));
        assert!(matches!(
            kac_rotation(&s, 0, 3, 0.3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn exchange_examples() {
        let s = state(&[1.0, 2.0], &[3.0, 4.0, 5.0]);
        let e = exchange(&s, 1, 0).unwrap();
        assert_eq!(e, state(&[1.0, 3.0], &[2.0, 4.0, 5.0]));
        assert_eq!(exchange(&e, 1, 0).unwrap(), s);
        assert_eq!(total_energy(&e), total_energy(&s));
        assert!(exchange(&s, 2, 0).is_err());
        assert!(exchange(&s, 0, 3).is_err());
    }

    #[test]
    fn tau_examples() {
        // |v|² = N
        let s = state(&[1.0, 1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(tau(&s), 1.0);
        let s = state(&[0.0, 0.0, 0.0], &[5f64.sqrt(), 0.0]);
        assert_eq!(tau(&s), 2.5);
        // N=100, M=10, |v|² = 90
        let mut v = vec![0.0; 100];
        v[0] = 90f64.sqrt();
        let s = SystemState::new(v, vec![2f64.sqrt(); 10]);
        assert!((tau(&s) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_examples() {
        assert_eq!(fourth_moment(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(fourth_moment(&[0.0, 2.0]).unwrap(), 8.0);
        assert_eq!(fourth_moment(&[1.0, -1.0, 2.0]).unwrap(), 6.0);
        assert!(fourth_moment(&[]).is_err());
    }

    #[test]
    fn m4_tilde_examples() {
        assert!((m4_tilde_from_tau(2, 1.0) - 1.5).abs() < 1e-15);
        assert!((m4_tilde_from_tau(10, 2.0) - 10.0).abs() < 1e-12);
        assert!((m4_tilde_from_tau(1_000_000_000, 1.0) - 3.0).abs() < 1e-8);
        // via a state: N=3, M=2 with |W|² = 2
        let s = state(&[1.0, 1.0, 1.0], &[1.0, 1.0]);
        assert!((m4_tilde(&s) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn eigenfunction_examples() {
        let s = state(&[1.0, 1.0, 1.0], &[2f64.sqrt(), 0.0]);
        assert!((kac_eigenfunction(&s) - 1.0).abs() < 1e-14);

        let w = [0.3, -1.2, 0.7, 2.0];
        let c: f64 = 1.7;
        let scaled: Vec<f64> = w.iter().map(|x| c * x).collect();
        let ratio = kac_eigenfunction_of(&scaled) / kac_eigenfunction_of(&w);
        assert!((ratio - c.powi(4)).abs() < 1e-12);

        // agrees with M · (m4(W) − m̃4(V)) on the sphere
        let s = state(&[1.2, -0.4, 0.9, 0.1], &[1.1, -0.3, 0.9]);
        let n_plus_m = total_energy(&s);
        let scale = (7.0 / n_plus_m).sqrt();
        let s = state(
            &s.v.iter().map(|x| x * scale).collect::<Vec<_>>(),
            &s.w.iter().map(|x| x * scale).collect::<Vec<_>>(),
        );
        let alt = 3.0 * (fourth_moment(&s.w).unwrap() - m4_tilde(&s));
        assert!((kac_eigenfunction(&s) - alt).abs() < 1e-12);
    }

    #[test]
    fn spectral_gap_examples() {
        assert_eq!(spectral_gap(2).unwrap(), 2.0);
        assert_eq!(spectral_gap(4).unwrap(), 1.0);
        assert!((spectral_gap(1_000_000).unwrap() - 0.5).abs() < 1e-5);
        assert!(spectral_gap(1).is_err());
        assert!(spectral_gap(0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rotation_preserves_pair_energy_and_inverts(
                a in -10.0f64..10.0, b in -10.0f64..10.0, theta in 0.0f64..(2.0 * PI)
            ) {
                let s = state(&[0.5], &[a, b, 0.25]);
                let r = kac_rotation(&s, 0, 1, theta).unwrap();
                let e0 = a * a + b * b;
                let e1 = r.w[0] * r.w[0] + r.w[1] * r.w[1];
                prop_assert!((e1 - e0).abs() <= 1e-12 * e0.max(1e-300));
                let back = kac_rotation(&r, 0, 1, -theta).unwrap();
                prop_assert!((back.w[0] - a).abs() <= 1e-12 * (1.0 + e0.sqrt()));
                prop_assert!((back.w[1] - b).abs() <= 1e-12 * (1.0 + e0.sqrt()));
                prop_assert_eq!(r.w[2].to_bits(), s.w[2].to_bits());
                prop_assert_eq!(r.v[0].to_bits(), s.v[0].to_bits());
            }

            #[test]
            fn exchange_is_involution(
                v in proptest::collection::vec(-5.0f64..5.0, 3..8),
                w in proptest::collection::vec(-5.0f64..5.0, 2..3),
                j in 0usize..3, k in 0usize..2,
            ) {
                let s = SystemState::new(v, w);
                let e = exchange(&s, j, k).unwrap();
                let mut before: Vec<u64> = s.v.iter().chain(&s.w).map(|x| x.to_bits()).collect();
                let mut after: Vec<u64> = e.v.iter().chain(&e.w).map(|x| x.to_bits()).collect();
                before.sort_unstable();
                after.sort_unstable();
                prop_assert_eq!(before, after);
                prop_assert_eq!(exchange(&e, j, k).unwrap(), s);
            }

            #[test]
            fn tau_matches_active_energy_on_sphere(
                raw in proptest::collection::vec(-3.0f64..3.0, 12),
            ) {
                let norm = sum_squares(&raw).sqrt();
                prop_assume!(norm > 1e-3);
                let scale = 12f64.sqrt() / norm;
                let x: Vec<f64> = raw.iter().map(|a| a * scale).collect();
                let s = SystemState::new(x[..8].to_vec(), x[8..].to_vec());
                prop_assert!((tau(&s) - s.active_energy() / 4.0).abs() < 1e-12);
            }

            #[test]
            fn gap_is_at_least_half(m in 2usize..100_000) {
                prop_assert!(spectral_gap(m).unwrap() > 0.5);
            }
        }
    }
}
