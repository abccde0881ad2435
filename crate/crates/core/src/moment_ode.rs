//! Exact finite-size moment dynamics.
//!
//! With `η = E[τ−1]`, `ψ = E[(τ−1)²]`, `ξ = E[m₄(V)]` and
//! `ζ = E[m₄(W) − m̃₄(V)]`, the generator closes on these moments:
//!
//! ```text
//! dη/dt = −ν η,                          ν = 1 + N/M
//! dΨ/dt = A Ψ + b₁ + b₂ η,               Ψ = (ψ, ξ, ζ)
//! ```
//!
//! The coefficients below are the exact finite-`(N, M)` ones, not their
//! large-`N/M` truncation. The solution is evaluated in closed form with
//! Sylvester's formula for `e^{tA}`; an adaptive Dormand–Prince integrator
//! covers near-degenerate spectra and serves as an independent cross-check.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use statrs::distribution::{Beta, Continuous, ContinuousCDF};

use crate::error::{Error, Result};
use crate::model::{spectral_gap, ModelParams};
use crate::quadrature::composite_gauss;
use crate::sampler::{InitKind, InitSpec, SPIKE_ACTIVE_RADIUS};

/// Relative eigenvalue separation below which the closed form is abandoned.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Relative tolerance of the fallback integrator.
pub const INTEGRATOR_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSystem {
    /// Rows and columns ordered `(ψ, ξ, ζ)`.
    pub a: [[f64; 3]; 3],
    pub b1: [f64; 3],
    pub b2: [f64; 3],
    /// Decay exponent of `η`, equal to `−ν`.
    pub ell0: f64,
    /// `λNΔ_M`.
    pub gap_rate: f64,
}

/// Moment values at one time, as produced by the deterministic solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub t: f64,
    pub eta: f64,
    pub psi: f64,
    pub xi: f64,
    pub zeta: f64,
}

/// Initial moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentInit {
    pub eta: f64,
    pub psi: f64,
    pub xi: f64,
    pub zeta: f64,
}

impl MomentInit {
    /// Exact moments of the uniform measure on the state sphere.
    pub fn stationary(n_passive: usize, n_active: usize) -> Self {
        let (psi, xi, zeta) = stationary_moments(n_passive, n_active);
        Self {
            eta: 0.0,
            psi,
            xi,
            zeta,
        }
    }
}

/// Exact expected moments of the initial law produced by
/// [`sample_initial`](crate::sampler::sample_initial).
///
/// In all three families the active direction is uniform and independent
/// of the active radius, which makes `ζ(0) = 0`. The rest depends only on
/// the active energy fraction `Z = |W|²/(N+M)`: for `TwoTemperature`,
/// `Z = sR/(1 − R + sR)` with `s = σ_a²/σ_p²` and `R ~ Beta(M/2, N/2)`,
/// and the expectations are one-dimensional integrals over `R`.
pub fn initial_moments(params: &ModelParams, spec: &InitSpec) -> Result<MomentInit> {
    params.validate()?;
    spec.validate()?;
    let n = params.n_passive as f64;
    let m = params.n_active as f64;
    let k = n + m;
    match spec.kind {
        InitKind::UniformSphere => Ok(MomentInit::stationary(params.n_passive, params.n_active)),
        InitKind::PassiveSpike => {
            let rho2 = SPIKE_ACTIVE_RADIUS * SPIKE_ACTIVE_RADIUS;
            let v2 = k / n * (k / (k + rho2));
            let tau = k * rho2 / ((k + rho2) * m);
            Ok(MomentInit {
                eta: tau - 1.0,
                psi: (tau - 1.0) * (tau - 1.0),
                xi: v2 * v2,
                zeta: 0.0,
            })
        }
        InitKind::TwoTemperature => {
            let s = (spec.sigma_active / spec.sigma_passive).powi(2);
            let beta = Beta::new(0.5 * m, 0.5 * n)
                .map_err(|e| Error::InvalidParams(format!("energy fraction law: {e}")))?;
            let lo = beta.inverse_cdf(1e-15).max(0.0);
            let hi = beta.inverse_cdf(1.0 - 1e-15).min(1.0);
            let z = |r: f64| s * r / (1.0 - r + s * r);
            let expect = |g: &dyn Fn(f64) -> f64| {
                composite_gauss(&|r: f64| g(z(r)) * beta.pdf(r), lo, hi, 400)
            };
            let mass = expect(&|_| 1.0);
            let eta = expect(&|z| k * z / m - 1.0) / mass;
            let psi = expect(&|z| (k * z / m - 1.0).powi(2)) / mass;
            let q = expect(&|z| (1.0 - z) * (1.0 - z)) / mass;
            Ok(MomentInit {
                eta,
                psi,
                xi: 3.0 * k * k / (n * (n + 2.0)) * q,
                zeta: 0.0,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Closed form when the spectrum is well separated, integrator otherwise.
    Auto,
    ClosedForm,
    Integrator,
}

/// `η(t) = η(0) e^{−(1 + N/M) t}`.
pub fn eta_closed_form(eta0: f64, params: &ModelParams, t: f64) -> f64 {
    eta0 * (-params.nu() * t).exp()
}

/// Exact coefficients of the `(ψ, ξ, ζ)` system.
pub fn moment_matrix(params: &ModelParams) -> Result<MomentSystem> {
    let m = params.n_active;
    let gap = spectral_gap(m)?;
    let n = params.n_passive as f64;
    let m = m as f64;
    let nu = 1.0 + n / m;
    let mp2 = m + 2.0;
    let gap_rate = params.lambda * n * gap;

    let a = [
        [
            -2.0 * (nu - 1.0 / m) + 3.0 * n / (m * mp2),
            n / (m * m),
            n / (m * m),
        ],
        [3.0 * m / mp2, -1.0, 1.0],
        [
            3.0 * (n + 2.0 * m + 4.0) * (m - 1.0) / (mp2 * mp2),
            n * (m - 1.0) / (m * mp2),
            -(gap_rate + n * (m + 5.0) / (m * mp2)),
        ],
    ];
    let b1 = [
        3.0 * n / (m * mp2) - 2.0 * n / (m * m),
        3.0 * m / mp2,
        3.0 * n * (4.0 - 3.0 * m - m * m) / (m * mp2 * mp2),
    ];
    let b2 = [
        -(2.0 * n / (m * m) - 2.0 / m) + 6.0 * n / (m * mp2),
        6.0 * m / mp2,
        -6.0 * (m - 1.0) * (2.0 * n - m * m - 2.0 * m) / (m * mp2 * mp2),
    ];
    Ok(MomentSystem {
        a,
        b1,
        b2,
        ell0: -nu,
        gap_rate,
    })
}

/// `(ψ*, ξ*, ζ*)` for the uniform measure on `S^{N+M−1}(√(N+M))`.
pub fn stationary_moments(n_passive: usize, n_active: usize) -> (f64, f64, f64) {
    let n = n_passive as f64;
    let m = n_active as f64;
    (
        2.0 * n / (m * (n + m + 2.0)),
        3.0 * (n + m) / (n + m + 2.0),
        0.0,
    )
}

/// Largest relative residual of `A Ψ* + b₁` over the three rows, where `Ψ*`
/// holds the exact uniform-sphere moments. Each row is scaled by the sum of
/// the absolute values of its terms.
pub fn fixed_point_residual(sys: &MomentSystem, n_passive: usize, n_active: usize) -> f64 {
    let (p, x, z) = stationary_moments(n_passive, n_active);
    let star = [p, x, z];
    (0..3)
        .map(|i| {
            let terms = (0..3).map(|j| sys.a[i][j] * star[j]).chain([sys.b1[i]]);
            let (sum, scale) = terms.fold((0.0, 0.0), |(s, a), t| (s + t, a + t.abs()));
            sum.abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Leading-order eigenvalues `(−2N/M, −λNΔ_M, −1)`.
pub fn asymptotic_eigenvalues(params: &ModelParams) -> Result<[f64; 3]> {
    let gap = spectral_gap(params.n_active)?;
    let n = params.n_passive as f64;
    Ok([-2.0 * n / params.n_active as f64, -params.lambda * n * gap, -1.0])
}

impl MomentSystem {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.a[i][j])
    }

    /// Right-hand side at `(Ψ, η)`.
    pub fn rhs(&self, psi: &Vector3<f64>, eta: f64) -> Vector3<f64> {
        self.matrix() * psi + Vector3::from(self.b1) + Vector3::from(self.b2) * eta
    }

    /// Eigenvalues of `A`, ordered by increasing real part.
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        let ev = self.matrix().complex_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }

    /// True when two eigenvalues, or an eigenvalue and `ell0`, are closer
    /// than [`DEGENERACY_TOL`] relative to their size.
    pub fn is_degenerate(&self) -> bool {
        let ev = self.eigenvalues();
        let close = |a: Complex64, b: Complex64| {
            (a - b).norm() <= DEGENERACY_TOL * a.norm().max(b.norm())
        };
        let ell0 = Complex64::new(self.ell0, 0.0);
        (0..3).any(|i| close(ev[i], ell0) || ((i + 1)..3).any(|j| close(ev[i], ev[j])))
    }
}

/// Solves `dΨ/dt = AΨ + b₁ + b₂ η(t)`, `η(t) = η₀ e^{ell0 t}`, on `t_grid`.
pub fn solve_moment_system(
    sys: &MomentSystem,
    init: &MomentInit,
    t_grid: &[f64],
) -> Result<Vec<MomentPoint>> {
    solve_with(sys, init, t_grid, SolveMethod::Auto)
}

pub fn solve_with(
    sys: &MomentSystem,
    init: &MomentInit,
    t_grid: &[f64],
    method: SolveMethod,
) -> Result<Vec<MomentPoint>> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidSchedule(
            "time grid must be finite and nonnegative".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidSchedule("time grid must be sorted".into()));
    }
    let use_closed = match method {
        SolveMethod::ClosedForm => true,
        SolveMethod::Integrator => false,
        SolveMethod::Auto => !sys.is_degenerate(),
    };
    let mut points = match use_closed.then(|| ClosedForm::new(sys, init)).flatten() {
        Some(sol) => t_grid.iter().map(|&t| sol.at(t)).collect(),
        None => integrate(sys, init, t_grid),
    };
    // the closed form reassembles Ψ₀ from its modes; report t = 0 exactly
    for p in points.iter_mut().filter(|p| p.t == 0.0) {
        *p = MomentPoint {
            t: 0.0,
            eta: init.eta,
            psi: init.psi,
            xi: init.xi,
            zeta: init.zeta,
        };
    }
    Ok(points)
}

/// `Ψ(t) = Ψ_c + η₀ e^{ℓ₀t} q + Σ_j e^{ℓ_j t} A_j (Ψ₀ − Ψ_c − η₀ q)` with
/// `Ψ_c = −A⁻¹b₁`, `q = −(A − ℓ₀I)⁻¹ b₂` and `A_j` the Sylvester projectors
/// `Π_{k≠j} (A − ℓ_k I)/(ℓ_j − ℓ_k)`.
struct ClosedForm {
    eta0: f64,
    ell0: f64,
    constant: Vector3<f64>,
    forced: Vector3<f64>,
    ells: [Complex64; 3],
    modes: [Vector3<Complex64>; 3],
}

impl ClosedForm {
    fn new(sys: &MomentSystem, init: &MomentInit) -> Option<Self> {
        let a = sys.matrix();
        let constant = -(a.lu().solve(&Vector3::from(sys.b1))?);
        let shifted = a - Matrix3::identity() * sys.ell0;
        let forced = -(shifted.lu().solve(&Vector3::from(sys.b2))?);
        let start = Vector3::new(init.psi, init.xi, init.zeta) - constant - forced * init.eta;

        let ells = sys.eigenvalues();
        let ac: Matrix3<Complex64> = a.map(|x| Complex64::new(x, 0.0));
        let start_c: Vector3<Complex64> = start.map(|x| Complex64::new(x, 0.0));
        let id = Matrix3::<Complex64>::identity();
        let mut modes = [Vector3::zeros(); 3];
        for j in 0..3 {
            let mut v = start_c;
            for k in (0..3).filter(|&k| k != j) {
                let denom = ells[j] - ells[k];
                if denom.norm() == 0.0 {
                    return None;
                }
                v = (ac - id * ells[k]) * v / denom;
            }
            modes[j] = v;
        }
        Some(Self {
            eta0: init.eta,
            ell0: sys.ell0,
            constant,
            forced,
            ells,
            modes,
        })
    }

    fn at(&self, t: f64) -> MomentPoint {
        let eta = self.eta0 * (self.ell0 * t).exp();
        let mut transient = Vector3::<Complex64>::zeros();
        for (ell, mode) in self.ells.iter().zip(&self.modes) {
            transient += mode * (ell * t).exp();
        }
        let psi = self.constant + self.forced * eta + transient.map(|z| z.re);
        MomentPoint {
            t,
            eta,
            psi: psi[0],
            xi: psi[1],
            zeta: psi[2],
        }
    }
}

// Dormand–Prince 5(4) tableau (the system is autonomous, so the nodes are not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince on the augmented state `(ψ, ξ, ζ, η)`.
fn integrate(sys: &MomentSystem, init: &MomentInit, t_grid: &[f64]) -> Vec<MomentPoint> {
    let mut g = Matrix4::<f64>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            g[(i, j)] = sys.a[i][j];
        }
        g[(i, 3)] = sys.b2[i];
    }
    g[(3, 3)] = sys.ell0;
    let b = Vector4::new(sys.b1[0], sys.b1[1], sys.b1[2], 0.0);
    let f = |y: &Vector4<f64>| g * y + b;

    let rtol = INTEGRATOR_RTOL;
    let atol = 1e-14;
    let stiff = g.abs().row_sum().max();
    let mut h = (0.01 / stiff.max(1e-12)).min(1e-3);

    let mut t = 0.0;
    let mut y = Vector4::new(init.psi, init.xi, init.zeta, init.eta);
    let mut k1 = f(&y);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while t < target {
            let step = h.min(target - t);
            let mut k = [Vector4::zeros(); 7];
            k[0] = k1;
            for s in 1..7 {
                let mut yi = y;
                for (r, kr) in k.iter().enumerate().take(s) {
                    yi += kr * (A[s][r] * step);
                }
                k[s] = f(&yi);
            }
            let mut y5 = y;
            let mut y4 = y;
            for s in 0..7 {
                y5 += k[s] * (B5[s] * step);
                y4 += k[s] * (B4[s] * step);
            }
            let err = (0..4)
                .map(|i| {
                    let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                    ((y5[i] - y4[i]) / sc).powi(2)
                })
                .sum::<f64>()
                / 4.0;
            let err = err.sqrt();
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                y = y5;
                k1 = k[6];
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a step clipped to hit the grid says nothing about the next one
            if err > 1.0 || step == h {
                h = step * factor;
            }
        }
        out.push(MomentPoint {
            t: target,
            eta: y[3],
            psi: y[0],
            xi: y[1],
            zeta: y[2],
        });
    }
    out
}
