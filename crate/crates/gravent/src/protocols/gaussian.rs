//! Gaussian covariance-matrix simulator for the coupled-oscillator protocol.
//!
//! Two identical traps with an x1*x2 coupling stay Gaussian under the linear
//! dynamics, so the state is a 4x4 covariance matrix in the dimensionless
//! quadratures (x1, p1, x2, p2) with vacuum variance 1/2. Damping follows a
//! local diffusion model with stationary occupation k_B T_e / (hbar omega0),
//! adequate in the weak-damping regimes probed here (gamma << omega0).

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantities::PhysicalConstants;

/// Maximum dimensionless step size for the evolution contract.
pub const MAX_STEP: f64 = 0.1;

/// Detection threshold used by the coupling scan, chosen well above the
/// accumulated floating error of the integrator (<= 1e-8 per period).
pub const SCAN_THRESHOLD: f64 = 1e-6;

/// Two-mode Gaussian state: covariance in (x1, p1, x2, p2), vacuum = I/2.
#[derive(Debug, Clone)]
pub struct GaussianTwoMode {
    cov: Matrix4<f64>,
    mean: Vector4<f64>,
    t: f64,
}

/// Symplectic form for the (x1, p1, x2, p2) ordering.
fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

impl GaussianTwoMode {
    /// Wraps a covariance matrix after checking symmetry and the bona fide
    /// condition cov + (i/2) Omega >= 0.
    pub fn new(cov: Matrix4<f64>, mean: Vector4<f64>, t: f64) -> Result<Self> {
        for i in 0..4 {
            for j in 0..4 {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-9 {
                    return Err(Error::state(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        // Hermitian matrix cov + (i/2) Omega
        let omega = symplectic_form();
        let mut h = Matrix4::<Complex64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                h[(i, j)] = Complex64::new(cov[(i, j)], 0.5 * omega[(i, j)]);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(h);
        for ev in eig.eigenvalues.iter() {
            if *ev < -1e-9 {
                return Err(Error::state(format!(
                    "covariance violates the uncertainty relation: eigenvalue {ev:.3e}"
                )));
            }
        }
        Ok(GaussianTwoMode { cov, mean, t })
    }

    pub fn covariance(&self) -> &Matrix4<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &Vector4<f64> {
        &self.mean
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

/// Product of two identical squeezed thermal modes: x-variance
/// (2 nbar + 1) eta^2 / 2 and p-variance (2 nbar + 1) / (2 eta^2).
pub fn gaussian_init(nbar: f64, eta: f64) -> Result<GaussianTwoMode> {
    if !(nbar >= 0.0) {
        return Err(Error::domain(format!("gaussian_init: nbar must be >= 0, got {nbar}")));
    }
    if !(eta >= 1.0) {
        return Err(Error::domain(format!("gaussian_init: eta must be >= 1, got {eta}")));
    }
    let nu = (2.0 * nbar + 1.0) / 2.0;
    let cov = Matrix4::from_diagonal(&Vector4::new(
        nu * eta * eta,
        nu / (eta * eta),
        nu * eta * eta,
        nu / (eta * eta),
    ));
    GaussianTwoMode::new(cov, Vector4::zeros(), 0.0)
}

/// Drift matrix of H = (w0/2) sum (x_i^2 + p_i^2) + g x1 x2 with momentum
/// damping gamma on each mode.
fn drift(omega0: f64, g: f64, gamma: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, omega0, 0.0, 0.0, //
        -omega0, -gamma, -g, 0.0, //
        0.0, 0.0, 0.0, omega0, //
        -g, 0.0, -omega0, -gamma,
    )
}

/// One-step propagator pair (E, Q_d): cov -> E cov E^T + Q_d.
///
/// E is the exact exponential of the drift over dt; Q_d the exact
/// accumulated diffusion, obtained from the block-matrix exponential of
/// [[A, D], [0, -A^T]].
fn step_operators(omega0: f64, g: f64, gamma: f64, nth: f64, dt: f64) -> (Matrix4<f64>, Matrix4<f64>) {
    let a = drift(omega0, g, gamma);
    let e = (a * dt).exp();
    if gamma == 0.0 {
        return (e, Matrix4::zeros());
    }
    let d_coeff = gamma * (2.0 * nth + 1.0);
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            big[(i, j)] = a[(i, j)] * dt;
            big[(i + 4, j + 4)] = -a[(j, i)] * dt;
        }
    }
    big[(1, 5)] = d_coeff * dt;
    big[(3, 7)] = d_coeff * dt;
    let em = big.exp();
    let mut f12 = Matrix4::<f64>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            f12[(i, j)] = em[(i, j + 4)];
        }
    }
    let qd = f12 * e.transpose();
    // symmetrize against roundoff
    let qd = (qd + qd.transpose()) * 0.5;
    (e, qd)
}

/// Evolves the state for `steps` steps of length `dt` under the coupled
/// dynamics; `g` is the x1*x2 coupling rate in dimensionless-quadrature
/// units and `gamma` the momentum damping rate toward the thermal occupation
/// k_B T_e / (hbar omega0). Requires dt * omega0 <= 0.1. For gamma = 0 the
/// map is symplectic.
#[allow(clippy::too_many_arguments)]
pub fn gaussian_evolve(
    c: &PhysicalConstants,
    state: &GaussianTwoMode,
    omega0: f64,
    g: f64,
    gamma: f64,
    temp_env: f64,
    dt: f64,
    steps: usize,
) -> Result<GaussianTwoMode> {
    if !(omega0 > 0.0) {
        return Err(Error::domain(format!("gaussian_evolve: omega0 must be > 0, got {omega0}")));
    }
    if !(dt > 0.0) || dt * omega0 > MAX_STEP {
        return Err(Error::config(
            "simulate.dt",
            format!("step-size contract dt * omega0 <= {MAX_STEP} violated: {}", dt * omega0),
        ));
    }
    if !(gamma >= 0.0) || !(temp_env >= 0.0) {
        return Err(Error::domain(
            "gaussian_evolve: gamma and temp_env must be >= 0".to_string(),
        ));
    }
    let nth = c.k_b * temp_env / (c.hbar * omega0);
    let (e, qd) = step_operators(omega0, g, gamma, nth, dt);
    let mut cov = *state.covariance();
    let mut mean = *state.mean();
    for _ in 0..steps {
        cov = e * cov * e.transpose() + qd;
        mean = e * mean;
    }
    cov = (cov + cov.transpose()) * 0.5;
    GaussianTwoMode::new(cov, mean, state.time() + dt * steps as f64)
}

fn block(cov: &Matrix4<f64>, r: usize, c: usize) -> Matrix2<f64> {
    Matrix2::new(
        cov[(r, c)],
        cov[(r, c + 1)],
        cov[(r + 1, c)],
        cov[(r + 1, c + 1)],
    )
}

/// Symplectic eigenvalues (nu_minus, nu_plus) of a two-mode covariance
/// matrix; both equal 1/2 for pure states in this convention.
pub fn symplectic_eigenvalues(cov: &Matrix4<f64>) -> (f64, f64) {
    let a = block(cov, 0, 0).determinant();
    let b = block(cov, 2, 2).determinant();
    let cc = block(cov, 0, 2).determinant();
    let delta = a + b + 2.0 * cc;
    let det = cov.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let lo = ((delta - disc) / 2.0).max(0.0).sqrt();
    let hi = ((delta + disc) / 2.0).max(0.0).sqrt();
    (lo, hi)
}

/// Logarithmic negativity E_N = max(0, -log2(2 nu_minus_tilde)) from the
/// smallest symplectic eigenvalue of the partially transposed covariance.
pub fn log_negativity_gaussian(state: &GaussianTwoMode) -> Result<f64> {
    let cov = state.covariance();
    let a = block(cov, 0, 0).determinant();
    let b = block(cov, 2, 2).determinant();
    let cc = block(cov, 0, 2).determinant();
    // partial transposition flips the sign of det C
    let delta = a + b - 2.0 * cc;
    let det = cov.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let nu2 = ((delta - disc) / 2.0).max(f64::MIN_POSITIVE);
    let nu = nu2.sqrt();
    Ok((-(2.0 * nu).log2()).max(0.0))
}

/// Largest E_N reached within `periods` trap periods at coupling `g`,
/// gamma = 0, sampled every step of size 0.05 / omega0.
pub fn max_log_negativity(omega0: f64, g: f64, nbar: f64, eta: f64, periods: f64) -> Result<f64> {
    let dt = 0.05 / omega0;
    let steps = ((periods * 2.0 * std::f64::consts::PI / omega0) / dt).ceil() as usize;
    let (e, _) = step_operators(omega0, g, 0.0, 0.0, dt);
    let init = gaussian_init(nbar, eta)?;
    let mut cov = *init.covariance();
    let mut best: f64 = 0.0;
    for _ in 0..steps {
        cov = e * cov * e.transpose();
        let state = GaussianTwoMode {
            cov,
            mean: Vector4::zeros(),
            t: 0.0,
        };
        best = best.max(log_negativity_gaussian(&state)?);
    }
    Ok(best)
}

/// Smallest coupling g* in `g_range` whose maximum E_N over a ten-period
/// horizon exceeds the detection threshold, found by bisection in log g.
///
/// The bracket must straddle the threshold: the lower end must not entangle
/// and the upper end must.
pub fn oscillator_threshold_scan(
    omega0: f64,
    nbar: f64,
    eta: f64,
    g_range: (f64, f64),
) -> Result<f64> {
    let (mut lo, mut hi) = g_range;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::numerical(format!(
            "threshold scan needs 0 < g_lo < g_hi, got ({lo}, {hi})"
        )));
    }
    let entangles = |g: f64| -> Result<bool> {
        Ok(max_log_negativity(omega0, g, nbar, eta, 10.0)? > SCAN_THRESHOLD)
    };
    if entangles(lo)? {
        return Err(Error::numerical(format!(
            "bracket failure: g = {lo:.3e} at the lower end already entangles \
             (max E_N > {SCAN_THRESHOLD:.0e}); lower the bracket"
        )));
    }
    if !entangles(hi)? {
        return Err(Error::numerical(format!(
            "bracket failure: g = {hi:.3e} at the upper end never exceeds \
             E_N = {SCAN_THRESHOLD:.0e} within ten periods; raise the bracket"
        )));
    }
    for _ in 0..60 {
        if hi / lo <= 1.0 + 1e-4 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if entangles(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
