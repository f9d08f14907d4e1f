//! Direct integration of the full time-dependent equations of motion.
//!
//! The state is `(x₁, ẋ₁, x₃, ẋ₃)`; velocities stand in for momenta, the same
//! convention the closed-form solutions use. The system is linear, so the
//! integrator advances the whole 4×4 fundamental matrix at once.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

use nalgebra::{Matrix4, SymmetricEigen};
use rayon::prelude::*;

use crate::cavity::{Mode, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::slowamp::FundamentalMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta.
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Step in fast time. Segments are split into equal steps no larger than this.
    pub dt: f64,
    /// Amplitude of the `cos(2ω̄t)` modulation of the upper-mode frequency.
    pub epsilon_tilde: f64,
    pub method: Method,
}

impl OracleOptions {
    /// 200 steps per period of the upper mode, `ε̃ = ε`.
    pub fn for_params(params: &ModelParams) -> Self {
        Self {
            dt: 2.0 * PI / (3.0 * params.omega_bar() * 200.0),
            epsilon_tilde: params.epsilon(),
            method: Method::Rk4,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_epsilon_tilde(mut self, epsilon_tilde: f64) -> Self {
        self.epsilon_tilde = epsilon_tilde;
        self
    }

    /// Largest admissible step: 100 steps per period `2π/(3ω̄)`.
    pub fn max_dt(params: &ModelParams) -> f64 {
        2.0 * PI / (3.0 * params.omega_bar() * 100.0)
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be finite and > 0, got {}", self.dt)));
        }
        let max = Self::max_dt(params);
        if self.dt > max {
            return Err(Error::StepSize { dt: self.dt, max });
        }
        if !(self.epsilon_tilde >= 0.0) || !self.epsilon_tilde.is_finite() {
            return Err(invalid(
                "epsilon_tilde",
                format!("must be finite and >= 0, got {}", self.epsilon_tilde),
            ));
        }
        Ok(())
    }
}

/// Coefficient matrix `F(t)` of `u̇ = F(t) u`. Traceless, so the exact flow
/// preserves phase-space volume.
fn coefficients(t: f64, params: &ModelParams, opts: &OracleOptions) -> Matrix4<f64> {
    let eps = params.epsilon();
    let (s, c) = (2.0 * params.omega_bar() * t).sin_cos();
    let g = 24.0 * params.mu() * eps;
    let w3 = 9.0 + 6.0 * params.big_delta() + opts.epsilon_tilde * c;
    #[rustfmt::skip]
    let f = Matrix4::new(
        0.0,                      1.0,    0.0,   0.0,
        -(1.0 + 4.0 * eps * c),   0.0,    g * c, g * s,
        0.0,                      0.0,    0.0,   1.0,
        -g * c,                   -g * s, -w3,   0.0,
    );
    f
}

/// Time derivative of `(x₁, ẋ₁, x₃, ẋ₃)`.
pub fn rhs(t: f64, state: &[f64; 4], params: &ModelParams, opts: &OracleOptions) -> [f64; 4] {
    let f = coefficients(t, params, opts);
    let d = f * nalgebra::Vector4::from_column_slice(state);
    [d[0], d[1], d[2], d[3]]
}

/// Advances `m` from `t0` to `t1` under `ṁ = F(t) m` with equal RK4 steps
/// no longer than `dt`.
fn rk4_segment<F>(m: &mut Matrix4<f64>, t0: f64, t1: f64, dt: f64, coeff: F)
where
    F: Fn(f64) -> Matrix4<f64>,
{
    let span = t1 - t0;
    if span <= 0.0 {
        return;
    }
    let n = (span / dt).ceil().max(1.0) as usize;
    let h = span / n as f64;
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let f0 = coeff(t);
        let fh = coeff(t + 0.5 * h);
        let f1 = coeff(t + h);
        let k1 = f0 * *m;
        let k2 = fh * (*m + k1 * (0.5 * h));
        let k3 = fh * (*m + k2 * (0.5 * h));
        let k4 = f1 * (*m + k3 * h);
        *m += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
}

/// Fundamental matrix at fast time `t_end`: column `j` is the solution
/// started from the `j`-th basis vector of `(x₁, p₁, x₃, p₃)`.
pub fn oracle_fundamental_matrix(
    t_end: f64,
    params: &ModelParams,
    opts: &OracleOptions,
) -> Result<FundamentalMatrix> {
    Ok(oracle_trajectory(&[t_end], params, opts)?.remove(0))
}

/// Fundamental matrices at each of the ascending fast times `times`, from a
/// single integration that lands exactly on every requested time.
pub fn oracle_trajectory(
    times: &[f64],
    params: &ModelParams,
    opts: &OracleOptions,
) -> Result<Vec<FundamentalMatrix>> {
    opts.validate(params)?;
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev) || !t.is_finite() {
            return Err(invalid("times", "must be finite, nonnegative and ascending"));
        }
        prev = t;
    }
    let mut m = Matrix4::identity();
    let mut t0 = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        match opts.method {
            Method::Rk4 => rk4_segment(&mut m, t0, t, opts.dt, |s| coefficients(s, params, opts)),
        }
        t0 = t;
        out.push(FundamentalMatrix::new(m, t));
    }
    Ok(out)
}

/// The stroboscopic time `mπ/ω̄` nearest to slow time `tau`.
pub fn stroboscopic_time(params: &ModelParams, tau: f64) -> f64 {
    let period = PI / params.omega_bar();
    (params.fast_time(tau) / period).round() * period
}

/// `count + 1` stroboscopic times spread evenly over `[0, tau_max]`.
pub fn stroboscopic_grid(params: &ModelParams, tau_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count)
        .map(|i| stroboscopic_time(params, tau_max * i as f64 / count as f64))
        .collect()
}

/// One independent oracle run.
#[derive(Debug, Clone)]
pub struct OracleTask {
    pub params: ModelParams,
    pub opts: OracleOptions,
    pub times: Vec<f64>,
}

/// Runs independent tasks on the rayon pool; results come back in task
/// order. Tasks not yet started when `cancel` is raised are skipped (`None`).
pub fn run_batch(
    tasks: &[OracleTask],
    cancel: Option<&AtomicBool>,
) -> Vec<Option<Result<Vec<FundamentalMatrix>>>> {
    tasks
        .par_iter()
        .map(|task| {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return None;
            }
            Some(oracle_trajectory(&task.times, &task.params, &task.opts))
        })
        .collect()
}

/// Symmetrized second moments of `(x₁, p₁, x₃, p₃)` for a zero-mean state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    sigma: Matrix4<f64>,
}

/// Per-mode second moments `(⟨x²⟩, ⟨p²⟩, ⟨(xp+px)/2⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMoments {
    pub xx: f64,
    pub pp: f64,
    pub xp: f64,
}

impl ModeMoments {
    pub fn iup(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }
}

impl CovarianceState {
    /// Checks symmetry, positive semidefiniteness and the per-mode
    /// uncertainty bound.
    pub fn new(sigma: Matrix4<f64>) -> Result<Self> {
        let scale = sigma.abs().max().max(1.0);
        if (sigma - sigma.transpose()).abs().max() > 1e-12 * scale {
            return Err(invalid("sigma", "covariance must be symmetric"));
        }
        let state = Self {
            sigma: symmetrize(&sigma),
        };
        let min_ev = SymmetricEigen::new(state.sigma).eigenvalues.min();
        if min_ev < -1e-12 * scale {
            return Err(invalid("sigma", format!("not positive semidefinite (eigenvalue {min_ev})")));
        }
        for mode in Mode::BOTH {
            let d = state.moments(mode).iup();
            if d < 0.25 - 1e-12 * scale * scale {
                return Err(invalid("sigma", format!("mode {} violates the uncertainty bound: D = {d}", mode.k())));
            }
        }
        Ok(state)
    }

    pub fn sigma(&self) -> &Matrix4<f64> {
        &self.sigma
    }

    pub fn moments(&self, mode: Mode) -> ModeMoments {
        let o = mode.offset();
        ModeMoments {
            xx: self.sigma[(o, o)],
            pp: self.sigma[(o + 1, o + 1)],
            xp: self.sigma[(o, o + 1)],
        }
    }

    /// `min` eigenvalue of `Σ`, for semidefiniteness checks.
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma).eigenvalues.min()
    }
}

fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Product of thermal states: `⟨x_k²⟩ = θ_k/(2k)`, `⟨p_k²⟩ = kθ_k/2`.
pub fn thermal_covariance(theta1: f64, theta3: f64) -> Result<CovarianceState> {
    for (name, v) in [("theta1", theta1), ("theta3", theta3)] {
        if !v.is_finite() || v < 1.0 {
            return Err(invalid(name, format!("must be finite and >= 1, got {v}")));
        }
    }
    let sigma = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        theta1 / 2.0,
        theta1 / 2.0,
        theta3 / 6.0,
        1.5 * theta3,
    ));
    Ok(CovarianceState { sigma })
}

/// Initial covariance of a run.
pub fn initial_covariance(params: &ModelParams) -> CovarianceState {
    thermal_covariance(params.theta1(), params.theta3()).expect("ModelParams holds valid thetas")
}

/// `Σ(t) = M Σ(0) Mᵀ`.
pub fn propagate_covariance(m: &FundamentalMatrix, sigma0: &CovarianceState) -> CovarianceState {
    let e = m.entries();
    CovarianceState {
        sigma: symmetrize(&(e * sigma0.sigma * e.transpose())),
    }
}
