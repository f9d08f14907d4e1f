//! Physical parameterization of the two resonant cavity modes.
//!
//! Frequencies are normalized so that the lower mode has unit frequency. The
//! upper mode sits at `3 + Δ`, the wall oscillates at `2ω̄ = 2(1 + δ)` with
//! relative amplitude `ε`, and the intermode coupling enters only through
//! `ν = 96μ²`.

use crate::error::{invalid, Error, Result};

/// Coupling constant of the cubical cavity pair {111}/{511}.
pub const NU_CUBE: f64 = 50.0 / 3.0;

/// Bounds on the small parameters `ε`, `δ`, `Δ`.
///
/// Values above `soft` are accepted but reported by [`ModelParams::warnings`];
/// values above `hard` are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallnessLimits {
    pub soft: f64,
    pub hard: f64,
}

impl Default for SmallnessLimits {
    fn default() -> Self {
        Self {
            soft: 0.1,
            hard: 0.5,
        }
    }
}

/// One of the two resonantly coupled modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Fundamental mode, unperturbed frequency 1.
    First,
    /// Upper mode, unperturbed frequency 3.
    Third,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::First, Mode::Third];

    pub fn k(self) -> u32 {
        match self {
            Mode::First => 1,
            Mode::Third => 3,
        }
    }

    pub fn kf(self) -> f64 {
        self.k() as f64
    }

    /// Row offset of this mode in the `(x₁, p₁, x₃, p₃)` phase-space basis.
    pub(crate) fn offset(self) -> usize {
        match self {
            Mode::First => 0,
            Mode::Third => 2,
        }
    }

    pub fn other(self) -> Mode {
        match self {
            Mode::First => Mode::Third,
            Mode::Third => Mode::First,
        }
    }
}

impl TryFrom<u32> for Mode {
    type Error = Error;

    fn try_from(k: u32) -> Result<Self> {
        match k {
            1 => Ok(Mode::First),
            3 => Ok(Mode::Third),
            _ => Err(invalid("mode", format!("expected 1 or 3, got {k}"))),
        }
    }
}

/// Inputs of a single run. Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    epsilon: f64,
    delta: f64,
    big_delta: f64,
    nu: f64,
    theta1: f64,
    theta3: f64,
    soft_limit: f64,
}

impl ModelParams {
    /// Vacuum initial state, default smallness limits.
    pub fn new(epsilon: f64, delta: f64, big_delta: f64, nu: f64) -> Result<Self> {
        Self::with_limits(epsilon, delta, big_delta, nu, SmallnessLimits::default())
    }

    pub fn with_limits(
        epsilon: f64,
        delta: f64,
        big_delta: f64,
        nu: f64,
        limits: SmallnessLimits,
    ) -> Result<Self> {
        if !(limits.soft > 0.0 && limits.soft <= limits.hard) {
            return Err(invalid("limits", "need 0 < soft <= hard"));
        }
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(invalid("epsilon", format!("must be finite and > 0, got {epsilon}")));
        }
        for (name, v) in [("epsilon", epsilon), ("delta", delta), ("big_delta", big_delta)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
            if v.abs() > limits.hard {
                return Err(invalid(
                    name,
                    format!("|{v}| exceeds the hard smallness limit {}", limits.hard),
                ));
            }
        }
        if !nu.is_finite() || nu < 0.0 {
            return Err(invalid("nu", format!("must be finite and >= 0, got {nu}")));
        }
        Ok(Self {
            epsilon,
            delta,
            big_delta,
            nu,
            theta1: 1.0,
            theta3: 1.0,
            soft_limit: limits.soft,
        })
    }

    /// Builds parameters from detunings measured in units of `ε`.
    pub fn from_normalized(epsilon: f64, delta_t: f64, big_delta_t: f64, nu: f64) -> Result<Self> {
        Self::new(epsilon, epsilon * delta_t, epsilon * big_delta_t, nu)
    }

    /// Independent thermal parameters for the two modes.
    pub fn with_thermal(mut self, theta1: f64, theta3: f64) -> Result<Self> {
        for (name, v) in [("theta1", theta1), ("theta3", theta3)] {
            if !v.is_finite() || v < 1.0 {
                return Err(invalid(name, format!("must be finite and >= 1, got {v}")));
            }
        }
        self.theta1 = theta1;
        self.theta3 = theta3;
        Ok(self)
    }

    /// Both modes thermalized at one inverse temperature.
    pub fn with_beta(self, beta: f64) -> Result<Self> {
        let (t1, t3) = theta_pair_from_beta(beta)?;
        self.with_thermal(t1, t3)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn big_delta(&self) -> f64 {
        self.big_delta
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn mu(&self) -> f64 {
        (self.nu / 96.0).sqrt()
    }
    pub fn theta1(&self) -> f64 {
        self.theta1
    }
    pub fn theta3(&self) -> f64 {
        self.theta3
    }
    pub fn theta(&self, mode: Mode) -> f64 {
        match mode {
            Mode::First => self.theta1,
            Mode::Third => self.theta3,
        }
    }
    /// `θ₃/θ₁`.
    pub fn theta31(&self) -> f64 {
        self.theta3 / self.theta1
    }
    /// Half the drive frequency, `ω̄ = 1 + δ`.
    pub fn omega_bar(&self) -> f64 {
        1.0 + self.delta
    }
    pub fn delta_t(&self) -> f64 {
        self.delta / self.epsilon
    }
    pub fn big_delta_t(&self) -> f64 {
        self.big_delta / self.epsilon
    }
    /// `γ = Δ̃ − 3δ̃`.
    pub fn gamma_t(&self) -> f64 {
        self.big_delta_t() - 3.0 * self.delta_t()
    }
    /// `η = Δ̃ − 4δ̃`.
    pub fn eta_t(&self) -> f64 {
        self.big_delta_t() - 4.0 * self.delta_t()
    }

    pub fn is_vacuum(&self) -> bool {
        self.theta1 == 1.0 && self.theta3 == 1.0
    }

    /// Slow time `τ = εt/2` for fast time `t`.
    pub fn slow_time(&self, t: f64) -> f64 {
        0.5 * self.epsilon * t
    }

    pub fn fast_time(&self, tau: f64) -> f64 {
        2.0 * tau / self.epsilon
    }

    /// Soft-limit violations; empty when the small-parameter regime holds.
    pub fn warnings(&self) -> Vec<String> {
        [("epsilon", self.epsilon), ("delta", self.delta), ("big_delta", self.big_delta)]
            .into_iter()
            .filter(|(_, v)| v.abs() > self.soft_limit)
            .map(|(name, v)| {
                format!("{name} = {v} exceeds {} (small-parameter theory may not apply)", self.soft_limit)
            })
            .collect()
    }
}

/// Eigenmode label of a rectangular cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex3D {
    pub kx: u32,
    pub ky: u32,
    pub kz: u32,
}

impl ModeIndex3D {
    pub fn new(kx: u32, ky: u32, kz: u32) -> Result<Self> {
        if kx == 0 || ky == 0 || kz == 0 {
            return Err(invalid("mode index", format!("components must be >= 1, got ({kx},{ky},{kz})")));
        }
        Ok(Self { kx, ky, kz })
    }
}

/// Intermode coefficient `m_kj` for a rectangular cavity whose wall normal to
/// `x` moves. Antisymmetric in `k`, `j`; zero unless the transverse labels match.
pub fn mode_coupling_coefficient(k: ModeIndex3D, j: ModeIndex3D) -> Result<f64> {
    if k == j {
        return Err(invalid("mode index", "coefficient undefined for identical modes"));
    }
    if k.ky != j.ky || k.kz != j.kz {
        return Ok(0.0);
    }
    // same transverse labels and k != j, so kx != jx
    let (kx, jx) = (k.kx as f64, j.kx as f64);
    let sign = if (k.kx + j.kx) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * 2.0 * kx * jx / (jx * jx - kx * kx))
}

/// `μ = jₓ/(12kₓ)` for a resonant pair `{kₓ, m, n}`, `{jₓ, m, n}`.
pub fn mu_from_resonant_pair(kx: u32, jx: u32) -> Result<f64> {
    if kx == 0 || jx == 0 {
        return Err(invalid("mode pair", "components must be positive integers"));
    }
    if jx != 3 * kx {
        log::warn!("mode pair ({kx}, {jx}): jx != 3 kx");
    }
    Ok(jx as f64 / (12.0 * kx as f64))
}

pub fn nu_from_mu(mu: f64) -> f64 {
    96.0 * mu * mu
}

/// `coth(x)` for `x > 0`, exact 1.0 once the correction underflows.
pub fn coth(x: f64) -> f64 {
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// `(θ₁, θ₃) = (coth(β/2), coth(3β/2))`; `β = +∞` gives the vacuum.
pub fn theta_pair_from_beta(beta: f64) -> Result<(f64, f64)> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(invalid("beta", format!("must be > 0, got {beta}")));
    }
    Ok((coth(0.5 * beta), coth(1.5 * beta)))
}

/// `θ₃` of a mode pair sharing the temperature of a first mode with `θ₁`.
pub fn thermal_partner(theta1: f64) -> f64 {
    let t2 = theta1 * theta1;
    theta1 * (t2 + 3.0) / (3.0 * t2 + 1.0)
}
