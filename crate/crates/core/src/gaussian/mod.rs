//! Single-mode observables of zero-mean Gaussian states and their closed-form
//! time dependence at the two analytically solvable operating points.

mod pdf;

pub use pdf::{
    default_n_max, legendre, pdf_asymptotic, pdf_exact, pdf_vacuum_longtime, AsymptoticForm,
    LegendreValue, PhotonDistribution,
};

use crate::cavity::{Mode, ModelParams};
use crate::error::{invalid, Error, Result};
use crate::oracle::CovarianceState;
use crate::slowamp::{asymmetric_rates, require_asymmetric, require_exact_resonance};

/// Relative slack allowed on `Ẽ² ≥ 𝒟` and `𝒟 ≥ 1/4` before a state is called infeasible.
const FEASIBILITY_SLACK: f64 = 1e-10;

/// Dimensionless energy `Ẽ = E/k` and uncertainty product `𝒟` of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeObservables {
    pub e_tilde: f64,
    pub iup: f64,
    pub mode: Mode,
}

impl ModeObservables {
    /// Validated constructor: requires `𝒟 ≥ 1/4` and `Ẽ² ≥ 𝒟`.
    pub fn new(e_tilde: f64, iup: f64, mode: Mode) -> Result<Self> {
        let obs = Self { e_tilde, iup, mode };
        obs.check_feasible()?;
        Ok(obs)
    }

    pub fn thermal(theta: f64, mode: Mode) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(invalid("theta", format!("must be >= 1, got {theta}")));
        }
        Ok(Self {
            e_tilde: 0.5 * theta,
            iup: 0.25 * theta * theta,
            mode,
        })
    }

    pub fn vacuum(mode: Mode) -> Self {
        Self {
            e_tilde: 0.5,
            iup: 0.25,
            mode,
        }
    }

    pub fn check_feasible(&self) -> Result<()> {
        let (e, d) = (self.e_tilde, self.iup);
        if !e.is_finite() || !d.is_finite() {
            return Err(Error::Infeasible(format!("non-finite observables ({e}, {d})")));
        }
        if d < 0.25 * (1.0 - FEASIBILITY_SLACK) {
            return Err(Error::Infeasible(format!("D = {d} is below 1/4")));
        }
        if e * e < d * (1.0 - FEASIBILITY_SLACK) {
            return Err(Error::Infeasible(format!("E^2 = {} is below D = {d}", e * e)));
        }
        Ok(())
    }

    /// Mode energy `E = kẼ`.
    pub fn energy(&self) -> f64 {
        self.mode.kf() * self.e_tilde
    }

    pub fn mean_photons(&self) -> f64 {
        self.e_tilde - 0.5
    }

    /// `Ẽ² − 𝒟`, clamped at zero against round-off on the thermal line.
    fn excess(&self) -> f64 {
        (self.e_tilde * self.e_tilde - self.iup).max(0.0)
    }
}

/// Reads `(Ẽ, 𝒟)` of one mode off the covariance matrix.
pub fn observables_from_covariance(sigma: &CovarianceState, mode: Mode) -> ModeObservables {
    let m = sigma.moments(mode);
    let k = mode.kf();
    ModeObservables {
        e_tilde: (m.pp + k * k * m.xx) / (2.0 * k),
        iup: m.iup(),
        mode,
    }
}

/// `Tr ρ̂² = (4𝒟)^{−1/2}`.
pub fn purity(iup: f64) -> Result<f64> {
    if !(iup >= 0.25 * (1.0 - FEASIBILITY_SLACK)) {
        return Err(Error::Infeasible(format!("D = {iup} is below 1/4")));
    }
    Ok((4.0 * iup.max(0.25)).sqrt().recip())
}

/// Minimal quadrature variance over a fast period relative to vacuum:
/// `s = 2𝒟/(Ẽ + √(Ẽ² − 𝒟))`.
pub fn squeezing(obs: &ModeObservables) -> Result<f64> {
    obs.check_feasible()?;
    Ok(2.0 * obs.iup / (obs.e_tilde + obs.excess().sqrt()))
}

/// Variance of the photon number, `2Ẽ² − 𝒟 − 1/4`.
pub fn photon_variance(obs: &ModeObservables) -> f64 {
    2.0 * obs.e_tilde * obs.e_tilde - obs.iup - 0.25
}

fn resonance_angles(tau: f64, nu: f64) -> (f64, f64, f64) {
    let rho = (2.0 * nu - 1.0).sqrt();
    let (s, c) = (rho * tau).sin_cos();
    (rho, s, c)
}

/// Mode energy `E_k` at exact resonance.
pub fn energy_exact_resonance(tau: f64, params: &ModelParams, mode: Mode) -> Result<f64> {
    require_exact_resonance(params)?;
    let nu = params.nu();
    let (rho, s, c) = resonance_angles(tau, nu);
    let (own, other) = (params.theta(mode), params.theta(mode.other()));
    let sign = match mode {
        Mode::First => 1.0,
        Mode::Third => -1.0,
    };
    let bracket = (2.0 * tau).cosh() * (s * s / (rho * rho) * (1.0 + 2.0 * nu * other / own) + c * c)
        + sign * (2.0 * tau).sinh() * (2.0 * rho * tau).sin() / rho;
    Ok(0.5 * mode.kf() * own * bracket)
}

/// Uncertainty product `𝒟_k` at exact resonance.
pub fn iup_exact_resonance(tau: f64, params: &ModelParams, mode: Mode) -> Result<f64> {
    require_exact_resonance(params)?;
    let nu = params.nu();
    let (_, s, c) = resonance_angles(tau, nu);
    let own = params.theta(mode);
    let ratio = params.theta(mode.other()) / own;
    let sin2 = 2.0 * s * c;
    let cross = (2.0 * nu * ratio - 1.0) / (2.0 * (2.0 * nu - 1.0));
    let far = (2.0 * nu * ratio + 1.0) / (2.0 * nu - 1.0);
    Ok(0.25 * own * own * (c.powi(4) + sin2 * sin2 * cross + s.powi(4) * far * far))
}

/// Vacuum uncertainty product at exact resonance, identical for both modes.
pub fn iup_vacuum_exact_resonance(tau: f64, nu: f64) -> f64 {
    let (_, s, _) = resonance_angles(tau, nu);
    0.25 * (1.0 + 8.0 * nu / (2.0 * nu - 1.0).powi(2) * s.powi(4))
}

/// Largest vacuum uncertainty product reached at exact resonance.
pub fn iup_vacuum_peak(nu: f64) -> f64 {
    0.25 * (1.0 + 8.0 * nu / (2.0 * nu - 1.0).powi(2))
}

pub fn exact_resonance_observables(tau: f64, params: &ModelParams, mode: Mode) -> Result<ModeObservables> {
    Ok(ModeObservables {
        e_tilde: energy_exact_resonance(tau, params, mode)? / mode.kf(),
        iup: iup_exact_resonance(tau, params, mode)?,
        mode,
    })
}

/// `(cosh 4Rτ, ψ(τ) = cosh 2Rτ · cos 2Jτ)`.
fn asymmetric_kernels(tau: f64, nu: f64) -> (f64, f64) {
    let (r, j) = asymmetric_rates(nu);
    ((4.0 * r * tau).cosh(), (2.0 * r * tau).cosh() * (2.0 * j * tau).cos())
}

/// Mode energy `E_k` at the asymmetric point, to first order in `1/ν`.
pub fn energy_asymmetric(tau: f64, params: &ModelParams, mode: Mode) -> Result<f64> {
    require_asymmetric(params)?;
    let nu = params.nu();
    let (ch, psi) = asymmetric_kernels(tau, nu);
    let (t1, t3) = (params.theta1(), params.theta3());
    let transfer = ch + 1.0 - 2.0 * psi;
    Ok(match mode {
        Mode::First => 0.5 * t1 * ((1.0 - 4.0 / nu) * ch + 4.0 / nu * psi) + t3 / nu * transfer,
        Mode::Third => 1.5 * t3 * (1.0 - 4.0 / nu + 4.0 / nu * psi) + 3.0 * t1 / nu * transfer,
    })
}

/// Uncertainty product `𝒟_k` at the asymmetric point.
pub fn iup_asymmetric(tau: f64, params: &ModelParams, mode: Mode) -> Result<f64> {
    require_asymmetric(params)?;
    let nu = params.nu();
    let (ch, psi) = asymmetric_kernels(tau, nu);
    let own = params.theta(mode);
    let (t1, t3) = (params.theta1(), params.theta3());
    Ok(0.25 * own * own * (1.0 - 8.0 / nu + 8.0 / nu * psi) + t1 * t3 / nu * (ch + 1.0 - 2.0 * psi))
}

pub fn asymmetric_observables(tau: f64, params: &ModelParams, mode: Mode) -> Result<ModeObservables> {
    Ok(ModeObservables {
        e_tilde: energy_asymmetric(tau, params, mode)? / mode.kf(),
        iup: iup_asymmetric(tau, params, mode)?,
        mode,
    })
}
