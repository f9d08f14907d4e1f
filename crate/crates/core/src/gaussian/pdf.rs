//! Photon-number distribution of a zero-mean Gaussian mode.
//!
//! `𝒫_n = 2/√G · qⁿᐟ² · P_n(z)` with `G = 1 + 4𝒟 + 4Ẽ`,
//! `q = (1 + 4𝒟 − 4Ẽ)/G` and `z = (4𝒟 − 1)/√((4𝒟+1)² − 16Ẽ²)`.
//! Folding `qⁿᐟ²` into the Legendre recurrence gives a real three-term
//! recurrence for `R_n = qⁿᐟ² P_n(z)`:
//! `(m+1) R_{m+1} = (2m+1) w R_m − m q R_{m−1}` with `w = z√q = (4𝒟−1)/G`.
//! It needs no complex arithmetic, no special case on the thermal line
//! (`z = 1`) and no handling of the imaginary Legendre argument.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use super::ModeObservables;
use crate::error::{invalid, Error, Result};

/// Rescale the recurrence when both terms fall below this.
const RESCALE_FLOOR: f64 = 1e-200;

/// Legendre polynomial value, either directly representable or as
/// `exp(log_magnitude) · e^{i·phase}` when it would overflow `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegendreValue {
    Finite(Complex64),
    Scaled { log_magnitude: f64, phase: f64 },
}

impl LegendreValue {
    pub fn log_magnitude(&self) -> f64 {
        match self {
            LegendreValue::Finite(z) => z.norm().ln(),
            LegendreValue::Scaled { log_magnitude, .. } => *log_magnitude,
        }
    }

    pub fn phase(&self) -> f64 {
        match self {
            LegendreValue::Finite(z) => z.arg(),
            LegendreValue::Scaled { phase, .. } => *phase,
        }
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            LegendreValue::Finite(z) => Some(*z),
            LegendreValue::Scaled { .. } => None,
        }
    }
}

/// `P_n(z)` by upward recurrence, rescaled to stay in range.
pub fn legendre(n: usize, z: Complex64) -> LegendreValue {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return LegendreValue::Finite(prev);
    }
    let mut cur = z;
    let mut log_scale = 0.0;
    for m in 1..n {
        let mf = m as f64;
        let next = (z * cur * (2.0 * mf + 1.0) - prev * mf) / (mf + 1.0);
        prev = cur;
        cur = next;
        let big = cur.norm().max(prev.norm());
        if big > 1e150 {
            cur /= big;
            prev /= big;
            log_scale += big.ln();
        }
    }
    if z.re == 0.0 {
        // parity: P_n(iy) is real for even n, imaginary for odd n
        if n % 2 == 0 {
            cur.im = 0.0;
        } else {
            cur.re = 0.0;
        }
    }
    let log_mag = log_scale + cur.norm().ln();
    if log_mag < 700.0 {
        LegendreValue::Finite(cur * log_scale.exp())
    } else {
        LegendreValue::Scaled {
            log_magnitude: log_mag,
            phase: cur.arg(),
        }
    }
}

/// `𝒫_0 … 𝒫_{n_max}` plus a rigorous bound on the omitted mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
    pub n_max: usize,
    pub tail_mass_bound: f64,
}

impl PhotonDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - mean).powi(2) * p)
            .sum()
    }
}

/// `⌈40Ẽ⌉`: enough terms for the omitted mass to stay below `1e−6` for `Ẽ ≤ 50`.
pub fn default_n_max(obs: &ModeObservables) -> usize {
    (40.0 * obs.e_tilde).ceil() as usize
}

/// Geometric envelope `𝒫_n ≤ 2/√G · rⁿ` with `r = (4𝒟 − 1 + 4√(Ẽ² − 𝒟))/G < 1`.
fn envelope_ratio(obs: &ModeObservables) -> (f64, f64) {
    let g = 1.0 + 4.0 * obs.iup + 4.0 * obs.e_tilde;
    let r = (4.0 * obs.iup - 1.0 + 4.0 * obs.excess().sqrt()) / g;
    (g, r.clamp(0.0, 1.0))
}

/// Exact distribution for `n = 0..=n_max`.
pub fn pdf_exact(obs: &ModeObservables, n_max: usize) -> Result<PhotonDistribution> {
    obs.check_feasible()?;
    let (e, d) = (obs.e_tilde, obs.iup.max(0.25));
    let g = 1.0 + 4.0 * d + 4.0 * e;
    let w = (4.0 * d - 1.0) / g;
    let q = (1.0 + 4.0 * d - 4.0 * e) / g;
    let norm = 2.0 / g.sqrt();

    let mut probs = Vec::with_capacity(n_max + 1);
    let mut prev = 1.0_f64;
    let mut cur = w;
    // R_n = (prev or cur) · exp(log_scale)
    let mut log_scale = 0.0_f64;
    probs.push(norm);
    if n_max >= 1 {
        probs.push(norm * cur);
    }
    for m in 1..n_max {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0) * w * cur - mf * q * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
        let big = cur.abs().max(prev.abs());
        if big > 0.0 && big < RESCALE_FLOOR {
            prev /= big;
            cur /= big;
            log_scale += big.ln();
        }
        probs.push(norm * cur * log_scale.exp());
    }

    for (n, p) in probs.iter_mut().enumerate() {
        if *p < 0.0 {
            if *p < -1e-12 {
                return Err(Error::Numerical(format!("P_{n} = {p} is negative beyond round-off")));
            }
            *p = 0.0;
        }
    }

    let (g_env, r) = envelope_ratio(obs);
    let tail_mass_bound = if r == 0.0 {
        0.0
    } else if r >= 1.0 {
        1.0
    } else {
        (2.0 / g_env.sqrt() * r.powf(n_max as f64 + 1.0) / (1.0 - r)).min(1.0)
    };

    Ok(PhotonDistribution {
        probs,
        n_max,
        tail_mass_bound,
    })
}

/// Large-`n` approximations to [`pdf_exact`], valid once `Ẽ² ≫ 𝒟`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticForm {
    /// Uniform approximation covering real and imaginary Legendre arguments.
    General,
    /// Moderate `Ẽ/𝒟`: hyperbolic functions replaced by exponentials.
    QuasiGeometric,
    /// `Ẽ ≫ 𝒟`: even/odd oscillation.
    Oscillating,
    /// `n(4𝒟 − 1)/(4Ẽ) ≫ 1`: smooth tail independent of `𝒟`.
    Tail,
}

/// `ln cosh x` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln sinh x` for `x ≥ 0`; `−∞` at zero.
fn ln_sinh(x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    x + (-(-2.0 * x).exp_m1()).ln() - LN_2
}

fn parity_log(n: usize, x: f64) -> f64 {
    if n % 2 == 0 {
        ln_cosh(x)
    } else {
        ln_sinh(x.max(0.0))
    }
}

/// Asymptotic `𝒫_n`; requires `Ẽ² ≥ 20𝒟` and `n ≥ 10`.
pub fn pdf_asymptotic(obs: &ModeObservables, n: usize, form: AsymptoticForm) -> Result<f64> {
    obs.check_feasible()?;
    let (e, d) = (obs.e_tilde, obs.iup);
    if e * e < 20.0 * d {
        return Err(Error::Regime(format!(
            "asymptotic photon distribution needs E^2 >= 20 D, got E^2 = {}, D = {d}",
            e * e
        )));
    }
    if n < 10 {
        return Err(Error::Regime(format!("asymptotic photon distribution needs n >= 10, got {n}")));
    }
    let nf = n as f64;
    let g = 1.0 + 4.0 * d + 4.0 * e;
    let num = 4.0 * d - 1.0 + 4.0 * obs.excess().sqrt();

    let log_p = match form {
        AsymptoticForm::General => {
            let gap = (1.0 + 4.0 * d - 4.0 * e).abs();
            if gap == 0.0 {
                return Err(Error::Regime("Legendre argument is infinite at E = D + 1/4".into()));
            }
            // |χ| = num / √(|1+4𝒟−4Ẽ|·G)
            let ln_chi = num.ln() - 0.5 * (gap.ln() + g.ln());
            0.5 * LN_2 + 0.5 * nf * (gap.ln() - g.ln()) - 0.5 * (PI * nf * e).ln()
                + parity_log(n, (nf + 0.5) * ln_chi)
        }
        AsymptoticForm::QuasiGeometric => (nf + 0.5) * (num / g).ln() - 0.5 * (2.0 * PI * nf * e).ln(),
        AsymptoticForm::Oscillating => {
            let base = 1.0 - (4.0 * d + 1.0) / (2.0 * e);
            if base <= 0.0 {
                return Err(Error::Regime(format!(
                    "oscillating form needs 2E > 4D + 1, got E = {e}, D = {d}"
                )));
            }
            0.5 * (2.0 / (PI * nf * e)).ln() + 0.5 * nf * base.ln()
                + parity_log(n, nf * (4.0 * d - 1.0) / (4.0 * e))
        }
        AsymptoticForm::Tail => -nf / (2.0 * e) - 0.5 * (2.0 * PI * nf * e).ln(),
    };
    Ok(log_p.exp())
}

/// Long-time vacuum distribution at exact resonance, both modes.
/// Requires `τ ≥ 2`, `ν ≥ 10`, `n ≥ 10`.
pub fn pdf_vacuum_longtime(tau: f64, nu: f64, n: usize) -> Result<f64> {
    if !(tau >= 2.0) {
        return Err(Error::Regime(format!("long-time vacuum form needs tau >= 2, got {tau}")));
    }
    if !(nu >= 10.0) {
        return Err(Error::Regime(format!("long-time vacuum form needs nu >= 10, got {nu}")));
    }
    if n < 10 {
        return Err(invalid("n", format!("long-time vacuum form needs n >= 10, got {n}")));
    }
    let nf = n as f64;
    let rho = (2.0 * nu - 1.0).sqrt();
    let decay = (-2.0 * tau).exp();
    let arg = 2.0 * nf / nu * (rho * tau).sin().powi(4) * decay;
    let log_p = -tau + 0.5 * (8.0 / (PI * nf)).ln() + 0.5 * nf * (-4.0 * decay).ln_1p() + parity_log(n, arg);
    Ok(log_p.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::Mode;
    use approx::assert_relative_eq;

    fn obs(e: f64, d: f64) -> ModeObservables {
        ModeObservables::new(e, d, Mode::First).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn legendre_small_cases() {
        let z = c(0.3, -1.7);
        assert_eq!(legendre(0, z).finite().unwrap(), c(1.0, 0.0));
        assert_eq!(legendre(1, z).finite().unwrap(), z);
        assert_relative_eq!(legendre(2, c(3.0, 0.0)).finite().unwrap().re, 13.0, max_relative = 1e-15);
        assert_eq!(legendre(5, c(0.0, 0.0)).finite().unwrap(), c(0.0, 0.0));
        assert_relative_eq!(legendre(4, c(0.0, 0.0)).finite().unwrap().re, 3.0 / 8.0, max_relative = 1e-15);
    }

    #[test]
    fn legendre_matches_explicit_series() {
        // P_n(x) = 2^{−n} Σ_k (−1)^k C(n,k) C(2n−2k,n) x^{n−2k}
        fn series(n: usize, z: Complex64) -> Complex64 {
            let binom = |a: usize, b: usize| -> f64 { (0..b).map(|i| (a - i) as f64 / (i + 1) as f64).product() };
            let mut acc = c(0.0, 0.0);
            for k in 0..=n / 2 {
                let coef = binom(n, k) * binom(2 * n - 2 * k, n) * if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += z.powu((n - 2 * k) as u32) * coef;
            }
            acc / 2f64.powi(n as i32)
        }
        for n in [2, 3, 7, 12] {
            for z in [c(1.3, 0.0), c(0.0, 0.8), c(-0.4, 0.25)] {
                let a = legendre(n, z).finite().unwrap();
                let b = series(n, z);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn legendre_imaginary_parity() {
        for n in 0..40 {
            let v = legendre(n, c(0.0, 2.5)).finite().unwrap();
            if n % 2 == 0 {
                assert_eq!(v.im, 0.0);
            } else {
                assert_eq!(v.re, 0.0);
            }
        }
    }

    #[test]
    fn legendre_overflow_goes_to_log_form() {
        let v = legendre(2000, c(50.0, 0.0));
        let LegendreValue::Scaled { log_magnitude, phase } = v else {
            panic!("expected scaled value");
        };
        // P_n(x) ~ (x + √(x²−1))ⁿ / √(2πn·…) for large n
        let lead = 2000.0 * (50.0 + (2499.0f64).sqrt()).ln();
        assert!((log_magnitude - lead).abs() < 10.0);
        assert_eq!(phase, 0.0);
    }

    #[test]
    fn vacuum_is_delta() {
        let p = pdf_exact(&ModeObservables::vacuum(Mode::First), 20).unwrap();
        assert_eq!(p.probs[0], 1.0);
        assert!(p.probs[1..].iter().all(|&x| x == 0.0));
        assert_eq!(p.tail_mass_bound, 0.0);
    }

    #[test]
    fn thermal_is_geometric() {
        let p = pdf_exact(&ModeObservables::thermal(3.0, Mode::First).unwrap(), 200).unwrap();
        for (n, &x) in p.probs.iter().enumerate() {
            assert_eq!(x, 0.5f64.powi(n as i32 + 1), "n = {n}");
        }
        let theta: f64 = 7.3;
        let p = pdf_exact(&ModeObservables::thermal(theta, Mode::First).unwrap(), 300).unwrap();
        for (n, &x) in p.probs.iter().enumerate() {
            let want = 2.0 * (theta - 1.0).powi(n as i32) / (theta + 1.0).powi(n as i32 + 1);
            assert_relative_eq!(x, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn squeezed_vacuum_has_no_odd_counts() {
        let r: f64 = 1.3;
        let p = pdf_exact(&obs((2.0 * r).cosh() / 2.0, 0.25), 400).unwrap();
        for n in (1..=400).step_by(2) {
            assert_eq!(p.probs[n], 0.0);
        }
        // P_0 = 1/cosh r
        assert_relative_eq!(p.probs[0], 1.0 / r.cosh(), max_relative = 1e-14);
        assert!((p.total() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn agrees_with_literal_legendre_form() {
        for (e, d) in [(3.0, 2.0), (5.0, 1.0), (2.0, 3.9)] {
            let o = obs(e, d);
            let p = pdf_exact(&o, 60).unwrap();
            let g = 1.0 + 4.0 * d + 4.0 * e;
            let ratio = c((1.0 + 4.0 * d - 4.0 * e) / g, 0.0);
            let z = c(4.0 * d - 1.0, 0.0) / c((4.0 * d + 1.0).powi(2) - 16.0 * e * e, 0.0).sqrt();
            for n in 0..=60 {
                let lit = 2.0 / g.sqrt() * ratio.sqrt().powu(n as u32) * legendre(n, z).finite().unwrap();
                assert!(lit.im.abs() < 1e-12);
                assert!((lit.re - p.probs[n]).abs() < 1e-12, "E={e} D={d} n={n}");
            }
        }
    }

    #[test]
    fn envelope_bounds_every_term() {
        for (e, d) in [(10.0, 0.25), (10.0, 3.0), (4.0, 15.0), (50.0, 2.0)] {
            let o = obs(e, d);
            let (g, r) = envelope_ratio(&o);
            let p = pdf_exact(&o, 3000).unwrap();
            for (n, &x) in p.probs.iter().enumerate() {
                assert!(x <= 2.0 / g.sqrt() * r.powi(n as i32) * (1.0 + 1e-10));
            }
            assert!(p.total() >= 1.0 - p.tail_mass_bound - 1e-12);
        }
    }

    #[test]
    fn deep_tail_does_not_underflow_early() {
        let p = pdf_exact(&obs(0.6, 0.3), 5000).unwrap();
        assert!(p.probs.iter().all(|x| x.is_finite() && *x >= 0.0));
        assert_relative_eq!(p.total(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn asymptotic_preconditions() {
        let o = obs(2.0, 1.0);
        assert!(matches!(pdf_asymptotic(&o, 20, AsymptoticForm::General), Err(Error::Regime(_))));
        let o = obs(20.0, 1.0);
        assert!(pdf_asymptotic(&o, 9, AsymptoticForm::General).is_err());
        assert!(pdf_asymptotic(&o, 10, AsymptoticForm::General).is_ok());
    }

    #[test]
    fn general_asymptotic_tracks_exact() {
        for (e, d) in [(40.0, 0.3), (40.0, 2.0), (200.0, 9.0)] {
            let o = obs(e, d);
            let p = pdf_exact(&o, 200).unwrap();
            for n in [20, 60, 150] {
                let a = pdf_asymptotic(&o, n, AsymptoticForm::General).unwrap();
                if p.probs[n] > 1e-14 {
                    assert_relative_eq!(a, p.probs[n], max_relative = 0.2);
                }
            }
        }
    }

    #[test]
    fn tail_form_independent_of_iup() {
        let n = 500;
        let vals: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&d| pdf_asymptotic(&obs(100.0, d), n, AsymptoticForm::Tail).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v == vals[0]));
    }

    #[test]
    fn vacuum_longtime_limits() {
        let nu: f64 = 50.0 / 3.0;
        let rho = (2.0 * nu - 1.0).sqrt();
        let tau = 4.0 * PI / rho;
        // sin(ρτ) vanishes up to round-off: odd counts are suppressed entirely
        assert!(pdf_vacuum_longtime(tau, nu, 11).unwrap() < 1e-50);
        assert!(pdf_vacuum_longtime(tau, nu, 12).unwrap() > 0.0);
        let big: f64 = 30.0;
        let n = 40;
        let want = (-big).exp() * (8.0 / (PI * n as f64)).sqrt();
        assert_relative_eq!(pdf_vacuum_longtime(big, nu, n).unwrap(), want, max_relative = 1e-12);
        assert!(pdf_vacuum_longtime(1.0, nu, n).is_err());
        assert!(pdf_vacuum_longtime(3.0, 5.0, n).is_err());
        assert!(pdf_vacuum_longtime(3.0, nu, 5).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn normalization_and_moments(e in 0.5f64..50.0, frac in 0.0f64..1.0) {
                let d = 0.25 + frac * (e * e - 0.25);
                let o = obs(e, d);
                let p = pdf_exact(&o, default_n_max(&o)).unwrap();
                prop_assert!(p.total() >= 1.0 - 1e-6);
                prop_assert!(p.total() <= 1.0 + 1e-9);
                prop_assert!(p.probs.iter().all(|&x| (0.0..=1.0).contains(&x)));
                let mean = e - 0.5;
                let var = 2.0 * e * e - d - 0.25;
                prop_assert!((p.mean() - mean).abs() <= 1e-6 * mean.max(1e-6));
                prop_assert!((p.variance() - var).abs() <= 1e-6 * var.max(1e-6));
            }
        }
    }
}
