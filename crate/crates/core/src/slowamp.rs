//! Slow-amplitude reduction of the driven two-mode system.
//!
//! Writing `x_k = ξ_k⁺ e^{ikω̄t} + ξ_k⁻ e^{−ikω̄t}` with slowly varying `ξ`
//! turns the equations of motion into `dv/dt = A v` for
//! `v = (ξ₁⁺, ξ₁⁻, ξ₃⁺, ξ₃⁻)` and a constant 4×4 matrix `A`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::cavity::{Mode, ModelParams};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Above this ratio `‖A²‖/|λ₊² − λ₋²|` the two-node interpolation used by
/// [`slow_propagator`] loses more than a few digits, and the Padé
/// scaling-and-squaring exponential takes over.
const INTERPOLATION_CONDITION_LIMIT: f64 = 1e4;

/// The matrix `A` of `dv/dt = A v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowMatrix {
    entries: Matrix4<Complex64>,
}

impl SlowMatrix {
    pub fn entries(&self) -> &Matrix4<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Eigenvalues from a complex Schur decomposition, unordered.
    pub fn numeric_eigenvalues(&self) -> Result<[Complex64; 4]> {
        let ev = self
            .entries
            .eigenvalues()
            .ok_or_else(|| Error::Numerical("Schur iteration did not triangularize A".into()))?;
        Ok([ev[0], ev[1], ev[2], ev[3]])
    }
}

/// Coefficients of the characteristic polynomial `λ⁴ − aλ² + b/4` of `A`,
/// so that `λ±² = ½(a ± √c)` with `c = a² − b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Abc {
    pub fn new(epsilon: f64, delta: f64, big_delta: f64, nu: f64) -> Self {
        let e2 = epsilon * epsilon;
        let g = big_delta - 3.0 * delta;
        let a = e2 * (1.0 - nu) - delta * delta - g * g;
        let b = (2.0 * (delta - epsilon) * g + nu * e2) * (2.0 * (delta + epsilon) * g + nu * e2);
        let h = big_delta - 4.0 * delta;
        let q = e2 + (big_delta - 2.0 * delta) * h;
        let c = 2.0 * e2 * nu * (h * h - e2) + q * q;
        Self { a, b, c }
    }
}

/// `±λ₊`, `±λ₋`: the spectrum of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSet {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub abc: Abc,
}

impl EigenSet {
    /// The four eigenvalues `(λ₊, −λ₊, λ₋, −λ₋)`.
    pub fn spectrum(&self) -> [Complex64; 4] {
        [self.lambda_plus, -self.lambda_plus, self.lambda_minus, -self.lambda_minus]
    }

    /// Growth rate `Re λ₊`.
    pub fn increment(&self) -> f64 {
        self.lambda_plus.re
    }
}

pub fn build_matrix(params: &ModelParams) -> SlowMatrix {
    build_matrix_raw(params.epsilon(), params.delta(), params.big_delta(), params.nu())
}

pub(crate) fn build_matrix_raw(epsilon: f64, delta: f64, big_delta: f64, nu: f64) -> SlowMatrix {
    let mu = (nu / 96.0).sqrt();
    let g = big_delta - 3.0 * delta;
    let r = |v: f64| I * v;
    #[rustfmt::skip]
    let entries = Matrix4::new(
        r(-delta),            r(epsilon),           r(12.0 * mu * epsilon), Complex64::ZERO,
        r(-epsilon),          r(delta),             Complex64::ZERO,        r(-12.0 * mu * epsilon),
        r(4.0 * mu * epsilon), Complex64::ZERO,     r(g),                   Complex64::ZERO,
        Complex64::ZERO,      r(-4.0 * mu * epsilon), Complex64::ZERO,      r(-g),
    );
    SlowMatrix { entries }
}

pub fn eigenvalues(params: &ModelParams) -> EigenSet {
    eigenvalues_raw(params.epsilon(), params.delta(), params.big_delta(), params.nu())
}

/// Same as [`eigenvalues`] for bare numbers. Homogeneous of degree one in
/// `(ε, δ, Δ)`, so passing `ε = 1` with normalized detunings yields
/// eigenvalues in units of `ε`.
pub fn eigenvalues_raw(epsilon: f64, delta: f64, big_delta: f64, nu: f64) -> EigenSet {
    let abc = Abc::new(epsilon, delta, big_delta, nu);
    let Abc { a, b, .. } = abc;

    let (lambda_plus, lambda_minus) = if b >= 0.0 {
        let rb = b.sqrt();
        let (u1, u2) = (a + rb, a - rb);
        // principal roots of real numbers, kept on the nonnegative real or
        // imaginary half-axis
        let root = |u: f64| {
            if u >= 0.0 {
                Complex64::new(u.sqrt(), 0.0)
            } else {
                Complex64::new(0.0, (-u).sqrt())
            }
        };
        let (s1, s2) = (root(u1), root(u2));
        let plus = 0.5 * (s1 + s2);
        let same_axis = (u1 >= 0.0) == (u2 >= 0.0);
        // λ₊λ₋ = √b/2; avoids cancellation in s1 − s2 when u1 ≈ u2
        let minus = if same_axis && plus.norm() > 0.0 {
            0.5 * rb / plus
        } else {
            0.5 * (s1 - s2)
        };
        (plus, minus)
    } else {
        let rb = (-b).sqrt();
        let s1 = Complex64::new(a, rb).sqrt();
        let s2 = Complex64::new(a, -rb).sqrt();
        (0.5 * (s1 + s2), 0.5 * (s1 - s2))
    };

    EigenSet {
        lambda_plus,
        lambda_minus,
        abc,
    }
}

/// `λ₊/ε` on the line `Δ̃ = 4δ̃` for large `ν`.
///
/// The returned value is the complete bracket times one half, i.e. the
/// eigenvalue in units of `ε`: `½[√(ν/(ν+2δ̃²)) + i√(2(ν+2δ̃²))]`.
pub fn increment_symmetric_line(delta_t: f64, nu: f64) -> Complex64 {
    let w = nu + 2.0 * delta_t * delta_t;
    0.5 * Complex64::new((nu / w).sqrt(), (2.0 * w).sqrt())
}

/// `λ₊²/ε²` near the hyperbola pole `γ = −νξ/4`, valid for `|δ̃| ≤ 1`, `|ξ| ≥ 1`.
/// Negative values mean no generation.
pub fn increment_asymmetric_inner(delta_t: f64, xi: f64) -> f64 {
    let base = 1.0 - delta_t * delta_t;
    if xi.is_infinite() {
        return base;
    }
    base + 4.0 * (delta_t * xi - 1.0) / (xi * xi)
}

/// `λ₊/ε` between the hyperbola branches, parameterized by
/// `γ = −ν/(2(δ̃ + χ))`, `|χ| < 1`.
pub fn increment_asymmetric_outer(delta_t: f64, chi_outer: f64, nu: f64) -> Result<f64> {
    if !(chi_outer.abs() < 1.0) {
        return Err(Error::Regime(format!(
            "|chi| = {} must be < 1 inside the asymmetric region",
            chi_outer.abs()
        )));
    }
    Ok(nu * (1.0 - chi_outer * chi_outer).sqrt() / (nu + 2.0 * delta_t * delta_t))
}

/// Real 4×4 map `(x₁, p₁, x₃, p₃)(0) ↦ (x₁, p₁, x₃, p₃)(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    entries: Matrix4<f64>,
    t: f64,
}

impl FundamentalMatrix {
    pub fn new(entries: Matrix4<f64>, t: f64) -> Self {
        Self { entries, t }
    }

    pub fn identity() -> Self {
        Self::new(Matrix4::identity(), 0.0)
    }

    pub fn entries(&self) -> &Matrix4<f64> {
        &self.entries
    }

    /// Fast time.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn max_abs_diff(&self, other: &FundamentalMatrix) -> f64 {
        (self.entries - other.entries).abs().max()
    }

    pub fn apply(&self, u: &Vector4<f64>) -> Vector4<f64> {
        self.entries * u
    }
}

/// `exp(A t)`.
///
/// For diagonalizable `A` the minimal polynomial of `A²` is
/// `(x − λ₊²)(x − λ₋²)`, so `exp(At) = cosh(√(A²) t) + A·sinh(√(A²) t)/√(A²)`
/// reduces to two-node interpolation in `A²` with the analytic eigenvalues.
pub fn slow_propagator(matrix: &SlowMatrix, eigen: &EigenSet, t: f64) -> Matrix4<Complex64> {
    let a = matrix.entries;
    let a2 = a * a;
    let l1 = eigen.lambda_plus * eigen.lambda_plus;
    let l2 = eigen.lambda_minus * eigen.lambda_minus;
    let gap = (l1 - l2).norm();
    let scale = a2.iter().map(|z| z.norm()).fold(0.0, f64::max);

    if scale == 0.0 {
        return Matrix4::identity();
    }
    if gap == 0.0 || scale / gap > INTERPOLATION_CONDITION_LIMIT {
        return (a * Complex64::new(t, 0.0)).exp();
    }

    let even = |x: Complex64| (x.sqrt() * t).cosh();
    let odd = |x: Complex64| t * sinhc(x.sqrt() * t);
    let id = Matrix4::<Complex64>::identity();
    let interp = |f: &dyn Fn(Complex64) -> Complex64| {
        let (f1, f2) = (f(l1), f(l2));
        (a2 - id * l2) * (f1 / (l1 - l2)) + (a2 - id * l1) * (f2 / (l2 - l1))
    };
    interp(&even) + a * interp(&odd)
}

/// `sinh(z)/z`, with a series near the origin.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-2 {
        let z2 = z * z;
        1.0 + z2 / 6.0 * (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0 * (1.0 + z2 / 72.0)))
    } else {
        z.sinh() / z
    }
}

/// Fundamental matrix by exponentiating `A` and reconstructing the fast
/// oscillation. Valid for any parameters, to leading order in `ε`.
pub fn fundamental_matrix_generic(t: f64, params: &ModelParams) -> FundamentalMatrix {
    let matrix = build_matrix(params);
    let eigen = eigenvalues(params);
    let slow = slow_propagator(&matrix, &eigen, t);
    let w = params.omega_bar();

    let mut init = Matrix4::<Complex64>::zeros();
    let mut recon = Matrix4::<Complex64>::zeros();
    for mode in Mode::BOTH {
        let o = mode.offset();
        let kw = mode.kf() * w;
        // ξ± = ½[x ∓ i p/(kω̄)]
        init[(o, o)] = 0.5.into();
        init[(o, o + 1)] = -I * (0.5 / kw);
        init[(o + 1, o)] = 0.5.into();
        init[(o + 1, o + 1)] = I * (0.5 / kw);

        let e = Complex64::from_polar(1.0, kw * t);
        recon[(o, o)] = e;
        recon[(o, o + 1)] = e.conj();
        recon[(o + 1, o)] = I * kw * e;
        recon[(o + 1, o + 1)] = -I * kw * e.conj();
    }
    let full = recon * slow * init;
    FundamentalMatrix::new(full.map(|z| z.re), t)
}

/// Fast-time kernels `C_k^±`, `S_k^±` at slow argument `s` and phase
/// `kω̄t`, together with their fast-time derivatives.
struct Kernels {
    ch: f64,
    sh: f64,
    cos: f64,
    sin: f64,
    freq: f64,
}

impl Kernels {
    fn new(slow_arg: f64, freq: f64, t: f64) -> Self {
        let (sin, cos) = (freq * t).sin_cos();
        Self {
            ch: slow_arg.cosh(),
            sh: slow_arg.sinh(),
            cos,
            sin,
            freq,
        }
    }
    /// `cosh·cos ± sinh·sin`
    fn c(&self, sign: f64) -> f64 {
        self.ch * self.cos + sign * self.sh * self.sin
    }
    /// `sinh·cos ± cosh·sin`
    fn s(&self, sign: f64) -> f64 {
        self.sh * self.cos + sign * self.ch * self.sin
    }
    /// `∂C^±/∂t = ±kω̄ S^∓`
    fn dc(&self, sign: f64) -> f64 {
        sign * self.freq * self.s(-sign)
    }
    /// `∂S^±/∂t = ±kω̄ C^∓`
    fn ds(&self, sign: f64) -> f64 {
        sign * self.freq * self.c(-sign)
    }
}

/// Closed-form solution at `δ = Δ = 0`, momenta identified with velocities.
pub fn fundamental_matrix_exact_resonance(t: f64, params: &ModelParams) -> Result<FundamentalMatrix> {
    require_exact_resonance(params)?;
    let nu = params.nu();
    let mu = params.mu();
    let rho = (2.0 * nu - 1.0).sqrt();
    let tau = params.slow_time(t);
    let w = params.omega_bar();
    let (sr, cr) = (rho * tau).sin_cos();
    let sn = sr / rho;

    let k1 = Kernels::new(tau, w, t);
    let k3 = Kernels::new(tau, 3.0 * w, t);
    let m8 = 8.0 * mu * sn;

    #[rustfmt::skip]
    let entries = Matrix4::new(
        k1.c(-1.0) * cr + k1.s(-1.0) * sn, -(k1.s(-1.0) * cr + k1.c(-1.0) * sn),
        3.0 * m8 * k1.s(-1.0),             m8 * k1.c(-1.0),

        k1.dc(-1.0) * cr + k1.ds(-1.0) * sn, -(k1.ds(-1.0) * cr + k1.dc(-1.0) * sn),
        3.0 * m8 * k1.ds(-1.0),              m8 * k1.dc(-1.0),

        -m8 * k3.s(1.0),                   m8 * k3.c(1.0),
        k3.c(1.0) * cr - k3.s(1.0) * sn,   (k3.s(1.0) * cr - k3.c(1.0) * sn) / 3.0,

        -m8 * k3.ds(1.0),                  m8 * k3.dc(1.0),
        k3.dc(1.0) * cr - k3.ds(1.0) * sn, (k3.ds(1.0) * cr - k3.dc(1.0) * sn) / 3.0,
    );
    Ok(FundamentalMatrix::new(entries, t))
}

pub(crate) fn require_exact_resonance(params: &ModelParams) -> Result<()> {
    let tol = 1e-12 * params.epsilon();
    if params.delta().abs() > tol || params.big_delta().abs() > tol {
        return Err(Error::Regime(format!(
            "exact resonance needs delta = big_delta = 0, got ({}, {})",
            params.delta(),
            params.big_delta()
        )));
    }
    if params.nu() <= 0.5 {
        return Err(Error::Regime(format!(
            "exact-resonance closed forms need nu > 1/2, got {}",
            params.nu()
        )));
    }
    Ok(())
}

/// Growth rate `R = 1 − 2/ν` and frequency `J = ν/2 + 1` (units of `ε`) of
/// the asymmetric point `δ̃ = 1`, `γ = −ν/2`, to first order in `1/ν`.
pub fn asymmetric_rates(nu: f64) -> (f64, f64) {
    (1.0 - 2.0 / nu, 0.5 * nu + 1.0)
}

pub(crate) fn require_asymmetric(params: &ModelParams) -> Result<()> {
    let nu = params.nu();
    if nu <= 2.0 {
        return Err(Error::Regime(format!("asymmetric closed forms need nu >> 1, got {nu}")));
    }
    let dt_err = (params.delta_t() - 1.0).abs();
    let g_err = (params.gamma_t() + 0.5 * nu).abs();
    if dt_err > 1e-9 || g_err > 1e-9 * nu.max(1.0) {
        return Err(Error::Regime(format!(
            "asymmetric closed forms need delta_t = 1 and gamma = -nu/2, got delta_t = {}, gamma = {}",
            params.delta_t(),
            params.gamma_t()
        )));
    }
    Ok(())
}

/// Parameters on the asymmetric point for a given `ε` and `ν`.
pub fn asymmetric_params(epsilon: f64, nu: f64) -> Result<ModelParams> {
    ModelParams::from_normalized(epsilon, 1.0, 3.0 - 0.5 * nu, nu)
}

/// Closed-form solution at `δ̃ = 1`, `γ = −ν/2`, accurate to `O(1/ν)`.
pub fn fundamental_matrix_asymmetric(t: f64, params: &ModelParams) -> Result<FundamentalMatrix> {
    require_asymmetric(params)?;
    let nu = params.nu();
    let mu = params.mu();
    let (r, j) = asymmetric_rates(nu);
    let q = 2.0 / nu;
    let tau = params.slow_time(t);
    let w = params.omega_bar();

    let k1 = Kernels::new(2.0 * r * tau, w, t);
    let k3 = Kernels::new(2.0 * r * tau, 3.0 * w, t);
    // free oscillation at the shifted phase φ_k = kω̄t − 2Jτ
    let (s1, c1) = (w * t - 2.0 * j * tau).sin_cos();
    let (s3, c3) = (3.0 * w * t - 2.0 * j * tau).sin_cos();
    let (dc1, ds1) = (-w * s1, w * c1);
    let (dc3, ds3) = (-3.0 * w * s3, 3.0 * w * c3);

    #[rustfmt::skip]
    let entries = Matrix4::new(
        (1.0 - q) * k1.c(-1.0) + q * c1,   -((1.0 - q) * k1.s(-1.0) - q * s1),
        (k1.c(-1.0) - c1) / (4.0 * mu),    -(k1.s(-1.0) + s1) / (12.0 * mu),

        (1.0 - q) * k1.dc(-1.0) + q * dc1, -((1.0 - q) * k1.ds(-1.0) - q * ds1),
        (k1.dc(-1.0) - dc1) / (4.0 * mu),  -(k1.ds(-1.0) + ds1) / (12.0 * mu),

        (k3.c(-1.0) - c3) / (12.0 * mu),   -(k3.s(-1.0) + s3) / (12.0 * mu),
        (1.0 - q) * c3 + q * k3.c(-1.0),   ((1.0 - q) * s3 - q * k3.s(-1.0)) / 3.0,

        (k3.dc(-1.0) - dc3) / (12.0 * mu), -(k3.ds(-1.0) + ds3) / (12.0 * mu),
        (1.0 - q) * dc3 + q * k3.dc(-1.0), ((1.0 - q) * ds3 - q * k3.ds(-1.0)) / 3.0,
    );
    Ok(FundamentalMatrix::new(entries, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::NU_CUBE;
    use approx::assert_relative_eq;

    fn params(eps: f64, dt: f64, bdt: f64, nu: f64) -> ModelParams {
        ModelParams::from_normalized(eps, dt, bdt, nu).unwrap()
    }

    #[test]
    fn matrix_pattern() {
        let m = build_matrix(&params(1e-3, 0.0, 0.0, NU_CUBE));
        let e = m.entries();
        assert_relative_eq!(e[(0, 2)].im, 5e-3, max_relative = 1e-14);
        assert_eq!(e[(0, 2)].re, 0.0);
        assert_eq!(m.trace(), Complex64::ZERO);

        let m = build_matrix(&params(1e-3, 0.0, 0.0, 0.0));
        let e = m.entries();
        for i in 0..4 {
            for j in 0..4 {
                if i >= 2 || j >= 2 {
                    assert_eq!(e[(i, j)], Complex64::ZERO);
                }
            }
        }
        assert_eq!(e[(0, 1)], Complex64::new(0.0, 1e-3));
    }

    #[test]
    fn single_mode_increment() {
        let ev = eigenvalues(&params(1e-3, 0.0, 0.0, 0.0));
        assert_eq!(ev.lambda_plus, Complex64::new(1e-3, 0.0));
    }

    #[test]
    fn exact_resonance_increment_is_half() {
        let eps = 1e-3;
        let ev = eigenvalues(&params(eps, 0.0, 0.0, NU_CUBE));
        let rho = (2.0 * NU_CUBE - 1.0).sqrt();
        assert_relative_eq!(ev.lambda_plus.re, eps / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ev.lambda_minus.re, eps / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ev.lambda_plus.im.abs(), eps * rho / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn asymmetric_point_eigenvalues() {
        let nu = NU_CUBE;
        let ev = eigenvalues_raw(1.0, 1.0, 3.0 - nu / 2.0, nu);
        assert!(ev.lambda_plus.im.abs() < 1e-12);
        let (r, j) = asymmetric_rates(nu);
        assert!((ev.lambda_plus.re - r).abs() < 4.0 / (nu * nu));
        assert!(ev.lambda_minus.re.abs() < 1e-12);
        assert!((ev.lambda_minus.im.abs() - j).abs() < 4.0 / nu);
    }

    #[test]
    fn numeric_spectrum_matches() {
        for (dt, bdt, nu) in [(0.0, 0.0, NU_CUBE), (1.0, -5.3, NU_CUBE), (2.5, 8.0, 3.0), (0.3, 0.1, 0.2)] {
            let p = params(1e-2, dt, bdt, nu);
            let ev = eigenvalues(&p);
            let num = build_matrix(&p).numeric_eigenvalues().unwrap();
            let scale = ev.lambda_plus.norm().max(ev.lambda_minus.norm());
            for z in ev.spectrum() {
                let d = num.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                assert!(d <= 1e-10 * scale, "{z} missing, distance {d}");
            }
        }
    }

    #[test]
    fn inner_and_outer_increments() {
        assert_eq!(increment_asymmetric_inner(0.4, f64::INFINITY), 1.0 - 0.16);
        assert_relative_eq!(increment_asymmetric_inner(0.5, 4.0), 1.0, max_relative = 1e-15);
        assert_eq!(increment_asymmetric_inner(0.0, 2.0), 0.0);
        assert_relative_eq!(increment_asymmetric_outer(2.0, 0.0, 1e8).unwrap(), 1.0, max_relative = 1e-7);
        assert_relative_eq!(increment_asymmetric_outer(100.0, 0.0, 2.0).unwrap(), 2.0 / 20002.0);
        assert!(increment_asymmetric_outer(2.0, 1.0, 10.0).is_err());
        assert!(increment_asymmetric_outer(2.0, 1.0 - 1e-12, 10.0).unwrap() < 1e-5);
    }

    #[test]
    fn symmetric_line_reduces_at_origin() {
        let z = increment_symmetric_line(0.0, NU_CUBE);
        assert_eq!(z.re, 0.5);
        let z = increment_symmetric_line(100.0, 2.0);
        assert_relative_eq!(z.re, 0.5 * (2.0f64 / 20002.0).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn identity_at_zero() {
        let p = params(1e-3, 0.0, 0.0, NU_CUBE);
        let id = FundamentalMatrix::identity();
        assert!(fundamental_matrix_generic(0.0, &p).max_abs_diff(&id) < 1e-15);
        assert!(fundamental_matrix_exact_resonance(0.0, &p).unwrap().max_abs_diff(&id) < 1e-15);
        let q = asymmetric_params(1e-3, NU_CUBE).unwrap();
        assert!(fundamental_matrix_asymmetric(0.0, &q).unwrap().max_abs_diff(&id) <= 10.0 / (NU_CUBE * NU_CUBE));
    }

    #[test]
    fn closed_form_regimes_enforced() {
        let p = params(1e-3, 0.5, 0.0, NU_CUBE);
        assert!(fundamental_matrix_exact_resonance(1.0, &p).is_err());
        assert!(fundamental_matrix_asymmetric(1.0, &p).is_err());
        let p = params(1e-3, 0.0, 0.0, 0.4);
        assert!(fundamental_matrix_exact_resonance(1.0, &p).is_err());
    }

    #[test]
    fn generic_matches_exact_resonance() {
        let eps = 1e-3;
        let p = params(eps, 0.0, 0.0, NU_CUBE);
        for tau in [0.1, 0.77, 1.5, 3.0] {
            let t = p.fast_time(tau);
            let g = fundamental_matrix_generic(t, &p);
            let e = fundamental_matrix_exact_resonance(t, &p).unwrap();
            assert!(g.max_abs_diff(&e) <= 1e-9, "tau {tau}: {}", g.max_abs_diff(&e));
        }
    }

    #[test]
    fn decoupled_single_mode_solution() {
        // ν = 0: mode 1 is the classic degenerate parametric amplifier,
        // mode 3 rotates freely at 3ω̄
        let eps = 2e-3;
        let p = params(eps, 0.0, 0.0, 0.0);
        let t = p.fast_time(1.3);
        let m = fundamental_matrix_generic(t, &p);
        let e = m.entries();
        let (ch, sh) = ((eps * t).cosh(), (eps * t).sinh());
        let (s, c) = t.sin_cos();
        // ξ⁺(t) = ξ⁺cosh εt + iξ⁻sinh εt
        assert_relative_eq!(e[(0, 0)], ch * c - sh * s, epsilon = 1e-12);
        assert_relative_eq!(e[(0, 1)], ch * s - sh * c, epsilon = 1e-12);
        let (s3, c3) = (3.0 * t).sin_cos();
        assert_relative_eq!(e[(2, 2)], c3, epsilon = 1e-12);
        assert_relative_eq!(e[(2, 3)], s3 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(e[(3, 2)], -3.0 * s3, epsilon = 1e-12);
        assert_eq!(e[(0, 2)], 0.0);
    }

    #[test]
    fn interpolation_agrees_with_pade() {
        for (dt, bdt, nu) in [(0.0, 0.0, NU_CUBE), (1.0, 3.0 - NU_CUBE / 2.0, NU_CUBE), (-2.0, 4.0, 7.0)] {
            let p = params(1e-3, dt, bdt, nu);
            let a = build_matrix(&p);
            let ev = eigenvalues(&p);
            let t = p.fast_time(1.7);
            let x = slow_propagator(&a, &ev, t);
            let y = (a.entries() * Complex64::new(t, 0.0)).exp();
            let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let diff = (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-11 * scale, "{diff} vs {scale}");
        }
    }

    #[test]
    fn degenerate_spectrum_uses_fallback() {
        // b = 0 on the hyperbola: λ₋ = 0 double
        let nu = NU_CUBE;
        let dt = 0.0;
        let gamma = nu / (2.0 * (1.0 - dt));
        let p = params(1e-3, dt, gamma + 3.0 * dt, nu);
        let a = build_matrix(&p);
        let ev = eigenvalues(&p);
        let t = p.fast_time(1.0);
        let x = slow_propagator(&a, &ev, t);
        let y = (a.entries() * Complex64::new(t, 0.0)).exp();
        let diff = (x - y).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn draw() -> impl Strategy<Value = (f64, f64, f64, f64)> {
            (1e-4f64..0.05, -6.0f64..6.0, -12.0f64..12.0, 0.0f64..200.0)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn c_is_a2_minus_b((eps, dt, bdt, nu) in draw()) {
                let abc = Abc::new(eps, eps * dt, eps * bdt, nu);
                let lhs = abc.a * abc.a - abc.b;
                let scale = (abc.a * abc.a).max(abc.b.abs()).max(abc.c.abs());
                prop_assert!((lhs - abc.c).abs() <= 1e-12 * scale);
            }

            #[test]
            fn branch_ordering((eps, dt, bdt, nu) in draw()) {
                let ev = eigenvalues_raw(eps, eps * dt, eps * bdt, nu);
                prop_assert!(ev.lambda_minus.re >= 0.0);
                prop_assert!(ev.lambda_plus.re >= ev.lambda_minus.re);
            }

            #[test]
            fn eigenvalues_square_to_half_a_plus_root_c((eps, dt, bdt, nu) in draw()) {
                let ev = eigenvalues_raw(eps, eps * dt, eps * bdt, nu);
                let sum = ev.lambda_plus.powi(2) + ev.lambda_minus.powi(2);
                let scale = ev.abc.a.abs().max(ev.lambda_plus.norm_sqr());
                prop_assert!((sum.re - ev.abc.a).abs() <= 1e-12 * scale);
                prop_assert!(sum.im.abs() <= 1e-12 * scale);
            }
        }
    }
}
