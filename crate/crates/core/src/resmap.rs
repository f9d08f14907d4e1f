//! Generation regions in the plane of normalized detunings `(δ̃, Δ̃) = (δ/ε, Δ/ε)`.
//!
//! Every quantity here is in units of `ε`: the eigenvalue problem is
//! homogeneous in `(ε, δ, Δ)`, so one map serves all drive amplitudes.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::slowamp::{eigenvalues_raw, Abc};

/// Relative size below which `b` or `c` count as zero.
const TIE_TOLERANCE: f64 = 1e-12;
/// Absolute tolerance of the bisection for `η_c`.
const ETA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningPoint {
    pub delta_t: f64,
    pub big_delta_t: f64,
}

impl DetuningPoint {
    pub fn new(delta_t: f64, big_delta_t: f64) -> Self {
        Self { delta_t, big_delta_t }
    }

    /// Point with the given `δ̃` and `γ = Δ̃ − 3δ̃`.
    pub fn from_gamma(delta_t: f64, gamma: f64) -> Self {
        Self::new(delta_t, gamma + 3.0 * delta_t)
    }

    /// `η = Δ̃ − 4δ̃`, distance from the symmetric line.
    pub fn eta(&self) -> f64 {
        self.big_delta_t - 4.0 * self.delta_t
    }

    /// `γ = Δ̃ − 3δ̃`, detuning of the upper mode from the third drive harmonic.
    pub fn gamma(&self) -> f64 {
        self.big_delta_t - 3.0 * self.delta_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// `c < 0`: both modes grow together.
    SymmetricResonance,
    /// `c ≥ 0`, `b < 0`: the first mode dominates.
    AsymmetricResonance,
    NoGeneration,
}

impl RegionKind {
    pub fn label(self) -> &'static str {
        match self {
            RegionKind::SymmetricResonance => "symmetric",
            RegionKind::AsymmetricResonance => "asymmetric",
            RegionKind::NoGeneration => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionVerdict {
    pub kind: RegionKind,
    /// `Re λ₊/ε`; zero exactly when there is no generation.
    pub increment: f64,
    /// `(a, b, c)` with `ε = 1`.
    pub abc: Abc,
}

fn require_nu(nu: f64) -> Result<()> {
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(invalid("nu", format!("the region classifier needs nu > 1, got {nu}")));
    }
    Ok(())
}

/// Classifies a point by the signs of `b` and `c`. `epsilon` only has to be
/// a valid amplitude; the verdict is expressed in units of it.
pub fn classify(point: DetuningPoint, nu: f64, epsilon: f64) -> Result<RegionVerdict> {
    require_nu(nu)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(invalid("epsilon", format!("must be finite and > 0, got {epsilon}")));
    }
    let eigen = eigenvalues_raw(1.0, point.delta_t, point.big_delta_t, nu);
    let abc = eigen.abc;
    let scale = (abc.a * abc.a).max(abc.b.abs()).max(abc.c.abs());
    let tie = TIE_TOLERANCE * scale;

    let kind = if abc.c < -tie {
        RegionKind::SymmetricResonance
    } else if abc.c.abs() <= tie {
        RegionKind::NoGeneration
    } else if abc.b < -tie {
        RegionKind::AsymmetricResonance
    } else {
        RegionKind::NoGeneration
    };

    let increment = match kind {
        RegionKind::NoGeneration => 0.0,
        _ => eigen.increment(),
    };
    debug_assert!(
        kind == RegionKind::NoGeneration || increment > 0.0,
        "verdict {kind:?} with increment {increment} at {point:?}"
    );
    Ok(RegionVerdict { kind, increment, abc })
}

/// `c` in units of `ε⁴` as a function of `η` at fixed `δ̃`.
fn c_of_eta(eta: f64, delta_t: f64, nu: f64) -> f64 {
    let q = 1.0 + (2.0 * delta_t + eta) * eta;
    2.0 * nu * (eta * eta - 1.0) + q * q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaCritical {
    /// Large-`ν` estimate `√(ν/(ν + 2δ̃²))`.
    pub approx: f64,
    /// Smallest positive root of `c(η) = 0`.
    pub exact: Option<f64>,
}

/// Half-width in `η` of the symmetric band at a given `δ̃`.
pub fn eta_critical(delta_t: f64, nu: f64) -> Result<EtaCritical> {
    require_nu(nu)?;
    let approx = (nu / (nu + 2.0 * delta_t * delta_t)).sqrt();

    // c(0) = 1 − 2ν < 0 and c(1) = (2 + 2δ̃)² ≥ 0, so (0, 1] brackets a root;
    // a coarse scan picks out the first sign change in case of several
    const SCAN: usize = 1024;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=SCAN {
        let eta = i as f64 / SCAN as f64;
        if c_of_eta(eta, delta_t, nu) >= 0.0 {
            hi = Some(eta);
            break;
        }
        lo = eta;
    }
    let exact = hi.map(|mut hi| {
        while hi - lo > ETA_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if c_of_eta(mid, delta_t, nu) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    });
    Ok(EtaCritical { approx, exact })
}

/// Values of `γ` with `b < 0` at fixed `δ̃`, bounded by the hyperbolas
/// `γ = ν/(2(1 − δ̃))` and `γ = −ν/(2(1 + δ̃))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperbolaBounds {
    /// `|δ̃| > 1`: `lower < γ < upper`.
    Between { lower: f64, upper: f64 },
    /// `|δ̃| < 1`: `γ < below` or `γ > above`.
    Outside { below: f64, above: f64 },
    /// `δ̃ = −1`: one branch has gone to infinity, leaving `γ > bound`.
    PoleAbove { bound: f64 },
    /// `δ̃ = 1`: leaving `γ < bound`.
    PoleBelow { bound: f64 },
}

impl HyperbolaBounds {
    pub fn contains(&self, gamma: f64) -> bool {
        match *self {
            HyperbolaBounds::Between { lower, upper } => lower < gamma && gamma < upper,
            HyperbolaBounds::Outside { below, above } => gamma < below || gamma > above,
            HyperbolaBounds::PoleAbove { bound } => gamma > bound,
            HyperbolaBounds::PoleBelow { bound } => gamma < bound,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, HyperbolaBounds::PoleAbove { .. } | HyperbolaBounds::PoleBelow { .. })
    }
}

pub fn hyperbola_bounds(delta_t: f64, nu: f64) -> Result<HyperbolaBounds> {
    require_nu(nu)?;
    let right = nu / (2.0 * (1.0 - delta_t));
    let left = -nu / (2.0 * (1.0 + delta_t));
    Ok(if delta_t == 1.0 {
        HyperbolaBounds::PoleBelow { bound: left }
    } else if delta_t == -1.0 {
        HyperbolaBounds::PoleAbove { bound: right }
    } else if delta_t.abs() > 1.0 {
        HyperbolaBounds::Between { lower: right, upper: left }
    } else {
        HyperbolaBounds::Outside { below: left, above: right }
    })
}

/// Width `ν/(δ̃² − 1)` in `Δ̃` of the asymmetric region at fixed `|δ̃| > 1`.
pub fn width_in_big_delta(delta_t: f64, nu: f64) -> Result<f64> {
    require_nu(nu)?;
    if delta_t.abs() <= 1.0 {
        return Err(Error::Regime(format!(
            "the asymmetric region is unbounded in big_delta_t for |delta_t| <= 1, got {delta_t}"
        )));
    }
    Ok(nu / (delta_t * delta_t - 1.0))
}

/// Widths in `δ̃` of the two asymmetric intervals at fixed `Δ̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaWidths {
    pub sigma: f64,
    /// `1 + σ`
    pub left: f64,
    /// `1 − σ`
    pub right: f64,
}

impl DeltaWidths {
    pub fn smaller(&self) -> f64 {
        self.left.min(self.right)
    }
}

/// `σ = (√((Δ̃+3)² + 6ν) − √((Δ̃−3)² + 6ν))/6`, evaluated without cancellation.
pub fn width_in_delta(big_delta_t: f64, nu: f64) -> Result<DeltaWidths> {
    require_nu(nu)?;
    let up = ((big_delta_t + 3.0).powi(2) + 6.0 * nu).sqrt();
    let down = ((big_delta_t - 3.0).powi(2) + 6.0 * nu).sqrt();
    let sigma = 2.0 * big_delta_t / (up + down);
    Ok(DeltaWidths {
        sigma,
        left: 1.0 + sigma,
        right: 1.0 - sigma,
    })
}

/// Row-major map: row `i` is `Δ̃ = big_delta_t[i]`, column `j` is `δ̃ = delta_t[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub delta_t: Vec<f64>,
    pub big_delta_t: Vec<f64>,
    pub cells: Vec<RegionVerdict>,
    pub nu: f64,
}

impl SweepGrid {
    pub fn rows(&self) -> usize {
        self.big_delta_t.len()
    }

    pub fn cols(&self) -> usize {
        self.delta_t.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &RegionVerdict {
        &self.cells[row * self.cols() + col]
    }

    /// Number of 4-connected clusters of cells of the given kind.
    pub fn component_count(&self, kind: RegionKind) -> usize {
        let (rows, cols) = (self.rows(), self.cols());
        let mut seen = vec![false; rows * cols];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..rows * cols {
            if seen[start] || self.cells[start].kind != kind {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (r, c) = (idx / cols, idx % cols);
                let mut visit = |r: usize, c: usize| {
                    let j = r * cols + c;
                    if !seen[j] && self.cells[j].kind == kind {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if r > 0 {
                    visit(r - 1, c);
                }
                if r + 1 < rows {
                    visit(r + 1, c);
                }
                if c > 0 {
                    visit(r, c - 1);
                }
                if c + 1 < cols {
                    visit(r, c + 1);
                }
            }
        }
        count
    }
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Classifies every node of a regular grid, in parallel.
pub fn sweep_grid(
    delta_range: (f64, f64),
    big_delta_range: (f64, f64),
    resolution: (usize, usize),
    nu: f64,
    epsilon: f64,
) -> Result<SweepGrid> {
    require_nu(nu)?;
    for (name, r) in [("delta_range", delta_range), ("big_delta_range", big_delta_range)] {
        if !r.0.is_finite() || !r.1.is_finite() || r.0 >= r.1 {
            return Err(invalid(name, format!("need finite lo < hi, got {r:?}")));
        }
    }
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(invalid("resolution", "need at least 2 points per axis"));
    }
    let delta_t = linspace(delta_range, resolution.0);
    let big_delta_t = linspace(big_delta_range, resolution.1);
    let cols = delta_t.len();
    let cells = (0..cols * big_delta_t.len())
        .into_par_iter()
        .map(|idx| {
            let p = DetuningPoint::new(delta_t[idx % cols], big_delta_t[idx / cols]);
            classify(p, nu, epsilon)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        delta_t,
        big_delta_t,
        cells,
        nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::NU_CUBE;
    use crate::slowamp::{asymmetric_rates, increment_symmetric_line};
    use approx::assert_relative_eq;

    #[test]
    fn exact_resonance_point() {
        let v = classify(DetuningPoint::new(0.0, 0.0), NU_CUBE, 1e-3).unwrap();
        assert_eq!(v.kind, RegionKind::SymmetricResonance);
        assert_relative_eq!(v.increment, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn asymmetric_point() {
        let v = classify(DetuningPoint::from_gamma(1.0, -NU_CUBE / 2.0), NU_CUBE, 1e-3).unwrap();
        assert_eq!(v.kind, RegionKind::AsymmetricResonance);
        let (r, _) = asymmetric_rates(NU_CUBE);
        assert!((v.increment - r).abs() < 4.0 / (NU_CUBE * NU_CUBE));
    }

    #[test]
    fn quiet_point() {
        let v = classify(DetuningPoint::new(0.0, 5.0), NU_CUBE, 1e-3).unwrap();
        assert_eq!(v.kind, RegionKind::NoGeneration);
        assert_eq!(v.increment, 0.0);
        assert!(v.abc.c > 0.0 && v.abc.b > 0.0);
        assert_eq!(eigenvalues_raw(1.0, 0.0, 5.0, NU_CUBE).increment(), 0.0);
    }

    #[test]
    fn classifier_input_checks() {
        assert!(classify(DetuningPoint::new(0.0, 0.0), 1.0, 1e-3).is_err());
        assert!(classify(DetuningPoint::new(0.0, 0.0), NU_CUBE, 0.0).is_err());
        assert!(eta_critical(0.0, 0.5).is_err());
    }

    #[test]
    fn eta_critical_at_zero_detuning() {
        // η_c² solves η⁴ + (2ν + 2)η² + 1 − 2ν = 0
        let nu = NU_CUBE;
        let root = (-(nu + 1.0) + (nu * nu + 4.0 * nu).sqrt()).sqrt();
        let e = eta_critical(0.0, nu).unwrap();
        assert!((e.exact.unwrap() - root).abs() < 1e-11);
        assert!((root - 0.944_75).abs() < 1e-5);
        assert_eq!(e.approx, 1.0);
        for nu in [20.0, 50.0, 200.0] {
            let e = eta_critical(0.0, nu).unwrap();
            assert!((e.exact.unwrap() - e.approx).abs() <= 5.0 / nu);
        }
        let e = eta_critical(0.0, 1e9).unwrap();
        assert!((e.approx - e.exact.unwrap()).abs() < 1e-8);
        let e = eta_critical(40.0, NU_CUBE).unwrap();
        assert_relative_eq!(e.approx, (NU_CUBE / 3200.0).sqrt(), max_relative = 0.01);
    }

    #[test]
    fn eta_critical_is_band_edge() {
        for dt in [-1.3, 0.0, 0.7, 2.5] {
            let e = eta_critical(dt, NU_CUBE).unwrap().exact.unwrap();
            let inside = DetuningPoint::new(dt, 4.0 * dt + e - 1e-6);
            let outside = DetuningPoint::new(dt, 4.0 * dt + e + 1e-6);
            assert!(classify(inside, NU_CUBE, 1.0).unwrap().abc.c < 0.0);
            assert!(classify(outside, NU_CUBE, 1.0).unwrap().abc.c > 0.0);
        }
    }

    #[test]
    fn hyperbola_examples() {
        let h = hyperbola_bounds(0.0, NU_CUBE).unwrap();
        assert_eq!(h, HyperbolaBounds::Outside { below: -25.0 / 3.0, above: 25.0 / 3.0 });
        let HyperbolaBounds::Between { lower, upper } = hyperbola_bounds(2.0, NU_CUBE).unwrap() else {
            panic!("expected a bounded interval");
        };
        assert_relative_eq!(lower, -25.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(upper, -25.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(upper - lower, width_in_big_delta(2.0, NU_CUBE).unwrap(), max_relative = 1e-14);
        let h = hyperbola_bounds(1.0, NU_CUBE).unwrap();
        assert!(h.is_pole());
        assert!(h.contains(-NU_CUBE / 2.0));
        assert!(!h.contains(0.0));
        assert!(hyperbola_bounds(-1.0, NU_CUBE).unwrap().contains(NU_CUBE / 3.0));
        assert!(width_in_big_delta(0.5, NU_CUBE).is_err());
    }

    #[test]
    fn hyperbolas_are_zeros_of_b() {
        for dt in [-3.0, -0.4, 0.0, 0.9, 2.0, 5.5] {
            let (lo, hi) = match hyperbola_bounds(dt, NU_CUBE).unwrap() {
                HyperbolaBounds::Between { lower, upper } => (lower, upper),
                HyperbolaBounds::Outside { below, above } => (below, above),
                _ => unreachable!(),
            };
            for g in [lo, hi] {
                let abc = Abc::new(1.0, dt, g + 3.0 * dt, NU_CUBE);
                let scale = abc.a * abc.a;
                assert!(abc.b.abs() <= 1e-9 * scale, "dt={dt} g={g} b={}", abc.b);
            }
        }
    }

    #[test]
    fn hyperbola_set_matches_sign_of_b() {
        for dt in [-4.0, -1.0, -0.5, 0.3, 1.0, 3.0] {
            let h = hyperbola_bounds(dt, NU_CUBE).unwrap();
            for i in -200..=200 {
                let g = i as f64 * 0.173 + 0.01;
                let b = Abc::new(1.0, dt, g + 3.0 * dt, NU_CUBE).b;
                assert_eq!(h.contains(g), b < 0.0, "dt={dt} g={g}");
            }
        }
    }

    #[test]
    fn delta_widths_against_quadratic_roots() {
        for bdt in [-20.0, -3.0, 0.0, 1.5, 7.0, 100.0] {
            let w = width_in_delta(bdt, NU_CUBE).unwrap();
            let roots = |p: f64, r: f64| {
                let disc = (p * p - 24.0 * r).sqrt();
                ((p - disc) / 12.0, (p + disc) / 12.0)
            };
            // 6δ̃² − 2(Δ̃+3)δ̃ + 2Δ̃ − ν = 0 and 6δ̃² − 2(Δ̃−3)δ̃ − 2Δ̃ − ν = 0
            let (a_lo, a_hi) = roots(2.0 * (bdt + 3.0), 2.0 * bdt - NU_CUBE);
            let (b_lo, b_hi) = roots(2.0 * (bdt - 3.0), -2.0 * bdt - NU_CUBE);
            assert_relative_eq!(a_lo - b_lo, w.left, epsilon = 1e-12);
            assert_relative_eq!(a_hi - b_hi, w.right, epsilon = 1e-12);
            assert_eq!(w.left + w.right, 2.0);
        }
        assert_eq!(width_in_delta(0.0, NU_CUBE).unwrap().sigma, 0.0);
    }

    #[test]
    fn small_delta_width_far_out() {
        let bdt = 1e4;
        let w = width_in_delta(bdt, NU_CUBE).unwrap();
        assert_relative_eq!(w.smaller(), 3.0 * NU_CUBE / (bdt * bdt), max_relative = 1e-3);
    }

    #[test]
    fn symmetric_line_increment() {
        for dt in [0.0, 0.5, 2.0, 5.0] {
            let v = classify(DetuningPoint::new(dt, 4.0 * dt), NU_CUBE, 1.0).unwrap();
            let approx = increment_symmetric_line(dt, NU_CUBE).re;
            assert_relative_eq!(v.increment, approx, max_relative = 3.0 / NU_CUBE);
        }
    }

    #[test]
    fn increments_vanish_at_edges() {
        // walk across the upper band edge at δ̃ = 0.5
        let e = eta_critical(0.5, NU_CUBE).unwrap().exact.unwrap();
        let mut last = f64::INFINITY;
        for k in (1..=6).rev() {
            let off = 10f64.powi(-k);
            let v = classify(DetuningPoint::new(0.5, 2.0 + e - off), NU_CUBE, 1.0).unwrap();
            assert_eq!(v.kind, RegionKind::SymmetricResonance);
            let _ = last;
            last = v.increment;
        }
        assert!(last > 0.0);
        let near = classify(DetuningPoint::new(0.5, 2.0 + e - 1e-8), NU_CUBE, 1.0).unwrap();
        let far = classify(DetuningPoint::new(0.5, 2.0 + e - 1e-2), NU_CUBE, 1.0).unwrap();
        assert!(near.increment < far.increment);
        assert!(near.increment < 1e-3);
    }

    #[test]
    fn sweep_is_row_major_and_deterministic() {
        let g = sweep_grid((-6.0, 6.0), (-6.0, 6.0), (13, 7), NU_CUBE, 1e-3).unwrap();
        assert_eq!(g.cells.len(), 91);
        assert_eq!(g.delta_t[12], 6.0);
        assert_eq!(g.big_delta_t[6], 6.0);
        let direct = classify(DetuningPoint::new(g.delta_t[4], g.big_delta_t[2]), NU_CUBE, 1e-3).unwrap();
        assert_eq!(*g.cell(2, 4), direct);
        let again = sweep_grid((-6.0, 6.0), (-6.0, 6.0), (13, 7), NU_CUBE, 1e-3).unwrap();
        assert_eq!(g, again);
        assert!(sweep_grid((0.0, 0.0), (-1.0, 1.0), (5, 5), NU_CUBE, 1e-3).is_err());
        assert!(sweep_grid((0.0, 1.0), (-1.0, 1.0), (1, 5), NU_CUBE, 1e-3).is_err());
    }

    #[test]
    fn weak_coupling_far_detuning_is_quiet() {
        let g = sweep_grid((20.0, 30.0), (-30.0, -20.0), (11, 11), 1.2, 1e-3).unwrap();
        assert!(g.cells.iter().all(|c| c.kind == RegionKind::NoGeneration));
    }

    #[test]
    fn figure_topology() {
        let g = sweep_grid((-6.0, 6.0), (-6.0, 6.0), (241, 241), NU_CUBE, 1e-3).unwrap();
        assert_eq!(g.component_count(RegionKind::SymmetricResonance), 1);
        assert_eq!(g.component_count(RegionKind::AsymmetricResonance), 2);
        for c in &g.cells {
            if c.kind == RegionKind::SymmetricResonance {
                assert!(c.abc.c < 0.0);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn verdict_agrees_with_eigenvalues(dt in -8.0f64..8.0, bdt in -20.0f64..20.0, nu in 1.01f64..300.0) {
                let v = classify(DetuningPoint::new(dt, bdt), nu, 1.0).unwrap();
                let growing = eigenvalues_raw(1.0, dt, bdt, nu).increment() > 1e-12;
                prop_assert_eq!(v.kind != RegionKind::NoGeneration, growing);
                prop_assert_eq!(v.increment > 0.0, v.kind != RegionKind::NoGeneration);
            }

            #[test]
            fn widths_sum_to_two(bdt in -1e3f64..1e3, nu in 1.01f64..1e3) {
                let w = width_in_delta(bdt, nu).unwrap();
                prop_assert!((w.left + w.right - 2.0).abs() <= 1e-12);
            }
        }
    }
}
