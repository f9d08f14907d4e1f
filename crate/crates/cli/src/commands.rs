//! The `eigen`, `evolve`, `pdf`, `map` and `validate` subcommands.

use std::f64::consts::PI;
use std::fmt::Write;

use casimir_duomode::gaussian::{
    asymmetric_observables, default_n_max, exact_resonance_observables, observables_from_covariance,
    pdf_asymptotic, pdf_exact, purity, squeezing, AsymptoticForm, ModeObservables,
};
use casimir_duomode::oracle::{initial_covariance, oracle_trajectory, propagate_covariance, stroboscopic_time};
use casimir_duomode::resmap::{
    classify, eta_critical, hyperbola_bounds, sweep_grid, DetuningPoint, RegionKind, SweepGrid,
};
use casimir_duomode::slowamp::{asymmetric_rates, eigenvalues, fundamental_matrix_generic, FundamentalMatrix};
use casimir_duomode::validation::{run_all, CriterionOutcome, ValidationSettings};
use casimir_duomode::{Error, Mode, ModelParams};
use rayon::prelude::*;

use crate::config::{Layer, Settings, Span};
use crate::error::{CliError, CliResult};
use crate::figures;
use crate::svg::{LinePlot, RegionPlot, Series};
use crate::table::{num, Artifact, Table};

/// Which closed forms describe a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    ExactResonance,
    Asymmetric,
    /// Neither; the slow-amplitude propagator is used directly.
    Generic,
}

impl ClosedForm {
    pub fn of(params: &ModelParams) -> CliResult<Self> {
        let probe = |r: casimir_duomode::Result<ModeObservables>| match r {
            Ok(_) => Ok(true),
            Err(Error::Regime(_)) => Ok(false),
            Err(e) => Err(CliError::from(e)),
        };
        if probe(exact_resonance_observables(0.0, params, Mode::First))? {
            Ok(ClosedForm::ExactResonance)
        } else if probe(asymmetric_observables(0.0, params, Mode::First))? {
            Ok(ClosedForm::Asymmetric)
        } else {
            Ok(ClosedForm::Generic)
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClosedForm::ExactResonance => "exact resonance",
            ClosedForm::Asymmetric => "asymmetric",
            ClosedForm::Generic => "generic propagator",
        }
    }
}

fn from_matrix(m: &FundamentalMatrix, params: &ModelParams) -> [ModeObservables; 2] {
    let sigma = propagate_covariance(m, &initial_covariance(params));
    Mode::BOTH.map(|mode| observables_from_covariance(&sigma, mode))
}

/// Both modes at slow time `tau` from the slow-amplitude theory.
pub fn analytic_observables(params: &ModelParams, tau: f64, form: ClosedForm) -> CliResult<[ModeObservables; 2]> {
    Ok(match form {
        ClosedForm::ExactResonance => [
            exact_resonance_observables(tau, params, Mode::First)?,
            exact_resonance_observables(tau, params, Mode::Third)?,
        ],
        ClosedForm::Asymmetric => [
            asymmetric_observables(tau, params, Mode::First)?,
            asymmetric_observables(tau, params, Mode::Third)?,
        ],
        ClosedForm::Generic => from_matrix(&fundamental_matrix_generic(params.fast_time(tau), params), params),
    })
}

pub fn cmd_eigen(s: &Settings) -> CliResult<String> {
    let p = &s.run.model;
    let eps = p.epsilon();
    let eigen = eigenvalues(p);
    let mut out = String::new();
    let _ = writeln!(out, "epsilon: {}", num(eps));
    let _ = writeln!(out, "delta_t: {}", num(p.delta_t()));
    let _ = writeln!(out, "big_delta_t: {}", num(p.big_delta_t()));
    let _ = writeln!(out, "nu: {}", num(p.nu()));
    let (e2, e4) = (eps * eps, eps.powi(4));
    let _ = writeln!(out, "a/eps^2: {}", num(eigen.abc.a / e2));
    let _ = writeln!(out, "b/eps^4: {}", num(eigen.abc.b / e4));
    let _ = writeln!(out, "c/eps^4: {}", num(eigen.abc.c / e4));
    for (name, lam) in [("lambda_plus", eigen.lambda_plus), ("lambda_minus", eigen.lambda_minus)] {
        let _ = writeln!(out, "{name}/eps: {} {} {}i", num(lam.re / eps), if lam.im < 0.0 { "-" } else { "+" }, num(lam.im.abs() / eps));
    }
    let regime = if p.nu() > 1.0 {
        classify(DetuningPoint::new(p.delta_t(), p.big_delta_t()), p.nu(), eps)?
            .kind
            .label()
    } else if eigen.increment() > 0.0 {
        "growing (nu <= 1, single-mode-like)"
    } else {
        "none"
    };
    let _ = writeln!(out, "regime: {regime}");
    let _ = writeln!(out, "increment/eps: {}", num(eigen.increment() / eps));
    if ClosedForm::of(p)? == ClosedForm::Asymmetric {
        let (r, j) = asymmetric_rates(p.nu());
        let _ = writeln!(out, "asymmetric rates: R = {} (1-2/nu), J = {} (nu/2+1)", num(r), num(j));
    }
    Ok(out)
}

const EVOLVE_QUANTITIES: [&str; 8] = ["E1", "E3", "D1", "D3", "purity1", "purity3", "s1", "s3"];

/// Relative undershoot of `𝒟 ≥ 1/4` tolerated from integration error before
/// the row is treated as infeasible.
const INTEGRATION_SLACK: f64 = 1e-6;

fn settle(obs: &ModeObservables) -> ModeObservables {
    let mut o = *obs;
    if o.iup < 0.25 && o.iup >= 0.25 * (1.0 - INTEGRATION_SLACK) {
        o.iup = 0.25;
    }
    if o.e_tilde * o.e_tilde < o.iup && o.e_tilde * o.e_tilde >= o.iup * (1.0 - INTEGRATION_SLACK) {
        o.e_tilde = o.iup.sqrt();
    }
    o
}

fn quantities(obs: &[ModeObservables; 2]) -> CliResult<[f64; 8]> {
    let obs = [settle(&obs[0]), settle(&obs[1])];
    Ok([
        obs[0].energy(),
        obs[1].energy(),
        obs[0].iup,
        obs[1].iup,
        purity(obs[0].iup)?,
        purity(obs[1].iup)?,
        squeezing(&obs[0])?,
        squeezing(&obs[1])?,
    ])
}

pub fn evolve_header(layer: Layer) -> Vec<String> {
    let mut h = vec!["tau".to_string()];
    match layer {
        Layer::Analytic | Layer::Oracle => h.extend(EVOLVE_QUANTITIES.iter().map(|q| q.to_string())),
        Layer::Both => {
            for suffix in ["analytic", "oracle"] {
                h.extend(EVOLVE_QUANTITIES.iter().map(|q| format!("{q}_{suffix}")));
            }
            h.extend(EVOLVE_QUANTITIES.iter().map(|q| format!("rel_diff_{q}")));
        }
    }
    h
}

/// Per-row quantities for the requested layer(s) and the largest relative
/// energy discrepancy between them, if both were run.
pub struct Evolution {
    pub artifact: Artifact,
    pub max_energy_discrepancy: Option<f64>,
}

pub fn cmd_evolve(s: &Settings) -> CliResult<Evolution> {
    let p = &s.run.model;
    let grid: Vec<f64> = (0..=s.steps).map(|i| s.tau_max * i as f64 / s.steps as f64).collect();
    let mut table = Table::new(evolve_header(s.layer));
    table.meta("epsilon", num(p.epsilon()));
    table.meta("delta_t", num(p.delta_t()));
    table.meta("big_delta_t", num(p.big_delta_t()));
    table.meta("nu", num(p.nu()));
    table.meta("theta1", num(p.theta1()));
    table.meta("theta3", num(p.theta3()));

    let form = ClosedForm::of(p)?;
    if s.layer != Layer::Oracle {
        table.meta("analytic", form.label());
        if form == ClosedForm::Generic {
            let msg = "parameters are at neither closed-form operating point; analytic layer falls back to the generic propagator";
            log::warn!("{msg}");
            table.meta("warning", msg);
        }
    }

    // the oracle is sampled stroboscopically, so all layers share its times
    let (taus, oracle) = if s.layer == Layer::Analytic {
        (grid, None)
    } else {
        let times: Vec<f64> = grid.iter().map(|&tau| stroboscopic_time(p, tau)).collect();
        table.meta("dt", num(s.run.oracle.dt));
        table.meta("epsilon_tilde", num(s.run.oracle.epsilon_tilde));
        let ms = oracle_trajectory(&times, p, &s.run.oracle)?;
        let obs = ms.iter().map(|m| quantities(&from_matrix(m, p))).collect::<CliResult<Vec<_>>>()?;
        (times.iter().map(|&t| p.slow_time(t)).collect(), Some(obs))
    };
    let analytic = if s.layer == Layer::Oracle {
        None
    } else {
        Some(
            taus.par_iter()
                .map(|&tau| quantities(&analytic_observables(p, tau, form)?))
                .collect::<CliResult<Vec<_>>>()?,
        )
    };

    let mut worst: Option<f64> = None;
    for (i, &tau) in taus.iter().enumerate() {
        let mut row = vec![num(tau)];
        match (&analytic, &oracle) {
            (Some(a), Some(o)) => {
                row.extend(a[i].iter().map(|&v| num(v)));
                row.extend(o[i].iter().map(|&v| num(v)));
                let rel: Vec<f64> = a[i].iter().zip(&o[i]).map(|(x, y)| (x - y).abs() / y.abs()).collect();
                let energy = rel[0].max(rel[1]);
                worst = Some(worst.map_or(energy, |w| w.max(energy)));
                row.extend(rel.iter().map(|&v| num(v)));
            }
            (Some(q), None) | (None, Some(q)) => row.extend(q[i].iter().map(|&v| num(v))),
            (None, None) => unreachable!("at least one layer runs"),
        }
        table.push(row);
    }
    if let Some(w) = worst {
        table.meta("max_rel_energy_discrepancy", num(w));
    }

    let mut series = Vec::new();
    let norm = |col: usize, q: &[[f64; 8]]| -> Vec<(f64, f64)> { taus.iter().zip(q).map(|(&t, v)| (t, v[col] / q[0][col])).collect() };
    if let Some(a) = &analytic {
        series.push(Series::new("E1/E1(0) analytic", norm(0, a)));
        series.push(Series::new("E3/E3(0) analytic", norm(1, a)));
    }
    if let Some(o) = &oracle {
        series.push(Series::new("E1/E1(0) oracle", norm(0, o)).dashed());
        series.push(Series::new("E3/E3(0) oracle", norm(1, o)).dashed());
    }
    let svg = LinePlot {
        title: "Mode energies".into(),
        x_label: "slow time tau".into(),
        y_label: "E/E(0)".into(),
        log_y: true,
        series,
    }
    .render();
    Ok(Evolution {
        artifact: Artifact {
            stem: "evolve".into(),
            table,
            svg: Some(svg),
        },
        max_energy_discrepancy: worst,
    })
}

/// `5π/(2ρ)` with `ρ = √(2ν − 1)`.
pub fn pdf_default_tau(nu: f64) -> CliResult<f64> {
    if !(nu > 0.5) {
        return Err(CliError::Input(format!("default tau needs nu > 1/2, got {nu}; pass --tau")));
    }
    Ok(5.0 * PI / (2.0 * (2.0 * nu - 1.0).sqrt()))
}

pub const PDF_HEADER: [&str; 3] = ["n", "p_exact", "p_asymptotic"];

/// Photon distribution of one mode at slow time `tau`.
pub fn pdf_artifact(params: &ModelParams, tau: f64, mode: Mode, n_max: Option<usize>, stem: &str) -> CliResult<Artifact> {
    let form = ClosedForm::of(params)?;
    let obs = analytic_observables(params, tau, form)?[match mode {
        Mode::First => 0,
        Mode::Third => 1,
    }];
    obs.check_feasible()?;
    let n_max = n_max.unwrap_or_else(|| default_n_max(&obs));
    let dist = pdf_exact(&obs, n_max)?;

    let mut table = Table::new(PDF_HEADER);
    table.meta("nu", num(params.nu()));
    table.meta("theta1", num(params.theta1()));
    table.meta("theta3", num(params.theta3()));
    table.meta("tau", num(tau));
    table.meta("mode", mode.k());
    table.meta("observables", form.label());
    table.meta("E_tilde", num(obs.e_tilde));
    table.meta("D", num(obs.iup));
    let total = dist.total();
    table.meta("sum_p", num(total));
    table.meta("normalization_deviation", num((total - 1.0).abs()));
    if (total - 1.0).abs() > 1e-6 {
        log::warn!("probabilities up to n = {n_max} sum to {total}; raise --n-max");
    }

    let mut exact_pts = Vec::new();
    let mut asym_pts = Vec::new();
    for (n, &p) in dist.probs.iter().enumerate() {
        let asym = match pdf_asymptotic(&obs, n, AsymptoticForm::General) {
            Ok(v) => Some(v),
            Err(Error::Regime(_)) => None,
            Err(e) => return Err(e.into()),
        };
        table.push(vec![n.to_string(), num(p), asym.map(num).unwrap_or_default()]);
        exact_pts.push((n as f64, p));
        if let Some(a) = asym {
            asym_pts.push((n as f64, a));
        }
    }
    let svg = LinePlot {
        title: format!("Photon distribution, mode {}, tau = {tau:.4}", mode.k()),
        x_label: "n".into(),
        y_label: "P(n)".into(),
        log_y: false,
        series: vec![
            Series::new("exact", exact_pts),
            Series::new("asymptotic", asym_pts).dashed(),
        ],
    }
    .render();
    Ok(Artifact {
        stem: stem.into(),
        table,
        svg: Some(svg),
    })
}

pub fn cmd_pdf(s: &Settings) -> CliResult<Artifact> {
    let p = &s.run.model;
    let tau = match s.tau {
        Some(t) => t,
        None => pdf_default_tau(p.nu())?,
    };
    pdf_artifact(p, tau, s.mode, s.n_max, "pdf")
}

pub const MAP_HEADER: [&str; 7] = ["delta_t", "big_delta_t", "region", "increment", "a", "b", "c"];

/// Approximate band edges `Δ̃ = 4δ̃ ± √(ν/(ν + 2δ̃²))` and the `b = 0`
/// hyperbolas, sampled across `delta_range`.
fn boundary_overlays(nu: f64, delta_range: Span) -> Vec<Series> {
    let samples = 400;
    let xs: Vec<f64> = (0..=samples)
        .map(|i| delta_range.0 + (delta_range.1 - delta_range.0) * i as f64 / samples as f64)
        .collect();
    let band = |sign: f64| {
        xs.iter()
            .map(|&d| (d, 4.0 * d + sign * (nu / (nu + 2.0 * d * d)).sqrt()))
            .collect::<Vec<_>>()
    };
    let mut out = vec![
        Series::new("band edge (approx.)", band(1.0)).dashed(),
        Series::new("band edge (approx.)", band(-1.0)).dashed(),
    ];
    // each hyperbola has a pole at δ̃ = ±1; draw the branches separately
    for (pole, f) in [
        (1.0, Box::new(move |d: f64| 3.0 * d + nu / (2.0 * (1.0 - d))) as Box<dyn Fn(f64) -> f64>),
        (-1.0, Box::new(move |d: f64| 3.0 * d - nu / (2.0 * (1.0 + d)))),
    ] {
        for side in [-1.0, 1.0] {
            let pts: Vec<(f64, f64)> = xs
                .iter()
                .copied()
                .filter(|&d| side * (d - pole) > 1e-3)
                .map(|d| (d, f(d)))
                .collect();
            if pts.len() > 1 {
                out.push(Series::new("hyperbola", pts));
            }
        }
    }
    out
}

pub fn map_artifact(grid: &SweepGrid, epsilon: f64, stem: &str) -> CliResult<Artifact> {
    let mut table = Table::new(MAP_HEADER);
    table.meta("nu", num(grid.nu));
    table.meta("epsilon", num(epsilon));
    let eta = eta_critical(0.0, grid.nu)?;
    table.meta("eta_c_approx_at_delta_t_0", num(eta.approx));
    if let Some(exact) = eta.exact {
        table.meta("eta_c_exact_at_delta_t_0", num(exact));
        table.meta("eta_c_discrepancy", num((exact - eta.approx).abs()));
    }
    let hyper = hyperbola_bounds(2.0, grid.nu)?;
    table.meta("asymmetric_gamma_set_at_delta_t_2", format!("{hyper:?}"));
    for r in 0..grid.rows() {
        for c in 0..grid.cols() {
            let v = grid.cell(r, c);
            table.push(vec![
                num(grid.delta_t[c]),
                num(grid.big_delta_t[r]),
                v.kind.label().into(),
                num(v.increment),
                num(v.abc.a),
                num(v.abc.b),
                num(v.abc.c),
            ]);
        }
    }
    let kinds = [RegionKind::SymmetricResonance, RegionKind::AsymmetricResonance];
    let svg = RegionPlot {
        title: format!("Generation regions, nu = {:.4}", grid.nu),
        x_label: "delta_t".into(),
        y_label: "big_delta_t".into(),
        x: grid.delta_t.clone(),
        y: grid.big_delta_t.clone(),
        cells: grid.cells.iter().map(|c| kinds.iter().position(|&k| k == c.kind)).collect(),
        categories: vec![
            ("symmetric".into(), "#9ecae1".into()),
            ("asymmetric".into(), "#fdae6b".into()),
        ],
        overlays: boundary_overlays(grid.nu, Span(grid.delta_t[0], grid.delta_t[grid.cols() - 1])),
    }
    .render();
    Ok(Artifact {
        stem: stem.into(),
        table,
        svg: Some(svg),
    })
}

pub fn cmd_map(s: &Settings) -> CliResult<Artifact> {
    let p = &s.run.model;
    let grid = sweep_grid(
        (s.delta_range.0, s.delta_range.1),
        (s.big_delta_range.0, s.big_delta_range.1),
        (s.resolution.0, s.resolution.1),
        p.nu(),
        p.epsilon(),
    )?;
    map_artifact(&grid, p.epsilon(), "map")
}

/// Runs every acceptance criterion, including figure regeneration.
pub fn cmd_validate(s: &Settings) -> CliResult<Vec<CriterionOutcome>> {
    let settings = ValidationSettings {
        seed: s.run.seed,
        dt: s.dt,
    };
    let mut outcomes = run_all(&settings)?;
    outcomes.push(figures::regeneration_check()?);
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn settings(o: Overrides) -> Settings {
        Settings::resolve(&o).unwrap()
    }

    #[test]
    fn eigen_reports_exact_resonance_and_free_mode() {
        let report = cmd_eigen(&settings(Overrides::default())).unwrap();
        assert!(report.contains("increment/eps: 0.5"), "{report}");
        assert!(report.contains("regime: symmetric"));
        let report = cmd_eigen(&settings(Overrides {
            nu: Some(0.0),
            ..Default::default()
        }))
        .unwrap();
        assert!(report.contains("lambda_plus/eps: 1 + 0i"), "{report}");
    }

    #[test]
    fn eigen_reports_asymmetric_rates() {
        let nu = 50.0 / 3.0;
        let report = cmd_eigen(&settings(Overrides {
            delta_t: Some(1.0),
            big_delta_t: Some(3.0 - nu / 2.0),
            ..Default::default()
        }))
        .unwrap();
        assert!(report.contains("regime: asymmetric"), "{report}");
        assert!(report.contains("asymmetric rates: R = 0.88"), "{report}");
    }

    #[test]
    fn evolve_layers_agree() {
        let e = cmd_evolve(&settings(Overrides {
            layer: Some(Layer::Both),
            steps: Some(10),
            ..Default::default()
        }))
        .unwrap();
        assert!(e.max_energy_discrepancy.unwrap() <= 5e-3);
        assert_eq!(e.artifact.table.header.len(), 25);
        assert_eq!(e.artifact.table.rows.len(), 11);
    }

    #[test]
    fn evolve_generic_fallback_is_flagged() {
        let e = cmd_evolve(&settings(Overrides {
            delta_t: Some(0.3),
            steps: Some(4),
            ..Default::default()
        }))
        .unwrap();
        assert!(e.artifact.table.meta_value("warning").is_some());
        assert_eq!(e.artifact.table.meta_value("analytic"), Some("generic propagator"));
    }

    #[test]
    fn pdf_is_normalized() {
        let a = cmd_pdf(&settings(Overrides::default())).unwrap();
        let dev: f64 = a.table.meta_value("normalization_deviation").unwrap().parse().unwrap();
        assert!(dev <= 1e-6);
    }

    #[test]
    fn empty_resonance_map() {
        let a = cmd_map(&settings(Overrides {
            nu: Some(1.2),
            delta_range: Some(Span(20.0, 30.0)),
            big_delta_range: Some(Span(-30.0, -20.0)),
            resolution: Some(crate::config::Resolution(9, 9)),
            ..Default::default()
        }))
        .unwrap();
        assert!(a.table.rows.iter().all(|r| r[2] == "none"));
    }
}
