//! Run configuration: built-in defaults, then a flat `key = value` file,
//! then command-line flags, each layer overriding the one before.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use casimir_duomode::cavity::{mu_from_resonant_pair, nu_from_mu, theta_pair_from_beta, NU_CUBE};
use casimir_duomode::oracle::OracleOptions;
use casimir_duomode::{Mode, ModelParams};
use clap::{Args, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Svg
    }

    pub fn svg(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Layer {
    #[default]
    Analytic,
    Oracle,
    Both,
}

/// `lo,hi`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

/// `n` or `n_delta,n_big_delta`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution(pub usize, pub usize);

/// `kx,jx`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModePair(pub u32, pub u32);

fn split_pair(s: &str) -> Result<(&str, &str), String> {
    s.split_once(',')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| format!("expected two comma-separated values, got `{s}`"))
}

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = split_pair(s)?;
        let lo: f64 = a.parse().map_err(|e| format!("`{a}`: {e}"))?;
        let hi: f64 = b.parse().map_err(|e| format!("`{b}`: {e}"))?;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("need finite lo < hi, got `{s}`"));
        }
        Ok(Span(lo, hi))
    }
}

impl FromStr for Resolution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
        let res = match s.split_once(',') {
            Some((a, b)) => Resolution(parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                Resolution(n, n)
            }
        };
        if res.0 < 2 || res.1 < 2 {
            return Err(format!("need at least 2 points per axis, got `{s}`"));
        }
        Ok(res)
    }
}

impl FromStr for ModePair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = split_pair(s)?;
        let kx = a.parse().map_err(|e| format!("`{a}`: {e}"))?;
        let jx = b.parse().map_err(|e| format!("`{b}`: {e}"))?;
        Ok(ModePair(kx, jx))
    }
}

/// Every setting that can come from the config file or a flag. `None`
/// means "not given at this layer".
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Drive amplitude ε.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Drive detuning in units of ε.
    #[arg(long, global = true, allow_negative_numbers = true, conflicts_with = "delta")]
    pub delta_t: Option<f64>,
    /// Upper-mode detuning in units of ε.
    #[arg(long, global = true, allow_negative_numbers = true, conflicts_with = "big_delta")]
    pub big_delta_t: Option<f64>,
    /// Drive detuning δ (absolute).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Upper-mode detuning Δ (absolute).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub big_delta: Option<f64>,
    /// Intermode coupling ν.
    #[arg(long, global = true, conflicts_with_all = ["mu", "mode_pair"])]
    pub nu: Option<f64>,
    /// Geometric coupling μ (ν = 96μ²).
    #[arg(long, global = true, conflicts_with = "mode_pair")]
    pub mu: Option<f64>,
    /// Resonant pair of x-indices, e.g. `1,5` for {111}/{511}.
    #[arg(long, global = true, value_name = "KX,JX")]
    pub mode_pair: Option<ModePair>,
    #[arg(long, global = true, conflicts_with = "beta")]
    pub theta1: Option<f64>,
    #[arg(long, global = true, conflicts_with = "beta")]
    pub theta3: Option<f64>,
    /// Inverse temperature in units of ħω₁; sets both θ.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Second-harmonic modulation amplitude of the upper mode (oracle only).
    #[arg(long, global = true)]
    pub epsilon_tilde: Option<f64>,
    /// Oracle step in fast time.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub layer: Option<Layer>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Slow time for `pdf`; defaults to 5π/(2ρ).
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Mode for `pdf`: 1 or 3.
    #[arg(long, global = true)]
    pub mode: Option<u32>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    pub delta_range: Option<Span>,
    #[arg(long, global = true, value_name = "LO,HI", allow_hyphen_values = true)]
    pub big_delta_range: Option<Span>,
    #[arg(long, global = true, value_name = "N[,M]")]
    pub resolution: Option<Resolution>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> CliResult<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Input(format!("config line {line}: `{key}`: {e}")))
}

impl Overrides {
    /// Parses a flat config: `key = value` per line, `#` comments, keys
    /// spelled like the flags with `_` or `-`.
    pub fn parse_config(text: &str) -> CliResult<Self> {
        let mut o = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {line}: expected `key = value`")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            let k = key.as_str();
            match k {
                "epsilon" => o.epsilon = Some(parse_value(k, value, line)?),
                "delta_t" => o.delta_t = Some(parse_value(k, value, line)?),
                "big_delta_t" => o.big_delta_t = Some(parse_value(k, value, line)?),
                "delta" => o.delta = Some(parse_value(k, value, line)?),
                "big_delta" => o.big_delta = Some(parse_value(k, value, line)?),
                "nu" => o.nu = Some(parse_value(k, value, line)?),
                "mu" => o.mu = Some(parse_value(k, value, line)?),
                "mode_pair" => o.mode_pair = Some(parse_value(k, value, line)?),
                "theta1" => o.theta1 = Some(parse_value(k, value, line)?),
                "theta3" => o.theta3 = Some(parse_value(k, value, line)?),
                "beta" => o.beta = Some(parse_value(k, value, line)?),
                "epsilon_tilde" => o.epsilon_tilde = Some(parse_value(k, value, line)?),
                "dt" => o.dt = Some(parse_value(k, value, line)?),
                "tau_max" => o.tau_max = Some(parse_value(k, value, line)?),
                "steps" => o.steps = Some(parse_value(k, value, line)?),
                "layer" => {
                    o.layer = Some(Layer::from_str(value, true).map_err(|e| {
                        CliError::Input(format!("config line {line}: `layer`: {e}"))
                    })?)
                }
                "out" => o.out = Some(PathBuf::from(value)),
                "format" => {
                    o.format = Some(Format::from_str(value, true).map_err(|e| {
                        CliError::Input(format!("config line {line}: `format`: {e}"))
                    })?)
                }
                "seed" => o.seed = Some(parse_value(k, value, line)?),
                "tau" => o.tau = Some(parse_value(k, value, line)?),
                "mode" => o.mode = Some(parse_value(k, value, line)?),
                "n_max" => o.n_max = Some(parse_value(k, value, line)?),
                "delta_range" => o.delta_range = Some(parse_value(k, value, line)?),
                "big_delta_range" => o.big_delta_range = Some(parse_value(k, value, line)?),
                "resolution" => o.resolution = Some(parse_value(k, value, line)?),
                _ => return Err(CliError::Input(format!("config line {line}: unknown key `{key}`"))),
            }
        }
        let couplings = [o.nu.is_some(), o.mu.is_some(), o.mode_pair.is_some()];
        if couplings.iter().filter(|&&x| x).count() > 1 {
            return Err(CliError::Input("config: give only one of nu, mu, mode_pair".into()));
        }
        if (o.delta.is_some() && o.delta_t.is_some()) || (o.big_delta.is_some() && o.big_delta_t.is_some()) {
            return Err(CliError::Input("config: give each detuning either absolute or in units of epsilon".into()));
        }
        if o.beta.is_some() && (o.theta1.is_some() || o.theta3.is_some()) {
            return Err(CliError::Input("config: beta conflicts with theta1/theta3".into()));
        }
        Ok(o)
    }

    pub fn load_config(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_config(&text)
    }

    /// `self` wins over `lower`. Mutually exclusive groups move as a unit,
    /// so a flag `--mu` hides a file's `nu`.
    pub fn over(self, lower: Overrides) -> Overrides {
        let coupling_here = self.nu.is_some() || self.mu.is_some() || self.mode_pair.is_some();
        let thermal_here = self.theta1.is_some() || self.theta3.is_some() || self.beta.is_some();
        let (nu, mu, mode_pair) = if coupling_here {
            (self.nu, self.mu, self.mode_pair)
        } else {
            (lower.nu, lower.mu, lower.mode_pair)
        };
        let (theta1, theta3, beta) = if thermal_here {
            (self.theta1, self.theta3, self.beta)
        } else {
            (lower.theta1, lower.theta3, lower.beta)
        };
        let (delta, delta_t) = if self.delta.is_some() || self.delta_t.is_some() {
            (self.delta, self.delta_t)
        } else {
            (lower.delta, lower.delta_t)
        };
        let (big_delta, big_delta_t) = if self.big_delta.is_some() || self.big_delta_t.is_some() {
            (self.big_delta, self.big_delta_t)
        } else {
            (lower.big_delta, lower.big_delta_t)
        };
        Overrides {
            config: self.config.or(lower.config),
            epsilon: self.epsilon.or(lower.epsilon),
            delta_t,
            big_delta_t,
            delta,
            big_delta,
            nu,
            mu,
            mode_pair,
            theta1,
            theta3,
            beta,
            epsilon_tilde: self.epsilon_tilde.or(lower.epsilon_tilde),
            dt: self.dt.or(lower.dt),
            tau_max: self.tau_max.or(lower.tau_max),
            steps: self.steps.or(lower.steps),
            layer: self.layer.or(lower.layer),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            seed: self.seed.or(lower.seed),
            tau: self.tau.or(lower.tau),
            mode: self.mode.or(lower.mode),
            n_max: self.n_max.or(lower.n_max),
            delta_range: self.delta_range.or(lower.delta_range),
            big_delta_range: self.big_delta_range.or(lower.big_delta_range),
            resolution: self.resolution.or(lower.resolution),
        }
    }

    /// Reads the config file named by `--config`, if any, and layers the
    /// flags on top.
    pub fn with_config_file(self) -> CliResult<Overrides> {
        match self.config.clone() {
            Some(path) => Ok(self.over(Overrides::load_config(&path)?)),
            None => Ok(self),
        }
    }
}

/// Writes the model as config-file lines that read back to the same parameters.
pub fn model_config_text(model: &ModelParams) -> String {
    format!(
        "epsilon = {}\ndelta = {}\nbig_delta = {}\nnu = {}\ntheta1 = {}\ntheta3 = {}\n",
        model.epsilon(),
        model.delta(),
        model.big_delta(),
        model.nu(),
        model.theta1(),
        model.theta3()
    )
}

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Model, oracle and output settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub oracle: OracleOptions,
    pub output_dir: PathBuf,
    pub format: Format,
    /// Seeds the randomized property sweeps; the physics is deterministic.
    pub seed: u64,
}

/// Fully resolved settings: the run configuration plus per-command knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub run: RunConfig,
    /// The oracle step, if one was given explicitly.
    pub dt: Option<f64>,
    pub tau_max: f64,
    pub steps: usize,
    pub layer: Layer,
    pub tau: Option<f64>,
    pub mode: Mode,
    pub n_max: Option<usize>,
    pub delta_range: Span,
    pub big_delta_range: Span,
    pub resolution: Resolution,
}

impl Settings {
    pub fn resolve(o: &Overrides) -> CliResult<Settings> {
        let nu = match (o.nu, o.mu, o.mode_pair) {
            (Some(nu), _, _) => nu,
            (_, Some(mu), _) => nu_from_mu(mu),
            (_, _, Some(ModePair(kx, jx))) => nu_from_mu(mu_from_resonant_pair(kx, jx)?),
            _ => NU_CUBE,
        };
        let epsilon = o.epsilon.unwrap_or(DEFAULT_EPSILON);
        let model = ModelParams::new(
            epsilon,
            o.delta.unwrap_or(epsilon * o.delta_t.unwrap_or(0.0)),
            o.big_delta.unwrap_or(epsilon * o.big_delta_t.unwrap_or(0.0)),
            nu,
        )?;
        let model = match o.beta {
            Some(beta) => {
                let (t1, t3) = theta_pair_from_beta(beta)?;
                model.with_thermal(t1, t3)?
            }
            None => model.with_thermal(o.theta1.unwrap_or(1.0), o.theta3.unwrap_or(1.0))?,
        };
        for w in model.warnings() {
            log::warn!("{w}");
        }

        let mut oracle = OracleOptions::for_params(&model);
        if let Some(dt) = o.dt {
            oracle = oracle.with_dt(dt);
        }
        if let Some(et) = o.epsilon_tilde {
            oracle = oracle.with_epsilon_tilde(et);
        }
        oracle.validate(&model)?;

        let tau_max = o.tau_max.unwrap_or(2.0);
        if !(tau_max > 0.0) || !tau_max.is_finite() {
            return Err(CliError::Input(format!("tau_max must be finite and > 0, got {tau_max}")));
        }
        let steps = o.steps.unwrap_or(200);
        if steps == 0 {
            return Err(CliError::Input("steps must be at least 1".into()));
        }
        if let Some(tau) = o.tau {
            if !(tau >= 0.0) || !tau.is_finite() {
                return Err(CliError::Input(format!("tau must be finite and >= 0, got {tau}")));
            }
        }
        let mode = Mode::try_from(o.mode.unwrap_or(1))?;

        Ok(Settings {
            run: RunConfig {
                model,
                oracle,
                output_dir: o.out.clone().unwrap_or_else(|| PathBuf::from(".")),
                format: o.format.unwrap_or_default(),
                seed: o.seed.unwrap_or(DEFAULT_SEED),
            },
            dt: o.dt,
            tau_max,
            steps,
            layer: o.layer.unwrap_or_default(),
            tau: o.tau,
            mode,
            n_max: o.n_max,
            delta_range: o.delta_range.unwrap_or(Span(-6.0, 6.0)),
            big_delta_range: o.big_delta_range.unwrap_or(Span(-6.0, 6.0)),
            resolution: o.resolution.unwrap_or(Resolution(241, 241)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let o = Overrides::parse_config(
            "# drive\nepsilon = 2e-3\ndelta-t = -0.5  # trailing comment\n\nmode_pair = 1,5\nformat = csv\ndelta_range = -3, 3\nresolution = 11\n",
        )
        .unwrap();
        assert_eq!(o.epsilon, Some(2e-3));
        assert_eq!(o.delta_t, Some(-0.5));
        assert_eq!(o.mode_pair, Some(ModePair(1, 5)));
        assert_eq!(o.format, Some(Format::Csv));
        assert_eq!(o.delta_range, Some(Span(-3.0, 3.0)));
        assert_eq!(o.resolution, Some(Resolution(11, 11)));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(Overrides::parse_config("bogus = 1").is_err());
        assert!(Overrides::parse_config("epsilon 1").is_err());
        assert!(Overrides::parse_config("nu = 3\nmu = 0.1").is_err());
        assert!(Overrides::parse_config("beta = 1\ntheta1 = 2").is_err());
        assert!(Overrides::parse_config("steps = -4").is_err());
        assert!(Overrides::parse_config("delta_range = 3,1").is_err());
    }

    #[test]
    fn precedence_and_groups() {
        let file = Overrides::parse_config("nu = 20\nepsilon = 0.002\ntheta1 = 3").unwrap();
        let flags = Overrides {
            mu: Some(0.5),
            ..Default::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.nu, None);
        assert_eq!(merged.mu, Some(0.5));
        assert_eq!(merged.epsilon, Some(0.002));
        assert_eq!(merged.theta1, Some(3.0));
        let s = Settings::resolve(&merged).unwrap();
        assert_eq!(s.run.model.nu(), 24.0);
    }

    #[test]
    fn defaults() {
        let s = Settings::resolve(&Overrides::default()).unwrap();
        assert_eq!(s.run.model.nu(), NU_CUBE);
        assert_eq!(s.run.model.epsilon(), DEFAULT_EPSILON);
        assert_eq!(s.run.format, Format::Both);
        assert_eq!(s.layer, Layer::Analytic);
        assert_eq!(s.mode, Mode::First);
    }

    #[test]
    fn oversized_step_is_bad_input() {
        let s = Settings::resolve(&Overrides::default()).unwrap();
        let o = Overrides {
            dt: Some(2.0 * OracleOptions::max_dt(&s.run.model)),
            ..Default::default()
        };
        let err = Settings::resolve(&o).unwrap_err();
        assert!(matches!(err, CliError::Model(casimir_duomode::Error::StepSize { .. })));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn model_round_trips_through_config_text() {
        let model = ModelParams::new(2e-3, -1e-3, 4.5e-3, 12.5)
            .unwrap()
            .with_thermal(3.0, 1.25)
            .unwrap();
        let o = Overrides::parse_config(&model_config_text(&model)).unwrap();
        assert_eq!(Settings::resolve(&o).unwrap().run.model, model);
        let both = Overrides::parse_config("delta = 1e-3\ndelta_t = 1");
        assert!(both.is_err());
    }

    #[test]
    fn mode_pair_sets_coupling() {
        let o = Overrides {
            mode_pair: Some(ModePair(1, 5)),
            ..Default::default()
        };
        // μ = 5/12 gives ν = 50/3
        let s = Settings::resolve(&o).unwrap();
        assert!((s.run.model.nu() - NU_CUBE).abs() < 1e-12);
    }
}
