//! Run configuration: a single TOML document with a schema version.
//!
//! Values are resolved as command-line flags over the config file over the
//! defaults below. Lists left out (`beta`, `radii`, `t_max`) fall back to
//! per-command defaults at run time.

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use modelcheck::CurvatureProfile;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Model,
    Green,
    Hardy,
    Hardy2,
    Embed,
    Cz2,
    Cutoffs,
    Density,
    Ppp,
    Liyau,
    Stochastic,
    All,
}

impl Command {
    /// The sub-commands run by `all`, in report order.
    pub const PIPELINE: [Command; 11] = [
        Command::Model,
        Command::Green,
        Command::Hardy,
        Command::Hardy2,
        Command::Embed,
        Command::Cz2,
        Command::Cutoffs,
        Command::Density,
        Command::Ppp,
        Command::Liyau,
        Command::Stochastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Green => "green",
            Command::Hardy => "hardy",
            Command::Hardy2 => "hardy2",
            Command::Embed => "embed",
            Command::Cz2 => "cz2",
            Command::Cutoffs => "cutoffs",
            Command::Density => "density",
            Command::Ppp => "ppp",
            Command::Liyau => "liyau",
            Command::Stochastic => "stochastic",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    PowerLaw,
    IteratedLog,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub profile: ProfileKind,
    /// Curvature exponent of the power law.
    pub alpha: f64,
    /// Curvature scale `A`.
    pub a: f64,
    /// Depth of the iterated logarithm.
    pub k: u32,
    /// Onset radius of the iterated-log profile; `2·exp^[k](1)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_onset: Option<f64>,
    /// Model radius; each command picks its own when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub tol: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            n: 3,
            profile: ProfileKind::PowerLaw,
            alpha: 1.0,
            a: 1.0,
            k: 0,
            t_onset: None,
            t_max: None,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub p: Vec<f64>,
    /// Log-weight exponents; `{0, α/(α+2)}` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    pub epsilon: Vec<f64>,
    pub a2: Vec<f64>,
    pub seed: u64,
    pub count: usize,
    /// Radius sweep; each command picks its own when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    pub gamma: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            p: vec![1.5, 2.0, 3.0],
            beta: None,
            epsilon: vec![1.0, 0.5, 0.25, 0.1],
            a2: vec![0.0, 1.0, 4.0],
            seed: 42,
            count: 200,
            radii: None,
            gamma: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("modelcheck-out"),
            plot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub command: Command,
    pub model: ModelConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            command: Command::All,
            model: ModelConfig::default(),
            verify: VerifyConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid run config")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.schema_version
        );
        let m = &self.model;
        ensure!(m.n >= 2, "dimension n must be at least 2, got {}", m.n);
        ensure!(m.tol > 0.0 && m.tol <= 1e-4, "tol must lie in (0, 1e-4], got {}", m.tol);
        if let Some(t) = m.t_max {
            ensure!(t > 1.0 && t.is_finite(), "t_max must exceed 1, got {t}");
        }
        let v = &self.verify;
        ensure!(!v.p.is_empty(), "p list is empty");
        for &p in &v.p {
            ensure!(p > 1.0 && p.is_finite(), "exponents p must exceed 1, got {p}");
        }
        if let Some(b) = &v.beta {
            for &x in b {
                ensure!(x >= 0.0 && x.is_finite(), "beta values must be non-negative, got {x}");
            }
        }
        ensure!(v.count > 0, "corpus count must be positive");
        ensure!(v.gamma > 1.0, "gamma must exceed 1, got {}", v.gamma);
        if let Some(r) = &v.radii {
            ensure!(!r.is_empty(), "radii list is empty");
            ensure!(
                r.iter().all(|x| *x > 0.0) && r.windows(2).all(|w| w[1] > w[0]),
                "radii must be positive and increasing"
            );
        }
        self.profile().validate().map_err(anyhow::Error::from)?;
        Ok(())
    }

    pub fn profile(&self) -> CurvatureProfile {
        let m = &self.model;
        match m.profile {
            ProfileKind::PowerLaw => CurvatureProfile::PowerLaw { a: m.a, alpha: m.alpha },
            ProfileKind::Flat => CurvatureProfile::Flat,
            ProfileKind::IteratedLog => CurvatureProfile::IteratedLog {
                a: m.a,
                k: m.k,
                t_onset: m.t_onset.unwrap_or_else(|| default_onset(m.k)),
            },
        }
    }

    /// Curvature exponent `β` with `κ ~ t^β`.
    pub fn curvature_exponent(&self) -> f64 {
        self.profile().growth_exponent()
    }

    pub fn betas(&self) -> Vec<f64> {
        match &self.verify.beta {
            Some(b) => b.clone(),
            None => {
                let a = self.curvature_exponent();
                if a > 0.0 {
                    vec![0.0, a / (a + 2.0)]
                } else {
                    vec![0.0]
                }
            }
        }
    }
}

/// `2·exp^[k](1)`, where `log^[k]` of half the onset is 1.
pub fn default_onset(k: u32) -> f64 {
    let mut x: f64 = 1.0;
    for _ in 0..k {
        x = x.exp();
    }
    2.0 * x
}

/// Command-line overrides; `None` leaves the file or default value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub profile: Option<ProfileKind>,
    pub alpha: Option<f64>,
    pub a: Option<f64>,
    pub k: Option<u32>,
    pub t_onset: Option<f64>,
    pub t_max: Option<f64>,
    pub tol: Option<f64>,
    pub p: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub epsilon: Option<Vec<f64>>,
    pub a2: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub radii: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

impl Overrides {
    pub fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($src:expr, $dst:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        set!(self.command, cfg.command);
        set!(self.n, cfg.model.n);
        set!(self.profile, cfg.model.profile);
        set!(self.alpha, cfg.model.alpha);
        set!(self.a, cfg.model.a);
        set!(self.k, cfg.model.k);
        if self.t_onset.is_some() {
            cfg.model.t_onset = self.t_onset;
        }
        if self.t_max.is_some() {
            cfg.model.t_max = self.t_max;
        }
        set!(self.tol, cfg.model.tol);
        set!(self.p, cfg.verify.p);
        if self.beta.is_some() {
            cfg.verify.beta = self.beta;
        }
        set!(self.epsilon, cfg.verify.epsilon);
        set!(self.a2, cfg.verify.a2);
        set!(self.seed, cfg.verify.seed);
        set!(self.count, cfg.verify.count);
        if self.radii.is_some() {
            cfg.verify.radii = self.radii;
        }
        set!(self.gamma, cfg.verify.gamma);
        set!(self.out, cfg.output.dir);
        if self.plot {
            cfg.output.plot = true;
        }
    }
}

/// Defaults, then the file (if any), then the flags.
pub fn resolve(file: Option<&Path>, overrides: Overrides) -> Result<RunConfig> {
    let mut cfg = match file {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if file.is_none() && overrides.command.is_none() {
        bail!("no command given and no config file to take it from");
    }
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        assert!(text.contains("schema_version = 1"));
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml("command = \"hardy\"\n[model]\nalpha = 0.0\n").unwrap();
        assert_eq!(cfg.command, Command::Hardy);
        assert_eq!(cfg.model.alpha, 0.0);
        assert_eq!(cfg.model.n, 3);
        assert_eq!(cfg.verify.p, vec![1.5, 2.0, 3.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[model]\nalhpa = 1.0\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut cfg = RunConfig::from_toml("command = \"hardy\"\n[verify]\nseed = 3\ncount = 10\n").unwrap();
        Overrides {
            seed: Some(9),
            ..Default::default()
        }
        .apply(&mut cfg);
        assert_eq!(cfg.verify.seed, 9);
        assert_eq!(cfg.verify.count, 10);
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.verify.p = vec![1.0];
        assert!(cfg.validate().is_err());
        let cfg = RunConfig {
            schema_version: 2,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.model.n = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_betas() {
        let mut cfg = RunConfig::default();
        cfg.model.alpha = 2.0;
        assert_eq!(cfg.betas(), vec![0.0, 0.5]);
        cfg.model.profile = ProfileKind::Flat;
        assert_eq!(cfg.betas(), vec![0.0]);
    }

    #[test]
    fn onset_defaults() {
        assert_eq!(default_onset(0), 2.0);
        assert!((default_onset(1) - 2.0 * std::f64::consts::E).abs() < 1e-15);
    }
}
