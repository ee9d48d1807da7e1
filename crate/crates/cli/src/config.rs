//! Run configuration: TOML file sections, command-line overrides and the
//! fully resolved form written back next to the outputs.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use hdw_core::closedform::{DiskRule, SphereRule};
use hdw_core::huygens::{default_margin, DEFAULT_TAU};
use hdw_core::interp::Interpolation;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Dirac,
    Kg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Spectral,
    Closedform,
}

/// Which Klein-Gordon datum carries the bump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KgSlot {
    F,
    G,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equation: Option<Equation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<KgSlot>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disk: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dumps: Option<bool>,
}

/// The on-disk schema. Every key is optional; [`Config::resolve`] fills the gaps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Marks errors that should exit with the config-error code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

macro_rules! config_bail {
    ($($arg:tt)*) => { return Err(ConfigError(format!($($arg)*)).into()) };
}

/// Per-dimension grid defaults: t + a + w stays inside L/2 and the bump is
/// resolved well enough for the causality tolerance.
pub fn default_grid(n: usize) -> (f64, usize) {
    match n {
        1 => (20.0, 2048),
        2 => (10.0, 512),
        _ => (7.2, 256),
    }
}

/// Parses `PxA` rule sizes such as `32x64`.
pub fn parse_rule(s: &str) -> Result<(usize, usize)> {
    let (p, a) = s.split_once('x').ok_or_else(|| ConfigError(format!("rule '{s}' is not of the form PxA")))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| ConfigError(format!("bad rule size in '{s}'")));
    let (p, a) = (parse(p)?, parse(a)?);
    if p == 0 || a == 0 {
        config_bail!("rule '{s}' must have positive sizes");
    }
    Ok((p, a))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()).into())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Fills every unset key with its default and validates the result.
    pub fn resolve(mut self, command: Command) -> Result<Resolved> {
        let run = &mut self.run;
        let equation = *run.equation.get_or_insert(Equation::Dirac);
        let n = *run.n.get_or_insert(if command == Command::Zeta { 2 } else { 3 });
        if !(1..=3).contains(&n) {
            config_bail!("run.n must be 1, 2 or 3, got {n}");
        }
        let engine = *run.engine.get_or_insert(Engine::Spectral);
        let times = run.times.get_or_insert_with(|| vec![if command == Command::Zeta { 2.0 } else { 3.0 }]).clone();
        if times.is_empty() || times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            config_bail!("run.times must be a non-empty list of finite t >= 0");
        }

        let (dl, dn) = default_grid(n);
        let length = *self.grid.length.get_or_insert(dl);
        let points = *self.grid.points.get_or_insert(dn);
        if !(length.is_finite() && length > 0.0) {
            config_bail!("grid.L must be positive, got {length}");
        }
        if points < 8 || !points.is_power_of_two() {
            config_bail!("grid.N must be a power of two >= 8, got {points}");
        }

        let init = &mut self.initial;
        let radius = *init.radius.get_or_insert(0.5);
        let amplitude = *init.amplitude.get_or_insert(1.0);
        let center = init.center.get_or_insert_with(|| vec![0.0; n]).clone();
        if center.len() != n {
            config_bail!("initial.center has {} coordinates, expected {n}", center.len());
        }
        let dim = hdw_core::fields::spinor_dim(n);
        let component = *init.component.get_or_insert(0);
        if component >= dim {
            config_bail!("initial.component must be < {dim} for n = {n}");
        }
        let slot = *init.field.get_or_insert(KgSlot::G);
        if !(radius > 0.0 && radius <= 0.25 * length) {
            config_bail!("initial.radius must lie in (0, L/4 = {}], got {radius}", 0.25 * length);
        }

        let h = length / points as f64;
        let an = &mut self.analysis;
        let w = *an.w.get_or_insert(default_margin(h, radius));
        let tau = *an.tau.get_or_insert(DEFAULT_TAU);
        if !(w >= 0.0 && tau > 0.0) {
            config_bail!("analysis.w must be >= 0 and analysis.tau > 0");
        }
        let probes = *an.probes.get_or_insert(200);
        let seed = *an.seed.get_or_insert(0);
        let interp_name = an.interpolation.get_or_insert_with(|| Interpolation::default().to_string()).clone();
        let interpolation =
            Interpolation::from_str(&interp_name).map_err(|e| ConfigError(format!("analysis.interpolation: {e}")))?;
        let sphere_d = SphereRule::default();
        let disk_d = DiskRule::default();
        let sphere_s = an.sphere.get_or_insert_with(|| format!("{}x{}", sphere_d.polar, sphere_d.azimuthal)).clone();
        let disk_s = an.disk.get_or_insert_with(|| format!("{}x{}", disk_d.polar, disk_d.azimuthal)).clone();
        let (sp, sa) = parse_rule(&sphere_s)?;
        let (dp, da) = parse_rule(&disk_s)?;
        let r = an.r.get_or_insert_with(|| vec![1.0]).clone();
        if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            config_bail!("analysis.r values must be finite and >= 0");
        }
        let eps = an.eps.get_or_insert_with(Vec::new).clone();
        if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|p| !(p[1] < p[0])) {
            config_bail!("analysis.eps must be positive and strictly decreasing (empty = default schedule)");
        }
        if !eps.is_empty() && eps.len() < 3 {
            config_bail!("analysis.eps needs at least 3 values");
        }

        let dir = self.output.dir.get_or_insert_with(|| PathBuf::from("hdw-out")).clone();
        let dumps = *self.output.dumps.get_or_insert(true);

        Ok(Resolved {
            file: self,
            equation,
            n,
            engine,
            times,
            length,
            points,
            radius,
            amplitude,
            center,
            component,
            slot,
            w,
            tau,
            probes,
            seed,
            interpolation,
            sphere: SphereRule { polar: sp, azimuthal: sa },
            disk: DiskRule { polar: dp, azimuthal: da },
            r,
            eps,
            dir,
            dumps,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Evolve,
    Huygens,
    Zeta,
}

/// Typed view of a fully resolved configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    /// The same settings in file form, every key present.
    pub file: Config,
    pub equation: Equation,
    pub n: usize,
    pub engine: Engine,
    pub times: Vec<f64>,
    pub length: f64,
    pub points: usize,
    pub radius: f64,
    pub amplitude: f64,
    pub center: Vec<f64>,
    pub component: usize,
    pub slot: KgSlot,
    pub w: f64,
    pub tau: f64,
    pub probes: usize,
    pub seed: u64,
    pub interpolation: Interpolation,
    pub sphere: SphereRule,
    pub disk: DiskRule,
    pub r: Vec<f64>,
    pub eps: Vec<f64>,
    pub dir: PathBuf,
    pub dumps: bool,
}

/// Parses `--bump a=0.5,amp=1,comp=0,center=0:0,field=g` into the initial section.
pub fn apply_bump_spec(init: &mut InitialSection, spec: &str) -> Result<()> {
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| ConfigError(format!("bump entry '{part}' lacks '='")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| ConfigError(format!("bump {key}: bad number '{v}'")));
        match key {
            "a" | "radius" => init.radius = Some(num(value)?),
            "amp" | "amplitude" => init.amplitude = Some(num(value)?),
            "comp" | "component" => {
                init.component =
                    Some(value.parse().map_err(|_| ConfigError(format!("bump comp: bad index '{value}'")))?)
            }
            "center" => init.center = Some(value.split(':').map(num).collect::<std::result::Result<_, _>>()?),
            "field" => {
                init.field = Some(match value {
                    "f" => KgSlot::F,
                    "g" => KgSlot::G,
                    _ => config_bail!("bump field must be f or g, got '{value}'"),
                })
            }
            _ => config_bail!("unknown bump key '{key}'"),
        }
    }
    Ok(())
}
