//! Run configuration files (JSON).
//!
//! `game` and `topology` may name a built-in preset, give a path relative
//! to the config file, or be written inline. Schedules are descriptors of
//! the form `{"family": ..., "params": {...}}`; `mu`, `beta`, `noise` and
//! `q0` take either one value for every player or a per-player list.

use std::path::{Path, PathBuf};

use dpnash_core::game::{ActionProfile, GameSpec};
use dpnash_core::graph::GraphSchedule;
use dpnash_core::noise::NoiseMode;
use dpnash_core::privacy::SensitivityConvention;
use dpnash_core::schedule::{Schedule, ScheduleSet};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::game_file::GameFile;
use crate::presets;
use crate::topology::{parse_topology, TopologyFile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    content = "params",
    rename_all = "kebab-case",
    deny_unknown_fields
)]
pub enum ScheduleDescriptor {
    Constant {
        value: f64,
    },
    RationalPower {
        #[serde(default = "one")]
        scale: f64,
        c: f64,
        p: f64,
    },
    GatedExponential {
        #[serde(default = "one")]
        scale: f64,
        c: f64,
        r: f64,
        a: f64,
        d: f64,
    },
    Affine {
        c: f64,
        d: f64,
    },
    Geometric {
        #[serde(default = "one")]
        scale: f64,
        ratio: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl From<ScheduleDescriptor> for Schedule {
    fn from(d: ScheduleDescriptor) -> Self {
        match d {
            ScheduleDescriptor::Constant { value } => Schedule::Constant { value },
            ScheduleDescriptor::RationalPower { scale, c, p } => {
                Schedule::RationalPower { scale, c, p }
            }
            ScheduleDescriptor::GatedExponential { scale, c, r, a, d } => {
                Schedule::GatedExponential { scale, c, r, a, d }
            }
            ScheduleDescriptor::Affine { c, d } => Schedule::Affine { c, d },
            ScheduleDescriptor::Geometric { scale, ratio } => Schedule::Geometric { scale, ratio },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(&self, n: usize, field: &str) -> Result<Vec<T>> {
        match self {
            Self::One(v) => Ok(vec![v.clone(); n]),
            Self::Many(v) if v.len() == n => Ok(v.clone()),
            Self::Many(v) => Err(HarnessError::Invalid(format!(
                "`{field}` lists {} values for {n} players",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub mu: OneOrMany<ScheduleDescriptor>,
    pub rho: ScheduleDescriptor,
    pub beta: OneOrMany<f64>,
    pub noise: OneOrMany<ScheduleDescriptor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSetting {
    #[default]
    On,
    ZeroNoise,
}

impl From<NoiseSetting> for NoiseMode {
    fn from(s: NoiseSetting) -> Self {
        match s {
            NoiseSetting::On => NoiseMode::On,
            NoiseSetting::ZeroNoise => NoiseMode::ZeroNoise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionSetting {
    Theoretical,
    #[default]
    Empirical,
}

impl From<ConventionSetting> for SensitivityConvention {
    fn from(s: ConventionSetting) -> Self {
        match s {
            ConventionSetting::Theoretical => SensitivityConvention::Theoretical,
            ConventionSetting::Empirical => SensitivityConvention::Empirical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Source<T> {
    Named(String),
    Inline(T),
}

/// The on-disk shape; references are resolved into [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    game: Source<GameFile>,
    topology: Source<TopologyFile>,
    schedules: ScheduleConfig,
    q0: OneOrMany<f64>,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    horizon: usize,
    #[serde(default)]
    noise: NoiseSetting,
    #[serde(default)]
    convention: ConventionSetting,
    #[serde(default = "one")]
    m3: f64,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub game: GameFile,
    pub topology: TopologyFile,
    pub schedules: ScheduleConfig,
    pub q0: OneOrMany<f64>,
    pub seeds: Vec<u64>,
    pub horizon: usize,
    pub noise: NoiseSetting,
    pub convention: ConventionSetting,
    /// Constant in the theoretical sensitivity bound.
    pub m3: f64,
    /// Error level for iterations-to-threshold.
    pub threshold: f64,
    pub out: Option<PathBuf>,
}

/// Everything the core needs for a run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: GameSpec,
    pub schedules: ScheduleSet,
    pub graphs: GraphSchedule,
    pub q0: ActionProfile,
}

impl RunConfig {
    pub fn n(&self) -> usize {
        self.game.n()
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let spec = self.game.to_spec()?;
        let graphs = self.topology.to_schedule()?;
        let n = spec.n();
        if graphs.node_count() != n {
            return Err(HarnessError::Invalid(format!(
                "game has {n} players, topology has {} nodes",
                graphs.node_count()
            )));
        }
        let s = &self.schedules;
        let schedules = ScheduleSet::new(
            s.mu.expand(n, "mu")?.into_iter().map(Into::into).collect(),
            s.rho.into(),
            s.beta.expand(n, "beta")?,
            s.noise
                .expand(n, "noise")?
                .into_iter()
                .map(Into::into)
                .collect(),
        )?;
        let q0 = ActionProfile(self.q0.expand(n, "q0")?);
        Ok(Scenario {
            spec,
            schedules,
            graphs,
            q0,
        })
    }

    pub fn validate(&self) -> Result<Scenario> {
        if self.horizon < 1 {
            return Err(HarnessError::Invalid("horizon must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(HarnessError::Invalid("threshold must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Invalid(
                "at least one seed is required".into(),
            ));
        }
        if !(self.m3 > 0.0) {
            return Err(HarnessError::Invalid("m3 must be positive".into()));
        }
        let sc = self.scenario()?;
        if !sc.spec.contains(sc.q0.as_slice()) {
            return Err(HarnessError::Invalid(
                "q0 lies outside the action sets".into(),
            ));
        }
        Ok(sc)
    }
}

/// Loads a config from a preset name or a file path, resolving references
/// and validating the result.
pub fn load_config(path_or_preset: &str) -> Result<RunConfig> {
    if let Some(p) = presets::find(presets::CONFIGS, path_or_preset) {
        return parse_config(p.text, &format!("preset:{}", p.name), None);
    }
    let path = Path::new(path_or_preset);
    if !path.exists() && !path_or_preset.contains(['/', '\\', '.']) {
        return Err(HarnessError::UnknownPreset(path_or_preset.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text, &path.display().to_string(), path.parent())
}

/// Parses config text; relative file references resolve against `base`.
pub fn parse_config(text: &str, origin: &str, base: Option<&Path>) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| HarnessError::json(origin, e))?;
    let game = match raw.game {
        Source::Inline(g) => g,
        Source::Named(name) => match presets::find(presets::GAMES, &name) {
            Some(p) => GameFile::parse(p.text, &format!("preset:{name}"))?,
            None => {
                let path = resolve(base, &name);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                GameFile::parse(&text, &path.display().to_string())?
            }
        },
    };
    let topology = match raw.topology {
        Source::Inline(t) => t,
        Source::Named(name) => match presets::find(presets::TOPOLOGIES, &name) {
            Some(p) => parse_topology(p.text, &format!("preset:{name}"))?,
            None => {
                let path = resolve(base, &name);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                let origin = path.display().to_string();
                if path.extension().is_some_and(|e| e == "json") {
                    serde_json::from_str(&text).map_err(|e| HarnessError::json(&origin, e))?
                } else {
                    parse_topology(&text, &origin)?
                }
            }
        },
    };
    let cfg = RunConfig {
        name: raw.name,
        game,
        topology,
        schedules: raw.schedules,
        q0: raw.q0,
        seeds: raw.seeds,
        horizon: raw.horizon,
        noise: raw.noise,
        convention: raw.convention,
        m3: raw.m3,
        threshold: raw.threshold,
        out: raw.out,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve(base: Option<&Path>, name: &str) -> PathBuf {
    match base {
        Some(b) => b.join(name),
        None => PathBuf::from(name),
    }
}

/// Self-contained JSON for `cfg`, with game and topology inlined.
pub fn write_config(cfg: &RunConfig) -> Result<String> {
    let raw = RawConfig {
        name: cfg.name.clone(),
        game: Source::Inline(cfg.game.clone()),
        topology: Source::Inline(cfg.topology.clone()),
        schedules: cfg.schedules.clone(),
        q0: cfg.q0.clone(),
        seeds: cfg.seeds.clone(),
        horizon: cfg.horizon,
        noise: cfg.noise,
        convention: cfg.convention,
        m3: cfg.m3,
        threshold: cfg.threshold,
        out: cfg.out.clone(),
    };
    let mut text = serde_json::to_string_pretty(&raw)?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in presets::config_names() {
            let cfg = load_config(name).unwrap();
            let text = write_config(&cfg).unwrap();
            assert_eq!(parse_config(&text, "rt", None).unwrap(), cfg, "{name}");
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            load_config("no-such-preset"),
            Err(HarnessError::UnknownPreset(_))
        ));
    }

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value =
            serde_json::from_str(presets::find(presets::CONFIGS, "ieee30-6p").unwrap().text)
                .unwrap();
        f(&mut v);
        serde_json::to_string_pretty(&v).unwrap()
    }

    #[test]
    fn missing_horizon_is_reported() {
        let text = edit(|v| {
            v.as_object_mut().unwrap().remove("horizon");
        });
        let e = parse_config(&text, "cfg", None).unwrap_err();
        assert!(e.is_validation());
        assert!(e.to_string().contains("horizon"), "{e}");
    }

    #[test]
    fn zero_horizon_rejected() {
        let text = edit(|v| v["horizon"] = 0.into());
        assert!(matches!(
            parse_config(&text, "cfg", None),
            Err(HarnessError::Invalid(_))
        ));
    }

    #[test]
    fn zero_noise_flag() {
        let text = edit(|v| v["noise"] = "zero-noise".into());
        let cfg = parse_config(&text, "cfg", None).unwrap();
        assert_eq!(NoiseMode::from(cfg.noise), NoiseMode::ZeroNoise);
    }

    #[test]
    fn bad_field_points_at_line() {
        let text = "{\n  \"name\": \"x\",\n  \"horizon\": \"soon\"\n}";
        match parse_config(text, "cfg", None) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn per_player_lists_must_match() {
        let text = edit(|v| v["q0"] = serde_json::json!([0.1, 0.2]));
        assert!(matches!(
            parse_config(&text, "cfg", None),
            Err(HarnessError::Invalid(_))
        ));
    }
}
