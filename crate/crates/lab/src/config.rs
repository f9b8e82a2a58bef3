//! Experiment configuration, read from a TOML document.
//!
//! Real-valued parameters are written as strings (`shift = "0.07"`) so the
//! file is independent of any locale or float formatting convention.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use repat_core::circle_maps::{Arc, CirclePoint, FiberMap, MapFamily};
use repat_core::pattern::{BuildOptions, Noise, ScheduleEntry, SearchStrategy, TailModel, ValidateOptions};
use repat_core::symbolic::{literal, Symbol};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LabError, Result};

pub const CONFIG_SCHEMA: &str = "repat-config/1";

/// A real number written as text.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decimal(pub f64);

impl FromStr for Decimal {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a decimal number"))?;
        if !v.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(Decimal(v))
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?}", self.0))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, overridden by `--out`.
    pub out: Option<PathBuf>,
    pub family: FamilyConfig,
    pub start: StartConfig,
    #[serde(default)]
    pub build: BuildConfig,
    pub schedule: Vec<ScheduleConfig>,
    #[serde(default)]
    pub tail: TailConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub fk: FkConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    /// Alphabet size; must match the number of maps.
    pub alphabet: u8,
    pub maps: Vec<MapConfig>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapConfig {
    /// `x ↦ x + a + (b/2π)·sin(2πx)`.
    Sine {
        shift: Decimal,
        amplitude: Decimal,
    },
    Rotation {
        shift: Decimal,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub omega0: String,
    pub j0_center: Decimal,
    pub j0_length: Decimal,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildConfig {
    pub tol: Decimal,
    pub grid: usize,
    pub c_target: Decimal,
    pub shrink_cap: Decimal,
}

impl Default for BuildConfig {
    fn default() -> Self {
        let d = BuildOptions::default();
        BuildConfig {
            tol: Decimal(d.tol),
            grid: d.grid,
            c_target: Decimal(d.c_target),
            shrink_cap: Decimal(d.shrink_cap),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Exhaustive,
    Sampled,
}

/// `repeat` consecutive stages sharing `k` and the noise rule: either an
/// explicit `alpha` or a `search` of words of length `r`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "one")]
    pub repeat: usize,
    pub k: u64,
    pub alpha: Option<String>,
    pub search: Option<SearchKind>,
    pub r: Option<usize>,
    pub samples: Option<u64>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TailConfig {
    #[default]
    Undeclared,
    /// `λₙ ≤ c·ratioⁿ` for `n > from`.
    Geometric { c: Decimal, ratio: Decimal, from: usize },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateConfig {
    pub shrink_limit: Decimal,
    pub expansion_cap: u64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        let d = ValidateOptions::default();
        ValidateConfig { shrink_limit: Decimal(d.shrink_limit), expansion_cap: d.expansion_cap }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FkConfig {
    /// Largest window of the distance estimate.
    pub m_max: u32,
    /// Multiples of the common period used for the gap profile.
    pub multiples: Vec<u64>,
    pub dp_cap: u64,
    /// Last stage index paired with its successor.
    pub max_stage: usize,
}

impl Default for FkConfig {
    fn default() -> Self {
        FkConfig { m_max: 6, multiples: vec![1, 2], dp_cap: repat_core::fk_metric::DP_CAP, max_stage: 12 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    pub theta: Decimal,
    /// Half-width of the base cylinder window.
    pub window: u32,
    pub bins: usize,
    pub sample_cap: u64,
    /// Highest strip level; strips at level n use stage n + 1.
    pub max_level: usize,
    /// Stages whose disintegration histograms are reported.
    pub histogram_stages: Vec<usize>,
    pub spanning_horizons: Vec<u64>,
    pub spanning_eps: Vec<Decimal>,
    /// Stage whose base word drives the spanning construction.
    pub spanning_stage: usize,
    pub harmonics: u32,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            theta: Decimal(0.5),
            window: 2,
            bins: 64,
            sample_cap: repat_core::measure_lab::SAMPLE_CAP,
            max_level: 12,
            histogram_stages: vec![10, 11, 12],
            spanning_horizons: vec![10, 100, 1000],
            spanning_eps: vec![Decimal(0.1), Decimal(0.05), Decimal(0.01)],
            spanning_stage: 1,
            harmonics: 4,
        }
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_stage: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(m) = o.max_stage {
            let mut left = m;
            self.schedule.retain_mut(|e| {
                let take = e.repeat.min(left);
                left -= take;
                e.repeat = take;
                take > 0
            });
        }
        if o.out.is_some() {
            self.out.clone_from(&o.out);
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.schema != CONFIG_SCHEMA {
            return bad(&format!("unsupported schema `{}`, expected `{CONFIG_SCHEMA}`", self.schema));
        }
        if self.family.maps.len() != self.family.alphabet as usize {
            return bad("alphabet size differs from the number of maps");
        }
        if self.schedule.is_empty() {
            return bad("schedule is empty");
        }
        for e in &self.schedule {
            match (&e.alpha, e.search) {
                (Some(_), None) if e.r.is_none() && e.samples.is_none() => {}
                (None, Some(SearchKind::Exhaustive)) if e.r.is_some() && e.samples.is_none() => {}
                (None, Some(SearchKind::Sampled)) if e.r.is_some() && e.samples.is_some() => {}
                _ => {
                    return bad(
                        "each schedule entry needs either `alpha`, or `search` with `r` (and `samples` when sampled)",
                    )
                }
            }
        }
        let m = &self.measure;
        if !(m.theta.0 > 0.0 && m.theta.0 <= 1.0) {
            return bad("measure.theta must lie in (0, 1]");
        }
        if m.bins < 1 {
            return bad("measure.bins must be positive");
        }
        if m.spanning_eps.iter().any(|e| !(e.0 > 0.0 && e.0 < 0.5)) {
            return bad("spanning eps values must lie in (0, 0.5)");
        }
        if self.fk.multiples.is_empty() {
            return bad("fk.multiples is empty");
        }
        Ok(())
    }

    /// Number of stages after level 0.
    pub fn stage_count(&self) -> usize {
        self.schedule.iter().map(|e| e.repeat).sum()
    }

    pub fn family(&self) -> Result<MapFamily> {
        let maps = self
            .family
            .maps
            .iter()
            .map(|m| match *m {
                MapConfig::Sine { shift, amplitude } => FiberMap::sine(shift.0, amplitude.0),
                MapConfig::Rotation { shift } => FiberMap::rotation(shift.0),
            })
            .collect::<repat_core::Result<Vec<_>>>()?;
        Ok(MapFamily::new(maps)?)
    }

    pub fn start(&self) -> Result<(Vec<Symbol>, Arc)> {
        let omega0 = literal(&self.start.omega0)?;
        let j0 = Arc::centered(CirclePoint::new(self.start.j0_center.0), self.start.j0_length.0)?;
        Ok((omega0, j0))
    }

    pub fn build_options(&self) -> BuildOptions {
        let b = &self.build;
        BuildOptions { tol: b.tol.0, grid: b.grid, c_target: b.c_target.0, shrink_cap: b.shrink_cap.0 }
    }

    /// The schedule with repeats unrolled. Sampled searches get the seed
    /// `seed + n` for stage `n`.
    pub fn schedule(&self) -> Result<Vec<ScheduleEntry>> {
        let mut out = Vec::with_capacity(self.stage_count());
        for e in &self.schedule {
            for _ in 0..e.repeat {
                let n = out.len() as u64 + 1;
                let noise = match (&e.alpha, e.search) {
                    (Some(a), _) => Noise::Word(literal(a)?),
                    (None, Some(SearchKind::Exhaustive)) => {
                        Noise::Search { r: e.r.unwrap_or(1), strategy: SearchStrategy::Exhaustive }
                    }
                    (None, _) => Noise::Search {
                        r: e.r.unwrap_or(1),
                        strategy: SearchStrategy::Sampled {
                            samples: e.samples.unwrap_or(1),
                            seed: self.seed.wrapping_add(n),
                        },
                    },
                };
                out.push(ScheduleEntry { k: e.k, noise });
            }
        }
        Ok(out)
    }

    pub fn tail(&self) -> TailModel {
        match self.tail {
            TailConfig::Undeclared => TailModel::Undeclared,
            TailConfig::Geometric { c, ratio, from } => TailModel::Geometric { c: c.0, ratio: ratio.0, from },
        }
    }

    pub fn validate_options(&self) -> ValidateOptions {
        ValidateOptions {
            build: self.build_options(),
            shrink_limit: self.validate.shrink_limit.0,
            tail: self.tail(),
            expansion_cap: self.validate.expansion_cap,
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
