//! Scenario files: one TOML document per sweep.
//!
//! ```toml
//! mode = "cv-rr"
//! title = "RR key rate versus eta_ae"
//!
//! [sweep]
//! variable = "eta_ae"
//! start = 1e-4
//! stop = 1.0
//! points = 41
//! scale = "log"
//!
//! [series]            # optional: repeat the sweep for each value
//! variable = "xi"
//! values = [0.1, 1.0]
//!
//! [cv]                # any field left out keeps its default
//! v = 300.0
//! [channel]
//! t_eq = 1e-3
//! ```
//!
//! Sections mirror the engine types: `cv` and `channel` for the
//! continuous-variable modes, `grid` for the worst-case search, `dv` and
//! `mu_search` for BB84, `lidar`, `radar` and `elevation` for monitoring.
//! Sweep and series variables are field names of the sections the mode
//! reads; nested fields use dots (`background.h_sky`).

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use satqkd_core::cv::{ChannelObservation, CvScenario, GridSpec, Method};
use satqkd_core::dv::{DvParams, MuSearch, Source};
use satqkd_core::lidar::{MonitorSetup, RadarParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    CvRr,
    CvDrM1,
    CvDrM2,
    DvSps,
    DvWcp,
    LidarProfile,
    LidarElevation,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::CvRr,
        Mode::CvDrM1,
        Mode::CvDrM2,
        Mode::DvSps,
        Mode::DvWcp,
        Mode::LidarProfile,
        Mode::LidarElevation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::CvRr => "cv-rr",
            Mode::CvDrM1 => "cv-dr-m1",
            Mode::CvDrM2 => "cv-dr-m2",
            Mode::DvSps => "dv-sps",
            Mode::DvWcp => "dv-wcp",
            Mode::LidarProfile => "lidar-profile",
            Mode::LidarElevation => "lidar-elevation",
        }
    }

    pub fn cv_method(self) -> Option<Method> {
        match self {
            Mode::CvRr => Some(Method::Rr),
            Mode::CvDrM1 => Some(Method::DrM1),
            Mode::CvDrM2 => Some(Method::DrM2),
            _ => None,
        }
    }

    pub fn dv_source(self) -> Option<Source> {
        match self {
            Mode::DvSps => Some(Source::Sps),
            Mode::DvWcp => Some(Source::Wcp),
            _ => None,
        }
    }

    /// Sections whose fields can be swept in this mode.
    fn sections(self) -> &'static [Section] {
        match self {
            Mode::CvRr | Mode::CvDrM1 | Mode::CvDrM2 => &[Section::Cv, Section::Channel],
            Mode::DvSps | Mode::DvWcp => &[Section::Dv],
            Mode::LidarProfile => &[Section::Lidar, Section::Radar],
            Mode::LidarElevation => &[Section::Lidar],
        }
    }

    /// Variable that is the natural axis of the mode rather than a field.
    fn axis(self) -> Option<&'static str> {
        match self {
            Mode::LidarProfile => Some("z"),
            Mode::LidarElevation => Some("theta"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * f,
                    Scale::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * f).exp(),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::Validation(format!(
                "sweep.points = {} but a sweep needs at least 2 points",
                self.points
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Validation("sweep.start and sweep.stop must be finite".into()));
        }
        if self.scale == Scale::Log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(CliError::Validation(
                "a log-scale sweep needs positive start and stop".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub variable: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Elevation {
    /// Positions per link used to find the maxima at each angle.
    pub profile_points: usize,
}

impl Default for Elevation {
    fn default() -> Self {
        Self { profile_points: 1001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub sweep: Sweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
    #[serde(default)]
    pub cv: CvScenario,
    #[serde(default)]
    pub channel: ChannelObservation,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub dv: DvParams,
    #[serde(default)]
    pub mu_search: MuSearch,
    #[serde(default)]
    pub lidar: MonitorSetup,
    #[serde(default)]
    pub radar: RadarParams,
    #[serde(default)]
    pub elevation: Elevation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Section {
    Cv,
    Channel,
    Dv,
    Lidar,
    Radar,
}

/// A resolved sweep or series variable.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Target {
    Field(Section, String),
    /// Both LIDAR powers at once.
    LidarPower,
    Axis,
}

/// Returns a copy of `value` with the dotted field `key` set to `x`, or
/// `None` when `T` has no such numeric field.
fn with_field<T: Serialize + DeserializeOwned>(value: &T, key: &str, x: f64) -> Option<T> {
    let mut root = toml::Table::try_from(value).ok()?;
    let mut table = &mut root;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            if let Some(old) = table.get(part) {
                if !old.is_float() {
                    return None;
                }
            }
            table.insert(part.to_string(), toml::Value::Float(x));
        } else {
            table = table.get_mut(part)?.as_table_mut()?;
        }
    }
    root.try_into().ok()
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub(crate) fn resolve(&self, name: &str) -> Result<Target, CliError> {
        if self.mode.axis() == Some(name) {
            return Ok(Target::Axis);
        }
        if name == "p_t" && self.mode.sections().contains(&Section::Lidar) {
            return Ok(Target::LidarPower);
        }
        for &section in self.mode.sections() {
            if self.set(&Target::Field(section, name.to_string()), 0.5).is_some() {
                return Ok(Target::Field(section, name.to_string()));
            }
        }
        let reason = match (self.mode, name) {
            (Mode::DvSps | Mode::DvWcp, "mu") => "; mu is optimised in dv-wcp and unused in dv-sps",
            (Mode::LidarProfile | Mode::LidarElevation, _) => "; the sweep axis is z for lidar-profile and theta for lidar-elevation",
            _ => "",
        };
        Err(CliError::Validation(format!(
            "'{name}' is not a parameter of mode {}{reason}",
            self.mode.name()
        )))
    }

    /// Copy with `target` set to `x`; `None` when the field does not exist.
    pub(crate) fn set(&self, target: &Target, x: f64) -> Option<Scenario> {
        let mut s = self.clone();
        match target {
            Target::Axis => {}
            Target::LidarPower => {
                s.lidar.p_t_sat = x;
                s.lidar.p_t_ground = x;
            }
            Target::Field(section, key) => match section {
                Section::Cv => s.cv = with_field(&s.cv, key, x)?,
                Section::Channel => s.channel = with_field(&s.channel, key, x)?,
                Section::Dv => {
                    if key == "mu" {
                        return None;
                    }
                    s.dv = DvParams {
                        source: s.dv.source,
                        ..with_field(&s.dv, key, x)?
                    }
                }
                Section::Lidar => s.lidar = with_field(&s.lidar, key, x)?,
                Section::Radar => s.radar = with_field(&s.radar, key, x)?,
            },
        }
        Some(s)
    }

    /// Checks the file-level structure; engine parameters are checked per
    /// point by [`crate::expand`].
    pub fn validate_structure(&self) -> Result<(), CliError> {
        self.sweep.validate()?;
        self.resolve(&self.sweep.variable)?;
        if let Some(series) = &self.series {
            if series.values.is_empty() {
                return Err(CliError::Validation("series.values is empty".into()));
            }
            if series.variable == self.sweep.variable {
                return Err(CliError::Validation(format!(
                    "series and sweep both vary '{}'",
                    series.variable
                )));
            }
            if let Target::Axis = self.resolve(&series.variable)? {
                return Err(CliError::Validation(format!(
                    "'{}' can only be the sweep variable",
                    series.variable
                )));
            }
            if series.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Validation("series.values must be finite".into()));
            }
        }
        self.grid.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        self.mu_search.validate().map_err(|e| CliError::Validation(e.to_string()))?;
        if self.elevation.profile_points < 2 {
            return Err(CliError::Validation("elevation.profile_points must be at least 2".into()));
        }
        Ok(())
    }
}
