//! Flat `key = value` run configuration.
//!
//! ```text
//! # cytosine pair
//! nu_i = 381.5
//! nu_s = -381.5
//! j = 7.2
//! t2star = 0.3
//! dwell = auto
//! mode = shaped
//! ```

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::experiments::Acquisition;
use crate::pulse::SpinSystem;
use crate::sequence::Mode;
use crate::shaped::{SoftPulseDefaults, MIN_SLICES};

/// `line` is 1-based; 0 means the problem is not tied to one line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Ideal,
    Shaped,
}

impl std::str::FromStr for ModeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(ModeName::Ideal),
            "shaped" => Ok(ModeName::Shaped),
            other => Err(format!("unknown mode `{other}` (expected ideal or shaped)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub system: SpinSystem,
    pub points: usize,
    /// `None` picks the dwell from the offsets.
    pub dwell: Option<f64>,
    pub pulse: SoftPulseDefaults,
    pub mode: ModeName,
    /// Apply T2* decay during delays and soft pulses.
    pub relaxation: bool,
    /// Carrier frequency; informational only, the simulation runs in the rotating frame.
    pub spectrometer_mhz: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self::cytosine()
    }
}

pub const KEYS: [&str; 12] = [
    "nu_i",
    "nu_s",
    "j",
    "t2star",
    "points",
    "dwell",
    "pulse_duration",
    "truncation",
    "slices",
    "mode",
    "relaxation",
    "spectrometer_mhz",
];

impl Config {
    /// J = 7.2 Hz, offsets ±381.5 Hz, T2* = 0.3 s, 500 MHz.
    pub fn cytosine() -> Self {
        Self {
            system: SpinSystem::cytosine(),
            points: Acquisition::DEFAULT_POINTS,
            dwell: None,
            pulse: SoftPulseDefaults::default(),
            mode: ModeName::Ideal,
            relaxation: false,
            spectrometer_mhz: 500.0,
        }
    }

    /// Parses `text` on top of the cytosine defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::cytosine().merge(text)
    }

    /// Overrides the fields named in `text`.
    pub fn merge(mut self, text: &str) -> Result<Self, ConfigError> {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| err(line, format!("unknown key `{key}`")))?;
            if let Some(first) = seen.insert(key, line) {
                return Err(err(line, format!("duplicate key `{key}` (first set on line {first})")));
            }
            if value.is_empty() {
                return Err(err(line, format!("missing value for `{key}`")));
            }
            self.set(key, value).map_err(|m| err(line, m))?;
        }
        self.validate().map_err(|(key, m)| err(seen.get(key).copied().unwrap_or(0), m))?;
        Ok(self)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| format!("`{key}` expects a number, found `{value}`"))
        };
        match key {
            "nu_i" => self.system.nu_i = number()?,
            "nu_s" => self.system.nu_s = number()?,
            "j" => self.system.j = number()?,
            "t2star" => self.system.t2_star = number()?,
            "points" => {
                self.points = value
                    .parse()
                    .map_err(|_| format!("`points` expects a positive integer, found `{value}`"))?
            }
            "dwell" => self.dwell = if value == "auto" { None } else { Some(number()?) },
            "pulse_duration" => self.pulse.duration = number()?,
            "truncation" => self.pulse.truncation = number()?,
            "slices" => {
                self.pulse.slices = value
                    .parse()
                    .map_err(|_| format!("`slices` expects a positive integer, found `{value}`"))?
            }
            "mode" => self.mode = value.parse()?,
            "relaxation" => {
                self.relaxation = value
                    .parse()
                    .map_err(|_| format!("`relaxation` expects true or false, found `{value}`"))?
            }
            "spectrometer_mhz" => self.spectrometer_mhz = number()?,
            _ => unreachable!("key list checked by caller"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let s = &self.system;
        for (key, v) in [("nu_i", s.nu_i), ("nu_s", s.nu_s), ("j", s.j)] {
            if !v.is_finite() {
                return Err((key, format!("`{key}` must be finite")));
            }
        }
        if !(s.t2_star > 0.0) {
            return Err(("t2star", "`t2star` must be positive (inf allowed)".into()));
        }
        if self.points < 2 || !self.points.is_power_of_two() {
            return Err(("points", "`points` must be a power of two >= 2".into()));
        }
        if let Some(d) = self.dwell {
            if !(d > 0.0) || !d.is_finite() {
                return Err(("dwell", "`dwell` must be positive or `auto`".into()));
            }
        }
        if !(self.pulse.duration > 0.0) || !self.pulse.duration.is_finite() {
            return Err(("pulse_duration", "`pulse_duration` must be positive".into()));
        }
        if !(self.pulse.truncation > 0.0 && self.pulse.truncation < 1.0) {
            return Err(("truncation", "`truncation` must lie in (0, 1)".into()));
        }
        if self.pulse.slices < MIN_SLICES {
            return Err(("slices", format!("`slices` must be at least {MIN_SLICES}")));
        }
        if !(self.spectrometer_mhz > 0.0) || !self.spectrometer_mhz.is_finite() {
            return Err(("spectrometer_mhz", "`spectrometer_mhz` must be positive".into()));
        }
        Ok(())
    }

    pub fn sequence_mode(&self) -> Mode {
        match self.mode {
            ModeName::Ideal => Mode::Ideal,
            ModeName::Shaped => Mode::Shaped(self.pulse),
        }
    }

    pub fn acquisition(&self) -> crate::Result<Acquisition> {
        match self.dwell {
            Some(d) => Acquisition::new(self.points, d),
            None => Acquisition::auto_with_points(&self.system, self.points),
        }
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let s = &self.system;
        let mode = match self.mode {
            ModeName::Ideal => "ideal",
            ModeName::Shaped => "shaped",
        };
        let dwell = self.dwell.map_or("auto".to_string(), |d| d.to_string());
        format!(
            "nu_i = {}\nnu_s = {}\nj = {}\nt2star = {}\npoints = {}\ndwell = {}\n\
             pulse_duration = {}\ntruncation = {}\nslices = {}\nmode = {}\nrelaxation = {}\n\
             spectrometer_mhz = {}\n",
            s.nu_i,
            s.nu_s,
            s.j,
            s.t2_star,
            self.points,
            dwell,
            self.pulse.duration,
            self.pulse.truncation,
            self.pulse.slices,
            mode,
            self.relaxation,
            self.spectrometer_mhz
        )
    }
}
