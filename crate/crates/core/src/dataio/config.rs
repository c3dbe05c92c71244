// Copyright 2026 The epm-coherence Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, stored as JSON.
//!
//! ```json
//! {
//!   "alpha": 7.8539816339744828e-1,
//!   "omega_tau": 5.6548667764616276e0,
//!   "tau_ns": 1.9e2,
//!   "p_abs": 7.0e-1,
//!   "p_d": 2.55e-1,
//!   "state": "mix:0.38",
//!   "beta": null,
//!   "N_max": 20,
//!   "shots": 1000000,
//!   "seed": 0,
//!   "bootstrap_resamples": 1000
//! }
//! ```
//!
//! `alpha`, `omega_tau`, `tau_ns`, `p_abs` and `p_d` are required; the rest
//! default as shown. A non-null `beta` replaces the populations of `state`
//! by thermal ones at that inverse temperature, keeping its coherence.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::channel::PulseParams;
use crate::montecarlo::{ShotConfig, DEFAULT_RESAMPLES, DEFAULT_SHOTS};
use crate::thermo::{DensityMatrix, EnergyLevels};
use crate::{Error, Result};

pub const DEFAULT_N_MAX: u32 = 20;
pub const DEFAULT_TAU_NS: f64 = 190.0;

/// Initial state selector: `ket0`, `ket1`, `plus-y`, `minus-y` or `mix:p`
/// (the experimental family `p|0⟩⟨0| + (1−p)|+⟩_y⟨+|`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateSpec {
    Ket0,
    Ket1,
    PlusY,
    MinusY,
    Mix(f64),
}

impl StateSpec {
    pub fn density(&self) -> Result<DensityMatrix<f64>> {
        match *self {
            StateSpec::Ket0 => Ok(DensityMatrix::ket0()),
            StateSpec::Ket1 => Ok(DensityMatrix::ket1()),
            StateSpec::PlusY => Ok(DensityMatrix::plus_y()),
            StateSpec::MinusY => Ok(DensityMatrix::minus_y()),
            StateSpec::Mix(p) => DensityMatrix::experimental(p),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ket0 => f.write_str("ket0"),
            StateSpec::Ket1 => f.write_str("ket1"),
            StateSpec::PlusY => f.write_str("plus-y"),
            StateSpec::MinusY => f.write_str("minus-y"),
            StateSpec::Mix(p) => write!(f, "mix:{p}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ket0" => Ok(StateSpec::Ket0),
            "ket1" => Ok(StateSpec::Ket1),
            "plus-y" => Ok(StateSpec::PlusY),
            "minus-y" => Ok(StateSpec::MinusY),
            _ => {
                let p = s
                    .strip_prefix("mix:")
                    .ok_or_else(|| format!("unknown state `{s}` (expected ket0, ket1, plus-y, minus-y or mix:p)"))?
                    .parse::<f64>()
                    .map_err(|e| format!("bad mixing probability in `{s}`: {e}"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("mixing probability {p} outside [0, 1]"));
                }
                Ok(StateSpec::Mix(p))
            }
        }
    }
}

impl Serialize for StateSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub omega_tau: f64,
    pub tau_ns: f64,
    pub p_abs: f64,
    pub p_d: f64,
    pub state: StateSpec,
    pub beta: Option<f64>,
    #[serde(rename = "N_max")]
    pub n_max: u32,
    pub shots: u64,
    pub seed: u64,
    pub bootstrap_resamples: u32,
}

impl Default for ExperimentConfig {
    /// Fitted NV-centre parameters and the `p = 0.38` mixed state.
    fn default() -> Self {
        let p = PulseParams::<f64>::nv_defaults();
        ExperimentConfig {
            alpha: p.alpha,
            omega_tau: p.omega_tau,
            tau_ns: DEFAULT_TAU_NS,
            p_abs: p.p_abs,
            p_d: p.p_d,
            state: StateSpec::Mix(0.38),
            beta: None,
            n_max: DEFAULT_N_MAX,
            shots: DEFAULT_SHOTS,
            seed: 0,
            bootstrap_resamples: DEFAULT_RESAMPLES,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    alpha: Option<f64>,
    omega_tau: Option<f64>,
    tau_ns: Option<f64>,
    p_abs: Option<f64>,
    p_d: Option<f64>,
    state: Option<String>,
    beta: Option<f64>,
    #[serde(rename = "N_max")]
    n_max: Option<u32>,
    shots: Option<u64>,
    seed: Option<u64>,
    bootstrap_resamples: Option<u32>,
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::parse(None, Some(field), message)
}

impl ExperimentConfig {
    pub fn pulse_params(&self) -> Result<PulseParams<f64>> {
        PulseParams::new(self.p_abs, self.p_d, self.alpha, self.omega_tau)
    }

    pub fn levels(&self) -> EnergyLevels<f64> {
        EnergyLevels::qubit(self.omega_tau)
    }

    pub fn shot_config(&self) -> Result<ShotConfig> {
        ShotConfig::new(self.shots, self.seed, self.bootstrap_resamples)
    }

    /// `state`, with populations replaced by thermal ones when `beta` is set.
    pub fn initial_state(&self) -> Result<DensityMatrix<f64>> {
        let base = self.state.density()?;
        match self.beta {
            None => Ok(base),
            Some(beta) => DensityMatrix::thermal_with_coherence(&self.levels(), beta, &base.coherence()),
        }
    }

    /// Range checks, reported against the offending field.
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(field_error(name, format!("{v} outside [0, 1]")))
            }
        };
        unit("p_abs", self.p_abs)?;
        unit("p_d", self.p_d)?;
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.alpha) {
            return Err(field_error("alpha", format!("{} outside [0, pi/2]", self.alpha)));
        }
        if !self.omega_tau.is_finite() {
            return Err(field_error("omega_tau", "must be finite"));
        }
        if !(self.tau_ns > 0.0 && self.tau_ns.is_finite()) {
            return Err(field_error("tau_ns", format!("{} must be positive", self.tau_ns)));
        }
        if let Some(b) = self.beta {
            if !b.is_finite() {
                return Err(field_error("beta", "must be finite"));
            }
        }
        if self.shots == 0 {
            return Err(field_error("shots", "must be at least 1"));
        }
        self.shot_config()
            .map_err(|e| field_error("bootstrap_resamples", e.to_string()))?;
        self.initial_state().map_err(|e| field_error("state", e.to_string()))?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| {
            let line = (e.line() > 0).then_some(e.line() as u64);
            let message = e.to_string();
            let field = message
                .strip_prefix("unknown field `")
                .and_then(|rest| rest.split('`').next())
                .map(str::to_owned);
            Error::Parse { line, field, message }
        })?;
        let required = |name: &str, v: Option<f64>| v.ok_or_else(|| field_error(name, "required field is missing"));
        let config = ExperimentConfig {
            alpha: required("alpha", raw.alpha)?,
            omega_tau: required("omega_tau", raw.omega_tau)?,
            tau_ns: required("tau_ns", raw.tau_ns)?,
            p_abs: required("p_abs", raw.p_abs)?,
            p_d: required("p_d", raw.p_d)?,
            state: match raw.state {
                Some(s) => s.parse().map_err(|m: String| field_error("state", m))?,
                None => ExperimentConfig::default().state,
            },
            beta: raw.beta,
            n_max: raw.n_max.unwrap_or(DEFAULT_N_MAX),
            shots: raw.shots.unwrap_or(DEFAULT_SHOTS),
            seed: raw.seed.unwrap_or(0),
            bootstrap_resamples: raw.bootstrap_resamples.unwrap_or(DEFAULT_RESAMPLES),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Pretty JSON with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Pretty-printing JSON formatter that writes floats as `{:.16e}`.
pub struct PreciseFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for PreciseFormatter {
    fn default() -> Self {
        PreciseFormatter {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes any value with [`PreciseFormatter`].
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser).expect("serialization to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
