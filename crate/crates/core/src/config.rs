//! JSON scenario description. Every field has a default, so `{}` is the
//! reference scenario.

use crate::control::{ControllerSettings, ResidualSign, StrategyKind};
use crate::emd::EmdConfig;
use crate::metrics::EvalWindows;
use crate::plant::{
    ConverterSpec, Disturbance, DisturbanceSpec, LineSpec, LoadSet, LoadSpec, PlantSetup, SourceSpec,
    DEFAULT_DISTURBANCE_FRACTION,
};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::Parse { path, .. } if !path.is_empty() && path != "." => Some(path),
            _ => None,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSpec {
    pub lowpass_cutoff: f64,
    /// EMD window length in seconds.
    pub window: f64,
    /// EMD hop in seconds.
    pub hop: f64,
    pub residual_sign: ResidualSign,
    pub force_zero_residual: bool,
    /// Floor on |v|^2 as a fraction of its nominal value.
    pub voltage_floor_fraction: f64,
}

impl Default for ControlSpec {
    fn default() -> Self {
        Self {
            lowpass_cutoff: 8.0,
            window: 0.02,
            hop: 0.005,
            residual_sign: ResidualSign::Add,
            force_zero_residual: false,
            voltage_floor_fraction: 0.01,
        }
    }
}

/// File names written inside the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub trace: String,
    pub metrics: String,
    pub thd: String,
    pub summary: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trace: "trace.csv".into(),
            metrics: "metrics.csv".into(),
            thd: "thd.csv".into(),
            summary: "summary.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: SourceSpec,
    pub line: LineSpec,
    pub loads: LoadSet,
    pub disturbance: DisturbanceSpec,
    pub converter: ConverterSpec,
    pub emd: EmdConfig,
    pub control: ControlSpec,
    pub strategy: StrategyKind,
    pub evaluation: EvalWindows,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub output: OutputSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            source: SourceSpec::default(),
            line: LineSpec::default(),
            loads: LoadSet::default(),
            disturbance: DisturbanceSpec::default(),
            converter: ConverterSpec::default(),
            emd: EmdConfig::default(),
            control: ControlSpec::default(),
            strategy: StrategyKind::EmdHybrid,
            evaluation: EvalWindows::default(),
            dt: 20e-6,
            duration: 0.4,
            seed: 2024,
            output: OutputSpec::default(),
        }
    }
}

/// `seconds / dt` as a whole number of steps, if it is one.
fn whole_steps(seconds: f64, dt: f64) -> Option<usize> {
    let n = seconds / dt;
    let r = n.round();
    ((n - r).abs() <= 1e-6 * r.max(1.0) && r >= 1.0).then_some(r as usize)
}

fn positive(field: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a positive number, got {x}")))
    }
}

fn non_negative(field: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a non-negative number, got {x}")))
    }
}

fn check_load(field: &str, load: &LoadSpec) -> Result<(), ConfigError> {
    positive(&format!("{field}.resistance"), load.resistance())?;
    match *load {
        LoadSpec::Linear { inductance, .. } => non_negative(&format!("{field}.inductance"), inductance),
        LoadSpec::HalfWaveRectified { .. } => Ok(()),
        LoadSpec::ClippedResistive { clip_fraction, .. } => {
            if clip_fraction > 0.0 && clip_fraction <= 1.0 {
                Ok(())
            } else {
                Err(invalid(&format!("{field}.clip_fraction"), format!("must be in (0, 1], got {clip_fraction}")))
            }
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Resolved disturbance amplitude in amperes.
    pub fn disturbance_amplitude(&self) -> f64 {
        self.disturbance
            .amplitude
            .unwrap_or_else(|| DEFAULT_DISTURBANCE_FRACTION * self.loads.nominal_peak(&self.source))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.source;
        positive("source.v_rms", s.v_rms)?;
        positive("source.frequency", s.frequency)?;
        for k in 0..3 {
            positive(&format!("source.amplitude_scale[{k}]"), s.amplitude_scale[k])?;
            if !s.phase_offset[k].is_finite() {
                return Err(invalid(&format!("source.phase_offset[{k}]"), "must be finite"));
            }
        }
        non_negative("line.resistance", self.line.resistance)?;
        non_negative("line.inductance", self.line.inductance)?;
        check_load("loads.r", &self.loads.r)?;
        check_load("loads.s", &self.loads.s)?;
        check_load("loads.t", &self.loads.t)?;

        let d = &self.disturbance;
        if !(1..=3).contains(&d.line) {
            return Err(invalid("disturbance.line", format!("must be 1, 2 or 3, got {}", d.line)));
        }
        non_negative("disturbance.start", d.start)?;
        non_negative("disturbance.end", d.end)?;
        if d.end < d.start {
            return Err(invalid("disturbance.end", "must not precede disturbance.start"));
        }
        if let Some(a) = d.amplitude {
            non_negative("disturbance.amplitude", a)?;
        }
        positive("disturbance.center", d.center)?;
        non_negative("disturbance.bandwidth", d.bandwidth)?;
        if d.tones == 0 {
            return Err(invalid("disturbance.tones", "must be at least 1"));
        }

        let c = &self.converter;
        positive("converter.vdc", c.vdc)?;
        positive("converter.inductance", c.inductance)?;
        non_negative("converter.resistance", c.resistance)?;
        positive("converter.hysteresis_band", c.hysteresis_band)?;
        non_negative("converter.apf_on_time", c.apf_on_time)?;
        let v_peak = s.peak() * s.amplitude_scale.iter().copied().fold(0.0, f64::max);
        if 0.5 * c.vdc <= v_peak {
            return Err(invalid(
                "converter.vdc",
                format!("vdc/2 = {} must exceed the PCC peak voltage {v_peak:.3}", 0.5 * c.vdc),
            ));
        }

        let e = &self.emd;
        positive("emd.sd_threshold", e.sd_threshold)?;
        if e.max_sift_iterations == 0 {
            return Err(invalid("emd.max_sift_iterations", "must be at least 1"));
        }
        if e.max_imfs == 0 {
            return Err(invalid("emd.max_imfs", "must be at least 1"));
        }
        non_negative("emd.boundary_extension_s", e.boundary_extension_s)?;

        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        if self.duration <= c.apf_on_time {
            return Err(invalid("duration", format!("must exceed converter.apf_on_time ({})", c.apf_on_time)));
        }

        let k = &self.control;
        positive("control.lowpass_cutoff", k.lowpass_cutoff)?;
        if k.lowpass_cutoff >= 0.5 / self.dt {
            return Err(invalid("control.lowpass_cutoff", "must be below the Nyquist frequency"));
        }
        positive("control.window", k.window)?;
        positive("control.hop", k.hop)?;
        let window = whole_steps(k.window, self.dt)
            .ok_or_else(|| invalid("control.window", "must be a whole number of dt steps"))?;
        let hop =
            whole_steps(k.hop, self.dt).ok_or_else(|| invalid("control.hop", "must be a whole number of dt steps"))?;
        let period = (1.0 / (s.frequency * self.dt)).round() as usize;
        if window < period {
            return Err(invalid("control.window", "must cover at least one fundamental period"));
        }
        if hop > window {
            return Err(invalid("control.hop", "must not exceed control.window"));
        }
        non_negative("control.voltage_floor_fraction", k.voltage_floor_fraction)?;

        positive("evaluation.window", self.evaluation.window)?;
        non_negative("evaluation.settling", self.evaluation.settling)?;
        if self.evaluation.window * s.frequency < 1.0 - 1e-9 {
            return Err(invalid("evaluation.window", "must cover at least one fundamental period"));
        }
        Ok(())
    }

    pub fn controller_settings(&self, strategy: StrategyKind) -> ControllerSettings {
        let nominal = 3.0 * self.source.v_rms * self.source.v_rms;
        ControllerSettings {
            strategy,
            sample_rate: self.sample_rate(),
            fundamental: self.source.frequency,
            lowpass_cutoff: self.control.lowpass_cutoff,
            window_samples: (self.control.window / self.dt).round() as usize,
            hop_samples: (self.control.hop / self.dt).round() as usize,
            emd: self.emd,
            residual_sign: self.control.residual_sign,
            force_zero_residual: self.control.force_zero_residual,
            voltage_floor: self.control.voltage_floor_fraction * nominal,
        }
    }

    pub fn plant_setup(&self) -> PlantSetup {
        PlantSetup {
            source: self.source,
            line: self.line,
            loads: self.loads,
            disturbance: Disturbance::new(self.disturbance, self.disturbance_amplitude(), self.seed),
            converter: self.converter,
            dt: self.dt,
            steps: self.steps(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn dump_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.seed = 99;
        cfg.strategy = StrategyKind::PlainModifiedPq;
        cfg.disturbance.amplitude = Some(1.5);
        let text = cfg.to_json();
        assert!(text.contains("\"seed\": 99"));
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ScenarioConfig::from_json(r#"{"source": {"v_rms": "high"}}"#).unwrap_err();
        assert_eq!(e.field(), Some("source.v_rms"));
        let e = ScenarioConfig::from_json(r#"{"line": {"reactance": 1}}"#).unwrap_err();
        assert!(e.to_string().contains("reactance"));
        let e = ScenarioConfig::from_json(r#"{"duration": 0.03}"#).unwrap_err();
        assert_eq!(e.field(), Some("duration"));
        let e = ScenarioConfig::from_json(r#"{"loads": {"t": {"kind": "clipped_resistive", "resistance": 5, "clip_fraction": 1.5}}}"#)
            .unwrap_err();
        assert_eq!(e.field(), Some("loads.t.clip_fraction"));
        let e = ScenarioConfig::from_json(r#"{"control": {"hop": 0.00001}}"#).unwrap_err();
        assert_eq!(e.field(), Some("control.hop"));
    }

    #[test]
    fn default_amplitude_follows_loads() {
        let cfg = ScenarioConfig::default();
        let peak = 110.0 * 2f64.sqrt() / 8.0;
        assert!((cfg.disturbance_amplitude() - 0.3 * peak).abs() < 1e-12);
    }
}
