//! Reference-current generation for the shunt filter.
//!
//! Both strategies share one pipeline: split the measured line current into
//! a fundamental part `I_m` and a residual part `I_n`, run the modified p-q
//! compensation on `I_m`, and add `I_n` back as its own compensating current.
//! The EMD-assisted strategy estimates `I_n` by decomposing a sliding window
//! of each phase current; the plain strategy fixes `I_n = 0`.

pub mod hysteresis;

pub use hysteresis::{hysteresis_step, HysteresisState, LegState, Polarity};

use crate::emd::{decompose, zero_crossing_rate, EmdConfig, EmdError, ImfSet, Signal};
use crate::power::{PowerError, PowerSample, PowerSplitter};
use crate::transform::{ab0_to_abc, abc_to_ab0, AlphaBeta0Sample, ThreePhaseSample};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("voltage collapse: |v|^2 = {norm_sq} below floor {floor}")]
    VoltageCollapse { norm_sq: f64, floor: f64 },
    #[error(transparent)]
    Emd(#[from] EmdError),
    #[error(transparent)]
    Power(#[from] PowerError),
    #[error("invalid window: {0}")]
    Window(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// EMD residual separation followed by modified p-q on the fundamental.
    #[default]
    EmdHybrid,
    /// Modified p-q applied directly to the measured current.
    PlainModifiedPq,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::EmdHybrid => "emd_hybrid",
            StrategyKind::PlainModifiedPq => "plain_modified_pq",
        }
    }
}

/// How the residual compensating current enters the total reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualSign {
    /// `I_Cref = I_Cm + I_Cn`; the source then carries only the fundamental.
    #[default]
    Add,
    /// `I_Cref = I_Cm - I_Cn`, the printed form of the composition.
    Subtract,
}

/// Window of measurements handed to the current splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrameWindow {
    pub currents: Vec<ThreePhaseSample>,
    pub voltages: Vec<ThreePhaseSample>,
    pub sample_rate: f64,
    pub fundamental: f64,
}

/// `fundamental + residual == measured` for every sample, to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentSplit {
    pub fundamental: Vec<ThreePhaseSample>,
    pub residual: Vec<ThreePhaseSample>,
}

/// Relative band around the fundamental used to pick the fundamental IMF.
pub const FUNDAMENTAL_BAND: f64 = 0.3;

/// Split an IMF set into a fundamental part (the IMF whose zero-crossing rate
/// is nearest the fundamental within +-30 %, plus the residue) and a residual
/// part. IMFs slower than the chosen one are trend pieces left over from
/// boundary effects and join the fundamental side with the residue.
pub fn classify_components(imfs: &ImfSet, fundamental: f64) -> (Vec<f64>, Vec<f64>) {
    let n = imfs.residue.len();
    let chosen = imfs
        .imfs
        .iter()
        .enumerate()
        .map(|(k, imf)| (k, (zero_crossing_rate(imf) - fundamental).abs()))
        .filter(|(_, dev)| *dev <= FUNDAMENTAL_BAND * fundamental)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k);

    let mut fundamental_part = imfs.residue.samples().to_vec();
    let mut residual_part = vec![0.0; n];
    let slow = chosen.map_or(0.0, |k| zero_crossing_rate(&imfs.imfs[k]));
    for (k, imf) in imfs.imfs.iter().enumerate() {
        let target = if Some(k) == chosen || zero_crossing_rate(imf) < slow {
            &mut fundamental_part
        } else {
            &mut residual_part
        };
        for (t, x) in target.iter_mut().zip(imf.samples()) {
            *t += x;
        }
    }
    (fundamental_part, residual_part)
}

fn phase(samples: &[ThreePhaseSample], k: usize) -> Vec<f64> {
    samples.iter().map(|s| s.to_array()[k]).collect()
}

/// Per-phase EMD split of a window of line currents.
pub fn split_current(window: &ReferenceFrameWindow, cfg: &EmdConfig) -> Result<CurrentSplit, ControlError> {
    let n = window.currents.len();
    let mut residual = vec![[0.0; 3]; n];
    for k in 0..3 {
        let signal = Signal::new(phase(&window.currents, k), window.sample_rate)?;
        let set = decompose(&signal, cfg);
        let (_, res) = classify_components(&set, window.fundamental);
        for (r, x) in residual.iter_mut().zip(res) {
            r[k] = x;
        }
    }
    let residual: Vec<ThreePhaseSample> = residual.into_iter().map(ThreePhaseSample::from_array).collect();
    let fundamental = window
        .currents
        .iter()
        .zip(&residual)
        .map(|(&i, &r)| i - r)
        .collect();
    Ok(CurrentSplit {
        fundamental,
        residual,
    })
}

/// The current that carries real power `p_tilde` and the realizable part of
/// imaginary power `q` at voltage `v`: `(p_tilde v + q x v) / |v|^2`.
pub fn compensating_current_m(
    v: AlphaBeta0Sample,
    p_tilde: f64,
    q: AlphaBeta0Sample,
    floor: f64,
) -> Result<AlphaBeta0Sample, ControlError> {
    let norm_sq = v.norm_sq();
    if !(norm_sq >= floor) || norm_sq == 0.0 {
        return Err(ControlError::VoltageCollapse { norm_sq, floor });
    }
    let qxv = q.cross(v);
    Ok(AlphaBeta0Sample {
        alpha: (p_tilde * v.alpha + qxv.alpha) / norm_sq,
        beta: (p_tilde * v.beta + qxv.beta) / norm_sq,
        zero: (p_tilde * v.zero + qxv.zero) / norm_sq,
    })
}

pub fn compose_reference(i_cm: ThreePhaseSample, i_cn: ThreePhaseSample, sign: ResidualSign) -> ThreePhaseSample {
    match sign {
        ResidualSign::Add => i_cm + i_cn,
        ResidualSign::Subtract => i_cm - i_cn,
    }
}

/// Neutral leg reference: the measured neutral current, reversed.
pub fn neutral_reference(i_neutral: f64) -> f64 {
    -i_neutral
}

/// Parameters of the reference generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSettings {
    pub strategy: StrategyKind,
    pub sample_rate: f64,
    pub fundamental: f64,
    pub lowpass_cutoff: f64,
    pub window_samples: usize,
    pub hop_samples: usize,
    pub emd: EmdConfig,
    pub residual_sign: ResidualSign,
    /// Replace the EMD residual with zero (control-path regression switch).
    pub force_zero_residual: bool,
    /// Lower limit on |v|^2 for the compensating-current division.
    pub voltage_floor: f64,
}

/// Everything the controller produced for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlOutput {
    pub residual: ThreePhaseSample,
    pub fundamental: ThreePhaseSample,
    pub power: PowerSample,
    pub i_cm: ThreePhaseSample,
    pub reference: ThreePhaseSample,
    pub neutral_reference: f64,
    pub voltage_collapse: bool,
}

/// Sliding-window EMD residual estimator. Every `hop` samples the last
/// `window` samples are decomposed; between updates the residual for a sample
/// is read from the central cycle of the latest window at the same position in
/// the fundamental cycle, away from the sifting boundary effects.
#[derive(Debug, Clone)]
struct ResidualTracker {
    buffer: Vec<ThreePhaseSample>,
    head: usize,
    filled: usize,
    seen: usize,
    period: usize,
    latest: Option<(usize, Vec<ThreePhaseSample>)>,
}

impl ResidualTracker {
    fn new(window: usize, period: usize) -> Self {
        Self {
            buffer: vec![ThreePhaseSample::ZERO; window],
            head: 0,
            filled: 0,
            seen: 0,
            period,
            latest: None,
        }
    }

    fn push(&mut self, i: ThreePhaseSample, s: &ControllerSettings) -> Result<ThreePhaseSample, ControlError> {
        let w = self.buffer.len();
        self.buffer[self.head] = i;
        self.head = (self.head + 1) % w;
        self.filled = (self.filled + 1).min(w);
        let step = self.seen;
        self.seen += 1;

        if self.filled == w && (self.seen - w) % s.hop_samples == 0 {
            let currents: Vec<ThreePhaseSample> = (0..w).map(|k| self.buffer[(self.head + k) % w]).collect();
            let window = ReferenceFrameWindow {
                currents,
                voltages: Vec::new(),
                sample_rate: s.sample_rate,
                fundamental: s.fundamental,
            };
            let split = split_current(&window, &s.emd)?;
            self.latest = Some((step + 1 - w, split.residual));
        }

        Ok(match &self.latest {
            Some((start, residual)) => {
                let offset = (w - self.period) / 2;
                let idx = offset + (step - start - offset) % self.period;
                residual[idx]
            }
            None => ThreePhaseSample::ZERO,
        })
    }
}

/// Streaming reference generator for one strategy instance.
#[derive(Debug, Clone)]
pub struct Controller {
    settings: ControllerSettings,
    splitter: PowerSplitter,
    tracker: Option<ResidualTracker>,
    last_i_cm: AlphaBeta0Sample,
}

impl Controller {
    pub fn new(settings: ControllerSettings) -> Result<Self, ControlError> {
        let period = (settings.sample_rate / settings.fundamental).round() as usize;
        if settings.window_samples < period.max(4) {
            return Err(ControlError::Window(format!(
                "window of {} samples is shorter than one fundamental period ({period})",
                settings.window_samples
            )));
        }
        if settings.hop_samples == 0 || settings.hop_samples > settings.window_samples {
            return Err(ControlError::Window(format!(
                "hop of {} samples must be in 1..={}",
                settings.hop_samples, settings.window_samples
            )));
        }
        let splitter = PowerSplitter::new(settings.lowpass_cutoff, settings.sample_rate)?;
        let tracker = match (settings.strategy, settings.force_zero_residual) {
            (StrategyKind::EmdHybrid, false) => Some(ResidualTracker::new(settings.window_samples, period)),
            _ => None,
        };
        Ok(Self {
            settings,
            splitter,
            tracker,
            last_i_cm: AlphaBeta0Sample::ZERO,
        })
    }

    pub fn settings(&self) -> &ControllerSettings {
        &self.settings
    }

    /// One control tick from the PCC voltage and measured line currents.
    pub fn step(&mut self, v: ThreePhaseSample, i_line: ThreePhaseSample) -> Result<ControlOutput, ControlError> {
        let residual = match self.tracker.as_mut() {
            Some(tracker) => tracker.push(i_line, &self.settings)?,
            None => ThreePhaseSample::ZERO,
        };
        let fundamental = i_line - residual;

        let v_ab0 = abc_to_ab0(v);
        let power = self.splitter.sample(v_ab0, abc_to_ab0(fundamental));
        let (i_cm_ab0, voltage_collapse) =
            match compensating_current_m(v_ab0, power.p_tilde, power.q, self.settings.voltage_floor) {
                Ok(i) => {
                    self.last_i_cm = i;
                    (i, false)
                }
                Err(ControlError::VoltageCollapse { .. }) => (self.last_i_cm, true),
                Err(e) => return Err(e),
            };
        let i_cm = ab0_to_abc(i_cm_ab0);
        let reference = compose_reference(i_cm, residual, self.settings.residual_sign);
        let load_neutral = -i_line.sum();

        Ok(ControlOutput {
            residual,
            fundamental,
            power,
            i_cm,
            reference,
            neutral_reference: neutral_reference(load_neutral),
            voltage_collapse,
        })
    }
}
