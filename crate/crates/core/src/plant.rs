//! Fixed-step simulation of the three-phase four-wire test system: stiff
//! source, unbalanced non-linear loads, a disturbance burst on line 1 and the
//! four-leg shunt converter at the point of common coupling (PCC).
//!
//! Sign convention: the converter injects current into the PCC, so the
//! source supplies `i_source = i_line - i_injected`, where `i_line` is the
//! measured load-side current (loads plus disturbance).

use crate::config::{ConfigError, ScenarioConfig};
use crate::control::{
    hysteresis_step, ControlError, ControlOutput, Controller, HysteresisState, Polarity, StrategyKind,
};
use crate::transform::ThreePhaseSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSpec {
    /// Line-to-neutral RMS voltage.
    pub v_rms: f64,
    pub frequency: f64,
    /// Per-phase amplitude multipliers (R, S, T).
    pub amplitude_scale: [f64; 3],
    /// Per-phase phase offsets in radians (R, S, T).
    pub phase_offset: [f64; 3],
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self {
            v_rms: 110.0,
            frequency: 50.0,
            amplitude_scale: [1.0; 3],
            phase_offset: [0.0; 3],
        }
    }
}

impl SourceSpec {
    pub fn peak(&self) -> f64 {
        SQRT_2 * self.v_rms
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }
}

pub fn source_voltages(t: f64, spec: &SourceSpec) -> ThreePhaseSample {
    let shifts = [0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0];
    let wt = spec.omega() * t;
    let mut v = [0.0; 3];
    for k in 0..3 {
        v[k] = spec.peak() * spec.amplitude_scale[k] * (wt + shifts[k] + spec.phase_offset[k]).sin();
    }
    ThreePhaseSample::from_array(v)
}

/// Series resistance and inductance of each phase conductor between source
/// and PCC. The PCC is held stiff, so the line only contributes loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineSpec {
    pub resistance: f64,
    pub inductance: f64,
}

impl Default for LineSpec {
    fn default() -> Self {
        Self {
            resistance: 0.07,
            inductance: 0.045,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadSpec {
    Linear { resistance: f64, inductance: f64 },
    HalfWaveRectified { resistance: f64 },
    ClippedResistive { resistance: f64, clip_fraction: f64 },
}

impl LoadSpec {
    pub fn resistance(&self) -> f64 {
        match *self {
            LoadSpec::Linear { resistance, .. }
            | LoadSpec::HalfWaveRectified { resistance }
            | LoadSpec::ClippedResistive { resistance, .. } => resistance,
        }
    }

    /// Steady-state current peak when fed by `v_peak` at angular frequency `omega`.
    pub fn nominal_peak(&self, v_peak: f64, omega: f64) -> f64 {
        match *self {
            LoadSpec::Linear { resistance, inductance } => v_peak / resistance.hypot(omega * inductance),
            LoadSpec::HalfWaveRectified { resistance } => v_peak / resistance,
            LoadSpec::ClippedResistive {
                resistance,
                clip_fraction,
            } => clip_fraction * v_peak / resistance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadSet {
    pub r: LoadSpec,
    pub s: LoadSpec,
    pub t: LoadSpec,
}

impl Default for LoadSet {
    fn default() -> Self {
        Self {
            r: LoadSpec::HalfWaveRectified { resistance: 8.0 },
            s: LoadSpec::Linear {
                resistance: 12.0,
                inductance: 0.020,
            },
            t: LoadSpec::ClippedResistive {
                resistance: 10.0,
                clip_fraction: 0.7,
            },
        }
    }
}

impl LoadSet {
    pub fn phases(&self) -> [LoadSpec; 3] {
        [self.r, self.s, self.t]
    }

    pub fn nominal_peak(&self, source: &SourceSpec) -> f64 {
        self.phases()
            .iter()
            .map(|l| l.nominal_peak(source.peak(), source.omega()))
            .fold(0.0, f64::max)
    }
}

/// Integration state of one load branch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadState {
    pub current: f64,
    pub prev_voltage: f64,
}

/// Advance one load branch by `dt` at terminal voltage `v`.
/// `v_peak` is the nominal source peak used by the clipping load.
pub fn load_current(v: f64, state: &mut LoadState, spec: &LoadSpec, dt: f64, v_peak: f64) -> f64 {
    let i = match *spec {
        LoadSpec::Linear { resistance, inductance } if inductance > 0.0 => {
            let a = resistance * dt / (2.0 * inductance);
            ((1.0 - a) * state.current + dt / (2.0 * inductance) * (v + state.prev_voltage)) / (1.0 + a)
        }
        LoadSpec::Linear { resistance, .. } => v / resistance,
        LoadSpec::HalfWaveRectified { resistance } => v.max(0.0) / resistance,
        LoadSpec::ClippedResistive {
            resistance,
            clip_fraction,
        } => {
            let lim = clip_fraction * v_peak;
            v.clamp(-lim, lim) / resistance
        }
    };
    state.current = i;
    state.prev_voltage = v;
    i
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceSpec {
    /// Phase index 1..=3 (1 = R).
    pub line: usize,
    pub start: f64,
    pub end: f64,
    /// Peak amplitude in amperes; `None` means 0.3 x nominal load peak.
    pub amplitude: Option<f64>,
    pub center: f64,
    pub bandwidth: f64,
    pub tones: usize,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            line: 1,
            start: 0.088,
            end: 0.094,
            amplitude: None,
            center: 750.0,
            bandwidth: 500.0,
            tones: 12,
        }
    }
}

pub const DISTURBANCE_RAMP: f64 = 0.5e-3;
pub const DEFAULT_DISTURBANCE_FRACTION: f64 = 0.3;

/// Seeded band-limited burst: a sum of tones drawn uniformly from
/// `center +- bandwidth/2`, scaled so its peak equals the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub spec: DisturbanceSpec,
    amplitude: f64,
    tones: Vec<(f64, f64)>,
    scale: f64,
}

impl Disturbance {
    pub fn new(spec: DisturbanceSpec, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = (spec.center - 0.5 * spec.bandwidth).max(0.0);
        let hi = spec.center + 0.5 * spec.bandwidth;
        let tones: Vec<(f64, f64)> = (0..spec.tones.max(1))
            .map(|_| {
                let f = if hi > lo { rng.random_range(lo..hi) } else { lo };
                (f, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let mut d = Self {
            spec,
            amplitude,
            tones,
            scale: 1.0,
        };
        let n = ((spec.end - spec.start) / 1e-6).ceil().max(1.0) as usize;
        let peak = (0..=n)
            .map(|k| d.raw(spec.start + (spec.end - spec.start) * k as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        d.scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
        d
    }

    fn raw(&self, t: f64) -> f64 {
        self.tones.iter().map(|&(f, ph)| (2.0 * PI * f * t + ph).sin()).sum()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Phase index 0..3 the burst is injected into.
    pub fn phase(&self) -> usize {
        self.spec.line.clamp(1, 3) - 1
    }

    pub fn current(&self, t: f64) -> f64 {
        let (a, b) = (self.spec.start, self.spec.end);
        if !(t >= a && t <= b) || b <= a {
            return 0.0;
        }
        let ramp = DISTURBANCE_RAMP.min(0.5 * (b - a));
        let edge = (t - a).min(b - t);
        let w = if edge >= ramp {
            1.0
        } else {
            0.5 * (1.0 - (PI * edge / ramp).cos())
        };
        (w * self.scale * self.raw(t)).clamp(-self.amplitude, self.amplitude)
    }
}

pub fn disturbance_current(t: f64, d: &Disturbance) -> f64 {
    d.current(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConverterMode {
    /// Injected current equals the reference.
    #[default]
    Ideal,
    /// Hysteresis-switched legs behind interface inductors.
    Switched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConverterSpec {
    pub mode: ConverterMode,
    pub vdc: f64,
    pub inductance: f64,
    pub resistance: f64,
    pub hysteresis_band: f64,
    pub apf_on_time: f64,
    pub polarity: Polarity,
}

impl Default for ConverterSpec {
    fn default() -> Self {
        Self {
            mode: ConverterMode::Ideal,
            vdc: 400.0,
            inductance: 3e-3,
            resistance: 0.05,
            hysteresis_band: 0.5,
            apf_on_time: 0.04,
            polarity: Polarity::Physical,
        }
    }
}

impl ConverterSpec {
    /// Worst-case tracking error of a switched leg: band plus one step of slew.
    pub fn tracking_bound(&self, dt: f64) -> f64 {
        self.hysteresis_band + dt * self.vdc / (2.0 * self.inductance)
    }
}

/// Leg currents (R, S, T, N) and switch states of the converter.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConverterState {
    pub currents: [f64; 4],
    pub switches: HysteresisState,
}

/// Advance the converter one step. `refs` and the result are (R, S, T, N)
/// currents injected into the PCC; the neutral leg faces 0 V.
pub fn converter_step(
    refs: [f64; 4],
    v_pcc: ThreePhaseSample,
    state: &mut ConverterState,
    spec: &ConverterSpec,
    dt: f64,
    enabled: bool,
) -> [f64; 4] {
    if !enabled {
        *state = ConverterState::default();
        return [0.0; 4];
    }
    match spec.mode {
        ConverterMode::Ideal => {
            state.currents = refs;
        }
        ConverterMode::Switched => {
            let back = [v_pcc.r, v_pcc.s, v_pcc.t, 0.0];
            let a = spec.resistance * dt / (2.0 * spec.inductance);
            for k in 0..4 {
                let leg = hysteresis_step(
                    state.currents[k],
                    refs[k],
                    state.switches.legs[k],
                    spec.hysteresis_band,
                    spec.polarity,
                );
                state.switches.legs[k] = leg;
                let drive = leg.leg_voltage(spec.vdc) - back[k];
                state.currents[k] = ((1.0 - a) * state.currents[k] + dt / spec.inductance * drive) / (1.0 + a);
            }
        }
    }
    state.currents
}

/// One recorded simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TraceRecord {
    pub time: f64,
    pub voltage: ThreePhaseSample,
    /// Measured line current: loads plus disturbance.
    pub line_current: ThreePhaseSample,
    pub line_neutral: f64,
    pub disturbance: f64,
    pub apf_current: ThreePhaseSample,
    pub apf_neutral: f64,
    pub source_current: ThreePhaseSample,
    pub source_neutral: f64,
    pub line_loss: f64,
    pub control: ControlOutput,
    pub switches: u8,
}

pub const TRACE_COLUMNS: [&str; 34] = [
    "time",
    "v_r",
    "v_s",
    "v_t",
    "il_r",
    "il_s",
    "il_t",
    "il_n",
    "disturbance",
    "iapf_r",
    "iapf_s",
    "iapf_t",
    "iapf_n",
    "is_r",
    "is_s",
    "is_t",
    "is_n",
    "ref_r",
    "ref_s",
    "ref_t",
    "ref_n",
    "res_r",
    "res_s",
    "res_t",
    "p",
    "p_bar",
    "p_tilde",
    "q_alpha",
    "q_beta",
    "q_zero",
    "line_loss",
    "switches",
    "voltage_collapse",
    "apf_on",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub strategy: StrategyKind,
    pub dt: f64,
    pub fundamental: f64,
    pub apf_on_time: f64,
    pub disturbance_window: (f64, f64),
    pub records: Vec<TraceRecord>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn column<F: Fn(&TraceRecord) -> f64>(&self, f: F) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// One record as the numeric row of [`TRACE_COLUMNS`].
    pub fn row(&self, r: &TraceRecord) -> [f64; TRACE_COLUMNS.len()] {
        let c = &r.control;
        [
            r.time,
            r.voltage.r,
            r.voltage.s,
            r.voltage.t,
            r.line_current.r,
            r.line_current.s,
            r.line_current.t,
            r.line_neutral,
            r.disturbance,
            r.apf_current.r,
            r.apf_current.s,
            r.apf_current.t,
            r.apf_neutral,
            r.source_current.r,
            r.source_current.s,
            r.source_current.t,
            r.source_neutral,
            c.reference.r,
            c.reference.s,
            c.reference.t,
            c.neutral_reference,
            c.residual.r,
            c.residual.s,
            c.residual.t,
            c.power.p,
            c.power.p_bar,
            c.power.p_tilde,
            c.power.q.alpha,
            c.power.q.beta,
            c.power.q.zero,
            r.line_loss,
            f64::from(r.switches),
            f64::from(u8::from(c.voltage_collapse)),
            f64::from(u8::from(r.time >= self.apf_on_time)),
        ]
    }

    /// A column by its [`TRACE_COLUMNS`] name.
    pub fn named_column(&self, name: &str) -> Option<Vec<f64>> {
        let k = TRACE_COLUMNS.iter().position(|c| *c == name)?;
        Some(self.records.iter().map(|r| self.row(r)[k]).collect())
    }

    /// Write the trace as CSV with the columns of [`TRACE_COLUMNS`].
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_COLUMNS)?;
        for r in &self.records {
            w.write_record(self.row(r).iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Everything the time loop needs, already validated.
#[derive(Debug, Clone)]
pub struct PlantSetup {
    pub source: SourceSpec,
    pub line: LineSpec,
    pub loads: LoadSet,
    pub disturbance: Disturbance,
    pub converter: ConverterSpec,
    pub dt: f64,
    pub steps: usize,
}

/// Run the fixed-step loop with one controller.
pub fn run(setup: &PlantSetup, mut controller: Controller) -> Result<SimulationTrace, ControlError> {
    let PlantSetup {
        source,
        line,
        loads,
        disturbance,
        converter,
        dt,
        steps,
    } = setup;
    let dt = *dt;
    let specs = loads.phases();
    let mut load_states = [LoadState::default(); 3];
    let mut conv = ConverterState::default();
    let mut records = Vec::with_capacity(*steps);

    for k in 0..*steps {
        let t = k as f64 * dt;
        let v = source_voltages(t, source);
        let va = v.to_array();
        let mut il = [0.0; 3];
        for p in 0..3 {
            il[p] = load_current(va[p], &mut load_states[p], &specs[p], dt, source.peak());
        }
        let d = disturbance.current(t);
        il[disturbance.phase()] += d;
        let line_current = ThreePhaseSample::from_array(il);

        let control = controller.step(v, line_current)?;
        let refs = [
            control.reference.r,
            control.reference.s,
            control.reference.t,
            control.neutral_reference,
        ];
        let inj = converter_step(refs, v, &mut conv, converter, dt, t >= converter.apf_on_time);
        let apf_current = ThreePhaseSample::new(inj[0], inj[1], inj[2]);
        let source_current = line_current - apf_current;
        debug_assert!(((source_current + apf_current) - line_current).norm() <= 1e-9 * (1.0 + line_current.norm()));

        records.push(TraceRecord {
            time: t,
            voltage: v,
            line_current,
            line_neutral: -line_current.sum(),
            disturbance: d,
            apf_current,
            apf_neutral: inj[3],
            source_current,
            source_neutral: -source_current.sum(),
            line_loss: line.resistance * source_current.dot(source_current),
            control,
            switches: conv.switches.upper_mask(),
        });
    }

    let settings = controller.settings();
    Ok(SimulationTrace {
        strategy: settings.strategy,
        dt,
        fundamental: settings.fundamental,
        apf_on_time: converter.apf_on_time,
        disturbance_window: (disturbance.spec.start, disturbance.spec.end),
        records,
    })
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Validate `cfg` and run it with its configured strategy.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulationTrace, SimulationError> {
    simulate_strategy(cfg, cfg.strategy)
}

/// Run `cfg` with `strategy` in place of the configured one.
pub fn simulate_strategy(cfg: &ScenarioConfig, strategy: StrategyKind) -> Result<SimulationTrace, SimulationError> {
    cfg.validate()?;
    let controller = Controller::new(cfg.controller_settings(strategy))?;
    Ok(run(&cfg.plant_setup(), controller)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_at_zero() {
        let v = source_voltages(0.0, &SourceSpec::default());
        let e = SQRT_2 * 110.0 * (2.0 * PI / 3.0).sin();
        assert!(v.r.abs() < 1e-12);
        assert!((v.s + e).abs() < 1e-9 && (v.t - e).abs() < 1e-9);
    }

    #[test]
    fn source_balanced_and_rms() {
        let spec = SourceSpec::default();
        let n = 10_000;
        let mut acc = [0.0; 3];
        for k in 0..n {
            let v = source_voltages(k as f64 * 0.02 / n as f64, &spec);
            assert!(v.sum().abs() < 1e-9);
            for (a, x) in acc.iter_mut().zip(v.to_array()) {
                *a += x * x;
            }
        }
        for a in acc {
            assert!(((a / n as f64).sqrt() - 110.0).abs() < 0.1);
        }
    }

    #[test]
    fn load_examples() {
        let mut st = LoadState::default();
        let lin = LoadSpec::Linear {
            resistance: 5.0,
            inductance: 0.0,
        };
        assert_eq!(load_current(10.0, &mut st, &lin, 1e-5, 155.0), 2.0);
        let hw = LoadSpec::HalfWaveRectified { resistance: 5.0 };
        assert_eq!(load_current(-10.0, &mut st, &hw, 1e-5, 155.0), 0.0);
        let cl = LoadSpec::ClippedResistive {
            resistance: 10.0,
            clip_fraction: 0.5,
        };
        assert_eq!(load_current(100.0, &mut st, &cl, 1e-5, 100.0), 5.0);
        assert_eq!(load_current(-30.0, &mut st, &cl, 1e-5, 100.0), -3.0);
    }

    #[test]
    fn rl_step_time_constant() {
        let (r, l, dt) = (10.0, 0.02, 20e-6);
        let spec = LoadSpec::Linear {
            resistance: r,
            inductance: l,
        };
        let mut st = LoadState::default();
        let mut samples = Vec::new();
        for k in 0..2000 {
            samples.push((k as f64 * dt, load_current(1.0, &mut st, &spec, dt, 1.0)));
        }
        // first sample sees the average of the 0 -> 1 step; fit on the tail
        let fin = 1.0 / r;
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .skip(5)
            .filter(|(_, i)| fin - i > 1e-3 * fin)
            .map(|&(t, i)| (t, (fin - i).ln()))
            .collect();
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
        let tau = -1.0 / slope;
        assert!((tau / (l / r) - 1.0).abs() < 0.05, "tau {tau}");
    }

    fn burst() -> Disturbance {
        Disturbance::new(DisturbanceSpec::default(), 3.0, 7)
    }

    #[test]
    fn burst_bounds() {
        let d = burst();
        assert_eq!(d.current(0.05), 0.0);
        assert_eq!(d.current(0.2), 0.0);
        assert!(d.current(0.091) != 0.0);
        for k in 0..=6000 {
            let t = 0.088 + k as f64 * 1e-6;
            assert!(d.current(t).abs() <= 3.0);
        }
        assert!(d.current(0.088).abs() < 1e-12);
    }

    #[test]
    fn burst_energy_in_band() {
        let d = burst();
        let fs = 100_000.0;
        let n = 4_000;
        let x: Vec<f64> = (0..n).map(|k| d.current(0.08 + k as f64 / fs)).collect();
        let (mut inside, mut total) = (0.0, 0.0);
        for b in 0..=n / 2 {
            let f = b as f64 * fs / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (k, v) in x.iter().enumerate() {
                let a = -2.0 * PI * (b * k) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            let e = re * re + im * im;
            total += e;
            if (f - 750.0).abs() <= 500.0 {
                inside += e;
            }
        }
        assert!(inside / total > 0.9, "ratio {}", inside / total);
    }

    #[test]
    fn burst_is_seeded() {
        let a = Disturbance::new(DisturbanceSpec::default(), 3.0, 1);
        let b = Disturbance::new(DisturbanceSpec::default(), 3.0, 1);
        let c = Disturbance::new(DisturbanceSpec::default(), 3.0, 2);
        assert_eq!(a.current(0.09).to_bits(), b.current(0.09).to_bits());
        assert_ne!(a.current(0.09), c.current(0.09));
    }

    #[test]
    fn converter_modes() {
        let spec = ConverterSpec::default();
        let mut st = ConverterState::default();
        let refs = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(converter_step(refs, ThreePhaseSample::ZERO, &mut st, &spec, 20e-6, true), refs);
        assert_eq!(converter_step(refs, ThreePhaseSample::ZERO, &mut st, &spec, 20e-6, false), [0.0; 4]);
    }

    fn track(v_pcc: impl Fn(f64) -> ThreePhaseSample, bound: f64) {
        // lossless leg: any R_f drop would add to the slew
        let spec = ConverterSpec {
            mode: ConverterMode::Switched,
            resistance: 0.0,
            ..ConverterSpec::default()
        };
        let dt = 20e-6;
        let mut st = ConverterState::default();
        for k in 0..10_000 {
            let t = k as f64 * dt;
            let r = 5.0 * (2.0 * PI * 50.0 * t).sin();
            let refs = [r, r, -r, 0.0];
            let i = converter_step(refs, v_pcc(t), &mut st, &spec, dt, true);
            if t >= 2e-3 {
                for j in 0..4 {
                    assert!((i[j] - refs[j]).abs() <= bound, "leg {j} t {t}");
                }
            }
        }
    }

    #[test]
    fn switched_leg_tracks_reference() {
        let spec = ConverterSpec::default();
        track(|_| ThreePhaseSample::ZERO, spec.tracking_bound(20e-6));
    }

    #[test]
    fn switched_leg_tracks_against_pcc_voltage() {
        // the back-EMF adds up to the PCC peak to the one-step slew
        let spec = ConverterSpec::default();
        let src = SourceSpec::default();
        let bound = spec.hysteresis_band + 20e-6 * (0.5 * spec.vdc + src.peak()) / spec.inductance;
        track(|t| source_voltages(t, &src), bound);
    }
}
