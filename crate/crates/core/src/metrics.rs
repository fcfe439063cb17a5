//! Power-quality figures computed from a [`SimulationTrace`]: active and
//! reactive power, collective power factor, per-phase THD, neutral RMS, and
//! the two-strategy comparison table.

use crate::emd::Signal;
use crate::plant::SimulationTrace;
use crate::power::{instantaneous_imaginary_power, LowPass, DEFAULT_CUTOFF_HZ};
use crate::transform::{abc_to_ab0, ThreePhaseSample};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("fundamental absent: |X1| = {x1:e} for signal norm {norm:e}")]
    FundamentalAbsent { x1: f64, norm: f64 },
    #[error("window of {samples} samples does not hold an integer number of fundamental periods")]
    NonIntegerPeriods { samples: usize },
    #[error("DFT energy {spectrum:e} disagrees with signal energy {signal:e}")]
    Parseval { spectrum: f64, signal: f64 },
    #[error("traces are not from the same scenario: {0}")]
    MismatchedScenarios(String),
}

/// Trailing-window RMS. The first samples use the partial window available.
pub fn windowed_rms(x: &Signal, window: f64) -> Signal {
    let w = ((window * x.sample_rate()).round() as usize).max(1);
    let s = x.samples();
    let mut prefix = Vec::with_capacity(s.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in s {
        acc += v * v;
        prefix.push(acc);
    }
    let out = (0..s.len())
        .map(|k| {
            let lo = (k + 1).saturating_sub(w);
            let e = (prefix[k + 1] - prefix[lo]).max(0.0);
            (e / (k + 1 - lo) as f64).sqrt()
        })
        .collect();
    Signal::new(out, x.sample_rate()).expect("rms of finite samples is finite")
}

/// Collective power factor `mean(p) / (|V| |I|)` over a trailing window of
/// `window` samples. Zero when either RMS is zero.
pub fn power_factor(v: &[ThreePhaseSample], i: &[ThreePhaseSample], window: usize) -> Vec<f64> {
    let n = v.len().min(i.len());
    let w = window.max(1);
    let mut pv = vec![0.0; n + 1];
    let mut vv = vec![0.0; n + 1];
    let mut ii = vec![0.0; n + 1];
    for k in 0..n {
        pv[k + 1] = pv[k] + v[k].dot(i[k]);
        vv[k + 1] = vv[k] + v[k].dot(v[k]);
        ii[k + 1] = ii[k] + i[k].dot(i[k]);
    }
    (0..n)
        .map(|k| {
            let lo = (k + 1).saturating_sub(w);
            let m = (k + 1 - lo) as f64;
            let p = (pv[k + 1] - pv[lo]) / m;
            let s = ((vv[k + 1] - vv[lo]).max(0.0) / m).sqrt() * ((ii[k + 1] - ii[lo]).max(0.0) / m).sqrt();
            if s > 0.0 {
                (p.abs() / s).min(1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// THD in percent over the whole of `x`, which must span an integer number
/// of fundamental periods so every harmonic falls on a DFT bin.
pub fn thd(x: &[f64], sample_rate: f64, fundamental: f64, max_harmonic: usize) -> Result<f64, MetricsError> {
    let n = x.len();
    let periods_f = n as f64 * fundamental / sample_rate;
    let periods = periods_f.round() as usize;
    if n == 0 || periods == 0 || (periods_f - periods as f64).abs() > 1e-6 * periods_f.max(1.0) {
        return Err(MetricsError::NonIntegerPeriods { samples: n });
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let signal = x.iter().map(|v| v * v).sum::<f64>();
    let spectrum = buf.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
    if (spectrum - signal).abs() > 1e-6 * signal.max(f64::MIN_POSITIVE) {
        return Err(MetricsError::Parseval { spectrum, signal });
    }
    let norm = signal.sqrt();
    let x1 = buf[periods].norm();
    if !(x1 > 1e-9 * norm) {
        return Err(MetricsError::FundamentalAbsent { x1, norm });
    }
    let top = max_harmonic.min((n / 2) / periods);
    let harm: f64 = (2..=top).map(|h| buf[h * periods].norm_sqr()).sum();
    Ok(100.0 * harm.sqrt() / x1)
}

/// Signed magnitude of the imaginary power vector: `|q|` with the sign of
/// its largest component.
pub fn reactive_magnitude(v: ThreePhaseSample, i: ThreePhaseSample) -> f64 {
    let q = instantaneous_imaginary_power(abc_to_ab0(v), abc_to_ab0(i));
    let dominant = q
        .to_array()
        .into_iter()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    q.norm().copysign(dominant)
}

/// Time windows used for the scalar summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalWindows {
    /// Start of the steady-state window; it ends at the end of the trace.
    pub settling: f64,
    /// Trailing window for PF, P and neutral RMS, in seconds.
    pub window: f64,
    pub max_harmonic: usize,
}

impl Default for EvalWindows {
    fn default() -> Self {
        Self {
            settling: 0.25,
            window: 0.02,
            max_harmonic: 50,
        }
    }
}

/// Per-sample series plus per-period THD for one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub time: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub pf: Vec<f64>,
    pub neutral_rms: Vec<f64>,
    /// (window start, window end, THD of R, S, T in percent).
    pub thd: Vec<(f64, f64, [f64; 3])>,
}

pub const METRICS_COLUMNS: [&str; 5] = ["time", "p", "q", "pf", "neutral_rms"];
pub const THD_COLUMNS: [&str; 5] = ["start", "end", "thd_r", "thd_s", "thd_t"];

fn samples_per(trace: &SimulationTrace, seconds: f64) -> usize {
    ((seconds / trace.dt).round() as usize).max(1)
}

pub fn metrics_report(trace: &SimulationTrace, eval: &EvalWindows) -> Result<MetricsReport, MetricsError> {
    let fs = 1.0 / trace.dt;
    let w = samples_per(trace, eval.window);
    let v: Vec<ThreePhaseSample> = trace.records.iter().map(|r| r.voltage).collect();
    let i: Vec<ThreePhaseSample> = trace.records.iter().map(|r| r.source_current).collect();

    let mut p = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    let inst: Vec<f64> = v.iter().zip(&i).map(|(a, b)| a.dot(*b)).collect();
    for k in 0..inst.len() {
        acc += inst[k];
        if k >= w {
            acc -= inst[k - w];
        }
        p.push(acc / (k + 1).min(w) as f64);
    }
    let mut lp = LowPass::new(DEFAULT_CUTOFF_HZ, fs).expect("8 Hz is below Nyquist at any usable step");
    let q = v.iter().zip(&i).map(|(a, b)| lp.step(reactive_magnitude(*a, *b))).collect();
    let pf = power_factor(&v, &i, w);
    let neutral = Signal::new(trace.column(|r| r.source_neutral), fs).expect("finite trace");
    let neutral_rms = windowed_rms(&neutral, eval.window).into_samples();

    let period = samples_per(trace, 1.0 / trace.fundamental);
    let mut thd_rows = Vec::new();
    let mut start = 0;
    while start + period <= i.len() {
        let mut row = [0.0; 3];
        for (ph, slot) in row.iter_mut().enumerate() {
            let x: Vec<f64> = i[start..start + period].iter().map(|s| s.to_array()[ph]).collect();
            *slot = match thd(&x, fs, trace.fundamental, eval.max_harmonic) {
                Ok(t) => t,
                Err(MetricsError::FundamentalAbsent { .. }) => 0.0,
                Err(e) => return Err(e),
            };
        }
        thd_rows.push((trace.records[start].time, trace.records[start].time + period as f64 * trace.dt, row));
        start += period;
    }

    Ok(MetricsReport {
        time: trace.times(),
        p,
        q,
        pf,
        neutral_rms,
        thd: thd_rows,
    })
}

impl MetricsReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(METRICS_COLUMNS)?;
        for k in 0..self.time.len() {
            w.write_record([self.time[k], self.p[k], self.q[k], self.pf[k], self.neutral_rms[k]].map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_thd_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(THD_COLUMNS)?;
        for (a, b, t) in &self.thd {
            w.write_record([*a, *b, t[0], t[1], t[2]].map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scalar summary of one strategy run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub strategy: String,
    /// Minimum PF over the disturbance window (extended by one PF window).
    pub min_pf_disturbance: f64,
    /// Minimum PF from one PF window after APF turn-on to the end.
    pub min_pf_post_apf: f64,
    /// Mean PF over the steady window.
    pub steady_pf: f64,
    /// Peak |Q(t) - Q(onset)| over the disturbance window.
    pub q_peak_deviation: f64,
    /// The same measure over an equally long interval ending at the onset.
    pub q_reference_ripple: f64,
    /// THD over settled periods (after the settling time).
    pub mean_thd_settled: f64,
    pub max_thd_settled: f64,
    /// Largest THD over every post-APF period clear of the disturbance.
    pub max_thd_post_apf: f64,
    pub neutral_rms_pre_apf: f64,
    /// Source neutral RMS over the steady window.
    pub neutral_rms_post_apf: f64,
}

fn range_indices(time: &[f64], a: f64, b: f64) -> std::ops::Range<usize> {
    let lo = time.partition_point(|&t| t < a - 1e-12);
    let hi = time.partition_point(|&t| t <= b + 1e-12);
    lo..hi.max(lo)
}

fn min_over(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        f64::NAN
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

fn rms(x: &[f64]) -> f64 {
    mean(&x.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
}

pub fn summarize(trace: &SimulationTrace, report: &MetricsReport, eval: &EvalWindows) -> ComparisonRow {
    let t = &report.time;
    let end = t.last().copied().unwrap_or(0.0);
    let (ds, de) = trace.disturbance_window;
    let period = 1.0 / trace.fundamental;
    let on = trace.apf_on_time;

    let dist = range_indices(t, ds, de + eval.window);
    let steady = range_indices(t, eval.settling, end);
    let post = range_indices(t, on + eval.window, end);
    let span = de + eval.window - ds;
    let before = range_indices(t, ds - span, ds);
    let deviation = |r: std::ops::Range<usize>| {
        let q = &report.q[r];
        q.first().map_or(0.0, |q0| q.iter().map(|x| (x - q0).abs()).fold(0.0, f64::max))
    };

    let thd_over = |from: f64| -> Vec<f64> {
        report
            .thd
            .iter()
            .filter(|(a, b, _)| *a >= from - 1e-12 && (*b <= ds || *a >= de))
            .flat_map(|(_, _, x)| x.iter().copied())
            .collect()
    };
    let settled = thd_over(on.max(eval.settling));
    let post_apf = thd_over(on);
    let neutral = trace.column(|r| r.source_neutral);
    let pre = range_indices(t, (on - period).max(0.0), on - trace.dt);

    ComparisonRow {
        strategy: trace.strategy.name().to_string(),
        min_pf_disturbance: min_over(&report.pf[dist.clone()]),
        min_pf_post_apf: min_over(&report.pf[post]),
        steady_pf: mean(&report.pf[steady.clone()]),
        q_peak_deviation: deviation(dist),
        q_reference_ripple: deviation(before),
        mean_thd_settled: mean(&settled),
        max_thd_settled: settled.iter().copied().fold(0.0, f64::max),
        max_thd_post_apf: post_apf.iter().copied().fold(0.0, f64::max),
        neutral_rms_pre_apf: rms(&neutral[pre]),
        neutral_rms_post_apf: rms(&neutral[steady]),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

fn check_same_scenario(a: &SimulationTrace, b: &SimulationTrace) -> Result<(), MetricsError> {
    let mismatch = |what: &str| Err(MetricsError::MismatchedScenarios(what.to_string()));
    if a.len() != b.len() {
        return mismatch("length");
    }
    if a.dt != b.dt || a.fundamental != b.fundamental {
        return mismatch("time base");
    }
    if a.apf_on_time != b.apf_on_time || a.disturbance_window != b.disturbance_window {
        return mismatch("APF or disturbance timing");
    }
    let same = a
        .records
        .iter()
        .zip(&b.records)
        .all(|(x, y)| x.time == y.time && x.voltage == y.voltage && x.line_current == y.line_current);
    if !same {
        return mismatch("source voltages or line currents differ");
    }
    Ok(())
}

/// One summary row per trace. Both traces must come from the same scenario.
pub fn compare_report(a: &SimulationTrace, b: &SimulationTrace, eval: &EvalWindows) -> Result<ComparisonTable, MetricsError> {
    check_same_scenario(a, b)?;
    let rows = [a, b]
        .into_iter()
        .map(|tr| metrics_report(tr, eval).map(|rep| summarize(tr, &rep, eval)))
        .collect::<Result<_, _>>()?;
    Ok(ComparisonTable { rows })
}

pub const COMPARISON_COLUMNS: [&str; 12] = [
    "strategy",
    "min_pf_disturbance",
    "min_pf_post_apf",
    "steady_pf",
    "q_peak_deviation",
    "q_reference_ripple",
    "mean_thd_settled",
    "max_thd_settled",
    "max_thd_post_apf",
    "neutral_rms_pre_apf",
    "neutral_rms_post_apf",
    "q_excursion_ratio",
];

impl ComparisonRow {
    /// Disturbance-window Q deviation relative to the reference ripple.
    pub fn q_excursion_ratio(&self) -> f64 {
        if self.q_reference_ripple > 0.0 {
            self.q_peak_deviation / self.q_reference_ripple
        } else if self.q_peak_deviation > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.strategy.clone()];
        f.extend(
            [
                self.min_pf_disturbance,
                self.min_pf_post_apf,
                self.steady_pf,
                self.q_peak_deviation,
                self.q_reference_ripple,
                self.mean_thd_settled,
                self.max_thd_settled,
                self.max_thd_post_apf,
                self.neutral_rms_pre_apf,
                self.neutral_rms_post_apf,
                self.q_excursion_ratio(),
            ]
            .map(|x| x.to_string()),
        );
        f
    }
}

impl ComparisonTable {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COMPARISON_COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.fields())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aligned text table, one column per strategy.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = 22;
        let _ = write!(out, "{:<24}", "metric");
        for r in &self.rows {
            let _ = write!(out, "{:>width$}", r.strategy);
        }
        out.push('\n');
        let fields: Vec<Vec<String>> = self.rows.iter().map(|r| r.fields()).collect();
        for (c, name) in COMPARISON_COLUMNS.iter().enumerate().skip(1) {
            let _ = write!(out, "{name:<24}");
            for f in &fields {
                let v: f64 = f[c].parse().unwrap_or(f64::NAN);
                let _ = write!(out, "{:>width$}", format!("{v:.6}"));
            }
            out.push('\n');
        }
        out
    }
}
