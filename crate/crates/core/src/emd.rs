//! Empirical mode decomposition.
//!
//! A signal is split into intrinsic mode functions (IMFs) by repeatedly
//! subtracting the mean of its upper and lower cubic-spline envelopes
//! ("sifting"). Each extracted IMF is removed from the running residue and the
//! process repeats on what is left, so the IMFs plus the final residue always
//! sum back to the input.
//!
//! End effects are handled by mirroring the signal about both endpoints before
//! building envelopes and trimming the result back to the original length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmdError {
    #[error("signal contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample rate must be positive, got {0}")]
    BadSampleRate(f64),
    #[error("spline needs at least 2 knots, got {0}")]
    TooFewKnots(usize),
    #[error("mirror extension of {extension} samples needs a signal longer than that (got {len})")]
    ExtensionTooLong { extension: usize, len: usize },
    #[error("signal has too few extrema to sift")]
    NotSiftable,
}

pub type Result<T> = std::result::Result<T, EmdError>;

/// A uniformly sampled single-channel signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(EmdError::BadSampleRate(sample_rate));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(EmdError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Window length in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmdConfig {
    /// Sifting stops once the SD between consecutive sifts drops below this.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    pub max_imfs: usize,
    /// Mirror extension applied at both ends before sifting, in seconds.
    pub boundary_extension_s: f64,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            sd_threshold: 0.25,
            max_sift_iterations: 50,
            max_imfs: 10,
            boundary_extension_s: 0.02,
        }
    }
}

impl EmdConfig {
    /// Extension in samples for a signal of `len` samples at `sample_rate`,
    /// clamped so the mirror stays inside the signal.
    pub fn extension_samples(&self, len: usize, sample_rate: f64) -> usize {
        let n = (self.boundary_extension_s * sample_rate).round().max(0.0) as usize;
        n.min(len.saturating_sub(1))
    }
}

/// Output of [`decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Signal>,
    pub residue: Signal,
    /// Number of sifts spent on each IMF.
    pub sift_counts: Vec<usize>,
}

impl ImfSet {
    /// Sum of all IMFs and the residue.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.samples().to_vec();
        for imf in &self.imfs {
            for (o, x) in out.iter_mut().zip(imf.samples()) {
                *o += x;
            }
        }
        out
    }
}

/// Local maxima and minima, excluding the endpoints.
///
/// On a flat run the first sample of the run is reported, and only if the
/// run is followed by a move in the opposite direction.
pub fn find_extrema(s: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let n = s.len();
    if n < 3 {
        return (maxima, minima);
    }
    let mut i = 1;
    while i < n - 1 {
        let prev = s[i - 1];
        let cur = s[i];
        if prev == cur {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && s[j + 1] == cur {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        let next = s[j + 1];
        if prev < cur && next < cur {
            maxima.push(i);
        } else if prev > cur && next > cur {
            minima.push(i);
        }
        i = j + 1;
    }
    (maxima, minima)
}

/// Even reflection about both endpoints: `[1,2,3]`, n=1 gives `[2,1,2,3,2]`.
pub fn mirror_extend(s: &[f64], n: usize) -> Result<Vec<f64>> {
    if n > 0 && n >= s.len() {
        return Err(EmdError::ExtensionTooLong {
            extension: n,
            len: s.len(),
        });
    }
    let len = s.len();
    let mut out = Vec::with_capacity(len + 2 * n);
    out.extend((1..=n).rev().map(|k| s[k]));
    out.extend_from_slice(s);
    out.extend((1..=n).map(|k| s[len - 1 - k]));
    Ok(out)
}

/// Natural cubic spline through `(k, s[k])` for every knot `k`, evaluated at
/// every index of `s`. Outside the knot range the spline continues linearly,
/// matching its zero end curvature.
pub fn spline_envelope(knots: &[usize], s: &[f64]) -> Result<Vec<f64>> {
    let xs: Vec<f64> = knots.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = knots.iter().map(|&k| s[k]).collect();
    natural_spline(&xs, &ys, s.len())
}

/// Natural cubic spline through `(xs, ys)` (strictly increasing `xs`),
/// evaluated at `0..len`.
fn natural_spline(xs: &[f64], ys: &[f64], len: usize) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(EmdError::TooFewKnots(xs.len()));
    }
    let m = natural_second_derivatives(xs, ys);

    let mut out = Vec::with_capacity(len);
    let last = xs.len() - 1;
    let mut seg = 0;
    for t in 0..len {
        let x = t as f64;
        let y = if x <= xs[0] {
            let h = xs[1] - xs[0];
            let slope = (ys[1] - ys[0]) / h - h * (2.0 * m[0] + m[1]) / 6.0;
            ys[0] + slope * (x - xs[0])
        } else if x >= xs[last] {
            let h = xs[last] - xs[last - 1];
            let slope = (ys[last] - ys[last - 1]) / h + h * (m[last - 1] + 2.0 * m[last]) / 6.0;
            ys[last] + slope * (x - xs[last])
        } else {
            while xs[seg + 1] < x {
                seg += 1;
            }
            let (x0, x1) = (xs[seg], xs[seg + 1]);
            let h = x1 - x0;
            let a = (x1 - x) / h;
            let b = (x - x0) / h;
            a * ys[seg]
                + b * ys[seg + 1]
                + ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0
        };
        out.push(y);
    }
    Ok(out)
}

/// Second derivatives at the knots of a natural cubic spline (Thomas algorithm).
fn natural_second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let inner = n - 2;
    let mut diag = vec![0.0; inner];
    let mut upper = vec![0.0; inner];
    let mut rhs = vec![0.0; inner];
    for k in 0..inner {
        let i = k + 1;
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        diag[k] = 2.0 * (h0 + h1);
        upper[k] = h1;
        rhs[k] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
    }
    // forward sweep; the sub-diagonal entry of row k is h0 of row k
    for k in 1..inner {
        let lower = xs[k + 1] - xs[k];
        let w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for k in (0..inner - 1).rev() {
        m[k + 1] = (rhs[k] - upper[k] * m[k + 2]) / diag[k];
    }
    m
}

/// Sifting stop statistic: sum of squared change relative to the previous
/// iterate. Samples where the previous iterate is (relatively) zero are skipped.
pub fn sd_criterion(h_prev: &[f64], h_cur: &[f64]) -> f64 {
    assert_eq!(h_prev.len(), h_cur.len(), "sd_criterion: length mismatch");
    let peak = h_prev.iter().fold(0.0f64, |acc, x| acc.max(x * x));
    let floor = 1e-12 * peak;
    h_prev
        .iter()
        .zip(h_cur)
        .filter(|(p, _)| **p * **p > floor && **p * **p > 0.0)
        .map(|(p, c)| (p - c) * (p - c) / (p * p))
        .sum()
}

/// Envelope knots for one kind of extremum, with the extrema of both kinds
/// reflected about the outermost extremum at each end (up to `extension`
/// samples beyond it).
fn mirrored_knots(own: &[usize], other: &[usize], s: &[f64], extension: usize) -> (Vec<f64>, Vec<f64>) {
    let first = own[0].min(other[0]);
    let last = (*own.last().unwrap()).max(*other.last().unwrap());
    let ext = extension as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(own.len() + 8);
    if extension > 0 {
        let (a, b) = (first as f64, last as f64);
        knots.extend(
            own.iter()
                .filter(|&&p| p > first && (p as f64 - a) <= ext)
                .map(|&p| (2.0 * a - p as f64, s[p])),
        );
        knots.extend(own.iter().map(|&p| (p as f64, s[p])));
        knots.extend(
            own.iter()
                .filter(|&&p| p < last && (b - p as f64) <= ext)
                .map(|&p| (2.0 * b - p as f64, s[p])),
        );
    } else {
        knots.extend(own.iter().map(|&p| (p as f64, s[p])));
    }
    knots.sort_by(|x, y| x.0.total_cmp(&y.0));
    knots.dedup_by(|x, y| x.0 == y.0);
    knots.into_iter().unzip()
}

/// One sift: subtract the mean of the upper and lower envelopes. The
/// envelopes are extended past both ends by mirroring extrema about the
/// outermost extremum.
pub fn sift_once(s: &[f64], extension: usize) -> Result<Vec<f64>> {
    let (maxima, minima) = find_extrema(s);
    if maxima.is_empty() || minima.is_empty() {
        return Err(EmdError::TooFewKnots(0));
    }
    let (ux, uy) = mirrored_knots(&maxima, &minima, s, extension);
    let (lx, ly) = mirrored_knots(&minima, &maxima, s, extension);
    if ux.len() < 2 || lx.len() < 2 {
        return Err(EmdError::TooFewKnots(ux.len().min(lx.len())));
    }
    let upper = natural_spline(&ux, &uy, s.len())?;
    let lower = natural_spline(&lx, &ly, s.len())?;
    Ok(s
        .iter()
        .zip(upper.iter().zip(&lower))
        .map(|(x, (u, l))| x - 0.5 * (u + l))
        .collect())
}

/// Extrema and zero-crossing counts over a slice.
pub fn shape_counts(s: &[f64]) -> (usize, usize, usize) {
    let (mx, mn) = find_extrema(s);
    (mx.len(), mn.len(), zero_crossings(s))
}

fn satisfies_imf_shape(h: &[f64]) -> bool {
    let n = h.len();
    let core = &h[n / 10..n - n / 10];
    let (mx, mn, zc) = shape_counts(core);
    mx.abs_diff(mn) <= 1 && zc.abs_diff(mx + mn) <= 1
}

/// Sift until the SD statistic falls below the threshold while the iterate
/// has IMF shape, or until the iteration cap. Returns the IMF and the number
/// of sifts performed.
pub fn extract_imf(s: &[f64], extension: usize, cfg: &EmdConfig) -> Result<(Vec<f64>, usize)> {
    let mut h = match sift_once(s, extension) {
        Ok(h) => h,
        Err(_) => return Err(EmdError::NotSiftable),
    };
    let mut iterations = 1;
    while iterations < cfg.max_sift_iterations.max(1) {
        let next = match sift_once(&h, extension) {
            Ok(next) => next,
            Err(_) => break,
        };
        iterations += 1;
        let sd = sd_criterion(&h, &next);
        h = next;
        if sd < cfg.sd_threshold && satisfies_imf_shape(&h) {
            break;
        }
    }
    Ok((h, iterations))
}

fn extrema_count(s: &[f64]) -> usize {
    let (mx, mn) = find_extrema(s);
    mx.len() + mn.len()
}

/// Full decomposition into IMFs plus residue.
///
/// Stops when the residue has fewer than two maxima or two minima, when an
/// extraction would not reduce the residue's extrema count, or at
/// `max_imfs`. Degenerate inputs come back as zero IMFs with the input as
/// residue.
pub fn decompose(s: &Signal, cfg: &EmdConfig) -> ImfSet {
    let fs = s.sample_rate();
    let extension = cfg.extension_samples(s.len(), fs);
    let mut residue = s.samples().to_vec();
    let mut imfs = Vec::new();
    let mut sift_counts = Vec::new();

    if s.len() >= 4 {
        while imfs.len() < cfg.max_imfs {
            let (mx, mn) = find_extrema(&residue);
            if mx.len() < 2 || mn.len() < 2 {
                break;
            }
            let Ok((imf, count)) = extract_imf(&residue, extension, cfg) else {
                break;
            };
            let next: Vec<f64> = residue.iter().zip(&imf).map(|(r, c)| r - c).collect();
            if extrema_count(&next) >= mx.len() + mn.len() {
                break;
            }
            residue = next;
            imfs.push(Signal {
                samples: imf,
                sample_rate: fs,
            });
            sift_counts.push(count);
        }
    }

    ImfSet {
        imfs,
        residue: Signal {
            samples: residue,
            sample_rate: fs,
        },
        sift_counts,
    }
}

/// Number of sign changes, ignoring exact zeros.
pub fn zero_crossings(s: &[f64]) -> usize {
    let mut count = 0;
    let mut last_sign = 0.0f64;
    for &x in s {
        if x == 0.0 {
            continue;
        }
        let sign = x.signum();
        if last_sign != 0.0 && sign != last_sign {
            count += 1;
        }
        last_sign = sign;
    }
    count
}

/// Dominant-frequency estimate: sign changes over twice the window duration.
pub fn zero_crossing_rate(s: &Signal) -> f64 {
    if s.len() < 2 {
        return 0.0;
    }
    zero_crossings(s.samples()) as f64 / (2.0 * s.duration())
}
