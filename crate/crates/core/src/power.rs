//! Instantaneous real and imaginary power in alpha-beta-zero coordinates, and
//! the low-pass split of real power into its average and oscillating parts.

use crate::transform::AlphaBeta0Sample;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PowerError {
    #[error("cutoff {cutoff} Hz must lie strictly between 0 and half the sample rate {sample_rate} Hz")]
    InvalidCutoff { cutoff: f64, sample_rate: f64 },
}

/// Cutoff used to extract the average real power.
pub const DEFAULT_CUTOFF_HZ: f64 = 8.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub p: f64,
    pub p_bar: f64,
    pub p_tilde: f64,
    pub q: AlphaBeta0Sample,
}

/// p = v . i
pub fn instantaneous_real_power(v: AlphaBeta0Sample, i: AlphaBeta0Sample) -> f64 {
    i.alpha * v.alpha + i.beta * v.beta + i.zero * v.zero
}

/// q = v x i, written out as the skew matrix of v applied to i.
pub fn instantaneous_imaginary_power(v: AlphaBeta0Sample, i: AlphaBeta0Sample) -> AlphaBeta0Sample {
    AlphaBeta0Sample {
        alpha: -v.zero * i.beta + v.beta * i.zero,
        beta: v.zero * i.alpha - v.alpha * i.zero,
        zero: -v.beta * i.alpha + v.alpha * i.beta,
    }
}

/// Second-order Butterworth low-pass, bilinear transform with pre-warping,
/// transposed direct form II.
#[derive(Debug, Clone, PartialEq)]
pub struct LowPass {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    z1: f64,
    z2: f64,
}

impl LowPass {
    pub fn new(cutoff: f64, sample_rate: f64) -> Result<Self, PowerError> {
        if !(cutoff > 0.0 && cutoff < sample_rate / 2.0) {
            return Err(PowerError::InvalidCutoff {
                cutoff,
                sample_rate,
            });
        }
        let k = (PI * cutoff / sample_rate).tan();
        let q = 1.0 / SQRT_2;
        let norm = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * norm;
        Ok(Self {
            b0,
            b1: 2.0 * b0,
            b2: b0,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - k / q + k * k) * norm,
            z1: 0.0,
            z2: 0.0,
        })
    }

    pub fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn reset(&mut self) {
        self.z1 = 0.0;
        self.z2 = 0.0;
    }

    /// Feedforward and feedback coefficients `([b0, b1, b2], [a1, a2])`.
    pub fn coefficients(&self) -> ([f64; 3], [f64; 2]) {
        ([self.b0, self.b1, self.b2], [self.a1, self.a2])
    }
}

pub fn lowpass_design(cutoff: f64, sample_rate: f64) -> Result<LowPass, PowerError> {
    LowPass::new(cutoff, sample_rate)
}

pub fn lowpass_step(state: &mut LowPass, x: f64) -> f64 {
    state.step(x)
}

/// Streaming split of p into p_bar (low-passed) and p_tilde = p - p_bar.
#[derive(Debug, Clone)]
pub struct PowerSplitter {
    filter: LowPass,
}

impl PowerSplitter {
    pub fn new(cutoff: f64, sample_rate: f64) -> Result<Self, PowerError> {
        Ok(Self {
            filter: LowPass::new(cutoff, sample_rate)?,
        })
    }

    pub fn step(&mut self, p: f64) -> (f64, f64) {
        let p_bar = self.filter.step(p);
        (p_bar, p - p_bar)
    }

    /// Computes p and q for one sample and splits p.
    pub fn sample(&mut self, v: AlphaBeta0Sample, i: AlphaBeta0Sample) -> PowerSample {
        let p = instantaneous_real_power(v, i);
        let (p_bar, p_tilde) = self.step(p);
        PowerSample {
            p,
            p_bar,
            p_tilde,
            q: instantaneous_imaginary_power(v, i),
        }
    }
}

/// Batch form of [`PowerSplitter`] over a whole stream.
pub fn split_power(p: &[f64], cutoff: f64, sample_rate: f64) -> Result<(Vec<f64>, Vec<f64>), PowerError> {
    let mut splitter = PowerSplitter::new(cutoff, sample_rate)?;
    Ok(p.iter().map(|&x| splitter.step(x)).unzip())
}
