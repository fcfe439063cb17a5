//! Power-invariant Clarke transform between phase (R, S, T) and
//! alpha-beta-zero coordinates.
//!
//! The transform matrix is orthonormal, so the inverse is its transpose and
//! both instantaneous power and the Euclidean norm are preserved.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Neg, Sub};

/// One time step of a three-phase quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ThreePhaseSample {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

/// One time step in alpha-beta-zero coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta0Sample {
    pub alpha: f64,
    pub beta: f64,
    pub zero: f64,
}

impl ThreePhaseSample {
    pub const ZERO: Self = Self { r: 0.0, s: 0.0, t: 0.0 };

    pub fn new(r: f64, s: f64, t: f64) -> Self {
        Self { r, s, t }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.s, self.t]
    }

    pub fn from_array([r, s, t]: [f64; 3]) -> Self {
        Self { r, s, t }
    }

    pub fn sum(self) -> f64 {
        self.r + self.s + self.t
    }

    pub fn dot(self, other: Self) -> f64 {
        self.r * other.r + self.s * other.s + self.t * other.t
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.s.is_finite() && self.t.is_finite()
    }
}

impl AlphaBeta0Sample {
    pub const ZERO: Self = Self { alpha: 0.0, beta: 0.0, zero: 0.0 };

    pub fn new(alpha: f64, beta: f64, zero: f64) -> Self {
        Self { alpha, beta, zero }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.alpha, self.beta, self.zero]
    }

    pub fn dot(self, other: Self) -> f64 {
        self.alpha * other.alpha + self.beta * other.beta + self.zero * other.zero
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Cross product in (alpha, beta, zero) ordering.
    pub fn cross(self, o: Self) -> Self {
        Self {
            alpha: self.beta * o.zero - self.zero * o.beta,
            beta: self.zero * o.alpha - self.alpha * o.zero,
            zero: self.alpha * o.beta - self.beta * o.alpha,
        }
    }

    pub fn scale(self, k: f64) -> Self {
        Self {
            alpha: self.alpha * k,
            beta: self.beta * k,
            zero: self.zero * k,
        }
    }
}

macro_rules! impl_vec_ops {
    ($ty:ty, $a:ident, $b:ident, $c:ident) => {
        impl Add for $ty {
            type Output = Self;
            fn add(self, o: Self) -> Self {
                Self { $a: self.$a + o.$a, $b: self.$b + o.$b, $c: self.$c + o.$c }
            }
        }
        impl Sub for $ty {
            type Output = Self;
            fn sub(self, o: Self) -> Self {
                Self { $a: self.$a - o.$a, $b: self.$b - o.$b, $c: self.$c - o.$c }
            }
        }
        impl Neg for $ty {
            type Output = Self;
            fn neg(self) -> Self {
                Self { $a: -self.$a, $b: -self.$b, $c: -self.$c }
            }
        }
    };
}

impl_vec_ops!(ThreePhaseSample, r, s, t);
impl_vec_ops!(AlphaBeta0Sample, alpha, beta, zero);

const SQRT_2_3: f64 = 0.816_496_580_927_726;
const HALF_SQRT_3: f64 = 0.866_025_403_784_438_6;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Rows of the power-invariant Clarke matrix (before the sqrt(2/3) factor).
pub const CLARKE_ROWS: [[f64; 3]; 3] = [
    [1.0, -0.5, -0.5],
    [0.0, HALF_SQRT_3, -HALF_SQRT_3],
    [FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2],
];

pub fn abc_to_ab0(x: ThreePhaseSample) -> AlphaBeta0Sample {
    AlphaBeta0Sample {
        alpha: SQRT_2_3 * (x.r - 0.5 * x.s - 0.5 * x.t),
        beta: SQRT_2_3 * HALF_SQRT_3 * (x.s - x.t),
        zero: SQRT_2_3 * FRAC_1_SQRT_2 * (x.r + x.s + x.t),
    }
}

/// Inverse transform (transpose of the forward matrix).
pub fn ab0_to_abc(x: AlphaBeta0Sample) -> ThreePhaseSample {
    let z = FRAC_1_SQRT_2 * x.zero;
    ThreePhaseSample {
        r: SQRT_2_3 * (x.alpha + z),
        s: SQRT_2_3 * (-0.5 * x.alpha + HALF_SQRT_3 * x.beta + z),
        t: SQRT_2_3 * (-0.5 * x.alpha - HALF_SQRT_3 * x.beta + z),
    }
}
