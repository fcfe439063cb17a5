//! Three-level hysteresis-band current comparator for one converter leg.

use serde::{Deserialize, Serialize};

/// Which switch of a half-bridge leg conducts. Exactly one is on at a time,
/// so shoot-through cannot be represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegState {
    UpperOn,
    LowerOn,
}

impl LegState {
    pub fn upper_on(self) -> bool {
        self == LegState::UpperOn
    }

    pub fn lower_on(self) -> bool {
        self == LegState::LowerOn
    }

    /// Output voltage of the leg relative to the DC midpoint.
    pub fn leg_voltage(self, vdc: f64) -> f64 {
        match self {
            LegState::UpperOn => 0.5 * vdc,
            LegState::LowerOn => -0.5 * vdc,
        }
    }
}

/// Mapping from "current too high" to a switch pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Too high -> lower switch on (leg pulls its current down).
    #[default]
    Physical,
    /// Too high -> upper switch on, as printed in the published switching table.
    PaperLiteral,
}

/// Above the band: force the current down. Below: force it up. Inside: hold.
pub fn hysteresis_step(i_actual: f64, i_ref: f64, prev: LegState, hb: f64, polarity: Polarity) -> LegState {
    let (decrease, increase) = match polarity {
        Polarity::Physical => (LegState::LowerOn, LegState::UpperOn),
        Polarity::PaperLiteral => (LegState::UpperOn, LegState::LowerOn),
    };
    if i_actual > i_ref + hb {
        decrease
    } else if i_actual < i_ref - hb {
        increase
    } else {
        prev
    }
}

/// Switch states of the four legs (R, S, T, N).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HysteresisState {
    pub legs: [LegState; 4],
}

impl Default for HysteresisState {
    fn default() -> Self {
        Self {
            legs: [LegState::LowerOn; 4],
        }
    }
}

impl HysteresisState {
    /// Bit mask of conducting upper switches (bit 0 = R ... bit 3 = N).
    pub fn upper_mask(&self) -> u8 {
        self.legs
            .iter()
            .enumerate()
            .fold(0, |m, (k, l)| if l.upper_on() { m | (1 << k) } else { m })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trips_and_holds() {
        let hb = 0.5;
        let p = Polarity::Physical;
        assert_eq!(hysteresis_step(1.0 + 2.0 * hb, 1.0, LegState::UpperOn, hb, p), LegState::LowerOn);
        assert_eq!(hysteresis_step(1.0 - 2.0 * hb, 1.0, LegState::LowerOn, hb, p), LegState::UpperOn);
        for prev in [LegState::UpperOn, LegState::LowerOn] {
            assert_eq!(hysteresis_step(1.0, 1.0, prev, hb, p), prev);
            assert_eq!(hysteresis_step(1.0 + hb, 1.0, prev, hb, p), prev);
        }
    }

    #[test]
    fn paper_polarity_is_inverted() {
        let s = hysteresis_step(3.0, 0.0, LegState::LowerOn, 0.5, Polarity::PaperLiteral);
        assert_eq!(s, LegState::UpperOn);
        assert!(s.upper_on() && !s.lower_on());
    }

    #[test]
    fn mask() {
        let mut st = HysteresisState::default();
        assert_eq!(st.upper_mask(), 0);
        st.legs[1] = LegState::UpperOn;
        st.legs[3] = LegState::UpperOn;
        assert_eq!(st.upper_mask(), 0b1010);
    }
}
