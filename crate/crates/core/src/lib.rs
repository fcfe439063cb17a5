//! Shunt active power filter simulation for three-phase four-wire systems.

pub mod cli;
pub mod config;
pub mod control;
pub mod emd;
pub mod metrics;
pub mod plant;
pub mod plot;
pub mod power;
pub mod transform;
