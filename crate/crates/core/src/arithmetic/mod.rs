//! Arithmetic structure of real vectors: difference vectors, the
//! combinatorial least common denominator (CLCD), its quantile version over a
//! family of restrictions (QCLCD), level sets, and anti-concentration of the
//! fixed-weight slice walk `W_{t,v}`.

mod clcd;
mod difference;
mod levy;

pub use clcd::{
    check_stability, clcd, clcd_level_membership, oracle_clcd, qclcd, qclcd_level_membership, ClcdParams,
    RestrictionFamily, StabilityReport, ORACLE_BREAKPOINT_BUDGET, ORACLE_MAX_DIM,
};
pub use difference::{difference_vector, DifferenceVector};
pub use levy::{
    check_anticoncentration, levy_estimate, sample_w, AntiConcentrationParams, AntiConcentrationReport,
    LevyEstimate,
};
