//! Coordinate hit-and-run and hit-and-run samplers for convex bodies, with
//! empirical stationarity diagnostics.

mod body;
mod chain;
mod diagnostics;

pub use body::{BodyFile, ConvexBody, Inside};
pub use chain::{char_step, hit_and_run_step, random_direction, ChainKind, ChainState, StepInfo};
pub use diagnostics::{
    detailed_balance_check, diagnose, integrated_autocorr_time, kolmogorov_p_value, ks_two_sample,
    ks_uniform, run_chain, run_diagnostics, ChainRun, CoordinateDiagnostics, DetailedBalanceReport,
    DiagnosticsReport, KsReference, P_VALUE_THRESHOLD, REFERENCE_FACTOR, SOKAL_C,
};
