//! Exact simulation and verification workbench for quantum rejection
//! sampling: the water-filling amplitude allocation with its duality
//! certificate, exactly-calibrated amplitude amplification with oracle query
//! accounting, single-copy state conversion with a randomized restart
//! schedule, and three desk-scale applications (linear systems, Metropolis
//! moves, Boolean hidden shift).

pub mod amplitude;
pub mod error;
pub mod hiddenshift;
pub mod linear;
pub mod metropolis;
pub mod oracle;
pub mod qrs;
pub mod sqrs;
pub mod state;
pub mod waterfill;

pub use amplitude::AmplitudeVector;
pub use error::{QrsError, Result};
pub use oracle::{
    apply_oracle, HiddenStates, PreparationOracle, QueryCounter, QueryOracle, ReflectionOracle,
};
pub use qrs::{
    plan_exact, run_aqrs, CoinRotation, ExactAmplificationPlan, PreparedReflection, RunResult,
    StateReflection,
};
pub use sqrs::{run_asqrs, ConversionRun, RatioVector, Schedule};
pub use state::QuantumState;
pub use waterfill::{
    compute_bounds, dual_witness, epsilon_of_gamma, p_of_gamma, verify_duality, waterfill, Bounds,
    Certificate, DualWitness, WaterFillSolution,
};
