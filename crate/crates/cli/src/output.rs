//! Result documents: a canonical JSON form embedding the run configuration
//! and the schedule constants, plus a lossy CSV projection for sweep tables.

use serde::Serialize;

use qrs_core::sqrs::{SCHEDULE_C, SCHEDULE_DELTA, SQRS_R};

/// Constants baked into every emitted document so results are reproducible
/// from the file alone.
#[derive(Debug, Serialize)]
pub struct Constants {
    pub schedule_c: f64,
    pub schedule_delta: f64,
    pub sqrs_r: f64,
    pub bisection_tol: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            schedule_c: SCHEDULE_C,
            schedule_delta: SCHEDULE_DELTA,
            sqrs_r: SQRS_R,
            bisection_tol: qrs_core::waterfill::BISECTION_TOL,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Document<T: Serialize> {
    pub command: String,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub constants: Constants,
    pub results: T,
}

impl<T: Serialize> Document<T> {
    pub fn new(command: &str, seed: Option<u64>, trials: Option<u64>, results: T) -> Self {
        Document {
            command: command.to_string(),
            seed,
            trials,
            constants: Constants::default(),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("document serialization");
        out.push('\n');
        out
    }
}

/// Minimal CSV writer: quotes are never needed for the emitted fields.
pub fn csv_table(header: &str, rows: &[String]) -> String {
    let mut out = String::with_capacity(header.len() + rows.len() * 32);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}
