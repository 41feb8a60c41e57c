//! Strong quantum resampling: state conversion from a single copy of the
//! hidden superposition, using only a reflection oracle and the known ratio
//! vector `tau`.
//!
//! The amplitude budget is `eps_k / pi_k = r min(1, alpha tau_k)` with
//! `r = sqrt(3)/2`, so no knowledge of `pi` is required. After the initial
//! coin measurement, failed rounds retry with `t` drawn uniformly from
//! `1..=T_l`, `T_l = ceil(c^l)`, growing geometrically with `c = 8/7`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrsError, Result};
use crate::qrs::{
    amplification_subroutine, target_overlap_magnitude, CoinRotation, StateReflection,
};
use crate::state::QuantumState;

/// Geometric growth factor of the retry schedule.
pub const SCHEDULE_C: f64 = 8.0 / 7.0;
/// Failure-probability margin used in the schedule analysis.
pub const SCHEDULE_DELTA: f64 = 0.25;
/// Down-scaling of the amplitude budget, keeping `sin(theta) <= sqrt(3)/2`.
pub const SQRS_R: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2
/// Hard cutoff on the retry level; reaching it is a runtime error.
pub const LEVEL_CUTOFF: u32 = 60;

/// Known ratio vector of a conversion instance: `tau_k >= 0`, `max tau = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatioVector {
    tau: Vec<f64>,
}

impl RatioVector {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(QrsError::Validation("empty ratio vector".into()));
        }
        let mut max = f64::NEG_INFINITY;
        for (k, &t) in tau.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(QrsError::Validation(format!(
                    "ratio entry {k} is {t}, expected nonnegative finite"
                )));
            }
            max = max.max(t);
        }
        if (max - 1.0).abs() > 1e-12 {
            return Err(QrsError::Validation(format!(
                "ratio vector must have maximum entry 1, found {max}"
            )));
        }
        Ok(RatioVector { tau })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.tau
    }
}

/// Retry schedule constants. The defaults reproduce the analyzed expected
/// query bound `128 / ||eps||`; `c (1/2 + delta) < 1` must hold for the
/// restart series to converge.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Schedule {
    pub c: f64,
    pub delta: f64,
    pub r: f64,
    pub level_cutoff: u32,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            c: SCHEDULE_C,
            delta: SCHEDULE_DELTA,
            r: SQRS_R,
            level_cutoff: LEVEL_CUTOFF,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.c <= 1.0 {
            return Err(QrsError::Validation(format!(
                "schedule growth factor c = {} must exceed 1",
                self.c
            )));
        }
        if self.delta <= 0.0 || self.c * (0.5 + self.delta) >= 1.0 {
            return Err(QrsError::Validation(format!(
                "schedule requires c (1/2 + delta) < 1, got c = {}, delta = {}",
                self.c, self.delta
            )));
        }
        if !(0.0 < self.r && self.r <= SQRS_R + 1e-12) {
            return Err(QrsError::Validation(format!(
                "amplitude scaling r = {} outside (0, sqrt(3)/2]",
                self.r
            )));
        }
        Ok(())
    }

    /// Round budget at level `l`: `T_l = ceil(c^l)`.
    pub fn rounds_at_level(&self, level: u32) -> u64 {
        self.c.powi(level as i32).ceil() as u64
    }
}

/// Norm of the scaled conversion vector `r (pi_k min(1, alpha tau_k))_k`,
/// the quantity the expected query count is measured against. This is
/// verification metadata: it needs `pi`, which the algorithm itself never
/// sees.
pub fn converted_mass(
    pi: &crate::amplitude::AmplitudeVector,
    tau: &RatioVector,
    alpha: f64,
    r: f64,
) -> Result<f64> {
    if pi.len() != tau.len() {
        return Err(QrsError::DimensionMismatch(format!(
            "pi has {} entries, tau has {}",
            pi.len(),
            tau.len()
        )));
    }
    Ok(r * (0..pi.len())
        .map(|k| (pi[k] * (alpha * tau.entries()[k]).min(1.0)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Per-index rotation sines `r min(1, alpha tau_k)`; knows nothing about `pi`.
pub fn coin_ratios(tau: &RatioVector, alpha: f64, r: f64) -> Result<Vec<f64>> {
    if alpha < 1.0 - 1e-12 {
        return Err(QrsError::Validation(format!(
            "amplification knob alpha = {alpha} must be at least 1"
        )));
    }
    if !(0.0 < r && r <= 1.0) {
        return Err(QrsError::Validation(format!(
            "scaling r = {r} outside (0, 1]"
        )));
    }
    Ok(tau
        .entries()
        .iter()
        .map(|&t| r * (alpha * t).min(1.0))
        .collect())
}

/// Upper bound on the failure probability of the measurement after a level
/// with round budget `t_max`: `1/2 + 1/(2 T ||eps||)`, clamped to 1 (the
/// bound is vacuous for tiny `T ||eps||`).
pub fn level_failure_bound(t_max: u64, epsilon_norm: f64) -> Result<f64> {
    if !(epsilon_norm > 0.0 && epsilon_norm <= SQRS_R + 1e-12) {
        return Err(QrsError::Validation(format!(
            "epsilon norm {epsilon_norm} outside (0, sqrt(3)/2]"
        )));
    }
    if t_max == 0 {
        return Err(QrsError::Validation("level with zero rounds".into()));
    }
    let bound = 0.5 + 1.0 / (2.0 * t_max as f64 * epsilon_norm);
    Ok(bound.min(1.0))
}

/// One measurement event of a conversion run. Level `-1` is the initial
/// measurement taken before any amplification.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub level: i64,
    pub rounds: u64,
    pub accept_probability: f64,
    pub accepted: bool,
}

/// Full trace of one conversion run.
#[derive(Debug, Clone)]
pub struct ConversionRun {
    pub final_state: QuantumState,
    pub accepted_level: i64,
    pub queries: u64,
    pub success_overlap: f64,
    pub outcomes: Vec<LevelOutcome>,
}

/// Converts a single copy of the hidden superposition toward the target
/// proportional to `pi o tau`, using only reflection queries.
///
/// `initial` is the reflection target extended with a fresh coin in `|0>`;
/// `index_registers` name the registers carrying the index the ratios refer
/// to; `target` (the instance owner's verification state, without coin) is
/// used solely to report the final overlap.
#[allow(clippy::too_many_arguments)]
pub fn run_asqrs<R: StateReflection, G: Rng>(
    initial: &QuantumState,
    reflection: &R,
    tau: &RatioVector,
    alpha: f64,
    schedule: &Schedule,
    index_registers: &[usize],
    target: &QuantumState,
    rng: &mut G,
) -> Result<ConversionRun> {
    schedule.validate()?;
    let sines = coin_ratios(tau, alpha, schedule.r)?;
    let rotation = CoinRotation::from_sines(sines)?;
    let coin = initial.dims().len() - 1;
    let queries_before = reflection.queries();
    let mut outcomes = Vec::new();

    // Step 1: rotate the coin; step 2: measure it once before amplifying.
    let state = rotation.apply(initial, index_registers, false)?;
    let accept_probability = state.register_distribution(coin)?[1];
    let (outcome, mut state, _) = state.measure_register(coin, rng)?;
    outcomes.push(LevelOutcome {
        level: -1,
        rounds: 0,
        accept_probability,
        accepted: outcome == 1,
    });

    let mut accepted_level = -1i64;
    if outcome != 1 {
        let mut level = 0u32;
        loop {
            if level > schedule.level_cutoff {
                return Err(QrsError::Numerical(format!(
                    "conversion did not accept within {} levels",
                    schedule.level_cutoff
                )));
            }
            let t_max = schedule.rounds_at_level(level);
            let t = rng.gen_range(1..=t_max);
            state = amplification_subroutine(&state, reflection, &rotation, index_registers, t)?;
            let accept_probability = state.register_distribution(coin)?[1];
            let (outcome, post, _) = state.measure_register(coin, rng)?;
            outcomes.push(LevelOutcome {
                level: level as i64,
                rounds: t,
                accept_probability,
                accepted: outcome == 1,
            });
            state = post;
            if outcome == 1 {
                accepted_level = level as i64;
                break;
            }
            level += 1;
        }
    }

    let success_overlap = target_overlap_magnitude(&state, target)?;
    Ok(ConversionRun {
        final_state: state,
        accepted_level,
        queries: reflection.queries() - queries_before,
        success_overlap,
        outcomes,
    })
}
