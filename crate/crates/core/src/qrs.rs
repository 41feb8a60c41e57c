//! Quantum rejection sampling: coin rotation, amplitude amplification
//! subroutine, and the exactly-calibrated end-to-end run.
//!
//! The workspace is `[d, n, 2]`: hidden register, index register, coin. One
//! preparation query builds `|Psi_eps> = sum_k |xi_k>|k>(sqrt(pi_k^2 -
//! eps_k^2)|0> + eps_k|1>)`; the amplification subroutine then rotates the
//! coin-1 branch up by pairing a coin-Z reflection with a reflection through
//! `|Psi_eps>`. Scaling `eps` down by `r = sin(theta_tilde)/sin(theta)` makes
//! the final accept probability exactly one.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeVector;
use crate::error::{QrsError, Result};
use crate::oracle::QueryOracle;
use crate::state::QuantumState;
use crate::waterfill::{compute_bounds, waterfill, WaterFillSolution};

/// Block-diagonal coin rotation: controlled on the index registers, the coin
/// is rotated by an angle whose sine is `sines[k]`.
#[derive(Debug, Clone)]
pub struct CoinRotation {
    sines: Vec<f64>,
}

impl CoinRotation {
    /// Rotation sines `eps_k / pi_k`; blocks with `pi_k = 0` stay identity.
    pub fn from_amplitude_ratio(pi: &AmplitudeVector, eps: &AmplitudeVector) -> Result<Self> {
        if pi.len() != eps.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "pi has {} entries, eps has {}",
                pi.len(),
                eps.len()
            )));
        }
        let mut sines = Vec::with_capacity(pi.len());
        for k in 0..pi.len() {
            if eps[k] > pi[k] + 1e-12 {
                return Err(QrsError::Validation(format!(
                    "eps_{k} = {} exceeds pi_{k} = {}",
                    eps[k], pi[k]
                )));
            }
            sines.push(if pi[k] > 0.0 {
                (eps[k] / pi[k]).min(1.0)
            } else {
                0.0
            });
        }
        Ok(CoinRotation { sines })
    }

    /// Explicit rotation sines, one per index value; each must lie in [0, 1].
    pub fn from_sines(sines: Vec<f64>) -> Result<Self> {
        for (k, &s) in sines.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&s) {
                return Err(QrsError::Validation(format!(
                    "rotation sine {s} at index {k} outside [0, 1]"
                )));
            }
        }
        Ok(CoinRotation { sines })
    }

    pub fn len(&self) -> usize {
        self.sines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sines.is_empty()
    }

    /// The 2x2 block acting on the coin for index `k`:
    /// `[[cos, -sin], [sin, cos]]` with `sin = sines[k]`.
    pub fn block(&self, k: usize) -> [[f64; 2]; 2] {
        let s = self.sines[k].min(1.0);
        let c = (1.0 - s * s).max(0.0).sqrt();
        [[c, -s], [s, c]]
    }

    /// Applies the rotation (or its inverse) on the coin register, controlled
    /// by the combined value of `index_registers`. The coin is the last
    /// register of the state.
    pub fn apply(
        &self,
        state: &QuantumState,
        index_registers: &[usize],
        inverse: bool,
    ) -> Result<QuantumState> {
        let dims = state.dims();
        let coin = dims.len() - 1;
        if dims[coin] != 2 {
            return Err(QrsError::DimensionMismatch(
                "coin register must have dimension 2".into(),
            ));
        }
        let index_dim: usize = index_registers.iter().map(|&r| dims[r]).product();
        if index_dim != self.sines.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "rotation defined for {} index values, registers provide {index_dim}",
                self.sines.len()
            )));
        }
        // Strides of the index registers within the flat amplitude array.
        let mut strides = vec![1usize; dims.len()];
        for r in (0..dims.len() - 1).rev() {
            strides[r] = strides[r + 1] * dims[r + 1];
        }
        let mut amps = state.amplitudes().to_vec();
        let total = amps.len();
        for base in (0..total).step_by(2) {
            let mut k = 0usize;
            for &r in index_registers {
                k = k * dims[r] + (base / strides[r]) % dims[r];
            }
            let s = if inverse {
                -self.sines[k]
            } else {
                self.sines[k]
            };
            let c = (1.0 - s * s).max(0.0).sqrt();
            let a0 = amps[base];
            let a1 = amps[base + 1];
            amps[base] = c * a0 - s * a1;
            amps[base + 1] = s * a0 + c * a1;
        }
        let out = QuantumState::from_amplitudes(dims, amps)?;
        Ok(out)
    }
}

/// Reflections through the hidden start state `|pi^xi>|0>`, however realized.
pub trait StateReflection {
    fn reflect(&self, state: &QuantumState) -> Result<QuantumState>;
    fn queries(&self) -> u64;
}

/// Reflection synthesized from a preparation oracle:
/// `(O x I2) (I - 2|0..0><0..0|) (O x I2)^dagger`, two queries per use.
pub struct PreparedReflection<'a, O: QueryOracle> {
    oracle: &'a O,
}

impl<'a, O: QueryOracle> PreparedReflection<'a, O> {
    pub fn new(oracle: &'a O) -> Self {
        PreparedReflection { oracle }
    }
}

impl<O: QueryOracle> StateReflection for PreparedReflection<'_, O> {
    fn reflect(&self, state: &QuantumState) -> Result<QuantumState> {
        let regs: Vec<usize> = (0..state.dims().len() - 1).collect();
        let s = self.oracle.apply(state, &regs, true)?;
        let s = s.phase_flip_basis(0)?;
        self.oracle.apply(&s, &regs, false)
    }

    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

impl StateReflection for crate::oracle::ReflectionOracle {
    fn reflect(&self, state: &QuantumState) -> Result<QuantumState> {
        let regs: Vec<usize> = (0..state.dims().len()).collect();
        QueryOracle::apply(self, state, &regs, false)
    }

    fn queries(&self) -> u64 {
        QueryOracle::queries(self)
    }
}

/// `t` rounds of the amplitude amplification subroutine: coin-Z reflection,
/// then reflection through `|Psi_eps>` realized as `R_eps . ref . R_eps^dag`.
/// On the plane spanned by the accepted and rejected branches each round is
/// `-R(2 theta)`; the accumulated sign `(-1)^t` is stripped since `t` is
/// known, so reported overlaps keep the target's phase.
pub fn amplification_subroutine<R: StateReflection>(
    state: &QuantumState,
    reflection: &R,
    rotation: &CoinRotation,
    index_registers: &[usize],
    t: u64,
) -> Result<QuantumState> {
    let mut current = state.clone();
    for _ in 0..t {
        current = current.reflect_coin_z()?;
        current = rotation.apply(&current, index_registers, true)?;
        current = reflection.reflect(&current)?;
        current = rotation.apply(&current, index_registers, false)?;
    }
    if t % 2 == 1 {
        current = current.scale_phase(Complex64::new(-1.0, 0.0))?;
    }
    Ok(current)
}

/// Exact amplification calibration derived from a norm `||eps^p||`:
/// `theta = arcsin ||eps^p||`, `t = ceil(pi/(4 theta) - 1/2)` rounds at the
/// slightly reduced angle `theta_tilde = pi / (2(2t+1))`, reached by scaling
/// the vector down by `r = sin(theta_tilde)/sin(theta) in [1/2, 1]`.
pub fn exact_calibration(epsilon_norm: f64) -> Result<(f64, u64, f64, f64)> {
    if !(epsilon_norm > 0.0 && epsilon_norm <= 1.0 + 1e-12) {
        return Err(QrsError::Validation(format!(
            "epsilon norm {epsilon_norm} outside (0, 1]"
        )));
    }
    // arcsin is ill-conditioned at 1; norms within construction tolerance of
    // 1 mean the target branch already carries the full amplitude.
    let snapped = if (epsilon_norm - 1.0).abs() <= 1e-12 {
        1.0
    } else {
        epsilon_norm
    };
    let theta = snapped.min(1.0).asin();
    let t_tilde = (PI / (4.0 * theta) - 0.5).ceil().max(0.0) as u64;
    let theta_tilde = PI / (2.0 * (2 * t_tilde + 1) as f64);
    let r = theta_tilde.sin() / theta.sin();
    Ok((theta, t_tilde, theta_tilde, r))
}

/// Calibrated plan for an exact run: rotation angle, round count, and the
/// scaled water-filling vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactAmplificationPlan {
    pub theta: f64,
    pub t_tilde: u64,
    pub theta_tilde: f64,
    pub r: f64,
    pub epsilon_norm: f64,
    pub epsilon_scaled: AmplitudeVector,
    pub solution: WaterFillSolution,
}

impl ExactAmplificationPlan {
    /// Total oracle queries of a run executing this plan.
    pub fn queries(&self) -> u64 {
        2 * self.t_tilde + 1
    }
}

/// Builds the exact plan for target probability `p`. Targets at or below
/// `p_min` collapse to the one-query plan (`eps = pi`, no amplification);
/// targets above `p_max` are infeasible.
pub fn plan_exact(
    pi: &AmplitudeVector,
    sigma: &AmplitudeVector,
    p: f64,
) -> Result<ExactAmplificationPlan> {
    let bounds = compute_bounds(pi, sigma)?;
    if p > bounds.p_max + 1e-12 {
        return Err(QrsError::TargetOutOfRange {
            p,
            p_min: bounds.p_min,
            p_max: bounds.p_max,
        });
    }
    let effective_p = p.max(bounds.p_min);
    let solution = waterfill(pi, sigma, effective_p)?;
    let epsilon_norm = solution.epsilon_norm();
    let (theta, t_tilde, theta_tilde, r) = exact_calibration(epsilon_norm)?;
    if !(0.5 - 1e-9..=1.0 + 1e-9).contains(&r) {
        return Err(QrsError::Numerical(format!(
            "scaling factor r = {r} escaped [1/2, 1]"
        )));
    }
    let epsilon_scaled = solution.epsilon.scaled(r)?;
    Ok(ExactAmplificationPlan {
        theta,
        t_tilde,
        theta_tilde,
        r,
        epsilon_norm,
        epsilon_scaled,
        solution,
    })
}

/// Builds `|Psi_eps>` on `[d, n, 2]` from one preparation query followed by
/// the coin rotation.
pub fn build_state_psi_eps<O: QueryOracle>(
    oracle: &O,
    pi: &AmplitudeVector,
    eps: &AmplitudeVector,
    hidden_dim: usize,
) -> Result<QuantumState> {
    let state = QuantumState::zero_basis(&[hidden_dim, pi.len(), 2])?;
    let state = oracle.apply(&state, &[0, 1], false)?;
    let rotation = CoinRotation::from_amplitude_ratio(pi, eps)?;
    rotation.apply(&state, &[1], false)
}

/// Outcome of a full run: the post-measurement state, the accept flag and its
/// exact probability, the real overlap with the target, and the query tally.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: QuantumState,
    pub accept: bool,
    pub accept_probability: f64,
    pub success_overlap: f64,
    pub queries: u64,
}

/// Runs the calibrated rejection sampling algorithm end to end.
///
/// `target` is the verification state `sum_k sigma_k |xi_k>|k>` on `[d, n]`,
/// supplied by whoever constructed the instance; the algorithm itself only
/// touches the oracle. Consumes exactly `2 t + 1` queries: one to prepare,
/// two per amplification round.
pub fn run_aqrs<O: QueryOracle, G: Rng>(
    oracle: &O,
    pi: &AmplitudeVector,
    sigma: &AmplitudeVector,
    p: f64,
    hidden_dim: usize,
    target: &QuantumState,
    rng: &mut G,
) -> Result<RunResult> {
    let plan = plan_exact(pi, sigma, p)?;
    run_aqrs_with_plan(oracle, pi, &plan, hidden_dim, target, rng)
}

/// Same as [`run_aqrs`] but with a precomputed plan.
pub fn run_aqrs_with_plan<O: QueryOracle, G: Rng>(
    oracle: &O,
    pi: &AmplitudeVector,
    plan: &ExactAmplificationPlan,
    hidden_dim: usize,
    target: &QuantumState,
    rng: &mut G,
) -> Result<RunResult> {
    let queries_before = oracle.queries();
    let coin = 2;

    if plan.t_tilde == 0 && (plan.epsilon_norm - 1.0).abs() < 1e-12 {
        // Endpoint: |pi^xi> is already close enough; prepare it, set the coin
        // to accepted, and stop after a single query.
        let state = QuantumState::zero_basis(&[hidden_dim, pi.len(), 2])?;
        let state = oracle.apply(&state, &[0, 1], false)?;
        let flip = CoinRotation::from_sines(vec![1.0; pi.len()])?;
        let state = flip.apply(&state, &[1], false)?;
        let overlap = target_overlap(&state, target)?;
        return Ok(RunResult {
            final_state: state,
            accept: true,
            accept_probability: 1.0,
            success_overlap: overlap,
            queries: oracle.queries() - queries_before,
        });
    }

    let state = build_state_psi_eps(oracle, pi, &plan.epsilon_scaled, hidden_dim)?;
    let rotation = CoinRotation::from_amplitude_ratio(pi, &plan.epsilon_scaled)?;
    let reflection = PreparedReflection::new(oracle);
    let state = amplification_subroutine(&state, &reflection, &rotation, &[1], plan.t_tilde)?;

    let accept_probability = state.register_distribution(coin)?[1];
    let (outcome, post, _) = state.measure_register(coin, rng)?;
    let overlap = target_overlap(&post, target)?;
    Ok(RunResult {
        final_state: post,
        accept: outcome == 1,
        accept_probability,
        success_overlap: overlap,
        queries: oracle.queries() - queries_before,
    })
}

/// Real part of the overlap with `target (x) |1>` where `target` lives on the
/// state's registers minus the coin.
pub fn target_overlap(state: &QuantumState, target: &QuantumState) -> Result<f64> {
    Ok(target_overlap_complex(state, target)?.re)
}

/// Magnitude of the overlap with `target (x) |1>`. Conversion runs report
/// this form: a projective measurement fixes the post-measurement state only
/// up to a global sign, so the ray distance is the faithful quantity.
pub fn target_overlap_magnitude(state: &QuantumState, target: &QuantumState) -> Result<f64> {
    Ok(target_overlap_complex(state, target)?.norm())
}

fn target_overlap_complex(state: &QuantumState, target: &QuantumState) -> Result<Complex64> {
    let with_coin = target.append_zero_register(2)?;
    // Move the amplitude from the coin-0 branch to the coin-1 branch.
    let flip = CoinRotation::from_sines(vec![1.0; with_coin.total_dim() / 2])?;
    let regs: Vec<usize> = (0..target.dims().len()).collect();
    let accepted = flip.apply(&with_coin, &regs, false)?;
    accepted.overlap(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{HiddenStates, PreparationOracle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(entries: Vec<f64>) -> AmplitudeVector {
        AmplitudeVector::normalized(entries).unwrap()
    }

    #[test]
    fn rotation_identity_when_eps_zero() {
        let pi = unit(vec![0.6, 0.8]);
        let eps = AmplitudeVector::new(vec![0.0, 0.0]).unwrap();
        let rot = CoinRotation::from_amplitude_ratio(&pi, &eps).unwrap();
        for k in 0..2 {
            let b = rot.block(k);
            assert_eq!(b, [[1.0, 0.0], [0.0, 1.0]]);
        }
    }

    #[test]
    fn rotation_full_flip_when_eps_equals_pi() {
        let pi = unit(vec![0.6, 0.8]);
        let rot = CoinRotation::from_amplitude_ratio(&pi, &pi).unwrap();
        for k in 0..2 {
            let b = rot.block(k);
            assert!((b[0][0]).abs() < 1e-12 && (b[0][1] + 1.0).abs() < 1e-12);
            assert!((b[1][0] - 1.0).abs() < 1e-12 && (b[1][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_three_four_five_block() {
        let pi = AmplitudeVector::unit(vec![0.8, 0.6]).unwrap();
        let eps = AmplitudeVector::new(vec![0.48, 0.0]).unwrap();
        let rot = CoinRotation::from_amplitude_ratio(&pi, &eps).unwrap();
        let b = rot.block(0);
        assert!((b[0][0] - 0.8).abs() < 1e-12);
        assert!((b[0][1] + 0.6).abs() < 1e-12);
        assert!((b[1][0] - 0.6).abs() < 1e-12);
        assert!((b[1][1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rotation_rejects_eps_above_pi() {
        let pi = AmplitudeVector::unit(vec![0.8, 0.6]).unwrap();
        let eps = AmplitudeVector::new(vec![0.9, 0.0]).unwrap();
        assert!(CoinRotation::from_amplitude_ratio(&pi, &eps).is_err());
    }

    fn random_instance(
        n: usize,
        d: usize,
        seed: u64,
    ) -> (
        AmplitudeVector,
        AmplitudeVector,
        HiddenStates,
        PreparationOracle,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = unit((0..n).map(|_| rng.gen::<f64>() + 0.05).collect());
        let sigma = unit((0..n).map(|_| rng.gen::<f64>() + 0.05).collect());
        let xi = HiddenStates::random(n, d, &mut rng).unwrap();
        let oracle = PreparationOracle::new(&pi, &xi, seed ^ 0xabcd).unwrap();
        (pi, sigma, xi, oracle)
    }

    #[test]
    fn psi_eps_coin_one_probability_is_eps_norm_squared() {
        let (pi, _, _, oracle) = random_instance(4, 2, 21);
        let eps = pi.scaled(0.5).unwrap();
        let state = build_state_psi_eps(&oracle, &pi, &eps, 2).unwrap();
        let dist = state.register_distribution(2).unwrap();
        let expect = eps.l2_norm().powi(2);
        assert!((dist[1] - expect).abs() < 1e-12);
        assert_eq!(oracle.queries(), 1, "exactly one query to prepare");
    }

    #[test]
    fn psi_eps_accepts_certainly_when_eps_equals_pi() {
        let (pi, _, _, oracle) = random_instance(3, 1, 5);
        let state = build_state_psi_eps(&oracle, &pi, &pi, 1).unwrap();
        let dist = state.register_distribution(2).unwrap();
        assert!((dist[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_eps_postselected_overlap_matches_formula() {
        let (pi, sigma, xi, oracle) = random_instance(4, 2, 33);
        let eps = pi.scaled(0.7).unwrap();
        let state = build_state_psi_eps(&oracle, &pi, &eps, 2).unwrap();
        let (accepted, _) = state.project_register(2, 1).unwrap();
        let target = xi.superposition(&sigma).unwrap();
        let overlap = target_overlap(&accepted, &target).unwrap();
        let expect = sigma.dot(&eps).unwrap() / eps.l2_norm();
        assert!((overlap - expect).abs() < 1e-12);
    }

    #[test]
    fn prepared_reflection_negates_start_state_and_costs_two() {
        let (pi, _, xi, oracle) = random_instance(4, 2, 8);
        let start = xi
            .superposition(&pi)
            .unwrap()
            .append_zero_register(2)
            .unwrap();
        let reflection = PreparedReflection::new(&oracle);
        let reflected = reflection.reflect(&start).unwrap();
        let inner = start.overlap(&reflected).unwrap();
        assert!((inner + Complex64::new(1.0, 0.0)).norm() < 1e-11);
        assert_eq!(oracle.queries(), 2);

        // Orthogonal states are untouched: coin-1 branch of anything.
        let orth = start.reflect_coin_z().unwrap(); // still has coin = 0 support only
        let _ = orth;
        let flipped = {
            let flip = CoinRotation::from_sines(vec![1.0; 4]).unwrap();
            flip.apply(&start, &[1], false).unwrap()
        };
        let kept = reflection.reflect(&flipped).unwrap();
        assert!((flipped.overlap(&kept).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-11);
    }

    #[test]
    fn subroutine_zero_rounds_is_identity() {
        let (pi, _, _, oracle) = random_instance(3, 2, 2);
        let eps = pi.scaled(0.5).unwrap();
        let state = build_state_psi_eps(&oracle, &pi, &eps, 2).unwrap();
        let rot = CoinRotation::from_amplitude_ratio(&pi, &eps).unwrap();
        let refl = PreparedReflection::new(&oracle);
        let out = amplification_subroutine(&state, &refl, &rot, &[1], 0).unwrap();
        assert!((state.overlap(&out).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn subroutine_single_round_at_thirty_degrees_accepts_certainly() {
        // ||eps|| = 1/2 puts theta at pi/6; one round lands at sin^2(3 theta) = 1.
        let (pi, _, _, oracle) = random_instance(4, 1, 77);
        let eps = pi.scaled(0.5).unwrap();
        assert!((eps.l2_norm() - 0.5).abs() < 1e-12);
        let state = build_state_psi_eps(&oracle, &pi, &eps, 1).unwrap();
        let rot = CoinRotation::from_amplitude_ratio(&pi, &eps).unwrap();
        let refl = PreparedReflection::new(&oracle);
        let out = amplification_subroutine(&state, &refl, &rot, &[1], 1).unwrap();
        let dist = out.register_distribution(2).unwrap();
        assert!((dist[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn subroutine_accept_probability_follows_rotation_formula() {
        let (pi, _, _, oracle) = random_instance(5, 2, 13);
        let eps = pi.scaled(0.31).unwrap();
        let theta = eps.l2_norm().asin();
        let state = build_state_psi_eps(&oracle, &pi, &eps, 2).unwrap();
        let rot = CoinRotation::from_amplitude_ratio(&pi, &eps).unwrap();
        let refl = PreparedReflection::new(&oracle);
        for t in 0..4u64 {
            let out = amplification_subroutine(&state, &refl, &rot, &[1], t).unwrap();
            let dist = out.register_distribution(2).unwrap();
            let expect = ((2 * t + 1) as f64 * theta).sin().powi(2);
            assert!(
                (dist[1] - expect).abs() < 1e-10,
                "t = {t}: {} vs {expect}",
                dist[1]
            );
        }
    }

    #[test]
    fn calibration_simple_points() {
        // Norm 1: no amplification needed.
        let (theta, t, theta_tilde, r) = exact_calibration(1.0).unwrap();
        assert!((theta - PI / 2.0).abs() < 1e-12);
        assert_eq!(t, 0);
        assert!((theta_tilde - PI / 2.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);

        // Norm 1/2: one round at the unchanged angle.
        let (theta, t, theta_tilde, r) = exact_calibration(0.5).unwrap();
        assert!((theta - PI / 6.0).abs() < 1e-12);
        assert_eq!(t, 1);
        assert!((theta_tilde - PI / 6.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-9);

        // Norm 0.3: the naive round count would push r above 1; the ceiling
        // lands at t = 3 with r back inside [1/2, 1].
        let (_, t, theta_tilde, r) = exact_calibration(0.3).unwrap();
        assert_eq!(t, 3);
        assert!((theta_tilde - PI / 14.0).abs() < 1e-12);
        assert!((0.5..=1.0).contains(&r), "r = {r}");
    }

    #[test]
    fn plan_identical_pair_is_single_query() {
        let pi = unit(vec![1.0, 2.0]);
        let plan = plan_exact(&pi, &pi, 1.0).unwrap();
        assert_eq!(plan.queries(), 1);
        assert!((plan.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plan_rejects_above_p_max() {
        let pi = AmplitudeVector::unit(vec![0.6, 0.8, 0.0]).unwrap();
        let sigma = unit(vec![1.0, 1.0, 1.0]);
        assert!(matches!(
            plan_exact(&pi, &sigma, 0.9),
            Err(QrsError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn run_identical_pair_outputs_target_in_one_query() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let pi = unit(vec![1.0, 2.0, 1.5]);
        let xi = HiddenStates::random(3, 2, &mut rng).unwrap();
        let oracle = PreparationOracle::new(&pi, &xi, 123).unwrap();
        let target = xi.superposition(&pi).unwrap();
        let run = run_aqrs(&oracle, &pi, &pi, 1.0, 2, &target, &mut rng).unwrap();
        assert!(run.accept);
        assert_eq!(run.queries, 1);
        assert!((run.success_overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn run_random_instance_reaches_exact_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let (pi, sigma, xi, oracle) = random_instance(4, 2, 91);
        let bounds = compute_bounds(&pi, &sigma).unwrap();
        let p = 0.5 * (bounds.p_min + bounds.p_max);
        let target = xi.superposition(&sigma).unwrap();
        let run = run_aqrs(&oracle, &pi, &sigma, p, 2, &target, &mut rng).unwrap();
        assert!(run.accept);
        assert!(run.accept_probability >= 1.0 - 1e-9);
        assert!(
            (run.success_overlap.powi(2) - p).abs() < 1e-9,
            "overlap^2 = {} vs p = {p}",
            run.success_overlap.powi(2)
        );
        let plan = plan_exact(&pi, &sigma, p).unwrap();
        assert_eq!(run.queries, plan.queries());
    }

    #[test]
    fn run_is_invariant_under_completion_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pi = unit(vec![0.9, 0.4, 0.2, 0.6]);
        let sigma = unit(vec![0.3, 0.8, 0.5, 0.2]);
        let xi = HiddenStates::random(4, 2, &mut rng).unwrap();
        let target = xi.superposition(&sigma).unwrap();
        let bounds = compute_bounds(&pi, &sigma).unwrap();
        let p = 0.5 * (bounds.p_min + bounds.p_max);

        let mut overlaps = Vec::new();
        for completion_seed in [1u64, 999, 123456] {
            let oracle = PreparationOracle::new(&pi, &xi, completion_seed).unwrap();
            let mut run_rng = ChaCha8Rng::seed_from_u64(5);
            let run = run_aqrs(&oracle, &pi, &sigma, p, 2, &target, &mut run_rng).unwrap();
            overlaps.push((run.success_overlap, run.queries));
        }
        for pair in overlaps.windows(2) {
            assert!((pair[0].0 - pair[1].0).abs() < 1e-12);
            assert_eq!(pair[0].1, pair[1].1);
        }
    }
}
