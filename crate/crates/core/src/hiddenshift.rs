//! Boolean hidden shift: spectral analysis, the rejection-sampling solver
//! that flattens the Walsh-Hadamard spectrum, a one-sided checking test, and
//! classical-repetition boosting.
//!
//! Conventions: truth tables are indexed by the integer `x` in `0..2^n`, the
//! inner product `w . x` is the parity of `w & x`, and the spectrum uses the
//! signed convention `fhat(w) = 2^-n sum_x (-1)^(w.x + f(x))`, which makes
//! the spectrum a unit vector for every truth table.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeVector;
use crate::error::{QrsError, Result};
use crate::oracle::{QueryCounter, QueryOracle};
use crate::qrs::{plan_exact, run_aqrs_with_plan, ExactAmplificationPlan};
use crate::state::QuantumState;
use crate::waterfill::epsilon_of_gamma;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unnormalized in-place Walsh-Hadamard butterfly, `O(n 2^n)`.
pub fn fwht_in_place(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        let mut k = 0;
        while k < len {
            for j in k..k + half {
                let x = data[j];
                let y = data[j + half];
                data[j] = x + y;
                data[j + half] = x - y;
            }
            k += 2 * half;
        }
        half *= 2;
    }
}

/// A Boolean function on `n` bits with its cached signed spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: u32,
    table: Vec<u8>,
    spectrum: Vec<f64>,
}

impl BooleanFunction {
    /// Builds from a truth table of 0/1 entries of length `2^n`; computes and
    /// caches the spectrum with the fast transform.
    pub fn from_bits(n: u32, table: Vec<u8>) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(QrsError::Validation(format!(
                "bit count {n} outside 1..=20"
            )));
        }
        if table.len() != 1 << n {
            return Err(QrsError::Validation(format!(
                "truth table length {} does not match 2^{n}",
                table.len()
            )));
        }
        if table.iter().any(|&b| b > 1) {
            return Err(QrsError::Validation(
                "truth table entries must be bits".into(),
            ));
        }
        let mut signs: Vec<f64> = table
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect();
        fwht_in_place(&mut signs);
        let scale = 1.0 / (1u64 << n) as f64;
        let spectrum: Vec<f64> = signs.iter().map(|v| v * scale).collect();
        let parseval: f64 = spectrum.iter().map(|v| v * v).sum();
        if (parseval - 1.0).abs() > 1e-12 {
            return Err(QrsError::Numerical(format!(
                "spectrum failed the Parseval audit: {parseval}"
            )));
        }
        Ok(BooleanFunction { n, table, spectrum })
    }

    /// Parses `"0110..."` (length `2^n`) or a hex string (length `2^n / 4`),
    /// most significant bit first.
    pub fn from_text(n: u32, text: &str) -> Result<Self> {
        let text = text.trim();
        let size = 1usize << n;
        if text.len() == size && text.chars().all(|c| c == '0' || c == '1') {
            let table = text.bytes().map(|b| b - b'0').collect();
            return Self::from_bits(n, table);
        }
        if n >= 2 && text.len() == size / 4 && text.chars().all(|c| c.is_ascii_hexdigit()) {
            let mut table = Vec::with_capacity(size);
            for c in text.chars() {
                let v = c.to_digit(16).unwrap() as u8;
                for shift in (0..4).rev() {
                    table.push((v >> shift) & 1);
                }
            }
            return Self::from_bits(n, table);
        }
        Err(QrsError::Validation(format!(
            "expected {size} bits or {} hex digits for n = {n}",
            size / 4
        )))
    }

    /// Uniformly random truth table.
    pub fn random(n: u32, rng: &mut impl Rng) -> Result<Self> {
        let table = (0..1usize << n).map(|_| rng.gen_range(0..=1u8)).collect();
        Self::from_bits(n, table)
    }

    /// The quadratic inner-product function on adjacent bit pairs; its
    /// spectrum is perfectly flat (a bent function). Requires even `n`.
    pub fn inner_product_bent(n: u32) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(QrsError::Validation(format!(
                "inner-product function needs even n, got {n}"
            )));
        }
        let table = (0..1usize << n)
            .map(|x| {
                let mut acc = 0u8;
                for pair in 0..n / 2 {
                    let lo = (x >> (2 * pair)) & 1;
                    let hi = (x >> (2 * pair + 1)) & 1;
                    acc ^= (lo & hi) as u8;
                }
                acc
            })
            .collect();
        Self::from_bits(n, table)
    }

    /// Indicator of the all-zeros input.
    pub fn delta(n: u32) -> Result<Self> {
        let mut table = vec![0u8; 1 << n];
        table[0] = 1;
        Self::from_bits(n, table)
    }

    pub fn bits(&self) -> u32 {
        self.n
    }

    pub fn domain_size(&self) -> usize {
        1 << self.n
    }

    pub fn eval(&self, x: usize) -> u8 {
        self.table[x]
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// The cached signed spectrum.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Magnitudes of the spectrum; a unit vector by Parseval.
    pub fn spectrum_magnitudes(&self) -> AmplitudeVector {
        AmplitudeVector::new(self.spectrum.iter().map(|v| v.abs()).collect())
            .expect("magnitudes are nonnegative")
    }

    /// `I_f(v) = Pr_x[f(x) != f(x + v)]`.
    pub fn influence(&self, v: usize) -> f64 {
        let size = self.domain_size();
        let flips = (0..size)
            .filter(|&x| self.table[x] != self.table[x ^ v])
            .count();
        flips as f64 / size as f64
    }

    /// Minimum influence over nonzero directions.
    pub fn min_influence(&self) -> f64 {
        (1..self.domain_size())
            .map(|v| self.influence(v))
            .fold(f64::INFINITY, f64::min)
    }

    /// The phase state `|phi_f(s)> = 2^{-n/2} sum_x (-1)^{f(x+s)} |x>`.
    pub fn phase_state(&self, shift: usize) -> Result<QuantumState> {
        let size = self.domain_size();
        let scale = 1.0 / (size as f64).sqrt();
        let amps = (0..size)
            .map(|x| {
                let sign = if self.table[x ^ shift] == 0 {
                    1.0
                } else {
                    -1.0
                };
                Complex64::new(sign * scale, 0.0)
            })
            .collect();
        QuantumState::from_amplitudes(&[size], amps)
    }
}

fn parity(a: usize, b: usize) -> f64 {
    if (a & b).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Phase oracle for the shifted function: `|x> -> (-1)^{f(x+s)} |x>`.
///
/// Construction validates the promise: a nonzero shift must change the
/// function somewhere, otherwise the instance is indistinguishable from the
/// unshifted one.
pub struct ShiftOracle {
    function: BooleanFunction,
    shift: usize,
    counter: QueryCounter,
}

impl ShiftOracle {
    pub fn new(function: BooleanFunction, shift: usize) -> Result<Self> {
        if shift >= function.domain_size() {
            return Err(QrsError::Validation(format!(
                "shift {shift} outside the domain"
            )));
        }
        if shift != 0 && function.influence(shift) == 0.0 {
            return Err(QrsError::Validation(format!(
                "promise violated: the function is invariant under shift {shift}"
            )));
        }
        Ok(ShiftOracle {
            function,
            shift,
            counter: QueryCounter::new(),
        })
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn queries(&self) -> u64 {
        self.counter.count()
    }

    fn hidden_shift(&self) -> usize {
        self.shift
    }

    /// Applies the phase oracle on one register (1 query). Self-inverse.
    pub fn apply_phase(&self, state: &QuantumState, register: usize) -> Result<QuantumState> {
        self.counter.add(1);
        apply_shift_phases(&self.function, self.shift, state, register)
    }

    /// `|psi_fhat(s)> = H O_s H |0..0>`: one query.
    pub fn prepare_spectral_state(&self) -> Result<QuantumState> {
        let state = QuantumState::zero_basis(&[self.function.domain_size()])?;
        let state = state.hadamard_register(0)?;
        let state = self.apply_phase(&state, 0)?;
        state.hadamard_register(0)
    }

    /// `|phi_f(s)> = O_s H |0..0>`: one query.
    pub fn prepare_phase_state(&self) -> Result<QuantumState> {
        let state = QuantumState::zero_basis(&[self.function.domain_size()])?;
        let state = state.hadamard_register(0)?;
        self.apply_phase(&state, 0)
    }
}

fn apply_shift_phases(
    function: &BooleanFunction,
    shift: usize,
    state: &QuantumState,
    register: usize,
) -> Result<QuantumState> {
    let dims = state.dims().to_vec();
    if register >= dims.len() || dims[register] != function.domain_size() {
        return Err(QrsError::DimensionMismatch(format!(
            "phase oracle of dimension {} applied to register {register} of {:?}",
            function.domain_size(),
            dims
        )));
    }
    let mut stride = 1usize;
    for d in dims.iter().skip(register + 1) {
        stride *= d;
    }
    let dim = dims[register];
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(idx, amp)| {
            let x = (idx / stride) % dim;
            if function.eval(x ^ shift) == 1 {
                -amp
            } else {
                *amp
            }
        })
        .collect();
    QuantumState::from_amplitudes(&dims, amps)
}

/// Preparation oracle for the spectral resampling problem: the shifted
/// spectral state with its signs corrected by the public diagonal, so the
/// amplitudes are `|fhat(w)|` and the hidden data is the phase `(-1)^{w.s}`.
/// Each forward or inverse use consumes one shift-oracle query.
pub struct SpectralPreparation<'a> {
    oracle: &'a ShiftOracle,
}

impl<'a> SpectralPreparation<'a> {
    pub fn new(oracle: &'a ShiftOracle) -> Self {
        SpectralPreparation { oracle }
    }

    fn sign_correction(&self, state: &QuantumState, register: usize) -> Result<QuantumState> {
        // Known diagonal built from the public spectrum; costs no queries.
        let spectrum = self.oracle.function.spectrum();
        let dims = state.dims().to_vec();
        let mut stride = 1usize;
        for d in dims.iter().skip(register + 1) {
            stride *= d;
        }
        let dim = dims[register];
        let amps = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(idx, amp)| {
                let w = (idx / stride) % dim;
                if spectrum[w] < 0.0 {
                    -amp
                } else {
                    *amp
                }
            })
            .collect();
        QuantumState::from_amplitudes(&dims, amps)
    }
}

impl QueryOracle for SpectralPreparation<'_> {
    fn apply(
        &self,
        state: &QuantumState,
        targets: &[usize],
        inverse: bool,
    ) -> Result<QuantumState> {
        // Layout contract: a dimension-1 hidden register followed by the
        // 2^n-dimensional index register.
        if targets.len() != 2 || state.dims()[targets[0]] != 1 {
            return Err(QrsError::DimensionMismatch(
                "spectral preparation expects a [1, 2^n] register pair".into(),
            ));
        }
        let reg = targets[1];
        if state.dims()[reg] != self.oracle.function.domain_size() {
            return Err(QrsError::DimensionMismatch(format!(
                "index register of dimension {} does not match the function domain {}",
                state.dims()[reg],
                self.oracle.function.domain_size()
            )));
        }
        if inverse {
            let s = self.sign_correction(state, reg)?;
            let s = s.hadamard_register(reg)?;
            let s = self.oracle.apply_phase(&s, reg)?;
            s.hadamard_register(reg)
        } else {
            let s = state.hadamard_register(reg)?;
            let s = self.oracle.apply_phase(&s, reg)?;
            let s = s.hadamard_register(reg)?;
            self.sign_correction(&s, reg)
        }
    }

    fn queries(&self) -> u64 {
        self.oracle.queries()
    }
}

/// Result of one solver run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BhspRun {
    pub s_hat: usize,
    pub queries: u64,
    pub accept: bool,
    /// Exact probability that the readout equals the hidden shift, computed
    /// from the final amplitudes.
    pub shift_probability: f64,
    pub epsilon_norm: f64,
    pub rounds: u64,
}

/// Runs the spectral resampling solver at success probability `p`: prepare
/// the sign-corrected spectral state, convert its amplitudes to the flat
/// vector, transform back, and read out a shift candidate.
pub fn run_bhsp<G: Rng>(oracle: &ShiftOracle, p: f64, rng: &mut G) -> Result<BhspRun> {
    let plan = bhsp_plan(oracle.function(), p)?;
    run_bhsp_with_plan(oracle, &plan, rng)
}

/// The calibrated plan for the spectral instance `(|fhat|, flat)` at `p`.
pub fn bhsp_plan(function: &BooleanFunction, p: f64) -> Result<ExactAmplificationPlan> {
    let size = function.domain_size();
    let pi = function.spectrum_magnitudes();
    let sigma = AmplitudeVector::new(vec![1.0 / (size as f64).sqrt(); size])?;
    plan_exact(&pi, &sigma, p)
}

pub fn run_bhsp_with_plan<G: Rng>(
    oracle: &ShiftOracle,
    plan: &ExactAmplificationPlan,
    rng: &mut G,
) -> Result<BhspRun> {
    let function = oracle.function();
    if function.bits() > 12 {
        return Err(QrsError::Validation(format!(
            "full statevector simulation is capped at 12 bits, got {}",
            function.bits()
        )));
    }
    let size = function.domain_size();
    let pi = function.spectrum_magnitudes();
    let preparation = SpectralPreparation::new(oracle);

    // Verification target: the flat superposition with the hidden phases.
    let shift = oracle.hidden_shift();
    let scale = 1.0 / (size as f64).sqrt();
    let target_amps: Vec<Complex64> = (0..size)
        .map(|w| Complex64::new(parity(w, shift) * scale, 0.0))
        .collect();
    let target = QuantumState::from_amplitudes(&[1, size], target_amps)?;

    let run = run_aqrs_with_plan(&preparation, &pi, plan, 1, &target, rng)?;

    // Hadamard readout of the shift.
    let readout = run.final_state.hadamard_register(1)?;
    let dist = readout.register_distribution(1)?;
    let shift_probability = dist[shift];
    let (s_hat, _, _) = readout.measure_register(1, rng)?;
    Ok(BhspRun {
        s_hat,
        queries: run.queries,
        accept: run.accept,
        shift_probability,
        epsilon_norm: plan.epsilon_norm,
        rounds: plan.t_tilde,
    })
}

/// Outcome of the one-sided checking test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub accepted: bool,
    pub rounds_run: u64,
    pub queries: u64,
}

/// Checks a candidate shift `v` with the controlled comparison circuit. Each
/// round costs one oracle query, prepares the hidden and candidate phase
/// states in superposition, and accepts with probability
/// `(1 + <phi_f(s)|phi_f(v)>)/2 = 1 - I_f(s+v)`. The true shift is never
/// rejected; a wrong candidate survives `r` rounds with probability
/// `(1 - I_f(s+v))^r`.
pub fn check_shift<G: Rng>(
    oracle: &ShiftOracle,
    candidate: usize,
    rounds: u64,
    rng: &mut G,
) -> Result<CheckOutcome> {
    if rounds == 0 {
        return Err(QrsError::Validation(
            "checking needs at least one round".into(),
        ));
    }
    let function = oracle.function();
    let size = function.domain_size();
    if candidate >= size {
        return Err(QrsError::Validation(format!(
            "candidate shift {candidate} outside the domain"
        )));
    }
    let queries_before = oracle.queries();
    for round in 0..rounds {
        // Ancilla in |+>, then the hidden-state branch on ancilla 0 and the
        // candidate branch on ancilla 1.
        let hidden = oracle.prepare_phase_state()?;
        let candidate_state = {
            // The candidate phases come from the public function; no query.
            let state = QuantumState::zero_basis(&[size])?;
            let state = state.hadamard_register(0)?;
            apply_shift_phases(function, candidate, &state, 0)?
        };
        let scale = Complex64::new(0.5f64.sqrt(), 0.0);
        let mut amps = vec![CZERO; 2 * size];
        for x in 0..size {
            amps[x] = hidden.amplitudes()[x] * scale;
            amps[size + x] = candidate_state.amplitudes()[x] * scale;
        }
        let state = QuantumState::from_amplitudes(&[2, size], amps)?;
        let state = state.hadamard_register(0)?;
        let (outcome, _, _) = state.measure_register(0, rng)?;
        if outcome == 1 {
            return Ok(CheckOutcome {
                accepted: false,
                rounds_run: round + 1,
                queries: oracle.queries() - queries_before,
            });
        }
    }
    Ok(CheckOutcome {
        accepted: true,
        rounds_run: rounds,
        queries: oracle.queries() - queries_before,
    })
}

/// Result of the boosted solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoostRun {
    pub s_hat: usize,
    pub total_queries: u64,
    pub attempts: u64,
    /// Success probability of each attempt, from the cut spectrum.
    pub p: f64,
    /// The same probability derived through the l1 relation on the
    /// normalized cut vector (identical by construction).
    pub p_l1_normalized: f64,
    /// The l1 relation read on the raw cut vector, reported for comparison.
    pub p_l1_raw: f64,
    pub check_rounds: u64,
    pub epsilon_norm: f64,
    pub min_influence: f64,
}

/// Boosted solver: cut the spectrum at level `gamma_cut`, run the solver at
/// the reduced success probability, and repeat with checking until a
/// candidate passes. The returned shift is wrong with probability at most
/// `delta`.
pub fn boosted_bhsp<G: Rng>(
    oracle: &ShiftOracle,
    gamma_cut: f64,
    delta: f64,
    rng: &mut G,
) -> Result<BoostRun> {
    if !(0.0..=1.0).contains(&gamma_cut) {
        return Err(QrsError::Validation(format!(
            "cut level {gamma_cut} outside [0, 1]"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(QrsError::Validation(format!(
            "failure budget {delta} outside (0, 1)"
        )));
    }
    let function = oracle.function();
    let size = function.domain_size();
    let pi = function.spectrum_magnitudes();
    let sigma = AmplitudeVector::new(vec![1.0 / (size as f64).sqrt(); size])?;

    // eps_w = min(|fhat_w|, gamma_cut / sqrt(2^n)) is the cut vector at water
    // level gamma_cut.
    let eps = epsilon_of_gamma(&pi, &sigma, gamma_cut)?;
    let eps_norm = eps.l2_norm();
    if eps_norm <= 0.0 {
        return Err(QrsError::Validation(
            "cut level removed the entire spectrum".into(),
        ));
    }
    let overlap = sigma.dot(&eps)? / eps_norm;
    let p = overlap * overlap;
    let p_l1_normalized = (eps.l1_norm() / eps_norm).powi(2) / size as f64;
    let p_l1_raw = eps.l1_norm().powi(2) / size as f64;
    if p <= 0.0 {
        return Err(QrsError::Validation(
            "cut spectrum gives zero success probability".into(),
        ));
    }

    let min_influence = function.min_influence();
    if min_influence <= 0.0 {
        return Err(QrsError::Validation(
            "function has a zero-influence direction; candidates cannot be checked".into(),
        ));
    }
    // A wrong candidate must slip through with probability at most
    // delta' = delta * p, so that the overall failure rate stays below delta.
    let check_rounds = if p >= 1.0 - 1e-12 {
        1
    } else {
        ((1.0 / (delta * p)).ln() / min_influence).ceil().max(1.0) as u64
    };

    let plan = bhsp_plan(function, p)?;
    let queries_before = oracle.queries();
    let max_attempts = ((200.0 / p).ceil() as u64).max(50);
    for attempt in 1..=max_attempts {
        let run = run_bhsp_with_plan(oracle, &plan, rng)?;
        if !run.accept {
            continue;
        }
        let check = check_shift(oracle, run.s_hat, check_rounds, rng)?;
        if check.accepted {
            return Ok(BoostRun {
                s_hat: run.s_hat,
                total_queries: oracle.queries() - queries_before,
                attempts: attempt,
                p,
                p_l1_normalized,
                p_l1_raw,
                check_rounds,
                epsilon_norm: eps_norm,
                min_influence,
            });
        }
    }
    Err(QrsError::Numerical(format!(
        "no candidate passed checking within {max_attempts} attempts"
    )))
}
