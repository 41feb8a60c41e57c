//! One Metropolis move between eigenstates of a Hamiltonian, implemented as
//! an exact amplitude conversion so the accept branch is reached with
//! certainty and no rejected move ever needs unwinding.
//!
//! Registers: `[C, d, n, n, 2]` for the gate-choice register, the eigenstate
//! register, the known eigenenergy label, the estimated label of the moved
//! state, and the coin appended during conversion. Eigenvalue estimation is
//! the exact label-shift unitary, and every application of it (forward or
//! inverse) is tallied as one query.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrsError, Result};
use crate::oracle::ReflectionOracle;
use crate::sqrs::{run_asqrs, RatioVector, Schedule};
use crate::state::{unitarity_defect, QuantumState};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A finite nondegenerate Hamiltonian in its eigenbasis, a gate set for the
/// random moves, and an inverse temperature.
#[derive(Debug, Clone)]
pub struct QmmInstance {
    energies: Vec<f64>,
    eigenvectors: Vec<Vec<Complex64>>,
    gates: Vec<Vec<Complex64>>,
    beta: f64,
}

impl QmmInstance {
    pub fn new(
        energies: Vec<f64>,
        eigenvectors: Vec<Vec<Complex64>>,
        gates: Vec<Vec<Complex64>>,
        beta: f64,
    ) -> Result<Self> {
        let d = energies.len();
        if d == 0 || d > 8 {
            return Err(QrsError::Validation(format!(
                "instance dimension {d} outside 1..=8"
            )));
        }
        if eigenvectors.len() != d {
            return Err(QrsError::DimensionMismatch(
                "one eigenvector per energy required".into(),
            ));
        }
        if gates.is_empty() {
            return Err(QrsError::Validation("gate set is empty".into()));
        }
        if beta < 0.0 || !beta.is_finite() {
            return Err(QrsError::Validation(format!(
                "inverse temperature {beta} must be nonnegative"
            )));
        }
        for (i, e) in energies.iter().enumerate() {
            for (j, f) in energies.iter().enumerate() {
                if i != j && (e - f).abs() < 1e-12 {
                    return Err(QrsError::Validation(format!(
                        "degenerate energies at {i} and {j}"
                    )));
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                let inner: Complex64 = eigenvectors[i]
                    .iter()
                    .zip(&eigenvectors[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (inner - Complex64::new(expect, 0.0)).norm() > 1e-12 {
                    return Err(QrsError::Validation(format!(
                        "eigenvectors {i}, {j} fail orthonormality"
                    )));
                }
            }
        }
        for (l, g) in gates.iter().enumerate() {
            if g.len() != d * d {
                return Err(QrsError::DimensionMismatch(format!(
                    "gate {l} is not {d}x{d}"
                )));
            }
            let defect = unitarity_defect(g, d);
            if defect > 1e-12 {
                return Err(QrsError::Validation(format!(
                    "gate {l} fails unitarity by {defect}"
                )));
            }
        }
        Ok(QmmInstance {
            energies,
            eigenvectors,
            gates,
            beta,
        })
    }

    /// Computational eigenbasis plus a seeded set of Haar-random gates.
    pub fn with_random_gates(
        energies: Vec<f64>,
        beta: f64,
        gate_count: usize,
        seed: u64,
    ) -> Result<Self> {
        use rand::SeedableRng;
        let d = energies.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let gates = (0..gate_count.max(1))
            .map(|_| haar_unitary(d, &mut rng))
            .collect();
        let basis = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| {
                        if i == j {
                            Complex64::new(1.0, 0.0)
                        } else {
                            CZERO
                        }
                    })
                    .collect()
            })
            .collect();
        QmmInstance::new(energies, basis, gates, beta)
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &[Vec<Complex64>] {
        &self.eigenvectors
    }

    pub fn gates(&self) -> &[Vec<Complex64>] {
        &self.gates
    }

    /// Move filter `f_ij = min(1, exp(beta (E_i - E_j)))`.
    pub fn move_filter(&self, i: usize, j: usize) -> f64 {
        if self.energies[i] >= self.energies[j] {
            1.0
        } else {
            (self.beta * (self.energies[i] - self.energies[j])).exp()
        }
    }

    /// Gate matrix elements in the eigenbasis: `c[l][j] = <psi_j|C_l|psi_i>`.
    pub fn gate_elements(&self, i: usize) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        self.gates
            .iter()
            .map(|g| {
                (0..d)
                    .map(|j| {
                        let mut acc = CZERO;
                        for r in 0..d {
                            for c in 0..d {
                                acc += self.eigenvectors[j][r].conj()
                                    * g[r * d + c]
                                    * self.eigenvectors[i][c];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Exact eigenenergy estimation on `[d, n]`: `|psi_j>|e> -> |psi_j>|e+j>`.
    fn estimation_unitary(&self) -> Vec<Complex64> {
        let d = self.dim();
        let total = d * d;
        let mut u = vec![CZERO; total * total];
        for j in 0..d {
            for row in 0..d {
                for col in 0..d {
                    let proj = self.eigenvectors[j][row] * self.eigenvectors[j][col].conj();
                    for e in 0..d {
                        let e_out = (e + j) % d;
                        u[(row * d + e_out) * total + (col * d + e)] += proj;
                    }
                }
            }
        }
        u
    }

    /// Ratios for the conversion, indexed by label pairs `(a, b)`:
    /// `tau = sqrt(min(1, exp(beta (E_a - E_b))))`.
    pub fn pair_ratios(&self) -> RatioVector {
        let d = self.dim();
        let mut tau = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                tau.push(self.move_filter(a, b).sqrt());
            }
        }
        RatioVector::new(tau).expect("diagonal pairs pin the maximum at 1")
    }
}

/// Weight data of one move: filters, gate elements, the flattened weight
/// vector `w_jl = sqrt(f_ij/|C|) c_ij^(l)`, and the normalized target state.
#[derive(Debug, Clone)]
pub struct MoveWeights {
    pub filters: Vec<f64>,
    pub gate_elements: Vec<Vec<Complex64>>,
    pub weights: Vec<Complex64>,
    pub weight_norm: f64,
    /// Probability of landing on eigenstate `j`: `sum_l |w_jl|^2 / ||w||^2`.
    pub outcome_distribution: Vec<f64>,
    /// The normalized converted state on `[C, d, n, n]`.
    pub target: QuantumState,
}

/// Filters, weights and the normalized target state for a move from
/// eigenstate `i`.
pub fn move_weights(instance: &QmmInstance, i: usize) -> Result<MoveWeights> {
    let d = instance.dim();
    if i >= d {
        return Err(QrsError::Validation(format!(
            "start index {i} out of range"
        )));
    }
    let gate_count = instance.gate_count();
    let filters: Vec<f64> = (0..d).map(|j| instance.move_filter(i, j)).collect();
    let gate_elements = instance.gate_elements(i);

    let mut weights = vec![CZERO; d * gate_count];
    let mut norm_sq = 0.0;
    for j in 0..d {
        for l in 0..gate_count {
            let w = (filters[j] / gate_count as f64).sqrt() * gate_elements[l][j];
            norm_sq += w.norm_sqr();
            weights[j * gate_count + l] = w;
        }
    }
    let weight_norm = norm_sq.sqrt();
    if weight_norm <= 0.0 {
        return Err(QrsError::Numerical("move has zero weight".into()));
    }
    let outcome_distribution: Vec<f64> = (0..d)
        .map(|j| {
            (0..gate_count)
                .map(|l| weights[j * gate_count + l].norm_sqr())
                .sum::<f64>()
                / norm_sq
        })
        .collect();

    // Target on [C, d, n, n]: w_jl/||w|| on |l>|psi_j>|i>|j>.
    let mut amps = vec![CZERO; gate_count * d * d * d];
    for j in 0..d {
        for l in 0..gate_count {
            let coeff = weights[j * gate_count + l] / weight_norm;
            for x in 0..d {
                let idx = ((l * d + x) * d + i) * d + j;
                amps[idx] += coeff * instance.eigenvectors[j][x];
            }
        }
    }
    let target = QuantumState::from_amplitudes(&[gate_count, d, d, d], amps)?;

    Ok(MoveWeights {
        filters,
        gate_elements,
        weights,
        weight_norm,
        outcome_distribution,
        target,
    })
}

/// Result of one move.
#[derive(Debug, Clone)]
pub struct MoveResult {
    pub j_new: usize,
    /// Estimation queries: 2 to build the superposed move state, 2 per
    /// reflection inside the conversion, 1 to uncompute the label.
    pub queries: u64,
    pub reflection_uses: u64,
    pub accepted_level: i64,
    /// Conversion output before the label measurement, on `[C, d, n, n, 2]`.
    pub pre_measurement: QuantumState,
    /// Exact Born distribution of the measured label.
    pub outcome_distribution: Vec<f64>,
    /// Overlap of the conversion output with the analytic target.
    pub fidelity: f64,
    pub post_state: QuantumState,
}

/// The superposed moved state of one step, before conversion: registers
/// `[C, d, n, n]` holding the gate choice, the moved eigenstate, the known
/// label `i`, and the estimated label of the moved component. Costs two
/// estimation queries (one for the `|i>` label, one for the new label).
pub fn prepared_move_state(instance: &QmmInstance, i: usize) -> Result<QuantumState> {
    let d = instance.dim();
    if i >= d {
        return Err(QrsError::Validation(format!(
            "start index {i} out of range"
        )));
    }
    let gate_count = instance.gate_count();

    let mut amps = vec![CZERO; gate_count * d * d * d];
    for x in 0..d {
        let idx = (x * d + i) * d; // l = 0, label' = 0
        amps[idx] = instance.eigenvectors[i][x];
    }
    let state = QuantumState::from_amplitudes(&[gate_count, d, d, d], amps)?;

    // Spread the gate register and apply the chosen gate coherently.
    let dft = dft_matrix(gate_count);
    let state = state.apply_matrix(&dft, &[0])?;
    let mut ctrl = vec![CZERO; (gate_count * d) * (gate_count * d)];
    for l in 0..gate_count {
        for r in 0..d {
            for c in 0..d {
                ctrl[(l * d + r) * gate_count * d + (l * d + c)] = instance.gates[l][r * d + c];
            }
        }
    }
    let state = state.apply_matrix(&ctrl, &[0, 1])?;

    // Estimate the moved state's label into the fourth register.
    let e_h = instance.estimation_unitary();
    state.apply_matrix(&e_h, &[1, 3])
}

/// Reflection through the prepared move state (with its conversion coin).
/// Realized by uncomputing the preparation, flipping the phase of the known
/// start configuration, and recomputing; each application is tallied as two
/// estimation queries.
pub fn reflect_through_initial(instance: &QmmInstance, i: usize) -> Result<ReflectionOracle> {
    let prepared = prepared_move_state(instance, i)?;
    ReflectionOracle::with_query_cost(prepared.append_zero_register(2)?, 2)
}

/// Performs one move from eigenstate `i`: build the superposed moved state
/// with two estimation queries, convert it to the filtered target with
/// certainty, measure the new label, and uncompute it.
pub fn metropolis_move<G: Rng>(
    instance: &QmmInstance,
    i: usize,
    rng: &mut G,
) -> Result<MoveResult> {
    let d = instance.dim();
    let weights = move_weights(instance, i)?;
    let state = prepared_move_state(instance, i)?;
    let mut estimation_queries = 2u64;

    let initial = state.append_zero_register(2)?;
    let reflection = ReflectionOracle::with_query_cost(initial.clone(), 2)?;
    let tau = instance.pair_ratios();
    let run = run_asqrs(
        &initial,
        &reflection,
        &tau,
        1.0,
        &Schedule::default(),
        &[2, 3],
        &weights.target,
        rng,
    )?;
    let reflection_uses = run.queries / 2;

    let outcome_distribution = run.final_state.register_distribution(3)?;
    let (j_new, post, _) = run.final_state.measure_register(3, rng)?;

    // Uncompute the measured label with one inverse estimation query.
    let e_h_dag = crate::state::dagger(&instance.estimation_unitary(), d * d);
    let post = post.apply_matrix(&e_h_dag, &[1, 3])?;
    estimation_queries += 1;
    let label_dist = post.register_distribution(3)?;
    if (label_dist[0] - 1.0).abs() > 1e-10 {
        return Err(QrsError::Numerical(format!(
            "label register failed to uncompute: P[0] = {}",
            label_dist[0]
        )));
    }

    Ok(MoveResult {
        j_new,
        queries: estimation_queries + run.queries,
        reflection_uses,
        accepted_level: run.accepted_level,
        pre_measurement: run.final_state,
        outcome_distribution,
        fidelity: run.success_overlap,
        post_state: post,
    })
}

/// Visit histogram of a short demonstration chain. Convergence to the Gibbs
/// distribution is reported, never asserted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainResult {
    pub visits: Vec<u64>,
    pub moves: Vec<(usize, u64)>,
    pub total_queries: u64,
}

pub fn run_chain<G: Rng>(
    instance: &QmmInstance,
    start: usize,
    steps: usize,
    rng: &mut G,
) -> Result<ChainResult> {
    let mut visits = vec![0u64; instance.dim()];
    visits[start] += 1;
    let mut moves = Vec::with_capacity(steps);
    let mut current = start;
    let mut total_queries = 0;
    for _ in 0..steps {
        let result = metropolis_move(instance, current, rng)?;
        current = result.j_new;
        visits[current] += 1;
        total_queries += result.queries;
        moves.push((current, result.queries));
    }
    Ok(ChainResult {
        visits,
        moves,
        total_queries,
    })
}

fn dft_matrix(dim: usize) -> Vec<Complex64> {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = vec![CZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let angle = std::f64::consts::TAU * (r * c) as f64 / dim as f64;
            m[r * dim + c] = Complex64::from_polar(scale, angle);
        }
    }
    m
}

fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    // Gram-Schmidt on a complex Gaussian matrix.
    let gauss = |rng: &mut dyn rand::RngCore| {
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(gauss(rng), gauss(rng)))
            .collect();
        for _ in 0..2 {
            for c in &cols {
                let inner: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(c) {
                    *x -= inner * a;
                }
            }
        }
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut u = vec![CZERO; dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            u[r * dim + c] = *v;
        }
    }
    u
}
