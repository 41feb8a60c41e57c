//! Query-counted oracles hiding unknown states behind an opaque interface.
//!
//! A [`PreparationOracle`] is a full unitary whose action on `|0..0>` is the
//! hidden superposition; its behaviour on the orthogonal complement is a
//! deterministic seeded completion, so runs are reproducible and tests can
//! vary the completion adversarially. A [`ReflectionOracle`] reflects through
//! a hidden target state. Every forward or inverse application bumps an
//! atomic query counter owned by the oracle.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amplitude::AmplitudeVector;
use crate::error::{QrsError, Result};
use crate::state::{dagger, unitarity_defect, QuantumState, INPUT_TOL, NORM_TOL};

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Monotone query counter. Shared by an oracle and its inverse.
#[derive(Debug, Default)]
pub struct QueryCounter {
    count: AtomicU64,
}

impl QueryCounter {
    pub fn new() -> Self {
        QueryCounter {
            count: AtomicU64::new(0),
        }
    }

    pub fn add(&self, queries: u64) {
        self.count.fetch_add(queries, Ordering::Relaxed);
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Black boxes that consume counted queries when applied to a state.
pub trait QueryOracle {
    /// Applies the oracle (or its inverse) to the selected registers.
    fn apply(&self, state: &QuantumState, targets: &[usize], inverse: bool)
        -> Result<QuantumState>;

    /// Total queries consumed so far.
    fn queries(&self) -> u64;
}

/// Free-function form of oracle application.
pub fn apply_oracle<O: QueryOracle>(
    state: &QuantumState,
    oracle: &O,
    targets: &[usize],
    inverse: bool,
) -> Result<QuantumState> {
    oracle.apply(state, targets, inverse)
}

/// Ordered list of unknown unit states, one per outcome label.
#[derive(Debug, Clone)]
pub struct HiddenStates {
    dim: usize,
    states: Vec<Vec<Complex64>>,
}

impl HiddenStates {
    /// Validates that every hidden state is a unit vector within `1e-12`.
    pub fn new(states: Vec<Vec<Complex64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(QrsError::Validation("no hidden states".into()));
        }
        let dim = states[0].len();
        if dim == 0 {
            return Err(QrsError::Validation("hidden states of dimension 0".into()));
        }
        for (k, xi) in states.iter().enumerate() {
            if xi.len() != dim {
                return Err(QrsError::DimensionMismatch(format!(
                    "hidden state {k} has dimension {}, expected {dim}",
                    xi.len()
                )));
            }
            let norm = xi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(QrsError::Validation(format!(
                    "hidden state {k} has norm {norm}"
                )));
            }
        }
        Ok(HiddenStates { dim, states })
    }

    /// `n` hidden phases (dimension-1 states) drawn from the seeded generator.
    pub fn random_phases(n: usize, rng: &mut impl Rng) -> Result<Self> {
        let states = (0..n)
            .map(|_| {
                let angle: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                vec![Complex64::from_polar(1.0, angle)]
            })
            .collect();
        HiddenStates::new(states)
    }

    /// `n` Haar-like random unit vectors of dimension `d`.
    pub fn random(n: usize, d: usize, rng: &mut impl Rng) -> Result<Self> {
        let states = (0..n)
            .map(|_| {
                let mut v: Vec<Complex64> = (0..d)
                    .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                    .collect();
                let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                for a in &mut v {
                    *a /= norm;
                }
                v
            })
            .collect();
        HiddenStates::new(states)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, k: usize) -> &[Complex64] {
        &self.states[k]
    }

    /// The superposition `sum_k a_k |xi_k>|k>` on registers `[d, n]`.
    pub fn superposition(&self, amplitudes: &AmplitudeVector) -> Result<QuantumState> {
        if amplitudes.len() != self.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "{} amplitudes for {} hidden states",
                amplitudes.len(),
                self.len()
            )));
        }
        let n = self.len();
        let mut amps = vec![CZERO; self.dim * n];
        for (k, xi) in self.states.iter().enumerate() {
            for (i, a) in xi.iter().enumerate() {
                amps[i * n + k] = a * amplitudes[k];
            }
        }
        QuantumState::from_amplitudes(&[self.dim, n], amps)
    }
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller; avoids pulling in a distributions crate for one helper.
    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Unitary black box mapping `|0..0>` to `sum_k pi_k |xi_k>|k>`, completed on
/// the orthogonal complement by a seeded Gram-Schmidt basis.
pub struct PreparationOracle {
    hidden_dim: usize,
    labels: usize,
    unitary: Vec<Complex64>,
    pi: AmplitudeVector,
    counter: QueryCounter,
}

impl PreparationOracle {
    /// Builds the oracle from amplitudes, hidden states, and a completion
    /// seed. Unit-norm inputs are enforced within `1e-9`.
    pub fn new(pi: &AmplitudeVector, xi: &HiddenStates, completion_seed: u64) -> Result<Self> {
        if pi.len() != xi.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "{} amplitudes for {} hidden states",
                pi.len(),
                xi.len()
            )));
        }
        pi.check_unit()?;
        for k in 0..xi.len() {
            let norm = xi.state(k).iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > INPUT_TOL {
                return Err(QrsError::Validation(format!(
                    "hidden state {k} has norm {norm}"
                )));
            }
        }
        let total = xi.dim() * xi.len();
        let target = xi.superposition(pi)?;
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(total);
        columns.push(target.amplitudes().to_vec());

        let mut rng = ChaCha8Rng::seed_from_u64(completion_seed);
        while columns.len() < total {
            let candidate: Vec<Complex64> = (0..total)
                .map(|_| Complex64::new(gauss(&mut rng), gauss(&mut rng)))
                .collect();
            if let Some(column) = orthonormalize(&candidate, &columns) {
                columns.push(column);
            }
        }
        let mut unitary = vec![CZERO; total * total];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                unitary[i * total + j] = *v;
            }
        }
        let oracle = PreparationOracle {
            hidden_dim: xi.dim(),
            labels: xi.len(),
            unitary,
            pi: pi.clone(),
            counter: QueryCounter::new(),
        };
        if total <= 64 {
            let defect = unitarity_defect(&oracle.unitary, total);
            if defect > 1e-11 {
                return Err(QrsError::Numerical(format!(
                    "oracle completion failed unitarity audit: defect {defect}"
                )));
            }
        }
        Ok(oracle)
    }

    /// Wraps an explicit unitary whose first column already encodes the
    /// hidden superposition. Used by structured oracles that are too large
    /// for a dense random completion.
    pub fn from_unitary(
        hidden_dim: usize,
        labels: usize,
        unitary: Vec<Complex64>,
        pi: &AmplitudeVector,
    ) -> Result<Self> {
        let total = hidden_dim * labels;
        if unitary.len() != total * total {
            return Err(QrsError::DimensionMismatch(format!(
                "unitary has {} entries, expected {}",
                unitary.len(),
                total * total
            )));
        }
        pi.check_unit()?;
        let norm: f64 = (0..total)
            .map(|i| unitary[i * total].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if (norm - 1.0).abs() > INPUT_TOL {
            return Err(QrsError::Validation(format!(
                "first column of supplied oracle unitary has norm {norm}"
            )));
        }
        Ok(PreparationOracle {
            hidden_dim,
            labels,
            unitary,
            pi: pi.clone(),
            counter: QueryCounter::new(),
        })
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn pi(&self) -> &AmplitudeVector {
        &self.pi
    }

    pub fn total_dim(&self) -> usize {
        self.hidden_dim * self.labels
    }

    /// Full matrix, exposed for unitarity audits in tests.
    pub fn unitary(&self) -> &[Complex64] {
        &self.unitary
    }
}

impl QueryOracle for PreparationOracle {
    fn apply(
        &self,
        state: &QuantumState,
        targets: &[usize],
        inverse: bool,
    ) -> Result<QuantumState> {
        let tdim: usize = targets.iter().map(|&t| state.dims()[t]).product();
        if tdim != self.total_dim() {
            return Err(QrsError::DimensionMismatch(format!(
                "oracle of dimension {} applied to registers of product {tdim}",
                self.total_dim()
            )));
        }
        self.counter.add(1);
        if inverse {
            let inv = dagger(&self.unitary, self.total_dim());
            state.apply_matrix(&inv, targets)
        } else {
            state.apply_matrix(&self.unitary, targets)
        }
    }

    fn queries(&self) -> u64 {
        self.counter.count()
    }
}

/// Black box implementing `I - 2|t><t|` for a hidden target state.
pub struct ReflectionOracle {
    target: QuantumState,
    queries_per_use: u64,
    counter: QueryCounter,
}

impl ReflectionOracle {
    pub fn new(target: QuantumState) -> Result<Self> {
        Self::with_query_cost(target, 1)
    }

    /// A reflection whose every application is tallied as `queries_per_use`
    /// oracle calls (used when the reflection is itself synthesized from a
    /// costlier primitive).
    pub fn with_query_cost(target: QuantumState, queries_per_use: u64) -> Result<Self> {
        target.check_norm(NORM_TOL)?;
        if queries_per_use == 0 {
            return Err(QrsError::Validation(
                "reflection must consume at least one query per use".into(),
            ));
        }
        Ok(ReflectionOracle {
            target,
            queries_per_use,
            counter: QueryCounter::new(),
        })
    }

    pub fn target_dims(&self) -> &[usize] {
        self.target.dims()
    }
}

impl QueryOracle for ReflectionOracle {
    fn apply(
        &self,
        state: &QuantumState,
        targets: &[usize],
        _inverse: bool, // a reflection is its own inverse; the query still counts
    ) -> Result<QuantumState> {
        let dims: Vec<usize> = targets.iter().map(|&t| state.dims()[t]).collect();
        if dims != self.target.dims() {
            return Err(QrsError::DimensionMismatch(format!(
                "reflection target has registers {:?}, selected registers have {:?}",
                self.target.dims(),
                dims
            )));
        }
        self.counter.add(self.queries_per_use);
        if targets.len() == state.dims().len() && targets.iter().enumerate().all(|(i, &t)| i == t) {
            // Full-space fast path: v - 2<t|v> t.
            let inner: Complex64 = self
                .target
                .amplitudes()
                .iter()
                .zip(state.amplitudes())
                .map(|(t, v)| t.conj() * v)
                .sum();
            let amps = state
                .amplitudes()
                .iter()
                .zip(self.target.amplitudes())
                .map(|(v, t)| v - 2.0 * inner * t)
                .collect();
            let out = QuantumState::from_amplitudes(state.dims(), amps)?;
            return Ok(out);
        }
        // Subset of registers: form the reflection matrix explicitly.
        let dim = self.target.total_dim();
        let mut matrix = vec![CZERO; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = Complex64::new(1.0, 0.0);
            for j in 0..dim {
                matrix[i * dim + j] -=
                    2.0 * self.target.amplitudes()[i] * self.target.amplitudes()[j].conj();
            }
        }
        state.apply_matrix(&matrix, targets)
    }

    fn queries(&self) -> u64 {
        self.counter.count()
    }
}

fn orthonormalize(candidate: &[Complex64], existing: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let mut v = candidate.to_vec();
    // Two rounds of modified Gram-Schmidt keep the completion orthonormal to
    // machine precision.
    for _ in 0..2 {
        for col in existing {
            let inner: Complex64 = col.iter().zip(&v).map(|(c, x)| c.conj() * x).sum();
            for (x, c) in v.iter_mut().zip(col) {
                *x -= inner * c;
            }
        }
    }
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-8 {
        return None;
    }
    for x in &mut v {
        *x /= norm;
    }
    Some(v)
}
