//! Dense statevector over a product of labeled registers.
//!
//! A [`QuantumState`] stores one complex amplitude per basis state of a
//! register product `[d0, d1, ...]`, indexed row-major (register 0 is the
//! most significant digit). All operations are pure: they consume `&self`
//! and return a fresh state, so states can be shared freely across threads.
//! Every operation re-checks the unit norm and fails hard on drift beyond
//! [`NORM_TOL`].

use num_complex::Complex64;
use rand::Rng;

use crate::error::{QrsError, Result};

/// Tolerance for cumulative norm drift across operations.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance for freshly constructed objects (states, oracles, targets).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance applied to user-supplied vectors at validation boundaries.
pub const INPUT_TOL: f64 = 1e-9;

const CZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense unit-norm statevector over labeled registers.
#[derive(Debug, Clone)]
pub struct QuantumState {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// The all-zeros basis state `|0...0>` on the given registers.
    pub fn zero_basis(dims: &[usize]) -> Result<Self> {
        let total = checked_product(dims)?;
        let mut amps = vec![CZERO; total];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            dims: dims.to_vec(),
            amps,
        })
    }

    /// Builds a state from explicit amplitudes; requires unit norm within
    /// [`CONSTRUCTION_TOL`].
    pub fn from_amplitudes(dims: &[usize], amps: Vec<Complex64>) -> Result<Self> {
        let total = checked_product(dims)?;
        if amps.len() != total {
            return Err(QrsError::DimensionMismatch(format!(
                "amplitude array length {} does not match register product {total}",
                amps.len()
            )));
        }
        let state = QuantumState {
            dims: dims.to_vec(),
            amps,
        };
        state.check_norm(CONSTRUCTION_TOL)?;
        Ok(state)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hard error when the norm drifted further than `tol` from 1.
    pub fn check_norm(&self, tol: f64) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > tol {
            return Err(QrsError::Numerical(format!(
                "state norm {norm} drifted from 1 beyond tolerance {tol}"
            )));
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dims.len()];
        for r in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[r] = strides[r + 1] * self.dims[r + 1];
        }
        strides
    }

    fn check_register(&self, register: usize) -> Result<()> {
        if register >= self.dims.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "register {register} out of range for {} registers",
                self.dims.len()
            )));
        }
        Ok(())
    }

    /// Applies a dense matrix (row-major, square over the product of the
    /// target register dimensions) to the selected registers, in the order
    /// given. The remaining registers are untouched.
    pub fn apply_matrix(&self, matrix: &[Complex64], targets: &[usize]) -> Result<Self> {
        for &t in targets {
            self.check_register(t)?;
        }
        let mut seen = vec![false; self.dims.len()];
        for &t in targets {
            if seen[t] {
                return Err(QrsError::DimensionMismatch(format!(
                    "register {t} selected twice"
                )));
            }
            seen[t] = true;
        }
        let tdim: usize = targets.iter().map(|&t| self.dims[t]).product();
        if matrix.len() != tdim * tdim {
            return Err(QrsError::DimensionMismatch(format!(
                "matrix has {} entries, expected {}x{}",
                matrix.len(),
                tdim,
                tdim
            )));
        }
        let strides = self.strides();

        // Global offset of each target-register digit combination.
        let mut offsets = vec![0usize; tdim];
        for (a, offset) in offsets.iter_mut().enumerate() {
            let mut rem = a;
            for &t in targets.iter().rev() {
                *offset += (rem % self.dims[t]) * strides[t];
                rem /= self.dims[t];
            }
        }

        let others: Vec<usize> = (0..self.dims.len()).filter(|r| !seen[*r]).collect();
        let mut amps = self.amps.clone();
        let mut odometer = vec![0usize; others.len()];
        let mut fiber = vec![CZERO; tdim];
        loop {
            let base: usize = odometer
                .iter()
                .zip(&others)
                .map(|(&digit, &r)| digit * strides[r])
                .sum();
            for (a, slot) in fiber.iter_mut().enumerate() {
                *slot = self.amps[base + offsets[a]];
            }
            for i in 0..tdim {
                let row = &matrix[i * tdim..(i + 1) * tdim];
                let mut acc = CZERO;
                for (m, x) in row.iter().zip(&fiber) {
                    acc += m * x;
                }
                amps[base + offsets[i]] = acc;
            }
            if !advance(&mut odometer, &others, &self.dims) {
                break;
            }
        }
        let out = QuantumState {
            dims: self.dims.clone(),
            amps,
        };
        out.check_norm(NORM_TOL)?;
        Ok(out)
    }

    /// Exact Born distribution of outcomes on one register.
    pub fn register_distribution(&self, register: usize) -> Result<Vec<f64>> {
        self.check_register(register)?;
        let strides = self.strides();
        let dim = self.dims[register];
        let stride = strides[register];
        let mut dist = vec![0.0; dim];
        for (idx, amp) in self.amps.iter().enumerate() {
            dist[(idx / stride) % dim] += amp.norm_sqr();
        }
        Ok(dist)
    }

    /// Projects one register onto a basis outcome and renormalizes.
    /// Returns the post-measurement state and the exact outcome probability.
    pub fn project_register(&self, register: usize, outcome: usize) -> Result<(Self, f64)> {
        self.check_register(register)?;
        if outcome >= self.dims[register] {
            return Err(QrsError::DimensionMismatch(format!(
                "outcome {outcome} out of range for register of dimension {}",
                self.dims[register]
            )));
        }
        let strides = self.strides();
        let stride = strides[register];
        let dim = self.dims[register];
        let mut probability = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            if (idx / stride) % dim == outcome {
                probability += amp.norm_sqr();
            }
        }
        if probability < 1e-14 {
            return Err(QrsError::Numerical(format!(
                "projection onto outcome {outcome} has degenerate norm {probability}"
            )));
        }
        let scale = 1.0 / probability.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, amp)| {
                if (idx / stride) % dim == outcome {
                    amp * scale
                } else {
                    CZERO
                }
            })
            .collect();
        let state = QuantumState {
            dims: self.dims.clone(),
            amps,
        };
        state.check_norm(NORM_TOL)?;
        Ok((state, probability))
    }

    /// Samples a projective measurement of one register from the Born rule.
    ///
    /// The returned probability is the exact amplitude-derived probability of
    /// the sampled outcome, not an empirical estimate.
    pub fn measure_register<R: Rng>(
        &self,
        register: usize,
        rng: &mut R,
    ) -> Result<(usize, Self, f64)> {
        let dist = self.register_distribution(register)?;
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(QrsError::Numerical(format!(
                "measurement distribution sums to {total}"
            )));
        }
        let draw: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = dist.len() - 1;
        for (k, &p) in dist.iter().enumerate() {
            acc += p;
            if draw < acc && p > 0.0 {
                outcome = k;
                break;
            }
        }
        // Guard against landing on a zero-probability tail bin through
        // floating-point accumulation.
        if dist[outcome] <= 0.0 {
            outcome = dist
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap();
        }
        let (post, probability) = self.project_register(register, outcome)?;
        Ok((outcome, post, probability))
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &QuantumState) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(QrsError::DimensionMismatch(format!(
                "overlap between register shapes {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Pauli Z on the coin register (the last register, which must have
    /// dimension 2): amplitudes with coin = 1 are negated. Costs no queries.
    pub fn reflect_coin_z(&self) -> Result<Self> {
        let last = self
            .dims
            .len()
            .checked_sub(1)
            .ok_or_else(|| QrsError::DimensionMismatch("state has no registers".into()))?;
        if self.dims[last] != 2 {
            return Err(QrsError::DimensionMismatch(format!(
                "coin register must have dimension 2, found {}",
                self.dims[last]
            )));
        }
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, amp)| if idx % 2 == 1 { -amp } else { *amp })
            .collect();
        Ok(QuantumState {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Tensor-power Hadamard on a register whose dimension is a power of two.
    /// Self-inverse.
    pub fn hadamard_register(&self, register: usize) -> Result<Self> {
        self.check_register(register)?;
        let dim = self.dims[register];
        if !dim.is_power_of_two() {
            return Err(QrsError::DimensionMismatch(format!(
                "Hadamard register dimension {dim} is not a power of two"
            )));
        }
        let strides = self.strides();
        let stride = strides[register];
        let mut amps = self.amps.clone();
        // In-place butterfly on every fiber along the register axis.
        let outer = self.amps.len() / (dim * stride);
        let scale = 1.0 / (dim as f64).sqrt();
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * dim * stride + inner;
                let mut half = 1;
                while half < dim {
                    let mut k = 0;
                    while k < dim {
                        for j in k..k + half {
                            let x = amps[base + j * stride];
                            let y = amps[base + (j + half) * stride];
                            amps[base + j * stride] = x + y;
                            amps[base + (j + half) * stride] = x - y;
                        }
                        k += 2 * half;
                    }
                    half *= 2;
                }
                for j in 0..dim {
                    amps[base + j * stride] *= scale;
                }
            }
        }
        let out = QuantumState {
            dims: self.dims.clone(),
            amps,
        };
        out.check_norm(NORM_TOL)?;
        Ok(out)
    }

    /// Appends a fresh register prepared in `|0>` as the new last register.
    pub fn append_zero_register(&self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QrsError::DimensionMismatch(
                "register of dimension 0".into(),
            ));
        }
        let mut dims = self.dims.clone();
        dims.push(dim);
        let mut amps = vec![CZERO; self.amps.len() * dim];
        for (idx, amp) in self.amps.iter().enumerate() {
            amps[idx * dim] = *amp;
        }
        Ok(QuantumState { dims, amps })
    }

    /// Flips the sign of a single basis amplitude (global index).
    pub fn phase_flip_basis(&self, global_index: usize) -> Result<Self> {
        if global_index >= self.amps.len() {
            return Err(QrsError::DimensionMismatch(format!(
                "basis index {global_index} out of range"
            )));
        }
        let mut amps = self.amps.clone();
        amps[global_index] = -amps[global_index];
        Ok(QuantumState {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Multiplies every amplitude by a scalar of unit magnitude.
    pub fn scale_phase(&self, phase: Complex64) -> Result<Self> {
        if (phase.norm() - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(QrsError::Validation(format!(
                "phase factor must have unit magnitude, got {}",
                phase.norm()
            )));
        }
        let amps = self.amps.iter().map(|a| a * phase).collect();
        Ok(QuantumState {
            dims: self.dims.clone(),
            amps,
        })
    }
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(QrsError::DimensionMismatch(
            "register dimensions must be positive".into(),
        ));
    }
    dims.iter().try_fold(1usize, |acc, &d| {
        acc.checked_mul(d)
            .ok_or_else(|| QrsError::DimensionMismatch("state dimension overflow".into()))
    })
}

fn advance(odometer: &mut [usize], registers: &[usize], dims: &[usize]) -> bool {
    for pos in (0..odometer.len()).rev() {
        odometer[pos] += 1;
        if odometer[pos] < dims[registers[pos]] {
            return true;
        }
        odometer[pos] = 0;
    }
    false
}

/// Conjugate transpose of a square row-major matrix.
pub fn dagger(matrix: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![CZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = matrix[i * dim + j].conj();
        }
    }
    out
}

/// Max-norm deviation of `U† U` from the identity.
pub fn unitarity_defect(matrix: &[Complex64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = CZERO;
            for k in 0..dim {
                acc += matrix[k * dim + i].conj() * matrix[k * dim + j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(expect, 0.0)).norm());
        }
    }
    worst
}
