//! Instance file schemas and their translation into core objects.

use num_complex::Complex64;
use serde::Deserialize;

use qrs_core::hiddenshift::BooleanFunction;
use qrs_core::linear::QleInstance;
use qrs_core::metropolis::QmmInstance;
use qrs_core::{AmplitudeVector, HiddenStates, RatioVector};

use crate::CliError;

/// `{"pi": [...], "sigma": [...], "p": x}`
#[derive(Debug, Deserialize)]
pub struct WaterfillInstance {
    pub pi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p: f64,
}

impl WaterfillInstance {
    pub fn vectors(&self) -> Result<(AmplitudeVector, AmplitudeVector), CliError> {
        let pi = AmplitudeVector::unit(self.pi.clone()).map_err(CliError::input)?;
        let sigma = AmplitudeVector::unit(self.sigma.clone()).map_err(CliError::input)?;
        Ok((pi, sigma))
    }
}

/// `{"pi": [...], "sigma": [...], "p": x, "d": 2, "xi_seed": 7}`
/// The hidden states are drawn from `xi_seed` (default: the run seed).
#[derive(Debug, Deserialize)]
pub struct QrsInstance {
    pub pi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub p: f64,
    #[serde(default = "default_hidden_dim")]
    pub d: usize,
    pub xi_seed: Option<u64>,
}

fn default_hidden_dim() -> usize {
    1
}

impl QrsInstance {
    pub fn build(
        &self,
        seed: u64,
    ) -> Result<(AmplitudeVector, AmplitudeVector, HiddenStates), CliError> {
        use rand::SeedableRng;
        if self.d == 0 || self.d > 8 {
            return Err(CliError::Input(format!(
                "hidden dimension {} outside 1..=8",
                self.d
            )));
        }
        let pi = AmplitudeVector::unit(self.pi.clone()).map_err(CliError::input)?;
        let sigma = AmplitudeVector::unit(self.sigma.clone()).map_err(CliError::input)?;
        if pi.len() != sigma.len() {
            return Err(CliError::Input("pi and sigma lengths differ".into()));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.xi_seed.unwrap_or(seed));
        let xi = if self.d == 1 {
            HiddenStates::random_phases(pi.len(), &mut rng)
        } else {
            HiddenStates::random(pi.len(), self.d, &mut rng)
        }
        .map_err(CliError::input)?;
        Ok((pi, sigma, xi))
    }
}

/// `{"tau": [...], "alpha": x, "trials": N, "seed": s, "pi": [...], "d": 1}`
/// `pi` is the hidden initial amplitude vector of the simulated instance; it
/// is drawn from the seed when omitted (the conversion algorithm itself never
/// reads it).
#[derive(Debug, Deserialize)]
pub struct SqrsInstance {
    pub tau: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub pi: Option<Vec<f64>>,
    #[serde(default = "default_hidden_dim")]
    pub d: usize,
}

fn default_alpha() -> f64 {
    1.0
}

impl SqrsInstance {
    pub fn build(
        &self,
        seed: u64,
    ) -> Result<(RatioVector, AmplitudeVector, HiddenStates), CliError> {
        use rand::{Rng, SeedableRng};
        let tau = RatioVector::new(self.tau.clone()).map_err(CliError::input)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5151);
        let pi = match &self.pi {
            Some(entries) => AmplitudeVector::unit(entries.clone()).map_err(CliError::input)?,
            None => AmplitudeVector::normalized(
                (0..tau.len()).map(|_| rng.gen::<f64>() + 0.05).collect(),
            )
            .map_err(CliError::input)?,
        };
        if pi.len() != tau.len() {
            return Err(CliError::Input("pi and tau lengths differ".into()));
        }
        let xi = if self.d == 1 {
            HiddenStates::random_phases(pi.len(), &mut rng)
        } else {
            HiddenStates::random(pi.len(), self.d, &mut rng)
        }
        .map_err(CliError::input)?;
        Ok((tau, pi, xi))
    }
}

/// `{"lambda": [...], "b": [...], "kappa": x, "kappa_tilde": y}`
#[derive(Debug, Deserialize)]
pub struct QleInstanceFile {
    pub lambda: Vec<f64>,
    pub b: Vec<f64>,
    pub kappa: f64,
    pub kappa_tilde: f64,
}

impl QleInstanceFile {
    pub fn build(&self) -> Result<QleInstance, CliError> {
        QleInstance::diagonal(self.lambda.clone(), self.b.clone(), self.kappa)
            .map_err(CliError::input)
    }
}

/// `{"E": [...], "beta": x, "gates": seed | [matrices], "start": i, "steps": N}`
/// Explicit gates are row-major complex matrices written as `[re, im]` pairs.
#[derive(Debug, Deserialize)]
pub struct QmmInstanceFile {
    #[serde(rename = "E")]
    pub energies: Vec<f64>,
    pub beta: f64,
    pub gates: GateSpec,
    pub start: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_steps() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum GateSpec {
    Seed(u64),
    Matrices(Vec<Vec<[f64; 2]>>),
}

impl QmmInstanceFile {
    pub fn build(&self) -> Result<QmmInstance, CliError> {
        match &self.gates {
            GateSpec::Seed(seed) => {
                QmmInstance::with_random_gates(self.energies.clone(), self.beta, 2, *seed)
                    .map_err(CliError::input)
            }
            GateSpec::Matrices(raw) => {
                let d = self.energies.len();
                let gates = raw
                    .iter()
                    .map(|g| g.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
                    .collect();
                let basis = (0..d)
                    .map(|j| {
                        (0..d)
                            .map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                            .collect()
                    })
                    .collect();
                QmmInstance::new(self.energies.clone(), basis, gates, self.beta)
                    .map_err(CliError::input)
            }
        }
    }
}

/// Function files: first line the bit count `n`, second line either `2^n`
/// bits or `2^n / 4` hex digits, most significant bit first.
pub fn parse_function_file(text: &str) -> Result<BooleanFunction, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: u32 = lines
        .next()
        .ok_or_else(|| CliError::Input("empty function file".into()))?
        .trim()
        .parse()
        .map_err(|e| CliError::Input(format!("bad bit count: {e}")))?;
    let table = lines
        .next()
        .ok_or_else(|| CliError::Input("missing truth table line".into()))?;
    BooleanFunction::from_text(n, table).map_err(CliError::input)
}
