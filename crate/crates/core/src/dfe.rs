//! Direct fidelity estimation.
//!
//! The fidelity between an implemented unitary and a target is estimated from
//! Pauli transfer matrix entries `R_ij` of the implementation, each obtained
//! by preparing the eigenstates of Pauli `j`, evolving, and measuring Pauli
//! `i`. Entries are weighted by the target's own transfer matrix, so only the
//! target's support needs measuring.
//!
//! Note on naming: the failure probability and accuracy of the sampled
//! estimator are `eps_fail` and `delta_acc`; they are unrelated to the
//! crosstalk amplitude and detuning in [`crate::devices`].

use std::f64::consts::FRAC_1_SQRT_2;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::channels::{PauliLabel, PauliLetter, PauliTransferMatrix, SparsePauli};
use crate::error::{Error, Result};
use crate::numkit::{ComplexMatrix, RandomSource, C64, HERMITIAN_TOL, I, ONE, ZERO};

/// Target entries below this magnitude are treated as zero.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfeMode {
    /// Measure every entry where the target transfer matrix is nonzero.
    FullSupport,
    /// Draw entries at random with probability `R_ij^2 / D^2`.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfeEntry {
    pub i: PauliLabel,
    pub j: PauliLabel,
    pub target_value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfePlan {
    pub n_qubits: usize,
    pub mode: DfeMode,
    pub entries: Vec<DfeEntry>,
}

impl DfePlan {
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfeSamplingConfig {
    /// Probability that the estimate misses by more than `delta_acc`.
    pub eps_fail: f64,
    /// Target accuracy of the fidelity estimate.
    pub delta_acc: f64,
    /// Shots per prepared eigenstate; `None` uses exact expectation values.
    pub shots_per_setting: Option<u64>,
}

impl DfeSamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_fail > 0.0 && self.eps_fail < 1.0) {
            return Err(Error::InvalidInput(format!("eps_fail must lie in (0,1), got {}", self.eps_fail)));
        }
        if !(self.delta_acc > 0.0 && self.delta_acc.is_finite()) {
            return Err(Error::InvalidInput(format!("delta_acc must be positive, got {}", self.delta_acc)));
        }
        if self.shots_per_setting == Some(0) {
            return Err(Error::InvalidInput("shots_per_setting must be positive".into()));
        }
        Ok(())
    }

    /// Number of sampled settings. Each sampled ratio lies in `[-1, 1]` for
    /// normalized entries, so Chebyshev gives `P(|err| >= delta) <= 1/(l delta^2)`.
    pub fn sample_count(&self) -> usize {
        (1.0 / (self.delta_acc * self.delta_acc * self.eps_fail)).ceil() as usize
    }
}

/// Audit record of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfeEstimate {
    pub fidelity: f64,
    pub mode: DfeMode,
    pub settings_measured: usize,
}

fn single_qubit_eigenpairs(letter: PauliLetter) -> [([C64; 2], f64); 2] {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    match letter {
        PauliLetter::I => [([ONE, ZERO], 1.0), ([ZERO, ONE], 1.0)],
        PauliLetter::Z => [([ONE, ZERO], 1.0), ([ZERO, ONE], -1.0)],
        PauliLetter::X => [([s, s], 1.0), ([s, -s], -1.0)],
        PauliLetter::Y => [([s, s * I], 1.0), ([s, -s * I], -1.0)],
    }
}

/// Product eigenstates of a Pauli string with their eigenvalues.
///
/// Identity letters use the computational basis and contribute a factor +1.
/// Eigenstate `k` takes its bit for qubit `q` from bit `n-1-q` of `k`.
pub fn pauli_eigenbasis(label: &PauliLabel) -> Vec<(Vec<C64>, f64)> {
    let n = label.n_qubits();
    let pairs: Vec<_> = label.letters().iter().map(|&l| single_qubit_eigenpairs(l)).collect();
    (0..1usize << n)
        .map(|k| {
            let mut state = vec![ONE];
            let mut eigenvalue = 1.0;
            for (q, pair) in pairs.iter().enumerate() {
                let (vec, lambda) = pair[(k >> (n - 1 - q)) & 1];
                state = state.iter().flat_map(|a| vec.iter().map(move |b| a * b)).collect();
                eigenvalue *= lambda;
            }
            (state, eigenvalue)
        })
        .collect()
}

fn is_pauli_observable(obs: &ComplexMatrix) -> bool {
    obs.is_hermitian(1e-10) && (obs * obs).max_abs_diff(&ComplexMatrix::identity(obs.dim())) < 1e-10
}

/// Mean of `shots` outcomes in {+1, -1} with `P(+1) = (1 + expectation) / 2`.
fn sample_pm_one(expectation: f64, shots: u64, rng: &mut RandomSource) -> f64 {
    let p = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(shots, p).expect("valid binomial").sample(rng.rng_mut());
    (2.0 * ups as f64 - shots as f64) / shots as f64
}

/// `Tr[obs u rho u†]`, exactly or as the mean of `shots` single-shot outcomes.
pub fn simulate_expectation(
    u: &ComplexMatrix,
    rho: &ComplexMatrix,
    obs: &ComplexMatrix,
    shots: Option<u64>,
    rng: &mut RandomSource,
) -> Result<f64> {
    u.ensure_dim(rho.dim())?;
    u.ensure_dim(obs.dim())?;
    if !obs.is_hermitian(HERMITIAN_TOL.max(1e-10)) {
        return Err(Error::NotHermitian {
            deviation: obs.hermiticity_deviation(),
        });
    }
    let evolved = &(u * rho) * &u.dagger();
    let exact = obs.trace_of_product(&evolved).re;
    match shots {
        None => Ok(exact),
        Some(0) => Err(Error::InvalidInput("shot count must be positive".into())),
        Some(m) => {
            if !is_pauli_observable(obs) {
                return Err(Error::Unsupported(
                    "finite-shot sampling needs an observable with eigenvalues +-1".into(),
                ));
            }
            Ok(sample_pm_one(exact, m, rng))
        }
    }
}

fn pure_expectation(u: &ComplexMatrix, psi: &[C64], obs: &SparsePauli) -> f64 {
    let phi = u.apply(psi);
    let mut acc = ZERO;
    for (r, &v) in obs.values.iter().enumerate() {
        acc += phi[r].conj() * v * phi[r ^ obs.mask];
    }
    acc.re
}

/// Measured transfer-matrix entry `R_ij = (1/D) sum_k lambda_jk Tr[s_i u |psi_jk><psi_jk| u†]`.
pub fn ptm_entry_measured(
    u: &ComplexMatrix,
    i: &PauliLabel,
    j: &PauliLabel,
    shots: Option<u64>,
    rng: &mut RandomSource,
) -> Result<f64> {
    let dim = u.dim();
    if i.n_qubits() != j.n_qubits() || 1usize << i.n_qubits() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: 1 << i.n_qubits(),
        });
    }
    if shots == Some(0) {
        return Err(Error::InvalidInput("shot count must be positive".into()));
    }
    let observable = i.sparse();
    let mut acc = 0.0;
    for (psi, lambda) in pauli_eigenbasis(j) {
        let exact = pure_expectation(u, &psi, &observable);
        let value = match shots {
            None => exact,
            Some(m) => sample_pm_one(exact, m, rng),
        };
        acc += lambda * value;
    }
    Ok(acc / dim as f64)
}

/// Measurement plan from the target's transfer matrix.
pub fn dfe_plan(r_target: &PauliTransferMatrix, mode: DfeMode) -> Result<DfePlan> {
    let n = r_target.n_qubits();
    let d = r_target.hilbert_dim() as f64;
    let size = r_target.size();
    let mut entries = Vec::new();
    for i in 0..size {
        for j in 0..size {
            let value = r_target.get(i, j);
            if value.abs() > SUPPORT_TOL {
                entries.push(DfeEntry {
                    i: PauliLabel::from_index(i, n),
                    j: PauliLabel::from_index(j, n),
                    target_value: value,
                    weight: value * value / (d * d),
                });
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidInput("target transfer matrix has no support".into()));
    }
    Ok(DfePlan {
        n_qubits: n,
        mode,
        entries,
    })
}

/// Fidelity estimate `(D sum P_ij [R^_ij / R_ij] + 1) / (D + 1)`.
///
/// Full-support plans measure every entry (exactly when `cfg` is `None`,
/// otherwise with `cfg.shots_per_setting`). Sampled plans need `cfg` and draw
/// [`DfeSamplingConfig::sample_count`] entries with replacement.
pub fn dfe_estimate(
    u_actual: &ComplexMatrix,
    r_target: &PauliTransferMatrix,
    plan: &DfePlan,
    cfg: Option<&DfeSamplingConfig>,
    rng: &mut RandomSource,
) -> Result<DfeEstimate> {
    if r_target.n_qubits() != plan.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: plan.hilbert_dim(),
            actual: r_target.hilbert_dim(),
        });
    }
    u_actual.ensure_dim(plan.hilbert_dim())?;
    if let Some(c) = cfg {
        c.validate()?;
    }
    let shots = cfg.and_then(|c| c.shots_per_setting);
    let d = plan.hilbert_dim() as f64;
    let ratio = |entry: &DfeEntry, rng: &mut RandomSource| -> Result<f64> {
        let target = r_target.get(entry.i.index(), entry.j.index());
        if target.abs() <= SUPPORT_TOL {
            return Err(Error::InvalidInput(format!(
                "plan entry ({}, {}) has vanishing target value",
                entry.i, entry.j
            )));
        }
        Ok(ptm_entry_measured(u_actual, &entry.i, &entry.j, shots, rng)? / target)
    };
    let (weighted_mean, settings) = match plan.mode {
        DfeMode::FullSupport => {
            let mut acc = 0.0;
            for entry in &plan.entries {
                acc += entry.weight * ratio(entry, rng)?;
            }
            (acc, plan.entries.len())
        }
        DfeMode::Sampled => {
            let c = cfg.ok_or_else(|| Error::InvalidInput("sampled estimation needs a sampling config".into()))?;
            let cumulative: Vec<f64> = plan
                .entries
                .iter()
                .scan(0.0, |acc, e| {
                    *acc += e.weight;
                    Some(*acc)
                })
                .collect();
            let total = *cumulative.last().expect("plan is non-empty");
            let count = c.sample_count();
            let mut acc = 0.0;
            for _ in 0..count {
                let x = rng.uniform() * total;
                let pick = cumulative.partition_point(|&c| c <= x).min(plan.entries.len() - 1);
                acc += ratio(&plan.entries[pick], rng)?;
            }
            (acc / count as f64, count)
        }
    };
    Ok(DfeEstimate {
        fidelity: (d * weighted_mean + 1.0) / (d + 1.0),
        mode: plan.mode,
        settings_measured: settings,
    })
}

/// Full-support estimate used by the emulated cost backend.
pub(crate) fn dfe_estimate_with_plan(
    u_actual: &ComplexMatrix,
    plan: &DfePlan,
    shots: Option<u64>,
    rng: &mut RandomSource,
) -> Result<f64> {
    let d = plan.hilbert_dim() as f64;
    let mut acc = 0.0;
    for entry in &plan.entries {
        let measured = ptm_entry_measured(u_actual, &entry.i, &entry.j, shots, rng)?;
        acc += entry.weight * measured / entry.target_value;
    }
    Ok((d * acc + 1.0) / (d + 1.0))
}
