//! The layered synthesis circuit.
//!
//! A circuit of depth `d` on `n` qubits alternates `d + 1` layers of
//! single-qubit Euler rotations with `d` fixed source gates:
//!
//! ```text
//! U(theta) = L_0 · S_1 · L_1 · S_2 · ... · S_d · L_d
//! ```
//!
//! Matrix products read left to right, so `L_d` acts first in time and `L_0`
//! last. Each layer is `L_i = u_i1 ⊗ ... ⊗ u_in` with
//! `u_ij = exp(-i t0 X) exp(-i t1 Y) exp(-i t2 X)`.
//!
//! The cost is the average gate infidelity against a target. Because every
//! angle enters through `exp(-i theta sigma)` (no factor one half), the cost
//! is a trigonometric polynomial of period `pi` in each angle and its exact
//! derivative is `h(theta + pi/4) - h(theta - pi/4)`.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::channels::{agf_unitary, ptm};
use crate::dfe::{self, DfeMode, DfePlan};
use crate::error::{Error, Result};
use crate::gates::{pauli_rotation, pauli_x, pauli_y};
use crate::numkit::{kron_all, ComplexMatrix, RandomSource, C64, HERMITIAN_TOL, ZERO};

/// Parameter shift that makes the two-point difference exact.
pub const PARAMETER_SHIFT: f64 = FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitShape {
    pub n_qubits: usize,
    pub depth: usize,
}

impl CircuitShape {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 || depth == 0 {
            return Err(Error::InvalidInput(format!(
                "circuit shape needs n >= 1 and d >= 1, got n={n_qubits}, d={depth}"
            )));
        }
        Ok(Self { n_qubits, depth })
    }

    pub fn layers(&self) -> usize {
        self.depth + 1
    }

    pub fn param_count(&self) -> usize {
        3 * self.n_qubits * self.layers()
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Flat index of `theta[layer][qubit][axis]`.
    pub fn flat_index(&self, layer: usize, qubit: usize, axis: usize) -> usize {
        debug_assert!(layer < self.layers() && qubit < self.n_qubits && axis < 3);
        (layer * self.n_qubits + qubit) * 3 + axis
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn unflatten(&self, index: usize) -> (usize, usize, usize) {
        (index / (3 * self.n_qubits), (index / 3) % self.n_qubits, index % 3)
    }
}

/// Rotation angles `theta[i][j][k]` stored flat in layer, qubit, axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    shape: CircuitShape,
    theta: Vec<f64>,
}

impl CircuitParams {
    pub fn zeros(shape: CircuitShape) -> Self {
        Self {
            shape,
            theta: vec![0.0; shape.param_count()],
        }
    }

    pub fn from_vec(shape: CircuitShape, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != shape.param_count() {
            return Err(Error::DimensionMismatch {
                expected: shape.param_count(),
                actual: theta.len(),
            });
        }
        if let Some(bad) = theta.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("rotation angle {bad}")));
        }
        Ok(Self { shape, theta })
    }

    /// Every angle drawn uniformly from `[0, 2pi)`.
    pub fn random(shape: CircuitShape, rng: &mut RandomSource) -> Self {
        let theta = (0..shape.param_count()).map(|_| rng.uniform_range(0.0, TAU)).collect();
        Self { shape, theta }
    }

    pub fn shape(&self) -> CircuitShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.theta
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.theta
    }

    pub fn get(&self, layer: usize, qubit: usize, axis: usize) -> f64 {
        self.theta[self.shape.flat_index(layer, qubit, axis)]
    }

    pub fn set(&mut self, layer: usize, qubit: usize, axis: usize, value: f64) {
        let idx = self.shape.flat_index(layer, qubit, axis);
        self.theta[idx] = value;
    }

    fn euler_angles(&self, layer: usize, qubit: usize) -> [f64; 3] {
        let base = self.shape.flat_index(layer, qubit, 0);
        [self.theta[base], self.theta[base + 1], self.theta[base + 2]]
    }

    /// Copy with every angle reduced into `[0, 2pi)`.
    pub fn wrapped(&self) -> Self {
        Self {
            shape: self.shape,
            theta: self.theta.iter().map(|&x| wrap_angle(x)).collect(),
        }
    }
}

pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// The `d` fixed gates placed between rotation layers.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceGateSet {
    gates: Vec<ComplexMatrix>,
}

impl SourceGateSet {
    pub fn new(gates: Vec<ComplexMatrix>) -> Result<Self> {
        let first = gates
            .first()
            .ok_or_else(|| Error::InvalidInput("source gate set is empty".into()))?;
        let dim = first.dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidInput(format!("source dimension {dim} is not 2^n")));
        }
        for g in &gates {
            g.ensure_dim(dim)?;
            g.ensure_unitary()?;
        }
        Ok(Self { gates })
    }

    /// Same gate repeated `depth` times.
    pub fn repeated(gate: ComplexMatrix, depth: usize) -> Result<Self> {
        Self::new(vec![gate; depth])
    }

    pub fn gates(&self) -> &[ComplexMatrix] {
        &self.gates
    }

    pub fn depth(&self) -> usize {
        self.gates.len()
    }

    pub fn dim(&self) -> usize {
        self.gates[0].dim()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn shape(&self) -> CircuitShape {
        CircuitShape {
            n_qubits: self.n_qubits(),
            depth: self.depth(),
        }
    }
}

/// An input state and observable whose expectation `Tr[O U rho U†]` is measured.
#[derive(Debug, Clone)]
pub struct MeasurementSetting {
    pub rho: ComplexMatrix,
    pub observable: ComplexMatrix,
}

impl MeasurementSetting {
    pub fn new(rho: ComplexMatrix, observable: ComplexMatrix) -> Result<Self> {
        rho.ensure_dim(observable.dim())?;
        if !observable.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                deviation: observable.hermiticity_deviation(),
            });
        }
        if !rho.is_hermitian(1e-10) || (rho.trace().re - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput("input state must be a unit-trace density matrix".into()));
        }
        Ok(Self { rho, observable })
    }

    pub fn expectation(&self, u: &ComplexMatrix) -> Result<f64> {
        dfe::simulate_expectation(u, &self.rho, &self.observable, None, &mut RandomSource::new(0))
    }
}

/// `exp(-i t0 X) exp(-i t1 Y) exp(-i t2 X)`.
pub fn euler_gate(t0: f64, t1: f64, t2: f64) -> ComplexMatrix {
    let x = pauli_x();
    let rx0 = pauli_rotation(&x, t0);
    let ry = pauli_rotation(&pauli_y(), t1);
    let rx2 = pauli_rotation(&x, t2);
    &(&rx0 * &ry) * &rx2
}

/// `u_i1 ⊗ ... ⊗ u_in` for layer `i`.
pub fn layer_matrix(params: &CircuitParams, layer: usize) -> ComplexMatrix {
    let gates: Vec<ComplexMatrix> = (0..params.shape.n_qubits)
        .map(|q| {
            let [a, b, c] = params.euler_angles(layer, q);
            euler_gate(a, b, c)
        })
        .collect();
    kron_all(&gates)
}

fn check_shapes(params: &CircuitParams, sources: &SourceGateSet) -> Result<()> {
    if params.shape != sources.shape() {
        return Err(Error::InvalidInput(format!(
            "parameter shape {:?} does not match sources {:?}",
            params.shape,
            sources.shape()
        )));
    }
    Ok(())
}

type Mat2 = [[C64; 2]; 2];

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn mat2_dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// [`euler_gate`] as a plain 2x2 array.
fn euler_2x2([t0, t1, t2]: [f64; 3]) -> Mat2 {
    let rx = |t: f64| {
        let (s, c) = t.sin_cos();
        [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
    };
    let (s, c) = t1.sin_cos();
    let ry = [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]];
    mat2_mul(&mat2_mul(&rx(t0), &ry), &rx(t2))
}

fn layer_singles(params: &CircuitParams, layer: usize) -> Vec<Mat2> {
    (0..params.shape.n_qubits)
        .map(|q| euler_2x2(params.euler_angles(layer, q)))
        .collect()
}

fn times_layer(m: &ComplexMatrix, singles: &[Mat2]) -> ComplexMatrix {
    let mut out = m.clone();
    for (q, u) in singles.iter().enumerate() {
        out.apply_local_right(u, q);
    }
    out
}

fn layer_times(singles: &[Mat2], m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for (q, u) in singles.iter().enumerate() {
        out.apply_local_left(u, q);
    }
    out
}

pub fn build_circuit(params: &CircuitParams, sources: &SourceGateSet) -> Result<ComplexMatrix> {
    check_shapes(params, sources)?;
    let mut u = layer_times(&layer_singles(params, 0), &ComplexMatrix::identity(sources.dim()));
    for (i, s) in sources.gates().iter().enumerate() {
        u = times_layer(&(&u * s), &layer_singles(params, i + 1));
    }
    Ok(u)
}

/// Average gate infidelity between `target` and the circuit.
pub fn agi_cost(params: &CircuitParams, sources: &SourceGateSet, target: &ComplexMatrix) -> Result<f64> {
    let u = build_circuit(params, sources)?;
    target.ensure_dim(u.dim())?;
    Ok(1.0 - agf_unitary(target, &u)?)
}

fn agi_from_overlap(overlap_sq: f64, dim: f64) -> f64 {
    1.0 - (overlap_sq / dim + 1.0) / (dim + 1.0)
}

/// Cost and its parameter-shift gradient for the exact backend.
///
/// Writing `U = P_i L_i Q_i` around layer `i`, every overlap with a modified
/// layer is `Tr[F_i L_i^{-1} L_i']` where `F_i = Q_i T† P_i L_i`. A shifted
/// angle changes one single-qubit factor `u -> w`, so the shifted overlap is
/// `Tr[w R u†]` with `R` the reduction of `F_i` onto that qubit.
pub fn cost_and_parameter_shift_gradient(
    params: &CircuitParams,
    sources: &SourceGateSet,
    target: &ComplexMatrix,
) -> Result<(f64, Vec<f64>)> {
    check_shapes(params, sources)?;
    target.ensure_dim(sources.dim())?;
    let shape = params.shape;
    let dim = sources.dim();
    let depth = shape.depth;
    let singles: Vec<Vec<Mat2>> = (0..shape.layers()).map(|i| layer_singles(params, i)).collect();
    let src = sources.gates();

    // suffix[i] = S_{i+1} L_{i+1} ... S_d L_d
    let mut suffix = vec![ComplexMatrix::identity(dim); shape.layers()];
    for i in (0..depth).rev() {
        suffix[i] = &src[i] * &layer_times(&singles[i + 1], &suffix[i + 1]);
    }
    // left[i] = T† L_0 S_1 ... L_i
    let mut left = times_layer(&target.dagger(), &singles[0]);
    let mut envs = Vec::with_capacity(shape.layers());
    for i in 0..shape.layers() {
        if i > 0 {
            left = times_layer(&(&left * &src[i - 1]), &singles[i]);
        }
        envs.push(if i == depth { left.clone() } else { &suffix[i] * &left });
    }
    let cost = agi_from_overlap(envs[depth].trace().norm_sqr(), dim as f64);

    let mut grad = vec![0.0; shape.param_count()];
    for (i, env) in envs.iter().enumerate() {
        for q in 0..shape.n_qubits {
            let reduced = env.reduce_to_qubit(q);
            let x = mat2_mul(&reduced, &mat2_dagger(&singles[i][q]));
            let angles = params.euler_angles(i, q);
            let overlap_cost = |ang: [f64; 3]| {
                let w = euler_2x2(ang);
                let tr = w[0][0] * x[0][0] + w[0][1] * x[1][0] + w[1][0] * x[0][1] + w[1][1] * x[1][1];
                agi_from_overlap(tr.norm_sqr(), dim as f64)
            };
            for k in 0..3 {
                let mut plus = angles;
                plus[k] += PARAMETER_SHIFT;
                let mut minus = angles;
                minus[k] -= PARAMETER_SHIFT;
                grad[shape.flat_index(i, q, k)] = overlap_cost(plus) - overlap_cost(minus);
            }
        }
    }
    Ok((cost, grad))
}

/// Exact gradient of [`agi_cost`] from two shifted evaluations per angle.
pub fn parameter_shift_gradient(
    params: &CircuitParams,
    sources: &SourceGateSet,
    target: &ComplexMatrix,
) -> Result<Vec<f64>> {
    cost_and_parameter_shift_gradient(params, sources, target).map(|(_, g)| g)
}

/// How the cost is evaluated during optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostBackend {
    /// Closed-form trace overlap.
    #[default]
    Exact,
    /// Direct fidelity estimation over the target's nonzero Pauli transfer
    /// entries, from simulated expectation values with optional shot noise.
    Emulated { shots: Option<u64>, seed: u64 },
}

/// Cost `h(theta)` bound to a target and source set, evaluated by a backend.
pub struct AgiObjective {
    target: ComplexMatrix,
    sources: SourceGateSet,
    backend: CostBackend,
    emulator: Option<Emulator>,
}

struct Emulator {
    plan: DfePlan,
    shots: Option<u64>,
    rng: Mutex<RandomSource>,
}

impl AgiObjective {
    pub fn new(target: ComplexMatrix, sources: SourceGateSet, backend: CostBackend) -> Result<Self> {
        target.ensure_dim(sources.dim())?;
        let emulator = match backend {
            CostBackend::Exact => None,
            CostBackend::Emulated { shots, seed } => {
                let plan = dfe::dfe_plan(&ptm(&target)?, DfeMode::FullSupport)?;
                Some(Emulator {
                    plan,
                    shots,
                    rng: Mutex::new(RandomSource::new(seed)),
                })
            }
        };
        Ok(Self {
            target,
            sources,
            backend,
            emulator,
        })
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn sources(&self) -> &SourceGateSet {
        &self.sources
    }

    pub fn shape(&self) -> CircuitShape {
        self.sources.shape()
    }

    pub fn backend(&self) -> CostBackend {
        self.backend
    }

    pub fn cost(&self, params: &CircuitParams) -> Result<f64> {
        match &self.emulator {
            None => agi_cost(params, &self.sources, &self.target),
            Some(em) => {
                let u = build_circuit(params, &self.sources)?;
                let mut rng = em.rng.lock().expect("emulator rng poisoned");
                let f = dfe::dfe_estimate_with_plan(&u, &em.plan, em.shots, &mut rng)?;
                Ok(1.0 - f)
            }
        }
    }

    /// Cost plus gradient, both from the same backend.
    pub fn cost_and_gradient(&self, params: &CircuitParams) -> Result<(f64, Vec<f64>)> {
        if self.emulator.is_none() {
            return cost_and_parameter_shift_gradient(params, &self.sources, &self.target);
        }
        let cost = self.cost(params)?;
        let mut grad = vec![0.0; params.as_slice().len()];
        let mut shifted = params.clone();
        for (idx, g) in grad.iter_mut().enumerate() {
            let base = params.theta[idx];
            shifted.theta[idx] = base + PARAMETER_SHIFT;
            let plus = self.cost(&shifted)?;
            shifted.theta[idx] = base - PARAMETER_SHIFT;
            let minus = self.cost(&shifted)?;
            shifted.theta[idx] = base;
            *g = plus - minus;
        }
        Ok((cost, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::operator_schmidt;
    use crate::gates::{cnot, swap};
    use crate::numkit::{haar_unitary, C64, I};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn finite_difference(params: &CircuitParams, sources: &SourceGateSet, target: &ComplexMatrix) -> Vec<f64> {
        let step = 1e-6;
        (0..params.as_slice().len())
            .map(|idx| {
                let mut p = params.clone();
                p.theta[idx] += step;
                let plus = agi_cost(&p, sources, target).unwrap();
                p.theta[idx] -= 2.0 * step;
                let minus = agi_cost(&p, sources, target).unwrap();
                (plus - minus) / (2.0 * step)
            })
            .collect()
    }

    #[test]
    fn euler_gate_examples() {
        assert!(euler_gate(0.0, 0.0, 0.0).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!(euler_gate(FRAC_PI_2, 0.0, 0.0).max_abs_diff(&pauli_x().scale(-I)) < 1e-15);
        let (a, b) = (0.7, 2.1);
        assert!(euler_gate(a, 0.0, b).max_abs_diff(&euler_gate(a + b, 0.0, 0.0)) < 1e-14);
    }

    #[test]
    fn shape_counts() {
        let shape = CircuitShape::new(2, 3).unwrap();
        assert_eq!(shape.param_count(), 24);
        for idx in 0..24 {
            let (i, j, k) = shape.unflatten(idx);
            assert_eq!(shape.flat_index(i, j, k), idx);
        }
        assert!(CircuitShape::new(0, 1).is_err());
        assert!(CircuitShape::new(1, 0).is_err());
    }

    #[test]
    fn build_circuit_examples() {
        let shape = CircuitShape::new(2, 2).unwrap();
        let sources = SourceGateSet::repeated(ComplexMatrix::identity(4), 2).unwrap();
        let u = build_circuit(&CircuitParams::zeros(shape), &sources).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);

        let shape = CircuitShape::new(1, 1).unwrap();
        let params = CircuitParams::from_vec(shape, vec![0.3, 1.1, 2.0, 0.4, 5.0, 0.9]).unwrap();
        let sources = SourceGateSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let expected = &euler_gate(0.3, 1.1, 2.0) * &euler_gate(0.4, 5.0, 0.9);
        assert!(build_circuit(&params, &sources).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn build_circuit_ordering_puts_first_layer_last_in_time() {
        let mut rng = RandomSource::new(3);
        let shape = CircuitShape::new(2, 2).unwrap();
        let params = CircuitParams::random(shape, &mut rng);
        let s1 = haar_unitary(4, &mut rng);
        let s2 = haar_unitary(4, &mut rng);
        let sources = SourceGateSet::new(vec![s1.clone(), s2.clone()]).unwrap();
        let l: Vec<_> = (0..3).map(|i| layer_matrix(&params, i)).collect();
        let expected = &(&(&(&l[0] * &s1) * &l[1]) * &s2) * &l[2];
        assert!(build_circuit(&params, &sources).unwrap().max_abs_diff(&expected) < 1e-13);

        // the reversed-time convention equals ours with layers and sources reversed
        let reversed_layers: Vec<f64> = (0..3)
            .rev()
            .flat_map(|i| params.as_slice()[i * 6..(i + 1) * 6].to_vec())
            .collect();
        let reversed = CircuitParams::from_vec(shape, reversed_layers).unwrap();
        let reversed_sources = SourceGateSet::new(vec![s2.clone(), s1.clone()]).unwrap();
        let other_convention = &(&(&(&l[2] * &s2) * &l[1]) * &s1) * &l[0];
        assert!(
            build_circuit(&reversed, &reversed_sources)
                .unwrap()
                .max_abs_diff(&other_convention)
                < 1e-13
        );
    }

    #[test]
    fn build_circuit_rejects_mismatched_shapes() {
        let shape = CircuitShape::new(2, 1).unwrap();
        let sources = SourceGateSet::repeated(cnot(), 2).unwrap();
        assert!(build_circuit(&CircuitParams::zeros(shape), &sources).is_err());
        assert!(CircuitParams::from_vec(shape, vec![0.0; 3]).is_err());
    }

    #[test]
    fn source_set_validation() {
        assert!(SourceGateSet::new(vec![]).is_err());
        let not_unitary = ComplexMatrix::identity(4).scale_real(2.0);
        assert!(matches!(SourceGateSet::new(vec![not_unitary]), Err(Error::NotUnitary { .. })));
        assert!(SourceGateSet::new(vec![cnot(), ComplexMatrix::identity(2)]).is_err());
    }

    #[test]
    fn agi_cost_examples() {
        let shape = CircuitShape::new(2, 1).unwrap();
        let sources = SourceGateSet::new(vec![cnot()]).unwrap();
        let zero = CircuitParams::zeros(shape);
        assert!(agi_cost(&zero, &sources, &cnot()).unwrap().abs() < 1e-15);
        assert!((agi_cost(&zero, &sources, &swap()).unwrap() - 0.75).abs() < 1e-15);

        let mut rng = RandomSource::new(5);
        let params = CircuitParams::random(shape, &mut rng);
        let target = build_circuit(&params, &sources).unwrap();
        assert!(agi_cost(&params, &sources, &target).unwrap().abs() < 1e-14);
        assert!(agi_cost(&params, &sources, &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RandomSource::new(6);
        for _ in 0..10 {
            let shape = CircuitShape::new(2, 2).unwrap();
            let params = CircuitParams::random(shape, &mut rng);
            let sources = SourceGateSet::new(vec![haar_unitary(4, &mut rng), haar_unitary(4, &mut rng)]).unwrap();
            let target = haar_unitary(4, &mut rng);
            let ps = parameter_shift_gradient(&params, &sources, &target).unwrap();
            let fd = finite_difference(&params, &sources, &target);
            for (a, b) in ps.iter().zip(&fd) {
                assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn gradient_vanishes_at_exact_solution() {
        let shape = CircuitShape::new(2, 1).unwrap();
        let sources = SourceGateSet::new(vec![cnot()]).unwrap();
        let grad = parameter_shift_gradient(&CircuitParams::zeros(shape), &sources, &cnot()).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-8));
    }

    #[test]
    fn single_qubit_closed_form_derivative() {
        // h(x) = 1 - (2 sin^2 x + 1)/3 along theta_010, so h'(x) = -(2/3) sin 2x
        let shape = CircuitShape::new(1, 1).unwrap();
        let sources = SourceGateSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let target = pauli_x();
        for x in [0.0, 0.3, 1.0, 2.5, 4.0] {
            let mut params = CircuitParams::zeros(shape);
            params.set(0, 0, 0, x);
            let h = agi_cost(&params, &sources, &target).unwrap();
            assert!((h - (1.0 - (2.0 * x.sin().powi(2) + 1.0) / 3.0)).abs() < 1e-14);
            let g = parameter_shift_gradient(&params, &sources, &target).unwrap();
            assert!((g[0] + 2.0 / 3.0 * (2.0 * x).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn half_pi_shift_is_degenerate_for_full_angle_rotations() {
        // exp(-i theta sigma) has period pi in the channel, so a +-pi/2 shift sees the same cost
        let mut rng = RandomSource::new(8);
        let shape = CircuitShape::new(2, 1).unwrap();
        let params = CircuitParams::random(shape, &mut rng);
        let sources = SourceGateSet::new(vec![cnot()]).unwrap();
        let target = haar_unitary(4, &mut rng);
        for idx in 0..shape.param_count() {
            let mut p = params.clone();
            p.theta[idx] += FRAC_PI_2;
            let plus = agi_cost(&p, &sources, &target).unwrap();
            p.theta[idx] -= PI;
            let minus = agi_cost(&p, &sources, &target).unwrap();
            assert!((plus - minus).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_sources_give_product_operators() {
        let mut rng = RandomSource::new(9);
        let shape = CircuitShape::new(2, 3).unwrap();
        let sources = SourceGateSet::repeated(ComplexMatrix::identity(4), 3).unwrap();
        let u = build_circuit(&CircuitParams::random(shape, &mut rng), &sources).unwrap();
        let spectrum = operator_schmidt(&u).unwrap();
        assert!((spectrum.lambda[0] - 4.0).abs() < 1e-10);
        assert!(spectrum.lambda[1..].iter().all(|l| l.abs() < 1e-10));
    }

    #[test]
    fn emulated_backend_matches_exact() {
        let mut rng = RandomSource::new(10);
        let shape = CircuitShape::new(2, 2).unwrap();
        let params = CircuitParams::random(shape, &mut rng);
        let sources = SourceGateSet::repeated(cnot(), 2).unwrap();
        let exact = AgiObjective::new(cnot(), sources.clone(), CostBackend::Exact).unwrap();
        let emulated = AgiObjective::new(cnot(), sources, CostBackend::Emulated { shots: None, seed: 1 }).unwrap();
        let (c1, g1) = exact.cost_and_gradient(&params).unwrap();
        let (c2, g2) = emulated.cost_and_gradient(&params).unwrap();
        assert!((c1 - c2).abs() < 1e-10);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn measurement_setting_expectation() {
        let rho = ComplexMatrix::projector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let setting = MeasurementSetting::new(rho, crate::gates::pauli_z()).unwrap();
        assert!((setting.expectation(&pauli_x()).unwrap() + 1.0).abs() < 1e-15);
        assert!(MeasurementSetting::new(ComplexMatrix::identity(2), crate::gates::pauli_z()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cost_is_bounded_and_two_pi_periodic(seed in any::<u64>(), idx in 0usize..18, turns in -3i32..3) {
            let mut rng = RandomSource::new(seed);
            let shape = CircuitShape::new(2, 2).unwrap();
            let params = CircuitParams::random(shape, &mut rng);
            let sources = SourceGateSet::new(vec![haar_unitary(4, &mut rng), haar_unitary(4, &mut rng)]).unwrap();
            let target = haar_unitary(4, &mut rng);
            let h = agi_cost(&params, &sources, &target).unwrap();
            prop_assert!((-1e-15..=0.8 + 1e-15).contains(&h));
            let mut shifted = params.clone();
            shifted.theta[idx] += turns as f64 * TAU;
            prop_assert!((agi_cost(&shifted, &sources, &target).unwrap() - h).abs() < 1e-12);
            let wrapped = shifted.wrapped();
            prop_assert!(wrapped.as_slice().iter().all(|x| (0.0..TAU).contains(x)));
            prop_assert!((agi_cost(&wrapped, &sources, &target).unwrap() - h).abs() < 1e-12);
        }
    }
}
