//! Fixed benchmark workloads shared by the criterion benches.

use vqgo_core::devices::{fixtures, four_cr_hamiltonian, syndrome_target};
use vqgo_core::gates::cnot;
use vqgo_core::numkit::{haar_special_unitary, RandomSource};
use vqgo_core::{CircuitParams, ComplexMatrix, SourceGateSet};

/// Target, sources and angles of one gradient evaluation.
pub struct GradientCase {
    pub target: ComplexMatrix,
    pub sources: SourceGateSet,
    pub params: CircuitParams,
}

/// Two qubits, three CNOT sources, random target and angles.
pub fn two_qubit_case(seed: u64) -> GradientCase {
    let mut rng = RandomSource::new(seed);
    let target = haar_special_unitary(4, &mut rng);
    let sources = SourceGateSet::repeated(cnot(), 3).expect("cnot is unitary");
    let params = CircuitParams::random(sources.shape(), &mut rng);
    GradientCase { target, sources, params }
}

/// Five qubits, two four-pair drive layers at the bundled device parameters.
pub fn syndrome_case(seed: u64) -> GradientCase {
    let dev = fixtures::four_qubit_table().device();
    let g = vqgo_core::devices::four_cr_gate(&dev, &[90.0, 80.0, 100.0, 110.0], 75.0).expect("valid drive");
    let sources = SourceGateSet::repeated(g, 2).expect("drive is unitary");
    let params = CircuitParams::random(sources.shape(), &mut RandomSource::new(seed));
    GradientCase {
        target: syndrome_target(),
        sources,
        params,
    }
}

/// Five-qubit drive Hamiltonian in MHz units.
pub fn syndrome_hamiltonian() -> ComplexMatrix {
    four_cr_hamiltonian(&fixtures::four_qubit_table().device(), &[90.0, 80.0, 100.0, 110.0])
}
