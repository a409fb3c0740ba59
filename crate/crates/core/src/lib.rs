//! Variational synthesis of multi-qubit gates from imperfect entangling
//! "source" gates interleaved with tunable single-qubit rotations.
//!
//! The crate is organized bottom-up:
//!
//! - [`numkit`]: dense complex matrices, Hermitian exponentials, Haar sampling
//! - [`channels`]: Pauli algebra, average gate fidelity, Pauli transfer matrices
//! - [`ansatz`]: the layered Euler-rotation circuit, its cost and parameter-shift gradient
//! - [`devices`]: cross-resonance Hamiltonians and the gates they generate
//! - [`dfe`]: direct fidelity estimation from simulated measurements
//! - [`optimkit`]: L-BFGS, bounded Nelder-Mead and the synthesis drivers
//! - [`analysis`]: Cartan coordinates, operator Schmidt spectrum, entangling power

pub mod analysis;
pub mod ansatz;
pub mod channels;
pub mod devices;
pub mod dfe;
pub mod error;
pub mod gates;
pub mod numkit;
pub mod optimkit;

pub use ansatz::{CircuitParams, CircuitShape, CostBackend, SourceGateSet};
pub use channels::{PauliLabel, PauliTransferMatrix};
pub use error::{Error, Result};
pub use numkit::{ComplexMatrix, RandomSource, C64};
pub use optimkit::{OptimizationResult, OptimizerConfig};

/// Formats a float with 17 significant digits, the precision used by every
/// CSV and report written by this workspace.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}
