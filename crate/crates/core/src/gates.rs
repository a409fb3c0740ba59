//! Fixed gates and operator helpers used throughout the crate.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::numkit::{kron_all, ComplexMatrix, C64, I, ONE, ZERO};

pub fn identity(n_qubits: usize) -> ComplexMatrix {
    ComplexMatrix::identity(1 << n_qubits)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, -ONE]])
}

/// Raising operator `|1><0|` (|1> is the excited state).
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, ZERO], [ONE, ZERO]])
}

/// Lowering operator `|0><1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]])
}

pub fn hadamard() -> ComplexMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[[h, h], [h, -h]])
}

pub fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[ONE, ZERO], [ZERO, I]])
}

/// CNOT with qubit 1 (left factor) as control.
pub fn cnot() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// `exp(-i angle sigma)` for a single-qubit Pauli `sigma`.
pub fn pauli_rotation(sigma: &ComplexMatrix, angle: f64) -> ComplexMatrix {
    let c = C64::new(angle.cos(), 0.0);
    let s = C64::new(0.0, -angle.sin());
    &ComplexMatrix::identity(sigma.dim()).scale(c) + &sigma.scale(s)
}

/// Embeds a single-qubit operator acting on `qubit` of an `n`-qubit register.
pub fn embed(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
    assert!(qubit < n, "qubit index out of range");
    assert_eq!(op.dim(), 2, "embed expects a single-qubit operator");
    let id = ComplexMatrix::identity(2);
    let factors: Vec<&ComplexMatrix> = (0..n).map(|k| if k == qubit { op } else { &id }).collect();
    kron_all(factors)
}

/// Product of two single-qubit operators placed on `qa` and `qb`.
pub fn embed_pair(a: &ComplexMatrix, qa: usize, b: &ComplexMatrix, qb: usize, n: usize) -> ComplexMatrix {
    assert_ne!(qa, qb);
    &embed(a, qa, n) * &embed(b, qb, n)
}

/// CNOT between arbitrary qubits of an `n`-qubit register, built as a
/// permutation of computational basis states.
pub fn cnot_on(control: usize, target: usize, n: usize) -> ComplexMatrix {
    assert!(control < n && target < n && control != target);
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    ComplexMatrix::from_fn(dim, |r, c| {
        let image = if c & bit(control) != 0 { c ^ bit(target) } else { c };
        if r == image {
            ONE
        } else {
            ZERO
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnot_on_matches_fixed_cnot() {
        assert_eq!(cnot_on(0, 1, 2), cnot());
        let reversed = &(&kron_all([&hadamard(), &hadamard()]) * &cnot()) * &kron_all([&hadamard(), &hadamard()]);
        assert!(cnot_on(1, 0, 2).max_abs_diff(&reversed) < 1e-14);
    }

    #[test]
    fn ladder_operators() {
        let n = &sigma_plus() * &sigma_minus();
        assert_eq!(n, ComplexMatrix::from_rows(&[[ZERO, ZERO], [ZERO, ONE]]));
        assert_eq!(&sigma_plus() + &sigma_minus(), pauli_x());
    }

    #[test]
    fn rotation_closed_form() {
        let r = pauli_rotation(&pauli_x(), std::f64::consts::FRAC_PI_2);
        assert!(r.max_abs_diff(&pauli_x().scale(-I)) < 1e-15);
    }
}
