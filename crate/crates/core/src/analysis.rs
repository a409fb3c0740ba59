//! Two-qubit gate invariants: Cartan coordinates, operator Schmidt spectrum,
//! operator entanglement and entangling power.
//!
//! Cartan coordinates `(c_x, c_y, c_z)` label the local-equivalence class of
//! a two-qubit unitary through the canonical gate
//! `exp(i (c_x XX + c_y YY + c_z ZZ))`. Canonical coordinates satisfy
//! `pi/4 >= c_x >= c_y >= |c_z|`, with `c_z >= 0` whenever `c_x = pi/4`.
//! `c_z` keeps its sign because a gate and its mirror image are generally
//! not locally equivalent.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gates::{pauli_rotation, pauli_x, pauli_y, pauli_z, swap};
use crate::numkit::{haar_state, kron, ComplexMatrix, RandomSource, C64, I, ONE, ZERO};

/// Phase tolerance used when snapping coordinates onto chamber faces.
pub const CHAMBER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartanCoordinates {
    pub c_x: f64,
    pub c_y: f64,
    pub c_z: f64,
}

impl CartanCoordinates {
    pub fn new(c_x: f64, c_y: f64, c_z: f64) -> Self {
        Self { c_x, c_y, c_z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c_x, self.c_y, self.c_z]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Representative of the same class inside the canonical chamber.
    pub fn canonicalized(&self) -> Self {
        let mut c = self.as_array().map(|x| {
            let r = x.rem_euclid(FRAC_PI_2);
            if r > FRAC_PI_4 + CHAMBER_TOL {
                r - FRAC_PI_2
            } else {
                r
            }
        });
        c.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        if c[0] < 0.0 {
            c[0] = -c[0];
            c[2] = -c[2];
        }
        if c[1] < 0.0 {
            c[1] = -c[1];
            c[2] = -c[2];
        }
        if c[0] >= FRAC_PI_4 - CHAMBER_TOL {
            c[2] = c[2].abs();
        }
        Self::new(c[0] + 0.0, c[1] + 0.0, c[2] + 0.0)
    }
}

/// `exp(i (c_x XX + c_y YY + c_z ZZ))`.
pub fn canonical_gate(c: CartanCoordinates) -> ComplexMatrix {
    let xx = kron(&pauli_x(), &pauli_x());
    let yy = kron(&pauli_y(), &pauli_y());
    let zz = kron(&pauli_z(), &pauli_z());
    let ex = pauli_rotation(&xx, -c.c_x);
    let ey = pauli_rotation(&yy, -c.c_y);
    let ez = pauli_rotation(&zz, -c.c_z);
    &(&ex * &ey) * &ez
}

/// Change of basis to the magic (Bell-type) basis, in which local gates are
/// real orthogonal matrices.
pub fn magic_basis() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_rows(&[
        [ONE, ZERO, ZERO, I],
        [ZERO, I, ONE, ZERO],
        [ZERO, I, -ONE, ZERO],
        [ONE, ZERO, ZERO, -I],
    ])
    .scale_real(s)
}

/// Canonical Cartan coordinates of a two-qubit unitary.
pub fn cartan_coordinates(u: &ComplexMatrix) -> Result<CartanCoordinates> {
    u.ensure_dim(4)?;
    u.ensure_unitary()?;
    let special = u.scale(u.determinant().powf(-0.25));
    let q = magic_basis();
    let m = &(&q.dagger() * &special) * &q;
    let eig = (&m.transpose() * &m).eigenvalues()?;
    let mut theta: Vec<f64> = eig.iter().map(|z| z.arg() / 2.0).collect();
    theta.sort_by(f64::total_cmp);
    theta[3] = -(theta[0] + theta[1] + theta[2]);
    let raw = CartanCoordinates::new(
        (theta[0] + theta[2]) / 2.0,
        (theta[1] + theta[2]) / 2.0,
        (theta[0] + theta[1]) / 2.0,
    );
    Ok(raw.canonicalized())
}

/// Operator Schmidt coefficients, squared so that they sum to 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    /// Non-negative, descending.
    pub lambda: Vec<f64>,
}

/// Schmidt spectrum of `u` across the qubit bipartition, computed from the
/// singular values of its coefficient matrix in the normalized Pauli basis.
pub fn operator_schmidt(u: &ComplexMatrix) -> Result<SchmidtSpectrum> {
    u.ensure_dim(4)?;
    let paulis = [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()];
    let coeffs = ComplexMatrix::from_fn(4, |i, j| kron(&paulis[i], &paulis[j]).trace_of_product(u) / 2.0);
    let lambda = coeffs.singular_values().into_iter().map(|s| s * s).collect();
    Ok(SchmidtSpectrum { lambda })
}

/// `1 - sum(lambda^2) / 16`.
pub fn operator_entanglement(u: &ComplexMatrix) -> Result<f64> {
    let spectrum = operator_schmidt(u)?;
    Ok(1.0 - spectrum.lambda.iter().map(|l| l * l).sum::<f64>() / 16.0)
}

/// Closed-form entangling power, in `[0, 2/9]`.
pub fn entangling_power(u: &ComplexMatrix) -> Result<f64> {
    u.ensure_dim(4)?;
    let s = swap();
    let e = operator_entanglement(u)? + operator_entanglement(&(u * &s))? - operator_entanglement(&s)?;
    Ok(4.0 / 9.0 * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: usize,
}

const MC_CHUNK: usize = 4096;

/// Linear entropy `1 - Tr[rho_A^2]` of a two-qubit pure state.
pub fn linear_entropy(psi: &[C64]) -> f64 {
    let rho = |i: usize, k: usize| psi[2 * i] * psi[2 * k].conj() + psi[2 * i + 1] * psi[2 * k + 1].conj();
    let purity = rho(0, 0).norm_sqr() + rho(1, 1).norm_sqr() + 2.0 * rho(0, 1).norm_sqr();
    1.0 - purity
}

/// Monte-Carlo entangling power: mean linear entropy of `u` applied to
/// Haar-random product states.
///
/// Samples are drawn in fixed-size chunks, chunk `k` using the RNG split `k`
/// of `rng`, so the estimate does not depend on thread scheduling.
pub fn entangling_power_mc(u: &ComplexMatrix, samples: usize, rng: &RandomSource) -> Result<MonteCarloEstimate> {
    u.ensure_dim(4)?;
    if samples == 0 {
        return Err(crate::Error::InvalidInput("entangling_power_mc needs at least one sample".into()));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut r = rng.split(k as u64);
            let count = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let a = haar_state(2, &mut r);
                let b = haar_state(2, &mut r);
                let input: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
                let e = linear_entropy(&u.apply(&input));
                sum += e;
                sum_sq += e * e;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = samples as f64;
    let mean = sum / n;
    let variance = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate {
        mean,
        standard_error: (variance / n).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{CostBackend, SourceGateSet};
    use crate::channels::agf_unitary;
    use crate::gates::cnot;
    use crate::numkit::{haar_special_unitary, haar_unitary};
    use crate::optimkit::{vqgo, OptimizerConfig};

    fn random_local(rng: &mut RandomSource) -> ComplexMatrix {
        kron(&haar_unitary(2, rng), &haar_unitary(2, rng))
    }

    fn coords(x: f64, y: f64, z: f64) -> CartanCoordinates {
        CartanCoordinates::new(x, y, z)
    }

    #[test]
    fn canonical_gate_corners() {
        assert!(canonical_gate(coords(0.0, 0.0, 0.0)).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let f = agf_unitary(&swap(), &canonical_gate(coords(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4))).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert!(canonical_gate(coords(0.3, -1.2, 2.0)).unitarity_deviation() < 1e-14);
    }

    #[test]
    fn canonical_cnot_class_synthesizes_cnot() {
        let sources = SourceGateSet::new(vec![canonical_gate(coords(FRAC_PI_4, 0.0, 0.0))]).unwrap();
        let r = vqgo(&cnot(), &sources, &OptimizerConfig::default().with_seed(5), CostBackend::Exact).unwrap();
        assert!(r.best_cost < 1e-8, "{}", r.best_cost);
    }

    #[test]
    fn coordinates_of_named_gates() {
        let id = cartan_coordinates(&ComplexMatrix::identity(4)).unwrap();
        assert!(id.max_abs_diff(&coords(0.0, 0.0, 0.0)) < 1e-9, "{id:?}");
        let sw = cartan_coordinates(&swap()).unwrap();
        assert!(sw.max_abs_diff(&coords(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4)) < 1e-9, "{sw:?}");
        let cx = cartan_coordinates(&cnot()).unwrap();
        assert!(cx.max_abs_diff(&coords(FRAC_PI_4, 0.0, 0.0)) < 1e-9, "{cx:?}");
    }

    #[test]
    fn coordinates_invert_canonical_gate() {
        let mut rng = RandomSource::new(77);
        for _ in 0..200 {
            let a = rng.uniform_range(0.0, FRAC_PI_4);
            let b = rng.uniform_range(0.0, a);
            let c = rng.uniform_range(-b, b);
            let expect = coords(a, b, c);
            let got = cartan_coordinates(&canonical_gate(expect)).unwrap();
            assert!(got.max_abs_diff(&expect) < 1e-9, "{expect:?} -> {got:?}");
        }
    }

    #[test]
    fn coordinates_are_local_invariants() {
        let mut rng = RandomSource::new(31);
        for _ in 0..30 {
            let u = haar_special_unitary(4, &mut rng);
            let base = cartan_coordinates(&u).unwrap();
            assert!(base.c_x <= FRAC_PI_4 + 1e-12 && base.c_x >= base.c_y && base.c_y >= base.c_z.abs());
            let v = &(&random_local(&mut rng) * &u) * &random_local(&mut rng);
            let moved = cartan_coordinates(&v).unwrap();
            assert!(base.max_abs_diff(&moved) < 1e-9, "{base:?} vs {moved:?}");
        }
    }

    #[test]
    fn canonicalization_handles_mirror_on_the_face() {
        let c = coords(FRAC_PI_4, 0.2, -0.1).canonicalized();
        assert!(c.max_abs_diff(&coords(FRAC_PI_4, 0.2, 0.1)) < 1e-15);
        let mirrored = coords(0.5, 0.3, -0.2).canonicalized();
        assert!(mirrored.c_z < 0.0);
        let f = agf_unitary(
            &canonical_gate(coords(FRAC_PI_4, 0.2, -0.1)),
            &canonical_gate(coords(FRAC_PI_4, 0.2, 0.1)),
        )
        .unwrap();
        assert!(f < 1.0 - 1e-3);
        assert!(cartan_coordinates(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn schmidt_spectra() {
        let l = operator_schmidt(&ComplexMatrix::identity(4)).unwrap().lambda;
        assert!((l[0] - 4.0).abs() < 1e-12 && l[1..].iter().all(|x| x.abs() < 1e-12));
        let l = operator_schmidt(&cnot()).unwrap().lambda;
        for (got, want) in l.iter().zip([2.0, 2.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{l:?}");
        }
        let l = operator_schmidt(&swap()).unwrap().lambda;
        assert!(l.iter().all(|x| (x - 1.0).abs() < 1e-12));
        let mut rng = RandomSource::new(8);
        let l = operator_schmidt(&haar_unitary(4, &mut rng)).unwrap().lambda;
        assert!((l.iter().sum::<f64>() - 4.0).abs() < 1e-9);
        assert!(l.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn entanglement_examples() {
        assert!(operator_entanglement(&ComplexMatrix::identity(4)).unwrap().abs() < 1e-12);
        assert!((operator_entanglement(&cnot()).unwrap() - 0.5).abs() < 1e-12);
        assert!((operator_entanglement(&swap()).unwrap() - 0.75).abs() < 1e-12);
        assert!(entangling_power(&swap()).unwrap().abs() < 1e-12);
        assert!(entangling_power(&ComplexMatrix::identity(4)).unwrap().abs() < 1e-12);
        assert!((entangling_power(&cnot()).unwrap() - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn entangling_power_is_local_invariant() {
        let mut rng = RandomSource::new(12);
        for _ in 0..20 {
            let u = haar_unitary(4, &mut rng);
            let v = &(&random_local(&mut rng) * &u) * &random_local(&mut rng);
            let (a, b) = (entangling_power(&u).unwrap(), entangling_power(&v).unwrap());
            assert!((a - b).abs() < 1e-10);
            assert!((-1e-12..=2.0 / 9.0 + 1e-12).contains(&a));
        }
    }

    #[test]
    fn monte_carlo_swap_is_exactly_zero() {
        let est = entangling_power_mc(&swap(), 10_000, &RandomSource::new(1)).unwrap();
        assert!(est.mean.abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let rng = RandomSource::new(2);
        let est = entangling_power_mc(&cnot(), 100_000, &rng).unwrap();
        assert!((est.mean - 2.0 / 9.0).abs() < 0.003, "{est:?}");
        let g = canonical_gate(coords(std::f64::consts::FRAC_PI_8, 0.0, 0.0));
        let est = entangling_power_mc(&g, 100_000, &rng.split(99)).unwrap();
        let exact = entangling_power(&g).unwrap();
        assert!((est.mean - exact).abs() < 3.0 * est.standard_error, "{est:?} vs {exact}");
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let rng = RandomSource::new(5);
        let a = entangling_power_mc(&cnot(), 9000, &rng).unwrap();
        let b = entangling_power_mc(&cnot(), 9000, &rng).unwrap();
        assert_eq!(a, b);
        assert!(entangling_power_mc(&cnot(), 0, &rng).is_err());
    }
}
