//! Dense complex linear algebra for few-qubit simulation.
//!
//! Qubit ordering: in every multi-qubit object the first qubit is the
//! leftmost (most significant) Kronecker factor, so for two qubits the
//! basis order is `|00>, |01>, |10>, |11>` with the left digit belonging
//! to qubit 1.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used when a matrix is claimed unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance used when a matrix is claimed Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            inner: DMatrix::from_fn(dim, dim, f),
        }
    }

    /// Builds a matrix from row-major rows. Panics on ragged or non-square input.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        for row in rows {
            assert_eq!(row.as_ref().len(), dim, "rows must form a square matrix");
        }
        Self::from_fn(dim, |r, c| rows[r].as_ref()[c])
    }

    /// Builds a matrix from real row-major rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        for row in rows {
            assert_eq!(row.as_ref().len(), dim, "rows must form a square matrix");
        }
        Self::from_fn(dim, |r, c| C64::new(rows[r].as_ref()[c], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |r, c| if r == c { diag[r] } else { ZERO })
    }

    /// `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product needs equal lengths");
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    /// Density matrix of a pure state.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<C64>) -> Self {
        assert!(inner.is_square() && inner.nrows() >= 1);
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        let d = self.dim();
        assert_eq!(d, other.dim());
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += self.inner[(r, c)] * other.inner[(c, r)];
            }
        }
        acc
    }

    /// In place `self <- self · (I ⊗ u ⊗ I)` with `u` on `qubit`.
    pub fn apply_local_right(&mut self, u: &[[C64; 2]; 2], qubit: usize) {
        let d = self.dim();
        let bit = local_bit(d, qubit);
        let data = self.inner.as_mut_slice();
        for c0 in (0..d).filter(|c| c & bit == 0) {
            let (lo, hi) = (c0 * d, (c0 | bit) * d);
            for r in 0..d {
                let (a, b) = (data[lo + r], data[hi + r]);
                data[lo + r] = a * u[0][0] + b * u[1][0];
                data[hi + r] = a * u[0][1] + b * u[1][1];
            }
        }
    }

    /// In place `self <- (I ⊗ u ⊗ I) · self` with `u` on `qubit`.
    pub fn apply_local_left(&mut self, u: &[[C64; 2]; 2], qubit: usize) {
        let d = self.dim();
        let bit = local_bit(d, qubit);
        let data = self.inner.as_mut_slice();
        for c in 0..d {
            let col = &mut data[c * d..(c + 1) * d];
            for r0 in (0..d).filter(|r| r & bit == 0) {
                let (a, b) = (col[r0], col[r0 | bit]);
                col[r0] = u[0][0] * a + u[0][1] * b;
                col[r0 | bit] = u[1][0] * a + u[1][1] * b;
            }
        }
    }

    /// Partial trace over every qubit except `qubit`.
    pub fn reduce_to_qubit(&self, qubit: usize) -> [[C64; 2]; 2] {
        let d = self.dim();
        let bit = local_bit(d, qubit);
        let mut out = [[ZERO; 2]; 2];
        for r0 in (0..d).filter(|r| r & bit == 0) {
            for (a, row) in out.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v += self.inner[(r0 | (a * bit), r0 | (b * bit))];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "matmul dimension mismatch");
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "vector length mismatch");
        (0..d)
            .map(|r| (0..d).map(|c| self.inner[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |U†U - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.dagger().matmul(self);
        prod.max_abs_diff(&Self::identity(self.dim()))
    }

    /// `max |H - H†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() < tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() < tol
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation < UNITARY_TOL {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                actual: self.dim(),
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                out.push(self.inner[(r, c)]);
            }
        }
        out
    }

    /// Determinant (LU based).
    pub fn determinant(&self) -> C64 {
        self.inner.clone().determinant()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.inner.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Eigenvalues of a general square matrix, read off the diagonal of its
    /// complex Schur form.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        if !self.is_finite() {
            return Err(Error::NonFinite("eigenvalues of a non-finite matrix".into()));
        }
        let schur = self
            .inner
            .clone()
            .try_schur(f64::EPSILON, 100_000)
            .ok_or_else(|| Error::NonFinite("Schur iteration did not converge".into()))?;
        let (_, t) = schur.unpack();
        Ok((0..self.dim()).map(|i| t[(i, i)]).collect())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        writeln!(f, "ComplexMatrix({d}x{d})[")?;
        for r in 0..d {
            write!(f, "  ")?;
            for c in 0..d {
                let z = self.inner[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.inner[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self.matmul(&rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim());
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim());
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Bit mask of `qubit` in a basis index of a `dim`-dimensional register.
fn local_bit(dim: usize, qubit: usize) -> usize {
    assert!(dim.is_power_of_two(), "register dimension must be a power of two");
    let n = dim.trailing_zeros() as usize;
    assert!(qubit < n, "qubit index out of range");
    1 << (n - 1 - qubit)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Kronecker product of a list of factors, first factor leftmost.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut iter = factors.into_iter();
    let first = iter.next().expect("kron_all needs at least one factor").clone();
    iter.fold(first, |acc, m| acc.kron(m))
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

/// `exp(-i h t)` for Hermitian `h` via its eigendecomposition.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let deviation = h.hermiticity_deviation();
    if deviation >= HERMITIAN_TOL.max(HERMITIAN_TOL * h.max_abs()) {
        return Err(Error::NotHermitian { deviation });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("evolution time {t}")));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite("Hamiltonian entries".into()));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let herm = (&h.inner + h.inner.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&lambda| C64::from_polar(1.0, -lambda * t))
        .collect();
    let v = &eig.eigenvectors;
    let d = h.dim();
    let mut scaled = v.clone();
    for c in 0..d {
        for r in 0..d {
            scaled[(r, c)] *= phases[c];
        }
    }
    Ok(ComplexMatrix::from_nalgebra(scaled * v.adjoint()))
}

/// Reduced density matrix over the subsystems listed in `keep`.
///
/// `dims[k]` is the dimension of subsystem `k`; subsystem 0 is the leftmost
/// Kronecker factor. The kept subsystems appear in their original order.
pub fn partial_trace(rho: &ComplexMatrix, keep: &[usize], dims: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    rho.ensure_dim(total)?;
    if keep.is_empty() {
        return Err(Error::InvalidInput("partial trace must keep at least one subsystem".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidInput(format!(
            "invalid subsystem selection {keep:?} for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let keep_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // strides of each subsystem in the full index
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let compose = |subs: &[usize], mut idx: usize| -> usize {
        let mut full = 0;
        for &k in subs.iter().rev() {
            full += (idx % dims[k]) * strides[k];
            idx /= dims[k];
        }
        full
    };

    let keep_offsets: Vec<usize> = (0..keep_dim).map(|i| compose(&kept, i)).collect();
    let trace_offsets: Vec<usize> = (0..trace_dim).map(|i| compose(&traced, i)).collect();

    Ok(ComplexMatrix::from_fn(keep_dim, |r, c| {
        trace_offsets
            .iter()
            .map(|&t| rho[(keep_offsets[r] + t, keep_offsets[c] + t)])
            .sum()
    }))
}

/// Seeded generator whose children are derived from the seed alone, so a
/// child stream never depends on how much of the parent was consumed.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream keyed by `index`.
    pub fn split(&self, index: u64) -> Self {
        Self::new(derive_seed(self.seed, index))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Child seed for `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Haar-random pure state: normalized vector of i.i.d. complex normals.
pub fn haar_state(dim: usize, rng: &mut RandomSource) -> Vec<C64> {
    assert!(dim >= 1, "state dimension must be positive");
    loop {
        let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.normal(), rng.normal())).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix
/// with the phases of R's diagonal absorbed.
pub fn haar_unitary(dim: usize, rng: &mut RandomSource) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.normal(), rng.normal()));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(q)
}

/// Haar-random element of SU(dim).
pub fn haar_special_unitary(dim: usize, rng: &mut RandomSource) -> ComplexMatrix {
    let u = haar_unitary(dim, rng);
    let det = u.determinant();
    u.scale(C64::from_polar(1.0, -det.arg() / dim as f64))
}

/// Random Hermitian matrix with entries of unit scale.
pub fn random_hermitian(dim: usize, rng: &mut RandomSource) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| C64::new(rng.normal(), rng.normal()));
    (&g + &g.dagger()).scale_real(0.5)
}

pub fn inner_product(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn basis_state(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_application_matches_kron() {
        let mut rng = RandomSource::new(17);
        let m = haar_unitary(8, &mut rng);
        let u = haar_unitary(2, &mut rng);
        let arr = [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
        let id = ComplexMatrix::identity(2);
        for q in 0..3 {
            let factors: Vec<&ComplexMatrix> = (0..3).map(|k| if k == q { &u } else { &id }).collect();
            let full = kron_all(factors);
            let mut right = m.clone();
            right.apply_local_right(&arr, q);
            assert!(right.max_abs_diff(&(&m * &full)) < 1e-14);
            let mut left = m.clone();
            left.apply_local_left(&arr, q);
            assert!(left.max_abs_diff(&(&full * &m)) < 1e-14);
            let keep = [q];
            let reduced = partial_trace(&m, &keep, &[2, 2, 2]).unwrap();
            let r = m.reduce_to_qubit(q);
            for a in 0..2 {
                for b in 0..2 {
                    assert!((r[a][b] - reduced[(a, b)]).norm() < 1e-14);
                }
            }
        }
    }

    use crate::gates;
    use std::f64::consts::PI;

    fn taylor_expm(h: &ComplexMatrix, t: f64, terms: usize) -> ComplexMatrix {
        let a = h.scale(C64::new(0.0, -t));
        let mut term = ComplexMatrix::identity(h.dim());
        let mut acc = term.clone();
        for k in 1..terms {
            term = (&term * &a).scale_real(1.0 / k as f64);
            acc = &acc + &term;
        }
        acc
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zi = kron(&gates::pauli_z(), &i2);
        let expected = ComplexMatrix::from_diagonal(&[ONE, ONE, -ONE, -ONE]);
        assert!(zi.max_abs_diff(&expected) < 1e-15);
        let xx = kron(&gates::pauli_x(), &gates::pauli_x());
        assert_eq!(xx.apply(&basis_state(4, 0)), basis_state(4, 3));
    }

    #[test]
    fn kron_is_associative() {
        let mut rng = RandomSource::new(3);
        let a = haar_unitary(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let c = haar_unitary(4, &mut rng);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn dagger_examples() {
        assert_eq!(dagger(&ComplexMatrix::identity(3)), ComplexMatrix::identity(3));
        assert_eq!(dagger(&gates::pauli_y()), gates::pauli_y());
        let mut rng = RandomSource::new(5);
        let a = ComplexMatrix::from_fn(3, |_, _| C64::new(rng.normal(), rng.normal()));
        assert_eq!(dagger(&dagger(&a)), a);
    }

    #[test]
    fn expm_of_pauli_z() {
        let u = expm_hermitian(&gates::pauli_z(), PI / 2.0).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[-I, I]);
        assert!(u.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let mut rng = RandomSource::new(11);
        let h = random_hermitian(5, &mut rng);
        assert!(expm_hermitian(&h, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(5)) < 1e-13);
    }

    #[test]
    fn expm_is_unitary_and_matches_series() {
        let mut rng = RandomSource::new(12);
        for dim in [2, 4, 8, 32] {
            let h = random_hermitian(dim, &mut rng).scale_real(0.3);
            let u = expm_hermitian(&h, 1.0).unwrap();
            assert!(u.unitarity_deviation() < 1e-12, "dim {dim}");
            let series = taylor_expm(&h, 1.0, 60);
            assert!(u.max_abs_diff(&series) < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn expm_group_property() {
        let mut rng = RandomSource::new(13);
        for _ in 0..10 {
            let h = random_hermitian(4, &mut rng);
            let (s, t) = (rng.uniform_range(0.0, 3.0), rng.uniform_range(0.0, 3.0));
            let lhs = expm_hermitian(&h, s + t).unwrap();
            let rhs = &expm_hermitian(&h, s).unwrap() * &expm_hermitian(&h, t).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]]);
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn partial_trace_examples() {
        let rho = ComplexMatrix::projector(&basis_state(4, 0));
        let reduced = partial_trace(&rho, &[0], &[2, 2]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::projector(&basis_state(2, 0))) < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let reduced = partial_trace(&ComplexMatrix::projector(&bell), &[0], &[2, 2]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_right_subsystem() {
        // |0><0| (x) |+><+|, keep qubit 1 (right factor)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = vec![C64::new(s, 0.0), C64::new(s, 0.0)];
        let rho = kron(&ComplexMatrix::projector(&basis_state(2, 0)), &ComplexMatrix::projector(&plus));
        let reduced = partial_trace(&rho, &[1], &[2, 2]).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::projector(&plus)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&rho, &[0], &[2, 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&rho, &[], &[2, 2]).is_err());
        assert!(partial_trace(&rho, &[2], &[2, 2]).is_err());
    }

    #[test]
    fn partial_trace_of_product_state_is_pure() {
        let mut rng = RandomSource::new(21);
        let a = haar_state(2, &mut rng);
        let b = haar_state(4, &mut rng);
        let psi: Vec<C64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        let reduced = partial_trace(&ComplexMatrix::projector(&psi), &[1, 2], &[2, 2, 2]).unwrap();
        let purity = reduced.trace_of_product(&reduced).re;
        assert!((purity - 1.0).abs() < 1e-12);
        assert!(reduced.max_abs_diff(&ComplexMatrix::projector(&b)) < 1e-12);
    }

    #[test]
    fn haar_state_is_normalized_and_deterministic() {
        let mut r1 = RandomSource::new(99);
        let mut r2 = RandomSource::new(99);
        for dim in [1, 2, 4, 32] {
            let a = haar_state(dim, &mut r1);
            let b = haar_state(dim, &mut r2);
            assert_eq!(a, b);
            let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_overlap_first_moment() {
        let mut rng = RandomSource::new(2024);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| {
                let a = haar_state(4, &mut rng);
                let b = haar_state(4, &mut rng);
                inner_product(&a, &b).norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() < 0.01, "mean overlap {mean}");
    }

    #[test]
    fn haar_component_weights() {
        let mut rng = RandomSource::new(7);
        let n = 20_000;
        let mut acc = [0.0; 4];
        for _ in 0..n {
            for (a, z) in acc.iter_mut().zip(haar_state(4, &mut rng)) {
                *a += z.norm_sqr();
            }
        }
        // per-component variance is 3/80 at dim 4
        let se = (3.0f64 / 80.0 / n as f64).sqrt();
        for a in acc {
            assert!((a / n as f64 - 0.25).abs() < 5.0 * se);
        }
    }

    #[test]
    fn split_streams_are_independent_of_parent_consumption() {
        let parent = RandomSource::new(1);
        let mut consumed = parent.clone();
        consumed.uniform();
        assert_eq!(parent.split(4).uniform(), consumed.split(4).uniform());
        assert_ne!(parent.split(4).uniform(), parent.split(5).uniform());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = RandomSource::new(8);
        for dim in [2, 4, 8] {
            assert!(haar_unitary(dim, &mut rng).unitarity_deviation() < 1e-12);
            let su = haar_special_unitary(dim, &mut rng);
            assert!((su.determinant() - ONE).norm() < 1e-12);
        }
    }
}
