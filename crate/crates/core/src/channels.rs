//! Pauli algebra, average gate fidelity and Pauli transfer matrices of
//! unitary channels.
//!
//! Pauli strings are indexed in base 4 with qubit 1 as the most significant
//! digit and the digit order `I=0, X=1, Y=2, Z=3`, so `"ZX"` has index
//! `3*4 + 1 = 13`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format_sig17;
use crate::numkit::{ComplexMatrix, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];

    pub fn digit(self) -> usize {
        self as usize
    }

    pub fn from_digit(d: usize) -> Self {
        Self::ALL[d]
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliLetter::I => ComplexMatrix::identity(2),
            PauliLetter::X => crate::gates::pauli_x(),
            PauliLetter::Y => crate::gates::pauli_y(),
            PauliLetter::Z => crate::gates::pauli_z(),
        }
    }

    /// X and Y flip the basis bit.
    fn flips(self) -> bool {
        matches!(self, PauliLetter::X | PauliLetter::Y)
    }

    /// Value of the single nonzero entry in row `row_bit`.
    fn row_value(self, row_bit: usize) -> C64 {
        match (self, row_bit) {
            (PauliLetter::I, _) | (PauliLetter::X, _) => ONE,
            (PauliLetter::Y, 0) => -I,
            (PauliLetter::Y, _) => I,
            (PauliLetter::Z, 0) => ONE,
            (PauliLetter::Z, _) => -ONE,
        }
    }
}

/// An n-qubit Pauli string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliLabel {
    letters: Vec<PauliLetter>,
}

impl PauliLabel {
    pub fn new(letters: Vec<PauliLetter>) -> Self {
        assert!(!letters.is_empty(), "Pauli label needs at least one qubit");
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![PauliLetter::I; n])
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        assert!(index < 1 << (2 * n), "Pauli index out of range");
        let letters = (0..n)
            .map(|k| PauliLetter::from_digit((index >> (2 * (n - 1 - k))) & 3))
            .collect();
        Self { letters }
    }

    pub fn index(&self) -> usize {
        self.letters.iter().fold(0, |acc, l| acc * 4 + l.digit())
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }

    /// Sparse form: the nonzero of row `r` sits in column `r ^ mask`.
    pub fn sparse(&self) -> SparsePauli {
        let n = self.n_qubits();
        let dim = 1usize << n;
        let mask = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, l)| l.flips())
            .fold(0usize, |m, (k, _)| m | 1 << (n - 1 - k));
        let values = (0..dim)
            .map(|r| {
                self.letters
                    .iter()
                    .enumerate()
                    .map(|(k, l)| l.row_value((r >> (n - 1 - k)) & 1))
                    .product()
            })
            .collect();
        SparsePauli { mask, values }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput("empty Pauli label".into()));
        }
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(PauliLetter::I),
                'X' => Ok(PauliLetter::X),
                'Y' => Ok(PauliLetter::Y),
                'Z' => Ok(PauliLetter::Z),
                other => Err(Error::InvalidInput(format!("invalid Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }
}

impl TryFrom<String> for PauliLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliLabel> for String {
    fn from(p: PauliLabel) -> String {
        p.to_string()
    }
}

/// Row-sparse Pauli string: one phase per row.
#[derive(Debug, Clone)]
pub struct SparsePauli {
    pub mask: usize,
    pub values: Vec<C64>,
}

impl SparsePauli {
    /// `Tr[P · m]`.
    pub fn trace_with(&self, m: &ComplexMatrix) -> C64 {
        self.values
            .iter()
            .enumerate()
            .map(|(r, &v)| v * m[(r ^ self.mask, r)])
            .sum()
    }
}

pub fn pauli_matrix(label: &PauliLabel) -> ComplexMatrix {
    let sparse = label.sparse();
    ComplexMatrix::from_fn(sparse.values.len(), |r, c| {
        if c == r ^ sparse.mask {
            sparse.values[r]
        } else {
            ZERO
        }
    })
}

/// Average gate fidelity between two unitary channels.
pub fn agf_unitary(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    u.ensure_dim(v.dim())?;
    let d = u.dim() as f64;
    let overlap = u.dagger().trace_of_product(v).norm_sqr();
    Ok((overlap / d + 1.0) / (d + 1.0))
}

/// Average gate infidelity, `1 - agf_unitary`.
pub fn agi(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    Ok(1.0 - agf_unitary(u, v)?)
}

/// Real `4^n x 4^n` Pauli transfer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTransferMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PauliTransferMatrix {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        let size = 1usize << (2 * n);
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                actual: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of Pauli strings, `4^n`.
    pub fn size(&self) -> usize {
        1 << (2 * self.n)
    }

    /// Hilbert-space dimension `2^n`.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let s = self.size();
        &self.entries[i * s..(i + 1) * s]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                actual: other.size(),
            });
        }
        let s = self.size();
        let mut entries = vec![0.0; s * s];
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..s {
                    entries[i * s + j] += a * other.get(k, j);
                }
            }
        }
        Ok(Self { n: self.n, entries })
    }

    /// Row-major CSV: a header of Pauli labels, then `4^n` rows of
    /// `4^n` values at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let s = self.size();
        let header: Vec<String> = (0..s).map(|j| PauliLabel::from_index(j, self.n).to_string()).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..s {
            let row: Vec<String> = self.row(i).iter().map(|&x| format_sig17(x)).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Pauli transfer matrix `R_ij = Tr[s_i u s_j u†] / D` of a unitary channel.
pub fn ptm(u: &ComplexMatrix) -> Result<PauliTransferMatrix> {
    let dim = u.dim();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidInput(format!("dimension {dim} is not a power of two")));
    }
    let n = dim.trailing_zeros() as usize;
    let size = 1usize << (2 * n);
    let paulis: Vec<SparsePauli> = (0..size).map(|k| PauliLabel::from_index(k, n).sparse()).collect();
    let u_dag = u.dagger();
    let mut entries = vec![0.0; size * size];
    for (j, pj) in paulis.iter().enumerate() {
        let image = &(u * &pauli_matrix_from_sparse(pj)) * &u_dag;
        for (i, pi) in paulis.iter().enumerate() {
            entries[i * size + j] = pi.trace_with(&image).re / dim as f64;
        }
    }
    PauliTransferMatrix::from_entries(n, entries)
}

fn pauli_matrix_from_sparse(p: &SparsePauli) -> ComplexMatrix {
    ComplexMatrix::from_fn(p.values.len(), |r, c| if c == r ^ p.mask { p.values[r] } else { ZERO })
}

/// Average gate fidelity from two Pauli transfer matrices.
pub fn agf_from_ptms(r_target: &PauliTransferMatrix, r_channel: &PauliTransferMatrix) -> Result<f64> {
    if r_target.n != r_channel.n {
        return Err(Error::DimensionMismatch {
            expected: r_target.size(),
            actual: r_channel.size(),
        });
    }
    let d = r_target.hilbert_dim() as f64;
    let overlap: f64 = r_target
        .entries
        .iter()
        .zip(&r_channel.entries)
        .map(|(a, b)| a * b)
        .sum();
    Ok((overlap / d + 1.0) / (d + 1.0))
}
