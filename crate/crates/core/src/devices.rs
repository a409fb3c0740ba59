//! Cross-resonance device models and the gates they generate.
//!
//! Frequencies are ordinary frequencies in MHz; Hamiltonians are returned in
//! angular units (rad/ns) using `2 pi * 1e-3` rad/ns per MHz, and times are in ns.
//!
//! Two-qubit register: `|q1 q2>` with the driven (control) qubit Q1 as the
//! left factor. Five-qubit register: `|Q1 Q2 Q3 Q4 Q0>` with the measurement
//! qubit Q0 as the last (least significant) factor.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{cnot_on, embed, pauli_rotation, pauli_x, pauli_z, sigma_minus, sigma_plus};
use crate::numkit::{expm_hermitian, kron, ComplexMatrix, C64};

/// rad/ns per MHz.
pub const MHZ_TO_RAD_PER_NS: f64 = 2.0 * std::f64::consts::PI * 1e-3;

/// Index of the measurement qubit Q0 in the five-qubit register.
pub const MEASUREMENT_QUBIT: usize = 4;

/// Detuning, coupling and drive crosstalk of one driven/target qubit pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossResonancePair {
    pub delta_mhz: f64,
    pub g_mhz: f64,
    /// Crosstalk amplitude attenuation.
    pub eps: f64,
    /// Crosstalk phase delay.
    pub phi_rad: f64,
}

impl CrossResonancePair {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.delta_mhz, self.g_mhz, self.eps, self.phi_rad]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput(format!("non-finite device parameters {self:?}")));
        }
        if self.eps < 0.0 {
            return Err(Error::InvalidInput(format!("crosstalk amplitude must be >= 0, got {}", self.eps)));
        }
        Ok(())
    }

    /// Same pair with crosstalk switched off.
    pub fn without_crosstalk(&self) -> Self {
        Self { eps: 0.0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Drive amplitude; a negative value encodes the opposite drive phase.
    pub omega_mhz: f64,
    pub t_ns: f64,
}

impl DriveSpec {
    pub fn new(omega_mhz: f64, t_ns: f64) -> Result<Self> {
        if !omega_mhz.is_finite() || !t_ns.is_finite() || t_ns < 0.0 {
            return Err(Error::InvalidInput(format!(
                "drive needs finite amplitude and t >= 0, got omega={omega_mhz}, t={t_ns}"
            )));
        }
        Ok(Self { omega_mhz, t_ns })
    }
}

/// Data qubits Q1..Q4 each coupled to the measurement qubit Q0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourQubitDevice {
    pub pairs: [CrossResonancePair; 4],
}

impl FourQubitDevice {
    pub fn validate(&self) -> Result<()> {
        self.pairs.iter().try_for_each(CrossResonancePair::validate)
    }

    pub fn without_crosstalk(&self) -> Self {
        Self {
            pairs: self.pairs.map(|p| p.without_crosstalk()),
        }
    }
}

/// Pair terms in MHz (ordinary frequency) acting on the register positions
/// `driven` and `target` of an `n`-qubit register.
fn pair_terms_mhz(pair: &CrossResonancePair, omega: f64, driven: usize, target: usize, n: usize) -> ComplexMatrix {
    let sp = sigma_plus();
    let sm = sigma_minus();
    let number = embed(&(&sp * &sm), driven, n);
    let exchange = &(&embed(&sp, driven, n) * &embed(&sm, target, n)) + &(&embed(&sm, driven, n) * &embed(&sp, target, n));
    let drive = embed(&pauli_x(), driven, n);
    let phase = C64::from_polar(1.0, pair.phi_rad);
    let crosstalk = &embed(&sm, target, n).scale(phase.conj()) + &embed(&sp, target, n).scale(phase);

    let mut h = number.scale_real(pair.delta_mhz);
    h = &h + &exchange.scale_real(pair.g_mhz);
    h = &h + &drive.scale_real(omega / 2.0);
    if pair.eps != 0.0 {
        h = &h + &crosstalk.scale_real(omega / 2.0 * pair.eps);
    }
    h
}

/// Cross-resonance drive Hamiltonian in rad/ns, Q1 driven at Q2's frequency.
pub fn cr_hamiltonian(pair: &CrossResonancePair, omega_mhz: f64) -> ComplexMatrix {
    pair_terms_mhz(pair, omega_mhz, 0, 1, 2).scale_real(MHZ_TO_RAD_PER_NS)
}

/// `exp(-i H(omega) t)`.
pub fn cr_gate(pair: &CrossResonancePair, drive: &DriveSpec) -> Result<ComplexMatrix> {
    expm_hermitian(&cr_hamiltonian(pair, drive.omega_mhz), drive.t_ns)
}

/// Four simultaneous cross-resonance drives on the five-qubit register, rad/ns.
pub fn four_cr_hamiltonian(dev: &FourQubitDevice, omegas_mhz: &[f64; 4]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(32);
    for (i, (pair, &omega)) in dev.pairs.iter().zip(omegas_mhz).enumerate() {
        h = &h + &pair_terms_mhz(pair, omega, i, MEASUREMENT_QUBIT, 5);
    }
    h.scale_real(MHZ_TO_RAD_PER_NS)
}

pub fn four_cr_gate(dev: &FourQubitDevice, omegas_mhz: &[f64; 4], t_ns: f64) -> Result<ComplexMatrix> {
    if t_ns.is_nan() || t_ns < 0.0 {
        return Err(Error::InvalidInput(format!("gate time must be >= 0, got {t_ns}")));
    }
    expm_hermitian(&four_cr_hamiltonian(dev, omegas_mhz), t_ns)
}

/// Fixed single-qubit frames `(A, B, C)` of the echoed two-pulse CNOT.
///
/// With `U(+omega) ~ exp(+i pi/8 ZX)` and `U(-omega) ~ exp(-i pi/8 ZX)` (the
/// sign of the effective ZX term of this model), `A U(-omega) B U(+omega) C`
/// equals CNOT up to a global phase. `B` is the echo pi pulse on Q1.
pub fn tpcx_frames() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let x = pauli_x();
    let a = kron(&(&pauli_rotation(&pauli_z(), FRAC_PI_4) * &x), &pauli_rotation(&x, FRAC_PI_4));
    let b = kron(&x, &ComplexMatrix::identity(2));
    let c = ComplexMatrix::identity(4);
    (a, b, c)
}

/// `A · cr_minus · B · cr_plus · C` for arbitrary cross-resonance factors.
pub fn tpcx_from_factors(cr_minus: &ComplexMatrix, cr_plus: &ComplexMatrix) -> ComplexMatrix {
    let (a, b, c) = tpcx_frames();
    &(&(&(&a * cr_minus) * &b) * cr_plus) * &c
}

/// Two-pulse echoed cross-resonance CNOT.
pub fn tpcx(pair: &CrossResonancePair, omega_mhz: f64, t_ns: f64) -> Result<ComplexMatrix> {
    let minus = cr_gate(pair, &DriveSpec::new(-omega_mhz, t_ns)?)?;
    let plus = cr_gate(pair, &DriveSpec::new(omega_mhz, t_ns)?)?;
    Ok(tpcx_from_factors(&minus, &plus))
}

/// The two opposite-phase cross-resonance gates in circuit order:
/// `[U(-omega), U(+omega)]`, i.e. `U(+omega)` acts first.
pub fn opposite_phase_sources(pair: &CrossResonancePair, omega_mhz: f64, t_ns: f64) -> Result<Vec<ComplexMatrix>> {
    Ok(vec![
        cr_gate(pair, &DriveSpec::new(-omega_mhz, t_ns)?)?,
        cr_gate(pair, &DriveSpec::new(omega_mhz, t_ns)?)?,
    ])
}

/// Four CNOTs, each data qubit controlling the measurement qubit Q0.
pub fn syndrome_target() -> ComplexMatrix {
    (0..4).fold(ComplexMatrix::identity(32), |acc, data| &acc * &cnot_on(data, MEASUREMENT_QUBIT, 5))
}

/// Device fixtures shipped with the crate.
pub mod fixtures {
    use serde::{Deserialize, Serialize};

    use super::{CrossResonancePair, FourQubitDevice};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct CrossResonanceCase {
        pub label: String,
        pub pair: CrossResonancePair,
        pub reference_omega_tpcx_mhz: f64,
        pub reference_omega_vqgo_mhz: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct CrossResonanceTable {
        #[serde(default)]
        pub description: String,
        pub t_ns: f64,
        pub cases: Vec<CrossResonanceCase>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct FourQubitTable {
        #[serde(default)]
        pub description: String,
        pub t_ns: f64,
        pub pairs: [CrossResonancePair; 4],
        pub reference_omega_no_crosstalk_mhz: [f64; 4],
        pub reference_omega_crosstalk_mhz: [f64; 4],
    }

    impl FourQubitTable {
        pub fn device(&self) -> FourQubitDevice {
            FourQubitDevice { pairs: self.pairs }
        }
    }

    pub const TABLE1_JSON: &str = include_str!("../fixtures/table1_cr_pair.json");
    pub const TABLE2_JSON: &str = include_str!("../fixtures/table2_four_qubit.json");

    /// Two-qubit pair with its three crosstalk cases.
    pub fn cross_resonance_table() -> CrossResonanceTable {
        serde_json::from_str(TABLE1_JSON).expect("bundled fixture parses")
    }

    /// Five-qubit syndrome-extraction device.
    pub fn four_qubit_table() -> FourQubitTable {
        serde_json::from_str(TABLE2_JSON).expect("bundled fixture parses")
    }
}
