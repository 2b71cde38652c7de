//! Qubit and two-qubit states, fidelities, negativity and assemblages.
//!
//! Subsystem A is the first tensor factor everywhere.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, is_psd, kron, partial_trace, partial_transpose, pauli, trace_norm, ComplexMatrix, Subsystem, C64,
};

pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_PSD_TOL: f64 = 1e-9;

/// Standard kets.
pub mod kets {
    use super::*;

    const S: f64 = FRAC_1_SQRT_2;

    pub fn zero() -> Vec<C64> {
        vec![c64(1.0, 0.0), c64(0.0, 0.0)]
    }
    pub fn one() -> Vec<C64> {
        vec![c64(0.0, 0.0), c64(1.0, 0.0)]
    }
    pub fn plus() -> Vec<C64> {
        vec![c64(S, 0.0), c64(S, 0.0)]
    }
    pub fn minus() -> Vec<C64> {
        vec![c64(S, 0.0), c64(-S, 0.0)]
    }
    /// `(|0> + i|1>)/√2`
    pub fn right() -> Vec<C64> {
        vec![c64(S, 0.0), c64(0.0, S)]
    }
    /// `(|0> - i|1>)/√2`
    pub fn left() -> Vec<C64> {
        vec![c64(S, 0.0), c64(0.0, -S)]
    }
    pub fn phi_plus() -> Vec<C64> {
        vec![c64(S, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(S, 0.0)]
    }
    pub fn phi_minus() -> Vec<C64> {
        vec![c64(S, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-S, 0.0)]
    }
    pub fn psi_plus() -> Vec<C64> {
        vec![c64(0.0, 0.0), c64(S, 0.0), c64(S, 0.0), c64(0.0, 0.0)]
    }
    pub fn psi_minus() -> Vec<C64> {
        vec![c64(0.0, 0.0), c64(S, 0.0), c64(-S, 0.0), c64(0.0, 0.0)]
    }

    /// Bell basis in the order φ⁺, φ⁻, ψ⁺, ψ⁻.
    pub fn bell_basis() -> [Vec<C64>; 4] {
        [phi_plus(), phi_minus(), psi_plus(), psi_minus()]
    }
}

#[derive(Clone, Debug)]
pub struct StandardKets {
    pub zero: Vec<C64>,
    pub one: Vec<C64>,
    pub plus: Vec<C64>,
    pub minus: Vec<C64>,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub phi_plus: Vec<C64>,
    pub phi_minus: Vec<C64>,
    pub psi_plus: Vec<C64>,
    pub psi_minus: Vec<C64>,
}

pub fn standard_kets() -> StandardKets {
    StandardKets {
        zero: kets::zero(),
        one: kets::one(),
        plus: kets::plus(),
        minus: kets::minus(),
        right: kets::right(),
        left: kets::left(),
        phi_plus: kets::phi_plus(),
        phi_minus: kets::phi_minus(),
        psi_plus: kets::psi_plus(),
        psi_minus: kets::psi_minus(),
    }
}

/// `<u|v>`
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Qubit input states used by tomography and the measure-prepare model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum InputLabel {
    Zero,
    One,
    Plus,
    Minus,
    Right,
    Left,
}

impl InputLabel {
    /// The four inputs of process tomography: 0, 1, +, R.
    pub const TOMOGRAPHIC: [InputLabel; 4] = [InputLabel::Zero, InputLabel::One, InputLabel::Plus, InputLabel::Right];

    pub fn ket(self) -> Vec<C64> {
        match self {
            InputLabel::Zero => kets::zero(),
            InputLabel::One => kets::one(),
            InputLabel::Plus => kets::plus(),
            InputLabel::Minus => kets::minus(),
            InputLabel::Right => kets::right(),
            InputLabel::Left => kets::left(),
        }
    }

    pub fn projector(self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.ket())
    }
}

/// Validated 2x2 or 4x4 density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_HERMITIAN_TOL, STATE_TRACE_TOL, STATE_PSD_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> Result<Self> {
        if !(matrix.is_square() && (matrix.rows() == 2 || matrix.rows() == 4)) {
            return Err(Error::Dimension(format!(
                "density matrix must be 2x2 or 4x4, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herr = matrix.hermiticity_error();
        if herr > herm_tol {
            return Err(Error::NotHermitian(herr));
        }
        let matrix = matrix.hermitian_part();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if !is_psd(&matrix, psd_tol) {
            return Err(Error::InvalidState("not positive semidefinite".into()));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn from_ket(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let scaled: Vec<C64> = v.iter().map(|z| z / norm.sqrt()).collect();
        Self::new(ComplexMatrix::projector(&scaled))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// `(1-p)|φ⁺><φ⁺| + (p/4) I⊗I`
pub fn werner(p_noise: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_noise) {
        return Err(Error::OutOfRange(format!("noise {p_noise} outside [0, 1]")));
    }
    let phi = ComplexMatrix::projector(&kets::phi_plus());
    DensityMatrix::new(phi.scale_re(1.0 - p_noise) + ComplexMatrix::identity(4).scale_re(p_noise / 4.0))
}

/// `<ψ|ρ|ψ>`
pub fn state_fidelity(rho: &DensityMatrix, pure: &[C64]) -> Result<f64> {
    if pure.len() != rho.dim() {
        return Err(Error::Dimension(format!("ket of length {} against {}x{} state", pure.len(), rho.dim(), rho.dim())));
    }
    let m = rho.matrix();
    let mut f = c64(0.0, 0.0);
    for i in 0..pure.len() {
        for j in 0..pure.len() {
            f += pure[i].conj() * m[(i, j)] * pure[j];
        }
    }
    Ok(f.re)
}

/// `(||ρ^{T_A}||_1 - 1)/2`
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Dimension("negativity needs a two-qubit state".into()));
    }
    let pt = partial_transpose(rho.matrix(), Subsystem::A)?;
    Ok(((trace_norm(&pt)? - 1.0) / 2.0).max(0.0))
}

/// Dichotomic projective measurement `{Π₊, Π₋}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryMeasurement {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
}

impl BinaryMeasurement {
    pub fn new(plus: ComplexMatrix, minus: ComplexMatrix) -> Result<Self> {
        let m = BinaryMeasurement { plus, minus };
        m.validate()?;
        Ok(m)
    }

    /// Projectors onto the ±1 eigenspaces of a Pauli-like observable `O`.
    pub fn from_observable(o: &ComplexMatrix) -> Result<Self> {
        let id = ComplexMatrix::identity(o.rows());
        Self::new((&id + o).scale_re(0.5), (&id - o).scale_re(0.5))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.plus.rows();
        if !(self.plus.is_square() && self.minus.rows() == n && self.minus.is_square()) {
            return Err(Error::InvalidMeasurement("projector dimensions differ".into()));
        }
        let sum = &self.plus + &self.minus;
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(n));
        if dev > 1e-10 {
            return Err(Error::InvalidMeasurement(format!("projectors sum to identity only within {dev:.2e}")));
        }
        for p in [&self.plus, &self.minus] {
            if !p.is_hermitian(1e-10) || (p * p).max_abs_diff(p) > 1e-9 {
                return Err(Error::InvalidMeasurement("element is not a projector".into()));
            }
        }
        Ok(())
    }

    /// Outcome `a` with index 0 for +1 and 1 for -1.
    pub fn element(&self, a: usize) -> &ComplexMatrix {
        if a == 0 {
            &self.plus
        } else {
            &self.minus
        }
    }
}

/// Pauli X, Y, Z measurements.
pub fn pauli_settings() -> [BinaryMeasurement; 3] {
    [pauli::x(), pauli::y(), pauli::z()].map(|o| BinaryMeasurement::from_observable(&o).expect("Pauli projectors"))
}

/// Unnormalized conditional states `ρ_{a|k}`; `members[k][a]` with `a = 0`
/// for outcome +1 and `a = 1` for -1.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    members: Vec<[ComplexMatrix; 2]>,
}

impl Assemblage {
    pub fn new(members: Vec<[ComplexMatrix; 2]>) -> Result<Self> {
        let a = Assemblage { members };
        a.validate(1e-9)?;
        Ok(a)
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::InvalidMeasurement("empty assemblage".into()));
        }
        let reduced = self.reduced(0);
        for (k, pair) in self.members.iter().enumerate() {
            for m in pair {
                if m.rows() != 2 || !m.is_square() {
                    return Err(Error::Dimension("assemblage members must be 2x2".into()));
                }
                if !is_psd(m, tol) {
                    return Err(Error::InvalidState(format!("member of setting {k} is not PSD")));
                }
            }
            let dev = self.reduced(k).max_abs_diff(&reduced);
            if dev > tol {
                return Err(Error::InvalidState(format!("signalling assemblage: setting {k} deviates by {dev:.2e}")));
            }
        }
        Ok(())
    }

    pub fn num_settings(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, k: usize, a: usize) -> &ComplexMatrix {
        &self.members[k][a]
    }

    pub fn members(&self) -> &[[ComplexMatrix; 2]] {
        &self.members
    }

    /// `Σ_a ρ_{a|k}`, Bob's reduced state.
    pub fn reduced(&self, k: usize) -> ComplexMatrix {
        &self.members[k][0] + &self.members[k][1]
    }
}

/// `ρ_{a|k} = tr_A[(Π_{a|k} ⊗ I) ρ]`
pub fn assemblage(rho: &DensityMatrix, settings: &[BinaryMeasurement]) -> Result<Assemblage> {
    if rho.dim() != 4 {
        return Err(Error::Dimension("assemblage needs a two-qubit state".into()));
    }
    let id = ComplexMatrix::identity(2);
    let mut members = Vec::with_capacity(settings.len());
    for s in settings {
        s.validate()?;
        if s.plus.rows() != 2 {
            return Err(Error::InvalidMeasurement("settings must act on a qubit".into()));
        }
        let cond = |p: &ComplexMatrix| -> Result<ComplexMatrix> {
            Ok(partial_trace(&(&kron(p, &id) * rho.matrix()), Subsystem::B)?.hermitian_part())
        };
        members.push([cond(&s.plus)?, cond(&s.minus)?]);
    }
    Assemblage::new(members)
}

/// Product state `ρ_A ⊗ ρ_B`.
pub fn product_state(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(kron(a.matrix(), b.matrix()))
}
