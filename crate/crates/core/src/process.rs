//! Single-qubit process matrices.
//!
//! Basis convention: `M_k = |k₁><k₂|` with 0-based index `k = k₁ + 2 k₂`
//! (`k₁` output, `k₂` input), so `χ` is the Choi matrix
//! `½ Σ_ij |i><j| ⊗ E(|i><j|)` with the input as the first factor. The map
//! acts as `E(ρ) = 2 Σ_kj χ_kj M_k ρ M_j†`.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::linalg::{c64, is_psd, ComplexMatrix, C64};
use crate::quantum::{kets, DensityMatrix, InputLabel};

pub const PROCESS_HERMITIAN_TOL: f64 = 1e-10;
pub const PROCESS_TRACE_TOL: f64 = 1e-10;
pub const PROCESS_PSD_TOL: f64 = 1e-9;
/// Largest trace deviation `apply_process` tolerates before reporting.
pub const APPLY_TRACE_TOL: f64 = 1e-8;
const FIDELITY_SLACK: f64 = 1e-9;

/// 4x4 Hermitian trace-1 process matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessMatrix {
    matrix: ComplexMatrix,
}

impl ProcessMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, PROCESS_HERMITIAN_TOL, PROCESS_TRACE_TOL)
    }

    /// Validates within `tol` and stores the Hermitian part; the trace is
    /// renormalized to exactly 1.
    pub fn with_tolerance(matrix: ComplexMatrix, herm_tol: f64, trace_tol: f64) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::Dimension(format!(
                "process matrix must be 4x4, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidProcess("non-finite entry".into()));
        }
        let herr = matrix.hermiticity_error();
        if herr > herm_tol {
            return Err(Error::NotHermitian(herr));
        }
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if (tr - 1.0).abs() > trace_tol {
            return Err(Error::InvalidProcess(format!("trace {tr} differs from 1")));
        }
        Ok(ProcessMatrix { matrix: h.scale_re(1.0 / tr) })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Physical (completely positive) within `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        is_psd(&self.matrix, tol)
    }

    pub fn is_physical(&self) -> bool {
        self.is_psd(PROCESS_PSD_TOL)
    }

    /// The four tomographic outputs `[ρ₀, ρ₁, ρ₊, ρ_R]` implied by `χ`.
    pub fn outputs(&self) -> [ComplexMatrix; 4] {
        disassemble(&self.matrix)
    }

    /// Largest deviation of an implied output trace from 1.
    pub fn trace_preservation_error(&self) -> f64 {
        self.outputs().iter().map(|o| (o.trace().re - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Tomographic outputs for the inputs 0, 1, +, R.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessOutputs {
    pub rho_0: DensityMatrix,
    pub rho_1: DensityMatrix,
    pub rho_plus: DensityMatrix,
    pub rho_r: DensityMatrix,
}

impl ProcessOutputs {
    pub fn matrices(&self) -> [&ComplexMatrix; 4] {
        [self.rho_0.matrix(), self.rho_1.matrix(), self.rho_plus.matrix(), self.rho_r.matrix()]
    }
}

fn i_tilde_factor() -> C64 {
    C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, FRAC_PI_4)
}

/// Linear assembly of `χ` from (possibly unnormalized) outputs
/// `ρ₀, ρ₁, ρ₊, ρ_R`. No validation.
pub fn assemble_raw(o0: &ComplexMatrix, o1: &ComplexMatrix, op: &ComplexMatrix, or: &ComplexMatrix) -> ComplexMatrix {
    let i_tilde = (o0 + o1).scale(i_tilde_factor());
    let upper = &(op + &or.scale(c64(0.0, 1.0))) - &i_tilde;
    let mut chi = ComplexMatrix::zeros(4, 4);
    for r in 0..2 {
        for c in 0..2 {
            chi[(r, c)] = o0[(r, c)] * 0.5;
            chi[(r + 2, c + 2)] = o1[(r, c)] * 0.5;
            chi[(r, c + 2)] = upper[(r, c)] * 0.5;
            chi[(r + 2, c)] = upper[(c, r)].conj() * 0.5;
        }
    }
    chi
}

/// Inverse of [`assemble_raw`] on Hermitian `χ`.
pub fn disassemble(chi: &ComplexMatrix) -> [ComplexMatrix; 4] {
    let block = |r0: usize, c0: usize| {
        let mut b = ComplexMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                b[(r, c)] = chi[(r0 + r, c0 + c)] * 2.0;
            }
        }
        b
    };
    let o0 = block(0, 0).hermitian_part();
    let o1 = block(2, 2).hermitian_part();
    // ρ₊ + iρ_R = 2 χ₀₁ + Ĩ
    let b = &block(0, 2) + &(&o0 + &o1).scale(i_tilde_factor());
    let bd = b.dagger();
    let op = (&b + &bd).scale_re(0.5);
    let or = (&b - &bd).scale(c64(0.0, -0.5));
    [o0, o1, op, or]
}

pub fn assemble_process(o: &ProcessOutputs) -> Result<ProcessMatrix> {
    let [a, b, c, d] = o.matrices();
    ProcessMatrix::new(assemble_raw(a, b, c, d))
}

/// Ideal teleportation (identity channel): `|φ⁺><φ⁺|`.
pub fn chi_ideal() -> ProcessMatrix {
    ProcessMatrix::new(ComplexMatrix::projector(&kets::phi_plus())).expect("ideal process")
}

/// `2 Σ_kj χ_kj M_k ρ M_j†` without validation.
pub fn apply_process_raw(chi: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    // M_k ρ M_j† = ρ[i_k, i_j] |o_k><o_j| with k = o + 2i.
    for k in 0..4 {
        let (ok, ik) = (k % 2, k / 2);
        for j in 0..4 {
            let (oj, ij) = (j % 2, j / 2);
            out[(ok, oj)] += chi[(k, j)] * rho[(ik, ij)] * 2.0;
        }
    }
    out
}

/// Applies `χ` to a qubit state. A trace deviation above `1e-8` is an error;
/// the output is not renormalized.
pub fn apply_process(chi: &ProcessMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != 2 {
        return Err(Error::Dimension("process acts on a qubit".into()));
    }
    let out = apply_process_raw(chi.matrix(), rho.matrix());
    let dev = (out.trace().re - 1.0).abs();
    if dev > APPLY_TRACE_TOL {
        return Err(Error::TraceNotPreserved(dev));
    }
    DensityMatrix::with_tolerance(out, 1e-9, APPLY_TRACE_TOL, 1e-9)
}

/// `Re tr(a b)`, with round-off just outside `[0, 1]` clamped.
pub fn process_fidelity(a: &ProcessMatrix, b: &ProcessMatrix) -> f64 {
    let f = a.matrix().trace_product(b.matrix()).re;
    if (-FIDELITY_SLACK..0.0).contains(&f) {
        0.0
    } else if f > 1.0 && f <= 1.0 + FIDELITY_SLACK {
        1.0
    } else {
        f
    }
}

/// `(2F + 1)/3`
pub fn avg_state_fidelity(f_process: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_process) {
        return Err(Error::OutOfRange(format!("process fidelity {f_process} outside [0, 1]")));
    }
    Ok((2.0 * f_process + 1.0) / 3.0)
}

/// `(3F̄ - 1)/2`
pub fn process_fidelity_from_avg(f_avg: f64) -> Result<f64> {
    if !(1.0 / 3.0..=1.0).contains(&f_avg) {
        return Err(Error::OutOfRange(format!("average state fidelity {f_avg} outside [1/3, 1]")));
    }
    Ok((3.0 * f_avg - 1.0) / 2.0)
}

/// Bell-basis corrections `E = I, Z, X, Y` for φ⁺, φ⁻, ψ⁺, ψ⁻.
fn bell_corrections() -> [ComplexMatrix; 4] {
    use crate::linalg::pauli;
    [pauli::i2(), pauli::z(), pauli::x(), pauli::y()]
}

/// Process of ideal teleportation through a noisy resource state:
/// `ρ_out = Σ_bd f_bd E_b ρ_in E_d†` with `f_bd = <b|ρ|d>` in the Bell basis.
pub fn resource_to_process(resource: &DensityMatrix) -> Result<ProcessMatrix> {
    if resource.dim() != 4 {
        return Err(Error::Dimension("resource must be a two-qubit state".into()));
    }
    let bell = kets::bell_basis();
    let e = bell_corrections();
    let m = resource.matrix();
    let mut f = [[c64(0.0, 0.0); 4]; 4];
    for b in 0..4 {
        for d in 0..4 {
            let mut s = c64(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    s += bell[b][i].conj() * m[(i, j)] * bell[d][j];
                }
            }
            f[b][d] = s;
        }
    }
    let outputs: Vec<ComplexMatrix> = InputLabel::TOMOGRAPHIC
        .iter()
        .map(|l| {
            let rho_in = l.projector();
            let mut out = ComplexMatrix::zeros(2, 2);
            for b in 0..4 {
                for d in 0..4 {
                    out += &(&(&e[b] * &rho_in) * &e[d].dagger()).scale(f[b][d]);
                }
            }
            out.hermitian_part()
        })
        .collect();
    ProcessMatrix::new(assemble_raw(&outputs[0], &outputs[1], &outputs[2], &outputs[3]))
}
