//! Dense SDP over direct sums of Hermitian PSD blocks:
//!
//! ```text
//! maximize   Σ_b tr(C_b X_b)
//! subject to Σ_b tr(A_{i,b} X_b) = r_i,   X_b ⪰ 0
//! ```
//!
//! Hermitian blocks are mapped to their real symmetric embedding and solved
//! by the interior-point method in [`ipm`].

mod ipm;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::real::RealMatrix;
use crate::linalg::{c64, is_psd, min_eigenvalue, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BlockId(pub usize);

#[derive(Clone, Debug)]
struct Constraint {
    terms: Vec<(BlockId, ComplexMatrix)>,
    rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    blocks: Vec<(String, usize)>,
    objective: Vec<Option<ComplexMatrix>>,
    constraints: Vec<Constraint>,
}

/// Orthonormal Hermitian basis of `n x n` Hermitian matrices under the
/// Hilbert-Schmidt inner product.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(j, j)] = c64(1.0, 0.0);
        out.push(m);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(j, k)] = c64(s, 0.0);
            re[(k, j)] = c64(s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(n, n);
            im[(j, k)] = c64(0.0, -s);
            im[(k, j)] = c64(0.0, s);
            out.push(im);
        }
    }
    out
}

/// Riesz representer of a real-linear functional on `n x n` Hermitian
/// matrices: the Hermitian `A` with `tr(A X) = f(X)` for all Hermitian `X`.
pub fn functional_to_matrix(n: usize, f: impl Fn(&ComplexMatrix) -> f64) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(n, n);
    for b in hermitian_basis(n) {
        let v = f(&b);
        if v != 0.0 {
            a += &b.scale_re(v);
        }
    }
    a
}

/// Linear map applied to one block, used by [`SdpProblem::add_matrix_equality`].
pub type BlockMap<'a> = (BlockId, &'a dyn Fn(&ComplexMatrix) -> ComplexMatrix);
/// Block paired with a real-linear functional.
pub type BlockFunctional<'a> = (BlockId, &'a dyn Fn(&ComplexMatrix) -> f64);

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, dim: usize) -> BlockId {
        self.blocks.push((name.into(), dim));
        self.objective.push(None);
        BlockId(self.blocks.len() - 1)
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_dim(&self, b: BlockId) -> usize {
        self.blocks[b.0].1
    }

    pub fn block_name(&self, b: BlockId) -> &str {
        &self.blocks[b.0].0
    }

    fn check_coefficient(&self, b: BlockId, m: &ComplexMatrix) -> Result<()> {
        let Some((name, dim)) = self.blocks.get(b.0) else {
            return Err(Error::Dimension(format!("unknown block {}", b.0)));
        };
        if m.rows() != *dim || m.cols() != *dim {
            return Err(Error::Dimension(format!(
                "coefficient {}x{} for block '{name}' of dimension {dim}",
                m.rows(),
                m.cols()
            )));
        }
        let herr = m.hermiticity_error();
        if herr > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herr));
        }
        Ok(())
    }

    /// Sets `C_b` (maximization). Unset blocks have zero objective.
    pub fn set_objective(&mut self, b: BlockId, c: ComplexMatrix) -> Result<()> {
        self.check_coefficient(b, &c)?;
        self.objective[b.0] = Some(c.hermitian_part());
        Ok(())
    }

    /// Adds `Σ tr(A_b X_b) = rhs`.
    pub fn add_constraint(&mut self, terms: Vec<(BlockId, ComplexMatrix)>, rhs: f64) -> Result<()> {
        if !rhs.is_finite() {
            return Err(Error::OutOfRange("non-finite constraint right-hand side".into()));
        }
        let mut clean = Vec::with_capacity(terms.len());
        for (b, a) in terms {
            self.check_coefficient(b, &a)?;
            if a.max_abs() > 0.0 {
                clean.push((b, a.hermitian_part()));
            }
        }
        self.constraints.push(Constraint { terms: clean, rhs });
        Ok(())
    }

    /// Adds `Σ_b f_b(X_b) = rhs` for real-linear functionals `f_b`.
    pub fn add_scalar_equality(
        &mut self,
        terms: &[BlockFunctional<'_>],
        rhs: f64,
    ) -> Result<()> {
        let terms = terms
            .iter()
            .map(|(b, f)| (*b, functional_to_matrix(self.block_dim(*b), f)))
            .collect();
        self.add_constraint(terms, rhs)
    }

    /// Adds the matrix equality `Σ_b L_b(X_b) = rhs` (all `dim x dim`
    /// Hermitian), one scalar constraint per Hermitian basis element. Each
    /// `L_b` must map Hermitian matrices to Hermitian matrices.
    pub fn add_matrix_equality(&mut self, dim: usize, terms: &[BlockMap<'_>], rhs: &ComplexMatrix) -> Result<()> {
        if rhs.rows() != dim || rhs.cols() != dim {
            return Err(Error::Dimension("matrix equality right-hand side".into()));
        }
        for e in hermitian_basis(dim) {
            let mut coeffs = Vec::with_capacity(terms.len());
            for (b, map) in terms {
                let f = |x: &ComplexMatrix| e.trace_product(&map(x)).re;
                coeffs.push((*b, functional_to_matrix(self.block_dim(*b), f)));
            }
            self.add_constraint(coeffs, e.trace_product(rhs).re)?;
        }
        Ok(())
    }

    /// Objective value `Σ tr(C_b X_b)` at the given blocks.
    pub fn objective_value(&self, x: &[ComplexMatrix]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .filter_map(|(c, xb)| c.as_ref().map(|c| c.trace_product(xb).re))
            .sum()
    }

    /// Largest equality violation at the given blocks.
    pub fn max_residual(&self, x: &[ComplexMatrix]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c.terms.iter().map(|(b, a)| a.trace_product(&x[b.0]).re).sum();
                (lhs - c.rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Debug dump in the documented JSON form.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Block<'a> {
            name: &'a str,
            dim: usize,
            objective: Option<MatrixJson>,
        }
        #[derive(Serialize)]
        struct Term {
            block: usize,
            coefficient: MatrixJson,
        }
        #[derive(Serialize)]
        struct Con {
            terms: Vec<Term>,
            rhs: f64,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            sense: &'static str,
            blocks: Vec<Block<'a>>,
            constraints: Vec<Con>,
        }
        let dump = Dump {
            sense: "maximize",
            blocks: self
                .blocks
                .iter()
                .zip(&self.objective)
                .map(|((name, dim), c)| Block { name, dim: *dim, objective: c.as_ref().map(MatrixJson::from) })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Con {
                    terms: c
                        .terms
                        .iter()
                        .map(|(b, a)| Term { block: b.0, coefficient: MatrixJson::from(a) })
                        .collect(),
                    rhs: c.rhs,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("problem serialization")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub blocks: Vec<ComplexMatrix>,
    /// Multipliers `w` of the dual `min r^T w  s.t.  Σ_i w_i A_i - C ⪰ 0`.
    pub dual: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    /// For infeasible problems: `w` with `Σ_i w_i A_i ⪰ 0` and `r^T w = -1`.
    pub certificate: Option<Vec<f64>>,
    pub message: String,
}

/// Solver diagnostics kept with derived quantities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub status: SdpStatus,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub min_eigenvalue: f64,
}

impl SolveStats {
    /// Gap ≤ 1e-7, residuals ≤ 1e-8, blocks PSD within 1e-8.
    pub fn meets_contract(&self) -> bool {
        self.status == SdpStatus::Optimal
            && self.gap <= 1e-7
            && self.primal_residual <= 1e-8
            && self.dual_residual <= 1e-8
            && self.min_eigenvalue >= -1e-8
    }
}

impl SdpSolution {
    pub fn stats(&self) -> SolveStats {
        SolveStats {
            status: self.status,
            gap: self.gap,
            primal_residual: self.primal_residual,
            dual_residual: self.dual_residual,
            iterations: self.iterations,
            min_eigenvalue: min_block_eigenvalue(&self.blocks),
        }
    }

    pub fn objective(&self) -> f64 {
        self.primal_objective
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    pub fn block(&self, b: BlockId) -> &ComplexMatrix {
        &self.blocks[b.0]
    }

    /// Converts a non-optimal status into an error.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            SdpStatus::Infeasible => Err(Error::Solver(format!("problem infeasible: {}", self.message))),
            SdpStatus::NumericalFailure => Err(Error::Solver(format!(
                "numerical failure after {} iterations: {} (gap {:.2e}, residuals {:.2e}/{:.2e})",
                self.iterations, self.message, self.gap, self.primal_residual, self.dual_residual
            ))),
        }
    }
}

pub const TOL_ENV_VAR: &str = "TELECERT_SOLVER_TOL";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Duality gap the iteration aims for.
    pub gap_target: f64,
    /// Largest duality gap accepted when progress stalls.
    pub gap_accept: f64,
    /// Largest primal/dual residual accepted.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 500, gap_target: 1e-9, gap_accept: 1e-7, residual_tol: 1e-8 }
    }
}

impl SolverOptions {
    /// Defaults, with the gap target overridden by `TELECERT_SOLVER_TOL`.
    pub fn from_env() -> Result<Self> {
        let mut o = Self::default();
        if let Ok(v) = std::env::var(TOL_ENV_VAR) {
            let tol: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{TOL_ENV_VAR}={v} is not a number")))?;
            o = o.with_gap_target(tol)?;
        }
        Ok(o)
    }

    pub fn with_gap_target(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::OutOfRange(format!("solver tolerance {tol} must be positive")));
        }
        self.gap_target = tol;
        self.gap_accept = self.gap_accept.max(tol);
        Ok(self)
    }
}

/// Stateless solver handle; `solve` is reentrant.
#[derive(Clone, Copy, Debug, Default)]
pub struct SdpSolver {
    pub options: SolverOptions,
}

impl SdpSolver {
    pub fn new(options: SolverOptions) -> Self {
        SdpSolver { options }
    }

    pub fn solve(&self, p: &SdpProblem) -> SdpSolution {
        let real = ipm::RealSdp {
            dims: p.blocks.iter().map(|(_, n)| 2 * n).collect(),
            c: p
                .blocks
                .iter()
                .zip(&p.objective)
                .map(|((_, n), c)| match c {
                    Some(c) => c.real_embedding().scale(-0.5),
                    None => RealMatrix::zeros(2 * n, 2 * n),
                })
                .collect(),
            a: p
                .constraints
                .iter()
                .map(|c| c.terms.iter().map(|(b, a)| (b.0, a.real_embedding().scale(0.5))).collect())
                .collect(),
            b: p.constraints.iter().map(|c| c.rhs).collect(),
            embedded: true,
        };
        let opts = ipm::IpmOptions {
            max_iter: self.options.max_iterations,
            gap_target: self.options.gap_target,
            gap_accept: self.options.gap_accept,
            residual_target: (self.options.residual_tol * 1e-2).min(self.options.gap_target),
            residual_accept: self.options.residual_tol,
        };
        let r = ipm::solve(&real, &opts);
        let blocks: Vec<ComplexMatrix> = r.x.iter().map(ComplexMatrix::from_real_embedding).collect();
        let status = match r.status {
            ipm::IpmStatus::Optimal => SdpStatus::Optimal,
            ipm::IpmStatus::PrimalInfeasible => SdpStatus::Infeasible,
            ipm::IpmStatus::DualInfeasible => SdpStatus::Infeasible,
            ipm::IpmStatus::Failed => SdpStatus::NumericalFailure,
        };
        let primal_objective = p.objective_value(&blocks);
        let dual_objective = -r.dual_objective;
        SdpSolution {
            status,
            primal_residual: p.max_residual(&blocks),
            dual_residual: r.dual_residual,
            gap: (dual_objective - primal_objective).abs(),
            blocks,
            dual: r.y.iter().map(|v| -v).collect(),
            primal_objective,
            dual_objective,
            iterations: r.iterations,
            certificate: r.ray.map(|ray| ray.iter().map(|v| -v).collect()),
            message: r.message,
        }
    }
}

/// Solves with default options.
pub fn solve(p: &SdpProblem) -> SdpSolution {
    SdpSolver::default().solve(p)
}

/// Checks `Σ_i w_i A_i ⪰ 0` and `r^T w < 0`, which proves infeasibility.
pub fn verify_infeasibility_certificate(p: &SdpProblem, w: &[f64], tol: f64) -> bool {
    if w.len() != p.constraints.len() {
        return false;
    }
    let rw: f64 = p.constraints.iter().zip(w).map(|(c, wi)| c.rhs * wi).sum();
    if rw >= 0.0 {
        return false;
    }
    let scale = -rw;
    p.blocks.iter().enumerate().all(|(k, (_, n))| {
        let mut s = ComplexMatrix::zeros(*n, *n);
        for (c, wi) in p.constraints.iter().zip(w) {
            for (b, a) in &c.terms {
                if b.0 == k {
                    s += &a.scale_re(wi / scale);
                }
            }
        }
        is_psd(&s, tol)
    })
}

/// Smallest eigenvalue over all blocks of a solution.
pub fn min_block_eigenvalue(blocks: &[ComplexMatrix]) -> f64 {
    blocks
        .iter()
        .map(|b| min_eigenvalue(b).unwrap_or(f64::NEG_INFINITY))
        .fold(f64::INFINITY, f64::min)
}
