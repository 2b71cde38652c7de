//! Steerable weight of an assemblage.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, min_eigenvalue, ComplexMatrix};
use crate::quantum::Assemblage;
use crate::sdp::{BlockId, BlockMap, SdpProblem, SdpSolver, SdpStatus, SolveStats};

const WITNESS_TOL: f64 = 1e-8;

/// Outcome table `a_k(λ) ∈ {+1, -1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    pub outcomes: Vec<i8>,
}

impl DeterministicStrategy {
    /// `D(a|k, λ)` with `a = 0` for +1 and `a = 1` for -1.
    pub fn response(&self, k: usize, a: usize) -> f64 {
        let target = if a == 0 { 1 } else { -1 };
        if self.outcomes[k] == target {
            1.0
        } else {
            0.0
        }
    }
}

/// All `2^n` strategies in lexicographic order (+1 before -1, first setting
/// most significant).
pub fn deterministic_strategies(n_settings: usize) -> Result<Vec<DeterministicStrategy>> {
    if n_settings == 0 || n_settings > 16 {
        return Err(Error::OutOfRange(format!("{n_settings} settings")));
    }
    Ok((0..1usize << n_settings)
        .map(|lambda| DeterministicStrategy {
            outcomes: (0..n_settings)
                .map(|k| if (lambda >> (n_settings - 1 - k)) & 1 == 0 { 1 } else { -1 })
                .collect(),
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct SteerableWeight {
    pub sw: f64,
    /// Local hidden states `σ_λ` in strategy order.
    pub witness: Vec<ComplexMatrix>,
    pub stats: SolveStats,
}

/// Largest violation of `Σ_λ D(a|k,λ) σ_λ ⪯ ρ_{a|k}` and of `σ_λ ⪰ 0`
/// (positive means violated).
pub fn lhs_violation(asm: &Assemblage, witness: &[ComplexMatrix]) -> Result<f64> {
    let strategies = deterministic_strategies(asm.num_settings())?;
    if witness.len() != strategies.len() {
        return Err(Error::Dimension(format!("{} hidden states for {} strategies", witness.len(), strategies.len())));
    }
    let mut worst = f64::NEG_INFINITY;
    for s in witness {
        worst = worst.max(-min_eigenvalue(s)?);
    }
    for k in 0..asm.num_settings() {
        for a in 0..2 {
            let mut rest = asm.member(k, a).clone();
            for (st, s) in strategies.iter().zip(witness) {
                rest = &rest - &s.scale_re(st.response(k, a));
            }
            worst = worst.max(-min_eigenvalue(&rest)?);
        }
    }
    Ok(worst)
}

/// `SW = 1 - μ*`, `μ* = max Σ tr σ_λ` s.t. `σ_λ ⪰ 0`,
/// `Σ_λ D(a|k,λ) σ_λ ⪯ ρ_{a|k}`.
pub fn steerable_weight(asm: &Assemblage, solver: &SdpSolver) -> Result<SteerableWeight> {
    let n = asm.num_settings();
    let strategies = deterministic_strategies(n)?;
    let mut p = SdpProblem::new();
    let sigma: Vec<BlockId> = (0..strategies.len()).map(|l| p.add_block(format!("lhs_{l}"), 2)).collect();
    for b in &sigma {
        p.set_objective(*b, ComplexMatrix::identity(2))?;
    }
    let identity = |x: &ComplexMatrix| x.clone();
    for k in 0..n {
        for a in 0..2 {
            let slack = p.add_block(format!("slack_{k}_{a}"), 2);
            let mut terms: Vec<BlockMap<'_>> = vec![(slack, &identity)];
            for (st, b) in strategies.iter().zip(&sigma) {
                if st.response(k, a) != 0.0 {
                    terms.push((*b, &identity));
                }
            }
            p.add_matrix_equality(2, &terms, asm.member(k, a))?;
        }
    }
    let s = solver.solve(&p);
    if s.status != SdpStatus::Optimal {
        return Err(Error::Solver(format!("steerable weight: {:?} ({})", s.status, s.message)));
    }
    let stats = s.stats();
    let witness: Vec<ComplexMatrix> = sigma.iter().map(|b| s.blocks[b.0].clone()).collect();
    let violation = lhs_violation(asm, &witness)?;
    if violation > WITNESS_TOL || !witness.iter().all(|w| is_psd(w, WITNESS_TOL)) {
        return Err(Error::Solver(format!("steerable weight witness failed re-verification ({violation:.2e})")));
    }
    let mu: f64 = witness.iter().map(|w| w.trace().re).sum();
    let total = asm.reduced(0).trace().re;
    let sw = ((total - mu) / total).clamp(0.0, 1.0);
    Ok(SteerableWeight { sw, witness, stats })
}
