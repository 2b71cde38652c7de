//! The classical-teleportation cone and its SDPs.
//!
//! A recipe is eight unnormalized hidden states `σ_ξ = P(λ_ξ) ρ_ξ`. The
//! 0-based index `ξ` encodes Alice's predetermined outcomes for X, Y, Z as
//! bits `(b_X, b_Y, b_Z)` of `ξ = 4 b_X + 2 b_Y + b_Z`, with bit 0 meaning
//! outcome +1. The four tomographic outputs are
//!
//! ```text
//! ρ₀ = 2 Σ_{b_Z=0} σ_ξ   ρ₁ = 2 Σ_{b_Z=1} σ_ξ   ρ₊ = 2 Σ_{b_X=0} σ_ξ   ρ_R = 2 Σ_{b_Y=0} σ_ξ
//! ```
//!
//! assembled into `χ̃` by [`assemble_raw`].

mod measure_prepare;

pub use measure_prepare::*;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_psd, min_eigenvalue, ComplexMatrix};
use crate::process::{assemble_raw, chi_ideal, process_fidelity, ProcessMatrix};
use crate::sdp::{BlockId, BlockMap, SdpProblem, SdpSolver, SdpStatus, SolveStats};

type LinearMap = dyn Fn(&ComplexMatrix) -> ComplexMatrix;

pub const NUM_HIDDEN: usize = 8;
/// Tolerance of the recipe invariants (PSD, normalization, marginals).
pub const RECIPE_TOL: f64 = 1e-9;
/// Largest entrywise deviation accepted by [`verify_recipe`].
pub const RECIPE_MATCH_TOL: f64 = 1e-7;
/// Tolerance used when re-verifying solver witnesses.
pub const WITNESS_TOL: f64 = 1e-8;
/// Margins below `λ_min(χ)` tried in order for non-PSD `χ`.
pub const RELAX_MARGINS: [f64; 4] = [0.0, 1e-6, 1e-5, 1e-4];

/// Settings in bit order: X, Y, Z.
pub const SETTINGS: [char; 3] = ['X', 'Y', 'Z'];

/// Outcome bit of setting `k` (0 = X, 1 = Y, 2 = Z) for hidden state `xi`;
/// 0 means +1.
pub const fn outcome_bit(xi: usize, k: usize) -> usize {
    (xi >> (2 - k)) & 1
}

/// Outcome ±1 of setting `k` for hidden state `xi`.
pub const fn outcome(xi: usize, k: usize) -> i8 {
    if outcome_bit(xi, k) == 0 {
        1
    } else {
        -1
    }
}

/// Whether hidden state `xi` contributes to output `j` of `[ρ₀, ρ₁, ρ₊, ρ_R]`.
pub const fn contributes(xi: usize, j: usize) -> bool {
    match j {
        0 => outcome_bit(xi, 2) == 0,
        1 => outcome_bit(xi, 2) == 1,
        2 => outcome_bit(xi, 0) == 0,
        _ => outcome_bit(xi, 1) == 0,
    }
}

/// Outputs `[ρ₀, ρ₁, ρ₊, ρ_R]` of eight (unnormalized) hidden states.
pub fn recipe_outputs_raw(sigma: &[ComplexMatrix]) -> [ComplexMatrix; 4] {
    std::array::from_fn(|j| {
        let mut out = ComplexMatrix::zeros(2, 2);
        for (xi, s) in sigma.iter().enumerate() {
            if contributes(xi, j) {
                out += &s.scale_re(2.0);
            }
        }
        out
    })
}

/// `χ̃` of eight (unnormalized) hidden states; linear, no validation.
pub fn recipe_chi_raw(sigma: &[ComplexMatrix]) -> ComplexMatrix {
    let [a, b, c, d] = recipe_outputs_raw(sigma);
    assemble_raw(&a, &b, &c, &d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalRecipe {
    sigma: Vec<ComplexMatrix>,
}

impl ClassicalRecipe {
    /// Eight Hermitian 2x2 matrices; the cone invariants are checked
    /// separately by [`ClassicalRecipe::check`].
    pub fn new(sigma: Vec<ComplexMatrix>) -> Result<Self> {
        if sigma.len() != NUM_HIDDEN {
            return Err(Error::InvalidRecipe(format!("expected 8 hidden states, got {}", sigma.len())));
        }
        for s in &sigma {
            if s.rows() != 2 || s.cols() != 2 {
                return Err(Error::Dimension("hidden states must be 2x2".into()));
            }
            let herr = s.hermiticity_error();
            if herr > 1e-10 {
                return Err(Error::NotHermitian(herr));
            }
        }
        Ok(ClassicalRecipe { sigma: sigma.into_iter().map(|s| s.hermitian_part()).collect() })
    }

    /// `σ_ξ = p_ξ ρ_ξ`.
    pub fn from_parts(probabilities: &[f64], states: &[ComplexMatrix]) -> Result<Self> {
        if probabilities.len() != NUM_HIDDEN || states.len() != NUM_HIDDEN {
            return Err(Error::InvalidRecipe("expected 8 probabilities and states".into()));
        }
        Self::new(probabilities.iter().zip(states).map(|(p, s)| s.scale_re(*p)).collect())
    }

    pub fn sigma(&self) -> &[ComplexMatrix] {
        &self.sigma
    }

    /// `P(λ_ξ) = tr σ_ξ`
    pub fn probability(&self, xi: usize) -> f64 {
        self.sigma[xi].trace().re
    }

    /// `ρ_ξ = σ_ξ / tr σ_ξ`, or `None` for zero weight.
    pub fn hidden_state(&self, xi: usize) -> Option<ComplexMatrix> {
        let p = self.probability(xi);
        (p.abs() > 1e-15).then(|| self.sigma[xi].scale_re(1.0 / p))
    }

    pub fn total_weight(&self) -> f64 {
        (0..NUM_HIDDEN).map(|xi| self.probability(xi)).sum()
    }

    /// `Σ_{a_k(ξ)=+1} tr σ_ξ - ½ Σ_ξ tr σ_ξ` for each setting.
    pub fn marginal_errors(&self) -> [f64; 3] {
        let total = self.total_weight();
        std::array::from_fn(|k| {
            (0..NUM_HIDDEN).filter(|&xi| outcome_bit(xi, k) == 0).map(|xi| self.probability(xi)).sum::<f64>()
                - 0.5 * total
        })
    }

    /// Checks PSD, normalization and marginal conditions within `tol`.
    pub fn check(&self, tol: f64) -> std::result::Result<(), String> {
        for (xi, s) in self.sigma.iter().enumerate() {
            if !is_psd(s, tol) {
                return Err(format!("σ_{} is not PSD", xi + 1));
            }
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > tol {
            return Err(format!("total weight {total} differs from 1"));
        }
        for (k, e) in self.marginal_errors().iter().enumerate() {
            if e.abs() > tol {
                return Err(format!("marginal condition for {} violated by {e:.2e}", SETTINGS[k]));
            }
        }
        Ok(())
    }

    /// Unit-trace hidden states on their own; the weights are still free.
    pub fn outputs(&self) -> [ComplexMatrix; 4] {
        recipe_outputs_raw(&self.sigma)
    }
}

/// `χ` of a normalized recipe satisfying the marginal conditions.
pub fn recipe_to_process(r: &ClassicalRecipe) -> Result<ProcessMatrix> {
    for (k, e) in r.marginal_errors().iter().enumerate() {
        if e.abs() > RECIPE_TOL {
            return Err(Error::InvalidRecipe(format!(
                "marginal condition for {} violated by {e:.2e}; outputs would not be unit trace",
                SETTINGS[k]
            )));
        }
    }
    let total = r.total_weight();
    if (total - 1.0).abs() > RECIPE_TOL {
        return Err(Error::InvalidRecipe(format!("total weight {total} differs from 1")));
    }
    ProcessMatrix::with_tolerance(recipe_chi_raw(r.sigma()), 1e-10, 2.0 * RECIPE_TOL)
}

#[derive(Clone, Debug, Serialize)]
pub struct RecipeCheck {
    pub valid: bool,
    pub max_deviation: f64,
    pub violation: Option<String>,
}

/// Recipe invariants plus `‖χ(r) - χ‖_max ≤ 1e-7`.
pub fn verify_recipe(r: &ClassicalRecipe, chi: &ProcessMatrix) -> RecipeCheck {
    let max_deviation = recipe_chi_raw(r.sigma()).max_abs_diff(chi.matrix());
    let violation = match r.check(RECIPE_TOL) {
        Err(e) => Some(e),
        Ok(()) if max_deviation > RECIPE_MATCH_TOL => {
            Some(format!("recipe process deviates by {max_deviation:.2e}"))
        }
        Ok(()) => None,
    };
    RecipeCheck { valid: violation.is_none(), max_deviation, violation }
}

/// Blocks of the cone parametrization within one SDP.
struct Cone {
    sigma: Vec<BlockId>,
}

fn hidden_map(xi: usize) -> impl Fn(&ComplexMatrix) -> ComplexMatrix {
    move |x: &ComplexMatrix| {
        let mut sigma = vec![ComplexMatrix::zeros(2, 2); NUM_HIDDEN];
        sigma[xi] = x.clone();
        recipe_chi_raw(&sigma)
    }
}

impl Cone {
    /// Eight σ blocks with the (unnormalized) marginal conditions.
    fn add(p: &mut SdpProblem) -> Result<Self> {
        let sigma: Vec<BlockId> = (0..NUM_HIDDEN).map(|xi| p.add_block(format!("sigma_{}", xi + 1), 2)).collect();
        let id = ComplexMatrix::identity(2);
        for k in 0..3 {
            let terms = sigma
                .iter()
                .enumerate()
                .map(|(xi, b)| (*b, id.scale_re(if outcome_bit(xi, k) == 0 { 0.5 } else { -0.5 })))
                .collect();
            p.add_constraint(terms, 0.0)?;
        }
        Ok(Cone { sigma })
    }

    /// `χ̃(σ) + sign · slack = rhs`, or `χ̃(σ) = rhs` without slack.
    fn add_chi_equality(
        &self,
        p: &mut SdpProblem,
        slack: Option<(BlockId, f64)>,
        rhs: &ComplexMatrix,
    ) -> Result<()> {
        let maps: Vec<Box<LinearMap>> = (0..NUM_HIDDEN).map(|xi| Box::new(hidden_map(xi)) as Box<LinearMap>).collect();
        let slack_map = slack.map(|(_, s)| move |x: &ComplexMatrix| x.scale_re(s));
        let mut terms: Vec<BlockMap<'_>> = self.sigma.iter().zip(&maps).map(|(b, m)| (*b, m.as_ref())).collect();
        if let (Some((b, _)), Some(f)) = (slack, slack_map.as_ref()) {
            terms.push((b, f));
        }
        p.add_matrix_equality(4, &terms, rhs)
    }

    /// Adds a 4x4 slack block enforcing `χ̃(σ) ⪰ 0`.
    fn add_assembled_psd(&self, p: &mut SdpProblem) -> Result<BlockId> {
        let s = p.add_block("chi_tilde", 4);
        self.add_chi_equality(p, Some((s, -1.0)), &ComplexMatrix::zeros(4, 4))?;
        Ok(s)
    }

    fn extract(&self, blocks: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
        self.sigma.iter().map(|b| blocks[b.0].clone()).collect()
    }
}

fn solve_checked(solver: &SdpSolver, p: &SdpProblem, what: &str) -> Result<(Vec<ComplexMatrix>, SolveStats)> {
    let s = solver.solve(p);
    let stats = s.stats();
    match s.status {
        SdpStatus::Optimal => Ok((s.blocks, stats)),
        _ => Err(Error::Solver(format!("{what}: {:?} ({})", s.status, s.message))),
    }
}

/// Checks unnormalized σ: PSD and marginals (relative to the total weight).
fn check_unnormalized(sigma: &[ComplexMatrix], tol: f64) -> std::result::Result<(), String> {
    let r = ClassicalRecipe { sigma: sigma.to_vec() };
    for (xi, s) in sigma.iter().enumerate() {
        if !is_psd(s, tol) {
            return Err(format!("σ_{} is not PSD", xi + 1));
        }
    }
    for (k, e) in r.marginal_errors().iter().enumerate() {
        if e.abs() > tol {
            return Err(format!("marginal condition for {} violated by {e:.2e}", SETTINGS[k]));
        }
    }
    let chi = recipe_chi_raw(sigma);
    let lmin = min_eigenvalue(&chi).unwrap_or(f64::NEG_INFINITY);
    if lmin < -tol {
        return Err(format!("assembled χ̃ has eigenvalue {lmin:.2e}"));
    }
    Ok(())
}

fn witness_error(what: &str, e: String) -> Error {
    Error::Solver(format!("{what} witness failed re-verification: {e}"))
}

/// Maximal process fidelity of classical teleportation.
#[derive(Clone, Debug)]
pub struct ClassicalBound {
    pub f_ct: f64,
    pub witness: ClassicalRecipe,
    pub stats: SolveStats,
}

/// Closed form `(1 + √3)/4` of the classical bound.
pub fn f_ct_closed_form() -> f64 {
    (1.0 + 3f64.sqrt()) / 4.0
}

/// `max tr(χ_I χ̃(σ))` over normalized recipes; the value is re-evaluated
/// from the witness outside the solver.
pub fn classical_bound(solver: &SdpSolver) -> Result<ClassicalBound> {
    let mut p = SdpProblem::new();
    let cone = Cone::add(&mut p)?;
    cone.add_assembled_psd(&mut p)?;
    let id = ComplexMatrix::identity(2);
    p.add_constraint(cone.sigma.iter().map(|b| (*b, id.clone())).collect(), 1.0)?;
    let ideal = chi_ideal();
    for (xi, b) in cone.sigma.iter().enumerate() {
        let f = hidden_map(xi);
        let c = crate::sdp::functional_to_matrix(2, |x| ideal.matrix().trace_product(&f(x)).re);
        p.set_objective(*b, c)?;
    }
    let (blocks, stats) = solve_checked(solver, &p, "classical bound")?;
    let witness = ClassicalRecipe::new(cone.extract(&blocks))?;
    witness.check(RECIPE_TOL).map_err(|e| witness_error("classical bound", e))?;
    let chi = recipe_to_process(&witness)?;
    if !chi.is_psd(WITNESS_TOL) {
        return Err(witness_error("classical bound", "assembled process is not PSD".into()));
    }
    let f_ct = process_fidelity(&ideal, &chi);
    Ok(ClassicalBound { f_ct, witness, stats })
}

fn validate_target(chi: &ProcessMatrix) -> Result<()> {
    let herr = chi.matrix().hermiticity_error();
    if herr > 1e-10 {
        return Err(Error::NotHermitian(herr));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct QuantumComposition {
    pub alpha: f64,
    /// Unnormalized classical part `σ` with `χ̃(σ) ⪯ χ`.
    pub classical_part: Vec<ComplexMatrix>,
    /// `(χ - χ̃)/α` when `α > 0`.
    pub quantum_part: Option<ComplexMatrix>,
    /// `-λ_min(χ)` plus the margin from [`RELAX_MARGINS`] that converged when
    /// `χ` is not PSD, else 0.
    pub relaxation: f64,
    pub stats: SolveStats,
}

/// `α = min 1 - Σ tr σ_ξ` subject to `χ - χ̃(σ) ⪰ 0`.
///
/// For a non-PSD `χ` (noisy tomography) the constraint is relaxed to
/// `χ - χ̃(σ) ⪰ λ_min(χ) I`, which keeps `σ = 0` feasible.
pub fn quantum_composition(chi: &ProcessMatrix, solver: &SdpSolver) -> Result<QuantumComposition> {
    validate_target(chi)?;
    let lmin_chi = min_eigenvalue(chi.matrix())?;
    if lmin_chi >= 0.0 {
        return composition_with_shift(chi, 0.0, solver);
    }
    // A relaxed target with an exact zero eigenvalue leaves the primal without
    // an interior point; widen the margin until the solver converges.
    let mut last = None;
    for margin in RELAX_MARGINS {
        match composition_with_shift(chi, lmin_chi - margin, solver) {
            Err(Error::Solver(msg)) => last = Some(Error::Solver(msg)),
            other => return other,
        }
    }
    Err(last.expect("at least one margin"))
}

fn composition_with_shift(chi: &ProcessMatrix, shift: f64, solver: &SdpSolver) -> Result<QuantumComposition> {
    let mut p = SdpProblem::new();
    let cone = Cone::add(&mut p)?;
    cone.add_assembled_psd(&mut p)?;
    let target = chi.matrix() - &ComplexMatrix::identity(4).scale_re(shift);
    let rest = p.add_block("quantum_part", 4);
    cone.add_chi_equality(&mut p, Some((rest, 1.0)), &target)?;
    for b in &cone.sigma {
        p.set_objective(*b, ComplexMatrix::identity(2))?;
    }
    let (blocks, stats) = solve_checked(solver, &p, "quantum composition")?;
    let sigma = cone.extract(&blocks);
    check_unnormalized(&sigma, WITNESS_TOL).map_err(|e| witness_error("quantum composition", e))?;
    let chi_ct = recipe_chi_raw(&sigma);
    let diff = chi.matrix() - &chi_ct;
    let lmin = min_eigenvalue(&diff)?;
    if lmin < shift - WITNESS_TOL {
        return Err(witness_error("quantum composition", format!("χ - χ̃ has eigenvalue {lmin:.2e}")));
    }
    let weight: f64 = sigma.iter().map(|s| s.trace().re).sum();
    let alpha = (1.0 - weight).clamp(0.0, 1.0);
    let quantum_part = (alpha > 1e-9).then(|| diff.scale_re(1.0 / (1.0 - weight)));
    Ok(QuantumComposition { alpha, classical_part: sigma, quantum_part, relaxation: -shift, stats })
}

#[derive(Clone, Debug)]
pub struct QuantumRobustness {
    pub beta: f64,
    /// Unnormalized classical process `σ` with `χ̃(σ) ⪰ χ`.
    pub classical_part: Vec<ComplexMatrix>,
    /// Noise process `χ' = (χ̃ - χ)/β` when `β > 0`.
    pub noise: Option<ComplexMatrix>,
    pub stats: SolveStats,
}

/// `β = min Σ tr σ_ξ - 1` subject to `χ̃(σ) - χ ⪰ 0`. The condition
/// `Σ tr σ_ξ ≥ 1` follows from the trace of the slack.
pub fn quantum_robustness(chi: &ProcessMatrix, solver: &SdpSolver) -> Result<QuantumRobustness> {
    validate_target(chi)?;
    let mut p = SdpProblem::new();
    let cone = Cone::add(&mut p)?;
    cone.add_assembled_psd(&mut p)?;
    let noise = p.add_block("noise", 4);
    cone.add_chi_equality(&mut p, Some((noise, -1.0)), chi.matrix())?;
    for b in &cone.sigma {
        p.set_objective(*b, ComplexMatrix::identity(2).scale_re(-1.0))?;
    }
    let (blocks, stats) = solve_checked(solver, &p, "quantum robustness")?;
    let sigma = cone.extract(&blocks);
    check_unnormalized(&sigma, WITNESS_TOL).map_err(|e| witness_error("quantum robustness", e))?;
    let chi_ct = recipe_chi_raw(&sigma);
    let diff = &chi_ct - chi.matrix();
    let lmin = min_eigenvalue(&diff)?;
    if lmin < -WITNESS_TOL {
        return Err(witness_error("quantum robustness", format!("χ̃ - χ has eigenvalue {lmin:.2e}")));
    }
    let weight: f64 = sigma.iter().map(|s| s.trace().re).sum();
    let beta = (weight - 1.0).max(0.0);
    let noise = (beta > 1e-9).then(|| diff.scale_re(1.0 / (weight - 1.0)));
    Ok(QuantumRobustness { beta, classical_part: sigma, noise, stats })
}

/// Outcome of [`find_recipe`].
#[derive(Clone, Debug)]
pub enum RecipeSearch {
    Found { recipe: ClassicalRecipe, stats: SolveStats },
    NotFound { reason: String, certificate: Option<Vec<f64>> },
}

impl RecipeSearch {
    pub fn recipe(&self) -> Option<&ClassicalRecipe> {
        match self {
            RecipeSearch::Found { recipe, .. } => Some(recipe),
            RecipeSearch::NotFound { .. } => None,
        }
    }

    pub fn into_recipe(self) -> Option<ClassicalRecipe> {
        match self {
            RecipeSearch::Found { recipe, .. } => Some(recipe),
            RecipeSearch::NotFound { .. } => None,
        }
    }
}

/// Feasibility form: a normalized recipe with `χ̃(σ) = χ`.
///
/// Since assembly is invertible, the equality fixes all four outputs; the
/// marginal and normalization conditions then hold exactly when the implied
/// outputs are unit-trace, which is checked up front instead of being passed
/// to the solver as dependent rows.
pub fn find_recipe(chi: &ProcessMatrix, solver: &SdpSolver) -> Result<RecipeSearch> {
    validate_target(chi)?;
    let tp = chi.trace_preservation_error();
    if tp > 1e-9 {
        return Ok(RecipeSearch::NotFound {
            reason: format!("process is not trace preserving (output trace error {tp:.2e})"),
            certificate: None,
        });
    }
    if !chi.is_psd(1e-9) {
        return Ok(RecipeSearch::NotFound { reason: "process matrix is not PSD".into(), certificate: None });
    }
    let mut p = SdpProblem::new();
    let sigma: Vec<BlockId> = (0..NUM_HIDDEN).map(|xi| p.add_block(format!("sigma_{}", xi + 1), 2)).collect();
    let cone = Cone { sigma };
    cone.add_chi_equality(&mut p, None, chi.matrix())?;
    let s = solver.solve(&p);
    match s.status {
        SdpStatus::Optimal => {
            let recipe = ClassicalRecipe::new(cone.extract(&s.blocks))?;
            let check = verify_recipe(&recipe, chi);
            if !check.valid {
                return Err(witness_error("recipe", check.violation.unwrap_or_default()));
            }
            Ok(RecipeSearch::Found { recipe, stats: s.stats() })
        }
        SdpStatus::Infeasible => Ok(RecipeSearch::NotFound {
            reason: "no classical recipe reproduces the process".into(),
            certificate: s.certificate,
        }),
        SdpStatus::NumericalFailure => Err(Error::Solver(format!("recipe search: {}", s.message))),
    }
}
