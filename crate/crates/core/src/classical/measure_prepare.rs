//! Measure-prepare strategies and the extended model with separable
//! resources, with explicit classical recipes.

use log::warn;

use super::{outcome_bit, recipe_outputs_raw, ClassicalRecipe, NUM_HIDDEN};
use crate::error::{Error, Result};
use crate::linalg::{is_psd, kron, partial_trace, pauli, ComplexMatrix, Subsystem};
use crate::process::{assemble_raw, ProcessMatrix};
use crate::quantum::{kets, pauli_settings, BinaryMeasurement, DensityMatrix, InputLabel};

/// Outcome mass below which a POVM outcome is dropped.
pub const ZERO_MASS_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const POVM_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct MeasurePrepareSpec {
    settings: Vec<(BinaryMeasurement, f64)>,
}

impl MeasurePrepareSpec {
    pub fn new(settings: Vec<(BinaryMeasurement, f64)>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::InvalidMeasurement("no settings".into()));
        }
        let mut total = 0.0;
        for (m, p) in &settings {
            m.validate()?;
            if m.plus.rows() != 2 {
                return Err(Error::InvalidMeasurement("settings must act on a qubit".into()));
            }
            if p.is_nan() || *p < 0.0 {
                return Err(Error::OutOfRange(format!("setting probability {p} is negative")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("setting probabilities sum to {total}")));
        }
        Ok(MeasurePrepareSpec { settings })
    }

    /// X, Y, Z each with probability 1/3.
    pub fn pauli_uniform() -> Self {
        Self::new(pauli_settings().into_iter().map(|m| (m, 1.0 / 3.0)).collect()).expect("Pauli spec")
    }

    pub fn settings(&self) -> &[(BinaryMeasurement, f64)] {
        &self.settings
    }
}

/// `ρ_m = Σ_k p_k Σ_a tr(Π_{a|k} ρ_m) Π_{a|k}/tr Π_{a|k}`
pub fn mp_output_state(m: InputLabel, spec: &MeasurePrepareSpec) -> Result<DensityMatrix> {
    let rho = m.projector();
    let mut out = ComplexMatrix::zeros(2, 2);
    for (meas, p) in spec.settings() {
        for proj in [&meas.plus, &meas.minus] {
            let rank = proj.trace().re;
            if rank < 0.5 {
                continue;
            }
            out += &proj.scale_re(p * proj.trace_product(&rho).re / rank);
        }
    }
    DensityMatrix::new(out.hermitian_part())
}

/// Process of the Pauli-uniform measure-prepare strategy.
pub fn mp_process() -> ProcessMatrix {
    let spec = MeasurePrepareSpec::pauli_uniform();
    let o: Vec<ComplexMatrix> = InputLabel::TOMOGRAPHIC
        .iter()
        .map(|m| mp_output_state(*m, &spec).expect("MP output").into_matrix())
        .collect();
    ProcessMatrix::new(assemble_raw(&o[0], &o[1], &o[2], &o[3])).expect("MP process")
}

/// Separable two-qubit resource `Σ_κ p_κ ρ^A_κ ⊗ ρ^B_κ`.
#[derive(Clone, Debug)]
pub struct SeparableResource {
    terms: Vec<(f64, DensityMatrix, DensityMatrix)>,
}

impl SeparableResource {
    pub fn new(terms: Vec<(f64, DensityMatrix, DensityMatrix)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidState("empty separable decomposition".into()));
        }
        let mut total = 0.0;
        for (p, a, b) in &terms {
            if p.is_nan() || *p < 0.0 {
                return Err(Error::OutOfRange(format!("weight {p} is negative")));
            }
            if a.dim() != 2 || b.dim() != 2 {
                return Err(Error::Dimension("separable terms must be qubit states".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("weights sum to {total}")));
        }
        Ok(SeparableResource { terms })
    }

    pub fn terms(&self) -> &[(f64, DensityMatrix, DensityMatrix)] {
        &self.terms
    }

    pub fn state(&self) -> Result<DensityMatrix> {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (p, a, b) in &self.terms {
            m += &kron(a.matrix(), b.matrix()).scale_re(*p);
        }
        DensityMatrix::new(m)
    }
}

#[derive(Clone, Debug)]
pub enum EmpMeasurement {
    /// `M^{VA}_a = M^V_a ⊗ M^A_a`.
    Product { victor: Vec<ComplexMatrix>, alice: Vec<ComplexMatrix> },
    /// `M₁ = |φ⁺><φ⁺|`, `M₂ = I - M₁`.
    PartialBsm,
}

#[derive(Clone, Debug)]
pub struct ExtendedMpSpec {
    pub resource: SeparableResource,
    pub measurement: EmpMeasurement,
    /// Bob's correction `U_a` per outcome.
    pub corrections: Vec<ComplexMatrix>,
}

fn check_unitary(u: &ComplexMatrix) -> Result<()> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::Dimension("corrections must be 2x2".into()));
    }
    let dev = (&u.dagger() * u).max_abs_diff(&ComplexMatrix::identity(2));
    if dev > UNITARY_TOL {
        return Err(Error::InvalidMeasurement(format!("correction is not unitary (deviation {dev:.2e})")));
    }
    Ok(())
}

impl ExtendedMpSpec {
    pub fn new(resource: SeparableResource, measurement: EmpMeasurement, corrections: Vec<ComplexMatrix>) -> Result<Self> {
        let outcomes = match &measurement {
            EmpMeasurement::Product { victor, alice } => {
                if victor.len() != alice.len() || victor.is_empty() {
                    return Err(Error::InvalidMeasurement("product POVM factor lists differ in length".into()));
                }
                let mut sum = ComplexMatrix::zeros(4, 4);
                for (v, a) in victor.iter().zip(alice) {
                    for m in [v, a] {
                        if m.rows() != 2 || m.cols() != 2 {
                            return Err(Error::Dimension("POVM factors must be 2x2".into()));
                        }
                        if !m.is_hermitian(POVM_TOL) || !is_psd(m, POVM_TOL) {
                            return Err(Error::InvalidMeasurement("POVM factor is not PSD".into()));
                        }
                    }
                    sum += &kron(v, a);
                }
                let dev = sum.max_abs_diff(&ComplexMatrix::identity(4));
                if dev > POVM_TOL {
                    return Err(Error::InvalidMeasurement(format!(
                        "POVM elements sum to identity only within {dev:.2e}"
                    )));
                }
                victor.len()
            }
            EmpMeasurement::PartialBsm => 2,
        };
        if corrections.len() != outcomes {
            return Err(Error::InvalidMeasurement(format!(
                "{} corrections for {outcomes} outcomes",
                corrections.len()
            )));
        }
        for u in &corrections {
            check_unitary(u)?;
        }
        Ok(ExtendedMpSpec { resource, measurement, corrections })
    }

    fn correct(&self, a: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let u = &self.corrections[a];
        (&(u * rho) * &u.dagger()).hermitian_part()
    }
}

/// Inputs indexed like the recipe settings: `(+, -)` per X, Y, Z.
fn setting_inputs(k: usize) -> [InputLabel; 2] {
    match k {
        0 => [InputLabel::Plus, InputLabel::Minus],
        1 => [InputLabel::Right, InputLabel::Left],
        _ => [InputLabel::Zero, InputLabel::One],
    }
}

/// Product-POVM outcome after dropping zero-mass outcomes.
#[derive(Clone, Debug)]
pub struct ProductOutcome {
    pub outcome: usize,
    /// `q_a = Σ_κ p_κ tr(M^A_a ρ^A_κ)`.
    pub alice_mass: f64,
    /// Corrected conditional state `U_a ρ^B_a U_a†`.
    pub bob_state: ComplexMatrix,
    pub victor_effect: ComplexMatrix,
}

impl ProductOutcome {
    /// `P(a|m) = tr(M^V_a ρ_m) q_a`.
    pub fn probability(&self, m: InputLabel) -> f64 {
        self.victor_effect.trace_product(&m.projector()).re * self.alice_mass
    }
}

pub fn product_outcomes(spec: &ExtendedMpSpec) -> Result<Vec<ProductOutcome>> {
    let EmpMeasurement::Product { victor, alice } = &spec.measurement else {
        return Err(Error::InvalidMeasurement("spec does not use a product POVM".into()));
    };
    let mut out = Vec::new();
    for (a, (mv, ma)) in victor.iter().zip(alice).enumerate() {
        let mut mass = 0.0;
        let mut bob = ComplexMatrix::zeros(2, 2);
        for (p, ra, rb) in spec.resource.terms() {
            let w = p * ma.trace_product(ra.matrix()).re;
            mass += w;
            bob += &rb.matrix().scale_re(w);
        }
        if mass < ZERO_MASS_TOL {
            if mv.max_abs() > 0.0 {
                warn!("dropping product POVM outcome {a}: Alice-side mass {mass:.2e}");
            }
            continue;
        }
        out.push(ProductOutcome {
            outcome: a,
            alice_mass: mass,
            bob_state: spec.correct(a, &bob.scale_re(1.0 / mass)),
            victor_effect: mv.clone(),
        });
    }
    Ok(out)
}

/// `ρ_out,m = Σ_a P(a|m) U_a ρ^B_a U_a†` for an arbitrary input.
pub fn emp_product_output(spec: &ExtendedMpSpec, m: InputLabel) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(2, 2);
    for o in product_outcomes(spec)? {
        out += &o.bob_state.scale_re(o.probability(m));
    }
    Ok(out)
}

fn tomographic_outputs(f: impl Fn(InputLabel) -> Result<ComplexMatrix>) -> Result<[ComplexMatrix; 4]> {
    let [a, b, c, d] = InputLabel::TOMOGRAPHIC;
    Ok([f(a)?, f(b)?, f(c)?, f(d)?])
}

/// Outputs `[ρ₀, ρ₁, ρ₊, ρ_R]` of the product-POVM strategy.
pub fn emp_product_outputs(spec: &ExtendedMpSpec) -> Result<[ComplexMatrix; 4]> {
    tomographic_outputs(|m| emp_product_output(spec, m))
}

pub fn emp_product_process(spec: &ExtendedMpSpec) -> Result<ProcessMatrix> {
    let [a, b, c, d] = emp_product_outputs(spec)?;
    ProcessMatrix::with_tolerance(assemble_raw(&a, &b, &c, &d), 1e-10, 1e-9)
}

/// Uniform-weight recipe of the product strategy with per-ξ PSD flags.
#[derive(Clone, Debug)]
pub struct ProductRecipe {
    /// `σ_ξ = ρ^B_ξ / 8`; hidden states may fail to be PSD.
    pub recipe: ClassicalRecipe,
    pub psd: [bool; NUM_HIDDEN],
}

/// `P(λ_ξ) = 1/8` and `ρ^B_ξ = Σ_a [P(a|m_Z) + P(a|m_X) + P(a|m_Y) - 2P(a)] U_a ρ^B_a U_a†`
/// with `m_k` the input matching the predetermined outcome of setting `k`.
pub fn emp_product_recipe(spec: &ExtendedMpSpec) -> Result<ProductRecipe> {
    let outcomes = product_outcomes(spec)?;
    let mut sigma = Vec::with_capacity(NUM_HIDDEN);
    for xi in 0..NUM_HIDDEN {
        let mut state = ComplexMatrix::zeros(2, 2);
        for o in &outcomes {
            let p_a = 0.5 * (o.probability(InputLabel::Zero) + o.probability(InputLabel::One));
            let coeff: f64 = (0..3)
                .map(|k| o.probability(setting_inputs(k)[outcome_bit(xi, k)]))
                .sum::<f64>()
                - 2.0 * p_a;
            state += &o.bob_state.scale_re(coeff);
        }
        sigma.push(state.scale_re(1.0 / NUM_HIDDEN as f64));
    }
    let psd = std::array::from_fn(|xi| is_psd(&sigma[xi], 1e-12));
    Ok(ProductRecipe { recipe: ClassicalRecipe::new(sigma)?, psd })
}

/// `M^V_{a|κ} = tr_A[M^{VA}_a (I ⊗ ρ^A_κ)]` for the partial Bell measurement.
pub fn bsm_victor_effects(alice: &DensityMatrix) -> [ComplexMatrix; 2] {
    let phi = ComplexMatrix::projector(&kets::phi_plus());
    let m1 = partial_trace(&(&phi * &kron(&ComplexMatrix::identity(2), alice.matrix())), Subsystem::A)
        .expect("4x4 operand")
        .hermitian_part();
    let m2 = &ComplexMatrix::identity(2) - &m1;
    [m1, m2]
}

/// Weights `w_ξ ≥ 0` with `Σ_{ξ: b_k(ξ)=b} 2 w_ξ = tr(E |b_k><b_k|)` for a
/// qubit effect `E = e₀ I + e·σ`, taking the product `(T/2) Π_k q_k` of
/// per-setting outcome probabilities `q_k = (1 ± e_k/e₀)/2`, `T = tr E`.
fn effect_weights(e: &ComplexMatrix) -> [f64; NUM_HIDDEN] {
    let e0 = 0.5 * e.trace().re;
    if e0 <= 0.0 {
        return [0.0; NUM_HIDDEN];
    }
    let paulis = [pauli::x(), pauli::y(), pauli::z()];
    let ratio: [f64; 3] = std::array::from_fn(|k| (0.5 * e.trace_product(&paulis[k]).re / e0).clamp(-1.0, 1.0));
    std::array::from_fn(|xi| {
        let mut w = e0;
        for (k, r) in ratio.iter().enumerate() {
            w *= if outcome_bit(xi, k) == 0 { 0.5 * (1.0 + r) } else { 0.5 * (1.0 - r) };
        }
        w
    })
}

/// Per-outcome data of the partial Bell-measurement strategy.
#[derive(Clone, Debug)]
pub struct BsmOutcome {
    pub outcome: usize,
    /// `P(a) = Σ_ξ P(λ_ξ, a)`.
    pub probability: f64,
    /// Recipe conditioned on `a`, before correction: `P(λ_ξ|a) ρ^B_{ξ,a}`.
    pub sigma: Vec<ComplexMatrix>,
    /// `ρ̃_{m,a}` for the tomographic inputs, before correction.
    pub unnormalized_outputs: [ComplexMatrix; 4],
}

#[derive(Clone, Debug)]
pub struct BsmResult {
    pub process: ProcessMatrix,
    /// `Σ_a U_a ρ̃_{m,a} U_a†` for the tomographic inputs.
    pub outputs: [ComplexMatrix; 4],
    /// Combined recipe `σ_ξ = Σ_a P(λ_ξ, a) U_a ρ^B_{ξ,a} U_a†`.
    pub recipe: ClassicalRecipe,
    pub per_outcome: Vec<BsmOutcome>,
}

pub fn emp_bsm_process(spec: &ExtendedMpSpec) -> Result<BsmResult> {
    if !matches!(spec.measurement, EmpMeasurement::PartialBsm) {
        return Err(Error::InvalidMeasurement("spec does not use the partial Bell measurement".into()));
    }
    let effects: Vec<[ComplexMatrix; 2]> =
        spec.resource.terms().iter().map(|(_, a, _)| bsm_victor_effects(a)).collect();
    let mut combined = vec![ComplexMatrix::zeros(2, 2); NUM_HIDDEN];
    let mut outputs: [ComplexMatrix; 4] = std::array::from_fn(|_| ComplexMatrix::zeros(2, 2));
    let mut per_outcome = Vec::new();
    for a in 0..2 {
        let mut joint = vec![ComplexMatrix::zeros(2, 2); NUM_HIDDEN];
        let mut raw: [ComplexMatrix; 4] = std::array::from_fn(|_| ComplexMatrix::zeros(2, 2));
        for ((p, _, rb), eff) in spec.resource.terms().iter().zip(&effects) {
            let w = effect_weights(&eff[a]);
            for xi in 0..NUM_HIDDEN {
                joint[xi] += &rb.matrix().scale_re(p * w[xi]);
            }
            for (j, m) in InputLabel::TOMOGRAPHIC.iter().enumerate() {
                raw[j] += &rb.matrix().scale_re(p * eff[a].trace_product(&m.projector()).re);
            }
        }
        for xi in 0..NUM_HIDDEN {
            combined[xi] += &spec.correct(a, &joint[xi]);
        }
        for j in 0..4 {
            outputs[j] += &spec.correct(a, &raw[j]);
        }
        let prob: f64 = joint.iter().map(|s| s.trace().re).sum();
        if prob < ZERO_MASS_TOL {
            warn!("partial Bell measurement outcome {a} has zero probability");
            continue;
        }
        per_outcome.push(BsmOutcome {
            outcome: a,
            probability: prob,
            sigma: joint.iter().map(|s| s.scale_re(1.0 / prob)).collect(),
            unnormalized_outputs: raw,
        });
    }
    let [o0, o1, op, or] = &outputs;
    let process = ProcessMatrix::with_tolerance(assemble_raw(o0, o1, op, or), 1e-10, 1e-9)?;
    Ok(BsmResult { process, outputs, recipe: ClassicalRecipe::new(combined)?, per_outcome })
}

/// Largest deviation between recipe outputs and reference outputs.
pub fn reproduction_error(sigma: &[ComplexMatrix], reference: &[ComplexMatrix; 4]) -> f64 {
    recipe_outputs_raw(sigma).iter().zip(reference).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
}
