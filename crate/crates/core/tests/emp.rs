mod common;

use common::*;
use telecert::classical::*;
use telecert::linalg::{kron, pauli, ComplexMatrix, C64};
use telecert::process::*;
use telecert::quantum::*;
use telecert::sdp::SdpSolver;

fn zero() -> DensityMatrix {
    DensityMatrix::from_ket(&kets::zero()).unwrap()
}

fn z_projectors() -> Vec<ComplexMatrix> {
    vec![InputLabel::Zero.projector(), InputLabel::One.projector()]
}

fn trivial_resource() -> SeparableResource {
    SeparableResource::new(vec![(1.0, zero(), zero())]).unwrap()
}

#[test]
fn z_product_strategy_is_a_constant_channel() {
    let spec = ExtendedMpSpec::new(
        trivial_resource(),
        EmpMeasurement::Product { victor: z_projectors(), alice: vec![pauli::i2(), pauli::i2()] },
        vec![pauli::i2(), pauli::i2()],
    )
    .unwrap();
    let outputs = emp_product_outputs(&spec).unwrap();
    for o in &outputs {
        assert!(o.max_abs_diff(&InputLabel::Zero.projector()) < 1e-15);
    }
    let recipe = emp_product_recipe(&spec).unwrap();
    assert!(recipe.psd.iter().all(|f| *f));
    for s in recipe.recipe.sigma() {
        // Every hidden state is a multiple of |0><0|.
        assert!(s[(0, 1)].norm() < 1e-15 && s[(1, 1)].norm() < 1e-15 && s[(0, 0)].re > 0.0);
    }
    assert!(reproduction_error(recipe.recipe.sigma(), &outputs) <= 1e-10);
    let chi = emp_product_process(&spec).unwrap();
    let constant = assemble_raw(&outputs[0], &outputs[0], &outputs[0], &outputs[0]);
    assert!(chi.matrix().max_abs_diff(&constant) < 1e-15);
}

#[test]
fn outcome_probability_is_input_independent_on_average() {
    let mut r = rng(40);
    for _ in 0..50 {
        let spec = random_product_spec(&mut r);
        for o in product_outcomes(&spec).unwrap() {
            use InputLabel::*;
            let p = |m| o.probability(m);
            let target = o.alice_mass * o.victor_effect.trace().re / 2.0;
            for (a, b) in [(Zero, One), (Plus, Minus), (Right, Left)] {
                assert!(((p(a) + p(b)) / 2.0 - target).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn adversarial_povm_gives_non_psd_hidden_state_but_classical_process() {
    // Eigenvector of X + Y + Z with eigenvalue -√3.
    let n = [1.0, 1.0, 1.0].map(|v: f64| -v / 3f64.sqrt());
    let bloch = &(&pauli::x().scale_re(n[0]) + &pauli::y().scale_re(n[1])) + &pauli::z().scale_re(n[2]);
    let v = (&pauli::i2() + &bloch).scale_re(0.5);
    let eig = telecert::linalg::hermitian_eigenvalues(&(&(&pauli::x() + &pauli::y()) + &pauli::z())).unwrap();
    assert!((eig[0] + 3f64.sqrt()).abs() < 1e-12);
    let check = (&(&pauli::x() + &pauli::y()) + &pauli::z()).trace_product(&v).re;
    assert!((check + 3f64.sqrt()).abs() < 1e-12);

    let rest = &pauli::i2() - &v;
    let spec = ExtendedMpSpec::new(
        trivial_resource(),
        EmpMeasurement::Product { victor: vec![v, rest], alice: vec![pauli::i2(), pauli::i2()] },
        vec![pauli::i2(), pauli::x()],
    )
    .unwrap();
    let recipe = emp_product_recipe(&spec).unwrap();
    assert!(recipe.psd.iter().any(|f| !f), "expected a non-PSD hidden state");
    let outputs = emp_product_outputs(&spec).unwrap();
    assert!(reproduction_error(recipe.recipe.sigma(), &outputs) <= 1e-10);
    let chi = emp_product_process(&spec).unwrap();
    let found = find_recipe(&chi, &SdpSolver::default()).unwrap();
    let r = found.recipe().expect("process is classical");
    assert!(verify_recipe(r, &chi).valid);
}

#[test]
fn product_recipes_reproduce_outputs() {
    let mut r = rng(41);
    for _ in 0..50 {
        let spec = random_product_spec(&mut r);
        let recipe = emp_product_recipe(&spec).unwrap();
        let outputs = emp_product_outputs(&spec).unwrap();
        assert!(reproduction_error(recipe.recipe.sigma(), &outputs) <= 1e-10);
        assert!((recipe.recipe.total_weight() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn product_strategies_stay_classical() {
    let mut r = rng(42);
    let s = SdpSolver::default();
    for _ in 0..20 {
        let chi = emp_product_process(&random_product_spec(&mut r)).unwrap();
        assert!(process_fidelity(&chi_ideal(), &chi) <= 0.5 + 1e-6);
        assert!(quantum_composition(&chi, &s).unwrap().alpha <= 1e-6);
    }
}

#[test]
fn zero_mass_outcome_is_dropped() {
    let spec = ExtendedMpSpec::new(
        trivial_resource(),
        EmpMeasurement::Product {
            victor: vec![pauli::i2(), pauli::i2()],
            alice: z_projectors(),
        },
        vec![pauli::i2(), pauli::x()],
    )
    .unwrap();
    let outcomes = product_outcomes(&spec).unwrap();
    assert_eq!(outcomes.len(), 1);
    assert_eq!(outcomes[0].outcome, 0);
}

#[test]
fn spec_validation() {
    let bad_povm = EmpMeasurement::Product { victor: z_projectors(), alice: vec![pauli::i2().scale_re(0.5); 2] };
    assert!(ExtendedMpSpec::new(trivial_resource(), bad_povm, vec![pauli::i2(); 2]).is_err());
    let non_unitary = vec![pauli::i2(), pauli::i2().scale_re(2.0)];
    assert!(ExtendedMpSpec::new(trivial_resource(), EmpMeasurement::PartialBsm, non_unitary).is_err());
    assert!(ExtendedMpSpec::new(trivial_resource(), EmpMeasurement::PartialBsm, vec![pauli::i2()]).is_err());
    assert!(SeparableResource::new(vec![(0.5, zero(), zero())]).is_err());
}

#[test]
fn bsm_victor_effects_are_transposed_alice_states() {
    let mut r = rng(43);
    for _ in 0..20 {
        let a = random_density(&mut r, 2);
        let [m1, m2] = bsm_victor_effects(&a);
        assert!(m1.max_abs_diff(&a.matrix().transpose().scale_re(0.5)) < 1e-14);
        assert!((&m1 + &m2).max_abs_diff(&pauli::i2()) < 1e-15);
    }
}

#[test]
fn bsm_trivial_resource_outputs_zero_state() {
    let spec = ExtendedMpSpec::new(trivial_resource(), EmpMeasurement::PartialBsm, vec![pauli::i2(); 2]).unwrap();
    let res = emp_bsm_process(&spec).unwrap();
    for o in &res.outputs {
        assert!(o.max_abs_diff(&InputLabel::Zero.projector()) < 1e-14);
    }
    assert!(quantum_composition(&res.process, &SdpSolver::default()).unwrap().alpha <= 1e-6);
}

#[test]
fn bsm_recipes_reproduce_outputs() {
    let mut r = rng(44);
    for _ in 0..50 {
        let spec = random_bsm_spec(&mut r);
        let res = emp_bsm_process(&spec).unwrap();
        assert!(res.recipe.check(1e-9).is_ok());
        assert!(reproduction_error(res.recipe.sigma(), &res.outputs) <= 1e-10);
        let mut total = 0.0;
        for o in &res.per_outcome {
            let scaled: Vec<ComplexMatrix> = o.sigma.iter().map(|s| s.scale_re(o.probability)).collect();
            assert!(reproduction_error(&scaled, &o.unnormalized_outputs) <= 1e-10);
            total += o.probability;
        }
        assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn bsm_strategies_stay_classical() {
    let mut r = rng(45);
    let s = SdpSolver::default();
    for _ in 0..20 {
        let res = emp_bsm_process(&random_bsm_spec(&mut r)).unwrap();
        assert!(process_fidelity(&chi_ideal(), &res.process) <= 0.5 + 1e-6);
        assert!(quantum_composition(&res.process, &s).unwrap().alpha <= 1e-6);
    }
}

#[test]
fn bsm_matches_direct_simulation() {
    // Victor's qubit and the resource measured jointly, Bob's side corrected.
    let mut r = rng(46);
    let spec = random_bsm_spec(&mut r);
    let res = emp_bsm_process(&spec).unwrap();
    let phi = ComplexMatrix::projector(&kets::phi_plus());
    let id4 = ComplexMatrix::identity(4);
    let m = [phi.clone(), &id4 - &phi];
    let rho_ab = spec.resource.state().unwrap();
    for (j, input) in InputLabel::TOMOGRAPHIC.iter().enumerate() {
        let joint = kron(&input.projector(), rho_ab.matrix());
        let mut out = ComplexMatrix::zeros(2, 2);
        for (a, ma) in m.iter().enumerate() {
            let op = kron(ma, &pauli::i2());
            let bob = partial_trace_first_two(&(&op * &joint));
            let u = &spec.corrections[a];
            out += &(&(u * &bob) * &u.dagger());
        }
        assert!(out.max_abs_diff(&res.outputs[j]) < 1e-12, "input {input:?}");
    }
}

/// Traces out the first two qubits of a three-qubit operator.
fn partial_trace_first_two(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += m[(2 * k + i, 2 * k + j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}
