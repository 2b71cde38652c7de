mod common;

use common::*;
use rand::Rng;
use telecert::classical::*;
use telecert::linalg::{c64, kron, pauli, ComplexMatrix};
use telecert::process::*;
use telecert::quantum::*;
use telecert::sdp::SdpSolver;

fn solver() -> SdpSolver {
    SdpSolver::default()
}

fn proj(m: InputLabel) -> ComplexMatrix {
    m.projector()
}

/// Hidden states of the Pauli measure-prepare recipe, `ξ = 1..8`.
fn mp_states() -> Vec<ComplexMatrix> {
    use InputLabel::*;
    let combos = [
        (Zero, Plus, Right),
        (One, Plus, Right),
        (Zero, Plus, Left),
        (One, Plus, Left),
        (Zero, Minus, Right),
        (One, Minus, Right),
        (Zero, Minus, Left),
        (One, Minus, Left),
    ];
    combos.iter().map(|(z, x, y)| (&(&proj(*z) + &proj(*x)) + &proj(*y)).scale_re(1.0 / 3.0)).collect()
}

/// Reference eight-state recipe for the Werner process at `p = 0.5`.
fn half_bloch_states() -> Vec<ComplexMatrix> {
    let m = |a: f64, b: C, d: f64| ComplexMatrix::from_rows(&[&[c64(a, 0.0), b.0], &[b.1, c64(d, 0.0)]]);
    struct C(telecert::linalg::C64, telecert::linalg::C64);
    let q = 0.25;
    vec![
        m(0.75, C(c64(q, -q), c64(q, q)), 0.25),
        m(0.25, C(c64(q, -q), c64(q, q)), 0.75),
        m(0.75, C(c64(q, q), c64(q, -q)), 0.25),
        m(0.25, C(c64(q, q), c64(q, -q)), 0.75),
        m(0.75, C(c64(-q, -q), c64(-q, q)), 0.25),
        m(0.25, C(c64(-q, -q), c64(-q, q)), 0.75),
        m(0.75, C(c64(-q, q), c64(-q, -q)), 0.25),
        m(0.25, C(c64(-q, q), c64(-q, -q)), 0.75),
    ]
}

fn half_bloch_recipe() -> ClassicalRecipe {
    ClassicalRecipe::from_parts(&[0.125; 8], &half_bloch_states()).unwrap()
}

fn werner_process(p: f64) -> ProcessMatrix {
    resource_to_process(&werner(p).unwrap()).unwrap()
}

/// Random normalized recipe; pairing each hidden state with its complement
/// makes every marginal exactly one half.
fn random_recipe(r: &mut rand_chacha::ChaCha20Rng) -> ClassicalRecipe {
    let q: Vec<f64> = (0..8).map(|_| r.random_range(0.0..1.0f64).powi(3)).collect();
    let total: f64 = q.iter().sum();
    let probs: Vec<f64> = (0..8).map(|xi| 0.5 * (q[xi] + q[7 - xi]) / total).collect();
    let states: Vec<ComplexMatrix> = (0..8)
        .map(|_| {
            let rank = r.random_range(1..=2);
            random_density_rank(r, 2, rank).into_matrix()
        })
        .collect();
    ClassicalRecipe::from_parts(&probs, &states).unwrap()
}

#[test]
fn outcome_table_enumerates_all_sign_patterns() {
    let mut seen = std::collections::HashSet::new();
    for xi in 0..NUM_HIDDEN {
        seen.insert((outcome(xi, 0), outcome(xi, 1), outcome(xi, 2)));
    }
    assert_eq!(seen.len(), 8);
    // ξ = 1 is (+,+,+) and ξ = 2 differs in the Z outcome only.
    assert_eq!((outcome(0, 0), outcome(0, 1), outcome(0, 2)), (1, 1, 1));
    assert_eq!((outcome(1, 0), outcome(1, 1), outcome(1, 2)), (1, 1, -1));
}

#[test]
fn uniform_mp_recipe_gives_mp_process() {
    let r = ClassicalRecipe::from_parts(&[0.125; 8], &mp_states()).unwrap();
    let chi = recipe_to_process(&r).unwrap();
    assert!(chi.matrix().max_abs_diff(mp_process().matrix()) < 1e-14);
}

#[test]
fn uniform_mixed_recipe_gives_quarter_identity() {
    let r = ClassicalRecipe::from_parts(&[0.125; 8], &vec![pauli::i2().scale_re(0.5); 8]).unwrap();
    let chi = recipe_to_process(&r).unwrap();
    assert!(chi.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25)) < 1e-15);
}

#[test]
fn half_bloch_recipe_gives_werner_process() {
    let chi = recipe_to_process(&half_bloch_recipe()).unwrap();
    assert!(chi.matrix().max_abs_diff(werner_process(0.5).matrix()) < 1e-14);
}

#[test]
fn recipe_with_broken_marginals_is_rejected() {
    let mut probs = [0.0; 8];
    probs[0] = 1.0;
    let r = ClassicalRecipe::from_parts(&probs, &vec![pauli::i2().scale_re(0.5); 8]).unwrap();
    assert!(r.check(RECIPE_TOL).is_err());
    assert!(recipe_to_process(&r).is_err());
}

#[test]
fn recipe_invariants_reject_bad_states() {
    let mut states = vec![pauli::i2().scale_re(0.5); 8];
    states[3] = ComplexMatrix::diag(&[1.2, -0.2]);
    let r = ClassicalRecipe::from_parts(&[0.125; 8], &states).unwrap();
    assert!(r.check(RECIPE_TOL).is_err());
    let half = ClassicalRecipe::from_parts(&[0.0625; 8], &vec![pauli::i2().scale_re(0.5); 8]).unwrap();
    assert!(half.check(RECIPE_TOL).is_err());
}

#[test]
fn recipe_accessors() {
    let r = half_bloch_recipe();
    assert!((r.total_weight() - 1.0).abs() < 1e-15);
    assert!(r.marginal_errors().iter().all(|e| *e < 1e-15));
    for xi in 0..8 {
        assert!((r.probability(xi) - 0.125).abs() < 1e-15);
        assert!(r.hidden_state(xi).unwrap().max_abs_diff(&half_bloch_states()[xi]) < 1e-15);
    }
}

#[test]
fn classical_bound_value_and_witness() {
    let b = classical_bound(&solver()).unwrap();
    assert!((b.f_ct - 0.683).abs() <= 5e-4);
    assert!((b.f_ct - f_ct_closed_form()).abs() <= 1e-6);
    assert!((avg_state_fidelity(b.f_ct).unwrap() - 0.789).abs() <= 5e-4);
    assert!(b.stats.meets_contract(), "{:?}", b.stats);
    let chi = recipe_to_process(&b.witness).unwrap();
    assert!((process_fidelity(&chi_ideal(), &chi) - b.f_ct).abs() <= 1e-6);
    assert!(verify_recipe(&b.witness, &chi).valid);
}

#[test]
fn random_recipes_respect_the_bound() {
    let f_ct = f_ct_closed_form();
    let mut r = rng(30);
    for _ in 0..1000 {
        let recipe = random_recipe(&mut r);
        let chi = recipe_to_process(&recipe).unwrap();
        assert!(process_fidelity(&chi_ideal(), &chi) <= f_ct + 1e-6);
    }
}

#[test]
fn composition_and_robustness_of_ideal_process() {
    let a = quantum_composition(&chi_ideal(), &solver()).unwrap();
    assert!((a.alpha - 1.0).abs() <= 1e-6);
    assert!(a.stats.meets_contract());
    let b = quantum_robustness(&chi_ideal(), &solver()).unwrap();
    assert!((b.beta - 0.464).abs() <= 1e-3);
    assert!(b.stats.meets_contract());
    let noise = b.noise.expect("noise process");
    assert!((noise.trace().re - 1.0).abs() < 1e-6);
}

#[test]
fn mp_and_werner_half_are_classical() {
    for chi in [mp_process(), werner_process(0.5)] {
        let a = quantum_composition(&chi, &solver()).unwrap();
        let b = quantum_robustness(&chi, &solver()).unwrap();
        assert!(a.alpha <= 1e-6 && b.beta <= 1e-6, "alpha {} beta {}", a.alpha, b.beta);
        assert!(a.quantum_part.is_none() || a.alpha > 1e-9);
    }
}

#[test]
fn robustness_of_werner_03_exceeds_fidelity_bound() {
    let chi = werner_process(0.3);
    let f = process_fidelity(&chi_ideal(), &chi);
    let b = quantum_robustness(&chi, &solver()).unwrap();
    assert!(b.beta > 1e-3);
    // χ + βχ' = (1 + β)χ_CT with tr(χ_I χ') ≥ 0 gives β ≥ F/f_ct - 1.
    assert!(b.beta >= f / f_ct_closed_form() - 1.0 - 1e-6);
}

#[test]
fn composition_witness_decomposes_the_process() {
    let chi = werner_process(0.2);
    let a = quantum_composition(&chi, &solver()).unwrap();
    assert!(a.alpha > 0.0 && a.alpha < 1.0);
    let classical = recipe_chi_raw(&a.classical_part);
    let quantum = a.quantum_part.clone().unwrap();
    let rebuilt = &classical + &quantum.scale_re(a.alpha);
    assert!(rebuilt.max_abs_diff(chi.matrix()) < 1e-7);
    assert!(telecert::linalg::is_psd(&quantum, 1e-7));
}

#[test]
fn find_recipe_cases() {
    let found = find_recipe(&werner_process(0.5), &solver()).unwrap();
    let r = found.recipe().expect("recipe for the p = 0.5 Werner process");
    assert!(verify_recipe(r, &werner_process(0.5)).valid);

    assert!(find_recipe(&chi_ideal(), &solver()).unwrap().recipe().is_none());

    let quarter = ProcessMatrix::new(ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
    let r = find_recipe(&quarter, &solver()).unwrap().into_recipe().expect("recipe for I/4");
    assert!(verify_recipe(&r, &quarter).valid);
}

#[test]
fn find_recipe_reports_infeasibility_certificate() {
    match find_recipe(&werner_process(0.3), &solver()).unwrap() {
        RecipeSearch::NotFound { certificate, .. } => assert!(certificate.is_some()),
        RecipeSearch::Found { .. } => panic!("p = 0.3 is not classical"),
    }
}

#[test]
fn verify_recipe_examples() {
    assert!(verify_recipe(&half_bloch_recipe(), &werner_process(0.5)).valid);
    let uniform = ClassicalRecipe::from_parts(&[0.125; 8], &vec![pauli::i2().scale_re(0.5); 8]).unwrap();
    let quarter = ProcessMatrix::new(ComplexMatrix::identity(4).scale_re(0.25)).unwrap();
    assert!(verify_recipe(&uniform, &quarter).valid);
    let bad = verify_recipe(&half_bloch_recipe(), &chi_ideal());
    assert!(!bad.valid && bad.violation.is_some());
}

#[test]
fn mp_output_state_examples() {
    let spec = MeasurePrepareSpec::pauli_uniform();
    let rho = mp_output_state(InputLabel::Zero, &spec).unwrap();
    let want = (&proj(InputLabel::Zero) + &pauli::i2()).scale_re(1.0 / 3.0);
    assert!(rho.matrix().max_abs_diff(&want) < 1e-15);

    let z = MeasurePrepareSpec::new(vec![(BinaryMeasurement::from_observable(&pauli::z()).unwrap(), 1.0)]).unwrap();
    let rho = mp_output_state(InputLabel::Zero, &z).unwrap();
    assert!(rho.matrix().max_abs_diff(&proj(InputLabel::Zero)) < 1e-15);
    let rho = mp_output_state(InputLabel::Plus, &z).unwrap();
    assert!(rho.matrix().max_abs_diff(&pauli::i2().scale_re(0.5)) < 1e-15);
}

#[test]
fn measure_prepare_spec_validation() {
    let z = BinaryMeasurement::from_observable(&pauli::z()).unwrap();
    assert!(MeasurePrepareSpec::new(vec![(z.clone(), 0.6)]).is_err());
    assert!(MeasurePrepareSpec::new(vec![(z.clone(), 1.2), (z.clone(), -0.2)]).is_err());
    assert!(MeasurePrepareSpec::new(vec![]).is_err());
}

#[test]
fn mp_process_examples() {
    let chi = mp_process();
    let f = process_fidelity(&chi_ideal(), &chi);
    assert!((f - 0.5).abs() <= 1e-10);
    assert!((avg_state_fidelity(f).unwrap() - 2.0 / 3.0).abs() <= 1e-10);
    assert!(quantum_composition(&chi, &solver()).unwrap().alpha <= 1e-6);
}

#[test]
fn classical_membership_tests_agree() {
    let mut r = rng(31);
    let s = solver();
    let (mut inside, mut outside) = (0, 0);
    for trial in 0..50 {
        let chi = if trial % 2 == 0 {
            // Werner family rotated by a random output unitary.
            let p: f64 = r.random_range(0.2..0.7);
            let u = kron(&ComplexMatrix::identity(2), &random_unitary(&mut r));
            let m = &(&u * werner_process(p).matrix()) * &u.dagger();
            ProcessMatrix::new(m.hermitian_part()).unwrap()
        } else {
            let l: f64 = r.random_range(0.0..1.0);
            let base = random_process(&mut r);
            let mixed = &base.matrix().scale_re(l) + &ComplexMatrix::identity(4).scale_re(0.25 * (1.0 - l));
            ProcessMatrix::new(mixed).unwrap()
        };
        let alpha = quantum_composition(&chi, &s).unwrap().alpha;
        let beta = quantum_robustness(&chi, &s).unwrap().beta;
        let found = find_recipe(&chi, &s).unwrap().recipe().is_some();
        assert_eq!(alpha <= 1e-6, found, "trial {trial}: alpha {alpha:.3e}, recipe found {found}");
        assert_eq!(alpha <= 1e-6, beta <= 1e-6, "trial {trial}: alpha {alpha:.3e}, beta {beta:.3e}");
        if found {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    assert!(inside >= 5 && outside >= 5, "test set covers one side only ({inside}/{outside})");
}

#[test]
fn verdict_chain_on_werner_grid() {
    let s = solver();
    let f_ct = classical_bound(&s).unwrap().f_ct;
    for i in 0..=100 {
        let p = i as f64 / 100.0;
        let chi = werner_process(p);
        if process_fidelity(&chi_ideal(), &chi) > f_ct {
            assert!(quantum_composition(&chi, &s).unwrap().alpha > 0.0, "p={p}");
            assert!(quantum_robustness(&chi, &s).unwrap().beta > 0.0, "p={p}");
        }
    }
}

#[test]
fn composition_is_monotone_along_ideal_to_mp() {
    let s = solver();
    let mut last = f64::INFINITY;
    for i in (0..=5).rev() {
        let l = i as f64 / 5.0;
        let m = &chi_ideal().matrix().scale_re(l) + &mp_process().matrix().scale_re(1.0 - l);
        let alpha = quantum_composition(&ProcessMatrix::new(m).unwrap(), &s).unwrap().alpha;
        assert!(alpha <= last + 1e-7, "lambda {l}: {alpha} after {last}");
        last = alpha;
    }
}

#[test]
fn non_psd_process_is_accepted_by_composition_and_robustness() {
    let mut m = werner_process(0.05).into_matrix();
    m[(1, 1)] -= c64(0.02, 0.0);
    m[(2, 2)] += c64(0.02, 0.0);
    let chi = ProcessMatrix::new(m).unwrap();
    assert!(!chi.is_physical());
    let a = quantum_composition(&chi, &solver()).unwrap();
    assert!(a.relaxation > 0.0);
    assert!(a.alpha > 0.5);
    assert!(quantum_robustness(&chi, &solver()).unwrap().beta > 0.3);
}
