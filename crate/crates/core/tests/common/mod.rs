//! Random generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use telecert::linalg::{c64, hermitian_eig, kron, ComplexMatrix, C64};
use telecert::process::ProcessMatrix;
use telecert::classical::{EmpMeasurement, ExtendedMpSpec, SeparableResource};
use telecert::quantum::DensityMatrix;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data: Vec<C64> = (0..rows * cols).map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha20Rng, n: usize) -> ComplexMatrix {
    random_complex(rng, n, n).hermitian_part()
}

/// `G G†/tr` for a Gaussian-like `G`; full rank almost surely.
pub fn random_density(rng: &mut ChaCha20Rng, n: usize) -> DensityMatrix {
    let g = random_complex(rng, n, n);
    let m = &g * &g.dagger();
    let t = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / t).hermitian_part()).unwrap()
}

/// Rank-`rank` density matrix.
pub fn random_density_rank(rng: &mut ChaCha20Rng, n: usize, rank: usize) -> DensityMatrix {
    let g = random_complex(rng, n, rank);
    let m = &g * &g.dagger();
    let t = m.trace().re;
    DensityMatrix::new(m.scale_re(1.0 / t).hermitian_part()).unwrap()
}

pub fn random_pure(rng: &mut ChaCha20Rng, n: usize) -> DensityMatrix {
    random_density_rank(rng, n, 1)
}

/// Random CPTP qubit channel as a process matrix (Choi matrix with input
/// factor first, normalized so that the input marginal is `I/2`).
pub fn random_process(rng: &mut ChaCha20Rng) -> ProcessMatrix {
    let rank = rng.random_range(1..=4);
    let g = random_complex(rng, 4, rank);
    let choi = &g * &g.dagger();
    let marginal = telecert::linalg::partial_trace(&choi, telecert::linalg::Subsystem::A).unwrap();
    let inv_sqrt = hermitian_eig(&marginal).unwrap().map(|v| 1.0 / v.sqrt());
    let s = kron(&inv_sqrt, &ComplexMatrix::identity(2));
    let chi = (&(&s * &choi) * &s).scale_re(0.5).hermitian_part();
    ProcessMatrix::new(chi).unwrap()
}

/// Random qubit unitary `exp(3iH)`.
pub fn random_unitary(rng: &mut ChaCha20Rng) -> ComplexMatrix {
    let h = random_hermitian(rng, 2);
    let eig = hermitian_eig(&h).unwrap();
    let d: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, 3.0 * l)).collect();
    let mut diag = ComplexMatrix::zeros(2, 2);
    diag[(0, 0)] = d[0];
    diag[(1, 1)] = d[1];
    &(&eig.vectors * &diag) * &eig.vectors.dagger()
}

/// Random two-outcome qubit POVM `{E, I - E}`.
pub fn random_effect_pair(rng: &mut ChaCha20Rng) -> [ComplexMatrix; 2] {
    let e = random_density(rng, 2).into_matrix().scale_re(rng.random_range(0.2..1.0));
    let eig = hermitian_eig(&e).unwrap();
    let top = eig.values[1];
    let e = if top > 1.0 { e.scale_re(1.0 / top) } else { e };
    let f = &ComplexMatrix::identity(2) - &e;
    [e, f.hermitian_part()]
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

pub fn random_resource(r: &mut ChaCha20Rng, terms: usize) -> SeparableResource {
    let w: Vec<f64> = (0..terms).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let terms = w
        .iter()
        .map(|p| {
            let ra = r.random_range(1..=2);
            let rb = r.random_range(1..=2);
            (p / total, random_density_rank(r, 2, ra), random_density_rank(r, 2, rb))
        })
        .collect();
    SeparableResource::new(terms).unwrap()
}

/// Product POVM `{E_a ⊗ F_b}` over `a, b ∈ {0, 1}` with random corrections.
pub fn random_product_spec(r: &mut ChaCha20Rng) -> ExtendedMpSpec {
    let terms = r.random_range(1..=5);
    let resource = random_resource(r, terms);
    let e = random_effect_pair(r);
    let f = random_effect_pair(r);
    let mut victor = Vec::new();
    let mut alice = Vec::new();
    for ea in &e {
        for fb in &f {
            victor.push(ea.clone());
            alice.push(fb.clone());
        }
    }
    let corrections = (0..4).map(|_| random_unitary(r)).collect();
    ExtendedMpSpec::new(resource, EmpMeasurement::Product { victor, alice }, corrections).unwrap()
}

pub fn random_bsm_spec(r: &mut ChaCha20Rng) -> ExtendedMpSpec {
    let resource = random_resource(r, 5);
    let corrections = (0..2).map(|_| random_unitary(r)).collect();
    ExtendedMpSpec::new(resource, EmpMeasurement::PartialBsm, corrections).unwrap()
}
