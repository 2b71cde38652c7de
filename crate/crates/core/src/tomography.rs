//! Finite-shot Pauli tomography: sampling, linear inversion with eigenvalue
//! clipping, and process reconstruction.
//!
//! Sampling uses ChaCha20 (`rand_chacha`) seeded per record with
//! [`derive_seed`], so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, pauli, ComplexMatrix};
use crate::process::{apply_process_raw, assemble_raw, ProcessMatrix};
use crate::quantum::{DensityMatrix, InputLabel};

/// Eigenvalues above `-CLIP_TOL` count as round-off, not as unphysical.
pub const CLIP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliSetting {
    X,
    Y,
    Z,
}

impl PauliSetting {
    pub const ALL: [PauliSetting; 3] = [PauliSetting::X, PauliSetting::Y, PauliSetting::Z];

    pub fn observable(self) -> ComplexMatrix {
        match self {
            PauliSetting::X => pauli::x(),
            PauliSetting::Y => pauli::y(),
            PauliSetting::Z => pauli::z(),
        }
    }

    /// `Π₊ = (I + σ)/2`
    pub fn plus_projector(self) -> ComplexMatrix {
        (&pauli::i2() + &self.observable()).scale_re(0.5)
    }

    fn index(self) -> usize {
        match self {
            PauliSetting::X => 0,
            PauliSetting::Y => 1,
            PauliSetting::Z => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: PauliSetting,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl CountRecord {
    pub fn new(setting: PauliSetting, n_plus: u64, n_minus: u64) -> Result<Self> {
        if n_plus + n_minus == 0 {
            return Err(Error::OutOfRange("count record with zero shots".into()));
        }
        Ok(CountRecord { setting, n_plus, n_minus })
    }

    pub fn shots(&self) -> u64 {
        self.n_plus + self.n_minus
    }

    /// `(n₊ - n₋)/shots`
    pub fn expectation(&self) -> f64 {
        (self.n_plus as f64 - self.n_minus as f64) / self.shots() as f64
    }
}

/// Mixes a master seed with a record index (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Binomial draw of `n₊` with success probability `tr(Π₊ ρ)`.
pub fn sample_counts(rho: &DensityMatrix, setting: PauliSetting, shots: u64, seed: u64) -> Result<CountRecord> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be at least 1".into()));
    }
    if rho.dim() != 2 {
        return Err(Error::Dimension("tomography acts on a qubit".into()));
    }
    let p = setting.plus_projector().trace_product(rho.matrix()).re.clamp(0.0, 1.0);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n_plus = Binomial::new(shots, p).map_err(|e| Error::OutOfRange(e.to_string()))?.sample(&mut rng);
    CountRecord::new(setting, n_plus, shots - n_plus)
}

#[derive(Clone, Debug)]
pub struct StateReconstruction {
    pub state: DensityMatrix,
    /// Linear-inversion estimate before clipping.
    pub raw: ComplexMatrix,
    pub clipped: bool,
}

/// `(I + Σ_k <σ_k> σ_k)/2`, with negative eigenvalues clipped and the
/// result renormalized when the estimate is not PSD.
pub fn reconstruct_from_expectations(bloch: [f64; 3]) -> Result<StateReconstruction> {
    let mut raw = pauli::i2();
    for (s, v) in PauliSetting::ALL.iter().zip(bloch) {
        raw += &s.observable().scale_re(v);
    }
    let raw = raw.scale_re(0.5);
    let eig = hermitian_eig(&raw)?;
    if eig.values.iter().all(|&v| v >= -CLIP_TOL) {
        return Ok(StateReconstruction { state: DensityMatrix::new(raw.clone())?, raw, clipped: false });
    }
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let clipped = eig.map(|v| v.max(0.0) / total);
    Ok(StateReconstruction { state: DensityMatrix::new(clipped.hermitian_part())?, raw, clipped: true })
}

/// Linear inversion from one record per Pauli setting.
pub fn reconstruct_state(records: &[CountRecord]) -> Result<StateReconstruction> {
    let mut bloch = [None; 3];
    for r in records {
        if r.shots() == 0 {
            return Err(Error::OutOfRange("record with zero shots".into()));
        }
        let slot = &mut bloch[r.setting.index()];
        if slot.is_some() {
            return Err(Error::InvalidMeasurement(format!("duplicate {:?} record", r.setting)));
        }
        *slot = Some(r.expectation());
    }
    match bloch {
        [Some(x), Some(y), Some(z)] => reconstruct_from_expectations([x, y, z]),
        _ => Err(Error::InvalidMeasurement("need one record per Pauli setting".into())),
    }
}

/// Records for the four tomographic inputs 0, 1, +, R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessRecords {
    pub inputs: [Vec<CountRecord>; 4],
}

#[derive(Clone, Debug)]
pub struct ProcessReconstruction {
    pub process: ProcessMatrix,
    pub outputs: [DensityMatrix; 4],
    /// Any output state was clipped.
    pub clipped: bool,
    pub physical: bool,
}

pub fn reconstruct_process(records: &ProcessRecords) -> Result<ProcessReconstruction> {
    let recs = records
        .inputs
        .iter()
        .map(|r| reconstruct_state(r))
        .collect::<Result<Vec<_>>>()?;
    let clipped = recs.iter().any(|r| r.clipped);
    let m: Vec<&ComplexMatrix> = recs.iter().map(|r| r.state.matrix()).collect();
    let process = ProcessMatrix::new(assemble_raw(m[0], m[1], m[2], m[3]))?;
    let physical = process.is_physical();
    let mut it = recs.into_iter().map(|r| r.state);
    let outputs = std::array::from_fn(|_| it.next().expect("four outputs"));
    Ok(ProcessReconstruction { process, outputs, clipped, physical })
}

/// Outputs of `χ` for the tomographic inputs.
pub fn process_outputs(chi: &ProcessMatrix) -> Result<[DensityMatrix; 4]> {
    let outs = InputLabel::TOMOGRAPHIC
        .iter()
        .map(|m| DensityMatrix::with_tolerance(apply_process_raw(chi.matrix(), &m.projector()), 1e-9, 1e-8, 1e-9))
        .collect::<Result<Vec<_>>>()?;
    let mut it = outs.into_iter();
    Ok(std::array::from_fn(|_| it.next().expect("four outputs")))
}

/// Samples `shots` per setting for each tomographic input; record `j·3 + k`
/// (input `j`, setting `k`) uses `derive_seed(seed, j·3 + k)`.
pub fn simulate_process_tomography(chi: &ProcessMatrix, shots: u64, seed: u64) -> Result<ProcessRecords> {
    let outputs = process_outputs(chi)?;
    let mut inputs: [Vec<CountRecord>; 4] = Default::default();
    for (j, rho) in outputs.iter().enumerate() {
        for (k, s) in PauliSetting::ALL.iter().enumerate() {
            inputs[j].push(sample_counts(rho, *s, shots, derive_seed(seed, (3 * j + k) as u64))?);
        }
    }
    Ok(ProcessRecords { inputs })
}
