//! Certification reports, Werner sweeps and experiment classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{classical_bound, quantum_composition, quantum_robustness, ClassicalBound};
use crate::error::{Error, Result};
use crate::io::{format_float, round_sig};
use crate::process::{avg_state_fidelity, chi_ideal, process_fidelity, process_fidelity_from_avg, resource_to_process, ProcessMatrix};
use crate::quantum::{assemblage, negativity, pauli_settings, werner};
use crate::sdp::{SdpSolver, SolveStats};
use crate::steering::steerable_weight;
use crate::tomography::{derive_seed, reconstruct_process, simulate_process_tomography};

pub const DEFAULT_GUARD: f64 = 1e-6;

pub const FLAG_NON_PSD: &str = "non_psd_process";
pub const FLAG_CLIPPED: &str = "clipped_tomography";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub f_expt: f64,
    pub f_avg_state: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gqt: bool,
    pub flags: Vec<String>,
    pub f_ct: f64,
    pub f_avg_threshold: f64,
    pub guard: f64,
}

impl CertificationReport {
    /// Copy with every real field rounded to 9 significant digits, for output.
    pub fn rounded(&self) -> Self {
        let r = |x: f64| round_sig(x, 9);
        CertificationReport {
            f_expt: r(self.f_expt),
            f_avg_state: r(self.f_avg_state),
            alpha: r(self.alpha),
            beta: r(self.beta),
            f_ct: r(self.f_ct),
            f_avg_threshold: r(self.f_avg_threshold),
            guard: self.guard,
            ..self.clone()
        }
    }

    /// `gqt = f_expt > f_ct + guard` and `f_avg_state = (2 f_expt + 1)/3`.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.gqt != (self.f_expt > self.f_ct + self.guard) {
            return Err("verdict inconsistent with fidelity threshold".into());
        }
        if (self.f_avg_state - (2.0 * self.f_expt + 1.0) / 3.0).abs() > 1e-12 {
            return Err("average state fidelity inconsistent".into());
        }
        Ok(())
    }
}

/// Holds the solver and the classical bound computed once.
#[derive(Clone, Debug)]
pub struct Certifier {
    pub solver: SdpSolver,
    pub bound: ClassicalBound,
    pub guard: f64,
}

impl Certifier {
    pub fn new(solver: SdpSolver) -> Result<Self> {
        let bound = classical_bound(&solver)?;
        Ok(Certifier { solver, bound, guard: DEFAULT_GUARD })
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn f_ct(&self) -> f64 {
        self.bound.f_ct
    }

    /// Strict `f > f_ct + guard`.
    pub fn is_gqt(&self, f_process: f64) -> bool {
        f_process > self.bound.f_ct + self.guard
    }

    pub fn certify(&self, chi: &ProcessMatrix, extra_flags: &[&str]) -> Result<CertificationReport> {
        Ok(self.certify_with_stats(chi, extra_flags)?.0)
    }

    /// Also returns the solver statistics of the α and β programs.
    pub fn certify_with_stats(
        &self,
        chi: &ProcessMatrix,
        extra_flags: &[&str],
    ) -> Result<(CertificationReport, [SolveStats; 2])> {
        let f_expt = process_fidelity(&chi_ideal(), chi);
        let alpha = quantum_composition(chi, &self.solver)?;
        let beta = quantum_robustness(chi, &self.solver)?;
        let mut flags: Vec<String> = extra_flags.iter().map(|s| s.to_string()).collect();
        if !chi.is_physical() && !flags.iter().any(|f| f == FLAG_NON_PSD) {
            flags.push(FLAG_NON_PSD.into());
        }
        let f_ct = self.bound.f_ct;
        let report = CertificationReport {
            f_expt,
            f_avg_state: (2.0 * f_expt + 1.0) / 3.0,
            alpha: alpha.alpha,
            beta: beta.beta,
            gqt: self.is_gqt(f_expt),
            flags,
            f_ct,
            f_avg_threshold: avg_state_fidelity(f_ct)?,
            guard: self.guard,
        };
        Ok((report, [alpha.stats, beta.stats]))
    }
}

/// `start:stop:step` with `0 ≤ start ≤ stop ≤ 1`, `step > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { start: 0.0, stop: 1.0, step: 0.01 }
    }
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::OutOfRange("grid values must be finite".into()));
        }
        if !(0.0 <= start && start <= stop && stop <= 1.0) {
            return Err(Error::OutOfRange(format!("grid {start}:{stop} must satisfy 0 ≤ start ≤ stop ≤ 1")));
        }
        if step <= 0.0 {
            return Err(Error::OutOfRange(format!("grid step {step} must be positive")));
        }
        Ok(Grid { start, stop, step })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid '{s}' is not start:stop:step")));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value '{t}'")));
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    /// Points `start + i·step` up to `stop` (inclusive within 1e-9 steps),
    /// rounded to 12 decimals.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let p = self.start + i as f64 * self.step;
                ((p * 1e12).round() / 1e12).min(self.stop)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p_noise: f64,
    pub f_expt: f64,
    pub f_avg_state: f64,
    pub alpha: f64,
    pub beta: f64,
    pub negativity: f64,
    pub steerable_weight: f64,
    pub gqt: bool,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub stats: Vec<SolveStats>,
}

pub const CSV_HEADER: &str = "p_noise,f_expt,f_avg_state,alpha,beta,negativity,steerable_weight,gqt";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        [
            format_float(self.p_noise),
            format_float(self.f_expt),
            format_float(self.f_avg_state),
            format_float(self.alpha),
            format_float(self.beta),
            format_float(self.negativity),
            format_float(self.steerable_weight),
            self.gqt.to_string(),
        ]
        .join(",")
    }
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

/// Simulated tomography settings for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotNoise {
    pub shots: u64,
    pub seed: u64,
}

/// One Werner grid point; with `noise`, the process is rebuilt from sampled
/// counts using `derive_seed(seed, index)` as the point's seed.
pub fn werner_point(certifier: &Certifier, p: f64, index: usize, noise: Option<ShotNoise>) -> Result<SweepRow> {
    let rho = werner(p)?;
    let exact = resource_to_process(&rho)?;
    let mut flags = Vec::new();
    let chi = match noise {
        None => exact,
        Some(n) => {
            let recs = simulate_process_tomography(&exact, n.shots, derive_seed(n.seed, index as u64))?;
            let rec = reconstruct_process(&recs)?;
            if rec.clipped {
                flags.push(FLAG_CLIPPED);
            }
            rec.process
        }
    };
    let (report, stats) = certifier.certify_with_stats(&chi, &flags)?;
    let sw = steerable_weight(&assemblage(&rho, &pauli_settings())?, &certifier.solver)?;
    let mut all_stats = stats.to_vec();
    all_stats.push(sw.stats);
    Ok(SweepRow {
        p_noise: p,
        f_expt: report.f_expt,
        f_avg_state: report.f_avg_state,
        alpha: report.alpha,
        beta: report.beta,
        negativity: negativity(&rho)?,
        steerable_weight: sw.sw,
        gqt: report.gqt,
        flags: report.flags,
        stats: all_stats,
    })
}

/// Evaluates grid points in parallel; rows come back in grid order.
pub fn werner_sweep(certifier: &Certifier, grid: &Grid, noise: Option<ShotNoise>) -> Result<Vec<SweepRow>> {
    grid.points()
        .par_iter()
        .enumerate()
        .map(|(i, p)| werner_point(certifier, *p, i, noise))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityKind {
    Process,
    AvgState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub technology: String,
    #[serde(default)]
    pub implementation: String,
    /// `active` or `passive`.
    #[serde(default)]
    pub mode: String,
    pub kind: FidelityKind,
    /// Fidelity as a fraction in `[0, 1]`.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifiedEntry {
    #[serde(flatten)]
    pub entry: ExperimentEntry,
    pub process_fidelity: f64,
    pub gqt: bool,
}

/// Parses `{"experiments": [...]}` or a bare array. Unknown kind tags are
/// parse errors.
pub fn parse_experiments(json: &str) -> Result<Vec<ExperimentEntry>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Input {
        Wrapped { experiments: Vec<ExperimentEntry> },
        Bare(Vec<ExperimentEntry>),
    }
    let input: Input = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let entries = match input {
        Input::Wrapped { experiments } => experiments,
        Input::Bare(v) => v,
    };
    for e in &entries {
        if !(0.0..=1.0).contains(&e.value) {
            return Err(Error::OutOfRange(format!("fidelity {} of '{}' outside [0, 1]", e.value, e.technology)));
        }
    }
    Ok(entries)
}

/// Average-state values go through `(3F̄ - 1)/2`; verdict `F > f_ct + guard`.
pub fn classify(entries: &[ExperimentEntry], f_ct: f64, guard: f64) -> Result<Vec<ClassifiedEntry>> {
    entries
        .iter()
        .map(|e| {
            let f = match e.kind {
                FidelityKind::Process => e.value,
                FidelityKind::AvgState => process_fidelity_from_avg(e.value)?,
            };
            Ok(ClassifiedEntry { entry: e.clone(), process_fidelity: f, gqt: f > f_ct + guard })
        })
        .collect()
}

/// Row-level verdicts grouped by `(technology, implementation)` in input
/// order: a row is GQT when any of its entries is.
pub fn classify_rows(classified: &[ClassifiedEntry]) -> Vec<(String, String, bool)> {
    let mut rows: Vec<(String, String, bool)> = Vec::new();
    for c in classified {
        match rows.iter_mut().find(|r| r.0 == c.entry.technology && r.1 == c.entry.implementation) {
            Some(r) => r.2 |= c.gqt,
            None => rows.push((c.entry.technology.clone(), c.entry.implementation.clone(), c.gqt)),
        }
    }
    rows
}

/// Plain-text table with active/passive columns and the GQT mark.
pub fn format_table(classified: &[ClassifiedEntry]) -> String {
    let pct = |mode: &str, tech: &str, imp: &str| {
        classified
            .iter()
            .find(|c| c.entry.technology == tech && c.entry.implementation == imp && c.entry.mode == mode)
            .map(|c| format!("{:.1}%", 100.0 * c.process_fidelity))
            .unwrap_or_default()
    };
    let mut out = format!("{:<20} {:<48} {:>8} {:>8}  {}\n", "technology", "implementation", "active", "passive", "GQT");
    for (tech, imp, gqt) in classify_rows(classified) {
        out.push_str(&format!(
            "{:<20} {:<48} {:>8} {:>8}  {}\n",
            tech,
            imp,
            pct("active", &tech, &imp),
            pct("passive", &tech, &imp),
            if gqt { "yes" } else { "no" }
        ));
    }
    out
}
