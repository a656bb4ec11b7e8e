//! Bundled consistency checks behind `fidelium selftest`.

use serde::Serialize;

use crate::channels::{depolarizing, dephasing, random_channel, unitary_channel};
use crate::designs::{exact_minimal, simplex_search, verify_design};
use crate::error::Result;
use crate::fidelity::{
    avg_fidelity_design, avg_fidelity_entanglement, avg_fidelity_generators, avg_fidelity_povm_form,
    avg_fidelity_qubit, gate_fidelity, mc_haar_fidelity, Estimator,
};
use crate::haar::{mc_orthogonality_check, sample_unitary, OrthogonalityReport, SampleStream};
use crate::su_basis::gell_mann_basis;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Worst observed deviation (or z-score for statistical checks).
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            passed: value < threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub dim: usize,
    pub seed: u64,
    pub design_source: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

const CHANNELS: u64 = 20;
const MC_CHANNELS: u64 = 3;
const MC_SAMPLES: usize = 10_000;

pub fn orthogonality(d: usize, n_samples: usize, seed: u64) -> Result<OrthogonalityReport> {
    Ok(mc_orthogonality_check(&gell_mann_basis(d)?, n_samples, seed))
}

/// Cross-estimator agreement and closed-form checks at one dimension.
pub fn all(d: usize, seed: u64) -> Result<SelftestReport> {
    let basis = gell_mann_basis(d)?;
    let design = match exact_minimal(d) {
        Ok(design) => design,
        Err(_) => simplex_search(d, seed, 1e-8)?,
    };
    let mut checks = Vec::new();

    let design_report = verify_design(&design, &basis)?;
    checks.push(Check::new("design_residual", design_report.max_residual(), 1e-8));

    let ks = [1, d, d * d];
    let (mut gen_vs_design, mut design_vs_povm, mut gen_vs_ent, mut range) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..CHANNELS {
        let channel = random_channel(d, ks[i as usize % 3], seed.wrapping_add(i))?;
        let g = avg_fidelity_generators(&channel, &basis)?.value;
        let s = avg_fidelity_design(&channel, &design)?.value;
        let p = avg_fidelity_povm_form(&channel, &design)?.value;
        let e = avg_fidelity_entanglement(&channel)?.value;
        gen_vs_design = gen_vs_design.max((g - s).abs());
        design_vs_povm = design_vs_povm.max((s - p).abs());
        gen_vs_ent = gen_vs_ent.max((g - e).abs());
        range = range.max((-g).max(g - 1.0)).max(0.0);
    }
    checks.push(Check::new("generators_vs_design", gen_vs_design, 1e-10));
    checks.push(Check::new("design_vs_povm", design_vs_povm, 1e-14));
    checks.push(Check::new("generators_vs_entanglement", gen_vs_ent, 1e-10));
    checks.push(Check::new("value_in_unit_interval", range, 1e-10));

    let mut closed_form = 0.0f64;
    for p in [0.0, 0.25, 0.5, 1.0] {
        let value = avg_fidelity_generators(&depolarizing(d, p)?, &basis)?.value;
        closed_form = closed_form.max((value - (1.0 - p * (d as f64 - 1.0) / d as f64)).abs());
        let value = avg_fidelity_generators(&dephasing(d, p)?, &basis)?.value;
        closed_form = closed_form.max((value - (1.0 - p + 2.0 * p / (d as f64 + 1.0))).abs());
    }
    checks.push(Check::new("closed_form_channels", closed_form, 1e-12));

    if d == 2 {
        let mut worst = 0.0f64;
        for i in 0..CHANNELS {
            let channel = random_channel(2, ks[i as usize % 3], seed.wrapping_add(i))?;
            let g = avg_fidelity_generators(&channel, &basis)?.value;
            worst = worst.max((g - avg_fidelity_qubit(&channel)?).abs());
        }
        checks.push(Check::new("qubit_specialization", worst, 1e-14));
    }

    let mut worst_z = 0.0f64;
    for i in 0..MC_CHANNELS {
        let channel = random_channel(d, d, seed.wrapping_add(1000 + i))?;
        let g = avg_fidelity_generators(&channel, &basis)?.value;
        let mc = mc_haar_fidelity(&channel, MC_SAMPLES, seed.wrapping_add(i))?;
        let se = mc.std_error.unwrap_or(0.0);
        worst_z = worst_z.max((mc.value - g).abs() / se);
    }
    checks.push(Check::new("mc_haar_z_score", worst_z, 5.0));

    let n_orth = if d <= 3 { 10_000 } else { 1_000 };
    let orth = mc_orthogonality_check(&basis, n_orth, seed);
    let scaled = orth.first_moment_residual.max(orth.second_moment_residual) / orth.standard_error_scale;
    checks.push(Check::new("orthogonality_standard_errors", scaled, 5.0));

    let mut gate = 0.0f64;
    for i in 0..5 {
        let v = sample_unitary(&SampleStream::new(seed, i, d));
        let value = gate_fidelity(&unitary_channel(&v)?, &v, &Estimator::Generators)?.value;
        gate = gate.max((value - 1.0).abs());
    }
    checks.push(Check::new("perfect_gate", gate, 1e-12));

    let passed = checks.iter().all(|c| c.passed);
    Ok(SelftestReport {
        dim: d,
        seed,
        design_source: design.source().to_string(),
        checks,
        passed,
    })
}
