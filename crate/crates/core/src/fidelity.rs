//! Average gate fidelity `F̄(E) = ∫dψ ⟨ψ|E(|ψ⟩⟨ψ|)|ψ⟩` by five routes:
//!
//! * `generators`: `1/d + 2/(d(d+1)) Σ_a tr[T_a E(T_a)]`, exact.
//! * `design`: `Σ_r c_r tr[ρ_r E(ρ_r)]` over an isotropic state design, exact.
//! * `povm`: `(1/d) Σ_r tr[O_r E(ρ_r)]` with `O_r = ρ_r/d`, minimal designs only.
//! * `mc_haar`: sample mean over Haar-random pure states, with a standard error.
//! * `entanglement`: `(d F_e + 1)/(d + 1)` from the entanglement fidelity of
//!   the maximally entangled state (an external identity used as a cross-check).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::designs::{povm_elements, verify_design, StateDesign};
use crate::error::{Error, Result};
use crate::haar::{sample_pure_state, SampleStream};
use crate::su_basis::{gell_mann_basis, GeneratorBasis};
use crate::tensor::{ComplexMatrix, PureState, Tolerances, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    Generators,
    Design,
    Povm,
    McHaar,
    Entanglement,
}

impl FidelityMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FidelityMethod::Generators => "generators",
            FidelityMethod::Design => "design",
            FidelityMethod::Povm => "povm",
            FidelityMethod::McHaar => "mc_haar",
            FidelityMethod::Entanglement => "entanglement",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub method: FidelityMethod,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    pub metadata: BTreeMap<String, String>,
}

impl FidelityReport {
    fn new(method: FidelityMethod, value: f64, channel: &KrausChannel) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("dim".to_string(), channel.dim().to_string());
        metadata.insert("kraus_ops".to_string(), channel.kraus_ops().len().to_string());
        Self {
            method,
            value,
            std_error: None,
            n_samples: None,
            metadata,
        }
    }

    fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

fn check_dim(channel: &KrausChannel, d: usize) -> Result<()> {
    if channel.dim() == d {
        Ok(())
    } else {
        Err(Error::dims(channel.dim(), d))
    }
}

/// `tr[A E(A)]` for Hermitian `A`.
fn self_response(channel: &KrausChannel, a: &ComplexMatrix) -> Result<f64> {
    Ok(a.trace_product(&channel.apply_operator(a)?)?.re)
}

pub fn avg_fidelity_generators(channel: &KrausChannel, basis: &GeneratorBasis) -> Result<FidelityReport> {
    let d = basis.dim();
    check_dim(channel, d)?;
    let mut sum = 0.0;
    for t in basis.generators() {
        sum += self_response(channel, t)?;
    }
    let df = d as f64;
    let value = 1.0 / df + 2.0 / (df * (df + 1.0)) * sum;
    Ok(FidelityReport::new(FidelityMethod::Generators, value, channel))
}

/// Qubit form `1/2 + (1/3) Σ_i tr[(σ_i/2) E(σ_i/2)]`.
pub fn avg_fidelity_qubit(channel: &KrausChannel) -> Result<f64> {
    check_dim(channel, 2)?;
    let mut sum = 0.0;
    for s in crate::su_basis::pauli() {
        sum += self_response(channel, &s.scale_real(0.5))?;
    }
    Ok(0.5 + sum / 3.0)
}

/// Design estimator after verifying the design at `design_tol`.
pub fn avg_fidelity_design_checked(
    channel: &KrausChannel,
    design: &StateDesign,
    design_tol: f64,
) -> Result<FidelityReport> {
    let d = design.dim();
    check_dim(channel, d)?;
    let basis = gell_mann_basis(d)?;
    verify_design(design, &basis)?.require(design_tol)?;
    let mut value = 0.0;
    for (c, psi) in design.weights().iter().zip(design.states()) {
        value += c * self_response(channel, psi.density().matrix())?;
    }
    Ok(FidelityReport::new(FidelityMethod::Design, value, channel)
        .with("design", design.source())
        .with("design_size", design.len()))
}

pub fn avg_fidelity_design(channel: &KrausChannel, design: &StateDesign) -> Result<FidelityReport> {
    avg_fidelity_design_checked(channel, design, Tolerances::DEFAULT.design)
}

pub fn avg_fidelity_povm_form_checked(
    channel: &KrausChannel,
    design: &StateDesign,
    design_tol: f64,
) -> Result<FidelityReport> {
    let d = design.dim();
    check_dim(channel, d)?;
    let povm = povm_elements(design)?;
    verify_design(design, &gell_mann_basis(d)?)?.require(design_tol)?;
    let mut sum = 0.0;
    for (op, psi) in povm.iter().zip(design.states()) {
        let out = channel.apply_operator(psi.density().matrix())?;
        sum += op.trace_product(&out)?.re;
    }
    Ok(FidelityReport::new(FidelityMethod::Povm, sum / d as f64, channel)
        .with("design", design.source())
        .with("design_size", design.len()))
}

pub fn avg_fidelity_povm_form(channel: &KrausChannel, design: &StateDesign) -> Result<FidelityReport> {
    avg_fidelity_povm_form_checked(channel, design, Tolerances::DEFAULT.design)
}

/// Sample mean of `tr[ρ_ψ E(ρ_ψ)]` over Haar-random `ψ`; sample `i` is drawn
/// from stream `(seed, i)`. Terms are summed in index order so the value does
/// not depend on how the work is split across threads.
pub fn mc_haar_fidelity(channel: &KrausChannel, n_samples: usize, seed: u64) -> Result<FidelityReport> {
    if n_samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo estimate needs at least 100 samples, got {n_samples}"
        )));
    }
    let d = channel.dim();
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|counter| {
            let rho = sample_pure_state(&SampleStream::new(seed, counter, d)).density();
            self_response(channel, rho.matrix()).expect("dimensions match")
        })
        .collect();
    let n = n_samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mut report = FidelityReport::new(FidelityMethod::McHaar, mean, channel).with("seed", seed);
    report.std_error = Some((var / n).sqrt());
    report.n_samples = Some(n_samples);
    Ok(report)
}

/// `|Φ⟩ = (1/√d) Σ_j |jj⟩`.
pub fn maximally_entangled(d: usize) -> PureState {
    let mut amps = vec![ZERO; d * d];
    let a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        amps[j * d + j] = a;
    }
    PureState::normalized(amps).expect("nonzero")
}

/// `F_e = ⟨Φ|(E ⊗ id)(|Φ⟩⟨Φ|)|Φ⟩`.
pub fn entanglement_fidelity(channel: &KrausChannel) -> Result<f64> {
    let phi = maximally_entangled(channel.dim());
    let rho = phi.density();
    let out = channel.apply_extended(&rho)?;
    Ok(rho.matrix().trace_product(out.matrix())?.re)
}

pub fn avg_fidelity_entanglement(channel: &KrausChannel) -> Result<FidelityReport> {
    let fe = entanglement_fidelity(channel)?;
    let d = channel.dim() as f64;
    Ok(
        FidelityReport::new(FidelityMethod::Entanglement, (d * fe + 1.0) / (d + 1.0), channel)
            .with("entanglement_fidelity", format!("{fe:?}"))
            .with("identity", "external identity: F = (d F_e + 1) / (d + 1)"),
    )
}

/// Estimator selection for [`gate_fidelity`].
#[derive(Debug, Clone)]
pub enum Estimator {
    Generators,
    Design { design: StateDesign, tol: f64 },
    Povm { design: StateDesign, tol: f64 },
    McHaar { n_samples: usize, seed: u64 },
    Entanglement,
}

impl Estimator {
    pub fn method(&self) -> FidelityMethod {
        match self {
            Estimator::Generators => FidelityMethod::Generators,
            Estimator::Design { .. } => FidelityMethod::Design,
            Estimator::Povm { .. } => FidelityMethod::Povm,
            Estimator::McHaar { .. } => FidelityMethod::McHaar,
            Estimator::Entanglement => FidelityMethod::Entanglement,
        }
    }

    pub fn estimate(&self, channel: &KrausChannel) -> Result<FidelityReport> {
        match self {
            Estimator::Generators => avg_fidelity_generators(channel, &gell_mann_basis(channel.dim())?),
            Estimator::Design { design, tol } => avg_fidelity_design_checked(channel, design, *tol),
            Estimator::Povm { design, tol } => avg_fidelity_povm_form_checked(channel, design, *tol),
            Estimator::McHaar { n_samples, seed } => mc_haar_fidelity(channel, *n_samples, *seed),
            Estimator::Entanglement => avg_fidelity_entanglement(channel),
        }
    }
}

/// `F̄(E, U)`: the chosen estimator applied to `ρ ↦ E(U† ρ U)`.
pub fn gate_fidelity(channel: &KrausChannel, gate: &ComplexMatrix, estimator: &Estimator) -> Result<FidelityReport> {
    let reduced = channel.precompose_gate(gate)?;
    Ok(estimator.estimate(&reduced)?.with("gate", "precomposed"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{depolarizing, random_channel, unitary_channel};
    use crate::designs::{nonuple_d3, octahedron_d2, tetrahedron_d2};
    use crate::haar::sample_unitary;
    use crate::su_basis::pauli;

    fn depolarizing_oracle(d: usize, p: f64) -> f64 {
        1.0 - p * (d as f64 - 1.0) / d as f64
    }

    fn qubit_dephasing() -> KrausChannel {
        let [_, _, z] = pauli();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        KrausChannel::new(vec![ComplexMatrix::identity(2).scale_real(h), z.scale_real(h)]).unwrap()
    }

    #[test]
    fn identity_channel_has_unit_fidelity() {
        for d in 2..=5 {
            let id = KrausChannel::identity(d);
            let value = avg_fidelity_generators(&id, &gell_mann_basis(d).unwrap()).unwrap().value;
            assert!((value - 1.0).abs() < 1e-14);
            assert!((avg_fidelity_entanglement(&id).unwrap().value - 1.0).abs() < 1e-14);
        }
        let id = KrausChannel::identity(2);
        assert!((avg_fidelity_design(&id, &tetrahedron_d2()).unwrap().value - 1.0).abs() < 1e-14);
        assert!((avg_fidelity_povm_form(&id, &tetrahedron_d2()).unwrap().value - 1.0).abs() < 1e-14);
        let mc = mc_haar_fidelity(&id, 1000, 3).unwrap();
        assert!((mc.value - 1.0).abs() < 1e-12);
        assert!(mc.std_error.unwrap() < 1e-12);
    }

    #[test]
    fn depolarizing_closed_form() {
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            let design = crate::designs::exact_minimal(d).unwrap();
            for p in [0.0, 0.3, 1.0] {
                let ch = depolarizing(d, p).unwrap();
                let expected = depolarizing_oracle(d, p);
                assert!((avg_fidelity_generators(&ch, &basis).unwrap().value - expected).abs() < 1e-12);
                assert!((avg_fidelity_design(&ch, &design).unwrap().value - expected).abs() < 1e-12);
                assert!((avg_fidelity_entanglement(&ch).unwrap().value - expected).abs() < 1e-12);
                let fe = entanglement_fidelity(&ch).unwrap();
                let d2 = (d * d) as f64;
                assert!((fe - (1.0 - p * (d2 - 1.0) / d2)).abs() < 1e-12);
            }
        }
        assert!((avg_fidelity_generators(&depolarizing(2, 1.0).unwrap(), &gell_mann_basis(2).unwrap()).unwrap().value - 0.5).abs() < 1e-15);
        let povm = avg_fidelity_povm_form(&depolarizing(3, 0.5).unwrap(), &nonuple_d3()).unwrap();
        assert!((povm.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn qubit_dephasing_is_two_thirds() {
        let value = avg_fidelity_generators(&qubit_dephasing(), &gell_mann_basis(2).unwrap()).unwrap().value;
        assert!((value - 2.0 / 3.0).abs() < 1e-12);
        assert!((avg_fidelity_qubit(&qubit_dephasing()).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn octahedron_agrees_with_generators() {
        let ch = random_channel(2, 3, 8).unwrap();
        let g = avg_fidelity_generators(&ch, &gell_mann_basis(2).unwrap()).unwrap().value;
        let o = avg_fidelity_design(&ch, &octahedron_d2()).unwrap().value;
        assert!((g - o).abs() < 1e-12);
        assert!(avg_fidelity_povm_form(&ch, &octahedron_d2()).is_err());
    }

    #[test]
    fn estimators_agree_on_random_channels() {
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            let design = crate::designs::exact_minimal(d).unwrap();
            for seed in 0..10 {
                let ch = random_channel(d, 1 + seed as usize % (d * d), seed).unwrap();
                let g = avg_fidelity_generators(&ch, &basis).unwrap().value;
                let s = avg_fidelity_design(&ch, &design).unwrap().value;
                let p = avg_fidelity_povm_form(&ch, &design).unwrap().value;
                let e = avg_fidelity_entanglement(&ch).unwrap().value;
                assert!((g - s).abs() < 1e-10);
                assert!((s - p).abs() < 1e-14);
                assert!((g - e).abs() < 1e-10);
                assert!((-1e-10..=1.0 + 1e-10).contains(&g));
            }
        }
    }

    #[test]
    fn entanglement_fidelity_matches_kraus_traces() {
        // F_e = Σ_i |tr K_i|² / d², computed without the bipartite state.
        let ch = random_channel(3, 4, 17).unwrap();
        let direct: f64 = ch.kraus_ops().iter().map(|k| k.trace().unwrap().norm_sqr()).sum::<f64>() / 9.0;
        assert!((entanglement_fidelity(&ch).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn mc_agrees_within_statistical_error() {
        let ch = random_channel(2, 2, 4).unwrap();
        let exact = avg_fidelity_generators(&ch, &gell_mann_basis(2).unwrap()).unwrap().value;
        let mc = mc_haar_fidelity(&ch, 20_000, 9).unwrap();
        assert!((mc.value - exact).abs() < 5.0 * mc.std_error.unwrap());
        assert!(mc_haar_fidelity(&ch, 99, 9).is_err());
    }

    #[test]
    fn design_estimator_rejects_bad_designs() {
        let psi = PureState::basis(2, 0);
        let bad = StateDesign::uniform(vec![psi.clone(), psi], "bad").unwrap();
        let err = avg_fidelity_design(&KrausChannel::identity(2), &bad).unwrap_err();
        assert!(matches!(err, Error::DesignVerification { .. }));
        assert!(avg_fidelity_design(&KrausChannel::identity(3), &tetrahedron_d2()).is_err());
    }

    #[test]
    fn gate_fidelity_examples() {
        for d in 2..=4 {
            let v = sample_unitary(&SampleStream::new(31, d as u64, d));
            let ch = unitary_channel(&v).unwrap();
            let value = gate_fidelity(&ch, &v, &Estimator::Generators).unwrap().value;
            assert!((value - 1.0).abs() < 1e-12);
        }
        let [x, _, _] = pauli();
        let id = KrausChannel::identity(2);
        for est in [
            Estimator::Generators,
            Estimator::Entanglement,
            Estimator::Design { design: tetrahedron_d2(), tol: 1e-8 },
            Estimator::Povm { design: tetrahedron_d2(), tol: 1e-8 },
        ] {
            let value = gate_fidelity(&id, &x, &est).unwrap().value;
            assert!((value - 1.0 / 3.0).abs() < 1e-12, "{:?}", est.method());
        }
        let mc = gate_fidelity(&id, &x, &Estimator::McHaar { n_samples: 20_000, seed: 1 }).unwrap();
        assert!((mc.value - 1.0 / 3.0).abs() < 5.0 * mc.std_error.unwrap());

        let v = sample_unitary(&SampleStream::new(5, 0, 2));
        let noisy = depolarizing(2, 0.4).unwrap().after_unitary(&v).unwrap();
        let value = gate_fidelity(&noisy, &v, &Estimator::Generators).unwrap().value;
        assert!((value - 0.8).abs() < 1e-12);
    }

    #[test]
    fn report_serialization() {
        let report = avg_fidelity_generators(&KrausChannel::identity(2), &gell_mann_basis(2).unwrap()).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.starts_with(r#"{"method":"generators","value":1.0,"metadata":"#), "{json}");
        let mc = mc_haar_fidelity(&KrausChannel::identity(2), 100, 0).unwrap();
        let json = serde_json::to_value(&mc).unwrap();
        assert_eq!(json["method"], "mc_haar");
        assert!(json.get("std_error").is_some());
    }
}
