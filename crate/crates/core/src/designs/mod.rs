//! Weighted isotropic state sets `{(c_r, ψ_r)}` whose Bloch vectors satisfy
//!
//! ```text
//! Σ_r c_r n_r = 0,     Σ_r c_r n_r n_rᵀ = 1 / (d² - 1),
//! ```
//!
//! so that the fidelity integral over all pure states collapses to a finite
//! weighted sum. Minimal designs have `d²` equally weighted states with
//! pairwise overlaps `1/(d+1)`.

mod search;

pub use search::{simplex_search, simplex_search_with, weyl_heisenberg_orbit, SearchConfig, SearchOutcome};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::su_basis::{BlochVector, GeneratorBasis};
use crate::tensor::{ComplexMatrix, PureState, C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct StateDesign {
    dim: usize,
    weights: Vec<f64>,
    states: Vec<PureState>,
    source: String,
}

impl StateDesign {
    /// Checks shapes and positivity of the weights. The isotropy conditions
    /// are not enforced here; see [`verify_design`].
    pub fn new(weights: Vec<f64>, states: Vec<PureState>, source: impl Into<String>) -> Result<Self> {
        let dim = states
            .first()
            .map(PureState::dim)
            .ok_or_else(|| Error::InvalidParameter("design has no states".into()))?;
        if weights.len() != states.len() {
            return Err(Error::dims(
                format!("{} weights", states.len()),
                weights.len(),
            ));
        }
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::dims(dim, bad.dim()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(format!("design weight {w} is not positive")));
        }
        Ok(Self {
            dim,
            weights,
            states,
            source: source.into(),
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(states: Vec<PureState>, source: impl Into<String>) -> Result<Self> {
        let n = states.len() as f64;
        Self::new(vec![1.0 / n; states.len()], states, source)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    /// Where the design came from (constructor name, search seed, file path).
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    /// `d²` states, each weighted `1/d²`.
    pub fn is_minimal(&self) -> bool {
        let d2 = self.dim * self.dim;
        self.len() == d2
            && self
                .weights
                .iter()
                .all(|w| (w - 1.0 / d2 as f64).abs() <= 1e-12)
    }

    /// Replaces one state, keeping its weight.
    pub fn replace_state(&mut self, index: usize, state: PureState) -> Result<()> {
        if state.dim() != self.dim {
            return Err(Error::dims(self.dim, state.dim()));
        }
        self.states[index] = state;
        Ok(())
    }
}

fn qubit_state_from_bloch(n: [f64; 3]) -> PureState {
    // (1 + n_z, n_x + i n_y) / sqrt(2(1 + n_z)) has Bloch vector n.
    let [x, y, z] = n;
    if z <= -1.0 + 1e-15 {
        return PureState::basis(2, 1);
    }
    PureState::normalized(vec![C64::new(1.0 + z, 0.0), C64::new(x, y)]).expect("nonzero")
}

/// Four qubit states at the vertices of a regular tetrahedron:
/// `(1,1,1)/√3`, `(-1,-1,1)/√3` and the two cyclic permutations of the latter.
pub fn tetrahedron_d2() -> StateDesign {
    let s = 1.0 / 3f64.sqrt();
    let vectors = [[s, s, s], [-s, -s, s], [s, -s, -s], [-s, s, -s]];
    let states = vectors.into_iter().map(qubit_state_from_bloch).collect();
    StateDesign::uniform(states, "tetrahedron_d2").expect("valid design")
}

/// Six qubit states along `±x, ±y, ±z`.
pub fn octahedron_d2() -> StateDesign {
    let vectors = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let states = vectors.into_iter().map(qubit_state_from_bloch).collect();
    StateDesign::uniform(states, "octahedron_d2").expect("valid design")
}

/// Nine qutrit states `(1, ω^r, 0)/√2`, `r = 0, 1, 2`, `ω = e^{2πi/3}`,
/// together with their two cyclic component shifts. Every state involves
/// only two computational levels.
pub fn nonuple_d3() -> StateDesign {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let base: Vec<PureState> = (0..3)
        .map(|r| {
            let phase = C64::from_polar(h, std::f64::consts::TAU * r as f64 / 3.0);
            PureState::normalized(vec![C64::new(h, 0.0), phase, ZERO]).expect("nonzero")
        })
        .collect();
    let once: Vec<PureState> = base.iter().map(PureState::cyclic_shift).collect();
    let twice: Vec<PureState> = once.iter().map(PureState::cyclic_shift).collect();
    let states = base.into_iter().chain(once).chain(twice).collect();
    StateDesign::uniform(states, "nonuple_d3").expect("valid design")
}

/// The closed-form minimal design for `d = 2` or `d = 3`.
pub fn exact_minimal(d: usize) -> Result<StateDesign> {
    match d {
        2 => Ok(tetrahedron_d2()),
        3 => Ok(nonuple_d3()),
        _ => Err(Error::NoExactDesign(d)),
    }
}

/// Residuals of every isotropy condition a design should satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub dim: usize,
    pub n_states: usize,
    pub minimal: bool,
    /// `|Σ c_r - 1|`.
    pub weight_sum: f64,
    /// `max_b |Σ c_r n_r^b|`.
    pub first_moment: f64,
    /// `max_{b,e} |Σ c_r n_r^b n_r^e - δ_be / (d²-1)|`.
    pub second_moment: f64,
    /// `max_{r≠s} |n_r·n_s + 1/(d²-1)|`, only for `d²`-element designs.
    pub bloch_dot: Option<f64>,
    /// `max_{r≠s} ||⟨ψ_r|ψ_s⟩|² - 1/(d+1)|`, only for `d²`-element designs.
    pub overlap: Option<f64>,
    /// `‖Σ c_r d ρ_r - 1‖_F`.
    pub povm_completeness: f64,
}

impl DesignReport {
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("weight_sum", self.weight_sum),
            ("first_moment", self.first_moment),
            ("second_moment", self.second_moment),
        ];
        if let Some(x) = self.bloch_dot {
            out.push(("bloch_dot", x));
        }
        if let Some(x) = self.overlap {
            out.push(("overlap", x));
        }
        out.push(("povm_completeness", self.povm_completeness));
        out
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().map(|(_, x)| x).fold(0.0, f64::max)
    }

    /// Fails with the first residual above `tol`. NaN residuals fail too.
    pub fn require(&self, tol: f64) -> Result<()> {
        match self.residuals().into_iter().find(|(_, x)| x.is_nan() || *x > tol) {
            None => Ok(()),
            Some((residual, value)) => Err(Error::DesignVerification { residual, value, tol }),
        }
    }
}

/// Measures how well `design` satisfies the isotropy conditions. Never
/// rejects: degenerate designs (duplicates, wrong sizes) simply produce
/// large residuals.
pub fn verify_design(design: &StateDesign, basis: &GeneratorBasis) -> Result<DesignReport> {
    let d = design.dim();
    if basis.dim() != d {
        return Err(Error::dims(basis.dim(), d));
    }
    let m = basis.len();
    let bloch: Vec<BlochVector> = design
        .states()
        .iter()
        .map(|s| basis.bloch_of_state(s))
        .collect::<Result<_>>()?;

    let weight_sum = (design.weights().iter().sum::<f64>() - 1.0).abs();

    let mut first = vec![0.0; m];
    let mut second = vec![0.0; m * m];
    for (c, n) in design.weights().iter().zip(&bloch) {
        let x = n.components();
        for b in 0..m {
            first[b] += c * x[b];
            for e in 0..m {
                second[b * m + e] += c * x[b] * x[e];
            }
        }
    }
    let first_moment = first.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let target = 1.0 / m as f64;
    let second_moment = (0..m * m)
        .map(|i| (second[i] - if i / m == i % m { target } else { 0.0 }).abs())
        .fold(0.0, f64::max);

    let (bloch_dot, overlap) = if design.len() == d * d {
        let mut dot_dev = 0.0f64;
        let mut overlap_dev = 0.0f64;
        let overlap_target = 1.0 / (d + 1) as f64;
        for r in 0..design.len() {
            for s in (r + 1)..design.len() {
                dot_dev = dot_dev.max((bloch[r].dot(&bloch[s]) + target).abs());
                let o = design.states()[r].overlap(&design.states()[s]);
                overlap_dev = overlap_dev.max((o - overlap_target).abs());
            }
        }
        (Some(dot_dev), Some(overlap_dev))
    } else {
        (None, None)
    };

    let mut frame = ComplexMatrix::zeros(d, d);
    for (c, s) in design.weights().iter().zip(design.states()) {
        frame = &frame + &s.density().matrix().scale_real(c * d as f64);
    }
    let povm_completeness = (&frame - &ComplexMatrix::identity(d)).frobenius_norm();

    Ok(DesignReport {
        dim: d,
        n_states: design.len(),
        minimal: design.is_minimal(),
        weight_sum,
        first_moment,
        second_moment,
        bloch_dot,
        overlap,
        povm_completeness,
    })
}

/// POVM elements `O_r = ρ_r / d` of a minimal equal-weight design.
pub fn povm_elements(design: &StateDesign) -> Result<Vec<ComplexMatrix>> {
    if !design.is_minimal() {
        return Err(Error::NotMinimal(format!(
            "{} states with weights {:?}",
            design.len(),
            &design.weights()[..design.len().min(4)]
        )));
    }
    let scale = 1.0 / design.dim() as f64;
    Ok(design
        .states()
        .iter()
        .map(|s| s.density().matrix().scale_real(scale))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su_basis::gell_mann_basis;

    fn report(design: &StateDesign) -> DesignReport {
        verify_design(design, &gell_mann_basis(design.dim()).unwrap()).unwrap()
    }

    #[test]
    fn tetrahedron_vectors() {
        let design = tetrahedron_d2();
        let basis = gell_mann_basis(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let n1 = basis.bloch_of_state(&design.states()[0]).unwrap();
        for x in n1.components() {
            assert!((x - s).abs() < 1e-15);
        }
        let n2 = basis.bloch_of_state(&design.states()[1]).unwrap();
        for (x, y) in n2.components().iter().zip([-s, -s, s]) {
            assert!((x - y).abs() < 1e-15);
        }
        let bloch: Vec<_> = design.states().iter().map(|st| basis.bloch_of_state(st).unwrap()).collect();
        for r in 0..4 {
            for t in (r + 1)..4 {
                assert!((bloch[r].dot(&bloch[t]) + 1.0 / 3.0).abs() < 1e-15);
                assert!((design.states()[r].overlap(&design.states()[t]) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!(design.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn tetrahedron_passes_verification() {
        let r = report(&tetrahedron_d2());
        assert!(r.max_residual() < 1e-14, "{r:?}");
    }

    #[test]
    fn nonuple_states_and_overlaps() {
        let design = nonuple_d3();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(design.states()[0].amplitudes(), &[C64::new(h, 0.0), C64::new(h, 0.0), ZERO]);
        let mut pairs = 0;
        for r in 0..9 {
            let zeros = design.states()[r].amplitudes().iter().filter(|z| z.norm() == 0.0).count();
            assert_eq!(zeros, 1, "state {r} touches two levels");
            for s in (r + 1)..9 {
                assert!((design.states()[r].overlap(&design.states()[s]) - 0.25).abs() < 1e-15);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 36);
        let rep = report(&design);
        assert!(rep.max_residual() < 1e-12, "{rep:?}");
    }

    #[test]
    fn octahedron_moments() {
        let rep = report(&octahedron_d2());
        assert!(rep.weight_sum < 1e-14);
        assert!(rep.first_moment < 1e-14);
        assert!(rep.second_moment < 1e-14);
        assert!(rep.povm_completeness < 1e-14);
        assert_eq!(rep.overlap, None);
        assert!(!rep.minimal);
    }

    #[test]
    fn perturbed_design_is_detected() {
        let mut design = tetrahedron_d2();
        let (c, s) = (1e-3f64.cos(), 1e-3f64.sin());
        // exp(-i θ σ_x) with θ = 1e-3.
        let u = ComplexMatrix::new(2, 2, vec![C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)]).unwrap();
        let moved = design.states()[0].evolve(&u).unwrap();
        design.replace_state(0, moved).unwrap();
        let rep = report(&design);
        assert!(rep.second_moment > 1e-8, "{rep:?}");
        assert!(rep.require(1e-8).is_err());
    }

    #[test]
    fn duplicate_states_are_reported_not_rejected() {
        let psi = PureState::basis(2, 0);
        let design = StateDesign::uniform(vec![psi.clone(), psi.clone(), psi.clone(), psi], "dup").unwrap();
        let rep = report(&design);
        assert!(rep.first_moment > 0.5);
        assert!(matches!(
            rep.require(1e-8),
            Err(Error::DesignVerification { residual: "first_moment", .. })
        ));
    }

    #[test]
    fn povm_examples() {
        let ops = povm_elements(&tetrahedron_d2()).unwrap();
        assert_eq!(ops.len(), 4);
        let mut total = ComplexMatrix::zeros(2, 2);
        for op in &ops {
            assert!(op.hermitian_eigenvalues().unwrap()[0] >= -1e-12);
            total = &total + op;
        }
        assert!((&total - &ComplexMatrix::identity(2)).max_abs() < 1e-10);

        let ops = povm_elements(&nonuple_d3()).unwrap();
        assert_eq!(ops.len(), 9);
        for op in &ops {
            assert!((op.trace().unwrap() - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
            assert!(op.hermitian_eigenvalues().unwrap()[0] >= -1e-12);
        }
        assert!(matches!(povm_elements(&octahedron_d2()), Err(Error::NotMinimal(_))));
    }

    #[test]
    fn design_constructor_validates_shapes() {
        let s2 = PureState::basis(2, 0);
        let s3 = PureState::basis(3, 0);
        assert!(StateDesign::new(vec![0.5, 0.5], vec![s2.clone(), s3], "x").is_err());
        assert!(StateDesign::new(vec![1.0], vec![s2.clone(), s2.clone()], "x").is_err());
        assert!(StateDesign::new(vec![1.5, -0.5], vec![s2.clone(), s2], "x").is_err());
        assert!(StateDesign::new(vec![], vec![], "x").is_err());
    }

    #[test]
    fn exact_minimal_dispatch() {
        assert_eq!(exact_minimal(2).unwrap(), tetrahedron_d2());
        assert_eq!(exact_minimal(3).unwrap(), nonuple_d3());
        assert!(matches!(exact_minimal(4), Err(Error::NoExactDesign(4))));
    }
}
