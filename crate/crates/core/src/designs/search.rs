//! Numerical search for Weyl-Heisenberg covariant minimal designs.
//!
//! A fiducial `|ψ⟩` is sought such that every displaced overlap
//! `|⟨ψ|X^p Z^q|ψ⟩|²`, `(p, q) ≠ (0, 0)`, equals `1/(d+1)`. The `d² - 1`
//! overlap deviations are driven to zero by Levenberg-Marquardt from random
//! starting fiducials; the orbit `{X^p Z^q |ψ⟩}` is then a minimal design.

use rayon::prelude::*;

use super::StateDesign;
use crate::channels::weyl;
use crate::error::{Error, Result};
use crate::haar::{sample_pure_state, SampleStream};
use crate::tensor::{inner, norm_sqr, ComplexMatrix, PureState, C64};

/// Restarts are evaluated in fixed batches so early termination is
/// independent of the thread count.
const BATCH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Largest accepted `||⟨ψ|D|ψ⟩|² - 1/(d+1)|`.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 10_000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub design: StateDesign,
    pub fiducial: PureState,
    pub max_overlap_deviation: f64,
    /// Index of the restart that produced the fiducial.
    pub restart: usize,
    pub iterations: usize,
    pub restarts_run: usize,
}

/// Searches with the default budget and the given tolerance.
pub fn simplex_search(d: usize, seed: u64, tol: f64) -> Result<StateDesign> {
    let config = SearchConfig {
        tol,
        ..SearchConfig::default()
    };
    simplex_search_with(d, seed, &config).map(|o| o.design)
}

pub fn simplex_search_with(d: usize, seed: u64, config: &SearchConfig) -> Result<SearchOutcome> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("fiducial search needs d >= 2, got {d}")));
    }
    if config.restarts == 0 || config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::InvalidParameter(
            "search needs a positive restart budget and tolerance".into(),
        ));
    }
    let problem = OverlapProblem::new(d);
    let mut best: Option<(usize, LocalResult)> = None;
    let mut run = 0;
    while run < config.restarts {
        let end = (run + BATCH).min(config.restarts);
        let results: Vec<LocalResult> = (run..end)
            .into_par_iter()
            .map(|restart| {
                let start = sample_pure_state(&SampleStream::new(seed, restart as u64, d));
                problem.minimize(start.amplitudes(), config.max_iters)
            })
            .collect();
        for (offset, result) in results.into_iter().enumerate() {
            // Strict comparison keeps the lowest index among ties.
            let better = match &best {
                None => true,
                Some((_, b)) => result.max_deviation < b.max_deviation,
            };
            if better {
                best = Some((run + offset, result));
            }
        }
        run = end;
        if best.as_ref().is_some_and(|(_, b)| b.max_deviation <= config.tol) {
            break;
        }
    }
    let (restart, result) = best.expect("at least one restart");
    if result.max_deviation.is_nan() || result.max_deviation > config.tol {
        return Err(Error::SearchFailed {
            best_residual: result.max_deviation,
            restarts: run,
            tol: config.tol,
        });
    }
    let fiducial = PureState::normalized(result.fiducial)?;
    let design = weyl_heisenberg_orbit(&fiducial)?
        .with_source(format!("weyl_heisenberg_search(d={d}, seed={seed}, restart={restart})"));
    Ok(SearchOutcome {
        design,
        fiducial,
        max_overlap_deviation: result.max_deviation,
        restart,
        iterations: result.iterations,
        restarts_run: run,
    })
}

/// The `d²` states `X^p Z^q |ψ⟩`, `p` major, each weighted `1/d²`.
pub fn weyl_heisenberg_orbit(fiducial: &PureState) -> Result<StateDesign> {
    let d = fiducial.dim();
    let mut states = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in 0..d {
            states.push(PureState::normalized(weyl(d, p, q).apply_vec(fiducial.amplitudes())?)?);
        }
    }
    StateDesign::uniform(states, "weyl_heisenberg_orbit")
}

struct LocalResult {
    fiducial: Vec<C64>,
    max_deviation: f64,
    iterations: usize,
}

struct OverlapProblem {
    d: usize,
    target: f64,
    /// `(D, D†)` for every nontrivial displacement.
    displacements: Vec<(ComplexMatrix, ComplexMatrix)>,
}

impl OverlapProblem {
    fn new(d: usize) -> Self {
        let displacements = (0..d)
            .flat_map(|p| (0..d).map(move |q| (p, q)))
            .filter(|&pq| pq != (0, 0))
            .map(|(p, q)| {
                let w = weyl(d, p, q);
                let wd = w.dagger();
                (w, wd)
            })
            .collect();
        Self {
            d,
            target: 1.0 / (d + 1) as f64,
            displacements,
        }
    }

    fn to_complex(&self, x: &[f64]) -> Vec<C64> {
        (0..self.d).map(|j| C64::new(x[j], x[self.d + j])).collect()
    }

    fn residuals(&self, psi: &[C64]) -> Vec<f64> {
        let n2 = norm_sqr(psi).powi(2);
        self.displacements
            .iter()
            .map(|(w, _)| inner(psi, &w.apply_vec(psi).expect("dims")).norm_sqr() / n2 - self.target)
            .collect()
    }

    /// Residuals and their Jacobian with respect to `(Re ψ, Im ψ)`, for an
    /// unnormalized `ψ`: with `a = ⟨ψ|D|ψ⟩` and `N = ⟨ψ|ψ⟩`, the Wirtinger
    /// derivative of `|a|²/N²` is `(ā Dψ + a D†ψ)/N² - 2|a|² ψ/N³`.
    fn residuals_and_jacobian(&self, psi: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.d;
        let n = norm_sqr(psi);
        let (n2, n3) = (n * n, n * n * n);
        let mut r = Vec::with_capacity(self.displacements.len());
        let mut jac = Vec::with_capacity(self.displacements.len() * 2 * d);
        for (w, wd) in &self.displacements {
            let dpsi = w.apply_vec(psi).expect("dims");
            let ddpsi = wd.apply_vec(psi).expect("dims");
            let a = inner(psi, &dpsi);
            let a2 = a.norm_sqr();
            r.push(a2 / n2 - self.target);
            let grad: Vec<C64> = (0..d)
                .map(|j| (a.conj() * dpsi[j] + a * ddpsi[j]) / n2 - psi[j] * (2.0 * a2 / n3))
                .collect();
            jac.extend(grad.iter().map(|g| 2.0 * g.re));
            jac.extend(grad.iter().map(|g| 2.0 * g.im));
        }
        (r, jac)
    }

    /// Levenberg-Marquardt with Nielsen's damping update.
    fn minimize(&self, start: &[C64], max_iters: usize) -> LocalResult {
        let d = self.d;
        let n_par = 2 * d;
        let mut x: Vec<f64> = start.iter().map(|z| z.re).chain(start.iter().map(|z| z.im)).collect();
        let (mut r, mut jac) = self.residuals_and_jacobian(&self.to_complex(&x));
        let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        let mut mu = -1.0;
        let mut nu = 2.0;
        let mut iterations = 0;

        while iterations < max_iters {
            iterations += 1;
            let (normal, grad) = normal_equations(&jac, &r, n_par);
            if grad.iter().all(|g| g.abs() < 1e-20) {
                break;
            }
            if mu < 0.0 {
                mu = 1e-3 * (0..n_par).map(|i| normal[i * n_par + i]).fold(0.0, f64::max);
            }
            let mut damped = normal.clone();
            for i in 0..n_par {
                damped[i * n_par + i] += mu;
            }
            let Some(step) = cholesky_solve(&damped, &grad.iter().map(|g| -g).collect::<Vec<_>>(), n_par) else {
                mu *= nu;
                nu *= 2.0;
                continue;
            };
            let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
            let x_norm = x.iter().map(|s| s * s).sum::<f64>().sqrt();
            if step_norm <= 1e-15 * (x_norm + 1e-15) {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let trial_r = self.residuals(&self.to_complex(&trial));
            let trial_cost = 0.5 * trial_r.iter().map(|v| v * v).sum::<f64>();
            // Predicted decrease of the quadratic model.
            let predicted: f64 = 0.5
                * step
                    .iter()
                    .zip(&grad)
                    .map(|(s, g)| s * (mu * s - g))
                    .sum::<f64>();
            let gain = (cost - trial_cost) / predicted.max(f64::MIN_POSITIVE);
            if gain > 0.0 && trial_cost.is_finite() {
                // Overlaps are scale invariant; renormalize to keep ψ well conditioned.
                let norm = trial.iter().map(|s| s * s).sum::<f64>().sqrt();
                x = trial.iter().map(|s| s / norm).collect();
                (r, jac) = self.residuals_and_jacobian(&self.to_complex(&x));
                cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
                mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
                nu = 2.0;
                if r.iter().all(|v| v.abs() < 1e-15) {
                    break;
                }
            } else {
                mu *= nu;
                nu *= 2.0;
                if !mu.is_finite() {
                    break;
                }
            }
        }

        let psi = self.to_complex(&x);
        let max_deviation = self
            .residuals(&psi)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        LocalResult {
            fiducial: psi,
            max_deviation,
            iterations,
        }
    }
}

/// `(JᵀJ, Jᵀr)` for a row-major `m x n` Jacobian.
fn normal_equations(jac: &[f64], r: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut normal = vec![0.0; n * n];
    let mut grad = vec![0.0; n];
    for (row, ri) in jac.chunks_exact(n).zip(r) {
        for i in 0..n {
            grad[i] += row[i] * ri;
            for j in 0..n {
                normal[i * n + j] += row[i] * row[j];
            }
        }
    }
    (normal, grad)
}

/// Solves `A x = b` for symmetric positive definite `A`; `None` if the
/// factorization breaks down.
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let diag = a[i * n + i] - s;
                if diag.is_nan() || diag <= 0.0 {
                    return None;
                }
                l[i * n + i] = diag.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{tetrahedron_d2, verify_design};
    use crate::su_basis::gell_mann_basis;

    #[test]
    fn jacobian_matches_finite_differences() {
        let problem = OverlapProblem::new(3);
        let psi = sample_pure_state(&SampleStream::new(2, 0, 3));
        let x: Vec<f64> = psi
            .amplitudes()
            .iter()
            .map(|z| z.re)
            .chain(psi.amplitudes().iter().map(|z| z.im))
            .collect();
        let (_, jac) = problem.residuals_and_jacobian(&problem.to_complex(&x));
        let h = 1e-6;
        let n = x.len();
        for k in 0..n {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += h;
            minus[k] -= h;
            let rp = problem.residuals(&problem.to_complex(&plus));
            let rm = problem.residuals(&problem.to_complex(&minus));
            for (i, (a, b)) in rp.iter().zip(&rm).enumerate() {
                let fd = (a - b) / (2.0 * h);
                assert!((fd - jac[i * n + k]).abs() < 1e-8, "row {i} col {k}: {fd} vs {}", jac[i * n + k]);
            }
        }
    }

    #[test]
    fn cholesky_solves_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!(cholesky_solve(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0], 2).is_none());
    }

    #[test]
    fn qubit_search_reproduces_tetrahedron_overlaps() {
        let design = simplex_search(2, 3, 1e-8).unwrap();
        let basis = gell_mann_basis(2).unwrap();
        let report = verify_design(&design, &basis).unwrap();
        assert!(report.max_residual() < 1e-8, "{report:?}");
        // Same overlap spectrum as the tetrahedron: a single value 1/3.
        let tetra = tetrahedron_d2();
        let spectrum = |des: &StateDesign| {
            let mut v = Vec::new();
            for r in 0..4 {
                for s in (r + 1)..4 {
                    v.push(des.states()[r].overlap(&des.states()[s]));
                }
            }
            v
        };
        for (a, b) in spectrum(&design).iter().zip(spectrum(&tetra)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn qutrit_search_has_flat_overlaps() {
        let outcome = simplex_search_with(3, 5, &SearchConfig::default()).unwrap();
        assert!(outcome.max_overlap_deviation <= 1e-8);
        let report = verify_design(&outcome.design, &gell_mann_basis(3).unwrap()).unwrap();
        assert!(report.overlap.unwrap() < 1e-8);
    }

    #[test]
    fn search_is_deterministic() {
        let a = simplex_search_with(4, 1, &SearchConfig::default()).unwrap();
        let b = simplex_search_with(4, 1, &SearchConfig::default()).unwrap();
        assert_eq!(a.design, b.design);
        assert_eq!(a.restart, b.restart);
    }

    #[test]
    fn exhausted_budget_reports_best_residual() {
        let config = SearchConfig {
            restarts: 1,
            max_iters: 1,
            tol: 1e-14,
        };
        match simplex_search_with(4, 0, &config) {
            Err(Error::SearchFailed { best_residual, restarts, .. }) => {
                assert!(best_residual > 1e-14);
                assert_eq!(restarts, 1);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(simplex_search(1, 0, 1e-8).is_err());
        assert!(simplex_search(3, 0, 0.0).is_err());
    }
}
