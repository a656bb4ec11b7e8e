//! Haar-distributed pure states and unitaries from counter-indexed random
//! streams, plus a Monte Carlo check of the adjoint-representation moments.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::su_basis::GeneratorBasis;
use crate::tensor::{norm_sqr, ComplexMatrix, PureState, C64};

/// Address of one independent sample: `(seed, counter)` selects a ChaCha20
/// keystream, so any sample can be regenerated without replaying the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStream {
    pub seed: u64,
    pub counter: u64,
    pub dim: usize,
}

impl SampleStream {
    pub fn new(seed: u64, counter: u64, dim: usize) -> Self {
        Self { seed, counter, dim }
    }

    pub fn at(&self, counter: u64) -> Self {
        Self { counter, ..*self }
    }

    fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.counter);
        rng
    }

    /// `n` standard complex Gaussians (real and imaginary parts each N(0, 1/2)).
    ///
    /// Uniforms are 53-bit floats from the keystream; each pair becomes one
    /// complex Gaussian by the Box-Muller transform.
    pub fn gaussians(&self, n: usize) -> Vec<C64> {
        let mut rng = self.rng();
        let mut uniform = move || ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        (0..n)
            .map(|_| {
                let u1 = uniform();
                let u2 = uniform();
                let r = (-u1.ln()).sqrt();
                let phi = std::f64::consts::TAU * u2;
                C64::new(r * phi.cos(), r * phi.sin())
            })
            .collect()
    }
}

/// Haar-random pure state: a normalized vector of complex Gaussians.
pub fn sample_pure_state(stream: &SampleStream) -> PureState {
    let mut v = stream.gaussians(stream.dim);
    // Measure-zero case.
    if norm_sqr(&v) == 0.0 {
        v[0] = C64::new(1.0, 0.0);
    }
    PureState::normalized(v).expect("finite nonzero Gaussian vector")
}

/// Orthonormalizes the columns of a `rows x cols` matrix in place (modified
/// Gram-Schmidt). The implied triangular factor has a real positive diagonal.
pub(crate) fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let (rows, cols) = (m.rows(), m.cols());
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
            for i in 0..rows {
                let q = m[(i, k)];
                m[(i, j)] -= q * proj;
            }
        }
        let norm = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            m[(i, j)] /= norm;
        }
    }
}

/// `rows x cols` matrix with independent complex Gaussian entries.
pub(crate) fn gaussian_matrix(stream: &SampleStream, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::new(rows, cols, stream.gaussians(rows * cols)).expect("finite entries")
}

/// Haar-random `d x d` unitary.
///
/// The Gaussian matrix is QR-factored by modified Gram-Schmidt. Gram-Schmidt
/// already yields a triangular factor with real positive diagonal, which is
/// the phase convention that makes `Q` Haar distributed.
pub fn sample_unitary(stream: &SampleStream) -> ComplexMatrix {
    let mut m = gaussian_matrix(stream, stream.dim, stream.dim);
    orthonormalize_columns(&mut m);
    m
}

/// Deviations of empirical adjoint-representation moments from their Haar values.
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    pub dim: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// `max |E[Ad U]_ab|`.
    pub first_moment_residual: f64,
    /// `max |E[Ad U_ab Ad U_cd] - δ_ac δ_bd / (d²-1)|`.
    pub second_moment_residual: f64,
    /// `1 / sqrt(n_samples)`.
    pub standard_error_scale: f64,
}

impl OrthogonalityReport {
    /// Both residuals within `bands` multiples of the standard-error scale.
    pub fn within(&self, bands: f64) -> bool {
        let limit = bands * self.standard_error_scale;
        self.first_moment_residual < limit && self.second_moment_residual < limit
    }
}

const CHUNK: usize = 1024;

/// Monte Carlo estimate of the first and second moments of `Ad U` over the
/// Haar measure. Samples are processed in fixed chunks whose partial sums are
/// combined in chunk order, so the result does not depend on the thread count.
pub fn mc_orthogonality_check(
    basis: &GeneratorBasis,
    n_samples: usize,
    seed: u64,
) -> OrthogonalityReport {
    let d = basis.dim();
    let m = basis.len();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut first = vec![0.0; m * m];
            let mut second = vec![0.0; m * m * m * m];
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n_samples);
            for counter in start..end {
                let u = sample_unitary(&SampleStream::new(seed, counter as u64, d));
                let ad = basis.adjoint_rep_unchecked(&u);
                let e = ad.entries();
                for (f, x) in first.iter_mut().zip(e) {
                    *f += x;
                }
                for (i, x) in e.iter().enumerate() {
                    let row = &mut second[i * m * m..(i + 1) * m * m];
                    for (s, y) in row.iter_mut().zip(e) {
                        *s += x * y;
                    }
                }
            }
            (first, second)
        })
        .collect();

    let mut first = vec![0.0; m * m];
    let mut second = vec![0.0; m * m * m * m];
    for (f, s) in &partials {
        first.iter_mut().zip(f).for_each(|(a, b)| *a += b);
        second.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let n = n_samples as f64;
    let first_moment_residual = first.iter().map(|x| (x / n).abs()).fold(0.0, f64::max);

    // Entry (i, j) of `second` pairs flat indices i = (b, a) and j = (d', c)
    // of Ad U; the Haar value is δ_bd' δ_ac / (d²-1).
    let expected = 1.0 / m as f64;
    let mut second_moment_residual = 0.0f64;
    for i in 0..m * m {
        for j in 0..m * m {
            let target = if i == j { expected } else { 0.0 };
            second_moment_residual =
                second_moment_residual.max((second[i * m * m + j] / n - target).abs());
        }
    }
    OrthogonalityReport {
        dim: d,
        n_samples,
        seed,
        first_moment_residual,
        second_moment_residual,
        standard_error_scale: 1.0 / n.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su_basis::gell_mann_basis;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let s = SampleStream::new(3, 17, 4);
        assert_eq!(s.gaussians(8), s.gaussians(8));
        assert_ne!(s.gaussians(8), s.at(18).gaussians(8));
        assert_ne!(s.gaussians(8), SampleStream::new(4, 17, 4).gaussians(8));
    }

    #[test]
    fn pure_states_are_normalized() {
        for counter in 0..50 {
            let psi = sample_pure_state(&SampleStream::new(1, counter, 5));
            assert!((norm_sqr(psi.amplitudes()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitaries_are_unitary() {
        for d in 1..=6 {
            for counter in 0..20 {
                let u = sample_unitary(&SampleStream::new(9, counter, d));
                assert!(u.unitarity_residual() < 1e-12, "d={d}");
                let uu = &u.dagger() * &u;
                assert!((&uu - &ComplexMatrix::identity(d)).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_moments() {
        let z = SampleStream::new(5, 0, 1).gaussians(200_000);
        let n = z.len() as f64;
        let mean: C64 = z.iter().sum::<C64>() / n;
        let second: f64 = z.iter().map(|w| w.norm_sqr()).sum::<f64>() / n;
        // E|z|² = 1 with Var|z|² = 1; E z = 0 with Var = 1.
        assert!(mean.norm() < 5.0 / n.sqrt());
        assert!((second - 1.0).abs() < 5.0 / n.sqrt());
    }

    #[test]
    fn mean_state_is_maximally_mixed() {
        let d = 3;
        let n = 100_000;
        let mut mean = ComplexMatrix::zeros(d, d);
        let mut mean_sq = vec![0.0; d * d];
        for counter in 0..n {
            let rho = sample_pure_state(&SampleStream::new(21, counter, d)).density();
            mean = &mean + rho.matrix();
            for (s, z) in mean_sq.iter_mut().zip(rho.matrix().as_slice()) {
                *s += z.norm_sqr();
            }
        }
        let n = n as f64;
        for i in 0..d {
            for j in 0..d {
                let m = mean[(i, j)] / n;
                let target = if i == j { 1.0 / d as f64 } else { 0.0 };
                let var = mean_sq[i * d + j] / n - m.norm_sqr();
                let se = (var / n).sqrt();
                assert!((m - C64::new(target, 0.0)).norm() < 5.0 * se, "({i},{j})");
            }
        }
    }

    #[test]
    fn haar_invariance_smoke_test() {
        // For fixed V and Hermitian probe M, tr(VρV†M) and tr(ρM) share a law;
        // compare their first two moments.
        let d = 3;
        let v = sample_unitary(&SampleStream::new(77, 0, d));
        let probe = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(-0.5, 0.0), C64::new(0.2, 0.0)]);
        let n = 50_000u64;
        let (mut a1, mut a2, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0);
        for counter in 0..n {
            let rho = sample_pure_state(&SampleStream::new(78, counter, d)).density();
            let x = rho.matrix().trace_product(&probe).unwrap().re;
            let rotated = &(&v * rho.matrix()) * &v.dagger();
            let y = rotated.trace_product(&probe).unwrap().re;
            a1 += x;
            a2 += x * x;
            b1 += y;
            b2 += y * y;
        }
        let n = n as f64;
        let (ma, mb) = (a1 / n, b1 / n);
        let (va, vb) = (a2 / n - ma * ma, b2 / n - mb * mb);
        let se = ((va + vb) / n).sqrt();
        assert!((ma - mb).abs() < 5.0 * se * 2f64.sqrt());
        assert!((va - vb).abs() < 0.05 * va);
    }

    #[test]
    fn orthogonality_residuals_are_statistical() {
        for d in [2, 3] {
            let basis = gell_mann_basis(d).unwrap();
            let report = mc_orthogonality_check(&basis, 20_000, 4);
            assert!(report.within(5.0), "{report:?}");
        }
    }

    #[test]
    fn orthogonality_is_thread_count_independent() {
        let basis = gell_mann_basis(2).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_orthogonality_check(&basis, 5_000, 8))
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.first_moment_residual.to_bits(), b.first_moment_residual.to_bits());
        assert_eq!(a.second_moment_residual.to_bits(), b.second_moment_residual.to_bits());
    }
}
