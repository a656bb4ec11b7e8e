//! Generalized Gell-Mann generators of SU(d), Bloch vectors and the adjoint
//! representation.
//!
//! Generators are normalized as `tr(T_a T_b) = δ_ab / 2` and ordered the way
//! the SU(3) Gell-Mann matrices are: for each level `k = 1..d-1`, the pairs
//! `(j, k)` with `j < k` contribute a symmetric then an antisymmetric
//! generator, followed by the diagonal generator that first involves level
//! `k`. For d = 2 this gives `σ/2`; for d = 3 it gives `λ_1/2 .. λ_8/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, DensityMatrix, PureState, Tolerances, C64, I, ONE, ZERO};

/// Which family a generator belongs to, with the levels it couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Symmetric { j: usize, k: usize },
    Antisymmetric { j: usize, k: usize },
    Diagonal { level: usize },
}

#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    generators: Vec<ComplexMatrix>,
    kinds: Vec<GeneratorKind>,
    k_d: f64,
}

/// Builds the `d² - 1` generators `T_a = λ_a / 2`.
pub fn gell_mann_basis(d: usize) -> Result<GeneratorBasis> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "generator basis needs d >= 2, got {d}"
        )));
    }
    let half = C64::new(0.5, 0.0);
    let mut generators = Vec::with_capacity(d * d - 1);
    let mut kinds = Vec::with_capacity(d * d - 1);
    for k in 1..d {
        for j in 0..k {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = half;
            sym[(k, j)] = half;
            generators.push(sym);
            kinds.push(GeneratorKind::Symmetric { j, k });

            let mut asym = ComplexMatrix::zeros(d, d);
            asym[(j, k)] = -I * half;
            asym[(k, j)] = I * half;
            generators.push(asym);
            kinds.push(GeneratorKind::Antisymmetric { j, k });
        }
        let norm = (2.0 / (k * (k + 1)) as f64).sqrt() * 0.5;
        let mut diag = vec![ZERO; d];
        diag[..k].iter_mut().for_each(|z| *z = C64::new(norm, 0.0));
        diag[k] = C64::new(-(k as f64) * norm, 0.0);
        generators.push(ComplexMatrix::diag(&diag));
        kinds.push(GeneratorKind::Diagonal { level: k });
    }
    Ok(GeneratorBasis {
        dim: d,
        generators,
        kinds,
        k_d: (2.0 * (d - 1) as f64 / d as f64).sqrt(),
    })
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of generators, `d² - 1`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn kinds(&self) -> &[GeneratorKind] {
        &self.kinds
    }

    /// `k_d = sqrt(2(d-1)/d)`, chosen so that pure states have unit Bloch vectors.
    pub fn k_d(&self) -> f64 {
        self.k_d
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d == self.dim {
            Ok(())
        } else {
            Err(Error::dims(self.dim, d))
        }
    }

    /// `n_a = (2 / k_d) tr(ρ T_a)`.
    pub fn bloch_vector(&self, rho: &DensityMatrix) -> Result<BlochVector> {
        self.check_dim(rho.dim())?;
        let scale = 2.0 / self.k_d;
        let components = self
            .generators
            .iter()
            .map(|t| rho.matrix().trace_product(t).map(|z| scale * z.re))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlochVector {
            dim: self.dim,
            components,
        })
    }

    /// Bloch vector of `|ψ⟩⟨ψ|` via `⟨ψ|T_a|ψ⟩`, without forming the projector.
    pub fn bloch_of_state(&self, psi: &PureState) -> Result<BlochVector> {
        self.check_dim(psi.dim())?;
        let scale = 2.0 / self.k_d;
        let amps = psi.amplitudes();
        let components = self
            .generators
            .iter()
            .zip(&self.kinds)
            .map(|(t, kind)| {
                let value = match *kind {
                    GeneratorKind::Symmetric { j, k } | GeneratorKind::Antisymmetric { j, k } => {
                        2.0 * (amps[j].conj() * t[(j, k)] * amps[k]).re
                    }
                    GeneratorKind::Diagonal { .. } => amps
                        .iter()
                        .enumerate()
                        .map(|(i, a)| a.norm_sqr() * t[(i, i)].re)
                        .sum(),
                };
                scale * value
            })
            .collect();
        Ok(BlochVector {
            dim: self.dim,
            components,
        })
    }

    /// `Σ_a x_a T_a` for arbitrary real coefficients.
    pub fn expand(&self, coefficients: &[f64]) -> Result<ComplexMatrix> {
        if coefficients.len() != self.len() {
            return Err(Error::dims(self.len(), coefficients.len()));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (t, &x) in self.generators.iter().zip(coefficients) {
            if x != 0.0 {
                out = &out + &t.scale_real(x);
            }
        }
        Ok(out)
    }

    /// `1/d + k_d n·T`, rejected when it is not a positive semidefinite state.
    pub fn state_from_bloch(&self, n: &BlochVector) -> Result<DensityMatrix> {
        self.check_dim(n.dim)?;
        let body = self.expand(&n.components)?.scale_real(self.k_d);
        let rho = &ComplexMatrix::identity(self.dim).scale_real(1.0 / self.dim as f64) + &body;
        DensityMatrix::new(rho)
    }

    /// Adjoint action of a unitary: column `a` holds the coefficients of
    /// `U T_a U†` in the generator basis, so entry `(b, a)` is
    /// `2 tr(T_b U T_a U†)`.
    pub fn adjoint_rep(&self, u: &ComplexMatrix) -> Result<AdjointMatrix> {
        if u.rows() != self.dim || u.cols() != self.dim {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim),
                format!("{}x{}", u.rows(), u.cols()),
            ));
        }
        u.require_unitary(Tolerances::DEFAULT.derived)?;
        Ok(self.adjoint_rep_unchecked(u))
    }

    pub(crate) fn adjoint_rep_unchecked(&self, u: &ComplexMatrix) -> AdjointMatrix {
        let n = self.len();
        let u_dag = u.dagger();
        let mut entries = vec![0.0; n * n];
        for (a, t_a) in self.generators.iter().enumerate() {
            let rotated = &(u * t_a) * &u_dag;
            for (b, (t_b, kind)) in self.generators.iter().zip(&self.kinds).enumerate() {
                // Each generator has at most d nonzero entries; read them directly.
                let value = match *kind {
                    GeneratorKind::Symmetric { j, k } | GeneratorKind::Antisymmetric { j, k } => {
                        t_b[(j, k)] * rotated[(k, j)] + t_b[(k, j)] * rotated[(j, k)]
                    }
                    GeneratorKind::Diagonal { .. } => {
                        (0..self.dim).map(|i| t_b[(i, i)] * rotated[(i, i)]).sum()
                    }
                };
                entries[b * n + a] = 2.0 * value.re;
            }
        }
        AdjointMatrix {
            dim: self.dim,
            size: n,
            entries,
        }
    }
}

/// Real coordinates of a state in the generator basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochVector {
    dim: usize,
    components: Vec<f64>,
}

impl BlochVector {
    pub fn new(dim: usize, components: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("Bloch vector needs d >= 2, got {dim}")));
        }
        if components.len() != dim * dim - 1 {
            return Err(Error::dims(dim * dim - 1, components.len()));
        }
        Ok(Self { dim, components })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            components: vec![0.0; dim * dim - 1],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Real `(d²-1) x (d²-1)` matrix of the adjoint representation.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointMatrix {
    dim: usize,
    size: usize,
    entries: Vec<f64>,
}

impl AdjointMatrix {
    pub fn identity(dim: usize) -> Self {
        let size = dim * dim - 1;
        let mut entries = vec![0.0; size * size];
        (0..size).for_each(|i| entries[i * size + i] = 1.0);
        Self { dim, size, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length `d² - 1`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matmul(&self, other: &AdjointMatrix) -> AdjointMatrix {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        AdjointMatrix {
            dim: self.dim,
            size: n,
            entries,
        }
    }

    pub fn transpose(&self) -> AdjointMatrix {
        let n = self.size;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        AdjointMatrix {
            dim: self.dim,
            size: n,
            entries,
        }
    }

    /// Maps the Bloch vector of `ρ` to that of `U ρ U†`.
    pub fn apply(&self, n: &BlochVector) -> Result<BlochVector> {
        if n.dim != self.dim {
            return Err(Error::dims(self.dim, n.dim));
        }
        let components = (0..self.size)
            .map(|i| {
                self.entries[i * self.size..(i + 1) * self.size]
                    .iter()
                    .zip(&n.components)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ok(BlochVector {
            dim: self.dim,
            components,
        })
    }

    /// Largest entry of `|MᵀM - 1|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let gram = self.transpose().matmul(self);
        let n = self.size;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (gram.get(i, j) - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.size;
        let mut a = self.entries.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
                .expect("nonempty range");
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in (col + 1)..n {
                let factor = a[row * n + col] / p;
                if factor != 0.0 {
                    for j in col..n {
                        a[row * n + j] -= factor * a[col * n + j];
                    }
                }
            }
        }
        det
    }
}

/// The Pauli matrices `σ_x, σ_y, σ_z`.
pub fn pauli() -> [ComplexMatrix; 3] {
    [
        ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).expect("2x2"),
        ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).expect("2x2"),
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, -ONE]).expect("2x2"),
    ]
}
