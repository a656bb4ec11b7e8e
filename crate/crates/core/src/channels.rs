//! Trace-preserving linear maps in Kraus form.

use crate::error::{Error, Result};
use crate::haar::{gaussian_matrix, orthonormalize_columns, SampleStream};
use crate::tensor::{ComplexMatrix, DensityMatrix, Tolerances, C64, ZERO};

/// `ρ ↦ Σ_i K_i ρ K_i†` with `Σ_i K_i† K_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus_ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates trace preservation at the default derived tolerance.
    pub fn new(kraus_ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(kraus_ops, Tolerances::DEFAULT.derived)
    }

    pub fn with_tolerance(kraus_ops: Vec<ComplexMatrix>, tp_tol: f64) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let dim = first.rows();
        for k in &kraus_ops {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::dims(
                    format!("{dim}x{dim}"),
                    format!("{}x{}", k.rows(), k.cols()),
                ));
            }
        }
        let channel = Self { dim, kraus_ops };
        let residual = channel.trace_preservation_residual();
        if residual > tp_tol {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus_ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    /// Largest entry of `|Σ K†K - 1|`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus_ops {
            sum = &sum + &(&k.dagger() * k);
        }
        (&sum - &ComplexMatrix::identity(self.dim)).max_abs()
    }

    /// Kraus sum applied to an arbitrary `d x d` operator. Linearity makes
    /// this meaningful for non-states such as the traceless generators.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim),
                format!("{}x{}", x.rows(), x.cols()),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus_ops {
            out = &out + &(&(k * x) * &k.dagger());
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new(self.apply_operator(rho.matrix())?)
    }

    /// `(E ⊗ id)(ρ)` for `ρ` on a `d x d` bipartite space, with `E` acting on
    /// the first factor.
    pub fn apply_extended(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim * self.dim {
            return Err(Error::dims(self.dim * self.dim, rho.dim()));
        }
        let id = ComplexMatrix::identity(self.dim);
        let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
        for k in &self.kraus_ops {
            let big = k.kron(&id);
            out = &out + &(&(&big * rho.matrix()) * &big.dagger());
        }
        DensityMatrix::new(out)
    }

    /// `ρ ↦ E(U† ρ U)`, realized by the Kraus operators `K_i U†`.
    pub fn precompose_gate(&self, u: &ComplexMatrix) -> Result<KrausChannel> {
        if u.rows() != self.dim || u.cols() != self.dim {
            return Err(Error::dims(
                format!("{0}x{0}", self.dim),
                format!("{}x{}", u.rows(), u.cols()),
            ));
        }
        u.require_unitary(Tolerances::DEFAULT.derived)?;
        let u_dag = u.dagger();
        Ok(Self {
            dim: self.dim,
            kraus_ops: self.kraus_ops.iter().map(|k| k * &u_dag).collect(),
        })
    }

    /// `ρ ↦ E(V ρ V†)`: this channel applied after the unitary `V`.
    pub fn after_unitary(&self, v: &ComplexMatrix) -> Result<KrausChannel> {
        self.precompose_gate(&v.dagger())
    }
}

/// `ρ ↦ V ρ V†`.
pub fn unitary_channel(v: &ComplexMatrix) -> Result<KrausChannel> {
    v.require_unitary(Tolerances::DEFAULT.derived)?;
    Ok(KrausChannel {
        dim: v.rows(),
        kraus_ops: vec![v.clone()],
    })
}

/// Cyclic shift `X|j⟩ = |j+1 mod d⟩`.
pub fn shift(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { C64::new(1.0, 0.0) } else { ZERO })
}

/// Clock `Z|j⟩ = ω^j |j⟩` with `ω = e^{2πi/d}`.
pub fn clock(d: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..d)
        .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64))
        .collect();
    ComplexMatrix::diag(&entries)
}

/// Displacement operator `X^p Z^q`.
pub fn weyl(d: usize, p: usize, q: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + p) % d {
            C64::from_polar(1.0, std::f64::consts::TAU * ((q * j) % d) as f64 / d as f64)
        } else {
            ZERO
        }
    })
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")))
    }
}

/// `ρ ↦ (1-p) ρ + p·1/d`.
///
/// Uses the Weyl twirl `(1/d²) Σ_{p,q} W ρ W† = tr(ρ)·1/d`: the identity
/// operator carries weight `1 - p + p/d²` and the other `d² - 1` displacement
/// operators `p/d²` each.
pub fn depolarizing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let d2 = (d * d) as f64;
    let mut kraus_ops = vec![ComplexMatrix::identity(d).scale_real((1.0 - p + p / d2).sqrt())];
    if p > 0.0 {
        let amp = (p / d2).sqrt();
        for a in 0..d {
            for b in 0..d {
                if (a, b) != (0, 0) {
                    kraus_ops.push(weyl(d, a, b).scale_real(amp));
                }
            }
        }
    }
    Ok(KrausChannel { dim: d, kraus_ops })
}

/// `ρ ↦ (1-p) ρ + p Σ_j |j⟩⟨j| ρ |j⟩⟨j|`; `p = 1` erases all coherences.
pub fn dephasing(d: usize, p: f64) -> Result<KrausChannel> {
    check_probability(p)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut kraus_ops = Vec::with_capacity(d + 1);
    if p < 1.0 {
        kraus_ops.push(ComplexMatrix::identity(d).scale_real((1.0 - p).sqrt()));
    }
    if p > 0.0 {
        for j in 0..d {
            let mut proj = ComplexMatrix::zeros(d, d);
            proj[(j, j)] = C64::new(p.sqrt(), 0.0);
            kraus_ops.push(proj);
        }
    }
    Ok(KrausChannel { dim: d, kraus_ops })
}

/// Random channel with `k` Kraus operators: the columns of a `(kd) x d`
/// complex Gaussian matrix are orthonormalized, and the resulting isometry is
/// cut into `k` consecutive `d x d` blocks.
pub fn random_channel(d: usize, k: usize, seed: u64) -> Result<KrausChannel> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "random channel needs d >= 1 and k >= 1, got d={d}, k={k}"
        )));
    }
    let mut v = gaussian_matrix(&SampleStream::new(seed, 0, d), k * d, d);
    orthonormalize_columns(&mut v);
    let kraus_ops = (0..k)
        .map(|block| ComplexMatrix::from_fn(d, d, |i, j| v[(block * d + i, j)]))
        .collect();
    Ok(KrausChannel { dim: d, kraus_ops })
}
