//! Dense complex linear algebra for small matrices.
//!
//! Everything here is sized for qudit work (d up to a few dozen), so storage is
//! a plain row-major `Vec<Complex64>` and all algorithms are the textbook ones.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical thresholds shared by every validity check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Normalization, Hermiticity and trace of constructed states.
    pub validity: f64,
    /// Properties derived through further arithmetic (unitarity, trace preservation).
    pub derived: f64,
    /// Smallest eigenvalue accepted as nonnegative, as a magnitude.
    pub psd_floor: f64,
    /// Design residual accepted before a design is used for fidelity evaluation.
    pub design: f64,
    /// Trace-preservation residual accepted when loading channel files.
    pub channel_file: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        validity: 1e-12,
        derived: 1e-10,
        psd_floor: 1e-10,
        design: 1e-8,
        channel_file: 1e-8,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn check_finite(values: &[C64], what: &'static str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(rows * cols, data.len()));
        }
        check_finite(&data, "matrix")?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::dims(format!("{n_cols} columns"), bad.len()));
        }
        Self::new(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    /// Builds a matrix from real entries given row by row.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diag(entries: &[C64]) -> Self {
        let d = entries.len();
        Self::from_fn(d, d, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(
                format!("{} rows", self.cols),
                format!("{} rows", other.rows),
            ));
        }
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Result<C64> {
        let d = self.require_square()?;
        Ok((0..d).map(|i| self[(i, i)]).sum())
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::dims(
                format!("{}x{}", self.cols, self.rows),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, factor: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> ComplexMatrix {
        self.scale(C64::new(factor, 0.0))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (other.rows, other.cols);
        ComplexMatrix::from_fn(self.rows * r, self.cols * c, |i, j| {
            self[(i / r, j / c)] * other[(i % r, j % c)]
        })
    }

    pub fn apply_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::dims(self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|A - A†|`; non-square matrices are never Hermitian.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entry of `|U†U - 1|`.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = self.dagger().matmul(self).expect("square");
        (&gram - &ComplexMatrix::identity(self.rows)).max_abs()
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        self.require_square()?;
        let residual = self.unitarity_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { residual })
        }
    }

    /// Ascending eigenvalues of the Hermitian part `(A + A†)/2`.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.require_square()?;
        // H = A + iB is unitarily similar to the real symmetric [[A, -B], [B, A]],
        // whose spectrum is that of H with every eigenvalue doubled.
        let m = 2 * n;
        let mut embed = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let h = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                embed[i * m + j] = h.re;
                embed[(i + n) * m + j + n] = h.re;
                embed[i * m + j + n] = -h.im;
                embed[(i + n) * m + j] = h.im;
            }
        }
        let mut eig = jacobi_eigenvalues(&mut embed, m);
        eig.sort_by(f64::total_cmp);
        Ok(eig.into_iter().step_by(2).collect())
    }
}

/// Cyclic Jacobi sweeps on a dense real symmetric matrix (destroyed in place).
fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shapes do not conform")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose squared norm is already 1 within the validity tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        check_finite(&amplitudes, "state")?;
        let norm_sq = norm_sqr(&amplitudes);
        if (norm_sq - 1.0).abs() > Tolerances::DEFAULT.validity {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        check_finite(&amplitudes, "state")?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if amplitudes.is_empty() || norm == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// `U|ψ⟩` for a unitary `U`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Result<PureState> {
        u.require_unitary(Tolerances::DEFAULT.derived)?;
        PureState::normalized(u.apply_vec(&self.amplitudes)?)
    }

    /// Cyclic shift of the components: `(x_0, .., x_{d-1}) -> (x_{d-1}, x_0, ..)`.
    pub fn cyclic_shift(&self) -> PureState {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.rotate_right(1);
        Self { amplitudes }
    }

    /// The rank-one projector `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: projector(&self.amplitudes),
        }
    }
}

fn projector(v: &[C64]) -> ComplexMatrix {
    let d = v.len();
    ComplexMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj())
}

/// `|ψ⟩⟨ψ|` from raw amplitudes, rejecting vectors that are not normalized.
pub fn outer(amplitudes: &[C64]) -> Result<DensityMatrix> {
    let state = PureState::new(amplitudes.to_vec())?;
    Ok(state.density())
}

/// Validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let trace = matrix.trace()?;
        let residual = matrix.hermiticity_residual();
        if residual > tol.validity {
            return Err(Error::NotHermitian { residual });
        }
        if (trace.re - 1.0).abs() > tol.validity || trace.im.abs() > tol.validity {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let min_eigenvalue = matrix.hermitian_eigenvalues()?[0];
        if min_eigenvalue < -tol.psd_floor {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Convex combination `w·a + (1-w)·b`.
    pub fn mix(a: &DensityMatrix, b: &DensityMatrix, w: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::dims(a.dim(), b.dim()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w}")));
        }
        Self::new(&a.matrix.scale_real(w) + &b.matrix.scale_real(1.0 - w))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).expect("square").re
    }
}

/// Serde adapter for a complex number encoded as `[re, im]`.
#[derive(Serialize, Deserialize)]
struct Pair(f64, f64);

impl From<C64> for Pair {
    fn from(z: C64) -> Self {
        Pair(z.re, z.im)
    }
}

impl From<Pair> for C64 {
    fn from(p: Pair) -> Self {
        C64::new(p.0, p.1)
    }
}

/// Encodes a vector of amplitudes as `[[re, im], ...]`.
pub fn serialize_vector<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&z| Pair::from(z)))
}

pub fn deserialize_vector<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<C64>, D::Error> {
    let pairs: Vec<Pair> = Vec::deserialize(d)?;
    Ok(pairs.into_iter().map(C64::from).collect())
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq((0..self.rows).map(|i| {
            self.row(i)
                .iter()
                .map(|&z| Pair::from(z))
                .collect::<Vec<_>>()
        }))
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<Pair>> = Vec::deserialize(d)?;
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(C64::from).collect())
            .collect();
        ComplexMatrix::from_rows(rows).map_err(de::Error::custom)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_vector(&self.amplitudes, s)
    }
}
