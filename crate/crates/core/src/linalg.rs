//! Dense complex linear algebra for small matrices.
//!
//! Everything here targets dimensions of a few dozen at most: Hamiltonian
//! blocks, invariant operators, frames of degenerate eigenspaces and the
//! `N×N` overlap and holonomy matrices built from them. The Hermitian
//! eigensolver is a cyclic complex Jacobi iteration; the unitary exponential
//! and logarithm are both routed through it, so unitarity of `exp(A)` holds by
//! construction.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A ket: plain column vector of amplitudes.
pub type Ket = Vec<C64>;

/// Relative Hermiticity tolerance for matrices handed to [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative skew-Hermiticity tolerance for [`unitary_exp`].
pub const SKEW_TOL: f64 = 1e-10;
/// Absolute unitarity tolerance.
pub const UNITARY_TOL: f64 = 1e-10;
/// Absolute orthonormality tolerance for frames.
pub const FRAME_TOL: f64 = 1e-10;
/// Default relative tolerance for grouping degenerate eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Eigenphases closer than this to `π` are treated as lying on the branch cut.
pub const BRANCH_CUT_MARGIN: f64 = 1e-6;
/// Smallest singular value accepted by [`polar_unitary`].
pub const SINGULAR_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix construction",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Matrix whose columns are the given kets.
    pub fn from_columns(columns: &[Ket]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, |c| c.len());
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        Self::from_fn(rows, cols, |r, c| columns[c][r])
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

    pub fn column(&self, c: usize) -> Ket {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[C64]) {
        assert_eq!(values.len(), self.rows);
        for (r, &v) in values.iter().enumerate() {
            self[(r, c)] = v;
        }
    }

    /// Sub-matrix made of the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |r, c| self[(r, cols[c])])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entry-wise difference. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).frobenius_norm()
    }

    /// `‖M − M†‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self - &self.adjoint()).frobenius_norm()
    }

    /// `‖M + M†‖_F`.
    pub fn skew_hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self + &self.adjoint()).frobenius_norm()
    }

    /// `‖M†M − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).distance(&Self::identity(self.cols))
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_defect() <= rel_tol * self.frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.unitarity_defect() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `(M − M†)/2`.
    pub fn skew_hermitian_part(&self) -> Self {
        (self - &self.adjoint()).scale_real(0.5)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn apply(&self, v: &[C64]) -> Ket {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut m = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                m[(self.rows + r, self.cols + c)] = other[(r, c)];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
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
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Serialized as `{rows, cols, re, im}` with nested row arrays.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let nested = |part: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..self.rows)
                .map(|r| (0..self.cols).map(|c| part(&self[(r, c)])).collect())
                .collect()
        };
        let mut s = serializer.serialize_struct("ComplexMatrix", 4)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        s.serialize_field("re", &nested(|z| z.re))?;
        s.serialize_field("im", &nested(|z| z.im))?;
        s.end()
    }
}

/// Pauli matrices.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn sigma_x() -> ComplexMatrix {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        ComplexMatrix::from_rows(&[&[o, l], &[l, o]])
    }

    pub fn sigma_y() -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::from_rows(&[&[o, -i], &[i, o]])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
    }
}

// ---------------------------------------------------------------------------
// Kets

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "inner product dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale_ket(v: &[C64], s: C64) -> Ket {
    v.iter().map(|z| z * s).collect()
}

/// `⟨ψ|M|ψ⟩`, real part only (meaningful for Hermitian `M`).
pub fn expectation(m: &ComplexMatrix, psi: &[C64]) -> f64 {
    inner(psi, &m.apply(psi)).re
}

// ---------------------------------------------------------------------------
// Frames

/// Ordered orthonormal `N`-tuple of kets in a `K`-dimensional space,
/// stored as the columns of a `K×N` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    columns: ComplexMatrix,
}

impl Frame {
    pub fn new(columns: ComplexMatrix) -> Result<Self> {
        let (k, n) = (columns.rows(), columns.cols());
        if n == 0 || n > k {
            return Err(Error::DimensionMismatch {
                context: "frame",
                expected: format!("1 <= N <= K = {k}"),
                found: format!("N = {n}"),
            });
        }
        let defect = columns.unitarity_defect();
        if defect > FRAME_TOL {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Self { columns })
    }

    pub fn from_kets(kets: &[Ket]) -> Result<Self> {
        Self::new(ComplexMatrix::from_columns(kets))
    }

    /// Skips the orthonormality check; for frames that are orthonormal by
    /// construction (eigenvectors, unitary images of frames).
    pub(crate) fn new_unchecked(columns: ComplexMatrix) -> Self {
        Self { columns }
    }

    /// Ambient dimension `K`.
    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    /// Number of kets `N`.
    pub fn count(&self) -> usize {
        self.columns.cols()
    }

    pub fn column(&self, i: usize) -> Ket {
        self.columns.column(i)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.columns
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.columns
    }

    /// Right action `F·g` of an `N×N` unitary.
    pub fn rotate(&self, g: &ComplexMatrix) -> Result<Self> {
        if g.rows() != self.count() || g.cols() != self.count() {
            return Err(Error::DimensionMismatch {
                context: "frame rotation",
                expected: format!("{0}x{0}", self.count()),
                found: format!("{}x{}", g.rows(), g.cols()),
            });
        }
        let defect = g.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self::new_unchecked(&self.columns * g))
    }

    /// Projector `F·F†` onto the spanned subspace.
    pub fn projector(&self) -> ComplexMatrix {
        &self.columns * &self.columns.adjoint()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.columns.distance(&other.columns)
    }
}

/// `N×N` matrix of overlaps `⟨f_r|g_s⟩`.
pub fn overlap_matrix(f: &Frame, g: &Frame) -> Result<ComplexMatrix> {
    if f.dim() != g.dim() || f.count() != g.count() {
        return Err(Error::DimensionMismatch {
            context: "overlap matrix",
            expected: format!("{}x{}", f.dim(), f.count()),
            found: format!("{}x{}", g.dim(), g.count()),
        });
    }
    Ok(&f.columns.adjoint() * &g.columns)
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// corresponding eigenvectors as the columns of a full-rank frame.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Frame,
}

impl Eigh {
    /// Eigenvectors belonging to the listed indices.
    pub fn subframe(&self, indices: &[usize]) -> Frame {
        Frame::new_unchecked(self.vectors.matrix().select_columns(indices))
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues come out ascending. Each eigenvector is normalized so that its
/// largest-magnitude component (first one on ties) is real and positive.
pub fn eigh(h: &ComplexMatrix) -> Result<Eigh> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let scale = h.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::NonFinite);
    }
    let violation = h.hermitian_defect();
    let allowed = HERMITIAN_TOL * scale;
    if violation > allowed {
        return Err(Error::NotHermitian { violation, allowed });
    }
    Ok(eigh_unchecked(&h.hermitian_part()))
}

/// Jacobi iteration on an exactly Hermitian input.
pub(crate) fn eigh_unchecked(h: &ComplexMatrix) -> Eigh {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let abs_b = b.norm();
                if abs_b <= 1e-300 || abs_b <= 1e-19 * scale {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = b / abs_b;
                let tau = (aqq - app) / (2.0 * abs_b);
                let t = if tau == 0.0 {
                    1.0
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = v.select_columns(&order);
    for c in 0..n {
        let col = vectors.column(c);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
        let ph = col[pivot].conj() / col[pivot].norm();
        vectors.set_column(c, &scale_ket(&col, ph));
    }
    Eigh {
        values,
        vectors: Frame::new_unchecked(vectors),
    }
}

/// Partitions ascending eigenvalues into runs of (near-)degenerate values.
///
/// Neighbours `λ_i, λ_{i+1}` share a group when
/// `|λ_{i+1} − λ_i| ≤ rel_tol · max(1, |λ_i|)`.
pub fn group_degenerate(eigenvalues: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        match groups.last_mut() {
            Some(g)
                if {
                    let prev = eigenvalues[i - 1];
                    (lam - prev).abs() <= rel_tol * prev.abs().max(1.0)
                } =>
            {
                g.push(i)
            }
            _ => groups.push(vec![i]),
        }
    }
    groups
}

// ---------------------------------------------------------------------------
// Unitary exponential and logarithm

/// `exp(A)` for skew-Hermitian `A`, via the eigendecomposition of `iA`.
pub fn unitary_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let violation = a.skew_hermitian_defect();
    let allowed = SKEW_TOL * a.frobenius_norm();
    if violation > allowed {
        return Err(Error::NotSkewHermitian { violation, allowed });
    }
    // A = -iH with H = iA Hermitian
    let h = a.scale(I).hermitian_part();
    Ok(exp_minus_i(&h, 1.0))
}

/// `exp(−i·H·t)` for Hermitian `H`.
pub fn hermitian_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let scale = h.frobenius_norm();
    let violation = h.hermitian_defect();
    let allowed = HERMITIAN_TOL * scale;
    if violation > allowed {
        return Err(Error::NotHermitian { violation, allowed });
    }
    Ok(exp_minus_i(&h.hermitian_part(), t))
}

fn exp_minus_i(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    if h.rows() == 1 {
        return ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, -h[(0, 0)].re * t)]);
    }
    if h.rows() == 2 {
        // exp(−i(a + b·σ)t) = e^{−iat}(cos|b|t − i sin(|b|t)/|b| · b·σ)
        let a = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let d = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let z = h[(0, 1)];
        let w = (d * d + z.norm_sqr()).sqrt();
        let (c, s) = if w > 0.0 {
            ((w * t).cos(), (w * t).sin() / w)
        } else {
            (1.0, t)
        };
        let g = C64::from_polar(1.0, -a * t);
        let mi = C64::new(0.0, -s);
        return ComplexMatrix::from_rows(&[&[g * (c + mi * d), g * mi * z], &[g * mi * z.conj(), g * (c - mi * d)]]);
    }
    let e = eigh_unchecked(h);
    let phases: Vec<C64> = e.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
    spectral(e.vectors.matrix(), &phases)
}

/// `V·diag(d)·V†`.
fn spectral(v: &ComplexMatrix, d: &[C64]) -> ComplexMatrix {
    let n = v.rows();
    let k = v.cols();
    ComplexMatrix::from_fn(n, n, |r, c| (0..k).map(|j| v[(r, j)] * d[j] * v[(c, j)].conj()).sum())
}

/// Eigendecomposition of a unitary: eigenvectors plus eigenphases in `(−π, π]`.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Diagonalizes a unitary through the Cayley transform of a rotated copy,
/// `K = i(1 − e^{−iβ}U)(1 + e^{−iβ}U)^{−1}`, which is Hermitian and maps
/// distinct eigenphases to distinct eigenvalues.
pub fn unitary_eigen(u: &ComplexMatrix) -> Result<UnitaryEigen> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let defect = u.unitarity_defect();
    if defect > 1e-8 {
        return Err(Error::NotUnitary { defect });
    }
    let n = u.rows();
    if n == 1 {
        let z = u[(0, 0)];
        return Ok(UnitaryEigen {
            phases: vec![principal_arg(z)],
            vectors: ComplexMatrix::identity(1),
        });
    }

    // choose the rotation that keeps every eigenvalue far from -1
    let min_cos = |beta: f64| {
        let rotated = u.scale(C64::from_polar(1.0, -beta));
        eigh_unchecked(&rotated.hermitian_part()).values[0]
    };
    let mut beta = 0.0;
    let mut best = min_cos(0.0);
    if best < -0.5 {
        for j in 1..16 {
            let b = j as f64 * std::f64::consts::PI / 8.0;
            let m = min_cos(b);
            if m > best {
                best = m;
                beta = b;
            }
        }
    }
    let rotated = u.scale(C64::from_polar(1.0, -beta));
    let id = ComplexMatrix::identity(n);
    let k = solve(&(&id + &rotated), &(&id - &rotated))?.scale(I);
    let vectors = eigh_unchecked(&k.hermitian_part()).vectors.into_matrix();
    let d = &(&vectors.adjoint() * u) * &vectors;
    let phases = (0..n).map(|j| principal_arg(d[(j, j)])).collect();
    Ok(UnitaryEigen { phases, vectors })
}

fn principal_arg(z: C64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

/// Principal logarithm of a unitary; eigenphases in `(−π, π]`.
///
/// Fails with [`Error::BranchCut`] when an eigenvalue lies within
/// [`BRANCH_CUT_MARGIN`] of `−1`.
pub fn matrix_log_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    log_unitary(u, false)
}

/// Like [`matrix_log_unitary`] but maps eigenvalues on the cut to `+iπ`.
pub fn matrix_log_unitary_allow_cut(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    log_unitary(u, true)
}

fn log_unitary(u: &ComplexMatrix, allow_cut: bool) -> Result<ComplexMatrix> {
    let eig = unitary_eigen(u)?;
    let pi = std::f64::consts::PI;
    if !allow_cut {
        if let Some(&p) = eig.phases.iter().find(|p| p.abs() >= pi - BRANCH_CUT_MARGIN) {
            return Err(Error::BranchCut {
                eigenvalue: C64::from_polar(1.0, p),
            });
        }
    }
    let d: Vec<C64> = eig.phases.iter().map(|&p| C64::new(0.0, p)).collect();
    Ok(spectral(&eig.vectors, &d).skew_hermitian_part())
}

/// Solves `A·X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "linear solve",
            expected: format!("{} rows", a.rows()),
            found: format!("{} rows", b.rows()),
        });
    }
    let n = a.rows();
    let m = b.cols();
    let mut a = a.clone();
    let mut x = b.clone();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))
            .unwrap_or(col);
        let pv = a[(pivot, col)];
        if pv.norm() <= 1e-15 * scale {
            return Err(Error::RankDeficient {
                smallest_singular_value: pv.norm(),
            });
        }
        if pivot != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot, c)];
                a[(pivot, c)] = tmp;
            }
            for c in 0..m {
                let tmp = x[(col, c)];
                x[(col, c)] = x[(pivot, c)];
                x[(pivot, c)] = tmp;
            }
        }
        for r in col + 1..n {
            let f = a[(r, col)] / pv;
            if f == ZERO {
                continue;
            }
            for c in col..n {
                let v = a[(col, c)];
                a[(r, c)] -= f * v;
            }
            for c in 0..m {
                let v = x[(col, c)];
                x[(r, c)] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pv = a[(col, col)];
        for c in 0..m {
            let mut acc = x[(col, c)];
            for k in col + 1..n {
                acc -= a[(col, k)] * x[(k, c)];
            }
            x[(col, c)] = acc / pv;
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Polar decomposition

/// Unitary factor `U` of the polar decomposition `M = U·P`.
///
/// `U = M·(M†M)^{−1/2}`, the unitary closest to `M` in Frobenius norm.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() == 1 {
        let z = m[(0, 0)];
        if z.norm() <= SINGULAR_TOL {
            return Err(Error::RankDeficient {
                smallest_singular_value: z.norm(),
            });
        }
        return Ok(ComplexMatrix::from_diagonal(&[z / z.norm()]));
    }
    let gram = (&m.adjoint() * m).hermitian_part();
    let e = eigh_unchecked(&gram);
    let smallest = e.values[0].max(0.0).sqrt();
    if smallest <= SINGULAR_TOL {
        return Err(Error::RankDeficient {
            smallest_singular_value: smallest,
        });
    }
    let inv_sqrt: Vec<C64> = e.values.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)).collect();
    Ok(m * &spectral(e.vectors.matrix(), &inv_sqrt))
}

/// Smallest singular value of a square matrix.
pub fn smallest_singular_value(m: &ComplexMatrix) -> f64 {
    let gram = (&m.adjoint() * m).hermitian_part();
    eigh_unchecked(&gram).values[0].max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Scaling-and-squaring Taylor series; independent reference for `exp`.
    fn taylor_exp(a: &ComplexMatrix) -> ComplexMatrix {
        let norm = a.frobenius_norm();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = a.scale_real(0.5f64.powi(squarings as i32));
        let n = a.rows();
        let mut sum = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..30 {
            term = (&term * &scaled).scale_real(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn random_hermitian(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
        let mut k = 0;
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for col in r..n {
                let (re, im) = entries[k % entries.len()];
                k += 1;
                if r == col {
                    m[(r, r)] = c(re, 0.0);
                } else {
                    m[(r, col)] = c(re, im);
                    m[(col, r)] = c(re, -im);
                }
            }
        }
        m
    }

    #[test]
    fn eigh_sigma_z() {
        let e = eigh(&sigma_z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        assert_eq!(e.vectors.column(0), vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(e.vectors.column(1), vec![c(1.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn eigh_sigma_x_phase_convention() {
        let e = eigh(&sigma_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        let lo = e.vectors.column(0);
        let hi = e.vectors.column(1);
        assert!((lo[0] - c(s, 0.0)).norm() < 1e-14 && (lo[1] - c(-s, 0.0)).norm() < 1e-14);
        assert!((hi[0] - c(s, 0.0)).norm() < 1e-14 && (hi[1] - c(s, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigh_bloch_vector_has_unit_eigenvalues() {
        let (theta, phi): (f64, f64) = (PI / 6.0, 0.3);
        let h = &(&sigma_x().scale_real((2.0 * theta).sin() * phi.cos())
            + &sigma_y().scale_real((2.0 * theta).sin() * phi.sin()))
            + &sigma_z().scale_real((2.0 * theta).cos());
        // characteristic polynomial λ² − (a² + |b|²) of a traceless 2×2 Hermitian
        let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
        let root = (-det).sqrt();
        let e = eigh(&h).unwrap();
        assert!((e.values[0] + root).abs() < 1e-14);
        assert!((e.values[1] - root).abs() < 1e-14);
        assert!((root - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_residuals_small() {
        let h = random_hermitian(6, &[(0.3, -1.2), (2.0, 0.1), (-0.7, 0.4), (1.1, 0.9), (0.05, -0.3)]);
        let e = eigh(&h).unwrap();
        let norm = h.frobenius_norm();
        for (i, &l) in e.values.iter().enumerate() {
            let v = e.vectors.column(i);
            let hv = h.apply(&v);
            let r: f64 = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * l).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-10 * norm, "residual {r}");
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(e.vectors.matrix().is_unitary(1e-12));
    }

    #[test]
    fn grouping_examples() {
        assert_eq!(group_degenerate(&[-1.0, 1.0], 1e-8), vec![vec![0], vec![1]]);
        assert_eq!(group_degenerate(&[0.5, 0.5, 2.5], 1e-8), vec![vec![0, 1], vec![2]]);
        // 1e-12 gap sits far below 1e-8·max(1, 1.0); 0.1 gap far above
        assert_eq!(
            group_degenerate(&[1.0, 1.0 + 1e-12, 1.1], 1e-8),
            vec![vec![0, 1], vec![2]]
        );
        assert!(group_degenerate(&[], 1e-8).is_empty());
    }

    #[test]
    fn exp_examples() {
        let zero = ComplexMatrix::zeros(3, 3);
        assert_eq!(unitary_exp(&zero).unwrap(), ComplexMatrix::identity(3));

        let a = sigma_z().scale(c(0.0, PI / 2.0));
        let u = unitary_exp(&a).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)])) < 1e-15);

        let a = sigma_x().scale(c(0.0, 0.7));
        let expected = &ComplexMatrix::identity(2).scale_real(0.7f64.cos()) + &sigma_x().scale(c(0.0, 0.7f64.sin()));
        assert!(unitary_exp(&a).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exp_rejects_non_skew() {
        assert!(matches!(unitary_exp(&sigma_x()), Err(Error::NotSkewHermitian { .. })));
    }

    #[test]
    fn log_examples() {
        let l = matrix_log_unitary(&ComplexMatrix::identity(2)).unwrap();
        assert!(l.frobenius_norm() < 1e-15);

        let u = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, PI / 2.0), c(0.0, -PI / 2.0)]);
        assert!(matrix_log_unitary(&u).unwrap().max_abs_diff(&expected) < 1e-14);

        let a = sigma_y().scale(c(0.0, 0.4));
        let back = matrix_log_unitary(&unitary_exp(&a).unwrap()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-14);
    }

    #[test]
    fn log_branch_cut() {
        let u = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
        match matrix_log_unitary(&u) {
            Err(Error::BranchCut { eigenvalue }) => assert!((eigenvalue + 1.0).norm() < 1e-9),
            other => panic!("expected branch cut error, got {other:?}"),
        }
        let l = matrix_log_unitary_allow_cut(&u).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, PI), c(0.0, 0.0)]);
        assert!(l.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn log_of_degenerate_pair_near_minus_one() {
        // eigenphases ±(π − 0.01): both near the cut from opposite sides
        let a = sigma_z().scale(c(0.0, PI - 0.01));
        let u = unitary_exp(&a).unwrap();
        let l = matrix_log_unitary(&u).unwrap();
        assert!(l.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn overlap_examples() {
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = vec![c(0.0, 0.0), c(1.0, 0.0)];
        let f = Frame::from_kets(&[e1.clone(), e2.clone()]).unwrap();
        assert!(
            overlap_matrix(&f, &f)
                .unwrap()
                .max_abs_diff(&ComplexMatrix::identity(2))
                < 1e-15
        );

        let a = Frame::from_kets(std::slice::from_ref(&e1)).unwrap();
        let b = Frame::from_kets(std::slice::from_ref(&e2)).unwrap();
        assert_eq!(overlap_matrix(&a, &b).unwrap()[(0, 0)], c(0.0, 0.0));

        let eps = 1e-3;
        let g = f.rotate(&unitary_exp(&sigma_x().scale(c(0.0, eps))).unwrap()).unwrap();
        let o = overlap_matrix(&f, &g).unwrap();
        let first_order = &ComplexMatrix::identity(2) + &sigma_x().scale(c(0.0, eps));
        // cos ε − 1 ≈ −ε²/2 and sin ε − ε ≈ −ε³/6 bound the deviation
        assert!(o.max_abs_diff(&first_order) <= eps * eps / 2.0 + 1e-15);
        assert!(o.max_abs_diff(&first_order) > 0.0);

        assert!(matches!(overlap_matrix(&a, &f), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn polar_examples() {
        let u = unitary_exp(&sigma_y().scale(c(0.0, 1.3))).unwrap();
        assert!(polar_unitary(&u).unwrap().max_abs_diff(&u) < 1e-14);

        let two = ComplexMatrix::identity(2).scale_real(2.0);
        assert!(polar_unitary(&two).unwrap().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let m = &ComplexMatrix::identity(2) + &sigma_z().scale(c(0.0, 0.1));
        // diagonal entries 1 ± 0.1i normalize to e^{±i·atan(0.1)}
        let expected =
            ComplexMatrix::from_diagonal(&[c(1.0, 0.1) / c(1.0, 0.1).norm(), c(1.0, -0.1) / c(1.0, -0.1).norm()]);
        let got = polar_unitary(&m).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-15);
        let via_exp = unitary_exp(&sigma_z().scale(c(0.0, 0.1f64.atan()))).unwrap();
        assert!(got.max_abs_diff(&via_exp) < 1e-15);
    }

    #[test]
    fn polar_rejects_singular() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(polar_unitary(&m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn solve_small_system() {
        let a = ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(2.0, 1.0)], &[c(1.0, 0.0), c(3.0, 0.0)]]);
        let x = ComplexMatrix::from_rows(&[&[c(1.0, -1.0)], &[c(0.5, 2.0)]]);
        let b = &a * &x;
        assert!(solve(&a, &b).unwrap().max_abs_diff(&x) < 1e-14);
    }

    fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (2usize..=16).prop_flat_map(|n| {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * (n + 1) / 2)
                .prop_map(move |entries| random_hermitian(n, &entries))
        })
    }

    fn skew_strategy(max_norm: f64) -> impl Strategy<Value = ComplexMatrix> {
        (2usize..=6).prop_flat_map(move |n| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * (n + 1) / 2).prop_map(move |entries| {
                let h = random_hermitian(n, &entries);
                let norm = h.frobenius_norm().max(1e-12);
                h.scale(c(0.0, max_norm / norm * 0.999))
            })
        })
    }

    fn square_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..=5).prop_flat_map(|n| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |e| {
                let m = ComplexMatrix::from_fn(n, n, |r, col| c(e[r * n + col].0, e[r * n + col].1));
                &m + &ComplexMatrix::identity(n).scale_real(2.5)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eigh_reconstructs(h in hermitian_strategy()) {
            let e = eigh(&h).unwrap();
            let d: Vec<C64> = e.values.iter().map(|&l| c(l, 0.0)).collect();
            let back = spectral(e.vectors.matrix(), &d);
            prop_assert!(back.distance(&h) <= 1e-9 * h.frobenius_norm().max(1.0));
            prop_assert!(e.vectors.matrix().is_unitary(1e-10));
        }

        #[test]
        fn exp_matches_taylor_and_is_unitary(a in skew_strategy(1.0)) {
            let u = unitary_exp(&a).unwrap();
            prop_assert!(u.unitarity_defect() <= 1e-10);
            prop_assert!(u.max_abs_diff(&taylor_exp(&a)) <= 1e-12);
        }

        #[test]
        fn log_inverts_exp(a in skew_strategy(2.0)) {
            let u = unitary_exp(&a).unwrap();
            let l = matrix_log_unitary(&u).unwrap();
            prop_assert!(l.max_abs_diff(&a) <= 1e-8);
            prop_assert!(unitary_exp(&l).unwrap().max_abs_diff(&u) <= 1e-9);
        }

        #[test]
        fn polar_is_idempotent_and_nearest(m in square_strategy(), seed in -1.0f64..1.0) {
            let u = polar_unitary(&m).unwrap();
            prop_assert!(u.unitarity_defect() <= 1e-10);
            prop_assert!(polar_unitary(&u).unwrap().max_abs_diff(&u) <= 1e-10);
            // any other unitary (here u·exp(i·seed·X) for a fixed Hermitian X) is no closer
            let n = m.rows();
            let x = ComplexMatrix::from_fn(n, n, |r, col| if r == col { c(1.0, 0.0) } else if r + 1 == col || col + 1 == r { c(0.5, 0.0) } else { c(0.0, 0.0) });
            let other = &u * &unitary_exp(&x.scale(c(0.0, seed))).unwrap();
            prop_assert!(u.distance(&m) <= other.distance(&m) + 1e-12);
        }
    }
}
