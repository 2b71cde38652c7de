//! Dense complex linear algebra for 2×2 through 16×16 problems.
//!
//! Hermitian eigenproblems are solved through the real symmetric embedding
//! `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is that of `H` with every
//! eigenvalue doubled.

pub mod real;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub use real::RealMatrix;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for Hermiticity and spectral checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join("  "))?;
        }
        write!(f, "]")
    }
}

/// Which tensor factor of a two-qubit operator. `A` is always the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Subsystem {
    A,
    B,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().copied()).collect(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows
                .iter()
                .flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0)))
                .collect(),
        }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, a) in u.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                m[(i, j)] = a * b.conj();
            }
        }
        m
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!((self.cols, self.rows), (other.rows, other.cols));
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                s += self[(i, k)] * other[(k, i)];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// `max |H - H^†|`
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut e: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                e = e.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        e
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(H + H^†) / 2`
    pub fn hermitian_part(&self) -> Self {
        let mut h = self.clone();
        for i in 0..self.rows {
            for j in i..self.cols {
                let v = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        h
    }

    /// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a square matrix.
    pub fn real_embedding(&self) -> RealMatrix {
        let n = self.rows;
        let mut r = RealMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let z = self[(i, j)];
                r[(i, j)] = z.re;
                r[(i + n, j + n)] = z.re;
                r[(i + n, j)] = z.im;
                r[(i, j + n)] = -z.im;
            }
        }
        r
    }

    /// Inverse of [`real_embedding`](Self::real_embedding), averaging the
    /// redundant copies so any drift off the embedded subspace is projected out.
    pub fn from_real_embedding(r: &RealMatrix) -> Self {
        let n = r.rows() / 2;
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = 0.5 * (r[(i, j)] + r[(i + n, j + n)]);
                let im = 0.5 * (r[(i + n, j)] - r[(i, j + n)]);
                m[(i, j)] = C64::new(re, im);
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn check_same_shape(&self, other: &Self) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
    }
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

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self + &rhs
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_shape(rhs);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_shape(rhs);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self - &rhs
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

/// Tensor (Kronecker) product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let s = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

fn require_two_qubit(m: &ComplexMatrix) -> Result<()> {
    if m.rows != 4 || m.cols != 4 {
        return Err(Error::Dimension(format!(
            "expected a 4x4 two-qubit operator, got {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(())
}

/// Reduced operator on the kept qubit of a 4×4 operator.
pub fn partial_trace(m: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..2 {
                s += match keep {
                    Subsystem::A => m[(2 * i + t, 2 * j + t)],
                    Subsystem::B => m[(2 * t + i, 2 * t + j)],
                };
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Transpose on one tensor factor of a 4×4 operator.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    require_two_qubit(m)?;
    let mut out = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    // entry <a b| m |c d>
                    let v = m[(2 * a + b, 2 * c + d)];
                    let (r, s) = match subsystem {
                        Subsystem::A => (2 * c + b, 2 * a + d),
                        Subsystem::B => (2 * a + d, 2 * c + b),
                    };
                    out[(r, s)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V^†`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        &(&self.vectors * &ComplexMatrix::diag(&d)) * &self.vectors.dagger()
    }
}

pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_tol(h, DEFAULT_TOL)
}

pub fn hermitian_eig_tol(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let err = h.hermiticity_error();
    if err > tol {
        return Err(Error::NotHermitian(err));
    }
    let n = h.rows;
    let (vals, vecs) = real::symmetric_eig(&h.hermitian_part().real_embedding());

    // Eigenvalues arrive in equal pairs. Within each cluster of (numerically)
    // equal pairs, pick complex-orthonormal vectors from the real ones by
    // greedy Gram-Schmidt, taking the largest residual first.
    let pair_vals: Vec<f64> = vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cluster_tol = 1e-11 * scale;
    let mut values = Vec::with_capacity(n);
    let mut chosen: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pair_vals[end] - pair_vals[end - 1] <= cluster_tol {
            end += 1;
        }
        let mut candidates: Vec<Vec<C64>> = (2 * start..2 * end)
            .map(|c| (0..n).map(|k| C64::new(vecs[(k, c)], vecs[(k + n, c)])).collect())
            .collect();
        for &value in &pair_vals[start..end] {
            for cand in candidates.iter_mut() {
                for q in &chosen[start..] {
                    let proj: C64 = q.iter().zip(cand.iter()).map(|(a, b)| a.conj() * b).sum();
                    for (x, qv) in cand.iter_mut().zip(q) {
                        *x -= proj * qv;
                    }
                }
            }
            let (best, norm) = candidates
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let v: Vec<C64> = candidates.swap_remove(best).iter().map(|z| z / norm).collect();
            chosen.push(v);
            values.push(value);
        }
        start = end;
    }

    let mut vectors = ComplexMatrix::zeros(n, n);
    for (j, v) in chosen.iter().enumerate() {
        for k in 0..n {
            vectors[(k, j)] = v[k];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let err = h.hermiticity_error();
    if err > DEFAULT_TOL {
        return Err(Error::NotHermitian(err));
    }
    let vals = real::symmetric_eigenvalues(&h.hermitian_part().real_embedding());
    Ok(vals.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// `tr sqrt(X^† X)` of a Hermitian matrix, i.e. the sum of absolute eigenvalues.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// True iff the smallest eigenvalue is at least `-tol`. Non-Hermitian input
/// is never PSD.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    match min_eigenvalue(m) {
        Ok(l) => l >= -tol,
        Err(_) => false,
    }
}

/// Pauli matrices and common single-qubit operators.
pub mod pauli {
    use super::{c64, ComplexMatrix};

    pub fn i2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[c64(0.0, 0.0), c64(0.0, -1.0)], &[c64(0.0, 1.0), c64(0.0, 0.0)]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }
}
