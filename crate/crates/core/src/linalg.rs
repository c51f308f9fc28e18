//! Dense linear algebra for small symmetric problems.
//!
//! Everything here is row-major and sized for tens to a few hundred
//! unknowns: Gram matrices of an ensemble and ridge normal equations.

use crate::error::{domain, numerical, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    ///
    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "row-major data has the wrong length"
        );
        Self { rows, cols, data }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(
            self.cols,
            v.len(),
            "vector length differs from column count"
        );
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "vector length differs from row count");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    /// `selfᵀ self`, exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let d = self.cols;
        let mut g = Matrix::zeros(d, d);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..d {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let dst = &mut g.data[a * d..a * d + a + 1];
                for (x, rb) in dst.iter_mut().zip(&r[..=a]) {
                    *x += ra * rb;
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                g[(b, a)] = g[(a, b)];
            }
        }
        g
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A square matrix checked to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts `m` if `|A_ij - A_ji| ≤ 1e-12·max(1, |A_ij|)` everywhere.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(domain(format!(
                "matrix is {}x{}, not square",
                m.rows, m.cols
            )));
        }
        if m.rows == 0 {
            return Err(domain("matrix must have positive dimension"));
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(domain("matrix has non-finite entries"));
        }
        for i in 0..m.rows {
            for j in 0..i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(domain(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl std::ops::Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over all `(p, q)` pairs, annihilating `A_pq` with a plane
/// rotation, until the off-diagonal Frobenius mass drops to
/// `1e-14·‖A‖_F`.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius();
    let target = 1e-14 * scale;

    let off_mass = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_mass(&m) <= target;
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                // t = tan of the rotation angle, smaller root for stability
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        converged = off_mass(&m) <= target;
    }
    if !converged {
        return Err(numerical(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, col)] = v[(k, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `V diag(f(λ)) Vᵀ`.
fn spectral_map(eig: &EigenDecomposition, f: impl Fn(f64) -> f64) -> Matrix {
    let n = eig.eigenvalues.len();
    let scaled: Vec<f64> = eig.eigenvalues.iter().map(|&l| f(l)).collect();
    let v = &eig.eigenvectors;
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..n).map(|k| v[(i, k)] * scaled[k] * v[(j, k)]).sum();
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}

/// Inverse square root of a PSD matrix with eigenvalues floored at
/// `eig_floor`.
///
/// Fails if an eigenvalue is below `-1e-8·‖G‖_max`.
pub fn inv_sqrt_psd(g: &SymMatrix, eig_floor: f64) -> Result<SymMatrix> {
    if !(eig_floor > 0.0 && eig_floor.is_finite()) {
        return Err(domain(format!(
            "eigenvalue floor must be positive, got {eig_floor}"
        )));
    }
    let eig = sym_eig(g)?;
    inv_sqrt_from_eig(&eig, g.max_abs(), eig_floor)
}

pub(crate) fn inv_sqrt_from_eig(
    eig: &EigenDecomposition,
    max_abs: f64,
    eig_floor: f64,
) -> Result<SymMatrix> {
    let lowest = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if lowest < -1e-8 * max_abs {
        return Err(domain(format!(
            "matrix is not positive semidefinite (eigenvalue {lowest})"
        )));
    }
    Ok(SymMatrix(spectral_map(eig, |l| {
        1.0 / l.max(eig_floor).sqrt()
    })))
}

/// Cholesky factor `L` of an SPD matrix, `A = L Lᵀ`, stored lower triangular.
fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let mut l = Matrix::zeros(n, n);
    let diag_scale = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !d.is_finite() || d <= 1e-14 * diag_scale {
            return Err(numerical(format!(
                "system is singular or indefinite at pivot {j}"
            )));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = b.to_vec();
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (y[i] - s) / l[(i, i)];
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[(k, i)] * y[k]).sum();
        y[i] = (y[i] - s) / l[(i, i)];
    }
    y
}

/// Ridge regression: the `c` solving `(XᵀX + λI) c = Xᵀy`.
pub fn ridge_solve(x: &Matrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if x.rows == 0 || x.cols == 0 {
        return Err(domain("design matrix must be nonempty"));
    }
    if y.len() != x.rows {
        return Err(domain(format!(
            "{} targets for {} design rows",
            y.len(),
            x.rows
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain(format!(
            "ridge penalty must be nonnegative, got {lambda}"
        )));
    }
    let mut a = x.gram();
    for i in 0..a.rows {
        a[(i, i)] += lambda;
    }
    let l = cholesky(&a)?;
    Ok(cholesky_solve(&l, &x.tr_matvec(y)))
}
