//! Dense linear algebra for symmetric positive definite systems.
//!
//! Problem sizes stay in the tens-to-hundreds, so everything is dense and
//! Cholesky-based. An [`SpdMatrix`] is symmetrized and factored once at
//! construction; after that it is immutable and safe to share across threads.

use crate::error::{Error, Result};

/// Pivot floor for the Cholesky factorization. A pivot at or below this value
/// rejects the matrix as not positive definite.
pub const PD_TOLERANCE: f64 = 1e-12;

/// Maximum admissible asymmetry |S[i][j] - S[j][i]| before symmetrization.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Finite-entry vector of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Validating constructor; rejects NaN and infinities.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { index: i });
            }
        }
        Ok(Self { data })
    }

    /// Internal constructor for values produced by our own arithmetic.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim],
        }
    }

    /// Uniform vector x_i = value.
    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            data: vec![value; dim],
        }
    }

    /// Standard basis vector e_i.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut data = vec![0.0; dim];
        data[i] = 1.0;
        Self { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.data)
    }

    pub fn norm2(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// self + t * other.
    pub fn add_scaled(&self, t: f64, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector::from_raw(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + t * b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector::from_raw(self.data.iter().map(|a| a * t).collect())
    }
}

impl std::ops::Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Dense rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            check_dim(n, r.len())?;
            for (i, v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { index: i });
                }
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: m,
            cols: n,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// A x.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Aᵀ y.
    pub fn mul_transpose_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += yi * a;
            }
        }
        Ok(out)
    }
}

/// Lower-triangular Cholesky factor L with L·Lᵀ equal to the source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    dim: usize,
    // row-major, entries above the diagonal are zero
    data: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Solve L y = b by forward substitution.
    pub fn solve_forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    /// Solve Lᵀ x = y by back substitution.
    pub fn solve_backward(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.get(k, i) * x[k];
            }
            x[i] = s / self.get(i, i);
        }
        x
    }

    /// Lᵀ x (used for quad-form cross checks: xᵀSx = ‖Lᵀx‖²).
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in i..n {
                s += self.get(k, i) * x[k];
            }
            *o = s;
        }
        out
    }

    /// L z (maps the unit ball onto the Sigma-ellipsoid).
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.get(i, k) * z[k];
            }
            *o = s;
        }
        out
    }
}

/// Symmetric positive definite matrix with its Cholesky factor.
///
/// Construction symmetrizes via (S + Sᵀ)/2, rejecting inputs whose asymmetry
/// exceeds [`SYMMETRY_TOLERANCE`], and certifies positive definiteness by
/// factoring with the [`PD_TOLERANCE`] pivot floor. The factor is computed
/// once here, never mutated afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
    factor: LowerTriangular,
}

impl SpdMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        check_dim(m.rows, m.cols)?;
        Self::from_flat(m.rows, m.data)
    }

    /// Build from a row-major square buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i + 1..dim {
                worst = worst.max((data[i * dim + j] - data[j * dim + i]).abs());
            }
        }
        if worst > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric {
                asymmetry: worst,
                tolerance: SYMMETRY_TOLERANCE,
            });
        }
        let mut sym = data;
        for i in 0..dim {
            for j in i + 1..dim {
                let avg = 0.5 * (sym[i * dim + j] + sym[j * dim + i]);
                sym[i * dim + j] = avg;
                sym[j * dim + i] = avg;
            }
        }
        let factor = cholesky_factor(dim, &sym)?;
        Ok(Self {
            dim,
            data: sym,
            factor,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self::from_flat(dim, data).expect("identity is SPD")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &v) in entries.iter().enumerate() {
            data[i * dim + i] = v;
        }
        Self::from_flat(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// The lower-triangular factor L with L·Lᵀ = S.
    pub fn cholesky_factor(&self) -> &LowerTriangular {
        &self.factor
    }

    /// S x.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok((0..self.dim).map(|i| dot(self.row(i), x)).collect())
    }

    /// xᵀ S x. Nonnegative, zero only at x = 0.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let mut acc = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            // split into diagonal plus twice the strict lower part
            let row = self.row(i);
            acc += row[i] * xi * xi;
            let mut cross = 0.0;
            for j in 0..i {
                cross += row[j] * x[j];
            }
            acc += 2.0 * xi * cross;
        }
        Ok(acc.max(0.0))
    }

    /// Solve S y = v through the stored factor.
    pub fn solve(&self, v: &[f64]) -> Result<Vector> {
        check_dim(self.dim, v.len())?;
        let y = self.factor.solve_forward(v);
        Ok(Vector::from_raw(self.factor.solve_backward(&y)))
    }

    /// Upper bound on the largest eigenvalue (row-sum norm).
    pub fn max_eigen_bound(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Factor a symmetric matrix given as a row-major buffer.
pub fn cholesky_factor(dim: usize, data: &[f64]) -> Result<LowerTriangular> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = data[i * dim + j];
            for k in 0..j {
                s -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if s <= PD_TOLERANCE {
                    return Err(Error::NotPositiveDefinite { index: i, pivot: s });
                }
                l[i * dim + j] = s.sqrt();
            } else {
                l[i * dim + j] = s / l[j * dim + j];
            }
        }
    }
    Ok(LowerTriangular { dim, data: l })
}

#[inline]
pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn cholesky_of_identity_is_identity() {
        let s = SpdMatrix::identity(2);
        let l = s.cholesky_factor();
        assert_eq!(l.get(0, 0), 1.0);
        assert_eq!(l.get(1, 1), 1.0);
        assert_eq!(l.get(1, 0), 0.0);
    }

    #[test]
    fn cholesky_matches_hand_factorization() {
        let s = SpdMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let l = s.cholesky_factor();
        assert!((l.get(0, 0) - 2.0).abs() < 1e-15);
        assert!((l.get(1, 0) - 1.0).abs() < 1e-15);
        assert!((l.get(1, 1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        // eigenvalues {3, -1}
        let err = SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }), "{err}");
    }

    #[test]
    fn asymmetric_beyond_tolerance_is_rejected() {
        let err = SpdMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }), "{err}");
    }

    #[test]
    fn small_asymmetry_is_symmetrized() {
        let eps = 1e-10;
        let s = SpdMatrix::from_rows(&[vec![2.0, 0.3 + eps], vec![0.3, 2.0]]).unwrap();
        assert_eq!(s.get(0, 1), s.get(1, 0));
    }

    #[test]
    fn quad_form_picks_diagonal_entry() {
        let s = SpdMatrix::diagonal(&[2.0, 3.0]).unwrap();
        assert_eq!(s.quad_form(&[1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn quad_form_direct_cases() {
        let id = SpdMatrix::identity(2);
        assert!((id.quad_form(&[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        let s = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((s.quad_form(&[1.0, 1.0]).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn quad_form_dimension_mismatch() {
        let s = SpdMatrix::identity(2);
        assert!(matches!(
            s.quad_form(&[1.0]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn solve_diagonal_and_identity() {
        let s = SpdMatrix::diagonal(&[2.0, 4.0]).unwrap();
        let y = s.solve(&[2.0, 4.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);

        let id = SpdMatrix::identity(3);
        let v = [0.3, -1.2, 7.5];
        let y = id.solve(&v).unwrap();
        for (a, b) in y.iter().zip(v.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn solve_two_by_two() {
        let s = SpdMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 5.0]]).unwrap();
        let y = s.solve(&[6.0, 7.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Vector::new(vec![1.0, -2.0]).is_ok());
    }

    fn random_spd(stream: &mut SeedStream, dim: usize) -> SpdMatrix {
        // MᵀM + I is comfortably positive definite
        let m: Vec<f64> = (0..dim * dim)
            .map(|_| stream.uniform(-1.0, 1.0))
            .collect();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for k in 0..dim {
                    s += m[k * dim + i] * m[k * dim + j];
                }
                data[i * dim + j] = s + if i == j { 1.0 } else { 0.0 };
            }
        }
        SpdMatrix::from_flat(dim, data).unwrap()
    }

    #[test]
    fn factor_reconstructs_random_spd_matrices() {
        let mut stream = SeedStream::new(314);
        for trial in 0..200 {
            let dim = 1 + (trial % 50);
            let s = random_spd(&mut stream, dim);
            let l = s.cholesky_factor();
            let mut worst = 0.0f64;
            for i in 0..dim {
                for j in 0..dim {
                    let mut v = 0.0;
                    for k in 0..=i.min(j) {
                        v += l.get(i, k) * l.get(j, k);
                    }
                    worst = worst.max((v - s.get(i, j)).abs());
                }
            }
            assert!(worst <= 1e-10 * dim as f64, "dim {dim}: {worst:.3e}");
        }
    }

    #[test]
    fn solve_then_multiply_recovers_rhs() {
        let mut stream = SeedStream::new(2718);
        for trial in 0..1000 {
            let dim = 1 + (trial % 50);
            let s = random_spd(&mut stream, dim);
            let v: Vec<f64> = (0..dim).map(|_| stream.uniform(-5.0, 5.0)).collect();
            let y = s.solve(&v).unwrap();
            let back = s.mul_vec(&y).unwrap();
            let scale = norm_inf(&v).max(1.0);
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn quad_form_equals_factor_norm() {
        let mut stream = SeedStream::new(99);
        for trial in 0..200 {
            let dim = 1 + (trial % 20);
            let s = random_spd(&mut stream, dim);
            let x: Vec<f64> = (0..dim).map(|_| stream.uniform(-2.0, 2.0)).collect();
            let q = s.quad_form(&x).unwrap();
            let lt = s.cholesky_factor().transpose_mul_vec(&x);
            let alt = dot(&lt, &lt);
            let denom = q.abs().max(1e-30);
            assert!(
                (q - alt).abs() / denom <= 1e-12,
                "relative gap {}",
                (q - alt).abs() / denom
            );
        }
    }
}
