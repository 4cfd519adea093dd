//! Small dense linear algebra: exact elimination, complex matrices, Jacobi SVD,
//! Perron–Frobenius iteration.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{ExactField, Real};

/// Solve `a · x = b` exactly (Gauss–Jordan with first-nonzero pivoting).
/// `a` is n×n, `b` is n×m; returns the n×m solution.
pub fn solve_exact<F: ExactField>(a: &[Vec<F>], b: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, found: b.len() });
    }
    let m = b.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<F>> = Vec::with_capacity(n);
    for (row, rhs) in a.iter().zip(b) {
        if row.len() != n {
            return Err(Error::Dimension { expected: n, found: row.len() });
        }
        let mut r = row.clone();
        r.extend(rhs.iter().cloned());
        aug.push(r);
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !aug[r][col].is_zero_elem())
            .ok_or(Error::Singular)?;
        aug.swap(col, pivot);
        let inv = aug[col][col].try_inv().ok_or(Error::Singular)?;
        for v in aug[col].iter_mut() {
            *v = v.clone() * &inv;
        }
        let prow = aug[col].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r == col || row[col].is_zero_elem() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                *v = v.clone() - &(f.clone() * p);
            }
        }
    }
    Ok(aug.into_iter().map(|r| r[n..n + m].to_vec()).collect())
}

pub fn inverse_exact<F: ExactField>(a: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let n = a.len();
    let seed = a
        .first()
        .and_then(|r| r.first())
        .ok_or(Error::Dimension { expected: 1, found: 0 })?;
    let id: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { seed.one_like() } else { seed.zero_like() })
                .collect()
        })
        .collect();
    solve_exact(a, &id)
}

/// Exact determinant by elimination.
pub fn det_exact<F: ExactField>(a: &[Vec<F>]) -> Result<F> {
    let n = a.len();
    let seed = a
        .first()
        .and_then(|r| r.first())
        .ok_or(Error::Dimension { expected: 1, found: 0 })?;
    let mut m: Vec<Vec<F>> = a.to_vec();
    let mut det = seed.one_like();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero_elem()) else {
            return Ok(seed.zero_like());
        };
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det = det * &m[col][col];
        let inv = m[col][col].try_inv().ok_or(Error::Singular)?;
        let prow = m[col].clone();
        for row in m.iter_mut().skip(col + 1) {
            if row[col].is_zero_elem() {
                continue;
            }
            let f = row[col].clone() * &inv;
            for (v, p) in row.iter_mut().zip(&prow) {
                *v = v.clone() - &(f.clone() * p);
            }
        }
    }
    Ok(det)
}

pub fn mat_mul_exact<F: ExactField>(a: &[Vec<F>], b: &[Vec<F>]) -> Vec<Vec<F>> {
    let inner = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| {
                    let mut acc = row[0].clone() * &b[0][j];
                    for k in 1..inner {
                        acc = acc + &(row[k].clone() * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn transpose<F: Clone>(a: &[Vec<F>]) -> Vec<Vec<F>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::new(T::zero(), T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        let data = values
            .iter()
            .map(|&v| Complex::new(T::from_f64_lossy(v), T::zero()))
            .collect();
        Self { rows, cols, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn scale(&mut self, s: T) {
        for z in &mut self.data {
            *z = *z * s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Max-entry norm ‖A‖∞ (entrywise).
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<T> {
        jacobi_singular_values(self)
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// One-sided (Hestenes) Jacobi SVD; accurate for small singular values
/// relative to the largest, unlike the eigenvalues of AᴴA.
fn jacobi_singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    // Work on columns; transpose wide matrices so cols ≤ rows.
    let m = if a.cols > a.rows { a.transpose() } else { a.clone() };
    let (rows, cols) = (m.rows, m.cols);
    let mut colv: Vec<Vec<Complex<T>>> =
        (0..cols).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: T = colv[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = colv[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = colv[p]
                    .iter()
                    .zip(&colv[q])
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * *y);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (cp, cq) = {
                    let (lo, hi) = colv.split_at_mut(q);
                    (&mut lo[p], &mut hi[0])
                };
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let yt = *y * phase.conj();
                    let nx = *x * c - yt * s;
                    let ny = *x * s + yt * c;
                    *x = nx;
                    *y = ny;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = colv
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Wielandt's bound (n−1)²+1 on the primitivity exponent.
pub fn is_primitive(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    if n == 0 {
        return false;
    }
    let base: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&v| v > 0).collect()).collect();
    let mul = |a: &Vec<Vec<bool>>, b: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
            .collect()
    };
    let mut exp = (n - 1) * (n - 1) + 1;
    let mut result: Option<Vec<Vec<bool>>> = None;
    let mut power = base;
    while exp > 0 {
        if exp & 1 == 1 {
            result = Some(match result {
                None => power.clone(),
                Some(r) => mul(&r, &power),
            });
        }
        exp >>= 1;
        if exp > 0 {
            power = mul(&power, &power);
        }
    }
    result.is_some_and(|r| r.iter().all(|row| row.iter().all(|&v| v)))
}

/// Power iteration for the Perron–Frobenius eigenpair of a nonnegative matrix.
/// Returns (eigenvalue, eigenvector normalized to unit sum).
pub fn power_iteration(m: &[Vec<f64>], tol: f64, max_iter: usize) -> (f64, Vec<f64>) {
    let n = m.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        // Shift by the identity: same eigenvector, removes periodic oscillation.
        let mut w: Vec<f64> = (0..n)
            .map(|i| v[i] + m[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let s: f64 = w.iter().sum();
        for x in &mut w {
            *x /= s;
        }
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        lambda = s - 1.0;
        if diff < tol {
            break;
        }
    }
    // Rayleigh-style refinement: λ = Σ(Mv)/Σv with Σv = 1.
    let mv: f64 = (0..n).map(|i| m[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()).sum();
    if mv.is_finite() {
        lambda = mv;
    }
    (lambda, v)
}
