//! Dense row-major matrices, LU with partial pivoting, overflow-safe
//! determinants, and extreme singular value estimation.
//!
//! Determinants are kept in (sign, log|det|) form: collocation matrices
//! overflow a naive pivot product well before N = 100, while sign and
//! zeroness are what the experiments track.

use crate::error::{Error, Result};
use crate::sampling::splitmix64;

/// Relative cutoff for the numerical-singularity verdict: a matrix counts
/// as numerically singular iff sigma_min <= cutoff * sigma_max. The ratio
/// is scale-free, unlike any absolute determinant threshold.
pub const SINGULAR_RATIO_CUTOFF: f64 = 1e-13;

const SIGMA_REL_TOL: f64 = 1e-8;
const SIGMA_MAX_ITERS: usize = 10_000;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::MatrixInput("ragged rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Determinant in sign / log-magnitude form. `log_abs` is the natural log
/// of |det| and is negative infinity exactly when `sign` is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetValue {
    pub sign: i8,
    pub log_abs: f64,
}

impl DetValue {
    /// The plain determinant, when it is representable in f64.
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log_abs.exp()
    }
}

/// Packed LU factors of a square matrix with the row-swap record.
/// An exact-zero pivot is recorded, not fatal: the determinant is then 0
/// and solves are refused.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    n: usize,
    lu: Vec<f64>,
    swaps: Vec<usize>,
    swap_sign: i8,
    zero_pivot: bool,
}

/// LU with partial (row) pivoting.
pub fn lu_factor(a: &Matrix) -> Result<LuFactorization> {
    if !a.is_square() {
        return Err(Error::MatrixInput(format!(
            "expected square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::MatrixInput("non-finite entry".into()));
    }
    let n = a.rows;
    let mut lu = a.data.clone();
    let mut swaps = vec![0usize; n];
    let mut swap_sign = 1i8;
    let mut zero_pivot = false;

    for k in 0..n {
        let mut piv = k;
        let mut piv_abs = lu[k * n + k].abs();
        for i in (k + 1)..n {
            let v = lu[i * n + k].abs();
            if v > piv_abs {
                piv = i;
                piv_abs = v;
            }
        }
        swaps[k] = piv;
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            swap_sign = -swap_sign;
        }
        let pivot = lu[k * n + k];
        if pivot == 0.0 {
            // the whole column below is zero as well; nothing to eliminate
            zero_pivot = true;
            continue;
        }
        for i in (k + 1)..n {
            let m = lu[i * n + k] / pivot;
            lu[i * n + k] = m;
            if m != 0.0 {
                for j in (k + 1)..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
    }

    Ok(LuFactorization {
        n,
        lu,
        swaps,
        swap_sign,
        zero_pivot,
    })
}

impl LuFactorization {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_zero_pivot(&self) -> bool {
        self.zero_pivot
    }

    /// Determinant from the pivots: sign is the permutation sign times the
    /// product of pivot signs, magnitude the sum of pivot log-magnitudes.
    pub fn log_abs_det(&self) -> DetValue {
        let mut sign = self.swap_sign;
        let mut log_abs = 0.0;
        for k in 0..self.n {
            let p = self.lu[k * self.n + k];
            if p == 0.0 {
                return DetValue {
                    sign: 0,
                    log_abs: f64::NEG_INFINITY,
                };
            }
            if p < 0.0 {
                sign = -sign;
            }
            log_abs += p.abs().ln();
        }
        DetValue { sign, log_abs }
    }

    /// Solves A x = b by forward/back substitution through the factors.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.zero_pivot {
            return Err(Error::SingularSystem);
        }
        if b.len() != self.n {
            return Err(Error::MatrixInput(format!(
                "rhs length {} does not match matrix order {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.swaps[k]);
        }
        // L y = P b, unit lower triangular
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        // U x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves A^T x = b using the same factors: with P A = L U this is
    /// U^T L^T P x = b, so substitute through U^T then L^T and undo the
    /// row swaps in reverse.
    pub fn solve_transposed(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.zero_pivot {
            return Err(Error::SingularSystem);
        }
        if b.len() != self.n {
            return Err(Error::MatrixInput(format!(
                "rhs length {} does not match matrix order {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = b.to_vec();
        // U^T y = b, lower triangular with U's diagonal
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        // L^T z = y, unit upper triangular
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[j * n + i] * x[j];
            }
            x[i] = s;
        }
        for k in (0..n).rev() {
            x.swap(k, self.swaps[k]);
        }
        Ok(x)
    }
}

/// Extreme singular values with the iteration counts that produced them.
#[derive(Clone, Copy, Debug)]
pub struct SigmaReport {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub iters_min: usize,
    pub iters_max: usize,
}

impl SigmaReport {
    /// sigma_min / sigma_max; 0 when sigma_max is 0.
    pub fn ratio(&self) -> f64 {
        if self.sigma_max == 0.0 {
            0.0
        } else {
            self.sigma_min / self.sigma_max
        }
    }

    pub fn is_numerically_singular(&self) -> bool {
        self.sigma_min <= SINGULAR_RATIO_CUTOFF * self.sigma_max
    }
}

/// Largest singular value by power iteration on A^T A and smallest by
/// inverse iteration through an LU of A. An exactly singular matrix gets
/// sigma_min = 0 rather than an error.
pub fn sigma_extremes(a: &Matrix) -> Result<SigmaReport> {
    if !a.is_square() {
        return Err(Error::MatrixInput(format!(
            "expected square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::MatrixInput("non-finite entry".into()));
    }
    if a.rows == 0 {
        return Err(Error::MatrixInput("empty matrix".into()));
    }
    let n = a.rows;

    let mut v = start_vector(n, 0x5161_4d41);
    let mut prev = 0.0;
    let mut iters_max = 0;
    for it in 1..=SIGMA_MAX_ITERS {
        let w = a.transpose_mul_vec(&a.mul_vec(&v));
        let norm = norm2(&w);
        iters_max = it;
        if norm == 0.0 {
            // v is in the null space of A; the matrix is singular but may
            // still have a positive sigma_max, so restart once shifted
            v = start_vector(n, 0x5161_4d42);
            continue;
        }
        let est = norm.sqrt();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (est - prev).abs() <= SIGMA_REL_TOL * est {
            break;
        }
        prev = est;
    }
    // the converged unit vector gives the direct estimate ||A v||
    let sigma_max = image_norm(a, &v);

    let lu = lu_factor(a)?;
    if lu.has_zero_pivot() {
        return Ok(SigmaReport {
            sigma_min: 0.0,
            sigma_max,
            iters_min: 0,
            iters_max,
        });
    }

    let mut v = start_vector(n, 0x5161_4d49);
    let mut prev = 0.0;
    let mut iters_min = 0;
    for it in 1..=SIGMA_MAX_ITERS {
        // w = (A^T A)^{-1} v = A^{-1} A^{-T} v
        let z = lu.solve_transposed(&v)?;
        let w = lu.solve(&z)?;
        let norm = norm2(&w);
        iters_min = it;
        if !norm.is_finite() || norm == 0.0 {
            // substitution overflowed: treat as numerically singular
            return Ok(SigmaReport {
                sigma_min: 0.0,
                sigma_max,
                iters_min: it,
                iters_max,
            });
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (norm - prev).abs() <= SIGMA_REL_TOL * norm {
            break;
        }
        prev = norm;
    }
    let sigma_min = image_norm(a, &v);

    Ok(SigmaReport {
        sigma_min,
        sigma_max,
        iters_min,
        iters_max,
    })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Dot product with exact FMA products and Neumaier-compensated summation.
/// For a near-null vector the terms cancel to ~1e-16 of their magnitude,
/// where plain accumulation returns rounding noise of order eps * ||row||
/// instead of the true component; compensation removes that floor.
fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for (&x, &y) in a.iter().zip(b) {
        let prod = x * y;
        let err = x.mul_add(y, -prod);
        for term in [prod, err] {
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
    }
    sum + comp
}

/// ||A v|| with each component formed by a compensated dot product, so the
/// sigma estimates stay faithful below the eps * ||A|| noise floor of a
/// plain matrix-vector product.
fn image_norm(a: &Matrix, v: &[f64]) -> f64 {
    let w: Vec<f64> = (0..a.rows)
        .map(|i| dot_compensated(&a.data[i * a.cols..(i + 1) * a.cols], v))
        .collect();
    norm2(&w)
}

/// Deterministic pseudo-random unit start vector for the iterations.
fn start_vector(n: usize, tag: u64) -> Vec<f64> {
    let mut state = tag;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let bits = splitmix64(state);
            (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect();
    let norm = norm2(&v);
    for x in &mut v {
        *x /= norm;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn rand_matrix(n: usize, seed: u64, diag_boost: f64) -> Matrix {
        let mut state = seed;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let u = (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64;
                let v = 2.0 * u - 1.0 + if i == j { diag_boost } else { 0.0 };
                m.set(i, j, v);
            }
        }
        m
    }

    fn det_bruteforce(m: &Matrix) -> f64 {
        let n = m.rows();
        if n == 1 {
            return m.get(0, 0);
        }
        let mut det = 0.0;
        for j in 0..n {
            let mut minor = Matrix::zeros(n - 1, n - 1);
            for i in 1..n {
                let mut cj = 0;
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    minor.set(i - 1, cj, m.get(i, k));
                    cj += 1;
                }
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * m.get(0, j) * det_bruteforce(&minor);
        }
        det
    }

    #[test]
    fn identity_factorization() {
        let lu = lu_factor(&Matrix::identity(3)).unwrap();
        assert!(!lu.has_zero_pivot());
        assert_eq!(lu.swaps, vec![0, 1, 2]);
        let d = lu.log_abs_det();
        assert_eq!((d.sign, d.log_abs), (1, 0.0));
    }

    #[test]
    fn permutation_matrix_sign() {
        let lu = lu_factor(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(lu.swap_sign, -1);
        let d = lu.log_abs_det();
        assert_eq!((d.sign, d.log_abs), (-1, 0.0));
    }

    #[test]
    fn two_center_collocation_matrix_det() {
        let lu = lu_factor(&mat(&[&[0.0, 8.0], &[8.0, 0.0]])).unwrap();
        let d = lu.log_abs_det();
        assert_eq!(d.sign, -1);
        assert!((d.log_abs - 64f64.ln()).abs() < 1e-14);
        assert!((d.value() + 64.0).abs() < 1e-12);
    }

    #[test]
    fn diag_two_log_det() {
        let mut m = Matrix::identity(10);
        for i in 0..10 {
            m.set(i, i, 2.0);
        }
        let d = lu_factor(&m).unwrap().log_abs_det();
        assert_eq!(d.sign, 1);
        assert!((d.log_abs - 10.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_pivot_recorded_not_fatal() {
        let m = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let lu = lu_factor(&m).unwrap();
        assert!(lu.has_zero_pivot());
        let d = lu.log_abs_det();
        assert_eq!(d.sign, 0);
        assert_eq!(d.log_abs, f64::NEG_INFINITY);
        assert!(matches!(lu.solve(&[1.0, 1.0]), Err(Error::SingularSystem)));
    }

    #[test]
    fn non_square_and_non_finite_rejected() {
        let m = Matrix::zeros(2, 3);
        assert!(matches!(lu_factor(&m), Err(Error::MatrixInput(_))));
        let mut m = Matrix::identity(2);
        m.set(0, 1, f64::NAN);
        assert!(lu_factor(&m).is_err());
    }

    #[test]
    fn solve_examples() {
        let lu = lu_factor(&Matrix::identity(4)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(lu.solve(&b).unwrap(), b);

        let lu = lu_factor(&mat(&[&[0.0, 8.0], &[8.0, 0.0]])).unwrap();
        let x = lu.solve(&[8.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_solve_residual() {
        let a = rand_matrix(20, 7, 20.0);
        let lu = lu_factor(&a).unwrap();
        let b: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = lu.solve(&b).unwrap();
        let r: f64 = a
            .mul_vec(&x)
            .iter()
            .zip(&b)
            .map(|(ax, bi)| (ax - bi).abs())
            .fold(0.0, f64::max);
        let scale = a.inf_norm() * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(r <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn solve_transposed_matches_explicit_transpose() {
        let a = rand_matrix(15, 11, 4.0);
        let mut at = Matrix::zeros(15, 15);
        for i in 0..15 {
            for j in 0..15 {
                at.set(j, i, a.get(i, j));
            }
        }
        let b: Vec<f64> = (0..15).map(|i| (i as f64 * 0.61).cos()).collect();
        let x1 = lu_factor(&a).unwrap().solve_transposed(&b).unwrap();
        let x2 = lu_factor(&at).unwrap().solve(&b).unwrap();
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }

    #[test]
    fn reconstruction_from_factors() {
        // P A = L U to 1e-12 of the matrix scale
        let a = rand_matrix(12, 3, 0.0);
        let lu = lu_factor(&a).unwrap();
        let n = 12;
        // apply the recorded swaps to a copy of A
        let mut pa = a.clone();
        for k in 0..n {
            let s = lu.swaps[k];
            if s != k {
                for j in 0..n {
                    let t = pa.get(k, j);
                    pa.set(k, j, pa.get(s, j));
                    pa.set(s, j, t);
                }
            }
        }
        let scale = a.inf_norm();
        // L carries an implicit unit diagonal; entries above it belong to U
        for i in 0..n {
            for j in 0..n {
                let mut prod = 0.0;
                for k in 0..n {
                    let l = if k < i {
                        lu.lu[i * n + k]
                    } else if k == i {
                        1.0
                    } else {
                        0.0
                    };
                    let u = if k <= j { lu.lu[k * n + j] } else { 0.0 };
                    prod += l * u;
                }
                assert!((prod - pa.get(i, j)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn det_matches_bruteforce_small() {
        for n in [3usize, 4] {
            for seed in 0..20u64 {
                let a = rand_matrix(n, 100 + seed, 0.0);
                let d = lu_factor(&a).unwrap().log_abs_det();
                let want = det_bruteforce(&a);
                let got = d.value();
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1e-12),
                    "n={n} seed={seed} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn scaling_shifts_log_det() {
        let a = rand_matrix(8, 42, 3.0);
        let mut a2 = a.clone();
        for i in 0..8 {
            for j in 0..8 {
                a2.set(i, j, 2.0 * a.get(i, j));
            }
        }
        let d = lu_factor(&a).unwrap().log_abs_det();
        let d2 = lu_factor(&a2).unwrap().log_abs_det();
        assert_eq!(d.sign, d2.sign);
        assert!((d2.log_abs - d.log_abs - 8.0 * 2f64.ln()).abs() <= 1e-12 * d2.log_abs.abs());
    }

    #[test]
    fn sigma_diag_example() {
        let m = mat(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let s = sigma_extremes(&m).unwrap();
        assert!((s.sigma_min - 1.0).abs() < 1e-7);
        assert!((s.sigma_max - 3.0).abs() < 1e-7);
        assert!(s.iters_max >= 1 && s.iters_min >= 1);
        assert!(!s.is_numerically_singular());
    }

    #[test]
    fn sigma_antidiagonal_example() {
        let s = sigma_extremes(&mat(&[&[0.0, 8.0], &[8.0, 0.0]])).unwrap();
        assert!((s.sigma_min - 8.0).abs() < 1e-7);
        assert!((s.sigma_max - 8.0).abs() < 1e-7);
    }

    #[test]
    fn sigma_duplicated_row() {
        let m = mat(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[0.0, 1.0, -1.0]]);
        let s = sigma_extremes(&m).unwrap();
        assert!(s.sigma_min <= 1e-10 * s.sigma_max);
        assert!(s.is_numerically_singular());
    }

    #[test]
    fn sigma_exactly_singular() {
        let m = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let s = sigma_extremes(&m).unwrap();
        assert_eq!(s.sigma_min, 0.0);
        assert!(s.sigma_max > 4.0);
    }

    #[test]
    fn sigma_brackets_geometric_mean_of_det() {
        // AM-GM over log singular values: sigma_min <= |det|^{1/N} <= sigma_max
        for seed in 0..10u64 {
            let n = 6;
            let a = rand_matrix(n, 500 + seed, 1.5);
            let d = lu_factor(&a).unwrap().log_abs_det();
            let s = sigma_extremes(&a).unwrap();
            let geo = (d.log_abs / n as f64).exp();
            assert!(s.sigma_min <= geo * (1.0 + 1e-6));
            assert!(geo <= s.sigma_max * (1.0 + 1e-6));
        }
    }

    #[test]
    fn one_by_one_matrix() {
        let s = sigma_extremes(&mat(&[&[-5.0]])).unwrap();
        assert!((s.sigma_min - 5.0).abs() < 1e-8);
        assert!((s.sigma_max - 5.0).abs() < 1e-8);
        let d = lu_factor(&mat(&[&[-5.0]])).unwrap().log_abs_det();
        assert_eq!(d.sign, -1);
    }
}
