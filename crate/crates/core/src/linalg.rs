//! Dense SPD factorization for the per-line sweep systems `(B - tau sigma delta) v = r`.
//!
//! The sweep matrix is symmetric positive definite: `B` is SPD and `delta` is
//! negative semidefinite. It is assembled dense from the Toeplitz column and
//! factored once per `tau * sigma`; every line of every step reuses the factor.

use crate::error::{Error, Result};
use crate::frac_ops::FracOperator1D;
use crate::grid::{Axis, Field2D};

/// Lower-triangular Cholesky factor `A = L L^T`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    /// `L`, row-major.
    lower: Vec<f64>,
    /// `L^T`, row-major, for contiguous back substitution.
    upper: Vec<f64>,
}

impl Cholesky {
    /// Factors a row-major symmetric matrix. On failure returns the pivot index
    /// and the non-positive value found there.
    pub fn factor(a: &[f64], n: usize) -> std::result::Result<Self, (usize, f64)> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..=r {
                let dot: f64 = l[r * n..r * n + c]
                    .iter()
                    .zip(&l[c * n..c * n + c])
                    .map(|(x, y)| x * y)
                    .sum();
                let s = a[r * n + c] - dot;
                if r == c {
                    if !s.is_finite() || s <= 0.0 {
                        return Err((r, s));
                    }
                    l[r * n + r] = s.sqrt();
                } else {
                    l[r * n + c] = s / l[c * n + c];
                }
            }
        }
        let mut upper = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..=r {
                upper[c * n + r] = l[r * n + c];
            }
        }
        Ok(Self { n, lower: l, upper })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `L L^T x = b`, overwriting `b` with `x`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for r in 0..n {
            let row = &self.lower[r * n..r * n + r];
            let s: f64 = row.iter().zip(&b[..r]).map(|(x, y)| x * y).sum();
            b[r] = (b[r] - s) / self.lower[r * n + r];
        }
        for r in (0..n).rev() {
            let row = &self.upper[r * n + r + 1..(r + 1) * n];
            let s: f64 = row.iter().zip(&b[r + 1..]).map(|(x, y)| x * y).sum();
            b[r] = (b[r] - s) / self.upper[r * n + r];
        }
    }
}

/// `B - tau_sigma * delta` for one axis, assembled and factored.
#[derive(Debug, Clone)]
pub struct SweepMatrix {
    pub n: usize,
    pub tau_sigma: f64,
    dense: Vec<f64>,
    factor: Cholesky,
}

impl SweepMatrix {
    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.dense[r * n..(r + 1) * n]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
        }
    }

    pub fn solve_line(&self, rhs: &[f64], out: &mut [f64]) {
        out.copy_from_slice(rhs);
        self.factor.solve_in_place(out);
    }
}

/// Assembles `B - tau_sigma * delta` and factors it.
///
/// `tau_sigma = 0` yields `B` itself. Factorization failure means the matrix is
/// not positive definite and is reported with the operator parameters.
pub fn build_sweep_matrix(op: &FracOperator1D, tau_sigma: f64) -> Result<SweepMatrix> {
    if !(tau_sigma.is_finite() && tau_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau*sigma = {tau_sigma} must be non-negative"
        )));
    }
    let n = op.n;
    let mut dense: Vec<f64> = op.dense().iter().map(|d| -tau_sigma * d).collect();
    for r in 0..n {
        dense[r * n + r] += 1.0 - 2.0 * op.c2;
        if r > 0 {
            dense[r * n + r - 1] += op.c2;
        }
        if r + 1 < n {
            dense[r * n + r + 1] += op.c2;
        }
    }
    let factor =
        Cholesky::factor(&dense, n).map_err(|(pivot, value)| Error::NotPositiveDefinite {
            pivot,
            value,
            order: op.order,
            kappa: op.kappa,
            h: op.h,
            n,
            tau_sigma,
        })?;
    Ok(SweepMatrix {
        n,
        tau_sigma,
        dense,
        factor,
    })
}

/// Solves every line of `rhs` along `axis` against the factored sweep matrix.
pub fn sweep_solve(m: &SweepMatrix, rhs: &Field2D, axis: Axis) -> Result<Field2D> {
    let actual = rhs.extent(axis);
    if actual != m.n {
        return Err(Error::ShapeMismatch {
            axis,
            expected: m.n,
            actual,
        });
    }
    Ok(rhs.map_lines(axis, |b, x| m.solve_line(b, x)))
}

/// Applies the (unfactored) sweep matrix along `axis`.
pub fn sweep_apply(m: &SweepMatrix, field: &Field2D, axis: Axis) -> Result<Field2D> {
    let actual = field.extent(axis);
    if actual != m.n {
        return Err(Error::ShapeMismatch {
            axis,
            expected: m.n,
            actual,
        });
    }
    Ok(field.map_lines(axis, |x, out| m.matvec(x, out)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frac_ops::build_frac_operator;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let den = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
        num / den
    }

    #[test]
    fn classical_assembly() {
        let op = build_frac_operator(2.0, 1.0, 1.0, 3).unwrap();
        let m = build_sweep_matrix(&op, 1.0).unwrap();
        let c2 = 1.0 / 12.0;
        let d = m.dense();
        assert_eq!(d[0], 1.0 - 2.0 * c2 + 2.0);
        assert_eq!(d[1], c2 - 1.0);
        assert_eq!(d[2], 0.0);
        assert_eq!(d[4], 1.0 - 2.0 * c2 + 2.0);
        assert_eq!(d[5], c2 - 1.0);
    }

    #[test]
    fn zero_tau_sigma_is_compact_operator() {
        let op = build_frac_operator(1.5, 1.0, 0.1, 9).unwrap();
        let m = build_sweep_matrix(&op, 0.0).unwrap();
        assert_eq!(m.dense(), &op.compact_dense()[..]);
        let w: Vec<f64> = (0..9).map(|k| (k as f64).cos()).collect();
        let mut bw = vec![0.0; 9];
        op.apply_compact_line(&w, &mut bw);
        let mut x = vec![0.0; 9];
        m.solve_line(&bw, &mut x);
        assert!(rel_err(&x, &w) < 1e-13);
    }

    #[test]
    fn rejects_negative_tau_sigma() {
        let op = build_frac_operator(1.5, 1.0, 0.1, 4).unwrap();
        assert!(build_sweep_matrix(&op, -1.0).is_err());
    }

    #[test]
    fn cholesky_reports_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        assert_eq!(Cholesky::factor(&a, 2).unwrap_err().0, 1);
    }

    #[test]
    fn smallest_eigenvalue_positive() {
        for gamma in [1.1, 1.5, 1.9] {
            for ts in [1e-3, 1.0] {
                let op = build_frac_operator(gamma, 1.0, 1.0 / 32.0, 31).unwrap();
                let m = build_sweep_matrix(&op, ts).unwrap();
                let eig = DMatrix::from_row_slice(31, 31, m.dense()).symmetric_eigen();
                let min = eig.eigenvalues.min();
                assert!(min > 0.0, "gamma={gamma} ts={ts}: {min}");
            }
        }
    }

    #[test]
    fn solve_after_multiply_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for gamma in [1.1, 1.5, 1.9] {
            for ts in [1e-3, 1.0, 50.0] {
                let op = build_frac_operator(gamma, 2.0, 1.0 / 16.0, 15).unwrap();
                let m = build_sweep_matrix(&op, ts).unwrap();
                let mut b = vec![0.0; 15];
                let mut x = vec![0.0; 15];
                for _ in 0..50 {
                    let w = random_vec(&mut rng, 15);
                    m.matvec(&w, &mut b);
                    m.solve_line(&b, &mut x);
                    assert!(rel_err(&x, &w) < 1e-12);
                    // residual bound
                    let mut ax = vec![0.0; 15];
                    m.matvec(&x, &mut ax);
                    assert!(rel_err(&ax, &b) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn agrees_with_generic_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let op = build_frac_operator(1.7, 1.0, 1.0 / 16.0, 15).unwrap();
        let m = build_sweep_matrix(&op, 0.25).unwrap();
        let lu = DMatrix::from_row_slice(15, 15, m.dense()).lu();
        for _ in 0..10 {
            let b = random_vec(&mut rng, 15);
            let want = lu.solve(&DVector::from_column_slice(&b)).unwrap();
            let mut x = vec![0.0; 15];
            m.solve_line(&b, &mut x);
            assert!(rel_err(&x, want.as_slice()) < 1e-12);
        }
    }

    #[test]
    fn field_sweeps() {
        let op = build_frac_operator(1.3, 1.0, 0.125, 7).unwrap();
        let m = build_sweep_matrix(&op, 0.5).unwrap();
        let w = Field2D::from_vec(7, 4, (0..28).map(|k| (k as f64 * 0.7).sin()).collect()).unwrap();
        let wt = w.transposed();
        for (field, axis) in [(&w, Axis::X), (&wt, Axis::Y)] {
            let b = sweep_apply(&m, field, axis).unwrap();
            let x = sweep_solve(&m, &b, axis).unwrap();
            assert!(rel_err(x.as_slice(), field.as_slice()) < 1e-12);
            let zero = sweep_solve(&m, &Field2D::zeros(field.nx(), field.ny()), axis).unwrap();
            assert_eq!(zero.max_abs(), 0.0);
        }
        assert!(sweep_solve(&m, &w, Axis::Y).is_err());
    }
}
