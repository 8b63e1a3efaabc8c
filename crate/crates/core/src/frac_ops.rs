//! Fractional centered differences and the fourth-order compact operator.
//!
//! The centered difference of order `gamma` at interior node `i` is
//!
//! ```text
//! delta u_i = -(kappa / h^gamma) * sum_k g_k u_{i-k},   g_{-k} = g_k
//! ```
//!
//! where the sum runs over every grid node. With homogeneous Dirichlet data the
//! boundary and exterior terms vanish, so restricting to the interior gives an
//! exact dense symmetric Toeplitz matrix with first column `-kappa g_m / h^gamma`.
//! Nothing is truncated.
//!
//! The compact operator `B = tridiag(c2, 1 - 2 c2, c2)` with `c2 = gamma / 24`
//! lifts the centered difference to fourth order: `B d^gamma u = Delta u + O(h^4)`.

use crate::error::{Error, Result};
use crate::grid::{Axis, Field2D};

/// One-sided fractional centered-difference coefficients `g_0 ... g_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    pub order: f64,
    pub g: Vec<f64>,
}

impl CoeffSeq {
    /// `g_k` for any signed lag, using `g_{-k} = g_k`.
    pub fn at(&self, k: isize) -> f64 {
        self.g[k.unsigned_abs()]
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

/// Recurrence factor `1 - (gamma + 1) / (gamma / 2 + k)`.
#[inline]
pub fn recurrence_factor(gamma: f64, k: usize) -> f64 {
    1.0 - (gamma + 1.0) / (gamma / 2.0 + k as f64)
}

/// Coefficients of the fractional centered difference of order `gamma`, lags `0..=k_max`.
///
/// `g_0 = Gamma(gamma + 1) / Gamma(gamma / 2 + 1)^2`; later terms follow the
/// multiplicative recurrence. `gamma = 2` is accepted and reproduces `[2, -1, 0, ...]`.
pub fn riesz_coefficients(gamma: f64, k_max: usize) -> Result<CoeffSeq> {
    if !gamma.is_finite() || gamma <= 1.0 || gamma > 2.0 {
        return Err(Error::InvalidParameter(format!(
            "fractional order {gamma} must lie in (1, 2]"
        )));
    }
    let half = libm::tgamma(gamma / 2.0 + 1.0);
    let mut g = Vec::with_capacity(k_max + 1);
    g.push(libm::tgamma(gamma + 1.0) / (half * half));
    for k in 1..=k_max {
        let prev = g[k - 1];
        g.push(recurrence_factor(gamma, k) * prev);
    }
    Ok(CoeffSeq { order: gamma, g })
}

/// `c2 = gamma / 24`.
#[inline]
pub fn compact_weight(gamma: f64) -> f64 {
    gamma / 24.0
}

/// One axis of the discrete operator: `delta = kappa * Delta^gamma` on `n` interior
/// nodes, plus its compact companion `B`.
#[derive(Debug, Clone)]
pub struct FracOperator1D {
    pub order: f64,
    pub kappa: f64,
    pub h: f64,
    pub n: usize,
    /// First column of the symmetric Toeplitz matrix, `t_m = -kappa g_m / h^gamma`.
    pub toeplitz_col: Vec<f64>,
    /// Off-diagonal weight of `B`.
    pub c2: f64,
    dense: Vec<f64>,
}

impl FracOperator1D {
    pub fn build(gamma: f64, kappa: f64, h: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("operator needs n >= 1".into()));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spacing {h} must be positive"
            )));
        }
        if !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa {kappa} not finite")));
        }
        let coeffs = riesz_coefficients(gamma, n - 1)?;
        let scale = -kappa / h.powf(gamma);
        let toeplitz_col: Vec<f64> = coeffs.g.iter().map(|g| scale * g).collect();
        let mut dense = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                dense[r * n + c] = toeplitz_col[r.abs_diff(c)];
            }
        }
        Ok(Self {
            order: gamma,
            kappa,
            h,
            n,
            toeplitz_col,
            c2: compact_weight(gamma),
            dense,
        })
    }

    /// Row-major dense `delta` matrix.
    pub fn dense(&self) -> &[f64] {
        &self.dense
    }

    /// Row-major dense `B` matrix.
    pub fn compact_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut b = vec![0.0; n * n];
        for r in 0..n {
            b[r * n + r] = 1.0 - 2.0 * self.c2;
            if r > 0 {
                b[r * n + r - 1] = self.c2;
            }
            if r + 1 < n {
                b[r * n + r + 1] = self.c2;
            }
        }
        b
    }

    /// `out = delta * input` for one line.
    pub fn apply_line(&self, input: &[f64], out: &mut [f64]) {
        let n = self.n;
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.dense[r * n..(r + 1) * n];
            *o = row.iter().zip(input).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = B * input` for one line, zero outside the interior.
    pub fn apply_compact_line(&self, input: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (c2, diag) = (self.c2, 1.0 - 2.0 * self.c2);
        for r in 0..n {
            let left = if r > 0 { input[r - 1] } else { 0.0 };
            let right = if r + 1 < n { input[r + 1] } else { 0.0 };
            out[r] = c2 * left + diag * input[r] + c2 * right;
        }
    }

    fn check_extent(&self, field: &Field2D, axis: Axis) -> Result<()> {
        let actual = field.extent(axis);
        if actual != self.n {
            return Err(Error::ShapeMismatch {
                axis,
                expected: self.n,
                actual,
            });
        }
        Ok(())
    }
}

pub fn build_frac_operator(gamma: f64, kappa: f64, h: f64, n: usize) -> Result<FracOperator1D> {
    FracOperator1D::build(gamma, kappa, h, n)
}

/// Applies `delta` along `axis` to every line of `field`.
pub fn apply_frac_1d(op: &FracOperator1D, field: &Field2D, axis: Axis) -> Result<Field2D> {
    op.check_extent(field, axis)?;
    Ok(field.map_lines(axis, |i, o| op.apply_line(i, o)))
}

/// Applies `B` along `axis` to every line of `field`.
pub fn apply_compact_1d(op: &FracOperator1D, field: &Field2D, axis: Axis) -> Result<Field2D> {
    op.check_extent(field, axis)?;
    Ok(field.map_lines(axis, |i, o| op.apply_compact_line(i, o)))
}

/// One rung of a spatial accuracy ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeLevel {
    pub h: f64,
    pub error: f64,
}

/// Measures `max_i |B d^gamma u (x_i) - Delta u (x_i)|` on `[0, 1]` for each cell
/// count in `cells`.
///
/// `B` is applied to the analytic derivative at every node including the two
/// boundary nodes; `Delta` sums over all nodes `0..=M`. Ratios between successive
/// halvings approach 16.
pub fn compact_accuracy_probe(
    gamma: f64,
    exact: impl Fn(f64) -> f64,
    exact_derivative: impl Fn(f64) -> f64,
    cells: &[usize],
) -> Result<Vec<ProbeLevel>> {
    if cells.len() < 2 {
        return Err(Error::DegenerateLadder(format!(
            "accuracy probe needs at least 2 levels, got {}",
            cells.len()
        )));
    }
    let c2 = compact_weight(gamma);
    cells
        .iter()
        .map(|&m| {
            if m < 2 {
                return Err(Error::DegenerateLadder(format!("level with {m} cells")));
            }
            let h = 1.0 / m as f64;
            let node = |i: usize| if i == m { 1.0 } else { i as f64 * h };
            let coeffs = riesz_coefficients(gamma, m)?;
            let u: Vec<f64> = (0..=m).map(|i| exact(node(i))).collect();
            let du: Vec<f64> = (0..=m).map(|i| exact_derivative(node(i))).collect();
            let scale = -1.0 / h.powf(gamma);
            let mut err = 0.0_f64;
            for i in 1..m {
                let lhs = c2 * du[i - 1] + (1.0 - 2.0 * c2) * du[i] + c2 * du[i + 1];
                let rhs: f64 = (0..=m).map(|p| coeffs.g[i.abs_diff(p)] * u[p]).sum::<f64>() * scale;
                err = err.max((lhs - rhs).abs());
            }
            Ok(ProbeLevel { h, error: err })
        })
        .collect()
}
