//! Domain, grid and field types shared by the solver.
//!
//! Fields hold interior nodes only. The homogeneous Dirichlet boundary is never
//! stored: every operator treats values outside the interior as zero.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction along which a one-dimensional operator acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// Rectangle, fractional orders, diffusion coefficients and final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub t_final: f64,
}

impl DomainSpec {
    /// Unit square with the given orders, coefficients and final time.
    pub fn unit_square(
        alpha: f64,
        beta: f64,
        kappa1: f64,
        kappa2: f64,
        t_final: f64,
    ) -> Result<Self> {
        Self {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            d: 1.0,
            alpha,
            beta,
            kappa1,
            kappa2,
            t_final,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a,
            self.b,
            self.c,
            self.d,
            self.alpha,
            self.beta,
            self.kappa1,
            self.kappa2,
            self.t_final,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "domain has non-finite entries".into(),
            ));
        }
        for (name, order) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(order > 1.0 && order < 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {order} must lie in (1, 2)"
                )));
            }
        }
        for (name, kappa) in [("kappa1", self.kappa1), ("kappa2", self.kappa2)] {
            if kappa <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {kappa} must be positive"
                )));
            }
        }
        if self.b <= self.a || self.d <= self.c {
            return Err(Error::InvalidParameter(format!(
                "empty rectangle ({}, {}) x ({}, {})",
                self.a, self.b, self.c, self.d
            )));
        }
        if self.t_final <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "final time {} must be positive",
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.b - self.a) * (self.d - self.c)
    }
}

/// Uniform tensor grid with `m1 x m2` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub m1: usize,
    pub m2: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2D {
    pub fn new(domain: &DomainSpec, m1: usize, m2: usize) -> Result<Self> {
        if m1 < 2 || m2 < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs M1, M2 >= 2 (got {m1}, {m2})"
            )));
        }
        Ok(Self {
            m1,
            m2,
            a: domain.a,
            b: domain.b,
            c: domain.c,
            d: domain.d,
            hx: (domain.b - domain.a) / m1 as f64,
            hy: (domain.d - domain.c) / m2 as f64,
        })
    }

    /// Interior node count along x.
    pub fn nx(&self) -> usize {
        self.m1 - 1
    }

    /// Interior node count along y.
    pub fn ny(&self) -> usize {
        self.m2 - 1
    }

    /// Node coordinate `x_i`, `0 <= i <= m1`. The right endpoint is returned as `b` itself.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.m1 {
            self.b
        } else {
            self.a + i as f64 * self.hx
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.m2 {
            self.d
        } else {
            self.c + j as f64 * self.hy
        }
    }

    pub fn spacing(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.hx,
            Axis::Y => self.hy,
        }
    }

    pub fn interior_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx(),
            Axis::Y => self.ny(),
        }
    }

    pub fn matches(&self, domain: &DomainSpec) -> bool {
        self.a == domain.a && self.b == domain.b && self.c == domain.c && self.d == domain.d
    }

    pub fn check_domain(&self, domain: &DomainSpec) -> Result<()> {
        if self.matches(domain) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                m1: self.m1,
                m2: self.m2,
                what: format!(
                    "domain ({}, {}) x ({}, {})",
                    domain.a, domain.b, domain.c, domain.d
                ),
            })
        }
    }
}

/// Uniform time grid `t_n = n * tau`, `tau = T / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub steps: usize,
    pub tau: f64,
    pub t_final: f64,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("time grid needs N >= 1".into()));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "final time {t_final} must be positive"
            )));
        }
        Ok(Self {
            steps,
            tau: t_final / steps as f64,
            t_final,
        })
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.steps {
            self.t_final
        } else {
            n as f64 * self.tau
        }
    }
}

/// Real values on the interior nodes, row-major with `j` outer and `i` inner.
///
/// Index `(i, j)` addresses node `(x_{i+1}, y_{j+1})`.
#[derive(Clone, PartialEq)]
pub struct Field2D {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Field2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field2D")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field2D {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            data: vec![0.0; nx * ny],
        }
    }

    pub fn zeros_like(grid: &Grid2D) -> Self {
        Self::zeros(grid.nx(), grid.ny())
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nx * ny {
            return Err(Error::InvalidParameter(format!(
                "field data length {} != {nx} x {ny}",
                data.len()
            )));
        }
        Ok(Self { nx, ny, data })
    }

    /// Samples `f(x, y)` at every interior node. Non-finite samples are an error.
    pub fn sample(grid: &Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut data = Vec::with_capacity(nx * ny);
        for j in 1..=ny {
            let y = grid.y(j);
            for i in 1..=nx {
                let x = grid.x(i);
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::NonFinite { step: 0, x, y });
                }
                data.push(v);
            }
        }
        Ok(Self { nx, ny, data })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    pub fn same_shape(&self, other: &Field2D) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }

    pub fn check_shape(&self, grid: &Grid2D) -> Result<()> {
        if self.nx != grid.nx() {
            return Err(Error::ShapeMismatch {
                axis: Axis::X,
                expected: grid.nx(),
                actual: self.nx,
            });
        }
        if self.ny != grid.ny() {
            return Err(Error::ShapeMismatch {
                axis: Axis::Y,
                expected: grid.ny(),
                actual: self.ny,
            });
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Field2D) -> Result<()> {
        if self.nx != other.nx {
            return Err(Error::ShapeMismatch {
                axis: Axis::X,
                expected: self.nx,
                actual: other.nx,
            });
        }
        if self.ny != other.ny {
            return Err(Error::ShapeMismatch {
                axis: Axis::Y,
                expected: self.ny,
                actual: other.ny,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nx + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Row `j` (an x-line).
    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.nx..(j + 1) * self.nx]
    }

    /// Swaps the roles of `i` and `j`.
    pub fn transposed(&self) -> Field2D {
        let mut out = Field2D::zeros(self.ny, self.nx);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.data[i * self.ny + j] = self.data[j * self.nx + i];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Flat index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|k| (k % self.nx, k / self.nx))
    }

    /// Pointwise `a * self + b * other`.
    pub fn lincomb(&self, a: f64, other: &Field2D, b: f64) -> Field2D {
        debug_assert!(self.same_shape(other));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Field2D {
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }

    pub fn scaled(&self, s: f64) -> Field2D {
        Field2D {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|v| s * v).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Field2D) {
        debug_assert!(self.same_shape(other));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += s * y;
        }
    }

    /// Applies `f(input_line, output_line)` to every line along `axis`.
    ///
    /// Lines are processed independently (in parallel on the ambient rayon pool);
    /// each line's arithmetic is sequential, so the result does not depend on the
    /// worker count.
    pub fn map_lines<F>(&self, axis: Axis, f: F) -> Field2D
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        use rayon::prelude::*;
        match axis {
            Axis::X => {
                let mut out = Field2D::zeros(self.nx, self.ny);
                if self.nx == 0 {
                    return out;
                }
                out.data
                    .par_chunks_mut(self.nx)
                    .zip(self.data.par_chunks(self.nx))
                    .for_each(|(o, i)| f(i, o));
                out
            }
            Axis::Y => self.transposed().map_lines(Axis::X, f).transposed(),
        }
    }

    /// Unweighted Euclidean inner product in canonical order.
    pub fn dot(&self, other: &Field2D) -> f64 {
        self.data.iter().zip(&other.data).map(|(x, y)| x * y).sum()
    }
}

/// Values on every node including the boundary ring, row-major over
/// `(m1 + 1) x (m2 + 1)` nodes. Used for source terms, whose boundary values
/// enter the compact operator `B_x B_y g` at nodes adjacent to the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedField {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl PaddedField {
    /// Interior field with a zero boundary ring.
    pub fn from_interior(f: &Field2D) -> Self {
        let (nx, ny) = (f.nx(), f.ny());
        let w = nx + 2;
        let mut data = vec![0.0; w * (ny + 2)];
        for j in 0..ny {
            data[(j + 1) * w + 1..(j + 1) * w + 1 + nx].copy_from_slice(f.row(j));
        }
        Self { nx, ny, data }
    }

    /// Samples `f(i, j, x, y)` at every node `0 <= i <= m1`, `0 <= j <= m2`.
    pub fn sample_nodes(grid: &Grid2D, mut f: impl FnMut(usize, usize, f64, f64) -> f64) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut data = Vec::with_capacity((nx + 2) * (ny + 2));
        for j in 0..=grid.m2 {
            let y = grid.y(j);
            for i in 0..=grid.m1 {
                data.push(f(i, j, grid.x(i), y));
            }
        }
        Self { nx, ny, data }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Value at node `(i, j)`, `0 <= i <= nx + 1`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.data[j * (self.nx + 2) + i]
    }

    pub fn interior(&self) -> Field2D {
        let mut out = Field2D::zeros(self.nx, self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.set(i, j, self.node(i + 1, j + 1));
            }
        }
        out
    }

    /// Node of the first non-finite value.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let w = self.nx + 2;
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|k| (k % w, k / w))
    }
}

impl From<Field2D> for PaddedField {
    fn from(f: Field2D) -> Self {
        Self::from_interior(&f)
    }
}

pub type SourceFn = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A complete initial-boundary value problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    /// `g(x, y, t, u)`
    pub source: SourceFn,
    /// `phi(x, y)`
    pub initial: InitialFn,
    pub lipschitz: Option<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("domain", &self.domain)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        domain: DomainSpec,
        source: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        domain.validate()?;
        Ok(Self {
            domain,
            source: Arc::new(source),
            initial: Arc::new(initial),
            lipschitz: None,
        })
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant {l} must be positive"
            )));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }
}

/// `u^0_{ij} = phi(x_i, y_j)` on the interior.
pub fn sample_initial(problem: &ProblemSpec, grid: &Grid2D) -> Result<Field2D> {
    grid.check_domain(&problem.domain)?;
    let phi = &problem.initial;
    Field2D::sample(grid, |x, y| phi(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64, y: f64) -> f64 {
        (x * (1.0 - x)).powi(4) * (y * (1.0 - y)).powi(4)
    }

    #[test]
    fn domain_invariants() {
        assert!(DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).is_ok());
        assert!(DomainSpec::unit_square(1.0, 1.5, 1.0, 1.0, 1.0).is_err());
        assert!(DomainSpec::unit_square(1.5, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(DomainSpec::unit_square(1.5, 1.5, 0.0, 1.0, 1.0).is_err());
        assert!(DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 0.0).is_err());
        let mut d = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        d.b = d.a;
        assert!(d.validate().is_err());
    }

    #[test]
    fn grid_nodes_are_affine_and_endpoints_exact() {
        let d = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        for m in [2, 3, 7, 49, 98, 196, 200] {
            let g = Grid2D::new(&d, m, m).unwrap();
            assert_eq!(g.x(0), 0.0);
            assert_eq!(g.x(m), 1.0);
            assert_eq!(g.y(m), 1.0);
            for i in 0..m {
                assert_eq!(g.x(i), g.a + i as f64 * g.hx);
            }
        }
        assert!(Grid2D::new(&d, 1, 4).is_err());
    }

    #[test]
    fn time_grid_ends_at_t_final() {
        let tg = TimeGrid::new(1.0, 49).unwrap();
        assert_eq!(tg.t(49), 1.0);
        assert_eq!(tg.t(0), 0.0);
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn sample_initial_bump_center() {
        let d = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        let p = ProblemSpec::new(d, |_, _, _, _| 0.0, bump).unwrap();
        let g = Grid2D::new(&d, 4, 4).unwrap();
        let u0 = sample_initial(&p, &g).unwrap();
        assert_eq!((u0.nx(), u0.ny()), (3, 3));
        // node (0.5, 0.5) is interior index (1, 1)
        assert_eq!(u0.get(1, 1), 0.5f64.powi(16));
        assert!((u0.get(1, 1) - 1.52588e-05).abs() < 1e-10);
    }

    #[test]
    fn sample_initial_zero_and_first_node() {
        let d = DomainSpec::unit_square(1.1, 1.5, 2.0, 4.0, 1.0).unwrap();
        let zero = ProblemSpec::new(d, |_, _, _, _| 0.0, |_, _| 0.0).unwrap();
        let g = Grid2D::new(&d, 8, 8).unwrap();
        assert_eq!(sample_initial(&zero, &g).unwrap().max_abs(), 0.0);

        let p = ProblemSpec::new(d, |_, _, _, _| 0.0, bump).unwrap();
        let u0 = sample_initial(&p, &g).unwrap();
        let x1 = 0.125f64;
        assert_eq!(u0.get(0, 0), (-0.0f64).exp() * bump(x1, x1));
    }

    #[test]
    fn sample_initial_rejects_mismatch_and_nan() {
        let d = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        let mut other = d;
        other.b = 2.0;
        let g = Grid2D::new(&other, 4, 4).unwrap();
        let p = ProblemSpec::new(d, |_, _, _, _| 0.0, bump).unwrap();
        assert!(matches!(
            sample_initial(&p, &g),
            Err(Error::GridMismatch { .. })
        ));

        let g = Grid2D::new(&d, 4, 4).unwrap();
        let bad = ProblemSpec::new(
            d,
            |_, _, _, _| 0.0,
            |x, _| if x > 0.6 { f64::NAN } else { 0.0 },
        )
        .unwrap();
        assert!(matches!(
            sample_initial(&bad, &g),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn transpose_roundtrip() {
        let f = Field2D::from_vec(3, 2, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let t = f.transposed();
        assert_eq!((t.nx(), t.ny()), (2, 3));
        assert_eq!(t.get(1, 2), f.get(2, 1));
        assert_eq!(t.transposed(), f);
    }

    #[test]
    fn lipschitz_must_be_positive() {
        let d = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        let p = ProblemSpec::new(d, |_, _, _, _| 0.0, |_, _| 0.0).unwrap();
        assert!(p.clone().with_lipschitz(-1.0).is_err());
        assert_eq!(p.with_lipschitz(2.0).unwrap().lipschitz, Some(2.0));
    }
}
