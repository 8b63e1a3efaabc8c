//! BDF2 compact ADI time stepping.
//!
//! Each step solves the factorized system
//!
//! ```text
//! (B_x - tau sigma delta_x)(B_y - tau sigma delta_y) u^n = H u^{n-1} + tau sigma B_x B_y g^n
//! ```
//!
//! in two sweeps: x-lines for the intermediate `u*`, then y-lines for `u^n`.
//! `sigma = 1` on the first step and `2/3` afterwards. Under homogeneous
//! Dirichlet data the intermediate boundary values are zero, so `u*` is
//! interior-only like every other field.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::frac_ops::{apply_compact_1d, apply_frac_1d, FracOperator1D};
use crate::grid::{Axis, DomainSpec, Field2D, Grid2D, PaddedField, ProblemSpec, TimeGrid};
use crate::linalg::{build_sweep_matrix, sweep_solve, SweepMatrix};

/// `sigma_1 = 1`, `sigma_n = 2/3` for `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaSchedule {
    First,
    Bdf2,
}

impl SigmaSchedule {
    pub fn for_step(n: usize) -> Self {
        debug_assert!(n >= 1);
        if n == 1 {
            Self::First
        } else {
            Self::Bdf2
        }
    }

    pub fn sigma(self) -> f64 {
        match self {
            Self::First => 1.0,
            Self::Bdf2 => 2.0 / 3.0,
        }
    }

    fn slot(self) -> usize {
        match self {
            Self::First => 0,
            Self::Bdf2 => 1,
        }
    }
}

pub fn sigma(n: usize) -> f64 {
    SigmaSchedule::for_step(n).sigma()
}

/// History needed to compute step `n`: `u^{n-1}` and, for `n >= 2`, `u^{n-2}`.
#[derive(Debug, Clone)]
pub struct StepperState {
    pub n: usize,
    pub u_prev: Field2D,
    pub u_prev2: Option<Field2D>,
}

impl StepperState {
    pub fn initial(u0: Field2D) -> Self {
        Self {
            n: 1,
            u_prev: u0,
            u_prev2: None,
        }
    }

    /// Shifts the history after `u^n` has been computed.
    pub fn advance(&mut self, u_new: Field2D) {
        let old = std::mem::replace(&mut self.u_prev, u_new);
        self.u_prev2 = Some(old);
        self.n += 1;
    }

    fn prev2(&self) -> Result<&Field2D> {
        self.u_prev2.as_ref().ok_or(Error::MissingHistory(self.n))
    }

    /// `u^0` at `n = 1`, `2 u^{n-1} - u^{n-2}` afterwards.
    pub fn extrapolant(&self) -> Result<Field2D> {
        if self.n == 1 {
            Ok(self.u_prev.clone())
        } else {
            Ok(self.u_prev.lincomb(2.0, self.prev2()?, -1.0))
        }
    }

    /// `u^0` at `n = 1`, `(4/3) u^{n-1} - (1/3) u^{n-2}` afterwards.
    pub fn bdf_history(&self) -> Result<Field2D> {
        if self.n == 1 {
            Ok(self.u_prev.clone())
        } else {
            Ok(self.u_prev.lincomb(4.0 / 3.0, self.prev2()?, -1.0 / 3.0))
        }
    }
}

/// Operators and cached sweep factorizations for one `(domain, grid, tau)`.
///
/// Sweep matrices are factored lazily, once per axis and per sigma value.
#[derive(Debug)]
pub struct AdiWorkspace {
    pub tau: f64,
    op_x: FracOperator1D,
    op_y: FracOperator1D,
    sweeps: [[OnceLock<SweepMatrix>; 2]; 2],
    factorizations: AtomicUsize,
}

impl AdiWorkspace {
    pub fn new(domain: &DomainSpec, grid: &Grid2D, tau: f64) -> Result<Self> {
        domain.validate()?;
        grid.check_domain(domain)?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau = {tau} must be positive"
            )));
        }
        Ok(Self {
            tau,
            op_x: FracOperator1D::build(domain.alpha, domain.kappa1, grid.hx, grid.nx())?,
            op_y: FracOperator1D::build(domain.beta, domain.kappa2, grid.hy, grid.ny())?,
            sweeps: Default::default(),
            factorizations: AtomicUsize::new(0),
        })
    }

    pub fn op(&self, axis: Axis) -> &FracOperator1D {
        match axis {
            Axis::X => &self.op_x,
            Axis::Y => &self.op_y,
        }
    }

    /// Sweep matrix `B - tau sigma delta` for `axis`, factoring it on first use.
    pub fn sweep(&self, axis: Axis, schedule: SigmaSchedule) -> Result<&SweepMatrix> {
        let a = match axis {
            Axis::X => 0,
            Axis::Y => 1,
        };
        let cell = &self.sweeps[a][schedule.slot()];
        if let Some(m) = cell.get() {
            return Ok(m);
        }
        let m = build_sweep_matrix(self.op(axis), self.tau * schedule.sigma())?;
        if cell.set(m).is_ok() {
            self.factorizations.fetch_add(1, Ordering::Relaxed);
        }
        Ok(cell.get().expect("initialized above"))
    }

    /// Number of sweep factorizations performed so far (at most 4).
    pub fn factorization_count(&self) -> usize {
        self.factorizations.load(Ordering::Relaxed)
    }

    pub fn compact_xy(&self, f: &Field2D) -> Result<Field2D> {
        let t = apply_compact_1d(&self.op_x, f, Axis::X)?;
        apply_compact_1d(&self.op_y, &t, Axis::Y)
    }

    pub fn frac_xy(&self, f: &Field2D) -> Result<Field2D> {
        let t = apply_frac_1d(&self.op_x, f, Axis::X)?;
        apply_frac_1d(&self.op_y, &t, Axis::Y)
    }

    /// `B_x B_y g` on the interior, reading `g` on the boundary ring where the
    /// stencil reaches it.
    pub fn compact_source(&self, g: &PaddedField) -> Result<Field2D> {
        let (nx, ny) = (self.op_x.n, self.op_y.n);
        if g.nx() != nx {
            return Err(Error::ShapeMismatch {
                axis: Axis::X,
                expected: nx,
                actual: g.nx(),
            });
        }
        if g.ny() != ny {
            return Err(Error::ShapeMismatch {
                axis: Axis::Y,
                expected: ny,
                actual: g.ny(),
            });
        }
        let (cx, dx) = (self.op_x.c2, 1.0 - 2.0 * self.op_x.c2);
        let (cy, dy) = (self.op_y.c2, 1.0 - 2.0 * self.op_y.c2);
        let mut tmp = vec![0.0; nx * (ny + 2)];
        for q in 0..ny + 2 {
            for i in 0..nx {
                tmp[q * nx + i] = cx * g.node(i, q) + dx * g.node(i + 1, q) + cx * g.node(i + 2, q);
            }
        }
        let mut out = Field2D::zeros(nx, ny);
        for j in 0..ny {
            for i in 0..nx {
                let v =
                    cy * tmp[j * nx + i] + dy * tmp[(j + 1) * nx + i] + cy * tmp[(j + 2) * nx + i];
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// `(B_x B_y + c delta_x delta_y) f`.
    pub fn h_operator(&self, f: &Field2D, c: f64) -> Result<Field2D> {
        let mut out = self.compact_xy(f)?;
        out.axpy(c, &self.frac_xy(f)?);
        Ok(out)
    }
}

/// BDF2 difference quotient `D_t^(2) u^n`. Test-only path; the stepper uses the factorized form.
pub fn bdf2_apply(
    u_n: &Field2D,
    u_nm1: &Field2D,
    u_nm2: Option<&Field2D>,
    tau: f64,
    n: usize,
) -> Result<Field2D> {
    u_n.check_same_shape(u_nm1)?;
    match (n, u_nm2) {
        (0, _) => Err(Error::InvalidParameter("BDF2 needs n >= 1".into())),
        (1, _) => Ok(u_n.lincomb(1.0 / tau, u_nm1, -1.0 / tau)),
        (_, None) => Err(Error::MissingHistory(n)),
        (_, Some(u2)) => {
            u_n.check_same_shape(u2)?;
            let data = u_n
                .as_slice()
                .iter()
                .zip(u_nm1.as_slice())
                .zip(u2.as_slice())
                .map(|((a, b), c)| (3.0 * a - 4.0 * b + c) / (2.0 * tau))
                .collect();
            Field2D::from_vec(u_n.nx(), u_n.ny(), data)
        }
    }
}

/// `g^n`: the source evaluated at `(x, y, t_n)` and the extrapolated solution.
///
/// Boundary nodes are evaluated too, with `u = 0` there; the compact operator
/// reads them at nodes next to the boundary.
pub fn linearized_source(
    problem: &ProblemSpec,
    grid: &Grid2D,
    t_n: f64,
    state: &StepperState,
) -> Result<PaddedField> {
    state.u_prev.check_shape(grid)?;
    let ext = state.extrapolant()?;
    let g = &problem.source;
    let (m1, m2) = (grid.m1, grid.m2);
    let out = PaddedField::sample_nodes(grid, |i, j, x, y| {
        let u = if i == 0 || j == 0 || i == m1 || j == m2 {
            0.0
        } else {
            ext.get(i - 1, j - 1)
        };
        g(x, y, t_n, u)
    });
    if let Some((i, j)) = out.first_non_finite() {
        return Err(Error::NonFinite {
            step: state.n,
            x: grid.x(i),
            y: grid.y(j),
        });
    }
    Ok(out)
}

/// `H u^{n-1}`.
pub fn rhs_h(state: &StepperState, ws: &AdiWorkspace) -> Result<Field2D> {
    let s = sigma(state.n);
    let c = ws.tau * ws.tau * s * s;
    ws.h_operator(&state.bdf_history()?, c)
}

/// One ADI step with a precomputed source field `g^n`.
pub fn adi_step_with_source(
    state: &StepperState,
    ws: &AdiWorkspace,
    g: &PaddedField,
) -> Result<Field2D> {
    let schedule = SigmaSchedule::for_step(state.n);
    let ts = ws.tau * schedule.sigma();
    let mut rhs = rhs_h(state, ws)?;
    rhs.axpy(ts, &ws.compact_source(g)?);
    let u_star = sweep_solve(ws.sweep(Axis::X, schedule)?, &rhs, Axis::X)?;
    sweep_solve(ws.sweep(Axis::Y, schedule)?, &u_star, Axis::Y)
}

/// One ADI step producing `u^n` for `n = state.n`.
pub fn adi_step(
    state: &StepperState,
    ws: &AdiWorkspace,
    problem: &ProblemSpec,
    grid: &Grid2D,
    time: &TimeGrid,
) -> Result<Field2D> {
    let g = linearized_source(problem, grid, time.t(state.n), state)?;
    adi_step_with_source(state, ws, &g)
}

pub(crate) fn check_finite(u: &Field2D, grid: &Grid2D, step: usize) -> Result<()> {
    match u.first_non_finite() {
        None => Ok(()),
        Some((i, j)) => Err(Error::NonFinite {
            step,
            x: grid.x(i + 1),
            y: grid.y(j + 1),
        }),
    }
}

/// Per-step callback `(n, t_n, u^n)`.
pub type Observer<'a> = &'a mut dyn FnMut(usize, f64, &Field2D);

/// Integrates `problem` over all steps of `time` and returns `u^N`.
pub fn run(
    problem: &ProblemSpec,
    grid: &Grid2D,
    time: &TimeGrid,
    ws: &AdiWorkspace,
    mut observer: Option<Observer<'_>>,
) -> Result<Field2D> {
    if (ws.tau - time.tau).abs() > f64::EPSILON * time.tau {
        return Err(Error::InvalidParameter(format!(
            "workspace tau {} does not match time grid tau {}",
            ws.tau, time.tau
        )));
    }
    let u0 = crate::grid::sample_initial(problem, grid)?;
    let mut state = StepperState::initial(u0);
    for n in 1..=time.steps {
        debug_assert_eq!(state.n, n);
        let u = adi_step(&state, ws, problem, grid, time)?;
        check_finite(&u, grid, n)?;
        if let Some(obs) = observer.as_mut() {
            obs(n, time.t(n), &u);
        }
        state.advance(u);
    }
    Ok(state.u_prev)
}

/// Step bound `tau_0 = (1 - nu) / (9 L)` below which the scheme is stable for a
/// source with Lipschitz constant `L`.
pub fn stability_bound(lipschitz: f64, nu: f64) -> Result<f64> {
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz constant {lipschitz} must be positive"
        )));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "nu = {nu} must lie in (0, 1)"
        )));
    }
    Ok((1.0 - nu) / (9.0 * lipschitz))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(m: usize, tau: f64) -> (DomainSpec, Grid2D, AdiWorkspace) {
        let d = DomainSpec::unit_square(1.3, 1.7, 2.0, 4.0, 1.0).unwrap();
        let g = Grid2D::new(&d, m, m).unwrap();
        let ws = AdiWorkspace::new(&d, &g, tau).unwrap();
        (d, g, ws)
    }

    fn const_field(v: f64) -> Field2D {
        Field2D::from_vec(2, 2, vec![v; 4]).unwrap()
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1), 1.0);
        assert_eq!(sigma(2), 2.0 / 3.0);
        assert_eq!(sigma(1000), 2.0 / 3.0);
    }

    #[test]
    fn bdf2_exact_on_linear_and_quadratic() {
        let tau = 0.1;
        for n in 2..6 {
            let t = |k: usize| k as f64 * tau;
            let d = bdf2_apply(
                &const_field(t(n)),
                &const_field(t(n - 1)),
                Some(&const_field(t(n - 2))),
                tau,
                n,
            )
            .unwrap();
            assert!(d.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        let sq = |k: f64| (k * tau) * (k * tau);
        let d = bdf2_apply(
            &const_field(sq(2.0)),
            &const_field(sq(1.0)),
            Some(&const_field(sq(0.0))),
            tau,
            2,
        )
        .unwrap();
        assert!((d.get(0, 0) - 4.0 * tau).abs() < 1e-14);
        assert!(matches!(
            bdf2_apply(&const_field(0.0), &const_field(0.0), None, tau, 2),
            Err(Error::MissingHistory(2))
        ));
        let first = bdf2_apply(&const_field(0.3), &const_field(0.1), None, 0.1, 1).unwrap();
        assert!((first.get(1, 1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extrapolant_collapses_on_equal_history() {
        let w = Field2D::from_vec(2, 2, vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let mut st = StepperState::initial(w.clone());
        st.advance(w.clone());
        assert_eq!(st.extrapolant().unwrap(), w);
        let hist = st.bdf_history().unwrap();
        for (a, b) in hist.as_slice().iter().zip(w.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn source_independent_of_u_and_first_step_uses_u0() {
        let (d, g, _) = setup(4, 0.1);
        let p = ProblemSpec::new(
            d,
            |x, y, t, u| x + 10.0 * y + 100.0 * t + 1000.0 * u,
            |_, _| 0.5,
        )
        .unwrap();
        let u0 = crate::grid::sample_initial(&p, &g).unwrap();
        let st = StepperState::initial(u0);
        let src = linearized_source(&p, &g, 0.1, &st).unwrap();
        assert!((src.node(1, 1) - (0.25 + 2.5 + 10.0 + 500.0)).abs() < 1e-12);
        // boundary nodes see u = 0
        assert!((src.node(0, 1) - (0.0 + 2.5 + 10.0)).abs() < 1e-12);

        let q = ProblemSpec::new(d, |x, _, t, _| x * t, |_, _| 0.0).unwrap();
        let mut st = StepperState::initial(Field2D::zeros(3, 3));
        st.advance(Field2D::from_vec(3, 3, vec![7.0; 9]).unwrap());
        let src = linearized_source(&q, &g, 0.5, &st).unwrap().interior();
        assert_eq!(src.get(2, 0), 0.75 * 0.5);

        let bad = ProblemSpec::new(d, |_, _, _, u| 1.0 / u, |_, _| 0.0).unwrap();
        let st = StepperState::initial(Field2D::zeros(3, 3));
        assert!(matches!(
            linearized_source(&bad, &g, 0.1, &st),
            Err(Error::NonFinite { step: 1, .. })
        ));
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let (d, g, ws) = setup(8, 0.05);
        let p = ProblemSpec::new(d, |_, _, _, _| 0.0, |_, _| 0.0).unwrap();
        let tg = TimeGrid::new(1.0, 20).unwrap();
        let mut seen = 0;
        let mut obs = |_n: usize, _t: f64, u: &Field2D| {
            assert_eq!(u.max_abs(), 0.0);
            seen += 1;
        };
        let u = run(&p, &g, &tg, &ws, Some(&mut obs)).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert_eq!(seen, 20);
        assert_eq!(ws.factorization_count(), 4);
    }

    #[test]
    fn single_step_run_equals_adi_step() {
        let (d, g, ws) = setup(8, 0.5);
        let p = ProblemSpec::new(d, |x, y, t, u| x * y * t - u * u, |x, y| (x * y).sin()).unwrap();
        let tg = TimeGrid::new(0.5, 1).unwrap();
        let u = run(&p, &g, &tg, &ws, None).unwrap();
        let st = StepperState::initial(crate::grid::sample_initial(&p, &g).unwrap());
        let v = adi_step(&st, &ws, &p, &g, &tg).unwrap();
        assert_eq!(u, v);
        assert_eq!(ws.factorization_count(), 2);
    }

    #[test]
    fn first_step_linear_in_source() {
        let (d, g, ws) = setup(8, 0.1);
        let st = StepperState::initial(Field2D::zeros(7, 7));
        let s1 = PaddedField::sample_nodes(&g, |_, _, x, y| x * (1.0 - y) + 0.5);
        let s2 = PaddedField::sample_nodes(&g, |_, _, x, y| 2.0 * (x * (1.0 - y) + 0.5));
        let u1 = adi_step_with_source(&st, &ws, &s1).unwrap();
        let u2 = adi_step_with_source(&st, &ws, &s2).unwrap();
        for (a, b) in u1.as_slice().iter().zip(u2.as_slice()) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        let _ = d;
    }

    #[test]
    fn run_aborts_on_blow_up() {
        let (d, g, _) = setup(4, 0.5);
        let p = ProblemSpec::new(d, |_, _, _, u| 1e200 * u * u, |_, _| 1.0).unwrap();
        let tg = TimeGrid::new(10.0, 20).unwrap();
        let ws = AdiWorkspace::new(&d, &g, tg.tau).unwrap();
        assert!(matches!(
            run(&p, &g, &tg, &ws, None),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn compact_source_matches_nine_point_stencil() {
        let (_, g, ws) = setup(6, 0.1);
        let p = PaddedField::sample_nodes(&g, |i, j, x, y| (3.0 * x + y).sin() + (i * j) as f64);
        let out = ws.compact_source(&p).unwrap();
        let (cx, cy) = (1.3 / 24.0, 1.7 / 24.0);
        let wx = [cx, 1.0 - 2.0 * cx, cx];
        let wy = [cy, 1.0 - 2.0 * cy, cy];
        for j in 0..5 {
            for i in 0..5 {
                let mut want = 0.0;
                for (b, wyb) in wy.iter().enumerate() {
                    for (a, wxa) in wx.iter().enumerate() {
                        want += wxa * wyb * p.node(i + a, j + b);
                    }
                }
                assert!((out.get(i, j) - want).abs() < 1e-14 * want.abs().max(1.0));
            }
        }
        // zero ring reduces to the interior compact operator
        let f = p.interior();
        let zero_ring = ws.compact_source(&PaddedField::from_interior(&f)).unwrap();
        let direct = ws.compact_xy(&f).unwrap();
        for (a, b) in zero_ring.as_slice().iter().zip(direct.as_slice()) {
            assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn stability_bound_values() {
        assert!((stability_bound(1.0, 0.1).unwrap() - 0.1).abs() < 1e-15);
        assert!((stability_bound(10.0, 0.55).unwrap() - 0.005).abs() < 1e-15);
        assert!(stability_bound(1.0, 1.0 - 1e-12).unwrap() < 1e-12);
        assert!(stability_bound(0.0, 0.5).is_err());
        assert!(stability_bound(1.0, 1.0).is_err());
    }
}
