//! Concrete problems: a manufactured benchmark with known solution and the
//! fractional FitzHugh-Nagumo excitable-media model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DomainSpec, Field2D, Grid2D, PaddedField, ProblemSpec, TimeGrid};
use crate::stepper::{adi_step_with_source, check_finite, AdiWorkspace, StepperState};

/// Binomial weights of `x^4 (1 - x)^4 = sum_k w_k x^{k}`, `k = 4..=8`.
const BUMP_WEIGHTS: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];

/// `c_gamma = -1 / (2 cos(pi gamma / 2))`.
pub fn riesz_weight(gamma: f64) -> f64 {
    -1.0 / (2.0 * (std::f64::consts::PI * gamma / 2.0).cos())
}

/// `x^4 (1 - x)^4`.
#[inline]
pub fn bump(x: f64) -> f64 {
    let p = x * (1.0 - x);
    let p2 = p * p;
    p2 * p2
}

/// Riesz derivative of `x^4 (1 - x)^4` (zero-extended outside `[0, 1]`).
#[derive(Debug, Clone, Copy)]
pub struct BumpDerivative {
    pub gamma: f64,
    /// `c_gamma * w_k * Gamma(k + 1) / Gamma(k + 1 - gamma)` for `k = 4..=8`.
    coeffs: [f64; 5],
}

impl BumpDerivative {
    pub fn new(gamma: f64) -> Self {
        let c = riesz_weight(gamma);
        let mut coeffs = [0.0; 5];
        for (idx, w) in BUMP_WEIGHTS.iter().enumerate() {
            let k = (idx + 4) as f64;
            coeffs[idx] = c * w * libm::tgamma(k + 1.0) / libm::tgamma(k + 1.0 - gamma);
        }
        Self { gamma, coeffs }
    }

    fn one_side(&self, s: f64) -> f64 {
        // s^{k - gamma} = s^{4 - gamma} * s^{k - 4}
        let base = s.powf(4.0 - self.gamma);
        let mut acc = 0.0;
        let mut p = base;
        for c in &self.coeffs {
            acc += c * p;
            p *= s;
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.one_side(x) + self.one_side(1.0 - x)
    }
}

/// `x^k (1 - x)^k` on `[0, 1]` (zero outside) together with its Riesz derivative
/// of order `gamma`.
///
/// The zero extension is `C^{k-1}`, so `k >= 7` meets the smoothness the
/// fourth-order compact estimate needs for every order up to 2; `k = 4` does
/// not, and its fitted order drops towards `4 - gamma` in the max norm.
#[derive(Debug, Clone)]
pub struct PowerBump {
    pub gamma: f64,
    pub k: u32,
    coeffs: Vec<f64>,
}

impl PowerBump {
    pub fn new(gamma: f64, k: u32) -> Result<Self> {
        if !(1..=12).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "bump power {k} outside 1..=12"
            )));
        }
        let c = riesz_weight(gamma);
        let mut binom = 1.0;
        let coeffs = (0..=k)
            .map(|j| {
                let p = f64::from(k + j);
                let w = if j % 2 == 0 { binom } else { -binom };
                binom = binom * f64::from(k - j) / f64::from(j + 1);
                c * w * libm::tgamma(p + 1.0) / libm::tgamma(p + 1.0 - gamma)
            })
            .collect();
        Ok(Self { gamma, k, coeffs })
    }

    pub fn value(&self, x: f64) -> f64 {
        (x * (1.0 - x)).powi(self.k as i32)
    }

    fn one_side(&self, s: f64) -> f64 {
        let mut p = s.powf(f64::from(self.k) - self.gamma);
        let mut acc = 0.0;
        for c in &self.coeffs {
            acc += c * p;
            p *= s;
        }
        acc
    }

    pub fn riesz(&self, x: f64) -> f64 {
        self.one_side(x) + self.one_side(1.0 - x)
    }
}

/// Manufactured benchmark on the unit square with exact solution
/// `u = e^{-t} x^4 (1-x)^4 y^4 (1-y)^4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedProblem {
    pub alpha: f64,
    pub beta: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub t_final: f64,
}

impl ManufacturedProblem {
    pub fn new(alpha: f64, beta: f64, kappa1: f64, kappa2: f64) -> Self {
        Self {
            alpha,
            beta,
            kappa1,
            kappa2,
            t_final: 1.0,
        }
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::unit_square(
            self.alpha,
            self.beta,
            self.kappa1,
            self.kappa2,
            self.t_final,
        )
    }

    pub fn exact(x: f64, y: f64, t: f64) -> f64 {
        (-t).exp() * bump(x) * bump(y)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let domain = self.domain()?;
        let src = ManufacturedSource::new(self);
        ProblemSpec::new(
            domain,
            move |x, y, t, u| src.eval(x, y, t, u),
            |x, y| Self::exact(x, y, 0.0),
        )
    }
}

/// Source term that makes [`ManufacturedProblem::exact`] solve the equation.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSource {
    kappa1: f64,
    kappa2: f64,
    dx: BumpDerivative,
    dy: BumpDerivative,
}

impl ManufacturedSource {
    pub fn new(p: &ManufacturedProblem) -> Self {
        Self {
            kappa1: p.kappa1,
            kappa2: p.kappa2,
            dx: BumpDerivative::new(p.alpha),
            dy: BumpDerivative::new(p.beta),
        }
    }

    pub fn eval(&self, x: f64, y: f64, t: f64, u: f64) -> f64 {
        let e = (-t).exp();
        let (bx, by) = (bump(x), bump(y));
        u * u
            - e * by * (bx + self.kappa1 * self.dx.eval(x))
            - e * bx * (e * bx * by * by + self.kappa2 * self.dy.eval(y))
    }
}

/// `g(x, y, t, u)` of the manufactured benchmark, evaluated from scratch.
#[allow(clippy::too_many_arguments)]
pub fn manufactured_source(
    x: f64,
    y: f64,
    t: f64,
    u: f64,
    alpha: f64,
    beta: f64,
    kappa1: f64,
    kappa2: f64,
) -> f64 {
    ManufacturedSource::new(&ManufacturedProblem::new(alpha, beta, kappa1, kappa2)).eval(x, y, t, u)
}

/// FitzHugh-Nagumo kinetics parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FhnParams {
    pub mu: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl Default for FhnParams {
    fn default() -> Self {
        Self {
            mu: 0.1,
            gamma: 1.0,
            epsilon: 0.01,
            lambda: 0.5,
            delta: 0.0,
        }
    }
}

/// Cubic excitation `u (1 - u)(u - mu) - w`.
#[inline]
pub fn fhn_reaction(u: f64, w: f64, mu: f64) -> f64 {
    u * (1.0 - u) * (u - mu) - w
}

/// Pointwise implicit update of `dw/dt = eps (lambda u - gamma w - delta)`.
///
/// Step 1 is backward Euler; later steps are BDF2. `u_extrap` is the same
/// extrapolant used for the potential's source.
pub fn fhn_recovery_step(
    params: &FhnParams,
    u_extrap: &Field2D,
    w_prev: &Field2D,
    w_prev2: Option<&Field2D>,
    tau: f64,
    n: usize,
) -> Result<Field2D> {
    u_extrap.check_same_shape(w_prev)?;
    let FhnParams {
        gamma,
        epsilon,
        lambda,
        delta,
        ..
    } = *params;
    let data: Vec<f64> = match (n, w_prev2) {
        (0, _) => return Err(Error::InvalidParameter("recovery step needs n >= 1".into())),
        (1, _) => u_extrap
            .as_slice()
            .iter()
            .zip(w_prev.as_slice())
            .map(|(u, w)| {
                (w + tau * epsilon * (lambda * u - delta)) / (1.0 + tau * epsilon * gamma)
            })
            .collect(),
        (_, None) => return Err(Error::MissingHistory(n)),
        (_, Some(w2)) => {
            u_extrap.check_same_shape(w2)?;
            u_extrap
                .as_slice()
                .iter()
                .zip(w_prev.as_slice())
                .zip(w2.as_slice())
                .map(|((u, w1), w2)| {
                    (4.0 * w1 - w2 + 2.0 * tau * epsilon * (lambda * u - delta))
                        / (3.0 + 2.0 * tau * epsilon * gamma)
                })
                .collect()
        }
    };
    Field2D::from_vec(u_extrap.nx(), u_extrap.ny(), data)
}

/// Side length of the FitzHugh-Nagumo square.
pub const FHN_SIDE: f64 = 2.5;

/// Excited lower-left quarter for `u`, recovery block on the upper half for `w`.
pub fn fhn_initial(grid: &Grid2D) -> Result<(Field2D, Field2D)> {
    if !(grid.a == 0.0 && grid.b == FHN_SIDE && grid.c == 0.0 && grid.d == FHN_SIDE) {
        return Err(Error::GridMismatch {
            m1: grid.m1,
            m2: grid.m2,
            what: "FitzHugh-Nagumo domain (0, 2.5) x (0, 2.5)".into(),
        });
    }
    let half = FHN_SIDE / 2.0;
    let u = Field2D::sample(grid, |x, y| {
        if x > 0.0 && x <= half && y > 0.0 && y < half {
            1.0
        } else {
            0.0
        }
    })?;
    let w = Field2D::sample(
        grid,
        |_, y| if y >= half && y < FHN_SIDE { 0.1 } else { 0.0 },
    )?;
    Ok((u, w))
}

/// Coupled potential/recovery state.
#[derive(Debug, Clone)]
pub struct FhnState {
    pub u: StepperState,
    pub w: StepperState,
    pub params: FhnParams,
}

/// Explicitly coupled FitzHugh-Nagumo integrator built on the ADI stepper.
#[derive(Debug)]
pub struct FhnSimulation {
    pub domain: DomainSpec,
    pub grid: Grid2D,
    pub time: TimeGrid,
    pub state: FhnState,
    ws: AdiWorkspace,
}

impl FhnSimulation {
    /// Square `(0, 2.5)^2` with `m x m` cells, `steps` steps up to `t_final`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: f64,
        beta: f64,
        kappa1: f64,
        kappa2: f64,
        m: usize,
        steps: usize,
        t_final: f64,
        params: FhnParams,
        initial: Option<(Field2D, Field2D)>,
    ) -> Result<Self> {
        let domain = DomainSpec {
            a: 0.0,
            b: FHN_SIDE,
            c: 0.0,
            d: FHN_SIDE,
            alpha,
            beta,
            kappa1,
            kappa2,
            t_final,
        }
        .validated()?;
        let grid = Grid2D::new(&domain, m, m)?;
        let time = TimeGrid::new(t_final, steps)?;
        let (u0, w0) = match initial {
            Some((u, w)) => {
                u.check_shape(&grid)?;
                w.check_shape(&grid)?;
                (u, w)
            }
            None => fhn_initial(&grid)?,
        };
        let ws = AdiWorkspace::new(&domain, &grid, time.tau)?;
        Ok(Self {
            domain,
            grid,
            time,
            state: FhnState {
                u: StepperState::initial(u0),
                w: StepperState::initial(w0),
                params,
            },
            ws,
        })
    }

    /// Index of the next step to compute.
    pub fn next_step(&self) -> usize {
        self.state.u.n
    }

    /// Latest `(u, w)`.
    pub fn fields(&self) -> (&Field2D, &Field2D) {
        (&self.state.u.u_prev, &self.state.w.u_prev)
    }

    /// Advances one step.
    pub fn step(&mut self) -> Result<()> {
        let n = self.state.u.n;
        let tau = self.time.tau;
        let mu = self.state.params.mu;
        let u_ext = self.state.u.extrapolant()?;
        let w_ext = self.state.w.extrapolant()?;
        let data = u_ext
            .as_slice()
            .iter()
            .zip(w_ext.as_slice())
            .map(|(u, w)| fhn_reaction(*u, *w, mu))
            .collect();
        // u = w = 0 on the boundary ring, where the reaction vanishes
        let g = PaddedField::from(Field2D::from_vec(u_ext.nx(), u_ext.ny(), data)?);
        let u_new = adi_step_with_source(&self.state.u, &self.ws, &g)?;
        check_finite(&u_new, &self.grid, n)?;
        let w_new = fhn_recovery_step(
            &self.state.params,
            &u_ext,
            &self.state.w.u_prev,
            self.state.w.u_prev2.as_ref(),
            tau,
            n,
        )?;
        check_finite(&w_new, &self.grid, n)?;
        self.state.u.advance(u_new);
        self.state.w.advance(w_new);
        Ok(())
    }

    /// Runs to the final time; `observer(n, t_n, u^n, w^n)` after every step.
    pub fn run(&mut self, mut observer: impl FnMut(usize, f64, &Field2D, &Field2D)) -> Result<()> {
        while self.next_step() <= self.time.steps {
            let n = self.next_step();
            self.step()?;
            let (u, w) = self.fields();
            observer(n, self.time.t(n), u, w);
        }
        Ok(())
    }

    pub fn factorization_count(&self) -> usize {
        self.ws.factorization_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_vanishes_on_boundary() {
        for t in [0.0, 0.3, 1.0] {
            for s in [0.0, 0.25, 0.7, 1.0] {
                assert_eq!(ManufacturedProblem::exact(0.0, s, t), 0.0);
                assert_eq!(ManufacturedProblem::exact(1.0, s, t), 0.0);
                assert_eq!(ManufacturedProblem::exact(s, 0.0, t), 0.0);
                assert_eq!(ManufacturedProblem::exact(s, 1.0, t), 0.0);
            }
        }
    }

    #[test]
    fn source_finite_at_edge() {
        let v = manufactured_source(0.0, 0.3, 0.5, 0.0, 1.3, 1.7, 2.0, 4.0);
        assert!(v.is_finite());
        let p4 = PowerBump::new(1.7, 4).unwrap();
        let d4 = BumpDerivative::new(1.7);
        for x in [0.0, 0.1, 0.37, 0.5, 0.9, 1.0] {
            assert!((p4.riesz(x) - d4.eval(x)).abs() <= 1e-12 * d4.eval(x).abs().max(1.0));
            assert_eq!(p4.value(x), bump(x));
        }
        assert!(PowerBump::new(1.5, 0).is_err());
        let d = BumpDerivative::new(1.5);
        // only the (1 - x) powers survive at x = 0
        let want: f64 = d.coeffs.iter().sum();
        assert!((d.eval(0.0) - want).abs() < 1e-14 * want.abs());
    }

    #[test]
    fn source_u_dependence_is_square() {
        for &(x, y, t, u) in &[
            (0.2, 0.7, 0.1, 0.3),
            (0.5, 0.5, 1.0, -2.0),
            (0.9, 0.05, 0.4, 1e-3),
        ] {
            let diff = manufactured_source(x, y, t, u, 1.1, 1.5, 2.0, 4.0)
                - manufactured_source(x, y, t, 0.0, 1.1, 1.5, 2.0, 4.0);
            assert!((diff - u * u).abs() < 1e-12 * (1.0 + u * u));
        }
    }

    #[test]
    fn riesz_weight_is_positive_in_range() {
        for g in [1.1, 1.5, 1.9] {
            assert!(riesz_weight(g) > 0.0);
        }
        assert!((riesz_weight(2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reaction_values() {
        assert_eq!(fhn_reaction(0.0, 0.0, 0.1), 0.0);
        assert_eq!(fhn_reaction(1.0, 0.0, 0.1), 0.0);
        assert_eq!(fhn_reaction(0.1, 0.0, 0.1), 0.0);
        assert!((fhn_reaction(0.5, 0.0, 0.1) - 0.1).abs() < 1e-15);
        assert_eq!(fhn_reaction(0.0, 0.2, 0.1), -0.2);
    }

    #[test]
    fn recovery_first_step() {
        let p = FhnParams::default();
        let u = Field2D::from_vec(1, 1, vec![1.0]).unwrap();
        let w0 = Field2D::zeros(1, 1);
        let w1 = fhn_recovery_step(&p, &u, &w0, None, 0.5, 1).unwrap();
        assert!((w1.get(0, 0) - 0.0025 / 1.005).abs() < 1e-15);
        assert!((w1.get(0, 0) - 0.0024876).abs() < 1e-7);
        assert!(matches!(
            fhn_recovery_step(&p, &u, &w0, None, 0.5, 2),
            Err(Error::MissingHistory(2))
        ));
    }

    #[test]
    fn recovery_zero_stays_zero() {
        let p = FhnParams::default();
        let z = Field2D::zeros(3, 3);
        let w1 = fhn_recovery_step(&p, &z, &z, None, 0.5, 1).unwrap();
        let w2 = fhn_recovery_step(&p, &z, &w1, Some(&z), 0.5, 2).unwrap();
        assert_eq!(w2.max_abs(), 0.0);
    }

    #[test]
    fn initial_membership() {
        let d = DomainSpec {
            a: 0.0,
            b: 2.5,
            c: 0.0,
            d: 2.5,
            alpha: 1.7,
            beta: 1.7,
            kappa1: 1e-4,
            kappa2: 1e-4,
            t_final: 1.0,
        };
        let g = Grid2D::new(&d, 4, 4).unwrap();
        let (u, w) = fhn_initial(&g).unwrap();
        // nodes 0.625, 1.25, 1.875
        assert_eq!(u.get(0, 0), 1.0);
        assert_eq!(w.get(0, 0), 0.0);
        assert_eq!(u.get(2, 2), 0.0);
        assert_eq!(w.get(2, 2), 0.1);
        // x = 1.25 is inside (0, 1.25]; y = 1.25 is outside (0, 1.25) but inside [1.25, 2.5)
        assert_eq!(u.get(1, 0), 1.0);
        assert_eq!(u.get(0, 1), 0.0);
        assert_eq!(w.get(0, 1), 0.1);

        let unit = DomainSpec::unit_square(1.5, 1.5, 1.0, 1.0, 1.0).unwrap();
        assert!(fhn_initial(&Grid2D::new(&unit, 4, 4).unwrap()).is_err());
    }

    #[test]
    fn fhn_zero_data_stays_zero() {
        let z = Field2D::zeros(9, 9);
        let mut sim = FhnSimulation::new(
            1.7,
            1.7,
            1e-4,
            1e-4,
            10,
            5,
            2.5,
            FhnParams::default(),
            Some((z.clone(), z)),
        )
        .unwrap();
        sim.run(|_, _, u, w| {
            assert_eq!(u.max_abs(), 0.0);
            assert_eq!(w.max_abs(), 0.0);
        })
        .unwrap();
        assert_eq!(sim.next_step(), 6);
    }
}
