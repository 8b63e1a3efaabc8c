//! Error norms, observed orders, and the oracles that certify the solver:
//! a dense Kronecker assembly of the unsplit step, randomized quadratic-form
//! checks of the discrete operators, and truncation-order probes.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac_ops::{apply_compact_1d, apply_frac_1d, compact_accuracy_probe, FracOperator1D};
use crate::grid::{Axis, DomainSpec, Field2D, Grid2D, PaddedField, TimeGrid};
use crate::problems::{ManufacturedProblem, PowerBump};
use crate::stepper::{adi_step_with_source, run, AdiWorkspace, SigmaSchedule, StepperState};

/// Default seed for randomized ensembles.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Largest flattened system the dense oracle will assemble.
pub const ORACLE_MAX_UNKNOWNS: usize = 4096;

/// Discrete L2 and max-norm errors over the interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPair {
    pub l2: f64,
    pub max: f64,
}

/// `l2 = sqrt(hx hy sum |u - u_h|^2)`, `max = max |u - u_h|`, both over interior nodes.
pub fn error_norms(
    numeric: &Field2D,
    exact: impl Fn(f64, f64, f64) -> f64,
    grid: &Grid2D,
    t: f64,
) -> Result<ErrorPair> {
    numeric.check_shape(grid)?;
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for j in 0..grid.ny() {
        let y = grid.y(j + 1);
        for i in 0..grid.nx() {
            let e = (exact(grid.x(i + 1), y, t) - numeric.get(i, j)).abs();
            sum += e * e;
            max = max.max(e);
        }
    }
    Ok(ErrorPair {
        l2: (grid.hx * grid.hy * sum).sqrt(),
        max,
    })
}

/// `log2(coarse / fine)`.
pub fn observed_order(err_coarse: f64, err_fine: f64) -> Result<f64> {
    if !(err_coarse > 0.0 && err_fine > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "observed order needs positive errors (got {err_coarse}, {err_fine})"
        )));
    }
    Ok((err_coarse / err_fine).log2())
}

/// Which refinement a ladder performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LadderMode {
    /// `h -> h/2` with `tau -> tau/4`.
    Spatial,
    /// Fixed `h`, `tau -> tau/2`.
    Temporal,
    /// `h -> h/2` with `tau -> tau/2`.
    Joint,
}

/// One rung: `m` cells per axis and `steps` time steps to `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Level {
    pub m: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
    pub steps: usize,
    pub h: f64,
    pub tau: f64,
    pub error: ErrorPair,
    pub rate_max: Option<f64>,
    pub rate_l2: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub mode: LadderMode,
    pub rows: Vec<ConvergenceRow>,
}

/// Checks that consecutive levels refine the way `mode` requires.
pub fn validate_ladder(levels: &[Level], mode: LadderMode) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::DegenerateLadder(format!(
            "need at least 2 levels, got {}",
            levels.len()
        )));
    }
    for w in levels.windows(2) {
        let (c, f) = (w[0], w[1]);
        let ok = match mode {
            LadderMode::Spatial => f.m == 2 * c.m && f.steps == 4 * c.steps,
            LadderMode::Temporal => f.m == c.m && f.steps == 2 * c.steps,
            LadderMode::Joint => f.m == 2 * c.m && f.steps == 2 * c.steps,
        };
        if !ok || c.m < 2 || c.steps == 0 {
            return Err(Error::DegenerateLadder(format!(
                "{mode:?} ladder cannot go from (M={}, N={}) to (M={}, N={})",
                c.m, c.steps, f.m, f.steps
            )));
        }
    }
    Ok(())
}

/// Solves the manufactured benchmark on `m x m` cells with `steps` steps and
/// returns the error at the final time.
pub fn manufactured_error(problem: &ManufacturedProblem, level: Level) -> Result<ErrorPair> {
    let spec = problem.problem()?;
    let grid = Grid2D::new(&spec.domain, level.m, level.m)?;
    let time = TimeGrid::new(problem.t_final, level.steps)?;
    let ws = AdiWorkspace::new(&spec.domain, &grid, time.tau)?;
    let u = run(&spec, &grid, &time, &ws, None)?;
    error_norms(&u, ManufacturedProblem::exact, &grid, time.t_final)
}

/// Runs every level and fills in observed orders from the second row on.
pub fn convergence_study(
    problem: &ManufacturedProblem,
    levels: &[Level],
    mode: LadderMode,
) -> Result<ConvergenceReport> {
    validate_ladder(levels, mode)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &level in levels {
        let start = std::time::Instant::now();
        let error = manufactured_error(problem, level)?;
        let (rate_max, rate_l2) = match rows.last() {
            Some(prev) => (
                Some(observed_order(prev.error.max, error.max)?),
                Some(observed_order(prev.error.l2, error.l2)?),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            alpha: problem.alpha,
            beta: problem.beta,
            m: level.m,
            steps: level.steps,
            h: 1.0 / level.m as f64,
            tau: problem.t_final / level.steps as f64,
            error,
            rate_max,
            rate_l2,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(ConvergenceReport { mode, rows })
}

/// Dense matrices of the unsplit step over the flattened interior
/// (index `j * nx + i`).
#[derive(Debug, Clone)]
pub struct FullSystem {
    /// `(B_x - tau sigma delta_x)(B_y - tau sigma delta_y)`.
    pub lhs: DMatrix<f64>,
    /// `B_x B_y + tau^2 sigma^2 delta_x delta_y`.
    pub history: DMatrix<f64>,
    /// `B_x B_y`.
    pub compact: DMatrix<f64>,
    pub tau_sigma: f64,
}

fn dense_frac(op: &FracOperator1D) -> DMatrix<f64> {
    DMatrix::from_row_slice(op.n, op.n, op.dense())
}

fn dense_compact(op: &FracOperator1D) -> DMatrix<f64> {
    DMatrix::from_row_slice(op.n, op.n, &op.compact_dense())
}

/// Kronecker assembly of the two-dimensional operators from the 1D factors.
pub fn assemble_full_system(ws: &AdiWorkspace, schedule: SigmaSchedule) -> Result<FullSystem> {
    let (ox, oy) = (ws.op(Axis::X), ws.op(Axis::Y));
    let unknowns = ox.n * oy.n;
    if unknowns > ORACLE_MAX_UNKNOWNS {
        return Err(Error::ScaleGuard {
            unknowns,
            limit: ORACLE_MAX_UNKNOWNS,
        });
    }
    let ts = ws.tau * schedule.sigma();
    let (bx, by) = (dense_compact(ox), dense_compact(oy));
    let (dx, dy) = (dense_frac(ox), dense_frac(oy));
    let sx = &bx - &dx * ts;
    let sy = &by - &dy * ts;
    // y acts on the outer (slow) index, x on the inner one.
    let lhs = sy.kronecker(&sx);
    let compact = by.kronecker(&bx);
    let history = &compact + dy.kronecker(&dx) * (ts * ts);
    Ok(FullSystem {
        lhs,
        history,
        compact,
        tau_sigma: ts,
    })
}

fn random_field(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> Field2D {
    let data = (0..nx * ny).map(|_| StandardNormal.sample(rng)).collect();
    Field2D::from_vec(nx, ny, data).expect("sized")
}

/// Outcome of one ADI-versus-dense comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub max_diff: f64,
    /// Relative residual of the ADI result in the unsplit system.
    pub residual: f64,
}

/// One ADI step on an `n x n` interior of the unit square versus the dense
/// solve of the unsplit system, with random history and source.
pub fn oracle_step_check(
    alpha: f64,
    beta: f64,
    schedule: SigmaSchedule,
    n: usize,
    tau: f64,
    seed: u64,
) -> Result<OracleCheck> {
    let domain = DomainSpec::unit_square(alpha, beta, 1.0, 1.0, 1.0)?;
    let grid = Grid2D::new(&domain, n + 1, n + 1)?;
    let ws = AdiWorkspace::new(&domain, &grid, tau)?;
    let full = assemble_full_system(&ws, schedule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u_a = random_field(&mut rng, n, n);
    let u_b = random_field(&mut rng, n, n);
    let g = random_field(&mut rng, n, n);
    let mut state = StepperState::initial(u_a);
    if schedule == SigmaSchedule::Bdf2 {
        state.advance(u_b);
    }
    let adi = adi_step_with_source(&state, &ws, &PaddedField::from_interior(&g))?;

    let hist = DVector::from_column_slice(state.bdf_history()?.as_slice());
    let gv = DVector::from_column_slice(g.as_slice());
    let rhs = &full.history * hist + (&full.compact * gv) * full.tau_sigma;
    let direct = full
        .lhs
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter("singular Kronecker system".into()))?;
    let adi_v = DVector::from_column_slice(adi.as_slice());
    let max_diff = (&adi_v - &direct).amax();
    let residual = (&full.lhs * &adi_v - &rhs).amax() / rhs.amax();
    Ok(OracleCheck {
        alpha,
        beta,
        sigma: schedule.sigma(),
        max_diff,
        residual,
    })
}

/// Worst normalized margin of one quadratic-form inequality over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyItem {
    pub name: &'static str,
    pub worst_margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub samples: usize,
    pub tolerance: f64,
    pub items: Vec<PropertyItem>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

/// Tolerance on normalized quadratic-form margins.
pub const PROPERTY_TOLERANCE: f64 = 1e-12;

/// Evaluates the operator inequalities on `samples` standard-normal fields:
///
/// * `||u||^2 / 3 <= (B_x B_y u, u) <= ||u||^2`
/// * `(delta_x u, u) <= 0`, `(delta_y u, u) <= 0`
/// * `(delta_x delta_y u, u) >= 0`
/// * `(B_y delta_x u, u) <= 0`, `(B_x delta_y u, u) <= 0`
///
/// Each margin is divided by `||u||^2` times the operator's diagonal magnitude.
pub fn operator_property_suite(
    domain: &DomainSpec,
    grid: &Grid2D,
    samples: usize,
    seed: u64,
) -> Result<PropertyReport> {
    grid.check_domain(domain)?;
    if grid.nx() > 63 || grid.ny() > 63 {
        return Err(Error::ScaleGuard {
            unknowns: grid.nx() * grid.ny(),
            limit: 63 * 63,
        });
    }
    let ox = FracOperator1D::build(domain.alpha, domain.kappa1, grid.hx, grid.nx())?;
    let oy = FracOperator1D::build(domain.beta, domain.kappa2, grid.hy, grid.ny())?;
    let (sx, sy) = (ox.toeplitz_col[0].abs(), oy.toeplitz_col[0].abs());
    let w = grid.hx * grid.hy;
    let inner = |a: &Field2D, b: &Field2D| w * a.dot(b);

    const NAMES: [&str; 7] = [
        "norm-equivalence lower: ||u||^2/3 <= (BxBy u,u)",
        "norm-equivalence upper: (BxBy u,u) <= ||u||^2",
        "semidefinite x: (dx u,u) <= 0",
        "semidefinite y: (dy u,u) <= 0",
        "cross form: (dx dy u,u) >= 0",
        "mixed x: (By dx u,u) <= 0",
        "mixed y: (Bx dy u,u) <= 0",
    ];
    let mut worst = [f64::INFINITY; 7];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let u = random_field(&mut rng, grid.nx(), grid.ny());
        let nn = inner(&u, &u);
        if nn == 0.0 {
            continue;
        }
        let bx = apply_compact_1d(&ox, &u, Axis::X)?;
        let bb = apply_compact_1d(&oy, &bx, Axis::Y)?;
        let dx = apply_frac_1d(&ox, &u, Axis::X)?;
        let dy = apply_frac_1d(&oy, &u, Axis::Y)?;
        let dxdy = apply_frac_1d(&oy, &dx, Axis::Y)?;
        let bydx = apply_compact_1d(&oy, &dx, Axis::Y)?;
        let bxdy = apply_compact_1d(&ox, &dy, Axis::X)?;
        let qb = inner(&bb, &u);
        let margins = [
            (qb - nn / 3.0) / nn,
            (nn - qb) / nn,
            -inner(&dx, &u) / (nn * sx),
            -inner(&dy, &u) / (nn * sy),
            inner(&dxdy, &u) / (nn * sx * sy),
            -inner(&bydx, &u) / (nn * sx),
            -inner(&bxdy, &u) / (nn * sy),
        ];
        for (w, m) in worst.iter_mut().zip(margins) {
            *w = w.min(m);
        }
    }
    let items = NAMES
        .iter()
        .zip(worst)
        .map(|(&name, m)| {
            let m = if m.is_finite() { m } else { 0.0 };
            PropertyItem {
                name,
                worst_margin: m,
                passed: m >= -PROPERTY_TOLERANCE,
            }
        })
        .collect();
    Ok(PropertyReport {
        samples,
        tolerance: PROPERTY_TOLERANCE,
        items,
    })
}

/// Truncation error being measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeKind {
    Bdf2FirstStep,
    Bdf2Interior,
    CompactSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub kind: ProbeKind,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `log(err)` against `log(step)`.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> Result<f64> {
    if steps.len() != errors.len() || steps.len() < 2 {
        return Err(Error::DegenerateLadder(format!(
            "order fit needs >= 2 matched points (got {} steps, {} errors)",
            steps.len(),
            errors.len()
        )));
    }
    if steps.iter().chain(errors).any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::DegenerateLadder("non-positive step or error".into()));
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateLadder("all steps equal".into()));
    }
    Ok(sxy / sxx)
}

/// Vanishing power of the default compact-probe function `x^k (1-x)^k`.
pub const SMOOTH_BUMP_POWER: u32 = 7;

/// Max-norm compact truncation errors for `x^k (1-x)^k` on `cells` ladders.
pub fn compact_space_probe(gamma: f64, k: u32, cells: &[usize]) -> Result<ProbeResult> {
    let f = PowerBump::new(gamma, k)?;
    let (steps, errors): (Vec<f64>, Vec<f64>) =
        compact_accuracy_probe(gamma, |x| f.value(x), |x| f.riesz(x), cells)?
            .into_iter()
            .map(|l| (l.h, l.error))
            .unzip();
    let slope = fitted_order(&steps, &errors)?;
    Ok(ProbeResult {
        kind: ProbeKind::CompactSpace,
        steps,
        errors,
        slope,
    })
}

/// Fits the truncation order of the BDF2 quotient (first step or interior) on
/// `u(t) = e^{-t}`, or of the compact spatial operator of order `gamma` on
/// `x^7 (1-x)^7`, over a four-level halving ladder.
pub fn truncation_order_probe(kind: ProbeKind, gamma: f64) -> Result<ProbeResult> {
    let u = |t: f64| (-t).exp();
    let du = |t: f64| -(-t).exp();
    let (steps, errors): (Vec<f64>, Vec<f64>) = match kind {
        ProbeKind::Bdf2FirstStep => [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&tau| {
                let d = (u(tau) - u(0.0)) / tau;
                (tau, (d - du(tau)).abs())
            })
            .unzip(),
        ProbeKind::Bdf2Interior => {
            let t = 1.0;
            [0.1, 0.05, 0.025, 0.0125]
                .iter()
                .map(|&tau| {
                    let d = (3.0 * u(t) - 4.0 * u(t - tau) + u(t - 2.0 * tau)) / (2.0 * tau);
                    (tau, (d - du(t)).abs())
                })
                .unzip()
        }
        ProbeKind::CompactSpace => {
            return compact_space_probe(gamma, SMOOTH_BUMP_POWER, &[16, 32, 64, 128]);
        }
    };
    let slope = fitted_order(&steps, &errors)?;
    Ok(ProbeResult {
        kind,
        steps,
        errors,
        slope,
    })
}
