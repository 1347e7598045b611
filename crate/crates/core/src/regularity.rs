//! Interior-regularity measurements on solved trajectories: parabolic
//! Hölder seminorms, dyadic oscillation fits, improvement-of-flatness
//! records, the Lipschitz-in-time propagation experiment, and the
//! jump-in-time counterexample with discontinuous exterior data.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{linear_apply, pucci_minus, pucci_plus};
use crate::evolve::{residual_check, solve_dirichlet, DirichletProblem, Sense};
use crate::field::{Field, Grid, Point, Tail, MAX_DIM};
use crate::kernel::{make_fractional_kernel, OperatorSpec};
use crate::quad::Scheme;
use crate::util::{fit_line, norm_n};

/// Result of regressing log oscillation against log scale.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HolderFit {
    pub alpha_hat: f64,
    pub r_squared: f64,
    pub rms_residual: f64,
    pub scales_used: usize,
}

const ALPHA_CLAMP: f64 = 1.5;

/// Max over sampled pairs in `B_radius(center) x [t_lo, t_hi]` of
/// `|u(x,t) - u(y,s)| / (|x - y| + |t - s|^{1/sigma})^alpha`.
pub fn parabolic_holder_seminorm(
    u: &Field,
    center: &Point,
    radius: f64,
    t_lo: f64,
    t_hi: f64,
    alpha: f64,
    sigma: f64,
) -> f64 {
    let grid = u.grid();
    let n = grid.dim();
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&k| {
            let p = grid.node_point(k);
            let d = [p[0] - center[0], p[1] - center[1]];
            norm_n(&d, n) <= radius
        })
        .collect();
    let nodes = thin(&nodes, 64);
    let t_ids: Vec<usize> = (0..u.times().len())
        .filter(|&j| u.times()[j] >= t_lo - 1e-12 && u.times()[j] <= t_hi + 1e-12)
        .collect();
    let t_ids = thin(&t_ids, 24);
    let mut best = 0.0f64;
    for (ai, &a) in nodes.iter().enumerate() {
        let pa = grid.node_point(a);
        for &b in &nodes[ai..] {
            let pb = grid.node_point(b);
            let d = [pa[0] - pb[0], pa[1] - pb[1]];
            let dx = norm_n(&d, n);
            for (ti, &tia) in t_ids.iter().enumerate() {
                for &tib in &t_ids[ti..] {
                    if a == b && tia == tib {
                        continue;
                    }
                    let dt = (u.times()[tia] - u.times()[tib]).abs();
                    let dist = dx + dt.powf(1.0 / sigma);
                    let q = (u.value_node(a, tia) - u.value_node(b, tib)).abs() / dist.powf(alpha);
                    if q > best {
                        best = q;
                    }
                }
            }
        }
    }
    best
}

fn thin(ids: &[usize], cap: usize) -> Vec<usize> {
    if ids.len() <= cap {
        return ids.to_vec();
    }
    let stride = ids.len().div_ceil(cap);
    ids.iter().step_by(stride).copied().collect()
}

/// Oscillation of `u` over the parabolic cylinder
/// `B_r(center) x (t_top - tau, t_top]`; `None` when the cylinder holds
/// fewer than 3 nodes per axis.
fn cylinder_osc(u: &Field, center: &Point, r: f64, tau: f64) -> Option<f64> {
    let grid = u.grid();
    let n = grid.dim();
    let t_top = *u.times().last().unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count_axis = 0usize;
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        let d = [p[0] - center[0], p[1] - center[1]];
        if norm_n(&d, n) > r {
            continue;
        }
        if d[1].abs() < 0.5 * grid.spacing() {
            count_axis += 1;
        }
        for (j, &t) in u.times().iter().enumerate() {
            if t > t_top - tau - 1e-14 && t <= t_top + 1e-14 {
                let v = u.value_node(k, j);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if count_axis < 3 || !lo.is_finite() {
        return None;
    }
    Some(hi - lo)
}

/// Fits the Hölder exponent of `u` at `center` by regressing the log
/// oscillation over dyadic cylinders `B_{2^{-k}} x (-2^{-sigma k}, 0]`
/// (relative to the final stored time) against the scale.
pub fn fit_holder_exponent(
    u: &Field,
    center: &Point,
    k_max: usize,
    sigma: f64,
) -> Result<HolderFit> {
    let horizon = *u.times().last().unwrap() - u.times()[0];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..=k_max {
        let r = 0.5f64.powi(k as i32);
        let tau = r.powf(sigma).min(horizon);
        let Some(osc) = cylinder_osc(u, center, r, tau) else {
            break;
        };
        if osc <= 0.0 {
            break;
        }
        xs.push(r.ln());
        ys.push(osc.ln());
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need 3 usable dyadic scales, got {}",
            xs.len()
        )));
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::parameter("degenerate scale lattice"))?;
    Ok(HolderFit {
        alpha_hat: fit.slope.clamp(0.0, ALPHA_CLAMP),
        r_squared: fit.r_squared,
        rms_residual: fit.rms_residual,
        scales_used: xs.len(),
    })
}

/// One step of the improvement-of-flatness iteration: the best affine fit
/// on the `k`-th shrinking cylinder and its sup distance to `u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlatnessRecord {
    pub k: usize,
    pub radius: f64,
    pub a: f64,
    pub b: [f64; MAX_DIM],
    pub sup_error: f64,
    pub truncated: bool,
}

/// Least-squares affine fits `l_k(x) = a_k + b_k . (x - center)` over the
/// cylinders `B_{lambda^k}(center) x (t_top - lambda^{sigma k}, t_top]`,
/// with sup errors. Stops with a truncation flag once the cylinder falls
/// under grid resolution.
pub fn flatness_sequence(
    u: &Field,
    center: &Point,
    lambda_ratio: f64,
    sigma: f64,
    k_max: usize,
) -> Result<Vec<FlatnessRecord>> {
    if !(lambda_ratio > 0.0 && lambda_ratio < 1.0) {
        return Err(Error::parameter("flatness ratio must lie in (0, 1)"));
    }
    let grid = u.grid();
    let n = grid.dim();
    let t_top = *u.times().last().unwrap();
    let horizon = t_top - u.times()[0];
    let mut out = Vec::new();
    for k in 0..=k_max {
        let r = lambda_ratio.powi(k as i32);
        let tau = r.powf(sigma).min(horizon);
        // gather cylinder samples
        let mut rows: Vec<([f64; 3], f64)> = Vec::new();
        let mut count_axis = 0usize;
        for node in 0..grid.len() {
            let p = grid.node_point(node);
            let d = [p[0] - center[0], p[1] - center[1]];
            if norm_n(&d, n) > r {
                continue;
            }
            if d[1].abs() < 0.5 * grid.spacing() {
                count_axis += 1;
            }
            for (j, &t) in u.times().iter().enumerate() {
                if t > t_top - tau - 1e-14 && t <= t_top + 1e-14 {
                    rows.push(([1.0, d[0], d[1]], u.value_node(node, j)));
                }
            }
        }
        if count_axis < 3 {
            out.push(FlatnessRecord {
                k,
                radius: r,
                a: f64::NAN,
                b: [f64::NAN; MAX_DIM],
                sup_error: f64::NAN,
                truncated: true,
            });
            break;
        }
        let dof = 1 + n;
        // normal equations for the affine fit
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for (row, v) in &rows {
            for i in 0..dof {
                for jj in 0..dof {
                    m[i][jj] += row[i] * row[jj];
                }
                rhs[i] += row[i] * v;
            }
        }
        let coef = solve_small(&mut m, &mut rhs, dof)?;
        let mut sup = 0.0f64;
        for (row, v) in &rows {
            let fit = coef[0] + coef[1] * row[1] + coef[2] * row[2];
            sup = sup.max((v - fit).abs());
        }
        out.push(FlatnessRecord {
            k,
            radius: r,
            a: coef[0],
            b: [coef[1], coef[2]],
            sup_error: sup,
            truncated: false,
        });
    }
    Ok(out)
}

fn solve_small(m: &mut [[f64; 3]; 3], rhs: &mut [f64; 3], dof: usize) -> Result<[f64; 3]> {
    // Gaussian elimination with partial pivoting on a <=3x3 system
    let mut idx = [0usize, 1, 2];
    for col in 0..dof {
        let piv = (col..dof)
            .max_by(|&a, &b| {
                m[idx[a]][col]
                    .abs()
                    .partial_cmp(&m[idx[b]][col].abs())
                    .unwrap()
            })
            .unwrap();
        idx.swap(col, piv);
        let p = m[idx[col]][col];
        if p.abs() < 1e-14 {
            return Err(Error::precondition("degenerate affine fit"));
        }
        for r in col + 1..dof {
            let f = m[idx[r]][col] / p;
            for c in col..dof {
                m[idx[r]][c] -= f * m[idx[col]][c];
            }
            rhs[idx[r]] -= f * rhs[idx[col]];
        }
    }
    let mut out = [0.0f64; 3];
    for col in (0..dof).rev() {
        let mut v = rhs[idx[col]];
        for c in col + 1..dof {
            v -= m[idx[col]][c] * out[c];
        }
        out[col] = v / m[idx[col]][col];
    }
    Ok(out)
}

/// Outcome of the Lipschitz-in-time propagation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct TimeRegularityReport {
    /// Measured sup of `|M+- u0|` over interior nodes.
    pub c0_measured: f64,
    /// Claimed bound the hypothesis check verifies against.
    pub c0_claimed: f64,
    pub lip_g: f64,
    /// `M = max(C0, Lip_t(g))`.
    pub m: f64,
    pub hypothesis_pass: bool,
    /// Nodewise `|u(x,t) - u(x, t_start)| <= M (t - t_start) (1 + tol)`.
    pub bound_pass: bool,
    pub worst_excess: f64,
    pub quotient_fit: Option<HolderFit>,
    #[serde(skip)]
    pub trajectory: Field,
    pub dt: f64,
}

/// Runs the propagation experiment: verifies `|M+- u0| <= C0`, measures the
/// time-Lipschitz constant of the exterior data, solves, checks the
/// nodewise bound `|u(x,t) - u(x,t_start)| <= M (t - t_start)`, and fits
/// the Hölder exponent of the time difference quotient at the center.
pub fn time_regularity_experiment(
    problem: &DirichletProblem,
    grid: Grid,
    scheme: Arc<Scheme>,
    c0_claimed: f64,
) -> Result<TimeRegularityReport> {
    let n = grid.dim();
    let sigma = problem.operator.order();
    let lambda = problem.operator.lambda();

    // hypothesis audit on the initial slice
    let g = problem.g.clone();
    let t0 = problem.t_start;
    let u0 = Field::snapshot(grid.clone(), t0, problem.tail.clone(), |p| g(p, t0))?;
    let mut c0_measured = 0.0f64;
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        let d = [p[0] - problem.center[0], p[1] - problem.center[1]];
        if norm_n(&d, n) >= problem.radius {
            continue;
        }
        let plus = pucci_plus(&u0, &p, 0, sigma, lambda, &scheme)?;
        let minus = pucci_minus(&u0, &p, 0, sigma, lambda, &scheme)?;
        c0_measured = c0_measured.max(plus.abs()).max(minus.abs());
    }
    let hypothesis_pass = c0_measured <= c0_claimed * (1.0 + 1e-6) + 1e-12;

    // time-Lipschitz constant of the exterior data over a sample lattice
    let mut lip_g = 0.0f64;
    let t_samples = 33usize;
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        let d = [p[0] - problem.center[0], p[1] - problem.center[1]];
        if norm_n(&d, n) < problem.radius {
            continue;
        }
        let mut prev = (problem.g)(&p, problem.t_start);
        for j in 1..t_samples {
            let t = problem.t_start
                + (problem.t_end - problem.t_start) * j as f64 / (t_samples - 1) as f64;
            let v = (problem.g)(&p, t);
            lip_g = lip_g.max(
                (v - prev).abs() / ((problem.t_end - problem.t_start) / (t_samples - 1) as f64),
            );
            prev = v;
        }
    }
    let m = c0_claimed.max(lip_g);

    let (traj, info) = solve_dirichlet(problem, grid.clone(), scheme)?;
    let mut worst_excess = f64::NEG_INFINITY;
    for (j, &t) in traj.times().iter().enumerate() {
        let budget = m * (t - problem.t_start) * (1.0 + 1e-8) + 1e-10;
        for k in 0..grid.len() {
            let excess = (traj.value_node(k, j) - traj.value_node(k, 0)).abs() - budget;
            worst_excess = worst_excess.max(excess);
        }
    }
    let bound_pass = worst_excess <= 0.0;

    // difference quotient of the stored trajectory
    let quotient_fit = {
        let nt = traj.times().len();
        if nt < 4 {
            None
        } else {
            let mut times = Vec::with_capacity(nt - 1);
            let mut values = Vec::with_capacity((nt - 1) * grid.len());
            for j in 0..nt - 1 {
                let dt = traj.times()[j + 1] - traj.times()[j];
                times.push(traj.times()[j]);
                for k in 0..grid.len() {
                    values.push((traj.value_node(k, j + 1) - traj.value_node(k, j)) / dt);
                }
            }
            let w = Field::from_values(grid.clone(), times, values, Tail::zero())?;
            fit_holder_exponent(&w, &problem.center, 6, sigma).ok()
        }
    };

    Ok(TimeRegularityReport {
        c0_measured,
        c0_claimed,
        lip_g,
        m,
        hypothesis_pass,
        bound_pass,
        worst_excess,
        quotient_fit,
        trajectory: traj,
        dt: info.dt,
    })
}

/// Outcome of the discontinuous-data experiment: the solution stays flat up
/// to the switch-on time, then picks up a kink whose one-sided slope is
/// predicted by one explicit step against the ring datum.
#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub c1_used: f64,
    pub halvings: usize,
    pub subsolution_pass: bool,
    /// sup of `|u|` over the domain ball for stored times `<= -1/2`.
    pub pre_jump_sup: f64,
    pub pre_slope: f64,
    pub post_slope: f64,
    /// `M+ applied to the ring indicator at the center`.
    pub prediction: f64,
    pub jump_detected: bool,
    pub dt: f64,
}

fn ring_indicator(p: &Point, n: usize) -> f64 {
    let r = norm_n(p, n);
    if r > 2.0 && r < 3.0 {
        1.0
    } else {
        0.0
    }
}

/// Solves the order-`sigma` constant-coefficient heat problem on
/// `B_1 x (-1, 0]` with zero initial data and exterior datum
/// `c1 (t + 1/2) + ring(x)` switched on at `t = -1/2`; `c1` is halved (up
/// to 10 times) until the datum verifies as a discrete subsolution.
pub fn counterexample_experiment(
    sigma: f64,
    c1_init: f64,
    h: f64,
    include_ring: bool,
) -> Result<CounterexampleReport> {
    let n = 1usize;
    let grid = Grid::new(n, h, 4.0)?;
    let scheme = Arc::new(Scheme::with_defaults(n, sigma, h)?);
    let kernel = make_fractional_kernel(n, sigma, 1.0, 1.0)?;

    let mut c1 = c1_init;
    let mut halvings = 0usize;
    let subsolution_pass;
    let make_g = |c1: f64| -> Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync> {
        Arc::new(move |p: &Point, t: f64| {
            if t < -0.5 {
                0.0
            } else {
                c1 * (t + 0.5) + if include_ring { ring_indicator(p, 1) } else { 0.0 }
            }
        })
    };
    let make_problem = |c1: f64| -> Result<DirichletProblem> {
        let g = make_g(c1);
        let g_f = g.clone();
        let g_tail = g.clone();
        let mut problem = DirichletProblem::new(
            OperatorSpec::linear(kernel.clone())?,
            |_, _| 0.0,
            move |p, t| g_f(p, t),
            Tail::rule(move |p, t| g_tail(p, t), 0.0, c1.max(1e-12)),
        );
        problem.discontinuous_data = true;
        Ok(problem)
    };

    // subsolution audit of the exterior datum, with auto-halving
    loop {
        let g = make_g(c1);
        let slices = 64usize;
        let mut times = Vec::with_capacity(slices + 1);
        let mut values = Vec::with_capacity((slices + 1) * grid.len());
        for j in 0..=slices {
            let t = -1.0 + j as f64 / slices as f64;
            times.push(t);
            for k in 0..grid.len() {
                values.push(g(&grid.node_point(k), t));
            }
        }
        let g_tail = g.clone();
        let candidate = Field::from_values(
            grid.clone(),
            times,
            values,
            Tail::rule(move |p, t| g_tail(p, t), 0.0, c1.max(1e-12)),
        )?;
        let problem = make_problem(c1)?;
        let report = residual_check(&candidate, &problem, scheme.clone(), Sense::Sub, 1e-8)?;
        if report.pass || c1 == 0.0 {
            subsolution_pass = report.pass;
            break;
        }
        if halvings >= 10 {
            return Err(Error::precondition(format!(
                "datum never verified as a subsolution (last c1 = {c1}, max residual {})",
                report.max_residual
            )));
        }
        c1 *= 0.5;
        halvings += 1;
    }

    let problem = make_problem(c1)?;
    let (traj, info) = solve_dirichlet(&problem, grid.clone(), scheme.clone())?;

    let inner = grid.nodes_in_ball(1.0);
    let mut pre_jump_sup = 0.0f64;
    for (j, &t) in traj.times().iter().enumerate() {
        if t > -0.5 + 1e-12 {
            continue;
        }
        for &k in &inner {
            pre_jump_sup = pre_jump_sup.max(traj.value_node(k, j).abs());
        }
    }

    let center = grid
        .aligned_node(&[0.0, 0.0])
        .ok_or_else(|| Error::precondition("origin off-grid"))?;
    let j_mid = traj.time_index(-0.5);
    if (traj.times()[j_mid] + 0.5).abs() > 1e-9 || j_mid == 0 || j_mid + 1 >= traj.times().len() {
        return Err(Error::precondition("stored lattice misses the switch-on time"));
    }
    let slope = |j0: usize, j1: usize| {
        (traj.value_node(center, j1) - traj.value_node(center, j0))
            / (traj.times()[j1] - traj.times()[j0])
    };
    let pre_slope = slope(j_mid - 1, j_mid);
    let post_slope = slope(j_mid, j_mid + 1);

    let ring = Field::snapshot(grid.clone(), 0.0, Tail::zero(), |p| ring_indicator(p, 1))?;
    let prediction = linear_apply(&kernel, &ring, &[0.0, 0.0], 0, &scheme)?;
    let jump_detected = post_slope >= 10.0 * pre_slope.abs() && post_slope >= 1e-4;

    Ok(CounterexampleReport {
        c1_used: c1,
        halvings,
        subsolution_pass,
        pre_jump_sup,
        pre_slope,
        post_slope,
        prediction,
        jump_detected,
        dt: info.dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::cfl_timestep;

    fn traj_from(grid: Grid, times: Vec<f64>, f: impl Fn(&Point, f64) -> f64) -> Field {
        Field::from_fn(grid, times, Tail::zero(), f).unwrap()
    }

    #[test]
    fn seminorm_basics() {
        let grid = Grid::new(1, 0.0625, 4.0).unwrap();
        let times = vec![-1.0, -0.5, 0.0];
        let c = traj_from(grid.clone(), times.clone(), |_, _| 7.0);
        assert_eq!(
            parabolic_holder_seminorm(&c, &[0.0, 0.0], 1.0, -1.0, 0.0, 0.5, 1.0),
            0.0
        );
        let lin = traj_from(grid.clone(), times.clone(), |p, _| p[0]);
        let s = parabolic_holder_seminorm(&lin, &[0.0, 0.0], 1.0, -1.0, 0.0, 1.0, 1.0);
        assert!((s - 1.0).abs() < 1e-12, "seminorm {s}");
        // absolute homogeneity and invariance under adding constants
        let shifted = traj_from(grid, times, |p, _| 3.0 * p[0] + 11.0);
        let s2 = parabolic_holder_seminorm(&shifted, &[0.0, 0.0], 1.0, -1.0, 0.0, 1.0, 1.0);
        assert!((s2 - 3.0 * s).abs() < 1e-12);
    }

    #[test]
    fn holder_fit_recovers_square_root() {
        let grid = Grid::new(1, 1.0 / 256.0, 4.0).unwrap();
        let u = traj_from(grid, vec![-1.0, 0.0], |p, _| p[0].abs().sqrt());
        let fit = fit_holder_exponent(&u, &[0.0, 0.0], 7, 1.0).unwrap();
        assert!(
            (fit.alpha_hat - 0.5).abs() < 0.05,
            "alpha_hat = {}",
            fit.alpha_hat
        );
    }

    #[test]
    fn holder_fit_clamps_affine_and_flags_thin_data() {
        let grid = Grid::new(1, 1.0 / 64.0, 4.0).unwrap();
        let u = traj_from(grid, vec![-1.0, 0.0], |p, _| 2.0 * p[0] + 1.0);
        let fit = fit_holder_exponent(&u, &[0.0, 0.0], 6, 1.0).unwrap();
        assert!(fit.alpha_hat >= 1.0);
        assert!(fit.alpha_hat <= ALPHA_CLAMP);
        // too coarse for three dyadic scales
        let coarse = Grid::new(1, 0.5, 4.0).unwrap();
        let u2 = traj_from(coarse, vec![-1.0, 0.0], |p, _| p[0].abs().sqrt());
        assert!(matches!(
            fit_holder_exponent(&u2, &[0.0, 0.0], 6, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn flatness_of_affine_is_zero() {
        let grid = Grid::new(1, 1.0 / 64.0, 4.0).unwrap();
        let u = traj_from(grid, vec![-1.0, -0.5, 0.0], |p, _| 0.3 - 1.7 * p[0]);
        let recs = flatness_sequence(&u, &[0.0, 0.0], 0.5, 1.0, 5).unwrap();
        for r in recs.iter().filter(|r| !r.truncated) {
            assert!(r.sup_error < 1e-12, "k = {}: {}", r.k, r.sup_error);
            assert!((r.a - 0.3).abs() < 1e-10 && (r.b[0] + 1.7).abs() < 1e-9);
        }
    }

    #[test]
    fn flatness_decay_of_power_profile() {
        // u = x |x|^alpha: the affine remainder on B_r scales like r^{1+alpha}
        let alpha = 0.5;
        let grid = Grid::new(1, 1.0 / 512.0, 4.0).unwrap();
        let u = traj_from(grid, vec![-1.0, 0.0], |p, _| p[0] * p[0].abs().powf(alpha));
        let recs = flatness_sequence(&u, &[0.0, 0.0], 0.5, 1.0, 6).unwrap();
        let ok: Vec<_> = recs.iter().filter(|r| !r.truncated).collect();
        assert!(ok.len() >= 5);
        for w in ok.windows(2) {
            let ratio = w[1].sup_error / w[0].sup_error;
            // expected lambda^{1+alpha} = 0.5^{1.5} ~ 0.35
            assert!(
                (ratio - 0.5f64.powf(1.0 + alpha)).abs() < 0.1,
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn time_regularity_constant_data_degenerates() {
        let h = 1.0 / 16.0;
        let grid = Grid::new(1, h, 4.0).unwrap();
        let scheme = Arc::new(Scheme::with_defaults(1, 1.0, h).unwrap());
        let kernel = make_fractional_kernel(1, 1.0, 1.0, 1.0).unwrap();
        let problem = DirichletProblem::new(
            OperatorSpec::linear(kernel).unwrap(),
            |_, _| 0.0,
            |_, _| 2.0,
            Tail::rule(|_, _| 2.0, 0.0, 2.0),
        );
        let report = time_regularity_experiment(&problem, grid, scheme, 1e-9).unwrap();
        assert!(report.hypothesis_pass, "c0 = {}", report.c0_measured);
        assert!(report.lip_g < 1e-12);
        assert!(report.bound_pass, "excess {}", report.worst_excess);
    }

    #[test]
    fn time_regularity_linear_drift_is_tight() {
        // g = t + 1 everywhere with f = 1: u = t + 1 exactly, M = 1, and
        // the Lipschitz budget is met with equality
        let h = 1.0 / 16.0;
        let grid = Grid::new(1, h, 4.0).unwrap();
        let scheme = Arc::new(Scheme::with_defaults(1, 1.0, h).unwrap());
        let kernel = make_fractional_kernel(1, 1.0, 1.0, 1.0).unwrap();
        let problem = DirichletProblem::new(
            OperatorSpec::linear(kernel).unwrap(),
            |_, _| 1.0,
            |_, t| t + 1.0,
            Tail::rule(|_, t| t + 1.0, 0.0, 1.0),
        );
        let report = time_regularity_experiment(&problem, grid.clone(), scheme, 1e-9).unwrap();
        assert!((report.lip_g - 1.0).abs() < 1e-9);
        assert!(report.bound_pass, "excess {}", report.worst_excess);
        // the drift saturates the bound at the center
        let traj = &report.trajectory;
        let last = traj.times().len() - 1;
        let k0 = traj.grid().aligned_node(&[0.0, 0.0]).unwrap();
        let drift = traj.value_node(k0, last) - traj.value_node(k0, 0);
        assert!((drift - 1.0).abs() < 1e-9, "drift {drift}");
    }

    #[test]
    fn counterexample_shows_the_jump_and_control_does_not() {
        let report = counterexample_experiment(1.0, 0.05, 1.0 / 16.0, true).unwrap();
        assert!(report.subsolution_pass);
        assert!(report.pre_jump_sup <= 1e-8, "pre sup {}", report.pre_jump_sup);
        assert!(report.jump_detected);
        assert!(
            report.post_slope > 0.5 * report.prediction,
            "post {} vs prediction {}",
            report.post_slope,
            report.prediction
        );
        let control = counterexample_experiment(1.0, 0.0, 1.0 / 16.0, false).unwrap();
        assert!(!control.jump_detected);
        assert!(control.pre_jump_sup <= 1e-12 && control.post_slope.abs() <= 1e-12);
    }

    #[test]
    fn counterexample_cfl_matches_solver() {
        // the reported dt respects the scheme's stability bound
        let h = 1.0 / 16.0;
        let grid = Grid::new(1, h, 4.0).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, h).unwrap();
        let kernel = make_fractional_kernel(1, 1.0, 1.0, 1.0).unwrap();
        let op = OperatorSpec::linear(kernel).unwrap();
        let bound = cfl_timestep(&grid, &op, &scheme).unwrap();
        let report = counterexample_experiment(1.0, 0.05, h, true).unwrap();
        assert!(report.dt <= bound * (1.0 + 1e-12));
    }
}
