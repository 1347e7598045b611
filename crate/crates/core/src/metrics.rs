//! Operator norms over a test-function bank, parabolic rescaling, the scale
//! norm, weak-convergence measurement against a proxy limit, and the
//! coefficient-perturbation experiment for C^{1,alpha} persistence.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{solve_dirichlet, DirichletProblem};
use crate::eval::infsup_apply;
use crate::field::{Field, Grid, Point, Tail};
use crate::kernel::{
    check_l1_membership, omega_l1_norm, KernelSpec, OperatorKind, OperatorSpec, SamplePlan,
    WeightOmega,
};
use crate::quad::Scheme;
use crate::regularity::{fit_holder_exponent, flatness_sequence, FlatnessRecord, HolderFit};
use crate::util::norm_n;

/// One test function: a quadratic parabolic polynomial inside
/// `B_r(x0) x (t0 - tau, t0]` matched to an oscillating integrable tail,
/// with its minimal valid normalization `M`.
pub struct BankMember {
    pub field: Field,
    pub x0: Point,
    pub t0: f64,
    pub r: f64,
    pub tau: f64,
    /// Gradient of the polynomial at `x0` (for the quadratic bound).
    pub grad: Point,
    pub m_l1: f64,
    pub m_quad: f64,
    /// `max(m_l1, m_quad)` — the smallest `M` valid for both constraints.
    pub m: f64,
}

pub struct TestBank {
    pub members: Vec<BankMember>,
    pub seed: u64,
    pub sigma0: f64,
}

/// Deterministic bank of `size` members on `grid`: quadratic parabolic
/// polynomials in random balls, tails `c min(1, |y|^{-(n+sigma0+0.1)})`
/// times a smooth oscillation. Each member carries its minimal valid `M`.
pub fn generate_test_bank(
    seed: u64,
    size: usize,
    sigma0: f64,
    grid: &Grid,
) -> Result<TestBank> {
    if size == 0 {
        return Err(Error::parameter("bank size must be >= 1"));
    }
    let n = grid.dim();
    let omega = WeightOmega::new(n, sigma0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(size);
    for _ in 0..size {
        let h = grid.spacing();
        // ball center snapped to the lattice
        let mut x0 = [0.0f64; 2];
        for x in x0.iter_mut().take(n) {
            *x = (rng.gen_range(-0.5..0.5) / h).round() * h;
        }
        let r: f64 = rng.gen_range(0.6..1.2);
        let tau: f64 = rng.gen_range(0.3..1.0);
        let t0 = 0.0;
        let c0: f64 = rng.gen_range(-1.0..1.0);
        let ct: f64 = rng.gen_range(-1.0..1.0);
        let mut g = [0.0f64; 2];
        let mut q = [[0.0f64; 2]; 2];
        for i in 0..n {
            g[i] = rng.gen_range(-1.0..1.0);
            for j in 0..n {
                q[i][j] = rng.gen_range(-1.0..1.0);
            }
        }
        // symmetrize the quadratic part
        let q01 = 0.5 * (q[0][1] + q[1][0]);
        q[0][1] = q01;
        q[1][0] = q01;
        let amp: f64 = rng.gen_range(0.2..1.0);
        let freq: f64 = rng.gen_range(0.5..3.0);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let decay = n as f64 + sigma0 + 0.1;

        let poly = move |p: &Point, t: f64| -> f64 {
            let d = [p[0] - x0[0], p[1] - x0[1]];
            let mut v = c0 + ct * (t - t0);
            for i in 0..n {
                v += g[i] * d[i];
                for j in 0..n {
                    v += q[i][j] * d[i] * d[j];
                }
            }
            v
        };
        let tail_fn = move |p: &Point| -> f64 {
            let rr = norm_n(p, n);
            amp * rr.powf(-decay).min(1.0) * (freq * p[0] + phase).cos()
        };
        let times = vec![t0 - tau, t0 - 0.5 * tau, t0];
        let field = Field::from_fn(
            grid.clone(),
            times,
            Tail::rule(move |p, _| tail_fn(p), 0.0, amp),
            |p, t| {
                let d = [p[0] - x0[0], p[1] - x0[1]];
                if norm_n(&d, n) <= r {
                    poly(p, t)
                } else {
                    tail_fn(p)
                }
            },
        )?;

        let mut m_l1 = 0.0f64;
        for j in 0..field.times().len() {
            m_l1 = m_l1.max(omega_l1_norm(&field, j, &omega)?);
        }
        let t_top = field.times().len() - 1;
        let mut m_quad = 0.0f64;
        let u_at_x0 = field.value_at(&x0, t_top);
        for k in 0..grid.len() {
            let p = grid.node_point(k);
            let d = [p[0] - x0[0], p[1] - x0[1]];
            let dist = norm_n(&d, n);
            if dist < 0.5 * grid.spacing() || dist > 1.0 {
                continue;
            }
            let lin = u_at_x0 + g[0] * d[0] + g[1] * d[1];
            m_quad = m_quad.max((field.value_node(k, t_top) - lin).abs() / (dist * dist));
        }
        members.push(BankMember {
            field,
            x0,
            t0,
            r,
            tau,
            grad: g,
            m_l1,
            m_quad,
            m: m_l1.max(m_quad),
        });
    }
    Ok(TestBank {
        members,
        seed,
        sigma0,
    })
}

/// Sup over a finite bank — a certified lower bound of the operator norm.
#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub bank_size: usize,
    pub seed: u64,
    /// Running maximum after each member; nondecreasing by construction.
    pub trace: Vec<f64>,
    pub skipped: usize,
    pub lower_bound: bool,
}

fn member_eval_points(member: &BankMember, n: usize, shrink: f64) -> Vec<Point> {
    let mut pts = vec![member.x0];
    let step = shrink * member.r;
    for i in 0..n {
        let mut p = member.x0;
        p[i] += step;
        pts.push(p);
        p[i] -= 2.0 * step;
        pts.push(p);
    }
    pts
}

/// `max |I(u, x, t0)| / (1 + M)` over the bank and a few evaluation points
/// inside each member's polynomial ball.
pub fn operator_norm(
    op: &OperatorSpec,
    bank: &TestBank,
    scheme: &Scheme,
) -> Result<NormEstimate> {
    let n = op.dim();
    let mut value = 0.0f64;
    let mut trace = Vec::with_capacity(bank.members.len());
    let mut skipped = 0usize;
    for member in &bank.members {
        let t_top = member.field.times().len() - 1;
        let mut member_ok = false;
        for x in member_eval_points(member, n, 0.25) {
            match infsup_apply(op, &member.field, &x, t_top, scheme) {
                Ok(v) => {
                    member_ok = true;
                    value = value.max(v.abs() / (1.0 + member.m));
                }
                Err(_) => {}
            }
        }
        if !member_ok {
            skipped += 1;
        }
        trace.push(value);
    }
    Ok(NormEstimate {
        value,
        bank_size: bank.members.len(),
        seed: bank.seed,
        trace,
        skipped,
        lower_bound: true,
    })
}

/// Operator under the parabolic dilation `beta`: every kernel coefficient
/// becomes `a(beta x, beta^sigma t, beta y)`. Extremal operators are
/// class-invariant and pass through unchanged.
pub fn rescale_operator(op: &OperatorSpec, beta: f64) -> Result<OperatorSpec> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::parameter(format!("beta = {beta} not in (0, 1]")));
    }
    let kind = match &op.kind {
        OperatorKind::Linear(k) => OperatorKind::Linear(k.rescaled(beta)?),
        OperatorKind::PucciPlus { .. } | OperatorKind::PucciMinus { .. } => op.kind.clone(),
        OperatorKind::InfSup(rows) => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                out.push(row.iter().map(|k| k.rescaled(beta)).collect::<Result<Vec<_>>>()?);
            }
            OperatorKind::InfSup(out)
        }
    };
    OperatorSpec::new(kind)
}

/// `max_beta |I_beta|` over a lattice of dilations.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleNormEstimate {
    pub value: f64,
    pub per_beta: Vec<(f64, f64)>,
}

pub fn scale_norm(
    op: &OperatorSpec,
    betas: &[f64],
    bank: &TestBank,
    scheme: &Scheme,
) -> Result<ScaleNormEstimate> {
    if betas.is_empty() {
        return Err(Error::parameter("empty beta lattice"));
    }
    let mut per_beta = Vec::with_capacity(betas.len());
    let mut value = 0.0f64;
    for &beta in betas {
        let est = operator_norm(&rescale_operator(op, beta)?, bank, scheme)?;
        value = value.max(est.value);
        per_beta.push((beta, est.value));
    }
    Ok(ScaleNormEstimate { value, per_beta })
}

/// Per-operator uniform deviations from the last element of the sequence
/// (the proxy limit), maximized over the bank and the half-cylinders of the
/// members.
pub fn weak_convergence_test(
    ops: &[OperatorSpec],
    bank: &TestBank,
    scheme: &Scheme,
) -> Result<Vec<f64>> {
    let Some(limit) = ops.last() else {
        return Err(Error::parameter("empty operator sequence"));
    };
    let n = limit.dim();
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        let mut dev = 0.0f64;
        for member in &bank.members {
            for t_idx in [member.field.times().len() - 2, member.field.times().len() - 1] {
                for x in member_eval_points(member, n, 0.125) {
                    let a = infsup_apply(op, &member.field, &x, t_idx, scheme)?;
                    let b = infsup_apply(limit, &member.field, &x, t_idx, scheme)?;
                    dev = dev.max((a - b).abs());
                }
            }
        }
        out.push(dev);
    }
    Ok(out)
}

/// Outcome of the coefficient-perturbation experiment: solve with a
/// coefficient `eta`-close to a translation-invariant reference and measure
/// whether geometric flatness decay (C^{1,alpha} behavior) persists.
#[derive(Debug, Clone, Serialize)]
pub struct CordesReport {
    pub eta: f64,
    pub measured_gap: f64,
    pub hypothesis_pass: bool,
    pub reference_l1_pass: bool,
    pub flatness: Vec<FlatnessRecord>,
    /// Geometric mean of successive sup-error ratios; < 1 means decay.
    pub decay_ratio: f64,
    pub gradient_fit: Option<HolderFit>,
}

/// Runs the perturbation experiment with coefficient
/// `a(x, y) = a0(y) (1 + eta sin(x_1))` against the reference `a0`.
pub fn cordes_nirenberg_experiment(
    a0: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    eta: f64,
    sigma: f64,
    lambda: f64,
    grid: Grid,
) -> Result<CordesReport> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::parameter("eta must lie in [0, 1)"));
    }
    let n = grid.dim();
    let scheme = Arc::new(Scheme::with_defaults(n, sigma, grid.spacing())?);

    // hypothesis audit: reference kernel in the gradient-bounded class,
    // coefficient gap below eta (relative to the reference amplitude)
    let a0_ref = a0.clone();
    let ref_kernel = KernelSpec::new(n, sigma, lambda, true, move |_, _, y| a0_ref(y))?;
    let reference_l1_pass = check_l1_membership(&ref_kernel, &SamplePlan::default_lattice(n))
        .map(|r| r.pass)
        .unwrap_or(false);
    let mut measured_gap = 0.0f64;
    let mut sup_a0 = 0.0f64;
    for xk in -8..=8 {
        let x = [xk as f64 / 8.0, 0.0];
        for yk in 1..=32 {
            let y = [yk as f64 / 8.0, 0.0];
            let base = a0(&y);
            sup_a0 = sup_a0.max(base.abs());
            measured_gap = measured_gap.max((base * eta * x[0].sin()).abs());
        }
    }
    let hypothesis_pass = measured_gap <= eta * sup_a0 * (1.0 + 1e-9);

    let a0_k = a0.clone();
    let xt_invariant = eta == 0.0;
    let kernel = KernelSpec::new(n, sigma, lambda, xt_invariant, move |x, _, y| {
        a0_k(y) * (1.0 + eta * x[0].sin())
    })?;
    let operator = OperatorSpec::linear(kernel)?;
    let problem = DirichletProblem::new(
        operator,
        |_, _| 0.0,
        |p, _| (-p[0] * p[0] - p[1] * p[1]).exp(),
        Tail::rule(|p: &Point, _| (-p[0] * p[0] - p[1] * p[1]).exp(), 0.0, 1.0),
    );
    let (traj, _) = solve_dirichlet(&problem, grid.clone(), scheme)?;

    // forward difference quotient of the final slices in the first axis
    let h = grid.spacing();
    let m = grid.nodes_per_axis();
    let nt = traj.times().len();
    let keep = nt.min(64);
    let mut times = Vec::with_capacity(keep);
    let mut values = Vec::with_capacity(keep * grid.len());
    for j in nt - keep..nt {
        times.push(traj.times()[j]);
        for k in 0..grid.len() {
            let up = if (k % m) + 1 < m { traj.value_node(k + 1, j) } else { traj.value_node(k, j) };
            values.push((up - traj.value_node(k, j)) / h);
        }
    }
    let dq = Field::from_values(grid.clone(), times, values, Tail::zero())?;

    let flatness = flatness_sequence(&traj, &[0.0, 0.0], 0.5, sigma, 6)?;
    let ratios: Vec<f64> = flatness
        .windows(2)
        .filter(|w| !w[0].truncated && !w[1].truncated && w[0].sup_error > 0.0)
        .map(|w| w[1].sup_error / w[0].sup_error)
        .collect();
    let decay_ratio = if ratios.is_empty() {
        f64::NAN
    } else {
        (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
    };
    let gradient_fit = fit_holder_exponent(&dq, &[0.0, 0.0], 5, sigma).ok();

    Ok(CordesReport {
        eta,
        measured_gap,
        hypothesis_pass,
        reference_l1_pass,
        flatness,
        decay_ratio,
        gradient_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{linear_apply, pucci_plus};
    use crate::kernel::make_fractional_kernel;

    fn bank_grid() -> Grid {
        Grid::new(1, 1.0 / 16.0, 4.0).unwrap()
    }

    #[test]
    fn bank_is_deterministic_and_normalized() {
        let grid = bank_grid();
        let a = generate_test_bank(7, 4, 0.5, &grid).unwrap();
        let b = generate_test_bank(7, 4, 0.5, &grid).unwrap();
        for (ma, mb) in a.members.iter().zip(&b.members) {
            assert_eq!(ma.m, mb.m);
            assert_eq!(
                ma.field.value_node(10, 0),
                mb.field.value_node(10, 0)
            );
        }
        let c = generate_test_bank(8, 4, 0.5, &grid).unwrap();
        assert!(a
            .members
            .iter()
            .zip(&c.members)
            .any(|(x, y)| x.field.value_node(10, 0) != y.field.value_node(10, 0)));
        // minimal-M audit: both constraints hold at M, the binding one
        // becomes infeasible just below it
        let omega = WeightOmega::new(1, 0.5).unwrap();
        for m in &a.members {
            assert!(m.m >= m.m_l1 && m.m >= m.m_quad);
            assert!((m.m - m.m_l1.max(m.m_quad)).abs() < 1e-14);
            let l1 = omega_l1_norm(&m.field, 2, &omega).unwrap();
            assert!(l1 <= m.m + 1e-12);
        }
    }

    #[test]
    fn norm_of_difference_with_itself_is_zero_and_trace_monotone() {
        let grid = bank_grid();
        let bank = generate_test_bank(3, 6, 0.5, &grid).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, grid.spacing()).unwrap();
        let op = OperatorSpec::pucci_plus(1, 1.0, 2.0).unwrap();
        let est = operator_norm(&op, &bank, &scheme).unwrap();
        assert!(est.value > 0.0);
        assert!(est.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(est.skipped, 0);
        // difference of an operator with itself, member by member
        for member in &bank.members {
            let t = member.field.times().len() - 1;
            let a = pucci_plus(&member.field, &member.x0, t, 1.0, 2.0, &scheme).unwrap();
            let b = pucci_plus(&member.field, &member.x0, t, 1.0, 2.0, &scheme).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn norm_homogeneity_under_kernel_scaling() {
        let grid = bank_grid();
        let bank = generate_test_bank(11, 5, 0.5, &grid).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, grid.spacing()).unwrap();
        let one = OperatorSpec::linear(make_fractional_kernel(1, 1.0, 1.0, 2.0).unwrap()).unwrap();
        let half = OperatorSpec::linear(make_fractional_kernel(1, 1.0, 0.5, 2.0).unwrap()).unwrap();
        let n1 = operator_norm(&one, &bank, &scheme).unwrap();
        let n2 = operator_norm(&half, &bank, &scheme).unwrap();
        assert!((n2.value - 0.5 * n1.value).abs() < 1e-12 * (1.0 + n1.value));
    }

    #[test]
    fn rescale_identity_and_exact_composition() {
        let k = KernelSpec::new(1, 1.2, 2.0, true, |x: &Point, _, y: &Point| {
            1.0 + 0.5 * (x[0] + y[0]).sin()
        })
        .unwrap();
        let op = OperatorSpec::linear(k).unwrap();
        let id = rescale_operator(&op, 1.0).unwrap();
        let (b1, b2) = (0.7f64, 0.45f64);
        let once = rescale_operator(&rescale_operator(&op, b1).unwrap(), b2).unwrap();
        let direct = rescale_operator(&op, b1 * b2).unwrap();
        let ks = |o: &OperatorSpec| match &o.kind {
            OperatorKind::Linear(k) => k.clone(),
            _ => unreachable!(),
        };
        for &(x, t, y) in &[(0.3, -0.2, 1.1), (-1.7, -0.9, 0.4), (0.0, 0.0, 2.0)] {
            let args = ([x, 0.0], t, [y, 0.0]);
            assert_eq!(
                ks(&once).coeff(&args.0, args.1, &args.2),
                ks(&direct).coeff(&args.0, args.1, &args.2)
            );
            assert_eq!(
                ks(&id).coeff(&args.0, args.1, &args.2),
                ks(&op).coeff(&args.0, args.1, &args.2)
            );
            // substitution rule a_beta(x, t, y) = a(beta x, beta^sigma t, beta y)
            let kb = ks(&rescale_operator(&op, b1).unwrap());
            assert_eq!(
                kb.coeff(&args.0, args.1, &args.2),
                ks(&op).coeff(
                    &[b1 * x, 0.0],
                    b1.powf(1.2) * t,
                    &[b1 * y, 0.0]
                )
            );
        }
        assert!(rescale_operator(&op, 1.5).is_err());
    }

    #[test]
    fn scale_norm_constant_coefficients_is_flat() {
        let grid = bank_grid();
        let bank = generate_test_bank(5, 5, 0.5, &grid).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, grid.spacing()).unwrap();
        let op = OperatorSpec::linear(make_fractional_kernel(1, 1.0, 1.0, 2.0).unwrap()).unwrap();
        let est = scale_norm(&op, &[1.0, 0.5, 0.25], &bank, &scheme).unwrap();
        let base = operator_norm(&op, &bank, &scheme).unwrap().value;
        for &(_, v) in &est.per_beta {
            assert!((v - base).abs() < 1e-13 * (1.0 + base));
        }
        assert!((est.value - base).abs() < 1e-13 * (1.0 + base));
    }

    #[test]
    fn weak_convergence_of_shrinking_perturbations() {
        let grid = bank_grid();
        let bank = generate_test_bank(13, 5, 0.5, &grid).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, grid.spacing()).unwrap();
        let mut ops = Vec::new();
        for k in 1..=5usize {
            let kk = k as f64;
            let kernel = KernelSpec::new(1, 1.0, 2.0, false, move |x: &Point, _, _: &Point| {
                1.0 + x[0].sin() / kk
            })
            .unwrap();
            ops.push(OperatorSpec::linear(kernel).unwrap());
        }
        let devs = weak_convergence_test(&ops, &bank, &scheme).unwrap();
        assert_eq!(*devs.last().unwrap(), 0.0);
        // deviations scale like |1/k - 1/5|, hence strictly decreasing
        for w in devs[..4].windows(2) {
            assert!(w[1] < w[0]);
        }
        // reordering the bank does not change the deviations
        let mut bank2 = generate_test_bank(13, 5, 0.5, &grid).unwrap();
        bank2.members.reverse();
        let devs2 = weak_convergence_test(&ops, &bank2, &scheme).unwrap();
        for (a, b) in devs.iter().zip(&devs2) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sandwich_bounds_operator_difference_by_coefficient_gap() {
        // |I1 u - I2 u| <= eta * (M+ - M-) u / (lambda - 1/lambda) nodewise
        // for kernels with coefficient gap <= eta, by per-piece linearity
        let grid = bank_grid();
        let bank = generate_test_bank(17, 4, 0.5, &grid).unwrap();
        let scheme = Scheme::with_defaults(1, 1.0, grid.spacing()).unwrap();
        let lambda = 2.0;
        let eta = 0.25;
        let k1 = make_fractional_kernel(1, 1.0, 1.0, lambda).unwrap();
        let k2 = KernelSpec::new(1, 1.0, lambda, true, move |_, _, y: &Point| {
            1.0 + eta * (3.0 * y[0]).cos()
        })
        .unwrap();
        for member in &bank.members {
            let t = member.field.times().len() - 1;
            let a = linear_apply(&k1, &member.field, &member.x0, t, &scheme).unwrap();
            let b = linear_apply(&k2, &member.field, &member.x0, t, &scheme).unwrap();
            let plus = pucci_plus(&member.field, &member.x0, t, 1.0, lambda, &scheme).unwrap();
            let minus =
                crate::eval::pucci_minus(&member.field, &member.x0, t, 1.0, lambda, &scheme)
                    .unwrap();
            let majorant = eta * (plus - minus) / (lambda - 1.0 / lambda);
            assert!(
                (a - b).abs() <= majorant + 1e-10,
                "gap {} vs majorant {}",
                (a - b).abs(),
                majorant
            );
        }
    }

    #[test]
    fn cordes_baseline_runs_and_decays() {
        let grid = Grid::new(1, 1.0 / 16.0, 4.0).unwrap();
        let a0: Arc<dyn Fn(&Point) -> f64 + Send + Sync> = Arc::new(|_| 1.0);
        let report = cordes_nirenberg_experiment(a0, 0.0, 1.5, 2.0, grid).unwrap();
        assert!(report.hypothesis_pass);
        assert!(report.reference_l1_pass);
        assert!(report.measured_gap == 0.0);
        assert!(
            report.decay_ratio.is_finite() && report.decay_ratio < 1.0,
            "decay ratio {}",
            report.decay_ratio
        );
    }
}
