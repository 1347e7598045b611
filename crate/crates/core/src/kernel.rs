//! Kernel families, the integrability weight, ellipticity classes and their
//! sampled membership checks.
//!
//! A kernel is `K(x,t;y) = (2 - sigma) * a(x,t,y) / |y|^{n+sigma}` with a
//! coefficient rule `a` pinched between `1/Lambda` and `Lambda`. The
//! `(2 - sigma)` prefactor is kept explicitly so degeneration experiments as
//! `sigma -> 2` behave correctly.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Point, MAX_DIM};
use crate::util::{integrate_gauss, norm_n, simpson_weights};

/// Coefficient rule `a(x, t, y)`.
pub type CoeffFn = Arc<dyn Fn(&Point, f64, &Point) -> f64 + Send + Sync>;

/// Kernel of order `sigma` comparable to the fractional-Laplacian kernel.
#[derive(Clone)]
pub struct KernelSpec {
    pub n: usize,
    pub sigma: f64,
    pub lambda: f64,
    /// Coefficient rule; `None` marks space-time constant kernels whose rule
    /// depends on `y` only through `coefficient`.
    coefficient: CoeffFn,
    /// True when `a` does not depend on `(x, t)`.
    pub xt_invariant: bool,
    /// Accumulated parabolic dilation: the effective coefficient is
    /// `a(beta x, beta^sigma t, beta y)`. Kept as a factor (rather than
    /// baked into the closure) so composing dilations is exact.
    pub beta: f64,
}

impl std::fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelSpec")
            .field("n", &self.n)
            .field("sigma", &self.sigma)
            .field("lambda", &self.lambda)
            .field("xt_invariant", &self.xt_invariant)
            .field("beta", &self.beta)
            .finish()
    }
}

impl KernelSpec {
    pub fn new(
        n: usize,
        sigma: f64,
        lambda: f64,
        xt_invariant: bool,
        coefficient: impl Fn(&Point, f64, &Point) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        validate_order(n, sigma)?;
        if lambda < 1.0 {
            return Err(Error::parameter("ellipticity constant must be >= 1"));
        }
        Ok(KernelSpec {
            n,
            sigma,
            lambda,
            coefficient: Arc::new(coefficient),
            xt_invariant,
            beta: 1.0,
        })
    }

    /// Coefficient `a(x, t, y)`, with the accumulated dilation applied.
    pub fn coeff(&self, x: &Point, t: f64, y: &Point) -> f64 {
        if self.beta == 1.0 {
            (self.coefficient)(x, t, y)
        } else {
            let b = self.beta;
            let bx = [b * x[0], b * x[1]];
            let by = [b * y[0], b * y[1]];
            (self.coefficient)(&bx, b.powf(self.sigma) * t, &by)
        }
    }

    /// Kernel of the parabolically dilated operator:
    /// `K_beta(x, t; y) = beta^{n+sigma} K(beta x, beta^sigma t; beta y)`,
    /// i.e. the coefficient `a(beta x, beta^sigma t, beta y)`. Dilations
    /// compose exactly: `rescaled(b1).rescaled(b2) == rescaled(b1 * b2)`.
    pub fn rescaled(&self, beta: f64) -> Result<KernelSpec> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::parameter(format!("dilation beta = {beta} not in (0, 1]")));
        }
        let mut out = self.clone();
        out.beta = self.beta * beta;
        Ok(out)
    }

    /// Full kernel value `(2 - sigma) * a(x,t,y) / |y|^{n+sigma}`, `y != 0`.
    pub fn eval(&self, x: &Point, t: f64, y: &Point) -> f64 {
        let r = norm_n(y, self.n);
        (2.0 - self.sigma) * self.coeff(x, t, y) / r.powf(self.n as f64 + self.sigma)
    }
}

fn validate_order(n: usize, sigma: f64) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::parameter(format!("dimension {n} not in {{1, 2}}")));
    }
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::parameter(format!("order sigma = {sigma} not in (0, 2)")));
    }
    Ok(())
}

/// Constant-coefficient kernel `a = scale`; `scale = 1` gives the kernel whose
/// linear operator is `-(-Delta)^{sigma/2}` up to the `(2 - sigma)`-normalized
/// constant (see [`fractional_laplacian_constant`]).
pub fn make_fractional_kernel(n: usize, sigma: f64, scale: f64, lambda: f64) -> Result<KernelSpec> {
    validate_order(n, sigma)?;
    if lambda < 1.0 {
        return Err(Error::parameter("ellipticity constant must be >= 1"));
    }
    if !(scale >= 1.0 / lambda && scale <= lambda) {
        return Err(Error::parameter(format!(
            "scale {scale} outside [1/Lambda, Lambda] = [{}, {}]",
            1.0 / lambda,
            lambda
        )));
    }
    KernelSpec::new(n, sigma, lambda, true, move |_, _, _| scale)
}

/// Standard fractional-Laplacian constant `c_{n,sigma}` such that
/// `(-Delta)^{sigma/2} u = c_{n,sigma} PV int (u(x) - u(x+y)) |y|^{-n-sigma} dy`,
/// i.e. the multiplier of `-(-Delta)^{sigma/2}` is `-|xi|^sigma`.
///
/// `c_{n,sigma} = 4^{sigma/2} Gamma((n+sigma)/2) / (pi^{n/2} |Gamma(-sigma/2)|)`.
pub fn fractional_laplacian_constant(n: usize, sigma: f64) -> f64 {
    use statrs::function::gamma::gamma;
    let s = sigma / 2.0;
    // |Gamma(-s)| = Gamma(1 - s) / s for 0 < s < 1
    let gamma_neg = gamma(1.0 - s) / s;
    4f64.powf(s) * gamma((n as f64 + sigma) / 2.0)
        / (std::f64::consts::PI.powf(n as f64 / 2.0) * gamma_neg)
}

/// Operator description: a single linear kernel, a Pucci extremal operator, or
/// a finite inf-sup family.
#[derive(Debug, Clone)]
pub enum OperatorKind {
    Linear(KernelSpec),
    PucciPlus { n: usize, sigma: f64, lambda: f64 },
    PucciMinus { n: usize, sigma: f64, lambda: f64 },
    /// `I u = inf_alpha sup_beta L_{K_{alpha,beta}} u`; outer index alpha,
    /// inner index beta.
    InfSup(Vec<Vec<KernelSpec>>),
}

#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub translation_invariant_in_space: bool,
    pub translation_invariant_in_time: bool,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind) -> Result<Self> {
        let (space_inv, time_inv) = match &kind {
            OperatorKind::Linear(k) => (k.xt_invariant, k.xt_invariant),
            OperatorKind::PucciPlus { n, sigma, lambda }
            | OperatorKind::PucciMinus { n, sigma, lambda } => {
                validate_order(*n, *sigma)?;
                if *lambda < 1.0 {
                    return Err(Error::parameter("ellipticity constant must be >= 1"));
                }
                (true, true)
            }
            OperatorKind::InfSup(rows) => {
                if rows.is_empty() || rows.iter().any(|r| r.is_empty()) {
                    return Err(Error::parameter("inf-sup index sets must be nonempty"));
                }
                let (n0, s0) = (rows[0][0].n, rows[0][0].sigma);
                for k in rows.iter().flatten() {
                    if k.n != n0 || (k.sigma - s0).abs() > 1e-14 {
                        return Err(Error::parameter(
                            "all inf-sup member kernels must share n and sigma",
                        ));
                    }
                }
                let inv = rows.iter().flatten().all(|k| k.xt_invariant);
                (inv, inv)
            }
        };
        Ok(OperatorSpec {
            kind,
            translation_invariant_in_space: space_inv,
            translation_invariant_in_time: time_inv,
        })
    }

    pub fn linear(kernel: KernelSpec) -> Result<Self> {
        OperatorSpec::new(OperatorKind::Linear(kernel))
    }

    pub fn pucci_plus(n: usize, sigma: f64, lambda: f64) -> Result<Self> {
        OperatorSpec::new(OperatorKind::PucciPlus { n, sigma, lambda })
    }

    pub fn pucci_minus(n: usize, sigma: f64, lambda: f64) -> Result<Self> {
        OperatorSpec::new(OperatorKind::PucciMinus { n, sigma, lambda })
    }

    pub fn inf_sup(rows: Vec<Vec<KernelSpec>>) -> Result<Self> {
        OperatorSpec::new(OperatorKind::InfSup(rows))
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            OperatorKind::Linear(k) => k.n,
            OperatorKind::PucciPlus { n, .. } | OperatorKind::PucciMinus { n, .. } => *n,
            OperatorKind::InfSup(rows) => rows[0][0].n,
        }
    }

    pub fn order(&self) -> f64 {
        match &self.kind {
            OperatorKind::Linear(k) => k.sigma,
            OperatorKind::PucciPlus { sigma, .. } | OperatorKind::PucciMinus { sigma, .. } => {
                *sigma
            }
            OperatorKind::InfSup(rows) => rows[0][0].sigma,
        }
    }

    pub fn lambda(&self) -> f64 {
        match &self.kind {
            OperatorKind::Linear(k) => k.lambda,
            OperatorKind::PucciPlus { lambda, .. } | OperatorKind::PucciMinus { lambda, .. } => {
                *lambda
            }
            OperatorKind::InfSup(rows) => rows
                .iter()
                .flatten()
                .fold(1.0f64, |m, k| m.max(k.lambda)),
        }
    }
}

/// Integrability weight `omega(y) = 1 / (1 + |y|^{n + sigma0})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightOmega {
    pub n: usize,
    pub sigma0: f64,
}

impl WeightOmega {
    pub fn new(n: usize, sigma0: f64) -> Result<Self> {
        validate_order(n, sigma0)?;
        Ok(WeightOmega { n, sigma0 })
    }

    pub fn eval(&self, y: &Point) -> f64 {
        1.0 / (1.0 + norm_n(y, self.n).powf(self.n as f64 + self.sigma0))
    }

    fn eval_radial(&self, r: f64) -> f64 {
        1.0 / (1.0 + r.powf(self.n as f64 + self.sigma0))
    }
}

/// Finite lattices over which membership predicates are sampled.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub xs: Vec<Point>,
    pub ts: Vec<f64>,
    /// Offsets, nonzero; evenness is checked on the pair `(+y, -y)`.
    pub ys: Vec<Point>,
    /// Relative slack allowed in the finite-difference gradient check,
    /// per unit of the y-lattice spacing.
    pub fd_slack_per_h: f64,
}

impl SamplePlan {
    /// 10-point lattices per axis in `x in [-1,1]^n`, `t in [-1,0]`,
    /// `y` radial/log lattice avoiding 0 (10^3 combined (x,t,y) points in 1-d).
    pub fn default_lattice(n: usize) -> Self {
        let axis: Vec<f64> = (0..10).map(|i| -1.0 + 2.0 * i as f64 / 9.0).collect();
        let xs: Vec<Point> = match n {
            1 => axis.iter().map(|&x| [x, 0.0]).collect(),
            _ => axis
                .iter()
                .flat_map(|&x| axis.iter().map(move |&y| [x, y]))
                .collect(),
        };
        let ts: Vec<f64> = (0..10).map(|i| -1.0 + i as f64 / 9.0).collect();
        let radii: Vec<f64> = (0..10).map(|i| 0.01 * 4f64.powi(i)).collect();
        let ys: Vec<Point> = match n {
            1 => radii.iter().map(|&r| [r, 0.0]).collect(),
            _ => radii
                .iter()
                .flat_map(|&r| {
                    (0..8).map(move |k| {
                        let th = std::f64::consts::PI * k as f64 / 4.0 + 0.1;
                        [r * th.cos(), r * th.sin()]
                    })
                })
                .collect(),
        };
        SamplePlan {
            xs,
            ts,
            ys,
            fd_slack_per_h: 10.0,
        }
    }
}

/// Outcome of a sampled membership check.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    /// Which class was checked ("L0" or "L1").
    pub kind: String,
    pub pass: bool,
    /// Largest amount by which a sampled value escapes the admissible range
    /// (0 when pass).
    pub worst_violation: f64,
    /// Lattice sizes {x, t, y}.
    pub lattice: [usize; 3],
    pub coeff_min: f64,
    pub coeff_max: f64,
    /// L1 check only: measured sup of |DK(y)| * |y|^{n+sigma+1}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_sup: Option<f64>,
}

/// Sampled check that `K` lies in the base ellipticity class: coefficient
/// bounds `1/Lambda <= a <= Lambda` and evenness `a(x,t,-y) = a(x,t,y)` over
/// the plan's lattices.
pub fn check_l0_membership(kernel: &KernelSpec, plan: &SamplePlan) -> MembershipReport {
    let (lo, hi) = (1.0 / kernel.lambda, kernel.lambda);
    let mut worst: f64 = 0.0;
    let mut cmin = f64::INFINITY;
    let mut cmax = f64::NEG_INFINITY;
    for x in &plan.xs {
        for &t in &plan.ts {
            for y in &plan.ys {
                let a = kernel.coeff(x, t, y);
                cmin = cmin.min(a);
                cmax = cmax.max(a);
                worst = worst.max(lo - a).max(a - hi);
                let yneg = [-y[0], -y[1]];
                worst = worst.max((kernel.coeff(x, t, &yneg) - a).abs());
            }
        }
    }
    MembershipReport {
        kind: "L0".into(),
        pass: worst == 0.0,
        worst_violation: worst,
        lattice: [plan.xs.len(), plan.ts.len(), plan.ys.len()],
        coeff_min: cmin,
        coeff_max: cmax,
        gradient_sup: None,
    }
}

/// Sampled check of the gradient-bounded subclass:
/// `|DK(y)| <= Lambda |y|^{-(n+sigma+1)}`, gradient approximated by central
/// differences with step `h_y = |y| / 100` and relative slack
/// `fd_slack_per_h * h_y`. Requires a space-time constant kernel.
pub fn check_l1_membership(kernel: &KernelSpec, plan: &SamplePlan) -> Result<MembershipReport> {
    if !kernel.xt_invariant {
        return Err(Error::precondition(
            "gradient class is defined for space-time constant kernels only",
        ));
    }
    let base = check_l0_membership(kernel, plan);
    let x0 = [0.0, 0.0];
    let mut worst = base.worst_violation;
    let mut grad_sup: f64 = 0.0;
    for y in &plan.ys {
        let r = norm_n(y, kernel.n);
        let h = r / 100.0;
        let mut grad_sq = 0.0;
        for axis in 0..kernel.n {
            let mut yp = *y;
            let mut ym = *y;
            yp[axis] += h;
            ym[axis] -= h;
            let d = (kernel.eval(&x0, 0.0, &yp) - kernel.eval(&x0, 0.0, &ym)) / (2.0 * h);
            grad_sq += d * d;
        }
        let scaled = grad_sq.sqrt() * r.powf(kernel.n as f64 + kernel.sigma + 1.0);
        grad_sup = grad_sup.max(scaled);
        let slack = plan.fd_slack_per_h * h;
        worst = worst.max(scaled - kernel.lambda * (1.0 + slack));
    }
    Ok(MembershipReport {
        kind: "L1".into(),
        pass: worst <= 0.0,
        worst_violation: worst.max(0.0),
        lattice: base.lattice,
        coeff_min: base.coeff_min,
        coeff_max: base.coeff_max,
        gradient_sup: Some(grad_sup),
    })
}

/// Weighted L1 norm of `u(., t)`: Simpson quadrature of `|u| * omega` over the
/// grid, plus the integral of the tail growth bound `M_tail |y|^gamma` against
/// `omega` outside the grid box (log-substituted Gauss quadrature with a
/// closed-form power remainder).
pub fn omega_l1_norm(u: &Field, t_idx: usize, omega: &WeightOmega) -> Result<f64> {
    let g = u.grid();
    let n = g.dim();
    if omega.n != n {
        return Err(Error::precondition("weight dimension does not match field"));
    }
    let tail = u.tail();
    if tail.m_tail > 0.0 && tail.gamma >= omega.sigma0 {
        return Err(Error::divergence(format!(
            "tail growth |y|^{} is not integrable against the weight (sigma0 = {})",
            tail.gamma, omega.sigma0
        )));
    }
    let m = g.nodes_per_axis();
    let w1 = simpson_weights(m);
    let slice = u.slice(t_idx);
    let mut grid_part = 0.0;
    match n {
        1 => {
            for (i, wi) in w1.iter().enumerate() {
                let p = [g.coord(i), 0.0];
                grid_part += wi * slice[i].abs() * omega.eval(&p);
            }
            grid_part *= g.spacing();
        }
        _ => {
            for j in 0..m {
                for i in 0..m {
                    let p = [g.coord(i), g.coord(j)];
                    grid_part += w1[i] * w1[j] * slice[i + j * m].abs() * omega.eval(&p);
                }
            }
            grid_part *= g.spacing() * g.spacing();
        }
    }

    // Tail: bound the square-complement region by the radial integral over
    // |y| > R together with the in-box corner deficit being part of the grid
    // quadrature already; we integrate the radial bound over |y| > R.
    let tail_part = if tail.m_tail == 0.0 {
        0.0
    } else {
        let r0 = g.extent();
        let gamma = tail.gamma;
        let surface = match n {
            1 => 2.0,
            _ => 2.0 * std::f64::consts::PI,
        };
        // substitute |y| = r0 * e^s: integrand r^{gamma + n - 1} omega(r) r ds
        let s_max = 30.0;
        let f = |s: f64| {
            let r: f64 = r0 * s.exp();
            r.powf(gamma + n as f64 - 1.0) * omega.eval_radial(r) * r
        };
        let core = integrate_gauss(f, 0.0, s_max, 600);
        // pure-power remainder beyond r0 * e^{s_max}
        let y_far = r0 * s_max.exp();
        let expo = omega.sigma0 - gamma;
        let remainder = y_far.powf(-expo) / expo;
        tail.m_tail * surface * (core + remainder)
    };
    Ok(grid_part + tail_part)
}

/// `sup` over the probe lattice of `omega(y - x) / omega(y)`; bounds the
/// weighted norm of a shifted function in terms of the unshifted one.
pub fn shift_ratio_bound(omega: &WeightOmega, x: &Point, probe: &[Point]) -> f64 {
    probe.iter().fold(1.0f64, |acc, y| {
        let shifted = [y[0] - x[0], y[1] - x[1]];
        acc.max(omega.eval(&shifted) / omega.eval(y))
    })
}

/// Dense probe lattice `|y_i| <= radius` with `per_axis` points per axis.
pub fn probe_lattice(n: usize, radius: f64, per_axis: usize) -> Vec<Point> {
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64)
        .collect();
    match n {
        1 => axis.iter().map(|&v| [v, 0.0]).collect(),
        _ => axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| [a, b]))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, Tail};

    #[test]
    fn fractional_kernel_prefactor() {
        let k = make_fractional_kernel(1, 1.0, 1.0, 1.0).unwrap();
        let y = [2.0, 0.0];
        // (2 - 1) * 1 / |y|^2
        assert!((k.eval(&[0.0, 0.0], 0.0, &y) - 0.25).abs() < 1e-15);

        let k = make_fractional_kernel(1, 1.999, 1.0, 1.0).unwrap();
        let v = k.eval(&[0.0, 0.0], 0.0, &[1.0, 0.0]);
        assert!((v - 0.001).abs() < 1e-15);
    }

    #[test]
    fn fractional_kernel_rejects_bad_parameters() {
        assert!(make_fractional_kernel(1, 2.0, 1.0, 1.0).is_err());
        assert!(make_fractional_kernel(1, -0.1, 1.0, 1.0).is_err());
        assert!(make_fractional_kernel(1, 1.0, 3.0, 2.0).is_err());
        assert!(make_fractional_kernel(1, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn l0_membership_samples() {
        let plan = SamplePlan::default_lattice(1);

        let k = make_fractional_kernel(1, 0.5, 2.0, 2.0).unwrap();
        let rep = check_l0_membership(&k, &plan);
        assert!(rep.pass);
        assert_eq!(rep.worst_violation, 0.0);

        // range [0.5, 1.5] within [1/2, 2]
        let k = KernelSpec::new(1, 0.5, 2.0, false, |x, _, _| 1.0 + 0.5 * x[0].sin()).unwrap();
        assert!(check_l0_membership(&k, &plan).pass);

        // constant 3 escapes Lambda = 2 by exactly 1
        let k = KernelSpec::new(1, 0.5, 2.0, true, |_, _, _| 3.0).unwrap();
        let rep = check_l0_membership(&k, &plan);
        assert!(!rep.pass);
        assert!((rep.worst_violation - 1.0).abs() < 1e-14);

        // odd part in y fails evenness
        let k = KernelSpec::new(1, 0.5, 2.0, true, |_, _, y| 1.0 + 0.1 * y[0].signum()).unwrap();
        assert!(!check_l0_membership(&k, &plan).pass);
    }

    #[test]
    fn l1_membership_gradient_bound() {
        let plan = SamplePlan::default_lattice(1);

        // |d/dy (2-sigma)/y^2| * y^3 = 2(2-sigma); with sigma = 1 need
        // Lambda >= 2
        let k = make_fractional_kernel(1, 1.0, 1.0, 2.0).unwrap();
        let rep = check_l1_membership(&k, &plan).unwrap();
        assert!(rep.pass, "worst = {}", rep.worst_violation);
        let sup = rep.gradient_sup.unwrap();
        assert!((sup - 2.0).abs() < 1e-3, "sup = {sup}");

        // oscillatory coefficient: gradient grows one order too fast near 0
        let k = KernelSpec::new(1, 1.0, 2.0, true, |_, _, y| {
            1.0 + 0.4 * (1.0 / y[0].abs()).sin()
        })
        .unwrap();
        assert!(!check_l1_membership(&k, &plan).unwrap().pass);

        // class containment needs translation invariance
        let k = KernelSpec::new(1, 1.0, 2.0, false, |x, _, _| 1.0 + 0.1 * x[0].sin()).unwrap();
        assert!(check_l1_membership(&k, &plan).is_err());
    }

    #[test]
    fn l1_pass_implies_l0_pass() {
        let plan = SamplePlan::default_lattice(1);
        let k = KernelSpec::new(1, 0.7, 2.0, true, |_, _, y| {
            1.0 + 0.3 * (1.0 + y[0] * y[0]).recip()
        })
        .unwrap();
        let l1 = check_l1_membership(&k, &plan).unwrap();
        if l1.pass {
            assert!(check_l0_membership(&k, &plan).pass);
        }
    }

    #[test]
    fn omega_norm_of_one_matches_arctan_integral() {
        let g = Grid::new(1, 0.025, 10.0).unwrap();
        let u = Field::snapshot(g, 0.0, Tail::power(1.0, 0.0), |_| 1.0).unwrap();
        let omega = WeightOmega::new(1, 1.0).unwrap();
        let v = omega_l1_norm(&u, 0, &omega).unwrap();
        assert!(
            (v - std::f64::consts::PI).abs() < 1e-6,
            "norm = {v}, err = {:e}",
            (v - std::f64::consts::PI).abs()
        );
    }

    #[test]
    fn omega_norm_zero_and_homogeneity() {
        let g = Grid::new(1, 0.125, 4.0).unwrap();
        let omega = WeightOmega::new(1, 1.0).unwrap();

        let z = Field::snapshot(g.clone(), 0.0, Tail::zero(), |_| 0.0).unwrap();
        assert_eq!(omega_l1_norm(&z, 0, &omega).unwrap(), 0.0);

        let u = Field::snapshot(g, 0.0, Tail::power(0.7, 0.3), |p| p[0].cos()).unwrap();
        let nu = omega_l1_norm(&u, 0, &omega).unwrap();
        let nu3 = omega_l1_norm(&u.scaled(-3.0), 0, &omega).unwrap();
        assert!((nu3 - 3.0 * nu).abs() < 1e-12 * nu3.max(1.0));
    }

    #[test]
    fn omega_norm_divergence_for_fast_tails() {
        let g = Grid::new(1, 0.125, 4.0).unwrap();
        let omega = WeightOmega::new(1, 0.5).unwrap();
        let u = Field::snapshot(g, 0.0, Tail::power(1.0, 1.2), |p| p[0].abs().powf(1.2)).unwrap();
        assert!(matches!(
            omega_l1_norm(&u, 0, &omega),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn shift_ratio_properties() {
        let omega = WeightOmega::new(1, 1.0).unwrap();
        let probe = probe_lattice(1, 100.0, 20001);
        assert_eq!(shift_ratio_bound(&omega, &[0.0, 0.0], &probe), 1.0);
        let b_plus = shift_ratio_bound(&omega, &[1.0, 0.0], &probe);
        let b_minus = shift_ratio_bound(&omega, &[-1.0, 0.0], &probe);
        assert!((b_plus - b_minus).abs() < 1e-12);
        // dense-scan oracle at ten times the resolution
        let dense = probe_lattice(1, 100.0, 200001);
        let oracle = shift_ratio_bound(&omega, &[1.0, 0.0], &dense);
        assert!((b_plus - oracle).abs() < 1e-3 * oracle);
    }

    #[test]
    fn infsup_spec_validation() {
        let k1 = make_fractional_kernel(1, 0.8, 1.0, 2.0).unwrap();
        let k2 = make_fractional_kernel(1, 0.8, 2.0, 2.0).unwrap();
        let op = OperatorSpec::inf_sup(vec![vec![k1.clone(), k2.clone()], vec![k1.clone()]]);
        assert!(op.is_ok());
        assert!(op.unwrap().translation_invariant_in_space);

        let k3 = make_fractional_kernel(1, 0.9, 1.0, 2.0).unwrap();
        assert!(OperatorSpec::inf_sup(vec![vec![k1.clone(), k3]]).is_err());
        assert!(OperatorSpec::inf_sup(vec![vec![k1], vec![]]).is_err());
        assert!(OperatorSpec::inf_sup(vec![]).is_err());
    }
}
