//! Barrier candidates and their numerical verification. A lateral barrier is
//! a nonnegative supersolution of `psi_t - M+ psi >= 0` outside the unit
//! ball that vanishes on `B_1 x {0}` and exceeds 1 away from
//! `B_2 x [-kappa, 0]`; rescaled copies of it propagate boundary moduli of
//! continuity into the domain. The bump barrier plays the same role for the
//! initial slice.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::pucci_plus;
use crate::field::{Field, Grid, Point, Tail};
use crate::quad::Scheme;
use crate::util::{log_space, norm_n};

pub type BarrierRule = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Lateral,
    Bump,
}

#[derive(Clone)]
pub struct BarrierCandidate {
    pub rule: BarrierRule,
    pub kappa: f64,
    pub provenance: Provenance,
}

impl BarrierCandidate {
    pub fn new(
        rule: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        kappa: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::parameter("kappa must be positive"));
        }
        Ok(BarrierCandidate {
            rule: Arc::new(rule),
            kappa,
            provenance,
        })
    }

    pub fn eval(&self, p: &Point, t: f64) -> f64 {
        (self.rule)(p, t)
    }

    /// Same barrier scaled by `c > 0` (used by the homogeneity property).
    pub fn scaled(&self, c: f64) -> BarrierCandidate {
        let rule = self.rule.clone();
        BarrierCandidate {
            rule: Arc::new(move |p, t| c * rule(p, t)),
            kappa: self.kappa,
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionReport {
    pub pass: bool,
    /// Signed residual; negative means violated by that amount.
    pub worst_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierReport {
    /// (i) vanishes on the closed unit ball at the final time
    pub zero_on_unit_ball: ConditionReport,
    /// (ii) discrete supersolution outside the unit ball
    pub supersolution_outside: ConditionReport,
    /// (iii) at least 1 outside `B_2 x [-kappa, 0]`
    pub exceeds_one_far: ConditionReport,
    pub kappa: f64,
    pub pass: bool,
}

/// Checks the three lateral-barrier conditions on `grid` (which must cover
/// `B_4`), with the extremal operator of order `sigma0` and ellipticity
/// `lambda`. The supersolution residual uses the singular quadrature plus a
/// backward time difference and is accepted down to `-tol`.
pub fn verify_lateral_barrier(
    cand: &BarrierCandidate,
    sigma0: f64,
    lambda: f64,
    grid: &Grid,
    tol: f64,
) -> Result<BarrierReport> {
    if grid.extent() < 4.0 {
        return Err(Error::precondition("grid must cover B_4"));
    }
    let n = grid.dim();
    let scheme = Scheme::with_defaults(n, sigma0, grid.spacing())?;
    let kappa = cand.kappa;

    // (i) psi = 0 on B_1 x {0}
    let mut worst_zero = 0.0f64;
    for k in grid.nodes_in_ball(1.0) {
        let v = cand.eval(&grid.node_point(k), 0.0).abs();
        worst_zero = worst_zero.max(v);
    }
    let zero_on_unit_ball = ConditionReport {
        pass: worst_zero <= 1e-9,
        worst_residual: -worst_zero,
    };

    // (ii) psi_t - M+ psi >= -tol outside B_1
    let ts = [0.0, -0.25 * kappa, -kappa, -2.0 * kappa];
    let dt_b = 1e-4 * kappa.min(1.0);
    let mut worst_super = f64::INFINITY;
    for &t in &ts {
        let rule = cand.rule.clone();
        let tail = Tail::rule(move |p, _| rule(p, t), 0.0, 1.0);
        let slice = Field::snapshot(grid.clone(), t, tail, |p| cand.eval(p, t))?;
        for k in 0..grid.len() {
            let p = grid.node_point(k);
            let r = norm_n(&p, n);
            if r <= 1.0 {
                continue;
            }
            let psi_t = (cand.eval(&p, t) - cand.eval(&p, t - dt_b)) / dt_b;
            let residual = psi_t - pucci_plus(&slice, &p, 0, sigma0, lambda, &scheme)?;
            worst_super = worst_super.min(residual);
        }
    }
    let supersolution_outside = ConditionReport {
        pass: worst_super >= -tol,
        worst_residual: worst_super,
    };

    // (iii) psi >= 1 outside B_2 x [-kappa, 0]
    let mut worst_far = f64::INFINITY;
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        let outside_ball = norm_n(&p, n) > 2.0;
        for &t in &[0.0, -0.5 * kappa, -kappa, -1.05 * kappa, -2.0 * kappa] {
            if outside_ball || t < -kappa {
                worst_far = worst_far.min(cand.eval(&p, t) - 1.0);
            }
        }
    }
    let exceeds_one_far = ConditionReport {
        pass: worst_far >= -1e-9,
        worst_residual: worst_far,
    };

    Ok(BarrierReport {
        zero_on_unit_ball,
        supersolution_outside,
        exceeds_one_far,
        kappa,
        pass: zero_on_unit_ball.pass && supersolution_outside.pass && exceeds_one_far.pass,
    })
}

/// The parametric lateral family
/// `psi(x, t) = min(1, c ((|x| - 1)+)^{sigma0 / 2}) - c_t t`,
/// with the smallest time depth `kappa = 1 / c_t` making condition (iii)
/// hold at the center.
pub fn lateral_candidate(c: f64, c_t: f64, sigma0: f64, n: usize) -> Result<BarrierCandidate> {
    if !(c > 0.0 && c_t > 0.0 && sigma0 > 0.0) {
        return Err(Error::parameter("need c, c_t, sigma0 > 0"));
    }
    BarrierCandidate::new(
        move |p: &Point, t: f64| {
            let d = (norm_n(p, n) - 1.0).max(0.0);
            (c * d.powf(0.5 * sigma0)).min(1.0) - c_t * t
        },
        1.0 / c_t,
        Provenance::Lateral,
    )
}

/// Grid search over `(c, c_t)` in `[0.1, 10]^2`; returns the first passing
/// triple `(c, c_t, kappa)` with its candidate and report.
pub fn search_lateral_candidate(
    sigma0: f64,
    lambda: f64,
    grid: &Grid,
    tol: f64,
) -> Result<(f64, f64, BarrierCandidate, BarrierReport)> {
    let lattice = log_space(0.1, 10.0, 10);
    for &c in &lattice {
        for &c_t in &lattice {
            let cand = lateral_candidate(c, c_t, sigma0, grid.dim())?;
            let report = verify_lateral_barrier(&cand, sigma0, lambda, grid, tol)?;
            if report.pass {
                return Ok((c, c_t, cand, report));
            }
        }
    }
    Err(Error::precondition(format!(
        "no lateral barrier in the (c, c_t) search box at sigma0 = {sigma0}, lambda = {lambda}"
    )))
}

/// Builds the initial-slice barrier `psi(y, s) = b(y) + |M+ b|_inf s` from a
/// bump profile `b` with `b in [0,1]`, `b(0) = 0` and `b = 1` outside `B_1`;
/// the sup norm is a grid maximization of order `sigma`. Returns the
/// candidate and the measured norm (the slope of `s -> psi(y, s)`).
pub fn bump_barrier(
    b: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    sigma: f64,
    lambda: f64,
    grid: &Grid,
) -> Result<(BarrierCandidate, f64)> {
    let n = grid.dim();
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        let v = b(&p);
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::precondition(format!("bump out of [0, 1] at {p:?}: {v}")));
        }
        if norm_n(&p, n) >= 1.0 && (v - 1.0).abs() > 1e-9 {
            return Err(Error::precondition("supp(1 - b) must be B_1"));
        }
    }
    if b(&[0.0; 2]).abs() > 1e-12 {
        return Err(Error::precondition("bump must vanish at the origin"));
    }
    let b = Arc::new(b);
    let scheme = Scheme::with_defaults(n, sigma, grid.spacing())?;
    let b_tail = b.clone();
    let slice = Field::snapshot(
        grid.clone(),
        0.0,
        Tail::rule(move |p, _| b_tail(p), 0.0, 1.0),
        |p| b(p),
    )?;
    let mut norm = 0.0f64;
    for k in 0..grid.len() {
        let p = grid.node_point(k);
        norm = norm.max(pucci_plus(&slice, &p, 0, sigma, lambda, &scheme)?.abs());
    }
    let cand = BarrierCandidate::new(move |p: &Point, s: f64| b(p) + norm * s, 1.0 / norm.max(1e-12), Provenance::Bump)?;
    Ok((cand, norm))
}

/// Residual `psi_t - M+ psi` of a bump candidate over the grid at `s >= 0`;
/// nonnegative up to quadrature tolerance by construction.
pub fn bump_residual(
    cand: &BarrierCandidate,
    sigma: f64,
    lambda: f64,
    grid: &Grid,
) -> Result<ConditionReport> {
    let scheme = Scheme::with_defaults(grid.dim(), sigma, grid.spacing())?;
    let mut worst = f64::INFINITY;
    for &s in &[0.0, 0.5, 1.0] {
        let rule = cand.rule.clone();
        let tail = Tail::rule(move |p, _| rule(p, s), 0.0, 1.0);
        let slice = Field::snapshot(grid.clone(), s, tail, |p| cand.eval(p, s))?;
        let dt_b = 1e-6;
        for k in 0..grid.len() {
            let p = grid.node_point(k);
            let psi_t = (cand.eval(&p, s) - cand.eval(&p, s - dt_b)) / dt_b;
            worst = worst.min(psi_t - pucci_plus(&slice, &p, 0, sigma, lambda, &scheme)?);
        }
    }
    Ok(ConditionReport {
        pass: worst >= -1e-9,
        worst_residual: worst,
    })
}
