//! Moduli of continuity as piecewise-linear tables and the two composition
//! formulas that propagate a boundary modulus into the domain: the lateral
//! one, built from rescaled lateral barriers, and the initial-time one, built
//! from the bump barrier. Both are infima over the barrier radius `r`.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::util::log_space;

pub const KNOTS: usize = 256;
const R_SAMPLES: usize = 512;
const R_MIN: f64 = 1e-4;

/// A modulus of continuity: nondecreasing, `rho(0) = 0`, tabulated at
/// log-spaced knots and interpolated linearly in between.
#[derive(Debug, Clone)]
pub struct Modulus {
    ds: Vec<f64>,
    vals: Vec<f64>,
}

impl Modulus {
    /// Tabulates `f` at `KNOTS` log-spaced points of `(d_min, d_max]`,
    /// enforcing monotonicity by a running maximum.
    pub fn from_fn(d_min: f64, d_max: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(d_min > 0.0 && d_max > d_min) {
            return Err(Error::parameter("modulus range must satisfy 0 < d_min < d_max"));
        }
        let ds = log_space(d_min, d_max, KNOTS);
        let mut vals = Vec::with_capacity(KNOTS);
        let mut run = 0.0f64;
        for &d in &ds {
            let v = f(d);
            if !v.is_finite() || v < -1e-12 {
                return Err(Error::parameter(format!("modulus value {v} at d = {d}")));
            }
            run = run.max(v.max(0.0));
            vals.push(run);
        }
        Ok(Modulus { ds, vals })
    }

    pub fn identity(d_max: f64) -> Self {
        Modulus::from_fn(1e-6, d_max, |d| d).unwrap()
    }

    pub fn holder(c: f64, alpha: f64, d_max: f64) -> Result<Self> {
        if !(c >= 0.0 && alpha > 0.0) {
            return Err(Error::parameter("holder modulus needs c >= 0, alpha > 0"));
        }
        Modulus::from_fn(1e-6, d_max, |d| c * d.powf(alpha))
    }

    pub fn zero(d_max: f64) -> Self {
        Modulus::from_fn(1e-6, d_max, |_| 0.0).unwrap()
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ds.iter().copied().zip(self.vals.iter().copied())
    }

    /// Piecewise-linear evaluation; below the first knot the table is
    /// interpolated towards `(0, 0)`, beyond the last it is clamped.
    pub fn eval(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return 0.0;
        }
        if d <= self.ds[0] {
            return self.vals[0] * d / self.ds[0];
        }
        if d >= *self.ds.last().unwrap() {
            return *self.vals.last().unwrap();
        }
        let i = self.ds.partition_point(|&x| x < d);
        let (d0, d1) = (self.ds[i - 1], self.ds[i]);
        let w = (d - d0) / (d1 - d0);
        self.vals[i - 1] * (1.0 - w) + self.vals[i] * w
    }

    pub fn is_monotone(&self) -> bool {
        self.vals.windows(2).all(|w| w[1] >= w[0] - 1e-15)
    }

    /// Two-column CSV `d,rho` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,rho\n");
        for (d, v) in self.knots() {
            out.push_str(&format!("{d:.12e},{v:.12e}\n"));
        }
        out
    }
}

/// Minimum of `f` over the standard log-spaced `r` lattice in
/// `(R_MIN, 1)`, sharpened by ternary search between the neighbors of the
/// lattice minimizer.
fn lattice_inf(f: impl Fn(f64) -> f64) -> f64 {
    let rs = log_space(R_MIN, 1.0 - 1e-9, R_SAMPLES);
    let mut best = f64::INFINITY;
    let mut best_i = 0;
    for (i, &r) in rs.iter().enumerate() {
        let v = f(r);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = rs[best_i.saturating_sub(1)];
    let mut hi = rs[(best_i + 1).min(rs.len() - 1)];
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.min(f(0.5 * (lo + hi)))
}

/// Modulus propagated from the lateral boundary:
/// `rho_bar(d) = inf_r [ rho(3r v kappa r^{sigma0}) + 2 sup_u rho0(d / r^2) ]`.
pub fn compose_lateral_modulus(
    rho: &Modulus,
    rho0: &Modulus,
    kappa: f64,
    sigma0: f64,
    sup_u: f64,
) -> Result<Modulus> {
    if !(kappa > 0.0 && sigma0 > 0.0 && sup_u >= 0.0) {
        return Err(Error::parameter("need kappa > 0, sigma0 > 0, sup_u >= 0"));
    }
    Modulus::from_fn(1e-6, 2.0, |d| {
        lattice_inf(|r| {
            let reach = (3.0 * r).max(kappa * r.powf(sigma0));
            rho.eval(reach) + 2.0 * sup_u * rho0.eval(d / (r * r))
        })
    })
}

/// Modulus propagated from the initial slice:
/// `rho_bar(d) = inf_r [ rho(r) + 2 sup_u (rho0(d / r^2) + d / r) ]`.
pub fn compose_initial_modulus(rho: &Modulus, rho0: &Modulus, sup_u: f64) -> Result<Modulus> {
    if sup_u < 0.0 {
        return Err(Error::parameter("sup_u must be nonnegative"));
    }
    Modulus::from_fn(1e-6, 2.0, |d| {
        lattice_inf(|r| rho.eval(r) + 2.0 * sup_u * (rho0.eval(d / (r * r)) + d / r))
    })
}

/// Empirical sharp modulus of a solved trajectory: for each dyadic `d`, the
/// largest `|u(x,t) - u(y,s)|` over sampled node pairs with
/// `|x - y| v |t - s| <= d` and `x` inside the domain ball.
pub fn measure_boundary_modulus(u: &Field, radius: f64) -> Result<Modulus> {
    let grid = u.grid();
    let n = grid.dim();
    // subsample nodes and times so the pair set stays ~10^6
    let inner = thin(&grid.nodes_in_ball(radius), 48);
    let all = thin(&(0..grid.len()).collect::<Vec<_>>(), 96);
    let tn = u.times().len();
    let t_ids = thin(&(0..tn).collect::<Vec<_>>(), 24);
    if inner.is_empty() || t_ids.is_empty() {
        return Err(Error::precondition("trajectory too coarse to sample"));
    }

    // osc[j] tracks the largest oscillation among pairs separated by at
    // most 2^{-j}; a pair with separation s contributes to every d >= s
    let d_top = 2.0f64;
    let levels = 24usize;
    let mut osc = vec![0.0f64; levels];
    for &ti in &t_ids {
        let t = u.times()[ti];
        for &tj in &t_ids {
            let s = u.times()[tj];
            let dt = (t - s).abs();
            if dt > d_top {
                continue;
            }
            for &a in &inner {
                let pa = grid.node_point(a);
                let va = u.value_node(a, ti);
                for &b in &all {
                    if a == b && ti == tj {
                        continue;
                    }
                    let pb = grid.node_point(b);
                    let mut dx = 0.0f64;
                    for k in 0..n {
                        dx += (pa[k] - pb[k]) * (pa[k] - pb[k]);
                    }
                    let sep = dx.sqrt().max(dt);
                    if sep > d_top {
                        continue;
                    }
                    let o = (va - u.value_node(b, tj)).abs();
                    // the coarsest level whose d still dominates sep
                    let j = ((d_top / sep).log2().floor() as usize).min(levels - 1);
                    if o > osc[j] {
                        osc[j] = o;
                    }
                }
            }
        }
    }
    // cumulative from fine separations up
    for j in (0..levels - 1).rev() {
        osc[j] = osc[j].max(osc[j + 1]);
    }
    let d_of = |d: f64| -> f64 {
        if d >= d_top {
            return osc[0];
        }
        let j = ((d_top / d).log2().ceil() as usize).min(levels - 1);
        osc[j]
    };
    Modulus::from_fn(d_top * 0.5f64.powi(levels as i32 - 1), d_top, d_of)
}

fn thin(ids: &[usize], cap: usize) -> Vec<usize> {
    if ids.len() <= cap {
        return ids.to_vec();
    }
    let stride = ids.len().div_ceil(cap);
    ids.iter().step_by(stride).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, Tail};

    #[test]
    fn table_round_trip_and_monotone() {
        let m = Modulus::holder(2.0, 0.5, 4.0).unwrap();
        assert!(m.is_monotone());
        assert_eq!(m.eval(0.0), 0.0);
        for &d in &[0.01f64, 0.3, 1.7] {
            assert!((m.eval(d) - 2.0 * d.sqrt()).abs() < 1e-3 * (1.0 + 2.0 * d.sqrt()));
        }
        // clamped past the last knot
        assert!((m.eval(100.0) - m.eval(4.0)).abs() < 1e-12);
        let csv = m.to_csv();
        assert!(csv.starts_with("d,rho\n"));
        assert_eq!(csv.lines().count(), KNOTS + 1);
    }

    #[test]
    fn lateral_composition_vanishes_without_interior_mass() {
        let rho = Modulus::identity(2.0);
        let rho0 = Modulus::identity(2.0);
        let out = compose_lateral_modulus(&rho, &rho0, 1.0, 1.0, 0.0).unwrap();
        // sup_u = 0: the infimum over r drives the first term to rho(0+) = 0
        for (_, v) in out.knots() {
            assert!(v < 1e-3, "expected vanishing table, got {v}");
        }
    }

    #[test]
    fn lateral_composition_matches_dense_scan() {
        let rho = Modulus::identity(2.0);
        let rho0 = Modulus::identity(2.0);
        let out = compose_lateral_modulus(&rho, &rho0, 1.0, 1.0, 1.0).unwrap();
        // compare at table knots so only the infimum itself is under test
        for (d, ours) in out.knots().step_by(37) {
            let dense = log_space(R_MIN, 1.0 - 1e-9, 100_000)
                .into_iter()
                .map(|r| {
                    let reach = (3.0 * r).max(r);
                    rho.eval(reach) + 2.0 * rho0.eval(d / (r * r))
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                (ours - dense).abs() < 1e-6 * (1.0 + dense),
                "d = {d}: ours = {ours}, dense = {dense}"
            );
        }
    }

    #[test]
    fn initial_composition_matches_dense_scan() {
        let rho = Modulus::identity(2.0);
        let rho0 = Modulus::identity(2.0);
        let out = compose_initial_modulus(&rho, &rho0, 1.0).unwrap();
        for (d, ours) in out.knots().step_by(51) {
            let dense = log_space(R_MIN, 1.0 - 1e-9, 100_000)
                .into_iter()
                .map(|r| rho.eval(r) + 2.0 * (rho0.eval(d / (r * r)) + d / r))
                .fold(f64::INFINITY, f64::min);
            assert!(
                (ours - dense).abs() < 1e-6 * (1.0 + dense),
                "d = {d}: ours = {ours}, dense = {dense}"
            );
        }
        assert!(out.is_monotone());
        let zero = compose_initial_modulus(&rho, &rho0, 0.0).unwrap();
        assert!(zero.eval(1.0) < 1e-3);
    }

    #[test]
    fn infimum_never_exceeds_sampled_values() {
        let rho = Modulus::holder(1.0, 0.5, 2.0).unwrap();
        let rho0 = Modulus::identity(2.0);
        let out = compose_lateral_modulus(&rho, &rho0, 0.7, 0.5, 2.0).unwrap();
        for &d in &[0.01f64, 0.25] {
            for &r in &[0.01f64, 0.1, 0.9] {
                let bound = rho.eval((3.0 * r).max(0.7 * r.powf(0.5))) + 4.0 * rho0.eval(d / (r * r));
                assert!(out.eval(d) <= bound + 1e-9);
            }
        }
    }

    #[test]
    fn empirical_modulus_of_constant_is_zero() {
        let grid = Grid::new(1, 0.125, 4.0).unwrap();
        let u = Field::from_fn(grid, vec![-1.0, -0.5, 0.0], Tail::zero(), |_, _| 3.0).unwrap();
        let m = measure_boundary_modulus(&u, 1.0).unwrap();
        for (_, v) in m.knots() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn empirical_modulus_tracks_lipschitz_field() {
        let grid = Grid::new(1, 0.0625, 4.0).unwrap();
        let u = Field::from_fn(grid, vec![-1.0, -0.5, 0.0], Tail::zero(), |p, _| p[0]).unwrap();
        let m = measure_boundary_modulus(&u, 1.0).unwrap();
        assert!(m.is_monotone());
        // at separation d the sharp oscillation of x |-> x is exactly d
        // (up to node subsampling); never above, not far below
        for &d in &[0.25f64, 0.5, 1.0] {
            let v = m.eval(d);
            assert!(v <= d + 1e-12, "d = {d}: v = {v}");
            assert!(v >= 0.5 * d, "d = {d}: v = {v}");
        }
    }
}
