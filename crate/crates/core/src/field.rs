//! Grid-sampled fields on a space-time cylinder with an exterior tail model.
//!
//! A [`Field`] holds samples `u(x_i, t_j)` on a uniform spatial lattice over
//! `[-R_grid, R_grid]^n` (n = 1 or 2) and a uniform time lattice, plus a
//! [`Tail`] describing `u` beyond the grid. Evaluation between nodes uses
//! cubic interpolation; evaluation beyond `R_grid` uses the tail model.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::util::norm_n;

/// Maximum supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// A point in space; only the first `n` components are used.
pub type Point = [f64; MAX_DIM];

pub fn point_from(coords: &[f64]) -> Point {
    let mut p = [0.0; MAX_DIM];
    for (i, c) in coords.iter().take(MAX_DIM).enumerate() {
        p[i] = *c;
    }
    p
}

/// Uniform spatial lattice over `[-r_grid, r_grid]^n` with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
    r_grid: f64,
    /// nodes per axis (odd, node 0 at -r_grid, center at r_grid/h)
    m: usize,
}

impl Grid {
    pub fn new(n: usize, h: f64, r_grid: f64) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::parameter(format!("dimension {n} not in {{1, 2}}")));
        }
        if !(h > 0.0) {
            return Err(Error::parameter("grid spacing must be positive"));
        }
        if r_grid < 4.0 {
            return Err(Error::parameter(
                "r_grid must be >= 4 (unit ball plus collar)",
            ));
        }
        let half = (r_grid / h).round() as usize;
        if ((half as f64) * h - r_grid).abs() > 1e-9 * r_grid {
            return Err(Error::parameter("r_grid must be an integer multiple of h"));
        }
        Ok(Grid {
            n,
            h,
            r_grid,
            m: 2 * half + 1,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn extent(&self) -> f64 {
        self.r_grid
    }

    /// Nodes per axis.
    pub fn nodes_per_axis(&self) -> usize {
        self.m
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.r_grid + i as f64 * self.h
    }

    /// Flat index of the node with per-axis indices `idx`.
    pub fn flat(&self, idx: &[usize]) -> usize {
        match self.n {
            1 => idx[0],
            _ => idx[0] + idx[1] * self.m,
        }
    }

    /// Per-axis indices of flat index `k`.
    pub fn unflat(&self, k: usize) -> [usize; MAX_DIM] {
        match self.n {
            1 => [k, 0],
            _ => [k % self.m, k / self.m],
        }
    }

    /// Point coordinates of flat node `k`.
    pub fn node_point(&self, k: usize) -> Point {
        let idx = self.unflat(k);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.n {
            p[a] = self.coord(idx[a]);
        }
        p
    }

    /// True if `p` lies inside the grid box (strictly, with a half-cell slack
    /// so that boundary nodes still resolve on the grid).
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.n).all(|a| p[a].abs() <= self.r_grid + 1e-12)
    }

    /// Flat indices of nodes with `|x| < radius`.
    pub fn nodes_in_ball(&self, radius: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| norm_n(&self.node_point(k), self.n) < radius)
            .collect()
    }

    /// Snap `p` to a node index if it is grid-aligned, else `None`.
    pub fn aligned_node(&self, p: &Point) -> Option<usize> {
        let mut idx = [0usize; MAX_DIM];
        for a in 0..self.n {
            let f = (p[a] + self.r_grid) / self.h;
            let r = f.round();
            if (f - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.m {
                return None;
            }
            idx[a] = r as usize;
        }
        Some(self.flat(&idx))
    }
}

/// Behavior of `u` for `|y| > R_grid`.
#[derive(Clone)]
pub enum TailModel {
    /// `u = 0` outside the grid.
    Zero,
    /// Signed even power growth `u(y) = coef * |y|^gamma`.
    Power { coef: f64 },
    /// Explicit evaluation rule `u(y, t)`.
    Rule(Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for TailModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailModel::Zero => write!(f, "Zero"),
            TailModel::Power { coef } => write!(f, "Power {{ coef: {coef} }}"),
            TailModel::Rule(_) => write!(f, "Rule(..)"),
        }
    }
}

/// Tail model with its declared growth bound `|u(y)| <= m_tail * max(|y|^gamma, 1)`.
#[derive(Debug, Clone)]
pub struct Tail {
    pub gamma: f64,
    pub m_tail: f64,
    pub model: TailModel,
}

impl Tail {
    pub fn zero() -> Self {
        Tail {
            gamma: 0.0,
            m_tail: 0.0,
            model: TailModel::Zero,
        }
    }

    pub fn power(coef: f64, gamma: f64) -> Self {
        Tail {
            gamma,
            m_tail: coef.abs(),
            model: TailModel::Power { coef },
        }
    }

    pub fn rule(
        f: impl Fn(&Point, f64) -> f64 + Send + Sync + 'static,
        gamma: f64,
        m_tail: f64,
    ) -> Self {
        Tail {
            gamma,
            m_tail,
            model: TailModel::Rule(Arc::new(f)),
        }
    }

    pub fn value(&self, p: &Point, t: f64, n: usize) -> f64 {
        match &self.model {
            TailModel::Zero => 0.0,
            TailModel::Power { coef } => coef * norm_n(p, n).powf(self.gamma),
            TailModel::Rule(f) => f(p, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.model, TailModel::Zero)
    }
}

/// Grid samples of `u` on a space-time cylinder plus an exterior tail model.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    times: Vec<f64>,
    /// values[t * grid.len() + node]
    values: Vec<f64>,
    tail: Tail,
}

impl Field {
    /// Sample `f(x, t)` on the grid at the given times.
    pub fn from_fn(
        grid: Grid,
        times: Vec<f64>,
        tail: Tail,
        f: impl Fn(&Point, f64) -> f64,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::parameter("field needs at least one time slice"));
        }
        let npts = grid.len();
        let mut values = Vec::with_capacity(npts * times.len());
        for &t in &times {
            for k in 0..npts {
                let v = f(&grid.node_point(k), t);
                if !v.is_finite() {
                    return Err(Error::parameter(format!(
                        "non-finite sample at node {k}, t = {t}"
                    )));
                }
                values.push(v);
            }
        }
        Ok(Field {
            grid,
            times,
            values,
            tail,
        })
    }

    /// Single-time field sampled from a spatial rule.
    pub fn snapshot(grid: Grid, t: f64, tail: Tail, f: impl Fn(&Point) -> f64) -> Result<Self> {
        Field::from_fn(grid, vec![t], tail, |p, _| f(p))
    }

    pub fn from_values(grid: Grid, times: Vec<f64>, values: Vec<f64>, tail: Tail) -> Result<Self> {
        if values.len() != grid.len() * times.len() {
            return Err(Error::parameter("value buffer does not match grid x times"));
        }
        Ok(Field {
            grid,
            times,
            values,
            tail,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn set_tail(&mut self, tail: Tail) {
        self.tail = tail;
    }

    pub fn time(&self, t_idx: usize) -> f64 {
        self.times[t_idx]
    }

    pub fn set_time(&mut self, t_idx: usize, t: f64) {
        self.times[t_idx] = t;
    }

    /// Index of the lattice time closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        let mut best = 0;
        let mut dist = f64::INFINITY;
        for (j, &tj) in self.times.iter().enumerate() {
            let d = (tj - t).abs();
            if d < dist {
                dist = d;
                best = j;
            }
        }
        best
    }

    pub fn slice(&self, t_idx: usize) -> &[f64] {
        let npts = self.grid.len();
        &self.values[t_idx * npts..(t_idx + 1) * npts]
    }

    pub fn slice_mut(&mut self, t_idx: usize) -> &mut [f64] {
        let npts = self.grid.len();
        &mut self.values[t_idx * npts..(t_idx + 1) * npts]
    }

    /// Single-time copy of slice `t_idx` (tail shared).
    pub fn slice_field(&self, t_idx: usize) -> Field {
        Field {
            grid: self.grid.clone(),
            times: vec![self.times[t_idx]],
            values: self.slice(t_idx).to_vec(),
            tail: self.tail.clone(),
        }
    }

    pub fn value_node(&self, node: usize, t_idx: usize) -> f64 {
        self.values[t_idx * self.grid.len() + node]
    }

    /// Evaluate `u(p, t_j)`: direct lookup on aligned nodes, cubic
    /// interpolation inside the grid, tail model beyond it.
    pub fn value_at(&self, p: &Point, t_idx: usize) -> f64 {
        if !self.grid.contains(p) {
            return self.tail.value(p, self.times[t_idx], self.grid.n);
        }
        if let Some(k) = self.grid.aligned_node(p) {
            return self.value_node(k, t_idx);
        }
        self.interpolate(p, t_idx)
    }

    fn interpolate(&self, p: &Point, t_idx: usize) -> f64 {
        let g = &self.grid;
        let slice = self.slice(t_idx);
        match g.n {
            1 => {
                let (i0, w) = cubic_stencil(g, p[0]);
                (0..4).map(|k| w[k] * slice[i0 + k]).sum()
            }
            _ => {
                let (i0, wx) = cubic_stencil(g, p[0]);
                let (j0, wy) = cubic_stencil(g, p[1]);
                let mut total = 0.0;
                for b in 0..4 {
                    let row = (j0 + b) * g.m;
                    let mut acc = 0.0;
                    for a in 0..4 {
                        acc += wx[a] * slice[row + i0 + a];
                    }
                    total += wy[b] * acc;
                }
                total
            }
        }
    }

    /// Max of |u| over all nodes and times.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodewise difference `self - other`. Grids and times must match and the
    /// tails must combine into one of the supported models.
    pub fn try_sub(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid || self.times != other.times {
            return Err(Error::precondition(
                "field difference needs matching grids and time lattices",
            ));
        }
        let tail = match (&self.tail.model, &other.tail.model) {
            (TailModel::Zero, TailModel::Zero) => Tail::zero(),
            (TailModel::Power { coef: a }, TailModel::Power { coef: b })
                if (self.tail.gamma - other.tail.gamma).abs() < 1e-14 =>
            {
                Tail::power(a - b, self.tail.gamma)
            }
            (TailModel::Power { coef }, TailModel::Zero) => {
                Tail::power(*coef, self.tail.gamma)
            }
            (TailModel::Zero, TailModel::Power { coef }) => {
                Tail::power(-coef, other.tail.gamma)
            }
            _ => {
                return Err(Error::precondition(
                    "tail models do not support subtraction",
                ))
            }
        };
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            times: self.times.clone(),
            values,
            tail,
        })
    }

    /// Scale all values (and the tail) by `c`.
    pub fn scaled(&self, c: f64) -> Field {
        let tail = match &self.tail.model {
            TailModel::Zero => Tail::zero(),
            TailModel::Power { coef } => Tail::power(c * coef, self.tail.gamma),
            TailModel::Rule(f) => {
                let f = f.clone();
                Tail {
                    gamma: self.tail.gamma,
                    m_tail: c.abs() * self.tail.m_tail,
                    model: TailModel::Rule(Arc::new(move |p, t| c * f(p, t))),
                }
            }
        };
        Field {
            grid: self.grid.clone(),
            times: self.times.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            tail,
        }
    }
}

/// 4-node cubic Lagrange stencil along one axis: returns the first stencil
/// index and the four weights. Interior cells reproduce Catmull-Rom.
fn cubic_stencil(g: &Grid, x: f64) -> (usize, [f64; 4]) {
    let f = (x + g.r_grid) / g.h;
    let cell = (f.floor() as isize).clamp(0, g.m as isize - 2);
    let i0 = (cell - 1).clamp(0, g.m as isize - 4) as usize;
    // local coordinate relative to the stencil origin, in units of h
    let s = f - i0 as f64;
    let mut w = [0.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        let mut acc = 1.0;
        for j in 0..4 {
            if j != k {
                acc *= (s - j as f64) / (k as f64 - j as f64);
            }
        }
        *wk = acc;
    }
    (i0, w)
}
