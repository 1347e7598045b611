//! Evaluation of second differences and of linear, extremal (Pucci) and
//! inf-sup operators through the piecewise quadrature of [`crate::quad`].
//!
//! Every operator is a combination of the same quadrature pieces: a linear
//! operator weights piece values by its coefficient, the extremal operators
//! by `Lambda z+ - Lambda^{-1} z-` applied per piece, and inf-sup operators
//! take min/max of linear combinations. Because the pieces are shared, the
//! duality `M+(-u) = -M-(u)` and the ellipticity sandwich hold exactly at the
//! discrete level.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Field, Point, Tail, TailModel, MAX_DIM};
use crate::kernel::{KernelSpec, OperatorKind, OperatorSpec};
use crate::quad::{PieceId, Scheme, C2_W1, C2_W2};

/// `delta(u, x, t; y) = u(x+y, t) + u(x-y, t) - 2 u(x, t)`.
pub fn second_difference(u: &Field, x: &Point, t_idx: usize, y: &Point) -> f64 {
    let plus = [x[0] + y[0], x[1] + y[1]];
    let minus = [x[0] - y[0], x[1] - y[1]];
    u.value_at(&plus, t_idx) + u.value_at(&minus, t_idx) - 2.0 * u.value_at(x, t_idx)
}

/// Samples `u(x + y)`; the optional offset gives `y` in units of the scheme
/// spacing when `y` is a lattice offset (fast paths key on it).
pub(crate) type Sampler<'a> = &'a mut dyn FnMut(&Point, Option<[i32; 2]>) -> f64;

/// Drive the quadrature: compute every piece value `zeta` (a linear
/// functional of the sampled field) and hand it to `piece` in a stable order.
pub(crate) fn for_each_piece(
    s: &Scheme,
    tail: &Tail,
    u0: f64,
    sample: Sampler,
    piece: &mut dyn FnMut(PieceId, f64),
) -> Result<()> {
    // near field: per-axis curvature fit from second differences at h and 2h
    let mut c2 = [0.0f64; MAX_DIM];
    let inv_h2 = 1.0 / (s.h * s.h);
    for axis in 0..s.n {
        let mut probe = |k: i32| {
            let mut y = [0.0; MAX_DIM];
            y[axis] = k as f64 * s.h;
            let mut off = [0i32; 2];
            off[axis] = k;
            sample(&y, Some(off))
        };
        let d1 = probe(1) + probe(-1) - 2.0 * u0;
        let d2 = probe(2) + probe(-2) - 2.0 * u0;
        c2[axis] = (C2_W1 * d1 + C2_W2 * d2) * inv_h2;
        piece(PieceId::Axis(axis), c2[axis] * s.near_axis_mass);
    }

    // mid field: half-lattice nodes, with 1-d cell compensation through c2
    for (i, node) in s.nodes.iter().enumerate() {
        let y_minus = [-node.y[0], -node.y[1]];
        let off_minus = [-node.off[0], -node.off[1]];
        let delta =
            sample(&node.y, Some(node.off)) + sample(&y_minus, Some(off_minus)) - 2.0 * u0;
        let mut zeta = node.w * delta;
        if node.z2 != 0.0 {
            zeta += node.z2 * c2[0];
        }
        piece(PieceId::Node(i), zeta);
    }

    // far field
    match &tail.model {
        TailModel::Zero => piece(PieceId::Far, -2.0 * u0 * s.t0_cut),
        TailModel::Power { coef } => {
            let grown = if *coef == 0.0 {
                0.0
            } else {
                2.0 * coef * s.t_gamma_cut(tail.gamma)?
            };
            piece(PieceId::Far, grown - 2.0 * u0 * s.t0_cut);
        }
        TailModel::Rule(_) => {
            for (i, shell) in s.shells.iter().enumerate() {
                let y_minus = [-shell.y[0], -shell.y[1]];
                let delta = sample(&shell.y, None) + sample(&y_minus, None) - 2.0 * u0;
                piece(PieceId::Shell(i), shell.w * delta);
            }
            piece(PieceId::Far, -2.0 * u0 * s.t0_stop);
        }
    }
    Ok(())
}

/// Flat index of a piece in the stable enumeration order.
pub(crate) fn flat_piece(s: &Scheme, id: PieceId) -> usize {
    let n_nodes = s.nodes.len();
    match id {
        PieceId::Axis(a) => a,
        PieceId::Node(i) => s.n + i,
        PieceId::Far => s.n + n_nodes,
        PieceId::Shell(i) => s.n + n_nodes + 1 + i,
    }
}

fn check_field(s: &Scheme, u: &Field) -> Result<()> {
    if u.grid().dim() != s.n {
        return Err(Error::precondition(
            "scheme and field dimensions do not match",
        ));
    }
    Ok(())
}

fn check_order(s: &Scheme, sigma: f64) -> Result<()> {
    if (sigma - s.sigma).abs() > 1e-12 {
        return Err(Error::precondition(format!(
            "scheme built for order {}, operator has order {sigma}",
            s.sigma
        )));
    }
    Ok(())
}

fn field_sampler<'a>(u: &'a Field, x: &'a Point, t_idx: usize) -> impl FnMut(&Point, Option<[i32; 2]>) -> f64 + 'a {
    move |y: &Point, _off| u.value_at(&[x[0] + y[0], x[1] + y[1]], t_idx)
}

/// Extremal weighting `Lambda z+ - Lambda^{-1} z-` (plus variant).
#[inline]
pub fn extremal_plus(z: f64, lambda: f64) -> f64 {
    if z >= 0.0 {
        lambda * z
    } else {
        z / lambda
    }
}

/// Extremal weighting `Lambda^{-1} z+ - Lambda z-` (minus variant).
#[inline]
pub fn extremal_minus(z: f64, lambda: f64) -> f64 {
    if z >= 0.0 {
        z / lambda
    } else {
        lambda * z
    }
}

/// `L_K u(x, t)` by singular quadrature.
pub fn linear_apply(
    kernel: &KernelSpec,
    u: &Field,
    x: &Point,
    t_idx: usize,
    s: &Scheme,
) -> Result<f64> {
    check_field(s, u)?;
    check_order(s, kernel.sigma)?;
    let t = u.time(t_idx);
    let u0 = u.value_at(x, t_idx);
    let mut sample = field_sampler(u, x, t_idx);
    let mut acc = 0.0;
    for_each_piece(s, u.tail(), u0, &mut sample, &mut |id, zeta| {
        acc += kernel.coeff(x, t, &s.rep_point(id)) * zeta;
    })?;
    Ok(acc)
}

/// Pucci maximal operator `M+ u(x, t)` over the class with constants
/// `(sigma, lambda)`.
pub fn pucci_plus(
    u: &Field,
    x: &Point,
    t_idx: usize,
    sigma: f64,
    lambda: f64,
    s: &Scheme,
) -> Result<f64> {
    check_field(s, u)?;
    check_order(s, sigma)?;
    let u0 = u.value_at(x, t_idx);
    let mut sample = field_sampler(u, x, t_idx);
    let mut acc = 0.0;
    for_each_piece(s, u.tail(), u0, &mut sample, &mut |_, zeta| {
        acc += extremal_plus(zeta, lambda);
    })?;
    Ok(acc)
}

/// Pucci minimal operator `M- u(x, t)`.
pub fn pucci_minus(
    u: &Field,
    x: &Point,
    t_idx: usize,
    sigma: f64,
    lambda: f64,
    s: &Scheme,
) -> Result<f64> {
    check_field(s, u)?;
    check_order(s, sigma)?;
    let u0 = u.value_at(x, t_idx);
    let mut sample = field_sampler(u, x, t_idx);
    let mut acc = 0.0;
    for_each_piece(s, u.tail(), u0, &mut sample, &mut |_, zeta| {
        acc += extremal_minus(zeta, lambda);
    })?;
    Ok(acc)
}

/// Collected piece values of the quadrature at one `(x, t)`, reusable across
/// the members of an operator family.
pub(crate) fn collect_pieces(
    u: &Field,
    x: &Point,
    t_idx: usize,
    s: &Scheme,
) -> Result<Vec<f64>> {
    let u0 = u.value_at(x, t_idx);
    let mut sample = field_sampler(u, x, t_idx);
    let mut zetas = vec![0.0; s.n + s.nodes.len() + 1 + s.shells.len()];
    for_each_piece(s, u.tail(), u0, &mut sample, &mut |id, zeta| {
        zetas[flat_piece(s, id)] = zeta;
    })?;
    Ok(zetas)
}

fn combine_linear(kernel: &KernelSpec, x: &Point, t: f64, zetas: &[f64], s: &Scheme) -> f64 {
    let mut acc = 0.0;
    let mut add = |id: PieceId, zeta: f64| {
        if zeta != 0.0 {
            acc += kernel.coeff(x, t, &s.rep_point(id)) * zeta;
        }
    };
    for a in 0..s.n {
        add(PieceId::Axis(a), zetas[a]);
    }
    for i in 0..s.nodes.len() {
        add(PieceId::Node(i), zetas[s.n + i]);
    }
    add(PieceId::Far, zetas[s.n + s.nodes.len()]);
    for i in 0..s.shells.len() {
        add(PieceId::Shell(i), zetas[s.n + s.nodes.len() + 1 + i]);
    }
    acc
}

/// `I u(x, t)` for a general operator spec: linear, extremal, or
/// `inf_alpha sup_beta` of linear members.
pub fn infsup_apply(
    op: &OperatorSpec,
    u: &Field,
    x: &Point,
    t_idx: usize,
    s: &Scheme,
) -> Result<f64> {
    check_field(s, u)?;
    check_order(s, op.order())?;
    match &op.kind {
        OperatorKind::Linear(k) => linear_apply(k, u, x, t_idx, s),
        OperatorKind::PucciPlus { sigma, lambda, .. } => {
            pucci_plus(u, x, t_idx, *sigma, *lambda, s)
        }
        OperatorKind::PucciMinus { sigma, lambda, .. } => {
            pucci_minus(u, x, t_idx, *sigma, *lambda, s)
        }
        OperatorKind::InfSup(rows) => {
            let zetas = collect_pieces(u, x, t_idx, s)?;
            let t = u.time(t_idx);
            let mut inf = f64::INFINITY;
            for row in rows {
                let mut sup = f64::NEG_INFINITY;
                for k in row {
                    sup = sup.max(combine_linear(k, x, t, &zetas, s));
                }
                inf = inf.min(sup);
            }
            Ok(inf)
        }
    }
}

/// Coefficient-frozen operator: quadrature pieces sampled around `(x, t)`,
/// coefficients evaluated at the freeze point `(x0, t0)`.
pub fn frozen_apply(
    op: &OperatorSpec,
    u: &Field,
    freeze: (&Point, f64),
    x: &Point,
    t_idx: usize,
    s: &Scheme,
) -> Result<f64> {
    check_field(s, u)?;
    check_order(s, op.order())?;
    match &op.kind {
        OperatorKind::PucciPlus { .. } | OperatorKind::PucciMinus { .. } => {
            // coefficient-free operators: freezing is the identity
            infsup_apply(op, u, x, t_idx, s)
        }
        OperatorKind::Linear(k) => {
            let zetas = collect_pieces(u, x, t_idx, s)?;
            Ok(combine_linear(k, freeze.0, freeze.1, &zetas, s))
        }
        OperatorKind::InfSup(rows) => {
            let zetas = collect_pieces(u, x, t_idx, s)?;
            let mut inf = f64::INFINITY;
            for row in rows {
                let mut sup = f64::NEG_INFINITY;
                for k in row {
                    sup = sup.max(combine_linear(k, freeze.0, freeze.1, &zetas, s));
                }
                inf = inf.min(sup);
            }
            Ok(inf)
        }
    }
}

/// Operator with per-piece coefficients precomputed for space-time invariant
/// families; the workhorse of the time stepper.
pub struct PreparedOperator {
    pub scheme: Arc<Scheme>,
    kind: PreparedKind,
    lambda: f64,
}

enum PreparedKind {
    Linear(Vec<f64>),
    PucciPlus,
    PucciMinus,
    /// rows x members, coefficients per piece
    InfSup(Vec<Vec<Vec<f64>>>),
}

impl PreparedOperator {
    pub fn new(op: &OperatorSpec, scheme: Arc<Scheme>) -> Result<Self> {
        check_order(&scheme, op.order())?;
        if op.dim() != scheme.n {
            return Err(Error::precondition("operator and scheme dimensions differ"));
        }
        let origin = [0.0; MAX_DIM];
        let piece_coeffs = |k: &KernelSpec| -> Result<Vec<f64>> {
            if !k.xt_invariant {
                return Err(Error::precondition(
                    "prepared operators need space-time invariant coefficients",
                ));
            }
            let total = scheme.n + scheme.nodes.len() + 1 + scheme.shells.len();
            let mut coeffs = vec![0.0; total];
            for a in 0..scheme.n {
                coeffs[a] = k.coeff(&origin, 0.0, &scheme.rep_point(PieceId::Axis(a)));
            }
            for i in 0..scheme.nodes.len() {
                coeffs[scheme.n + i] = k.coeff(&origin, 0.0, &scheme.nodes[i].y);
            }
            coeffs[scheme.n + scheme.nodes.len()] =
                k.coeff(&origin, 0.0, &scheme.rep_point(PieceId::Far));
            for i in 0..scheme.shells.len() {
                coeffs[scheme.n + scheme.nodes.len() + 1 + i] =
                    k.coeff(&origin, 0.0, &scheme.shells[i].y);
            }
            Ok(coeffs)
        };
        let kind = match &op.kind {
            OperatorKind::Linear(k) => PreparedKind::Linear(piece_coeffs(k)?),
            OperatorKind::PucciPlus { .. } => PreparedKind::PucciPlus,
            OperatorKind::PucciMinus { .. } => PreparedKind::PucciMinus,
            OperatorKind::InfSup(rows) => {
                let mut out = Vec::with_capacity(rows.len());
                for row in rows {
                    out.push(row.iter().map(&piece_coeffs).collect::<Result<Vec<_>>>()?);
                }
                PreparedKind::InfSup(out)
            }
        };
        Ok(PreparedOperator {
            scheme,
            kind,
            lambda: op.lambda(),
        })
    }

    /// Evaluate from an arbitrary sampler (fast index-based samplers in the
    /// stepper, interpolation-based elsewhere). `zeta_buf` is a scratch
    /// buffer reused across calls for the inf-sup case.
    pub(crate) fn apply_sampled(
        &self,
        tail: &Tail,
        u0: f64,
        sample: Sampler,
        zeta_buf: &mut Vec<f64>,
    ) -> Result<f64> {
        let s = &self.scheme;
        match &self.kind {
            PreparedKind::Linear(coeffs) => {
                let mut acc = 0.0;
                for_each_piece(s, tail, u0, sample, &mut |id, zeta| {
                    acc += coeffs[flat_piece(s, id)] * zeta;
                })?;
                Ok(acc)
            }
            PreparedKind::PucciPlus => {
                let mut acc = 0.0;
                for_each_piece(s, tail, u0, sample, &mut |_, zeta| {
                    acc += extremal_plus(zeta, self.lambda);
                })?;
                Ok(acc)
            }
            PreparedKind::PucciMinus => {
                let mut acc = 0.0;
                for_each_piece(s, tail, u0, sample, &mut |_, zeta| {
                    acc += extremal_minus(zeta, self.lambda);
                })?;
                Ok(acc)
            }
            PreparedKind::InfSup(rows) => {
                let total = s.n + s.nodes.len() + 1 + s.shells.len();
                zeta_buf.clear();
                zeta_buf.resize(total, 0.0);
                for_each_piece(s, tail, u0, sample, &mut |id, zeta| {
                    zeta_buf[flat_piece(s, id)] = zeta;
                })?;
                let mut inf = f64::INFINITY;
                for row in rows {
                    let mut sup = f64::NEG_INFINITY;
                    for coeffs in row {
                        let v: f64 = coeffs
                            .iter()
                            .zip(zeta_buf.iter())
                            .map(|(c, z)| c * z)
                            .sum();
                        sup = sup.max(v);
                    }
                    inf = inf.min(sup);
                }
                Ok(inf)
            }
        }
    }

    /// Evaluate at a point of a field (generic path).
    pub fn apply(&self, u: &Field, x: &Point, t_idx: usize) -> Result<f64> {
        check_field(&self.scheme, u)?;
        let u0 = u.value_at(x, t_idx);
        let mut sample = field_sampler(u, x, t_idx);
        let mut buf = Vec::new();
        self.apply_sampled(u.tail(), u0, &mut sample, &mut buf)
    }
}
