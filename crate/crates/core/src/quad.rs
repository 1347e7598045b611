//! Precomputed quadrature geometry for the singular integral
//! `int delta(u,x,t;y) K(x,t;y) dy` with `K = (2-sigma) a / |y|^{n+sigma}`.
//!
//! The domain splits into four regions, each contributing *pieces* that are
//! linear functionals of `u`:
//!
//! * near field `|y| <= r_near = (kappa_q + 1/2) h`: a per-axis quadratic fit
//!   `delta ~ c2_i y_i^2` (positively weighted least squares through the
//!   second differences at `h` and `2h`), integrated analytically against the
//!   kernel envelope;
//! * mid field: half-lattice cell-midpoint sums `2 h^n K0(y_k) delta(y_k)`;
//!   in 1-d, for `|y| <= 1`, each cell additionally carries an analytic
//!   compensation term `z_j c2` that replaces the midpoint value of the
//!   fitted quadratic by its exact cell integral, lifting the order from
//!   `O(h^{2-sigma})` to about `O(h^2)`;
//! * far field `|y| > r_cut`: closed form against the tail model (zero or
//!   signed power growth), or geometric radial shells when the tail is an
//!   explicit rule;
//! * the center value enters every region with a negative weight only, so the
//!   scheme is monotone in all off-center samples (see [`Scheme::monotone_margin`]).
//!
//! Extremal (Pucci) and inf-sup operators reuse the identical pieces: a
//! linear operator weights each piece by its coefficient `a`, the extremal
//! ones by `Lambda z+ - Lambda^{-1} z-`. This makes the ellipticity sandwich
//! and the duality `M+(-u) = -M-(u)` hold exactly at the discrete level.

use crate::error::{Error, Result};
use crate::field::{Point, MAX_DIM};
use crate::util::{integrate_gauss, norm_n};

/// One half-lattice quadrature node (the `-y` partner is implicit through the
/// evenness of `delta`).
#[derive(Debug, Clone)]
pub struct Node {
    /// Offset in units of `h` per axis.
    pub off: [i32; MAX_DIM],
    /// Offset point `y = h * off`.
    pub y: Point,
    /// Weight on `delta(y)`: `2 h^n K0(y)` (both lattice half-spaces folded).
    pub w: f64,
    /// 1-d compensation mass multiplying the fitted `c2` for this node's
    /// cell pair (0 outside the compensated range and in 2-d).
    pub z2: f64,
}

/// Far-field shell sample for explicit-rule tails.
#[derive(Debug, Clone)]
pub struct Shell {
    /// Representative offset (radius times direction).
    pub y: Point,
    /// Weight on `delta(y)`.
    pub w: f64,
}

/// Identifies a quadrature piece; the enumeration order is stable, so
/// coefficient values can be cached per piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceId {
    /// Near-field quadratic-fit piece for one axis.
    Axis(usize),
    /// Mid-field lattice node (index into [`Scheme::nodes`]).
    Node(usize),
    /// Closed-form far field (power/zero tail), or the center remainder
    /// beyond the last shell for rule tails.
    Far,
    /// Far-field shell sample (index into [`Scheme::shells`]).
    Shell(usize),
}

/// Precomputed quadrature geometry for one `(n, sigma, h)` triple.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub n: usize,
    pub sigma: f64,
    pub h: f64,
    pub kappa_q: usize,
    /// Near-field radius `(kappa_q + 1/2) h` (half side in 2-d).
    pub r_near: f64,
    /// `S = int_near y_i^2 K0(y) dy` per axis (both half-spaces).
    pub near_axis_mass: f64,
    pub nodes: Vec<Node>,
    /// Start of the closed-form far field.
    pub r_cut: f64,
    /// `int_{|y| > r_cut} K0 dy`.
    pub t0_cut: f64,
    /// Shells covering `r_cut < |y| < r_stop` for rule tails.
    pub shells: Vec<Shell>,
    pub r_stop: f64,
    /// `int_{|y| > r_stop} K0 dy`.
    pub t0_stop: f64,
    surf: f64,
}

/// Least-squares weights of the per-axis quadratic fit: the curvature
/// estimate is `c2 = (delta(h) + 4 delta(2h)) / (17 h^2)`, and the center
/// sample enters `c2` with total weight `-10 / (17 h^2)`.
pub const C2_W1: f64 = 1.0 / 17.0;
pub const C2_W2: f64 = 4.0 / 17.0;
pub const C2_CENTER: f64 = 10.0 / 17.0;

impl Scheme {
    /// Build the geometry. `r_far` is the target radius where the lattice sum
    /// hands over to the closed-form far field.
    pub fn new(n: usize, sigma: f64, h: f64, r_far: f64, kappa_q: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::parameter(format!("dimension {n} not in {{1, 2}}")));
        }
        if !(sigma > 0.0 && sigma < 2.0) {
            return Err(Error::parameter(format!("order sigma = {sigma} not in (0, 2)")));
        }
        if !(h > 0.0) || kappa_q < 2 {
            return Err(Error::parameter("need h > 0 and kappa_q >= 2"));
        }
        if r_far < 2.0 * (kappa_q as f64 + 1.0) * h {
            return Err(Error::parameter("far radius too small for the near field"));
        }
        let surf = match n {
            1 => 2.0,
            _ => 2.0 * std::f64::consts::PI,
        };
        let r_near = (kappa_q as f64 + 0.5) * h;
        let k0 = |r: f64| (2.0 - sigma) * r.powf(-(n as f64) - sigma);

        let near_axis_mass = match n {
            // 2 * int_0^r (2-s) y^{1-s} dy = 2 r^{2-s}
            1 => 2.0 * r_near.powf(2.0 - sigma),
            _ => {
                // square [-r,r]^2: disk part analytic, corners by quadrature;
                // by symmetry each axis carries half of int |y|^2 K0
                let disk = 2.0 * std::f64::consts::PI * r_near.powf(2.0 - sigma);
                let corners = 8.0
                    * integrate_gauss(
                        |th: f64| (r_near / th.cos()).powf(2.0 - sigma) - r_near.powf(2.0 - sigma),
                        0.0,
                        std::f64::consts::FRAC_PI_4,
                        16,
                    );
                0.5 * (disk + corners)
            }
        };

        let mut nodes = Vec::new();
        let r_cut;
        match n {
            1 => {
                let j_far = (r_far / h).round() as i64;
                r_cut = (j_far as f64 + 0.5) * h;
                // compensation active on cells fully inside |y| <= 1
                let j_comp = (((1.0 / h) - 0.5).floor() as i64).min(j_far);
                for j in (kappa_q as i64 + 1)..=j_far {
                    let y = j as f64 * h;
                    let z2 = if j <= j_comp {
                        let hi = (y + 0.5 * h).powf(2.0 - sigma);
                        let lo = (y - 0.5 * h).powf(2.0 - sigma);
                        2.0 * (hi - lo - (2.0 - sigma) * y.powf(1.0 - sigma) * h)
                    } else {
                        0.0
                    };
                    nodes.push(Node {
                        off: [j as i32, 0],
                        y: [y, 0.0],
                        w: 2.0 * h * k0(y),
                        z2,
                    });
                }
            }
            _ => {
                r_cut = r_far;
                let j_far = (r_far / h).floor() as i64;
                let kq = kappa_q as i64;
                for k2 in 0..=j_far {
                    let k1_lo = if k2 == 0 { 1 } else { -j_far };
                    for k1 in k1_lo..=j_far {
                        if k1.abs() <= kq && k2.abs() <= kq {
                            continue;
                        }
                        let y = [k1 as f64 * h, k2 as f64 * h];
                        let r = norm_n(&y, 2);
                        if r > r_cut {
                            continue;
                        }
                        nodes.push(Node {
                            off: [k1 as i32, k2 as i32],
                            y,
                            w: 2.0 * h * h * k0(r),
                            z2: 0.0,
                        });
                    }
                }
            }
        }

        let t0 = |r: f64| surf * (2.0 - sigma) * r.powf(-sigma) / sigma;
        let t0_cut = t0(r_cut);

        // geometric shells out to where the remaining kernel mass is ~1e-13
        // of the far field
        let q = 1.1f64;
        let r_stop_target = r_cut * 10f64.powf(13.0 / sigma);
        let m_shells = ((r_stop_target / r_cut).ln() / q.ln()).ceil() as usize;
        let mut shells = Vec::new();
        let mut s_lo = r_cut;
        for _ in 0..m_shells {
            let s_hi = s_lo * q;
            let r = (s_lo * s_hi).sqrt();
            let width = s_hi - s_lo;
            match n {
                1 => shells.push(Shell {
                    y: [r, 0.0],
                    w: 2.0 * width * k0(r),
                }),
                _ => {
                    // four direction pairs per shell, each covering a quarter
                    // of the ring (both half-planes folded by evenness)
                    for d in 0..4 {
                        let th = std::f64::consts::PI * (2.0 * d as f64 + 1.0) / 8.0;
                        shells.push(Shell {
                            y: [r * th.cos(), r * th.sin()],
                            w: width * k0(r) * r * std::f64::consts::FRAC_PI_2,
                        });
                    }
                }
            }
            s_lo = s_hi;
        }
        let r_stop = s_lo;
        let t0_stop = t0(r_stop);

        Ok(Scheme {
            n,
            sigma,
            h,
            kappa_q,
            r_near,
            near_axis_mass,
            nodes,
            r_cut,
            t0_cut,
            shells,
            r_stop,
            t0_stop,
            surf,
        })
    }

    /// Defaults: `kappa_q = 2`, far handover at 9 (grid extent 8 plus collar).
    pub fn with_defaults(n: usize, sigma: f64, h: f64) -> Result<Self> {
        Scheme::new(n, sigma, h, 9.0, 2)
    }

    /// `int_{|y| > r_cut} |y|^gamma K0 dy`; diverges unless `gamma < sigma`.
    pub fn t_gamma_cut(&self, gamma: f64) -> Result<f64> {
        if gamma >= self.sigma {
            return Err(Error::divergence(format!(
                "tail growth |y|^{gamma} against kernel of order {} diverges",
                self.sigma
            )));
        }
        Ok(self.surf * (2.0 - self.sigma) * self.r_cut.powf(gamma - self.sigma)
            / (self.sigma - gamma))
    }

    /// Representative offset of a piece, at which variable coefficients are
    /// sampled.
    pub fn rep_point(&self, id: PieceId) -> Point {
        match id {
            PieceId::Axis(a) => {
                let mut p = [0.0; MAX_DIM];
                p[a] = self.h;
                p
            }
            PieceId::Node(i) => self.nodes[i].y,
            PieceId::Far => [self.r_cut, 0.0],
            PieceId::Shell(i) => self.shells[i].y,
        }
    }

    /// Worst-case (over admissible coefficients with constant `lambda`) total
    /// weight on the off-center samples `u(x +- h e_i)`; nonnegative margin
    /// means every off-center weight of the scheme is nonnegative and the
    /// explicit update is monotone under the CFL step.
    ///
    /// The only negative channels run through the fitted curvature `c2`
    /// (compensation masses `z2` can be negative for `sigma < 1`); the near
    /// mass dominates them by a factor `~ 24 kappa_q^2 / lambda^2`.
    pub fn monotone_margin(&self, lambda: f64) -> f64 {
        let mut margin = self.near_axis_mass / lambda;
        for node in &self.nodes {
            margin += if node.z2 >= 0.0 {
                node.z2 / lambda
            } else {
                node.z2 * lambda
            };
        }
        margin
    }

    /// Upper bound on the magnitude of the scheme's weight on the center
    /// value `u(x)` for coefficients bounded by 1 (multiply by `Lambda` for
    /// an elliptic family); drives the CFL step.
    pub fn center_weight_bound(&self) -> f64 {
        let c2_center = C2_CENTER / (self.h * self.h);
        let mut d = self.n as f64 * c2_center * self.near_axis_mass;
        for node in &self.nodes {
            d += 2.0 * node.w + c2_center * node.z2.abs();
        }
        d + 2.0 * self.t0_cut
    }

    /// Total pieces when the far field is closed-form (zero/power tail).
    pub fn piece_count_closed(&self) -> usize {
        self.n + self.nodes.len() + 1
    }
}
