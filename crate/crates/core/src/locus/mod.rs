//! The critical locus: tangencies between the stable and unstable foliations,
//! i.e. zeros of `D = gx₊·gy₋ − gy₊·gx₋`.

mod sample;
pub mod slice;
mod trace;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicString;
use crate::dynamics::{HenonParameter, PhasePoint};
use crate::error::{HenonError, Result};
use crate::potentials::{backward_potential, forward_potential, u_c, ComplexGradient, EscapeControl, PotentialStatus};

pub use sample::{sample_component, sample_upsilon, GridSpec};
pub(crate) use sample::{component_samples, curve_zeros, in_upsilon_piece, slice_zeros, upsilon_samples};
pub use trace::{project_to_wall, trace_wall_curve, TraceOptions, WallSpec};

/// The boundary walls of the fundamental domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WallTag {
    /// `|y| = y_bound`
    YBound,
    /// `|u_c| = |a|·y_bound`
    UWall,
    /// `G₊ = r/2ⁿ`
    GOuter,
    /// `G₊ = r/2ⁿ⁺¹`
    GInner,
    /// `|p_c(y) − x| = |a|·y_bound`, as a boundary of the far piece
    PWall,
}

impl WallTag {
    pub const ALL: [WallTag; 5] = [WallTag::YBound, WallTag::UWall, WallTag::GOuter, WallTag::GInner, WallTag::PWall];

    pub fn name(&self) -> &'static str {
        match self {
            WallTag::YBound => "Y_BOUND",
            WallTag::UWall => "U_WALL",
            WallTag::GOuter => "G_OUTER",
            WallTag::GInner => "G_INNER",
            WallTag::PWall => "P_WALL",
        }
    }

    /// Whether the piece lies on the side where the wall function is smaller.
    pub fn piece_inside(&self) -> bool {
        matches!(self, WallTag::YBound | WallTag::GOuter)
    }
}

/// `D(p)` with the ingredients needed for thresholds and Newton steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangencyValue {
    pub d: Complex64,
    /// `|D| / (|g₊|·|g₋|)`.
    pub normalized: f64,
    pub grad_plus: ComplexGradient,
    pub grad_minus: ComplexGradient,
    pub green_plus: f64,
    pub green_minus: f64,
}

impl TangencyValue {
    pub fn scale(&self) -> f64 {
        self.grad_plus.norm() * self.grad_minus.norm()
    }
}

/// A point of the critical locus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocusSample {
    pub point: PhasePoint,
    /// Normalized residual `|D|/(|g₊||g₋|)`.
    pub residual: f64,
    pub component_label: Option<DyadicString>,
    pub wall_tag: Option<WallTag>,
}

impl LocusSample {
    pub fn new(point: PhasePoint, residual: f64) -> Self {
        Self { point, residual, component_label: None, wall_tag: None }
    }
}

/// An ordered polyline on a wall, oriented so that the argument of the wall function
/// increases along it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LocusCurve {
    pub samples: Vec<LocusSample>,
    pub closed: bool,
    pub wall_tag: WallTag,
    pub level: f64,
    /// Arc length in `C²`.
    pub length: f64,
    pub diagnostic: Option<String>,
}

impl LocusCurve {
    pub fn points(&self) -> impl Iterator<Item = &PhasePoint> {
        self.samples.iter().map(|s| &s.point)
    }

    /// Distance from `p` to the polyline (closing segment included for closed curves).
    pub fn distance_to(&self, p: &PhasePoint) -> f64 {
        let pts: Vec<[f64; 4]> = self.samples.iter().map(|s| s.point.to_real()).collect();
        polyline_distance(&pts, &p.to_real(), self.closed)
    }
}

pub(crate) fn polyline_distance(pts: &[[f64; 4]], q: &[f64; 4], closed: bool) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => dist4(&pts[0], q),
        n => {
            let segs = if closed { n } else { n - 1 };
            (0..segs).map(|i| segment_distance(&pts[i], &pts[(i + 1) % n], q)).fold(f64::INFINITY, f64::min)
        }
    }
}

pub(crate) fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

pub(crate) fn segment_distance(a: &[f64; 4], b: &[f64; 4], q: &[f64; 4]) -> f64 {
    let mut ab = [0.0; 4];
    let mut aq = [0.0; 4];
    for i in 0..4 {
        ab[i] = b[i] - a[i];
        aq[i] = q[i] - a[i];
    }
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 { (ab.iter().zip(&aq).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0) } else { 0.0 };
    (0..4).map(|i| (aq[i] - t * ab[i]).powi(2)).sum::<f64>().sqrt()
}

/// `D(p)`; fails unless both potentials are decided positive.
pub fn tangency(lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> Result<TangencyValue> {
    let fwd = forward_potential(lambda, p, ctl, true);
    let bwd = backward_potential(lambda, p, ctl, true);
    let outside = |s: PotentialStatus, dir: &'static str, iters: usize| match s {
        PotentialStatus::Undecided => HenonError::Undecided { iterations: iters },
        _ => HenonError::NotEscaping { point: *p, direction: dir },
    };
    let gp = fwd.gradient.ok_or_else(|| outside(fwd.potential.status, "forward", fwd.potential.iterations_used))?;
    let gm = bwd.gradient.ok_or_else(|| outside(bwd.potential.status, "backward", bwd.potential.iterations_used))?;
    let d = gp.gx * gm.gy - gp.gy * gm.gx;
    let scale = gp.norm() * gm.norm();
    Ok(TangencyValue {
        d,
        normalized: d.norm() / scale,
        grad_plus: gp,
        grad_minus: gm,
        green_plus: fwd.potential.value,
        green_minus: bwd.potential.value,
    })
}

/// Finite-difference step for holomorphic partials at coordinate `z`.
#[inline]
pub(crate) fn fd_step(z: Complex64) -> f64 {
    1e-6 * z.norm().max(1.0)
}

/// `(∂D/∂x, ∂D/∂y)` by centered differences along the real direction (`D` is holomorphic).
pub fn tangency_partials(lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> Result<(Complex64, Complex64)> {
    let hx = fd_step(p.x);
    let hy = fd_step(p.y);
    let d = |dx: f64, dy: f64| -> Result<Complex64> {
        Ok(tangency(lambda, &p.offset(Complex64::new(dx, 0.0), Complex64::new(dy, 0.0)), ctl)?.d)
    };
    let dx = (d(hx, 0.0)? - d(-hx, 0.0)?) / (2.0 * hx);
    let dy = (d(0.0, hy)? - d(0.0, -hy)?) / (2.0 * hy);
    Ok((dx, dy))
}

/// Size of `|D|` attributable to rounding the coordinates of `p`, given `∂D`.
pub fn rounding_floor(p: &PhasePoint, dx: Complex64, dy: Complex64) -> f64 {
    slice::ROUNDING * ((1.0 + p.x.norm()) * dx.norm() + (1.0 + p.y.norm()) * dy.norm())
}

/// Whether `p` is a zero of `D` to tolerance: normalized residual below `tol_res`, or
/// `|D|` within the rounding floor where the normalization degenerates.
pub fn is_locus_point(t: &TangencyValue, p: &PhasePoint, partials: (Complex64, Complex64), tol_res: f64) -> bool {
    t.normalized < tol_res || t.d.norm() <= rounding_floor(p, partials.0, partials.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub tol_res: f64,
    pub max_steps: usize,
    /// Largest admissible seed residual.
    pub max_seed_residual: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { tol_res: 1e-9, max_steps: 25, max_seed_residual: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Refined {
    pub sample: LocusSample,
    pub moved: f64,
    pub steps: usize,
}

/// Minimal-norm Newton on `D = 0`.
///
/// For a holomorphic `D` the pseudo-inverse of the real 2×4 Jacobian of `(Re D, Im D)`
/// acts as `δ = −D·conj(∇D)/|∇D|²`, which is what is applied here.
pub fn refine_zero(lambda: &HenonParameter, p0: &PhasePoint, opts: &RefineOptions, ctl: &EscapeControl) -> Result<Refined> {
    let t0 = tangency(lambda, p0, ctl)?;
    if t0.normalized >= opts.max_seed_residual {
        return Err(HenonError::InvalidArgument(format!(
            "seed residual {:.3e} is not below {}",
            t0.normalized, opts.max_seed_residual
        )));
    }
    let max_move = 0.1 * (1.0 + p0.norm());
    let mut p = *p0;
    let mut t = t0;
    let mut steps = 0;
    let mut last_step = f64::INFINITY;
    let mut located = false;
    while steps < opts.max_steps {
        let converged = t.normalized < 1e-15 || (t.normalized < opts.tol_res && last_step < 1e-14 * (1.0 + p.norm()));
        if converged {
            break;
        }
        let (dx, dy) = tangency_partials(lambda, &p, ctl)?;
        if t.d.norm() <= rounding_floor(&p, dx, dy) {
            located = true;
            break;
        }
        let g2 = dx.norm_sqr() + dy.norm_sqr();
        if !(g2 > 0.0) || !g2.is_finite() {
            return Err(HenonError::Singular("vanishing gradient of D".into()));
        }
        let sx = -t.d * dx.conj() / g2;
        let sy = -t.d * dy.conj() / g2;
        // Damping: halve until the residual does not grow.
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..8 {
            let q = p.offset(sx * lam, sy * lam);
            if let Ok(tq) = tangency(lambda, &q, ctl) {
                if tq.normalized <= t.normalized || tq.normalized < opts.tol_res * 1e-3 {
                    accepted = Some((q, tq));
                    break;
                }
            }
            lam *= 0.5;
        }
        steps += 1;
        let Some((q, tq)) = accepted else {
            // No decrease possible: at the noise floor if already within tolerance.
            if t.normalized < opts.tol_res {
                break;
            }
            return Err(HenonError::Divergence { residual: t.normalized, steps });
        };
        last_step = q.distance(&p);
        p = q;
        t = tq;
        if p.distance(p0) > max_move {
            return Err(HenonError::Divergence { residual: t.normalized, steps });
        }
    }
    if t.normalized >= opts.tol_res && !located {
        let partials = tangency_partials(lambda, &p, ctl)?;
        if !is_locus_point(&t, &p, partials, opts.tol_res) {
            return Err(HenonError::Divergence { residual: t.normalized, steps });
        }
    }
    Ok(Refined { sample: LocusSample::new(p, t.normalized), moved: p.distance(p0), steps })
}

/// Wall-function value `|h|` (or `G₊`) at `p`.
pub fn wall_value(tag: WallTag, lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> Option<f64> {
    match tag {
        WallTag::YBound => Some(p.y.norm()),
        WallTag::UWall | WallTag::PWall => Some(u_c(p, lambda.c).norm()),
        WallTag::GOuter | WallTag::GInner => {
            let g = forward_potential(lambda, p, ctl, false).potential;
            g.is_escaping().then_some(g.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam() -> HenonParameter {
        HenonParameter::real(1e-4, -6.0).unwrap()
    }

    #[test]
    fn far_field_is_transverse() {
        let e = 10f64.exp();
        let t = tangency(&lam(), &PhasePoint::new(Complex64::new(e, 0.0), Complex64::new(0.0, e)), &EscapeControl::default()).unwrap();
        assert!(t.normalized > 0.1);
    }

    #[test]
    fn bounded_points_rejected() {
        let l = HenonParameter::real(0.3, -0.5).unwrap();
        assert!(tangency(&l, &PhasePoint::real(-0.2, -0.2), &EscapeControl::default()).is_err());
    }

    #[test]
    fn segment_distance_endpoints() {
        let a = [0.0; 4];
        let b = [1.0, 0.0, 0.0, 0.0];
        assert_eq!(segment_distance(&a, &b, &[0.5, 1.0, 0.0, 0.0]), 1.0);
        assert_eq!(segment_distance(&a, &b, &[2.0, 0.0, 0.0, 0.0]), 1.0);
    }
}
