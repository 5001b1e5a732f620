//! Predictor–corrector continuation of `{Re D = 0, Im D = 0, wall = level}` in `R⁴`.

use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{rounding_floor, tangency, tangency_partials, LocusCurve, LocusSample, TangencyValue, WallTag};
use crate::dynamics::{HenonParameter, PhasePoint};
use crate::error::{HenonError, Result};
use crate::potentials::{u_c, EscapeControl};

/// A wall and its level: the radius `ρ` of `{|h| = ρ}`, or the value of `G₊`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSpec {
    pub tag: WallTag,
    pub level: f64,
}

impl WallSpec {
    pub fn new(tag: WallTag, level: f64) -> Self {
        Self { tag, level }
    }

    /// Relative wall residual and its real gradient in `(Re x, Im x, Re y, Im y)`.
    pub(crate) fn residual(&self, lambda: &HenonParameter, p: &PhasePoint, t: &TangencyValue) -> (f64, [f64; 4]) {
        let (value, cx, cy) = match self.tag {
            WallTag::YBound => {
                let m = p.y.norm();
                (m, Complex64::new(0.0, 0.0), p.y.conj() / m)
            }
            WallTag::UWall | WallTag::PWall => {
                let u = u_c(p, lambda.c);
                let k = u.conj() / u.norm();
                (u.norm(), -k, p.y * 2.0 * k)
            }
            WallTag::GOuter | WallTag::GInner => (t.green_plus, t.grad_plus.gx, t.grad_plus.gy),
        };
        let s = 1.0 / self.level;
        ((value - self.level) * s, [cx.re * s, -cx.im * s, cy.re * s, -cy.im * s])
    }

    /// Coefficients of `d log h`, whose imaginary part measures turning of `arg h`.
    pub(crate) fn dlog(&self, lambda: &HenonParameter, p: &PhasePoint, t: &TangencyValue) -> (Complex64, Complex64) {
        match self.tag {
            WallTag::YBound => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0) / p.y),
            WallTag::UWall | WallTag::PWall => {
                let u = u_c(p, lambda.c);
                (-Complex64::new(1.0, 0.0) / u, p.y * 2.0 / u)
            }
            WallTag::GOuter | WallTag::GInner => (t.grad_plus.gx, t.grad_plus.gy),
        }
    }

    /// Attainable relative wall residual: `u_c` loses digits to cancellation when `ρ` is small.
    pub(crate) fn tolerance(&self, lambda: &HenonParameter, p: &PhasePoint) -> f64 {
        match self.tag {
            WallTag::UWall | WallTag::PWall => {
                let size = p.x.norm() + p.y.norm_sqr() + lambda.c.norm();
                1e-12 * (size / self.level).max(1.0)
            }
            _ => 1e-12,
        }
    }

    /// Characteristic length of the wall near `p`.
    pub(crate) fn length_scale(&self, p: &PhasePoint, t: &TangencyValue) -> f64 {
        match self.tag {
            WallTag::YBound => self.level,
            WallTag::UWall | WallTag::PWall => self.level / (1.0 + 4.0 * p.y.norm_sqr()).sqrt(),
            WallTag::GOuter | WallTag::GInner => self.level / t.grad_plus.norm(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TraceOptions {
    /// Initial predictor step as a fraction of the wall length scale.
    pub initial_step: f64,
    pub max_step: f64,
    /// Absolute floor on the predictor step.
    pub min_step: f64,
    pub max_points: usize,
    /// Largest accepted tangent turn per step, in radians.
    pub max_turn: f64,
    pub tol_res: f64,
    /// Tracing stops when `|p|` exceeds this.
    pub bound: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_step: 0.1,
            min_step: 1e-8,
            max_points: 20_000,
            max_turn: 0.2,
            tol_res: 1e-9,
            bound: 1e8,
        }
    }
}

struct Corrected {
    p: PhasePoint,
    t: TangencyValue,
    jac: Matrix3x4<f64>,
}

fn system(
    lambda: &HenonParameter,
    wall: &WallSpec,
    p: &PhasePoint,
    ctl: &EscapeControl,
) -> Result<(TangencyValue, Vector3<f64>, Matrix3x4<f64>)> {
    let t = tangency(lambda, p, ctl)?;
    let (dx, dy) = tangency_partials(lambda, p, ctl)?;
    let n = 1.0 / t.scale();
    let (w, wg) = wall.residual(lambda, p, &t);
    let f = Vector3::new(t.d.re * n, t.d.im * n, w);
    let jac = Matrix3x4::new(
        dx.re * n, -dx.im * n, dy.re * n, -dy.im * n,
        dx.im * n, dx.re * n, dy.im * n, dy.re * n,
        wg[0], wg[1], wg[2], wg[3],
    );
    Ok((t, f, jac))
}

/// `f` and `jac` are normalized by `|g₊||g₋|`, so the rounding floor is too.
fn converged(p: &PhasePoint, f: &Vector3<f64>, jac: &Matrix3x4<f64>, tol_res: f64, wall_tol: f64) -> bool {
    let d = f[0].hypot(f[1]);
    let dx = Complex64::new(jac[(0, 0)], jac[(1, 0)]);
    let dy = Complex64::new(jac[(0, 2)], jac[(1, 2)]);
    (d < 1e-2 * tol_res || d <= rounding_floor(p, dx, dy)) && f[2].abs() < wall_tol
}

/// Minimal-norm Gauss–Newton projection onto the curve.
fn correct(lambda: &HenonParameter, wall: &WallSpec, p0: &PhasePoint, tol_res: f64, ctl: &EscapeControl) -> Option<Corrected> {
    let mut p = *p0;
    let mut prev_norm = f64::INFINITY;
    for _ in 0..10 {
        let (t, f, jac) = system(lambda, wall, &p, ctl).ok()?;
        let norm = f.norm();
        if converged(&p, &f, &jac, tol_res, wall.tolerance(lambda, &p)) {
            return Some(Corrected { p, t, jac });
        }
        if norm > 2.0 * prev_norm {
            return None;
        }
        prev_norm = norm;
        let jjt: Matrix3<f64> = jac * jac.transpose();
        let z = jjt.lu().solve(&f)?;
        let delta: Vector4<f64> = -(jac.transpose() * z);
        let v = p.to_real();
        p = PhasePoint::from_real(&[v[0] + delta[0], v[1] + delta[1], v[2] + delta[2], v[3] + delta[3]]);
        if !p.is_finite() {
            return None;
        }
    }
    None
}

/// Unit null vector of a 3×4 matrix by signed maximal minors.
fn null_vector(j: &Matrix3x4<f64>) -> Vector4<f64> {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        Matrix3::from_fn(|r, c| j[(r, cols[c])]).determinant()
    };
    let v = Vector4::new(minor(0), -minor(1), minor(2), -minor(3));
    let n = v.norm();
    if n > 0.0 {
        v / n
    } else {
        v
    }
}

/// Projects `p` onto `{D = 0} ∩ wall` by minimal-norm Gauss–Newton.
pub fn project_to_wall(
    lambda: &HenonParameter,
    p: &PhasePoint,
    wall: &WallSpec,
    tol_res: f64,
    ctl: &EscapeControl,
) -> Option<LocusSample> {
    correct(lambda, wall, p, tol_res, ctl).map(|c| sample_of(&c.p, &c.t, wall.tag))
}

fn sample_of(p: &PhasePoint, t: &TangencyValue, tag: WallTag) -> LocusSample {
    LocusSample { point: *p, residual: t.normalized, component_label: None, wall_tag: Some(tag) }
}

enum Stop {
    Closed,
    Collapse,
    Left(String),
    Exhausted,
}

struct Branch {
    samples: Vec<LocusSample>,
    length: f64,
    stop: Stop,
}

fn trace_branch(
    lambda: &HenonParameter,
    wall: &WallSpec,
    start: &Corrected,
    dir: Vector4<f64>,
    opts: &TraceOptions,
    ctl: &EscapeControl,
    detect_closure: bool,
) -> Branch {
    let scale = wall.length_scale(&start.p, &start.t);
    let max_step = opts.max_step * scale;
    let mut step = (opts.initial_step * scale).max(opts.min_step);
    let start_real = Vector4::from(start.p.to_real());
    let mut cur = Corrected { p: start.p, t: start.t, jac: start.jac };
    let mut tangent = dir;
    let mut samples = vec![sample_of(&cur.p, &cur.t, wall.tag)];
    let mut length = 0.0;
    let mut far = 0.0_f64;
    loop {
        if samples.len() >= opts.max_points {
            return Branch { samples, length, stop: Stop::Exhausted };
        }
        let here = Vector4::from(cur.p.to_real());
        let guess = here + tangent * step;
        let guess_p = PhasePoint::from_real(&[guess[0], guess[1], guess[2], guess[3]]);
        let next = correct(lambda, wall, &guess_p, opts.tol_res, ctl);
        let accepted = next.and_then(|n| {
            let mut t_new = null_vector(&n.jac);
            if t_new.dot(&tangent) < 0.0 {
                t_new = -t_new;
            }
            let turn = t_new.dot(&tangent).clamp(-1.0, 1.0).acos();
            let moved = (Vector4::from(n.p.to_real()) - here).norm();
            (turn <= opts.max_turn && moved < 2.0 * step).then_some((n, t_new, moved))
        });
        let Some((n, t_new, moved)) = accepted else {
            step *= 0.5;
            if step < opts.min_step {
                return Branch { samples, length, stop: Stop::Collapse };
            }
            continue;
        };
        length += moved;
        cur = n;
        tangent = t_new;
        let pos = Vector4::from(cur.p.to_real());
        let from_start = (pos - start_real).norm();
        far = far.max(from_start);
        if cur.p.norm() > opts.bound {
            samples.push(sample_of(&cur.p, &cur.t, wall.tag));
            return Branch { samples, length, stop: Stop::Left(format!("left |p| < {:e}", opts.bound)) };
        }
        if detect_closure && far > 4.0 * step && length > 8.0 * step && from_start < 2.0 * step {
            length += from_start;
            return Branch { samples, length, stop: Stop::Closed };
        }
        samples.push(sample_of(&cur.p, &cur.t, wall.tag));
        step = (step * 1.3).min(max_step);
    }
}

/// Traces the locus curve on `wall` through `seed`. The seed is first projected onto
/// the curve; the curve is oriented so that `arg h` increases.
pub fn trace_wall_curve(
    lambda: &HenonParameter,
    seed: &LocusSample,
    wall: &WallSpec,
    opts: &TraceOptions,
    ctl: &EscapeControl,
) -> Result<LocusCurve> {
    let start = correct(lambda, wall, &seed.point, opts.tol_res, ctl)
        .ok_or_else(|| HenonError::InvalidArgument("seed does not project onto the wall curve".into()))?;
    let scale = wall.length_scale(&start.p, &start.t);
    if start.p.distance(&seed.point) > 0.1 * scale {
        return Err(HenonError::InvalidArgument("seed is too far from the wall curve".into()));
    }
    let mut dir = null_vector(&start.jac);
    let (lx, ly) = wall.dlog(lambda, &start.p, &start.t);
    let dx = Complex64::new(dir[0], dir[1]);
    let dy = Complex64::new(dir[2], dir[3]);
    if (lx * dx + ly * dy).im < 0.0 {
        dir = -dir;
    }
    let forward = trace_branch(lambda, wall, &start, dir, opts, ctl, true);
    if matches!(forward.stop, Stop::Closed) {
        return Ok(LocusCurve { samples: forward.samples, closed: true, wall_tag: wall.tag, level: wall.level, length: forward.length, diagnostic: None });
    }
    let backward = trace_branch(lambda, wall, &start, -dir, opts, ctl, false);
    let describe = |s: &Stop| match s {
        Stop::Closed => "closed".to_string(),
        Stop::Collapse => "step collapse below minimum".to_string(),
        Stop::Left(m) => m.clone(),
        Stop::Exhausted => format!("point budget {} exhausted", opts.max_points),
    };
    let diagnostic = format!("open curve: forward {}, backward {}", describe(&forward.stop), describe(&backward.stop));
    let mut samples: Vec<LocusSample> = backward.samples.into_iter().skip(1).rev().collect();
    samples.extend(forward.samples);
    Ok(LocusCurve {
        samples,
        closed: false,
        wall_tag: wall.tag,
        level: wall.level,
        length: forward.length + backward.length,
        diagnostic: Some(diagnostic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_vector_is_orthogonal_to_rows() {
        let j = Matrix3x4::new(1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, 2.0, -2.0, 0.3, 1.0, 1.0);
        let v = null_vector(&j);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        assert!((j * v).norm() < 1e-13);
    }
}
