//! The complex Hénon map `f(x, y) = (x² + c − a·y, x)`, its inverse, orbits and
//! derivative cocycles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HenonError, Result};

/// Coordinates beyond this modulus are treated as overflow.
pub const OVERFLOW_LIMIT: f64 = 1e150;

/// Default escape radius, comfortably beyond the 1D escape bound for `|c| ≤ 10`.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 100.0;

/// The parameter pair `λ = (a, c)`; `a` is the Jacobian determinant of the map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HenonParameter {
    pub a: Complex64,
    pub c: Complex64,
}

impl HenonParameter {
    /// Rejects `a = 0`, where the map is not invertible.
    pub fn new(a: Complex64, c: Complex64) -> Result<Self> {
        if a == Complex64::new(0.0, 0.0) || !a.is_finite() || !c.is_finite() {
            return Err(HenonError::NonInvertible);
        }
        Ok(Self { a, c })
    }

    pub fn real(a: f64, c: f64) -> Result<Self> {
        Self::new(Complex64::new(a, 0.0), Complex64::new(c, 0.0))
    }

    /// Same `c`, different `a`.
    pub fn with_a(&self, a: Complex64) -> Result<Self> {
        Self::new(a, self.c)
    }

    pub fn distance(&self, other: &HenonParameter) -> f64 {
        ((self.a - other.a).norm_sqr() + (self.c - other.c).norm_sqr()).sqrt()
    }

    /// Componentwise linear interpolation `self + t·(other − self)`.
    pub fn lerp(&self, other: &HenonParameter, t: f64) -> HenonParameter {
        HenonParameter {
            a: self.a + (other.a - self.a) * t,
            c: self.c + (other.c - self.c) * t,
        }
    }
}

/// A point of C².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Complex64,
    pub y: Complex64,
}

impl PhasePoint {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr()).sqrt()
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        ((self.x - other.x).norm_sqr() + (self.y - other.y).norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn max_modulus(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn conj(&self) -> PhasePoint {
        PhasePoint::new(self.x.conj(), self.y.conj())
    }

    /// Real coordinates `(Re x, Im x, Re y, Im y)`.
    pub fn to_real(&self) -> [f64; 4] {
        [self.x.re, self.x.im, self.y.re, self.y.im]
    }

    pub fn from_real(v: &[f64; 4]) -> Self {
        Self::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }

    pub fn offset(&self, dx: Complex64, dy: Complex64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

/// A 2×2 complex matrix carried with a factored-out scale: the represented
/// matrix is `exp(log_scale) · [[m11, m12], [m21, m22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub log_scale: f64,
}

impl JacobianMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { m11: one, m12: zero, m21: zero, m22: one, log_scale: 0.0 }
    }

    /// Single-step derivative `Df(p) = [[2x, −a], [1, 0]]`.
    pub fn step(lambda: &HenonParameter, p: &PhasePoint) -> Self {
        Self {
            m11: p.x * 2.0,
            m12: -lambda.a,
            m21: Complex64::new(1.0, 0.0),
            m22: Complex64::new(0.0, 0.0),
            log_scale: 0.0,
        }
    }

    /// Matrix product `self · rhs`, scales added.
    pub fn mul(&self, rhs: &JacobianMatrix) -> JacobianMatrix {
        JacobianMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            log_scale: self.log_scale + rhs.log_scale,
        }
    }

    /// Determinant of the stored entries (without `exp(2·log_scale)`).
    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Divides the entries by their largest modulus and folds it into `log_scale`.
    pub fn renormalize(&mut self) {
        let s = self.m11.norm().max(self.m12.norm()).max(self.m21.norm()).max(self.m22.norm());
        if s > 0.0 && s.is_finite() {
            let inv = 1.0 / s;
            self.m11 *= inv;
            self.m12 *= inv;
            self.m21 *= inv;
            self.m22 *= inv;
            self.log_scale += s.ln();
        }
    }

    /// The represented matrix with the scale multiplied back in. Overflows for
    /// large scales; meant for comparisons at moderate depth.
    pub fn expanded(&self) -> [[Complex64; 2]; 2] {
        let s = self.log_scale.exp();
        [[self.m11 * s, self.m12 * s], [self.m21 * s, self.m22 * s]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// An orbit segment. For backward orbits `points[k]` is `f^{−k}(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    pub points: Vec<PhasePoint>,
    pub escaped_at: Option<usize>,
    pub direction: Direction,
}

/// `f(x, y) = (x² + c − a·y, x)`.
#[inline]
pub fn apply(lambda: &HenonParameter, p: &PhasePoint) -> PhasePoint {
    PhasePoint::new(p.x * p.x + lambda.c - lambda.a * p.y, p.x)
}

/// `f⁻¹(x, y) = (y, (y² + c − x)/a)`.
pub fn apply_inverse(lambda: &HenonParameter, p: &PhasePoint) -> Result<PhasePoint> {
    if lambda.a == Complex64::new(0.0, 0.0) {
        return Err(HenonError::NonInvertible);
    }
    Ok(inverse_unchecked(lambda, p))
}

/// `f⁻¹` for parameters already validated by [`HenonParameter::new`].
#[inline]
pub(crate) fn inverse_unchecked(lambda: &HenonParameter, p: &PhasePoint) -> PhasePoint {
    PhasePoint::new(p.y, (p.y * p.y + lambda.c - p.x) / lambda.a)
}

/// `Dfⁿ(p)` by the chain rule, renormalized every step.
pub fn forward_cocycle(lambda: &HenonParameter, p: &PhasePoint, n: usize) -> Result<JacobianMatrix> {
    let mut m = JacobianMatrix::identity();
    let mut q = *p;
    for k in 0..n {
        if !q.is_finite() || q.max_modulus() > OVERFLOW_LIMIT {
            return Err(HenonError::Overflow { index: k });
        }
        m = JacobianMatrix::step(lambda, &q).mul(&m);
        m.renormalize();
        q = apply(lambda, &q);
    }
    Ok(m)
}

/// Iterates until the escape coordinate (`|x|` forward, `|y|` backward) exceeds
/// `escape_radius`, or `max_iter` steps have been taken.
pub fn orbit(
    lambda: &HenonParameter,
    p: &PhasePoint,
    max_iter: usize,
    escape_radius: f64,
    direction: Direction,
) -> Result<OrbitResult> {
    if max_iter == 0 {
        return Err(HenonError::InvalidArgument("orbit needs max_iter >= 1".into()));
    }
    if direction == Direction::Backward && lambda.a == Complex64::new(0.0, 0.0) {
        return Err(HenonError::NonInvertible);
    }
    let escape_coord = |q: &PhasePoint| match direction {
        Direction::Forward => q.x.norm(),
        Direction::Backward => q.y.norm(),
    };
    let mut points = Vec::with_capacity(max_iter + 1);
    let mut q = *p;
    points.push(q);
    let mut escaped_at = (escape_coord(&q) > escape_radius).then_some(0);
    let mut k = 0;
    while escaped_at.is_none() && k < max_iter {
        q = match direction {
            Direction::Forward => apply(lambda, &q),
            Direction::Backward => inverse_unchecked(lambda, &q),
        };
        k += 1;
        if !q.is_finite() {
            break;
        }
        points.push(q);
        if escape_coord(&q) > escape_radius || q.max_modulus() > OVERFLOW_LIMIT {
            escaped_at = Some(k);
        }
    }
    Ok(OrbitResult { points, escaped_at, direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn apply_examples() {
        let l = HenonParameter::real(1.0, 0.0).unwrap();
        assert_eq!(apply(&l, &PhasePoint::real(0.0, 0.0)), PhasePoint::real(0.0, 0.0));
        let l = HenonParameter::real(1e-4, -6.0).unwrap();
        assert_eq!(apply(&l, &PhasePoint::real(0.0, 0.0)), PhasePoint::real(-6.0, 0.0));
        assert_eq!(apply_inverse(&l, &PhasePoint::real(-6.0, 0.0)).unwrap(), PhasePoint::real(0.0, 0.0));
    }

    #[test]
    fn zero_a_rejected() {
        assert!(matches!(HenonParameter::real(0.0, -6.0), Err(HenonError::NonInvertible)));
        let bogus = HenonParameter { a: c(0.0, 0.0), c: c(-6.0, 0.0) };
        assert!(apply_inverse(&bogus, &PhasePoint::real(1.0, 1.0)).is_err());
    }

    #[test]
    fn one_step_cocycle_at_origin() {
        let l = HenonParameter::new(c(0.3, -0.1), c(-6.0, 0.5)).unwrap();
        let m = forward_cocycle(&l, &PhasePoint::real(0.0, 0.0), 1).unwrap();
        assert_eq!(m.log_scale, 0.0);
        assert_eq!(m.m11, c(0.0, 0.0));
        assert_eq!(m.m12, -l.a);
        assert_eq!(m.m21, c(1.0, 0.0));
        assert_eq!(m.m22, c(0.0, 0.0));
    }

    #[test]
    fn two_step_cocycle_hand_chain_rule() {
        // f(1,0) = (1,1), so Df(f(1,0))·Df(1,0) = [[2,−1],[1,0]]·[[2,−1],[1,0]] = [[3,−2],[2,−1]]
        let l = HenonParameter::real(1.0, 0.0).unwrap();
        let m = forward_cocycle(&l, &PhasePoint::real(1.0, 0.0), 2).unwrap().expanded();
        let want = [[3.0, -2.0], [2.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(m[i][j].re, want[i][j], epsilon = 1e-14);
                assert_relative_eq!(m[i][j].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn cocycle_determinant_up_to_forty_steps() {
        // Near the fixed point x = y = 0.3 of (a, c) = (0.5, 0.36) the two multipliers have
        // equal modulus, so the entries do not outgrow the determinant.
        let l = HenonParameter::real(0.5, 0.36).unwrap();
        let p = PhasePoint::new(c(0.3, 0.001), c(0.3, -0.002));
        for n in 1..=40 {
            let m = forward_cocycle(&l, &p, n).unwrap();
            let det = m.det() * (2.0 * m.log_scale).exp();
            // det [[2x, −a], [1, 0]] = a at every step.
            let want = l.a.powi(n as i32);
            assert!((det - want).norm() <= 1e-10 * want.norm(), "n={n}: {det} vs {want}");
        }
    }

    #[test]
    fn cocycle_overflow_reports_index() {
        let l = HenonParameter::real(1e-4, -6.0).unwrap();
        match forward_cocycle(&l, &PhasePoint::real(0.0, 0.0), 40) {
            Err(HenonError::Overflow { index }) => assert!(index > 4 && index < 40),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn critical_orbit_escapes_by_fourth_iterate() {
        // 1D oracle at a→0: 0 → −6 → 30 → 894 exceeds 100 at iterate 3.
        let mut z: f64 = 0.0;
        let mut k = 0;
        while z.abs() <= 100.0 {
            z = z * z - 6.0;
            k += 1;
        }
        let l = HenonParameter::real(1e-4, -6.0).unwrap();
        let o = orbit(&l, &PhasePoint::real(0.0, 0.0), 50, 100.0, Direction::Forward).unwrap();
        assert_eq!(o.escaped_at, Some(k));
        assert!(k <= 4);
        assert!(o.points[k].x.norm() > 100.0);
    }

    #[test]
    fn fixed_point_never_escapes() {
        let l = HenonParameter::real(1.0, 0.0).unwrap();
        let o = orbit(&l, &PhasePoint::real(0.0, 0.0), 200, 100.0, Direction::Forward).unwrap();
        assert_eq!(o.escaped_at, None);
        assert_eq!(o.points.len(), 201);
    }

    #[test]
    fn backward_orbit_escapes_in_y() {
        let l = HenonParameter::real(1e-4, -6.0).unwrap();
        let p = PhasePoint::real(1e3, 0.0);
        let o = orbit(&l, &p, 50, 100.0, Direction::Backward).unwrap();
        let k = o.escaped_at.expect("backward escape");
        assert!(o.points[k].y.norm() > 100.0);
        // |y| grows monotonically once it leaves the origin.
        for w in o.points[1..=k].windows(2) {
            assert!(w[1].y.norm() > w[0].y.norm());
        }
    }

    #[test]
    fn orbit_rejects_zero_iterations() {
        let l = HenonParameter::real(1.0, 0.0).unwrap();
        assert!(orbit(&l, &PhasePoint::real(0.0, 0.0), 0, 100.0, Direction::Forward).is_err());
    }
}
