//! Escape-rate Green's functions `G±`, the gradients of `log φ±`, powers of the
//! Böttcher coordinate, and the one-dimensional objects for `p_c(z) = z² + c`.
//!
//! Every evaluation follows the orbit until it enters the filtration region
//! (`|x| > R, |x| ≥ |y|` forward, `|y| > R, |y| ≥ |x|` backward) and then sums the
//! telescoping tail `log|x_{k+1}| − 2·log|x_k| = log|1 + (c − a·y_k)/x_k²|` until
//! the correction factors equal one to machine precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicString;
use crate::dynamics::{apply, inverse_unchecked, HenonParameter, PhasePoint, DEFAULT_ESCAPE_RADIUS, OVERFLOW_LIMIT};
use crate::error::{HenonError, Result};

/// Tail factors `|ε| < TAIL_EPS` are one in double precision.
const TAIL_EPS: f64 = 1e-17;

/// Escape controls shared by every potential evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeControl {
    pub escape_radius: f64,
    pub max_iter: usize,
}

impl Default for EscapeControl {
    fn default() -> Self {
        Self { escape_radius: DEFAULT_ESCAPE_RADIUS, max_iter: 500 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialStatus {
    /// The orbit escaped; the value is positive (for `G₋`, above `log|a|`).
    Escaping,
    /// The orbit stayed inside the escape radius for `max_iter` steps.
    Bounded,
    /// Neither: the orbit left the radius without entering the filtration region.
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PotentialValue {
    pub value: f64,
    pub error_bound: f64,
    pub iterations_used: usize,
    pub status: PotentialStatus,
}

impl PotentialValue {
    pub fn is_decided(&self) -> bool {
        self.status != PotentialStatus::Undecided
    }

    pub fn is_escaping(&self) -> bool {
        self.status == PotentialStatus::Escaping
    }
}

/// The `(1,0)`-derivative pair of `log φ`: `dG = Re(gx·dx + gy·dy)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexGradient {
    pub gx: Complex64,
    pub gy: Complex64,
}

impl ComplexGradient {
    pub fn norm(&self) -> f64 {
        (self.gx.norm_sqr() + self.gy.norm_sqr()).sqrt()
    }

    /// `gx·dx + gy·dy`.
    pub fn apply(&self, dx: Complex64, dy: Complex64) -> Complex64 {
        self.gx * dx + self.gy * dy
    }

    /// Gradient of `G` in real coordinates `(Re x, Im x, Re y, Im y)`.
    pub fn real_gradient(&self) -> [f64; 4] {
        [self.gx.re, -self.gx.im, self.gy.re, -self.gy.im]
    }

    pub fn scale(&self, s: f64) -> ComplexGradient {
        ComplexGradient { gx: self.gx * s, gy: self.gy * s }
    }
}

/// `φ₊^{2ⁿ}(p) = φ₊(fⁿ(p))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BottcherPower {
    pub n: usize,
    pub value: Complex64,
    /// The logarithm produced by the principal-branch product; `exp(log_value) = value`.
    pub log_value: Complex64,
}

/// Potential and gradient from one pass along the orbit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialEval {
    pub potential: PotentialValue,
    pub gradient: Option<ComplexGradient>,
}

/// `u_c(x, y) = y² + c − x`, which equals `a·y(f⁻¹(p))`.
#[inline]
pub fn u_c(p: &PhasePoint, c: Complex64) -> Complex64 {
    p.y * p.y + c - p.x
}

#[inline]
pub fn p_c(z: Complex64, c: Complex64) -> Complex64 {
    z * z + c
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(HenonError::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

#[derive(Clone, Copy)]
struct Rows {
    /// Escape-coordinate row of the cocycle and the other row.
    lead: [Complex64; 2],
    other: [Complex64; 2],
    log_scale: f64,
}

impl Rows {
    fn identity_for(lead_is_x: bool) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if lead_is_x {
            Rows { lead: [one, zero], other: [zero, one], log_scale: 0.0 }
        } else {
            Rows { lead: [zero, one], other: [one, zero], log_scale: 0.0 }
        }
    }

    fn renormalize(&mut self) {
        let s = self.lead.iter().chain(self.other.iter()).fold(0.0_f64, |m, z| m.max(z.norm()));
        if s > 0.0 && s.is_finite() {
            let inv = 1.0 / s;
            for z in self.lead.iter_mut().chain(self.other.iter_mut()) {
                *z *= inv;
            }
            self.log_scale += s.ln();
        }
    }

    /// `2^{−k} · (lead row of the k-step cocycle) / coord`.
    fn gradient(&self, k: usize, coord: Complex64) -> ComplexGradient {
        let m = coord.norm();
        let factor = (self.log_scale - k as f64 * std::f64::consts::LN_2 - m.ln()).exp();
        let unit = coord.conj() / m;
        ComplexGradient { gx: self.lead[0] * unit * factor, gy: self.lead[1] * unit * factor }
    }
}

/// Forward pass: `G₊(p)` and optionally `d log φ₊(p)`.
pub fn forward_potential(
    lambda: &HenonParameter,
    p: &PhasePoint,
    ctl: &EscapeControl,
    want_gradient: bool,
) -> PotentialEval {
    let (a, c) = (lambda.a, lambda.c);
    let r = ctl.escape_radius;
    let mut q = *p;
    let mut rows = Rows::identity_for(true);
    let mut max_seen = q.max_modulus();
    let mut k = 0usize;
    let escaped = |q: &PhasePoint| {
        let mx = q.x.norm();
        mx > r && mx >= q.y.norm()
    };
    while !escaped(&q) {
        if k >= ctl.max_iter || !q.is_finite() || q.max_modulus() > OVERFLOW_LIMIT {
            let status = if max_seen <= r { PotentialStatus::Bounded } else { PotentialStatus::Undecided };
            let value = PotentialValue { value: 0.0, error_bound: 0.0, iterations_used: k, status };
            return PotentialEval { potential: value, gradient: None };
        }
        if want_gradient {
            let new_lead = [
                q.x * 2.0 * rows.lead[0] - a * rows.other[0],
                q.x * 2.0 * rows.lead[1] - a * rows.other[1],
            ];
            rows.other = rows.lead;
            rows.lead = new_lead;
            rows.renormalize();
        }
        q = apply(lambda, &q);
        max_seen = max_seen.max(q.max_modulus());
        k += 1;
    }
    let n0 = k;
    let mut value = q.x.norm().ln() / (n0 as f64).exp2();
    let mut grad = want_gradient.then(|| rows.gradient(k, q.x));
    let mut error_bound;
    loop {
        let eps = (c - a * q.y) / (q.x * q.x);
        let weight = 0.5 / (k as f64).exp2();
        value += weight * (Complex64::new(1.0, 0.0) + eps).norm().ln();
        error_bound = 2.0 * weight * eps.norm() * eps.norm().min(1.0);
        if want_gradient {
            let new_lead = [
                q.x * 2.0 * rows.lead[0] - a * rows.other[0],
                q.x * 2.0 * rows.lead[1] - a * rows.other[1],
            ];
            rows.other = rows.lead;
            rows.lead = new_lead;
            rows.renormalize();
        }
        q = apply(lambda, &q);
        k += 1;
        if want_gradient {
            grad = Some(rows.gradient(k, q.x));
        }
        if eps.norm() < TAIL_EPS || k >= n0 + 64 || q.x.norm() > OVERFLOW_LIMIT.sqrt() {
            break;
        }
    }
    PotentialEval {
        potential: PotentialValue { value, error_bound, iterations_used: k, status: PotentialStatus::Escaping },
        gradient: grad,
    }
}

/// Backward pass: `G₋(p)` (including the additive `log|a|`) and optionally `d log φ₋(p)`.
pub fn backward_potential(
    lambda: &HenonParameter,
    p: &PhasePoint,
    ctl: &EscapeControl,
    want_gradient: bool,
) -> PotentialEval {
    let (a, c) = (lambda.a, lambda.c);
    let log_a = a.norm().ln();
    let inv_a = Complex64::new(1.0, 0.0) / a;
    let r = ctl.escape_radius;
    let mut q = *p;
    let mut rows = Rows::identity_for(false);
    let mut max_seen = q.max_modulus();
    let mut k = 0usize;
    let escaped = |q: &PhasePoint| {
        let my = q.y.norm();
        my > r && my >= q.x.norm()
    };
    // Df⁻¹(x, y) = [[0, 1], [−1/a, 2y/a]]: the y-row becomes −row_x/a + (2y/a)·row_y.
    let step_rows = |rows: &mut Rows, q: &PhasePoint| {
        let new_lead = [
            -rows.other[0] * inv_a + q.y * 2.0 * inv_a * rows.lead[0],
            -rows.other[1] * inv_a + q.y * 2.0 * inv_a * rows.lead[1],
        ];
        rows.other = rows.lead;
        rows.lead = new_lead;
        rows.renormalize();
    };
    while !escaped(&q) {
        if k >= ctl.max_iter || !q.is_finite() || q.max_modulus() > OVERFLOW_LIMIT {
            let status = if max_seen <= r { PotentialStatus::Bounded } else { PotentialStatus::Undecided };
            let value = PotentialValue { value: log_a, error_bound: 0.0, iterations_used: k, status };
            return PotentialEval { potential: value, gradient: None };
        }
        if want_gradient {
            step_rows(&mut rows, &q);
        }
        q = inverse_unchecked(lambda, &q);
        max_seen = max_seen.max(q.max_modulus());
        k += 1;
    }
    let n0 = k;
    let mut value = (q.y.norm().ln() - log_a) / (n0 as f64).exp2() + log_a;
    let mut grad = want_gradient.then(|| rows.gradient(k, q.y));
    let mut error_bound;
    loop {
        let eps = (c - q.x) / (q.y * q.y);
        let weight = 0.5 / (k as f64).exp2();
        value += weight * (Complex64::new(1.0, 0.0) + eps).norm().ln();
        error_bound = 2.0 * weight * eps.norm() * eps.norm().min(1.0);
        if want_gradient {
            step_rows(&mut rows, &q);
        }
        q = inverse_unchecked(lambda, &q);
        k += 1;
        if want_gradient {
            grad = Some(rows.gradient(k, q.y));
        }
        if eps.norm() < TAIL_EPS || k >= n0 + 64 || q.y.norm() > OVERFLOW_LIMIT.sqrt() {
            break;
        }
    }
    PotentialEval {
        potential: PotentialValue { value, error_bound, iterations_used: k, status: PotentialStatus::Escaping },
        gradient: grad,
    }
}

/// `G₊(p) = lim log⁺|fⁿ(p)| / 2ⁿ`. Points that never leave the escape radius get value 0.
pub fn green_plus(lambda: &HenonParameter, p: &PhasePoint, tol: f64, ctl: &EscapeControl) -> Result<PotentialValue> {
    check_tol(tol)?;
    Ok(forward_potential(lambda, p, ctl, false).potential)
}

/// `G₋(p) = lim log⁺|f⁻ⁿ(p)| / 2ⁿ + log|a|`.
pub fn green_minus(lambda: &HenonParameter, p: &PhasePoint, tol: f64, ctl: &EscapeControl) -> Result<PotentialValue> {
    check_tol(tol)?;
    Ok(backward_potential(lambda, p, ctl, false).potential)
}

fn gradient_or_error(eval: PotentialEval, p: &PhasePoint, direction: &'static str) -> Result<ComplexGradient> {
    match (eval.potential.status, eval.gradient) {
        (PotentialStatus::Escaping, Some(g)) => Ok(g),
        (PotentialStatus::Undecided, _) => Err(HenonError::Undecided { iterations: eval.potential.iterations_used }),
        _ => Err(HenonError::NotEscaping { point: *p, direction }),
    }
}

/// `d log φ₊(p) = lim 2⁻ⁿ · dxₙ / xₙ`.
pub fn grad_log_phi_plus(lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> Result<ComplexGradient> {
    gradient_or_error(forward_potential(lambda, p, ctl, true), p, "forward")
}

/// `d log φ₋(p) = lim 2⁻ⁿ · dy₋ₙ / y₋ₙ`.
pub fn grad_log_phi_minus(lambda: &HenonParameter, p: &PhasePoint, ctl: &EscapeControl) -> Result<ComplexGradient> {
    gradient_or_error(backward_potential(lambda, p, ctl, true), p, "backward")
}

/// Largest modulus at which `xₙ` is still carried explicitly in [`phi_plus_power`].
const PHI_EXPLICIT_LIMIT: f64 = 1e100;

/// `φ₊(fⁿ(p))` as the principal-branch product
/// `xₙ · ∏_{k≥n} (x_{k+1}/x_k²)^{2^{−(k+1−n)}}`.
pub fn phi_plus_power(lambda: &HenonParameter, p: &PhasePoint, n: usize, ctl: &EscapeControl) -> Result<BottcherPower> {
    phi_plus_power_depth(lambda, p, n, ctl, 0)
}

/// As [`phi_plus_power`], carrying the product `extra` iterates past the point where
/// the correction factors reach one. The result must not depend on `extra`.
pub fn phi_plus_power_depth(
    lambda: &HenonParameter,
    p: &PhasePoint,
    n: usize,
    ctl: &EscapeControl,
    extra: usize,
) -> Result<BottcherPower> {
    let (a, c) = (lambda.a, lambda.c);
    let one = Complex64::new(1.0, 0.0);
    let mut q = *p;
    // Advance to index n, or to the first index where x is too large to carry.
    let mut m = 0;
    while m < n && q.x.norm() < PHI_EXPLICIT_LIMIT {
        q = apply(lambda, &q);
        m += 1;
        if !q.is_finite() {
            return Err(HenonError::Overflow { index: m });
        }
    }
    let mut log = q.x.ln();
    let mut k = m;
    let mut settled = 0usize;
    loop {
        if k - m > ctl.max_iter {
            return Err(HenonError::NotEscaping { point: *p, direction: "forward" });
        }
        let eps = (c - a * q.y) / (q.x * q.x);
        let weight = 0.5 / ((k - m) as f64).exp2();
        log += (one + eps).ln() * weight;
        q = apply(lambda, &q);
        k += 1;
        let escaped = q.x.norm() > ctl.escape_radius && q.x.norm() >= q.y.norm();
        if escaped && eps.norm() < TAIL_EPS {
            settled += 1;
            if settled > extra {
                break;
            }
        }
        if !q.is_finite() || q.x.norm() > OVERFLOW_LIMIT.sqrt() {
            if escaped {
                break;
            }
            return Err(HenonError::NotEscaping { point: *p, direction: "forward" });
        }
    }
    // Integer powers are branch-free: φ(fⁿp) = φ(fᵐp)^{2^{n−m}}.
    let log_value = log * ((n - m) as f64).exp2();
    Ok(BottcherPower { n, value: log_value.exp(), log_value })
}

/// One-dimensional escape rate `G_{p_c}(z)`.
pub fn green_1d(z: Complex64, c: Complex64, tol: f64, ctl: &EscapeControl) -> Result<PotentialValue> {
    check_tol(tol)?;
    Ok(eval_1d(z, c, ctl).0)
}

/// `d log φ_{p_c}/dz`, or `None` for non-escaping `z`.
pub fn grad_log_phi_1d(z: Complex64, c: Complex64, ctl: &EscapeControl) -> Option<Complex64> {
    eval_1d(z, c, ctl).1
}

/// `φ_{p_c}(z)` by the principal product; valid where `G_{p_c}(z) > G_{p_c}(0)`.
pub fn phi_1d(z: Complex64, c: Complex64, ctl: &EscapeControl) -> Option<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut w = z;
    let mut log = w.ln();
    for k in 0..ctl.max_iter {
        let eps = c / (w * w);
        log += (one + eps).ln() * (0.5 / (k as f64).exp2());
        w = w * w + c;
        if !w.is_finite() {
            return None;
        }
        if w.norm() > ctl.escape_radius && eps.norm() < TAIL_EPS {
            return Some(log.exp());
        }
    }
    None
}

fn eval_1d(z: Complex64, c: Complex64, ctl: &EscapeControl) -> (PotentialValue, Option<Complex64>) {
    let mut w = z;
    // d w_k / dz, renormalized.
    let mut deriv = Complex64::new(1.0, 0.0);
    let mut log_scale = 0.0;
    let mut max_seen = w.norm();
    let mut k = 0;
    while w.norm() <= ctl.escape_radius {
        if k >= ctl.max_iter || !w.is_finite() {
            let status = if max_seen <= ctl.escape_radius { PotentialStatus::Bounded } else { PotentialStatus::Undecided };
            return (PotentialValue { value: 0.0, error_bound: 0.0, iterations_used: k, status }, None);
        }
        deriv *= w * 2.0;
        let s = deriv.norm();
        if s > 0.0 {
            deriv /= s;
            log_scale += s.ln();
        }
        w = w * w + c;
        max_seen = max_seen.max(w.norm());
        k += 1;
    }
    let n0 = k;
    let mut value = w.norm().ln() / (n0 as f64).exp2();
    let mut error_bound;
    let grad_at = |deriv: Complex64, log_scale: f64, k: usize, w: Complex64| {
        let f = (log_scale - k as f64 * std::f64::consts::LN_2 - w.norm().ln()).exp();
        deriv * (w.conj() / w.norm()) * f
    };
    let mut grad;
    loop {
        let eps = c / (w * w);
        let weight = 0.5 / (k as f64).exp2();
        value += weight * (Complex64::new(1.0, 0.0) + eps).norm().ln();
        error_bound = 2.0 * weight * eps.norm() * eps.norm().min(1.0);
        deriv *= w * 2.0;
        let s = deriv.norm();
        deriv /= s;
        log_scale += s.ln();
        w = w * w + c;
        k += 1;
        grad = grad_at(deriv, log_scale, k, w);
        if eps.norm() < TAIL_EPS || k >= n0 + 64 {
            break;
        }
    }
    (PotentialValue { value, error_bound, iterations_used: k, status: PotentialStatus::Escaping }, Some(grad))
}

/// The `n`-th preimages `ξ_α` of 0 under `p_c`, `ξ_∅ = 0`,
/// `ξ_{α0} = √(ξ_α − c)` (principal) and `ξ_{α1} = −ξ_{α0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageTable {
    pub c: Complex64,
    /// `levels[n][α.index()] = ξ_α`.
    levels: Vec<Vec<Complex64>>,
}

impl PreimageTable {
    pub fn max_depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn get(&self, alpha: &DyadicString) -> Option<Complex64> {
        self.levels.get(alpha.len()).map(|level| level[alpha.index()])
    }

    pub fn level(&self, n: usize) -> &[Complex64] {
        &self.levels[n]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicString, Complex64)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(n, level)| level.iter().enumerate().map(move |(i, &z)| (DyadicString::from_index(i, n), z)))
    }

    /// The label among `𝒜ⁿ` closest to `x` and the two smallest distances.
    pub fn nearest(&self, n: usize, x: Complex64) -> (DyadicString, f64, Option<(DyadicString, f64)>) {
        let mut best = (0usize, f64::INFINITY);
        let mut second: Option<(usize, f64)> = None;
        for (i, &z) in self.levels[n].iter().enumerate() {
            let d = (x - z).norm();
            if d < best.1 {
                if best.1.is_finite() {
                    second = Some(best);
                }
                best = (i, d);
            } else if second.map_or(true, |s| d < s.1) {
                second = Some((i, d));
            }
        }
        (
            DyadicString::from_index(best.0, n),
            best.1,
            second.map(|(i, d)| (DyadicString::from_index(i, n), d)),
        )
    }
}

/// Requires a disconnected Julia set (escaping critical orbit).
pub fn preimage_table(c: Complex64, max_depth: usize, ctl: &EscapeControl) -> Result<PreimageTable> {
    let g0 = eval_1d(Complex64::new(0.0, 0.0), c, ctl).0;
    if !g0.is_escaping() {
        return Err(HenonError::RegimeViolation(format!("critical orbit of z²{c:+} does not escape")));
    }
    let mut levels = vec![vec![Complex64::new(0.0, 0.0)]];
    for n in 0..max_depth {
        let prev = &levels[n];
        let mut next = vec![Complex64::new(0.0, 0.0); prev.len() * 2];
        for (i, &xi) in prev.iter().enumerate() {
            let d = xi - c;
            if d.norm() == 0.0 {
                return Err(HenonError::RegimeViolation(format!("preimage {xi} equals c")));
            }
            let root = d.sqrt();
            next[2 * i] = root;
            next[2 * i + 1] = -root;
        }
        levels.push(next);
    }
    Ok(PreimageTable { c, levels })
}

/// Reduces the imaginary part of a logarithm difference into `(−π, π]`.
pub fn wrap_log(z: Complex64) -> Complex64 {
    let mut im = z.im % (2.0 * PI);
    if im > PI {
        im -= 2.0 * PI;
    } else if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(z.re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lam() -> HenonParameter {
        HenonParameter::real(1e-4, -6.0).unwrap()
    }

    fn ctl() -> EscapeControl {
        EscapeControl::default()
    }

    /// Raw truncated limit `log|x_n|/2ⁿ` at high depth: the slow oracle.
    fn raw_green_plus(lambda: &HenonParameter, p: &PhasePoint, steps: usize) -> f64 {
        // Carry the orbit in log-modulus once it is huge: log|x_{k+1}| ≈ 2 log|x_k|.
        let mut q = *p;
        let mut k = 0;
        while k < steps && q.x.norm() < 1e60 {
            q = apply(lambda, &q);
            k += 1;
        }
        q.x.norm().ln() / (k as f64).exp2()
    }

    #[test]
    fn far_field_value_matches_log_modulus() {
        let p = PhasePoint::real(10f64.exp(), 0.0);
        let g = green_plus(&lam(), &p, 1e-12, &ctl()).unwrap();
        assert!(g.is_escaping());
        assert!((g.value - 10.0).abs() < 1e-3);
        assert!((g.value - raw_green_plus(&lam(), &p, 40)).abs() < 1e-6);
    }

    #[test]
    fn tail_refinement_agrees_with_raw_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = PhasePoint::new(
                Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
                Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            );
            let g = green_plus(&lam(), &p, 1e-12, &ctl()).unwrap();
            if !g.is_escaping() {
                continue;
            }
            let raw = raw_green_plus(&lam(), &p, 60);
            assert!((g.value - raw).abs() < 1e-12 * raw.max(1.0) + 1e-16 * 2f64.powi(60), "{} vs {}", g.value, raw);
        }
    }

    #[test]
    fn bounded_fixed_point_has_zero_potential() {
        let l = HenonParameter::real(0.3, -0.5).unwrap();
        // Fixed points solve x² − (1 + a)x + c = 0.
        let disc = ((1.3f64).powi(2) + 2.0).sqrt();
        let x = (1.3 - disc) / 2.0;
        let g = green_plus(&l, &PhasePoint::real(x, x), 1e-10, &ctl()).unwrap();
        assert_eq!(g.status, PotentialStatus::Bounded);
        assert_eq!(g.value, 0.0);
        assert_eq!(g.error_bound, 0.0);
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(green_plus(&lam(), &PhasePoint::real(1.0, 0.0), 0.0, &ctl()).is_err());
        assert!(green_1d(Complex64::new(0.0, 0.0), Complex64::new(-6.0, 0.0), -1.0, &ctl()).is_err());
    }

    #[test]
    fn green_minus_synthetic_orbit() {
        // Choose p = f(q) with q far out in y: backward orbit of p passes through q, whose
        // y-coordinate grows like |y_{-n}| ≈ e^{2ⁿ s}; the raw rate s must reproduce G₋ − log|a|.
        // The raw rate converges like log|a|/2ⁿ, so a moderate |a| keeps the oracle sharp.
        let l = HenonParameter::real(0.5, -6.0).unwrap();
        let q = PhasePoint::new(Complex64::new(0.5, 0.1), Complex64::new(1e3, 2e2));
        let p = apply(&l, &q);
        let g = green_minus(&l, &p, 1e-12, &ctl()).unwrap();
        let mut z = p;
        let mut k = 0;
        while z.y.norm() < 1e150 {
            z = inverse_unchecked(&l, &z);
            k += 1;
        }
        let s = z.y.norm().ln() / (k as f64).exp2();
        assert!((g.value - (s + l.a.norm().ln())).abs() < 2e-2, "{} vs {}", g.value, s);
        assert!(g.value >= l.a.norm().ln());
    }

    #[test]
    fn green_minus_is_at_least_log_a() {
        let l = lam();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let p = PhasePoint::new(
                Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
                Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
            );
            let g = green_minus(&l, &p, 1e-12, &ctl()).unwrap();
            if g.is_decided() {
                assert!(g.value >= l.a.norm().ln() - 1e-12);
            }
        }
    }

    #[test]
    fn critical_value_escapes_for_c_minus_six() {
        // Oracle: raw 1D iteration 0 → −6 → 30 → 894 → …, log|z_k|/2^k at k = 6.
        let mut z = 0.0f64;
        let mut k = 0;
        while z.abs() < 1e80 {
            z = z * z - 6.0;
            k += 1;
        }
        let oracle = z.abs().ln() / (k as f64).exp2();
        let g = green_1d(Complex64::new(0.0, 0.0), Complex64::new(-6.0, 0.0), 1e-14, &ctl()).unwrap();
        assert!(g.value > 0.0);
        assert!((g.value - oracle).abs() < 1e-12);
        assert!((g.value - G0_C_MINUS_SIX).abs() < 1e-12);
    }

    /// `G_{p_c}(0)` at `c = −6`, frozen from the raw-iteration oracle above.
    pub(crate) const G0_C_MINUS_SIX: f64 = 0.849_462_752_696_550_4;

    #[test]
    fn green_1d_functional_equation() {
        let c = Complex64::new(-6.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            let g = green_1d(z, c, 1e-12, &ctl()).unwrap();
            if !g.is_escaping() {
                continue;
            }
            let g2 = green_1d(p_c(z, c), c, 1e-12, &ctl()).unwrap();
            assert!((g2.value - 2.0 * g.value).abs() <= 1e-8 * g2.value);
        }
    }

    #[test]
    fn u_c_substitution() {
        let c = Complex64::new(-6.0, 1.0);
        assert_eq!(u_c(&PhasePoint::new(c, Complex64::new(0.0, 0.0)), c), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn preimages_for_c_minus_six() {
        let c = Complex64::new(-6.0, 0.0);
        let t = preimage_table(c, 6, &ctl()).unwrap();
        let s6 = 6f64.sqrt();
        assert!((t.get(&"0".parse().unwrap()).unwrap() - s6).norm() < 1e-15);
        assert!((t.get(&"1".parse().unwrap()).unwrap() + s6).norm() < 1e-15);
        for (alpha, xi) in t.iter() {
            if alpha.len() == t.max_depth() {
                continue;
            }
            let x0 = t.get(&alpha.child(false)).unwrap();
            let x1 = t.get(&alpha.child(true)).unwrap();
            assert_eq!(x0, -x1);
            assert!(x0.norm() > 0.0);
            assert!((p_c(x0, c) - xi).norm() < 1e-12);
            assert!((p_c(x1, c) - xi).norm() < 1e-12);
        }
    }

    #[test]
    fn preimage_potentials_halve_per_level() {
        let c = Complex64::new(-6.0, 0.0);
        let t = preimage_table(c, 5, &ctl()).unwrap();
        let g0 = green_1d(Complex64::new(0.0, 0.0), c, 1e-14, &ctl()).unwrap().value;
        for (alpha, xi) in t.iter() {
            let g = green_1d(xi, c, 1e-14, &ctl()).unwrap().value;
            let want = g0 / (alpha.len() as f64).exp2();
            assert!((g - want).abs() <= 1e-8 * want, "{alpha}: {g} vs {want}");
        }
    }

    #[test]
    fn connected_julia_set_rejected() {
        assert!(matches!(
            preimage_table(Complex64::new(-0.5, 0.0), 3, &ctl()),
            Err(HenonError::RegimeViolation(_))
        ));
    }

    #[test]
    fn phi_far_field_product_oracle() {
        // Three factors of the product by hand: x·(x₁/x²)^{1/2}·(x₂/x₁²)^{1/4}.
        let l = lam();
        let p = PhasePoint::real(1e6, 0.0);
        let x0 = p.x;
        let p1 = apply(&l, &p);
        let p2 = apply(&l, &p1);
        let oracle = x0 * (p1.x / (x0 * x0)).sqrt() * (p2.x / (p1.x * p1.x)).powf(0.25);
        let v = phi_plus_power(&l, &p, 0, &ctl()).unwrap().value;
        assert!((v - oracle).norm() < 1e-9 * oracle.norm());
        assert!((v / 1e6 - 1.0).norm() < 1e-6);
    }

    #[test]
    fn phi_independent_of_extra_depth() {
        let l = HenonParameter::new(Complex64::new(1e-4, 2e-5), Complex64::new(-6.0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 200 {
            let p = PhasePoint::new(
                Complex64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
                Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            );
            let Ok(a) = phi_plus_power_depth(&l, &p, 1, &ctl(), 0) else { continue };
            let b = phi_plus_power_depth(&l, &p, 1, &ctl(), 5).unwrap();
            assert!((a.value - b.value).norm() <= 1e-9 * a.value.norm());
            checked += 1;
        }
    }

    #[test]
    fn wrap_log_reduces_phase() {
        let z = wrap_log(Complex64::new(1.0, 3.0 * PI + 0.25));
        assert!((z.im - (-PI + 0.25)).abs() < 1e-12);
        assert_eq!(wrap_log(Complex64::new(0.0, 0.5)).im, 0.5);
    }
}
