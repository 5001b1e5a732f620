//! Continuation of locus boundary points across parameters, conserving the wall
//! invariants `φ₊^{2ⁿ}`, `y` or `u_c`, and checks that the resulting motion is
//! holomorphic and injective.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{HenonParameter, PhasePoint};
use crate::error::{HenonError, Result};
use crate::locus::{project_to_wall, rounding_floor, tangency, tangency_partials, LocusCurve, WallSpec, WallTag};
use crate::potentials::ComplexGradient;
use crate::potentials::{phi_plus_power, u_c, wrap_log, EscapeControl};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InvariantKind {
    /// `φ₊^{2ⁿ}`, conserved on `{G₊ = r/2ⁿ}`.
    PhiPlusPower { n: usize },
    /// `y`, conserved on `{|y| = y_bound}`.
    YValue,
    /// `u_c`, rescaled by `a/a₀` so the point stays on `{|u_c| = |a|·y_bound}`.
    #[serde(rename = "U_C_VALUE")]
    UcValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionInvariant {
    #[serde(flatten)]
    pub kind: InvariantKind,
    pub value: Complex64,
}

impl MotionInvariant {
    /// The invariant of a point on `wall`, whose level for `G` walls is `r/2ⁿ`.
    pub fn for_wall(lambda: &HenonParameter, p: &PhasePoint, wall: &WallSpec, r: f64, ctl: &EscapeControl) -> Result<Self> {
        match wall.tag {
            WallTag::YBound => Ok(Self { kind: InvariantKind::YValue, value: p.y }),
            WallTag::UWall | WallTag::PWall => Ok(Self { kind: InvariantKind::UcValue, value: u_c(p, lambda.c) }),
            WallTag::GOuter | WallTag::GInner => {
                let n = (r / wall.level).log2().round();
                if !(n >= 0.0) || ((r / n.exp2()) / wall.level - 1.0).abs() > 1e-9 {
                    return Err(HenonError::InvalidArgument(format!("level {} is not r/2ⁿ for r = {r}", wall.level)));
                }
                Self::phi_plus_power(lambda, p, n as usize, ctl)
            }
        }
    }

    pub fn phi_plus_power(lambda: &HenonParameter, p: &PhasePoint, n: usize, ctl: &EscapeControl) -> Result<Self> {
        Ok(Self { kind: InvariantKind::PhiPlusPower { n }, value: phi_plus_power(lambda, p, n, ctl)?.value })
    }

    /// `(E(p), ∂E/∂x, ∂E/∂y, scale)` for the equation `E = 0` at `lambda`, where the
    /// path started at `a0`.
    fn equation(
        &self,
        lambda: &HenonParameter,
        a0: Complex64,
        p: &PhasePoint,
        grad_plus: &ComplexGradient,
        ctl: &EscapeControl,
    ) -> Result<(Complex64, Complex64, Complex64, f64, f64)> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self.kind {
            InvariantKind::YValue => {
                let scale = self.value.norm().max(1.0);
                (p.y - self.value, zero, one, scale, 4.0 * f64::EPSILON * p.y.norm())
            }
            InvariantKind::UcValue => {
                let target = self.value * (lambda.a / a0);
                let round = 8.0 * f64::EPSILON * (p.x.norm() + p.y.norm_sqr() + lambda.c.norm());
                (u_c(p, lambda.c) - target, -one, p.y * 2.0, target.norm(), round)
            }
            InvariantKind::PhiPlusPower { n } => {
                // Work with logarithms: |φ^{2ⁿ}| = e^{r} can be large and only its
                // argument is delicate.
                let b = phi_plus_power(lambda, p, n, ctl)?;
                let k = (n as f64).exp2();
                let e = wrap_log(b.log_value - self.value.ln());
                (e, grad_plus.gx * k, grad_plus.gy * k, 1.0, 8.0 * f64::EPSILON * b.log_value.norm().max(1.0))
            }
        })
    }

    /// `|E(p)|` relative to the invariant's scale.
    pub fn defect(&self, lambda: &HenonParameter, a0: Complex64, p: &PhasePoint, ctl: &EscapeControl) -> Result<f64> {
        let t = tangency(lambda, p, ctl)?;
        let (e, _, _, scale, _) = self.equation(lambda, a0, p, &t.grad_plus, ctl)?;
        Ok(e.norm() / scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct MotionOptions {
    pub max_param_step: f64,
    pub tol_res: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    /// Times a failed parameter step may be bisected.
    pub max_bisections: usize,
}

impl Default for MotionOptions {
    fn default() -> Self {
        Self { max_param_step: 2e-6, tol_res: 1e-9, max_newton: 30, max_halvings: 8, max_bisections: 6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub lambda: HenonParameter,
    pub p: PhasePoint,
    /// Normalized `|D|`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MotionTrack {
    pub invariant: MotionInvariant,
    pub waypoints: Vec<Waypoint>,
    pub complete: bool,
    /// Parameter at which continuation failed, with the reason.
    pub failure: Option<(HenonParameter, String)>,
}

impl MotionTrack {
    pub fn last(&self) -> Option<&Waypoint> {
        self.waypoints.last()
    }
}

/// Uniform parameter path from `from` to `to` with steps at most `max_step`.
pub fn parameter_path(from: &HenonParameter, to: &HenonParameter, max_step: f64) -> Vec<HenonParameter> {
    let d = from.distance(to);
    let steps = ((d / max_step).ceil() as usize).max(1);
    (0..=steps).map(|k| from.lerp(to, k as f64 / steps as f64)).collect()
}

/// Solves `{D = 0, E = 0}` at `lambda` by damped complex Newton from `p0`.
pub fn solve_invariant(
    inv: &MotionInvariant,
    lambda: &HenonParameter,
    a0: Complex64,
    p0: &PhasePoint,
    opts: &MotionOptions,
    ctl: &EscapeControl,
) -> Result<Waypoint> {
    let merit = |p: &PhasePoint| -> Option<(f64, crate::locus::TangencyValue)> {
        let t = tangency(lambda, p, ctl).ok()?;
        let (e, _, _, scale, _) = inv.equation(lambda, a0, p, &t.grad_plus, ctl).ok()?;
        Some((t.normalized + e.norm() / scale, t))
    };
    let mut p = *p0;
    let (mut m, mut t) = merit(&p).ok_or_else(|| HenonError::InvalidArgument("start point outside U₊ ∩ U₋".into()))?;
    for _ in 0..opts.max_newton {
        let (e, ex, ey, scale, e_round) = inv.equation(lambda, a0, &p, &t.grad_plus, ctl)?;
        let (dx, dy) = tangency_partials(lambda, &p, ctl)?;
        let d_ok = t.normalized < 1e-2 * opts.tol_res || t.d.norm() <= rounding_floor(&p, dx, dy);
        let e_ok = e.norm() < (1e-2 * opts.tol_res * scale).max(e_round);
        let det = dx * ey - dy * ex;
        if !(det.norm() > 1e-300) || !det.is_finite() {
            return Err(HenonError::Singular("invariant Jacobian is singular".into()));
        }
        let sx = -(t.d * ey - dy * e) / det;
        let sy = -(dx * e - t.d * ex) / det;
        if d_ok && e_ok {
            // One polishing step keeps the solve error well below the finite
            // differences taken across neighbouring parameters.
            let q = p.offset(sx, sy);
            let p = match merit(&q) {
                Some((mq, tq)) if mq <= m => return Ok(Waypoint { lambda: *lambda, p: q, residual: tq.normalized }),
                _ => p,
            };
            return Ok(Waypoint { lambda: *lambda, p, residual: t.normalized });
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let q = p.offset(sx * step, sy * step);
            if let Some((mq, tq)) = merit(&q) {
                if mq < m {
                    accepted = Some((q, mq, tq));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((q, mq, tq)) = accepted else {
            break;
        };
        p = q;
        m = mq;
        t = tq;
    }
    // Stagnation is success only if the point is already within tolerance.
    let (e, _, _, scale, e_round) = inv.equation(lambda, a0, &p, &t.grad_plus, ctl)?;
    let (dx, dy) = tangency_partials(lambda, &p, ctl)?;
    let d_ok = t.normalized < opts.tol_res || t.d.norm() <= rounding_floor(&p, dx, dy);
    if d_ok && e.norm() < (opts.tol_res * scale).max(4.0 * e_round) {
        return Ok(Waypoint { lambda: *lambda, p, residual: t.normalized });
    }
    Err(HenonError::Divergence { residual: m, steps: opts.max_newton })
}

fn advance(
    inv: &MotionInvariant,
    from: &Waypoint,
    prev: Option<&Waypoint>,
    to: &HenonParameter,
    a0: Complex64,
    opts: &MotionOptions,
    ctl: &EscapeControl,
    depth: usize,
) -> Result<Waypoint> {
    // Secant predictor when the step repeats the previous one.
    let guess = match prev {
        Some(w) if (from.lambda.distance(to) - w.lambda.distance(&from.lambda)).abs() < 1e-9 * from.lambda.distance(to) => {
            PhasePoint::new(from.p.x * 2.0 - w.p.x, from.p.y * 2.0 - w.p.y)
        }
        _ => from.p,
    };
    match solve_invariant(inv, to, a0, &guess, opts, ctl) {
        Ok(w) => Ok(w),
        Err(e) if depth >= opts.max_bisections => Err(e),
        Err(_) => {
            let mid = from.lambda.lerp(to, 0.5);
            let w = advance(inv, from, None, &mid, a0, opts, ctl, depth + 1)?;
            advance(inv, &w, Some(from), to, a0, opts, ctl, depth + 1)
        }
    }
}

/// Follows `seed` along `path`, recording one waypoint per path node.
pub fn track_point(
    inv: &MotionInvariant,
    path: &[HenonParameter],
    seed: &PhasePoint,
    opts: &MotionOptions,
    ctl: &EscapeControl,
) -> Result<MotionTrack> {
    let start = path.first().ok_or_else(|| HenonError::Empty("empty parameter path".into()))?;
    for w in path.windows(2) {
        if w[0].distance(&w[1]) > opts.max_param_step * (1.0 + 1e-9) {
            return Err(HenonError::InvalidArgument(format!(
                "path step {:.3e} exceeds maxParamStep {:.3e}",
                w[0].distance(&w[1]),
                opts.max_param_step
            )));
        }
    }
    let a0 = start.a;
    let first = solve_invariant(inv, start, a0, seed, opts, ctl)
        .map_err(|e| HenonError::InvalidArgument(format!("seed does not satisfy the invariant at the path start: {e}")))?;
    let mut waypoints = vec![first];
    for to in &path[1..] {
        let n = waypoints.len();
        let prev = (n >= 2).then(|| waypoints[n - 2]);
        match advance(inv, &waypoints[n - 1], prev.as_ref(), to, a0, opts, ctl, 0) {
            Ok(w) => waypoints.push(w),
            Err(e) => {
                return Ok(MotionTrack { invariant: *inv, waypoints, complete: false, failure: Some((*to, e.to_string())) });
            }
        }
    }
    Ok(MotionTrack { invariant: *inv, waypoints, complete: true, failure: None })
}

/// The complex direction in parameter space along which holomorphy is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamDirection {
    A,
    C,
}

impl ParamDirection {
    pub fn shift(&self, lambda: &HenonParameter, d: Complex64) -> HenonParameter {
        match self {
            ParamDirection::A => HenonParameter { a: lambda.a + d, c: lambda.c },
            ParamDirection::C => HenonParameter { a: lambda.a, c: lambda.c + d },
        }
    }
}

/// Tracked positions on the `(2·half+1)²` grid `λ₀ + step·(j + i·k)`, row-major in `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyGrid {
    pub step: f64,
    pub half: usize,
    /// One grid of positions per tracked point.
    pub points: Vec<Vec<PhasePoint>>,
}

impl HolomorphyGrid {
    fn side(&self) -> usize {
        2 * self.half + 1
    }

    fn at(&self, track: usize, j: i64, k: i64) -> PhasePoint {
        let h = self.half as i64;
        self.points[track][((k + h) as usize) * self.side() + (j + h) as usize]
    }
}

/// Tracks every seed from `λ₀` to each node of the grid.
pub fn holomorphy_grid(
    lambda0: &HenonParameter,
    seeds: &[(MotionInvariant, PhasePoint)],
    direction: ParamDirection,
    step: f64,
    half: usize,
    opts: &MotionOptions,
    ctl: &EscapeControl,
) -> Result<HolomorphyGrid> {
    let h = half as i64;
    let nodes: Vec<HenonParameter> = (-h..=h)
        .flat_map(|k| (-h..=h).map(move |j| (j, k)))
        .map(|(j, k)| direction.shift(lambda0, Complex64::new(j as f64, k as f64) * step))
        .collect();
    let points: Vec<Vec<PhasePoint>> = seeds
        .par_iter()
        .map(|(inv, seed)| {
            nodes
                .iter()
                .map(|node| {
                    let path = parameter_path(lambda0, node, opts.max_param_step);
                    let track = track_point(inv, &path, seed, opts, ctl)?;
                    match (track.complete, track.last()) {
                        (true, Some(w)) => Ok(w.p),
                        _ => Err(HenonError::Divergence { residual: f64::NAN, steps: path.len() }),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(HolomorphyGrid { step, half, points })
}

/// `max |∂p/∂λ̄| / |∂p/∂λ|` over tracks and interior grid nodes, by centered differences.
pub fn holomorphy_residual(grid: &HolomorphyGrid) -> Result<f64> {
    let side = grid.side();
    if grid.half == 0 || grid.points.is_empty() || grid.points.iter().any(|g| g.len() != side * side) {
        return Err(HenonError::InvalidArgument("incomplete holomorphy grid".into()));
    }
    let h = grid.half as i64;
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for t in 0..grid.points.len() {
        for k in (1 - h)..h {
            for j in (1 - h)..h {
                let (e, w) = (grid.at(t, j + 1, k), grid.at(t, j - 1, k));
                let (n, s) = (grid.at(t, j, k + 1), grid.at(t, j, k - 1));
                let two_h = 2.0 * grid.step;
                let ds = [(e.x - w.x) / two_h, (e.y - w.y) / two_h];
                let dt = [(n.x - s.x) / two_h, (n.y - s.y) / two_h];
                let dz: f64 = (0..2).map(|c| ((ds[c] - i * dt[c]) * 0.5).norm_sqr()).sum::<f64>().sqrt();
                let dzb: f64 = (0..2).map(|c| ((ds[c] + i * dt[c]) * 0.5).norm_sqr()).sum::<f64>().sqrt();
                if dz == 0.0 {
                    if dzb > 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    continue;
                }
                worst = worst.max(dzb / dz);
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectivityReport {
    pub min_distance: f64,
    /// Waypoint index and track indices of the closest pair.
    pub waypoint: usize,
    pub pair: (usize, usize),
    /// Minimum distance at each waypoint index.
    pub per_waypoint: Vec<f64>,
}

/// Minimum distance between distinct tracked points at each waypoint index.
pub fn injectivity_check(tracks: &[MotionTrack]) -> Result<InjectivityReport> {
    if tracks.len() < 2 {
        return Err(HenonError::InvalidArgument("injectivity needs at least two tracks".into()));
    }
    let len = tracks.iter().map(|t| t.waypoints.len()).max().unwrap_or(0);
    let mut report = InjectivityReport { min_distance: f64::INFINITY, waypoint: 0, pair: (0, 1), per_waypoint: Vec::with_capacity(len) };
    for w in 0..len {
        let pts: Vec<(usize, PhasePoint)> =
            tracks.iter().enumerate().filter_map(|(i, t)| t.waypoints.get(w).map(|wp| (i, wp.p))).collect();
        let (best, pair) = pts
            .par_iter()
            .enumerate()
            .map(|(a, (i, p))| {
                let mut best = (f64::INFINITY, (*i, *i));
                for (j, q) in &pts[a + 1..] {
                    let d = p.distance(q);
                    if d < best.0 {
                        best = (d, (*i, *j));
                    }
                }
                best
            })
            .reduce(|| (f64::INFINITY, (0, 0)), |x, y| if y.0 < x.0 { y } else { x });
        report.per_waypoint.push(best);
        if best < report.min_distance {
            report.min_distance = best;
            report.waypoint = w;
            report.pair = pair;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrespondenceReport {
    pub complete: bool,
    pub simple: bool,
    pub order_preserved: bool,
    /// Largest relative wall residual of the image samples at `λ₁`, when all tracks completed.
    pub max_wall_residual: Option<f64>,
    pub source: Vec<PhasePoint>,
    pub image: Vec<PhasePoint>,
    pub diagnostics: String,
}

/// `count` boundary seeds spaced evenly by arclength along a closed wall curve, each
/// projected back onto the locus.
pub fn resample_curve(
    lambda: &HenonParameter,
    curve: &LocusCurve,
    count: usize,
    tol_res: f64,
    ctl: &EscapeControl,
) -> Result<Vec<PhasePoint>> {
    let pts: Vec<[f64; 4]> = curve.samples.iter().map(|s| s.point.to_real()).collect();
    if pts.len() < 3 || count == 0 {
        return Err(HenonError::Empty("curve has too few samples to resample".into()));
    }
    let n = pts.len();
    let mut cum = vec![0.0];
    for i in 0..n {
        let l = cum[i] + crate::locus::dist4(&pts[i], &pts[(i + 1) % n]);
        cum.push(l);
    }
    let total = cum[n];
    let wall = WallSpec::new(curve.wall_tag, curve.level);
    (0..count)
        .into_par_iter()
        .map(|k| {
            let s = total * k as f64 / count as f64;
            let i = cum.partition_point(|&c| c <= s).saturating_sub(1).min(n - 1);
            let seg = cum[i + 1] - cum[i];
            let t = if seg > 0.0 { (s - cum[i]) / seg } else { 0.0 };
            let (a, b) = (&pts[i], &pts[(i + 1) % n]);
            let q = PhasePoint::from_real(&[0, 1, 2, 3].map(|j| a[j] + t * (b[j] - a[j])));
            project_to_wall(lambda, &q, &wall, tol_res, ctl)
                .map(|s| s.point)
                .ok_or_else(|| HenonError::Divergence { residual: f64::NAN, steps: k })
        })
        .collect()
}

/// Indices whose nearest other sample is not a cyclic neighbour.
fn order_violations(pts: &[PhasePoint]) -> Vec<usize> {
    let n = pts.len();
    if n < 4 {
        return Vec::new();
    }
    (0..n)
        .filter(|&i| {
            let mut best = (f64::INFINITY, i);
            for j in 0..n {
                if j != i {
                    let d = pts[i].distance(&pts[j]);
                    if d < best.0 {
                        best = (d, j);
                    }
                }
            }
            let b = best.1;
            b != (i + 1) % n && b != (i + n - 1) % n
        })
        .collect()
}

/// Whether two non-adjacent segments of the closed polyline come closer than
/// `1e−3` of the shorter segment length.
fn polyline_is_simple(pts: &[PhasePoint]) -> bool {
    let n = pts.len();
    let real: Vec<[f64; 4]> = pts.iter().map(|p| p.to_real()).collect();
    let seg = |i: usize| (real[i], real[(i + 1) % n]);
    let len = |i: usize| crate::locus::dist4(&real[i], &real[(i + 1) % n]);
    (0..n).into_par_iter().all(|i| {
        ((i + 2)..n).all(|j| {
            if (j + 1) % n == i {
                return true;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            segment_segment_distance(&a, &b, &c, &d) > 1e-3 * len(i).min(len(j))
        })
    })
}

fn segment_segment_distance(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4], d: &[f64; 4]) -> f64 {
    use crate::locus::segment_distance;
    // Endpoint-to-segment distances; for segments in R⁴ the minimum is attained either
    // there or at an interior pair, found by the clamped normal equations.
    let mut best = segment_distance(c, d, a).min(segment_distance(c, d, b)).min(segment_distance(a, b, c)).min(segment_distance(a, b, d));
    let u: Vec<f64> = (0..4).map(|k| b[k] - a[k]).collect();
    let v: Vec<f64> = (0..4).map(|k| d[k] - c[k]).collect();
    let w: Vec<f64> = (0..4).map(|k| a[k] - c[k]).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let (uu, uv, vv, uw, vw) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&u, &w), dot(&v, &w));
    let den = uu * vv - uv * uv;
    if den > 1e-300 {
        let s = (uv * vw - vv * uw) / den;
        let t = (uu * vw - uv * uw) / den;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            let dist: f64 = (0..4).map(|k| (w[k] + s * u[k] - t * v[k]).powi(2)).sum::<f64>().sqrt();
            best = best.min(dist);
        }
    }
    best
}

/// Tracks every sample of a closed wall curve from `λ₀` to `λ₁` and checks that the
/// image is a simple closed polyline visited in the same cyclic order.
pub fn boundary_correspondence(
    lambda0: &HenonParameter,
    lambda1: &HenonParameter,
    curve: &LocusCurve,
    r: f64,
    opts: &MotionOptions,
    ctl: &EscapeControl,
) -> Result<CorrespondenceReport> {
    if !curve.closed {
        return Err(HenonError::InvalidArgument("boundary correspondence needs a closed curve".into()));
    }
    let wall = WallSpec::new(curve.wall_tag, curve.level);
    let path = parameter_path(lambda0, lambda1, opts.max_param_step);
    let source: Vec<PhasePoint> = curve.samples.iter().map(|s| s.point).collect();
    let tracks: Vec<Result<MotionTrack>> = source
        .par_iter()
        .map(|p| {
            let inv = MotionInvariant::for_wall(lambda0, p, &wall, r, ctl)?;
            track_point(&inv, &path, p, opts, ctl)
        })
        .collect();
    let mut image = Vec::with_capacity(source.len());
    let mut notes = Vec::new();
    let mut complete = true;
    for (i, t) in tracks.into_iter().enumerate() {
        match t {
            Ok(t) if t.complete => image.push(t.last().map(|w| w.p).unwrap_or(source[i])),
            Ok(t) => {
                complete = false;
                notes.push(format!("sample {i}: {}", t.failure.map(|f| f.1).unwrap_or_default()));
            }
            Err(e) => {
                complete = false;
                notes.push(format!("sample {i}: {e}"));
            }
        }
    }
    if !complete {
        return Ok(CorrespondenceReport {
            complete,
            simple: false,
            order_preserved: false,
            max_wall_residual: None,
            source,
            image,
            diagnostics: notes.join("; "),
        });
    }
    // The U_C wall moves with a; G and Y walls keep their level.
    let level1 = match wall.tag {
        WallTag::UWall | WallTag::PWall => wall.level * lambda1.a.norm() / lambda0.a.norm(),
        _ => wall.level,
    };
    let wall1 = WallSpec::new(wall.tag, level1);
    let max_wall_residual = image
        .par_iter()
        .map(|p| {
            crate::locus::wall_value(wall1.tag, lambda1, p, ctl).map_or(f64::INFINITY, |v| ((v - level1) / level1).abs())
        })
        .reduce(|| 0.0, f64::max);
    let simple = polyline_is_simple(&image);
    let before = order_violations(&source);
    let after = order_violations(&image);
    let new: Vec<usize> = after.iter().copied().filter(|i| !before.contains(i)).collect();
    let order_preserved = new.is_empty();
    if !simple {
        notes.push("image polyline self-intersects at sample resolution".into());
    }
    if !order_preserved {
        notes.push(format!("cyclic order broken at samples {new:?}"));
    }
    Ok(CorrespondenceReport { complete, simple, order_preserved, max_wall_residual: Some(max_wall_residual), source, image, diagnostics: notes.join("; ") })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(step: f64, f: impl Fn(Complex64) -> Complex64) -> HolomorphyGrid {
        let half = 2i64;
        let l0 = Complex64::new(0.3, 0.1);
        let pts = (-half..=half)
            .flat_map(|k| (-half..=half).map(move |j| (j, k)))
            .map(|(j, k)| {
                let z = f(l0 + Complex64::new(j as f64, k as f64) * step);
                PhasePoint::new(z, z * 2.0)
            })
            .collect();
        HolomorphyGrid { step, half: 2, points: vec![pts] }
    }

    #[test]
    fn antiholomorphic_tracks_are_detected() {
        let r = holomorphy_residual(&synthetic(1e-3, |z| z.conj())).unwrap();
        assert_eq!(r, f64::INFINITY);
        let r = holomorphy_residual(&synthetic(1e-3, |z| z + z.conj() * 0.5)).unwrap();
        assert!((r - 0.5).abs() < 1e-9, "{r}");
    }

    #[test]
    fn holomorphic_track_has_tiny_ratio() {
        let r = holomorphy_residual(&synthetic(1e-6, |z| z * z)).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn incomplete_grid_is_rejected() {
        let mut g = synthetic(1e-3, |z| z);
        g.points[0].pop();
        assert!(holomorphy_residual(&g).is_err());
    }

    #[test]
    fn invariant_kind_names() {
        let inv = MotionInvariant { kind: InvariantKind::PhiPlusPower { n: 2 }, value: Complex64::new(1.0, 0.0) };
        let s = serde_json::to_string(&inv).unwrap();
        assert!(s.contains("\"kind\":\"PHI_PLUS_POWER\"") && s.contains("\"n\":2"), "{s}");
        let u = serde_json::to_string(&MotionInvariant { kind: InvariantKind::UcValue, value: Complex64::new(0.0, 1.0) }).unwrap();
        assert!(u.contains("U_C_VALUE"), "{u}");
        let back: MotionInvariant = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inv);
    }

    #[test]
    fn path_respects_step() {
        let a = HenonParameter::real(1e-4, -6.0).unwrap();
        let b = HenonParameter::real(2e-4, -6.0).unwrap();
        let p = parameter_path(&a, &b, 3e-6);
        assert_eq!(p.len(), 35);
        assert!(p.windows(2).all(|w| w[0].distance(&w[1]) <= 3e-6));
        assert_eq!(p.last().unwrap(), &b);
    }
}
