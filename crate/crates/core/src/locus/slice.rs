//! Zeros of a function on a square of one complex variable, found by winding numbers
//! on a cell grid followed by Newton's method.
//!
//! The function need only be holomorphic off a compact set where it is undefined or
//! untrusted (the filled Julia set of a slice, say). Each sample reports a `margin`,
//! an estimate of the distance to that set; cells narrower than the margin at all
//! corners are counted by winding, the others are split down to a leaf size and
//! searched by Newton from the center.

use num_complex::Complex64;
use rayon::prelude::*;

/// An axis-aligned square `center ± half_width·(1 + i)` split into `cells × cells`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceGrid {
    pub center: Complex64,
    pub half_width: f64,
    pub cells: usize,
}

impl SliceGrid {
    pub fn new(center: Complex64, half_width: f64, cells: usize) -> Self {
        Self { center, half_width, cells: cells.max(1) }
    }

    pub fn pitch(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    /// Lower-left corner, shifted by an irrational fraction of the pitch so that
    /// symmetric points such as 0 or the real axis never fall on cell edges.
    fn origin(&self) -> Complex64 {
        let pitch = self.pitch();
        self.center - Complex64::new(self.half_width, self.half_width) + Complex64::new(0.031_830_989, 0.027_182_818) * pitch
    }
}

/// A sample of the function: value, positive normalization and trust margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceValue {
    pub value: Complex64,
    pub norm: f64,
    pub margin: f64,
}

impl SliceValue {
    /// A sample of an entire function.
    pub fn entire(value: Complex64, norm: f64) -> Self {
        Self { value, norm, margin: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceZero {
    pub z: Complex64,
    /// `|F(z)|` divided by the normalization returned with `F`.
    pub residual: f64,
}

/// A zero counts as found when `|F|` is within this many relative units of `z` times
/// `|F'|`, i.e. the zero is located to rounding accuracy even if the normalized
/// residual cannot reach the tolerance because the normalization is tiny.
pub const ROUNDING: f64 = 8.0 * f64::EPSILON;

/// Largest normalized residual accepted through the rounding criterion.
pub const LOCATED_MAX_RESIDUAL: f64 = 1e-3;

const MAX_EDGE_DEPTH: usize = 12;
const MAX_CELL_DEPTH: usize = 4;

#[derive(Clone, Copy)]
struct Rect {
    lo: Complex64,
    w: f64,
}

impl Rect {
    fn center(&self) -> Complex64 {
        self.lo + Complex64::new(0.5 * self.w, 0.5 * self.w)
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        let m = margin * self.w;
        z.re >= self.lo.re - m && z.re <= self.lo.re + self.w + m && z.im >= self.lo.im - m && z.im <= self.lo.im + self.w + m
    }

    fn split(&self) -> [Rect; 4] {
        let h = 0.5 * self.w;
        [
            Rect { lo: self.lo, w: h },
            Rect { lo: self.lo + Complex64::new(h, 0.0), w: h },
            Rect { lo: self.lo + Complex64::new(0.0, h), w: h },
            Rect { lo: self.lo + Complex64::new(h, h), w: h },
        ]
    }
}

/// Zeros of `f` in the grid square with normalized residual below `tol`;
/// `f` returns `None` where undefined.
pub fn find_zeros<F>(f: &F, grid: &SliceGrid, tol: f64) -> Vec<SliceZero>
where
    F: Fn(Complex64) -> Option<SliceValue> + Sync,
{
    let n = grid.cells;
    let pitch = grid.pitch();
    let origin = grid.origin();
    let found: Vec<Vec<SliceZero>> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let rect = Rect { lo: origin + Complex64::new(i as f64 * pitch, j as f64 * pitch), w: pitch };
            let mut out = Vec::new();
            process_cell(f, rect, 0, tol, &mut out);
            out
        })
        .collect();
    let mut zeros: Vec<SliceZero> = Vec::new();
    for z in found.into_iter().flatten() {
        if !grid_contains(grid, z.z) {
            continue;
        }
        let merge = 1e-6 * pitch + 1e-13 * (1.0 + z.z.norm());
        if let Some(existing) = zeros.iter_mut().find(|e| (e.z - z.z).norm() < merge) {
            if z.residual < existing.residual {
                *existing = z;
            }
        } else {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    zeros
}

fn grid_contains(grid: &SliceGrid, z: Complex64) -> bool {
    let lo = grid.origin();
    let w = 2.0 * grid.half_width;
    z.re >= lo.re && z.re <= lo.re + w && z.im >= lo.im && z.im <= lo.im + w
}

fn process_cell<F>(f: &F, rect: Rect, depth: usize, tol: f64, out: &mut Vec<SliceZero>)
where
    F: Fn(Complex64) -> Option<SliceValue> + Sync,
{
    let winding = cell_winding(f, &rect);
    match winding {
        Some(0) => {}
        Some(1) => {
            if let Some(z) = newton(f, rect.center(), rect.w, tol) {
                if rect.contains(z.z, 0.05) {
                    out.push(z);
                    return;
                }
            }
            if depth < MAX_CELL_DEPTH {
                for sub in rect.split() {
                    process_cell(f, sub, depth + 1, tol, out);
                }
            }
        }
        _ => {
            if depth < MAX_CELL_DEPTH {
                for sub in rect.split() {
                    process_cell(f, sub, depth + 1, tol, out);
                }
            } else if let Some(z) = newton(f, rect.center(), rect.w, tol) {
                if rect.contains(z.z, 0.5) {
                    out.push(z);
                }
            }
        }
    }
}

fn cell_winding<F>(f: &F, rect: &Rect) -> Option<i32>
where
    F: Fn(Complex64) -> Option<SliceValue>,
{
    let w = rect.w;
    let corners = [rect.lo, rect.lo + Complex64::new(w, 0.0), rect.lo + Complex64::new(w, w), rect.lo + Complex64::new(0.0, w)];
    let samples: Vec<SliceValue> = corners.iter().map(|&z| f(z)).collect::<Option<_>>()?;
    if samples.iter().any(|v| !(v.margin > w)) {
        return None;
    }
    let values: Vec<Complex64> = samples.iter().map(|v| v.value).collect();
    let mut total = 0.0;
    for k in 0..4 {
        total += edge_arg(f, corners[k], values[k], corners[(k + 1) % 4], values[(k + 1) % 4], 0)?;
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    // A negative count means the square meets the set where `f` is not holomorphic.
    ((turns - rounded).abs() < 0.25 && rounded >= 0.0).then_some(rounded as i32)
}

fn edge_arg<F>(f: &F, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: usize) -> Option<f64>
where
    F: Fn(Complex64) -> Option<SliceValue>,
{
    if fa.norm() == 0.0 || fb.norm() == 0.0 {
        return None;
    }
    let delta = (fb / fa).arg();
    if delta.abs() <= std::f64::consts::FRAC_PI_4 {
        return Some(delta);
    }
    if depth >= MAX_EDGE_DEPTH {
        return None;
    }
    let m = 0.5 * (a + b);
    let fm = f(m)?.value;
    Some(edge_arg(f, a, fa, m, fm, depth + 1)? + edge_arg(f, m, fm, b, fb, depth + 1)?)
}

/// Newton's method with a centered-difference derivative, steps capped at `cap`.
pub fn newton<F>(f: &F, z0: Complex64, cap: f64, tol: f64) -> Option<SliceZero>
where
    F: Fn(Complex64) -> Option<SliceValue>,
{
    let mut z = z0;
    let v0 = f(z)?;
    let (mut fz, mut scale) = (v0.value, v0.norm);
    let mut slope = 0.0;
    for _ in 0..60 {
        let res = fz.norm() / scale;
        if res < 1e-15 {
            break;
        }
        let h = (1e-6 * z.norm().max(1.0)).min(1e-3 * cap);
        let d = (f(z + h)?.value - f(z - h)?.value) / (2.0 * h);
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        slope = d.norm();
        let mut step = -fz / d;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..6 {
            if let Some(SliceValue { value: fw, norm: sw, .. }) = f(z + step * t) {
                // Descent is measured on the raw value: near a zero of the normalization
                // the normalized residual can stay flat while the raw value shrinks.
                if fw.norm() < fz.norm() || fw.norm() / sw < tol * 1e-3 {
                    z += step * t;
                    fz = fw;
                    scale = sw;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted || (step * t).norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let residual = fz.norm() / scale;
    // Where the normalization itself vanishes (a critical point of a potential) the raw
    // value has a zero that is not a zero of the normalized one; such points are rejected.
    let located = fz.norm() <= ROUNDING * (1.0 + z.norm()) * slope && residual < LOCATED_MAX_RESIDUAL;
    (residual < tol || located).then_some(SliceZero { z, residual })
}
