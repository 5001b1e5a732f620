//! Locus samples inside a band component or the far piece, from complex line slices.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::slice::{find_zeros, SliceGrid, SliceValue};
use super::{tangency, LocusSample};
use crate::domains::{classify_with_green, component_radius, in_omega, in_upsilon, DomainContext};
use crate::dyadic::DyadicString;
use crate::dynamics::PhasePoint;
use crate::error::{HenonError, Result};
use crate::potentials::u_c;

/// Resolution of slice scans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GridSpec {
    /// Slices per side of the slice-position grid.
    pub slice_nodes: usize,
    /// Winding cells per side within each slice.
    pub zero_cells: usize,
    /// Number of phases at which each wall is sliced.
    pub wall_angles: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { slice_nodes: 12, zero_cells: 32, wall_angles: 3 }
    }
}

impl GridSpec {
    /// Doubles every resolution.
    pub fn refined(&self) -> Self {
        Self { slice_nodes: self.slice_nodes * 2, zero_cells: self.zero_cells * 2, wall_angles: self.wall_angles * 2 }
    }
}

pub(crate) struct ComponentSamples {
    pub samples: Vec<LocusSample>,
    /// Largest slice spacing, in the `x` and `y` directions.
    pub pitch: f64,
    pub x_center: Complex64,
    pub x_half_width: f64,
}

/// Nodes of an `n × n` grid over `center ± half·(1 + i)`, offset from symmetric positions.
pub(crate) fn square_nodes(center: Complex64, half: f64, n: usize) -> Vec<Complex64> {
    let pitch = 2.0 * half / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let off = Complex64::new((i as f64 + 0.5 + 0.0917) * pitch, (j as f64 + 0.5 + 0.0731) * pitch);
            out.push(center - Complex64::new(half, half) + off);
        }
    }
    out
}

/// Zeros of `D` on the line `x = x0` (`vary_y`) or `y = y0`.
pub(crate) fn slice_zeros(ctx: &DomainContext, fixed: Complex64, vary_y: bool, grid: &SliceGrid) -> Vec<LocusSample> {
    if vary_y {
        curve_zeros(ctx, &|z| PhasePoint::new(fixed, z), grid)
    } else {
        curve_zeros(ctx, &|z| PhasePoint::new(z, fixed), grid)
    }
}

/// Zeros of `D` along a holomorphic curve `z ↦ point(z)`.
pub(crate) fn curve_zeros<P>(ctx: &DomainContext, point: &P, grid: &SliceGrid) -> Vec<LocusSample>
where
    P: Fn(Complex64) -> PhasePoint + Sync,
{
    let ctl = ctx.ctl();
    let f = |z: Complex64| {
        let p = point(z);
        let t = tangency(&ctx.lambda, &p, &ctl).ok()?;
        // G₊ over its slope along the curve estimates the distance to K₊, across which
        // D is not holomorphic.
        let h = 1e-7 * (1.0 + z.norm());
        let (a, b) = (point(z + h), point(z - h));
        let slope = t.grad_plus.apply((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h)).norm();
        Some(SliceValue { value: t.d, norm: t.scale(), margin: t.green_plus / slope })
    };
    find_zeros(&f, grid, ctx.cfg.tol_res)
        .into_iter()
        .map(|z| LocusSample::new(point(z.z), z.residual))
        .collect()
}

pub(crate) fn component_samples(ctx: &DomainContext, alpha: &DyadicString, grid: &GridSpec) -> Result<ComponentSamples> {
    let n = alpha.len();
    if n > ctx.cfg.max_depth {
        return Err(HenonError::OutOfRange(format!("component {alpha} deeper than maxDepth {}", ctx.cfg.max_depth)));
    }
    let xi = ctx.xi(alpha).ok_or_else(|| HenonError::OutOfRange(format!("no preimage for {alpha}")))?;
    let ctl = ctx.ctl();
    let x_half = 1.1 * component_radius(ctx.lambda.c, xi, ctx.cfg.level(n), &ctl);
    let yb = ctx.cfg.y_bound;
    let y_nodes: Vec<Complex64> = square_nodes(Complex64::new(0.0, 0.0), yb, grid.slice_nodes)
        .into_iter()
        .filter(|y| y.norm() <= yb)
        .collect();
    let x_nodes = square_nodes(xi, x_half, grid.slice_nodes);
    let x_grid = SliceGrid::new(xi, x_half, grid.zero_cells);
    let y_grid = SliceGrid::new(Complex64::new(0.0, 0.0), yb, grid.zero_cells);
    let mut raw: Vec<LocusSample> = y_nodes.par_iter().flat_map_iter(|&y0| slice_zeros(ctx, y0, false, &x_grid)).collect();
    raw.extend(x_nodes.par_iter().flat_map_iter(|&x0| slice_zeros(ctx, x0, true, &y_grid)).collect::<Vec<_>>());
    let samples = raw.into_iter().filter_map(|s| label_if_in(ctx, s, alpha)).collect();
    let pitch = (2.0 * yb / grid.slice_nodes as f64).max(2.0 * x_half / grid.slice_nodes as f64);
    Ok(ComponentSamples { samples, pitch, x_center: xi, x_half_width: x_half })
}

/// Keeps `s` if it lies in `Ω` and classifies unambiguously into `alpha`.
pub(crate) fn label_if_in(ctx: &DomainContext, mut s: LocusSample, alpha: &DyadicString) -> Option<LocusSample> {
    if !in_omega(&ctx.lambda, &s.point, &ctx.cfg).is_inside() {
        return None;
    }
    let t = tangency(&ctx.lambda, &s.point, &ctx.ctl()).ok()?;
    let class = classify_with_green(ctx, &s.point, t.green_plus).ok()?;
    if class.is_ambiguous() || class.id.label != *alpha {
        return None;
    }
    s.component_label = Some(alpha.clone());
    Some(s)
}

/// Locus samples in `Ω^α`: slices `y = const` over the `y`-disk and `x = const` over
/// the `x`-region of the component, zeros refined and filtered by membership and label.
pub fn sample_component(ctx: &DomainContext, alpha: &DyadicString, grid: &GridSpec) -> Result<Vec<LocusSample>> {
    let out = component_samples(ctx, alpha, grid)?;
    if out.samples.is_empty() {
        return Err(HenonError::Empty(format!("no locus samples in component {alpha}")));
    }
    Ok(out.samples)
}

pub(crate) struct UpsilonSamples {
    pub samples: Vec<LocusSample>,
    /// Spacing of slice positions in `log|x|` and angle.
    pub log_pitch: f64,
}

pub(crate) fn in_upsilon_piece(ctx: &DomainContext, p: &PhasePoint) -> bool {
    in_upsilon(&ctx.lambda, p, &ctx.cfg).is_inside()
        && u_c(p, ctx.lambda.c).norm() > ctx.lambda.a.norm() * ctx.cfg.y_bound
}

pub(crate) fn upsilon_samples(ctx: &DomainContext, grid: &GridSpec, outer_radius: f64) -> UpsilonSamples {
    let ctl = ctx.ctl();
    let inner = 0.5 * component_radius(ctx.lambda.c, Complex64::new(0.0, 0.0), ctx.cfg.r, &ctl);
    let radial = grid.slice_nodes.max(2);
    let angular = 2 * grid.slice_nodes.max(2);
    let (l0, l1) = (inner.ln(), outer_radius.ln());
    let dl = (l1 - l0) / (radial - 1) as f64;
    let nodes: Vec<Complex64> = (0..radial)
        .flat_map(|i| {
            (0..angular).map(move |j| {
                Complex64::from_polar((l0 + i as f64 * dl).exp(), 2.0 * PI * (j as f64 + 0.1173) / angular as f64)
            })
        })
        .collect();
    let y_grid = SliceGrid::new(Complex64::new(0.0, 0.0), ctx.cfg.eps, grid.zero_cells);
    let samples = nodes
        .par_iter()
        .flat_map_iter(|&x0| slice_zeros(ctx, x0, true, &y_grid))
        .filter(|s| in_upsilon_piece(ctx, &s.point))
        .collect();
    UpsilonSamples { samples, log_pitch: dl.max(2.0 * PI / angular as f64) }
}

/// Locus samples in the far piece `Υ` outside the hole `|p_c(y) − x| ≤ |a|·y_bound`,
/// on `x`-slices placed on a log-polar grid up to `|x| = outer_radius`.
pub fn sample_upsilon(ctx: &DomainContext, grid: &GridSpec, outer_radius: f64) -> Result<Vec<LocusSample>> {
    let out = upsilon_samples(ctx, grid, outer_radius);
    if out.samples.is_empty() {
        return Err(HenonError::Empty("no locus samples in the far piece".into()));
    }
    Ok(out.samples)
}
