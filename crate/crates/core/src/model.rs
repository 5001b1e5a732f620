//! Checks of the topological model: boundary curves of the locus on each wall of a
//! fundamental piece, connectivity, Euler characteristic, the image of a piece under
//! the map, and the combinatorial handle graph.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{band_index, level_crossing, ComponentId, DomainContext};
use crate::dyadic::DyadicString;
use crate::dynamics::{apply, HenonParameter, PhasePoint};
use crate::error::{HenonError, Result};
use crate::locus::slice::SliceGrid;
use crate::locus::{
    component_samples, curve_zeros, dist4, in_upsilon_piece, is_locus_point, project_to_wall, slice_zeros, tangency, tangency_partials,
    trace_wall_curve, upsilon_samples, GridSpec, LocusCurve, LocusSample, TraceOptions, WallSpec, WallTag,
};
use crate::potentials::{forward_potential, u_c};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CheckOptions {
    pub grid: GridSpec,
    pub trace: TraceOptions,
    /// Estimate the Euler characteristic from the boundary curves.
    pub euler: bool,
    /// Outer radius in `|x|` of the sampled part of the far piece.
    pub upsilon_outer_radius: f64,
    /// Radii `|x|` at which the unbounded end of the far piece is probed.
    pub end_radii: Vec<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            trace: TraceOptions::default(),
            euler: true,
            upsilon_outer_radius: 1e3,
            end_radii: vec![1e6, 1e7, 1e8],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentReport {
    /// `None` for the far piece.
    pub component_id: Option<ComponentId>,
    pub wall_curve_counts: BTreeMap<WallTag, usize>,
    pub expected_counts: BTreeMap<WallTag, usize>,
    pub connected: bool,
    pub sample_count: usize,
    pub euler_characteristic: Option<i64>,
    /// Whether the far piece's locus runs out to `(∞, 0)`; `None` for band pieces.
    pub end_behavior: Option<bool>,
    pub matches_model: bool,
    pub diagnostics: String,
}

/// The report together with the traced boundary curves and interior samples.
#[derive(Clone, Debug)]
pub struct PieceAnalysis {
    pub report: ComponentReport,
    pub curves: Vec<LocusCurve>,
    pub samples: Vec<LocusSample>,
}

/// Counts predicted for every band piece: one curve on `|y| = y_bound`, two hole
/// boundaries on the `u_c` wall, one outer and two inner Green-level curves.
pub fn expected_omega_counts() -> BTreeMap<WallTag, usize> {
    BTreeMap::from([(WallTag::YBound, 1), (WallTag::UWall, 2), (WallTag::GOuter, 1), (WallTag::GInner, 2)])
}

/// Euler characteristic of a connected sum of two twice-holed disks.
pub const OMEGA_EULER: i64 = -4;

pub fn expected_upsilon_counts() -> BTreeMap<WallTag, usize> {
    BTreeMap::from([(WallTag::PWall, 1)])
}

fn phases(m: usize) -> impl Iterator<Item = f64> {
    (0..m.max(1)).map(move |j| 2.0 * PI * (j as f64 + 0.137) / m.max(1) as f64)
}

struct PieceGeometry {
    alpha: DyadicString,
    n: usize,
    x_center: Complex64,
    x_half: f64,
}

impl PieceGeometry {
    fn walls(&self, ctx: &DomainContext) -> Vec<WallSpec> {
        let rho = ctx.lambda.a.norm() * ctx.cfg.y_bound;
        vec![
            WallSpec::new(WallTag::YBound, ctx.cfg.y_bound),
            WallSpec::new(WallTag::UWall, rho),
            WallSpec::new(WallTag::GOuter, ctx.cfg.level(self.n)),
            WallSpec::new(WallTag::GInner, ctx.cfg.level(self.n + 1)),
        ]
    }

    /// All constraints of `Ω^α` other than `skip`, with a relative slack for points on walls.
    fn admits(&self, ctx: &DomainContext, p: &PhasePoint, skip: WallTag) -> bool {
        let slack = 1e-9;
        let rho = ctx.lambda.a.norm() * ctx.cfg.y_bound;
        if skip != WallTag::YBound && p.y.norm() > ctx.cfg.y_bound * (1.0 + slack) {
            return false;
        }
        if skip != WallTag::UWall && u_c(p, ctx.lambda.c).norm() < rho * (1.0 - slack) {
            return false;
        }
        let g = forward_potential(&ctx.lambda, p, &ctx.ctl(), false).potential;
        if !g.is_escaping() {
            return false;
        }
        let (hi, lo) = (ctx.cfg.level(self.n), ctx.cfg.level(self.n + 1));
        if skip != WallTag::GOuter && g.value > hi * (1.0 + slack) {
            return false;
        }
        if skip != WallTag::GInner && g.value < lo * (1.0 - slack) {
            return false;
        }
        ctx.table.nearest(self.n, p.x).0 == self.alpha
    }

    /// Points of level `n + 1` inside this piece, i.e. those whose nearest level-`n`
    /// point is `ξ_α`; each sits in one inner hole.
    fn inner_centers(&self, ctx: &DomainContext) -> Vec<Complex64> {
        ctx.table.level(self.n + 1).iter().copied().filter(|&z| ctx.table.nearest(self.n, z).0 == self.alpha).collect()
    }

    fn seeds(&self, ctx: &DomainContext, wall: &WallSpec, grid: &GridSpec) -> Vec<LocusSample> {
        let yb = ctx.cfg.y_bound;
        let y_grid = SliceGrid::new(Complex64::new(0.0, 0.0), yb, grid.zero_cells);
        let x_grid = SliceGrid::new(self.x_center, self.x_half, grid.zero_cells);
        let c = ctx.lambda.c;
        let thetas: Vec<f64> = phases(grid.wall_angles).collect();
        match wall.tag {
            WallTag::YBound => thetas
                .par_iter()
                .flat_map_iter(|&t| slice_zeros(ctx, Complex64::from_polar(yb, t), false, &x_grid))
                .collect(),
            WallTag::UWall => thetas
                .par_iter()
                .flat_map_iter(|&t| {
                    let u0 = Complex64::from_polar(wall.level, t);
                    curve_zeros(ctx, &|y: Complex64| PhasePoint::new(y * y + c - u0, y), &y_grid)
                })
                .collect(),
            WallTag::GOuter | WallTag::GInner | WallTag::PWall => {
                let centers: Vec<Complex64> = if wall.tag == WallTag::GOuter {
                    vec![self.x_center]
                } else {
                    self.inner_centers(ctx)
                };
                let ctl = ctx.ctl();
                let slices: Vec<Complex64> = centers
                    .iter()
                    .flat_map(|&xi| thetas.iter().map(move |&t| (xi, t)))
                    .map(|(xi, t)| xi + Complex64::from_polar(level_crossing(c, xi, t, wall.level, &ctl), t))
                    .collect();
                slices.par_iter().flat_map_iter(|&x0| slice_zeros(ctx, x0, true, &y_grid)).collect()
            }
        }
    }
}

/// Traces every distinct curve through the seeds on one wall.
fn trace_wall(
    ctx: &DomainContext,
    wall: &WallSpec,
    seeds: Vec<LocusSample>,
    admits: &(dyn Fn(&PhasePoint) -> bool + Sync),
    opts: &TraceOptions,
) -> (Vec<LocusCurve>, Vec<String>) {
    let ctl = ctx.ctl();
    let mut curves: Vec<LocusCurve> = Vec::new();
    let mut notes = Vec::new();
    for seed in seeds {
        let Some(projected) = project_to_wall(&ctx.lambda, &seed.point, wall, opts.tol_res, &ctl) else {
            continue;
        };
        if !admits(&projected.point) {
            continue;
        }
        let near_existing = curves.iter().any(|c| c.distance_to(&projected.point) < max_segment(c).max(1e-12));
        if near_existing {
            continue;
        }
        match trace_wall_curve(&ctx.lambda, &projected, wall, opts, &ctl) {
            Ok(curve) => {
                if let Some(d) = &curve.diagnostic {
                    notes.push(format!("{}: {d}", wall.tag.name()));
                }
                curves.push(curve);
            }
            Err(e) => notes.push(format!("{}: trace failed: {e}", wall.tag.name())),
        }
    }
    (curves, notes)
}

fn max_segment(c: &LocusCurve) -> f64 {
    let pts: Vec<[f64; 4]> = c.samples.iter().map(|s| s.point.to_real()).collect();
    let n = pts.len();
    let mut m: f64 = 0.0;
    for i in 0..n {
        if i + 1 < n || c.closed {
            m = m.max(dist4(&pts[i], &pts[(i + 1) % n]));
        }
    }
    m
}

/// Whether every sample of the curve satisfies the remaining constraints.
fn curve_admitted(curve: &LocusCurve, admits: &(dyn Fn(&PhasePoint) -> bool + Sync)) -> bool {
    curve.samples.par_iter().all(|s| admits(&s.point))
}

/// Number of connected components of the `eps`-adjacency graph under `dist`.
pub(crate) fn adjacency_components<T: Sync>(items: &[T], eps: f64, dist: impl Fn(&T, &T) -> f64 + Sync) -> usize {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let dist = &dist;
            ((i + 1)..n).filter(move |&j| dist(&items[i], &items[j]) < eps).map(move |j| (i, j))
        })
        .collect();
    for (i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Turning number of `τ` along a closed boundary curve, where the tangent is
/// `τ·(−∂D/∂y, ∂D/∂x)`; the sum over all boundary curves, each oriented with the
/// piece on its left, is the Euler characteristic.
pub fn boundary_turning(lambda: &HenonParameter, curve: &LocusCurve, ctl: &crate::potentials::EscapeControl) -> Option<f64> {
    if !curve.closed || curve.samples.len() < 3 {
        return None;
    }
    let normals: Vec<(Complex64, Complex64)> = curve
        .samples
        .par_iter()
        .map(|s| tangency_partials(lambda, &s.point, ctl).ok().map(|(dx, dy)| (-dy, dx)))
        .collect::<Option<_>>()?;
    let n = curve.samples.len();
    let mut taus = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, q) = (&curve.samples[i].point, &curve.samples[j].point);
        let vx = 0.5 * (normals[i].0 + normals[j].0);
        let vy = 0.5 * (normals[i].1 + normals[j].1);
        taus.push((q.x - p.x) * vx.conj() + (q.y - p.y) * vy.conj());
    }
    let mut total = 0.0;
    for i in 0..n {
        let (a, b) = (taus[i], taus[(i + 1) % n]);
        if a.norm() == 0.0 || b.norm() == 0.0 {
            return None;
        }
        let d = (b / a).arg();
        if d.abs() > 0.5 * PI {
            return None;
        }
        total += d;
    }
    let sign = if curve.wall_tag.piece_inside() { 1.0 } else { -1.0 };
    Some(sign * total / (2.0 * PI))
}

fn counts_of(curves: &[(LocusCurve, bool)]) -> BTreeMap<WallTag, usize> {
    let mut m = BTreeMap::new();
    for (c, admitted) in curves {
        if c.closed && *admitted {
            *m.entry(c.wall_tag).or_insert(0) += 1;
        }
    }
    m
}

fn normalized_counts(found: BTreeMap<WallTag, usize>, expected: &BTreeMap<WallTag, usize>) -> BTreeMap<WallTag, usize> {
    let mut out: BTreeMap<WallTag, usize> = expected.keys().map(|k| (*k, 0)).collect();
    out.extend(found);
    out
}

/// Boundary-curve counts, connectivity and Euler characteristic of the locus in `Ω^α`.
pub fn analyze_omega_piece(ctx: &DomainContext, alpha: &DyadicString, opts: &CheckOptions) -> Result<PieceAnalysis> {
    let mut notes: Vec<String> = Vec::new();
    let mut grid = opts.grid;
    let mut sampled = component_samples(ctx, alpha, &grid)?;
    let point_dist = |a: &LocusSample, b: &LocusSample| a.point.distance(&b.point);
    let mut pieces = adjacency_components(&sampled.samples, 3.0 * sampled.pitch, point_dist);
    if pieces != 1 {
        notes.push(format!("{pieces} adjacency components at pitch {:.3e}; resampling finer", sampled.pitch));
        grid = grid.refined();
        sampled = component_samples(ctx, alpha, &grid)?;
        pieces = adjacency_components(&sampled.samples, 3.0 * sampled.pitch, point_dist);
    }
    let connected = pieces == 1;
    if !connected {
        notes.push(format!("{pieces} adjacency components among {} samples", sampled.samples.len()));
    }

    let geom = PieceGeometry { alpha: alpha.clone(), n: alpha.len(), x_center: sampled.x_center, x_half: sampled.x_half_width };
    let walls = geom.walls(ctx);
    let per_wall: Vec<(Vec<(LocusCurve, bool)>, Vec<String>)> = walls
        .par_iter()
        .map(|wall| {
            let admits = |p: &PhasePoint| geom.admits(ctx, p, wall.tag);
            let seeds = geom.seeds(ctx, wall, &opts.grid);
            let (curves, notes) = trace_wall(ctx, wall, seeds, &admits, &opts.trace);
            let judged = curves.into_iter().map(|c| {
                let ok = curve_admitted(&c, &admits);
                (c, ok)
            });
            (judged.collect(), notes)
        })
        .collect();
    let mut curves: Vec<(LocusCurve, bool)> = Vec::new();
    for (c, n) in per_wall {
        curves.extend(c);
        notes.extend(n);
    }
    for (c, ok) in &curves {
        if !ok {
            notes.push(format!("{} curve of length {:.3e} leaves the piece", c.wall_tag.name(), c.length));
        }
    }

    let expected = expected_omega_counts();
    let counts = normalized_counts(counts_of(&curves), &expected);
    let euler = if opts.euler {
        let ctl = ctx.ctl();
        let turnings: Option<Vec<f64>> = curves
            .iter()
            .filter(|(c, ok)| c.closed && *ok)
            .map(|(c, _)| boundary_turning(&ctx.lambda, c, &ctl))
            .collect();
        match turnings {
            Some(t) => {
                let chi: f64 = t.iter().sum();
                if (chi - chi.round()).abs() < 0.1 {
                    Some(chi.round() as i64)
                } else {
                    notes.push(format!("boundary turning sum {chi:.3} is not integral"));
                    None
                }
            }
            None => {
                notes.push("boundary turning undefined on some curve".into());
                None
            }
        }
    } else {
        None
    };
    if let Some(chi) = euler {
        if chi != OMEGA_EULER {
            notes.push(format!("Euler characteristic {chi}, model predicts {OMEGA_EULER}"));
        }
    }
    let matches = counts == expected && connected;
    let report = ComponentReport {
        component_id: Some(ComponentId::new(alpha.clone())),
        wall_curve_counts: counts,
        expected_counts: expected,
        connected,
        sample_count: sampled.samples.len(),
        euler_characteristic: euler,
        end_behavior: None,
        matches_model: matches,
        diagnostics: notes.join("; "),
    };
    Ok(PieceAnalysis { report, curves: curves.into_iter().map(|(c, _)| c).collect(), samples: sampled.samples })
}

pub fn check_omega_piece(ctx: &DomainContext, alpha: &DyadicString, opts: &CheckOptions) -> Result<ComponentReport> {
    Ok(analyze_omega_piece(ctx, alpha, opts)?.report)
}

/// Locus points on `x`-slices at the given radii; the end behaviour holds when every
/// radius yields points and they all have `|y| < 1e−3`.
pub fn far_end_samples(ctx: &DomainContext, radii: &[f64], grid: &GridSpec) -> Vec<(f64, Vec<LocusSample>)> {
    let y_grid = SliceGrid::new(Complex64::new(0.0, 0.0), ctx.cfg.eps, grid.zero_cells);
    radii
        .iter()
        .map(|&r| {
            let found: Vec<LocusSample> = phases(4)
                .collect::<Vec<_>>()
                .par_iter()
                .flat_map_iter(|&t| slice_zeros(ctx, Complex64::from_polar(r, t), true, &y_grid))
                .filter(|s| in_upsilon_piece(ctx, &s.point))
                .collect();
            (r, found)
        })
        .collect()
}

/// The far piece: one hole boundary on the `u_c` wall and an end at `(∞, 0)`.
pub fn analyze_upsilon_piece(ctx: &DomainContext, opts: &CheckOptions) -> Result<PieceAnalysis> {
    let mut notes: Vec<String> = Vec::new();
    let sampled = upsilon_samples(ctx, &opts.grid, opts.upsilon_outer_radius);
    let embed = |s: &LocusSample| {
        let l = s.point.x.ln();
        [l.re, l.im.cos(), l.im.sin(), s.point.y.re, s.point.y.im]
    };
    let embedded: Vec<[f64; 5]> = sampled.samples.iter().map(embed).collect();
    let dist5 = |a: &[f64; 5], b: &[f64; 5]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let pieces = adjacency_components(&embedded, 3.0 * sampled.log_pitch, dist5);
    let connected = pieces == 1;
    if !connected {
        notes.push(format!("{pieces} adjacency components among {} samples", sampled.samples.len()));
    }

    let wall = WallSpec::new(WallTag::PWall, ctx.lambda.a.norm() * ctx.cfg.y_bound);
    let c = ctx.lambda.c;
    let y_grid = SliceGrid::new(Complex64::new(0.0, 0.0), ctx.cfg.eps, opts.grid.zero_cells);
    let seeds: Vec<LocusSample> = phases(opts.grid.wall_angles)
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|&t| {
            let u0 = Complex64::from_polar(wall.level, t);
            curve_zeros(ctx, &|y: Complex64| PhasePoint::new(y * y + c - u0, y), &y_grid)
        })
        .collect();
    let admits = |p: &PhasePoint| {
        let g = forward_potential(&ctx.lambda, p, &ctx.ctl(), false).potential;
        g.is_escaping() && g.value >= ctx.cfg.r && p.y.norm() <= ctx.cfg.eps
    };
    let (curves, trace_notes) = trace_wall(ctx, &wall, seeds, &admits, &opts.trace);
    notes.extend(trace_notes);
    let judged: Vec<(LocusCurve, bool)> = curves
        .into_iter()
        .map(|c| {
            let ok = curve_admitted(&c, &admits);
            (c, ok)
        })
        .collect();

    let ends = far_end_samples(ctx, &opts.end_radii, &opts.grid);
    let mut end_ok = !ends.is_empty();
    for (r, found) in &ends {
        let max_y = found.iter().map(|s| s.point.y.norm()).fold(0.0, f64::max);
        if found.is_empty() || max_y >= 1e-3 {
            end_ok = false;
            notes.push(format!("|x| = {r:e}: {} locus points, max |y| = {max_y:.3e}", found.len()));
        }
    }

    let expected = expected_upsilon_counts();
    let counts = normalized_counts(counts_of(&judged), &expected);
    let matches = counts == expected && connected && end_ok;
    let report = ComponentReport {
        component_id: None,
        wall_curve_counts: counts,
        expected_counts: expected,
        connected,
        sample_count: sampled.samples.len(),
        euler_characteristic: None,
        end_behavior: Some(end_ok),
        matches_model: matches,
        diagnostics: notes.join("; "),
    };
    let mut samples = sampled.samples;
    samples.extend(ends.into_iter().flat_map(|(_, s)| s));
    Ok(PieceAnalysis { report, curves: judged.into_iter().map(|(c, _)| c).collect(), samples })
}

pub fn check_upsilon_piece(ctx: &DomainContext, opts: &CheckOptions) -> Result<ComponentReport> {
    Ok(analyze_upsilon_piece(ctx, opts)?.report)
}

/// Result of pushing the samples of a piece forward (or back) one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TranslationReport {
    pub ok: bool,
    pub sample_count: usize,
    pub target_band: usize,
    pub in_target_band: usize,
    /// Largest normalized residual among the images; it can sit well above the
    /// tolerance where `|D|` is already at its rounding floor.
    pub max_image_residual: f64,
    /// Images that fail the locus test at ten times the tolerance.
    pub off_locus: usize,
    pub image_labels: Vec<DyadicString>,
    pub diagnostics: String,
}

fn translation_report(
    ctx: &DomainContext,
    samples: &[LocusSample],
    target_band: usize,
    single_label: bool,
    map: impl Fn(&PhasePoint) -> PhasePoint + Sync,
) -> TranslationReport {
    let ctl = ctx.ctl();
    let tol = 10.0 * ctx.cfg.tol_res;
    let images: Vec<Option<(usize, f64, bool, DyadicString)>> = samples
        .par_iter()
        .map(|s| {
            let q = map(&s.point);
            let t = tangency(&ctx.lambda, &q, &ctl).ok()?;
            let band = band_index(t.green_plus, ctx.cfg.r)?;
            let on = is_locus_point(&t, &q, tangency_partials(&ctx.lambda, &q, &ctl).ok()?, tol);
            let label = if band <= ctx.table.max_depth() { ctx.table.nearest(band, q.x).0 } else { DyadicString::empty() };
            Some((band, t.normalized, on, label))
        })
        .collect();
    let mut labels: Vec<DyadicString> = Vec::new();
    let mut in_band = 0;
    let mut max_res: f64 = 0.0;
    let mut failures = 0;
    let mut off_locus = 0;
    for img in &images {
        match img {
            Some((band, res, on, label)) => {
                max_res = max_res.max(*res);
                off_locus += usize::from(!on);
                if *band == target_band {
                    in_band += 1;
                    if !labels.contains(label) {
                        labels.push(label.clone());
                    }
                }
            }
            None => failures += 1,
        }
    }
    labels.sort();
    let ok = !samples.is_empty() && failures == 0 && in_band == samples.len() && off_locus == 0 && (!single_label || labels.len() == 1);
    let mut notes = Vec::new();
    if off_locus > 0 {
        notes.push(format!("{off_locus} images off the locus"));
    }
    if failures > 0 {
        notes.push(format!("{failures} images outside both escape loci or the bands"));
    }
    if !labels.is_empty() {
        let l: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        notes.push(format!("image labels {}", l.join(",")));
    }
    TranslationReport {
        ok,
        sample_count: samples.len(),
        target_band,
        in_target_band: in_band,
        max_image_residual: max_res,
        off_locus,
        image_labels: labels,
        diagnostics: notes.join("; "),
    }
}

/// Forward images of `Ω^α`, `|α| ≥ 1`: band `n − 1`, on the locus, one label.
pub fn translation_report_forward(ctx: &DomainContext, alpha: &DyadicString, grid: &GridSpec) -> Result<TranslationReport> {
    if alpha.is_empty() {
        return Err(HenonError::InvalidArgument("forward translation needs band index at least 1".into()));
    }
    let samples = component_samples(ctx, alpha, grid)?.samples;
    let lambda = ctx.lambda;
    Ok(translation_report(ctx, &samples, alpha.len() - 1, true, |p| apply(&lambda, p)))
}

/// Backward images of `Ω^α`: band `n + 1`, on the locus. The new `x` is the old `y`,
/// so the images spread over every child label.
pub fn translation_report_backward(ctx: &DomainContext, alpha: &DyadicString, grid: &GridSpec) -> Result<TranslationReport> {
    let samples = component_samples(ctx, alpha, grid)?.samples;
    let lambda = ctx.lambda;
    Ok(translation_report(ctx, &samples, alpha.len() + 1, false, |p| crate::dynamics::inverse_unchecked(&lambda, p)))
}

pub fn check_translation(ctx: &DomainContext, alpha: &DyadicString, grid: &GridSpec) -> Result<bool> {
    Ok(translation_report_forward(ctx, alpha, grid)?.ok)
}

/// An edge `(k, n + k + 1, α)` of the gluing graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelEdge {
    pub from: i64,
    pub to: i64,
    pub label: DyadicString,
}

/// Spheres `m_min..=m_max`; the sphere `k` is glued to `n + k + 1` along a handle for
/// every `α ∈ 𝒜ⁿ`, `n ≤ max_depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelGraph {
    pub m_min: i64,
    pub m_max: i64,
    pub max_depth: usize,
    pub edges: Vec<ModelEdge>,
}

pub fn build_model_graph(m_min: i64, m_max: i64, max_depth: usize) -> Result<ModelGraph> {
    if m_max < m_min {
        return Err(HenonError::InvalidArgument(format!("empty node range {m_min}..={m_max}")));
    }
    if max_depth > 24 {
        return Err(HenonError::InvalidArgument(format!("depth {max_depth} too large to enumerate")));
    }
    let mut edges = Vec::new();
    for k in m_min..=m_max {
        for n in 0..=max_depth {
            let to = k + n as i64 + 1;
            if to > m_max {
                break;
            }
            edges.extend(DyadicString::all(n).map(|label| ModelEdge { from: k, to, label }));
        }
    }
    Ok(ModelGraph { m_min, m_max, max_depth, edges })
}

/// Number of handles between spheres `m` and `m + k`.
pub fn handles_between(g: &ModelGraph, m: i64, k: usize) -> Result<usize> {
    if k < 1 || k > g.max_depth + 1 {
        return Err(HenonError::OutOfRange(format!("k = {k} outside 1..={}", g.max_depth + 1)));
    }
    if m < g.m_min || m + k as i64 > g.m_max {
        return Err(HenonError::OutOfRange(format!("spheres {m} and {} not both in the graph", m + k as i64)));
    }
    Ok(g.edges.iter().filter(|e| e.from == m && e.to == m + k as i64).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_counts_clusters() {
        let pts: [f64; 6] = [0.0, 0.1, 0.2, 5.0, 5.1, 9.0];
        assert_eq!(adjacency_components(&pts, 0.15, |a, b| (a - b).abs()), 3);
        assert_eq!(adjacency_components(&pts, 10.0, |a, b| (a - b).abs()), 1);
    }

    #[test]
    fn graph_rejects_bad_ranges() {
        assert!(build_model_graph(3, 1, 2).is_err());
        let g = build_model_graph(0, 10, 3).unwrap();
        assert!(handles_between(&g, 0, 0).is_err());
        assert!(handles_between(&g, 0, 5).is_err());
        assert!(handles_between(&g, 8, 3).is_err());
    }
}
