//! Run configuration, JSON and JSON Lines artifacts, and SVG projections.
//!
//! Every float is written with 17 significant digits so artifacts reload bit for bit,
//! and every record carries `schemaVersion`.

use std::io::{self, BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::domains::{band_index, choose_domain_config, DomainConfig, DomainOverrides};
use crate::dynamics::{HenonParameter, PhasePoint};
use crate::error::{HenonError, Result};
use crate::locus::{LocusCurve, LocusSample, WallTag};
use crate::model::CheckOptions;
use crate::motion::{parameter_path, InvariantKind, MotionInvariant, MotionOptions, MotionTrack, Waypoint};
use crate::potentials::{forward_potential, phi_plus_power, EscapeControl};

pub const SCHEMA_VERSION: u32 = 1;

/// Delegates layout to `F` and prints floats as `{:.16e}`.
struct Sig17<F>(F);

macro_rules! delegate {
    ($($name:ident $(, $arg:ident : $ty:ty)*);* $(;)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }

    delegate! {
        begin_array;
        end_array;
        begin_array_value, first: bool;
        end_array_value;
        begin_object;
        end_object;
        begin_object_key, first: bool;
        end_object_key;
        begin_object_value;
        end_object_value;
    }
}

fn encode<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(fmt));
    value.serialize(&mut ser).map_err(|e| HenonError::Format(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| HenonError::Format(e.to_string()))
}

/// Indented JSON with 17-digit floats. Non-finite floats become `null`.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    encode(value, PrettyFormatter::with_indent(b"  "))
}

/// Single-line JSON with 17-digit floats.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    encode(value, CompactFormatter)
}

/// A JSON document stamped with the schema version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    #[serde(rename = "schemaVersion")]
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Self { schema_version: SCHEMA_VERSION, body }
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(HenonError::Format(format!("unsupported schemaVersion {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Serializes `body` as a versioned artifact, newline-terminated.
pub fn artifact_string<T: Serialize>(body: &T) -> Result<String> {
    Ok(to_json_pretty(&Versioned::new(body))? + "\n")
}

pub fn parse_artifact<T: DeserializeOwned>(text: &str) -> Result<T> {
    let v: Versioned<T> = serde_json::from_str(text).map_err(|e| HenonError::Format(e.to_string()))?;
    check_version(v.schema_version)?;
    Ok(v.body)
}

pub fn write_artifact<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    write_text(path, &artifact_string(body)?)
}

pub fn load_artifact<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_artifact(&read_text(path)?)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HenonError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HenonError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut f = std::fs::File::create(path).map_err(|e| HenonError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| HenonError::Io(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub a_re: f64,
    pub a_im: f64,
    pub c_re: f64,
    pub c_im: f64,
}

impl Default for ParameterSpec {
    fn default() -> Self {
        Self { a_re: 1e-4, a_im: 0.0, c_re: -6.0, c_im: 0.0 }
    }
}

impl ParameterSpec {
    pub fn lambda(&self) -> Result<HenonParameter> {
        HenonParameter::new(Complex64::new(self.a_re, self.a_im), Complex64::new(self.c_re, self.c_im))
    }
}

/// A polyline in parameter space, refined so that no step exceeds `maxParamStep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PathSpec {
    pub nodes: Vec<HenonParameter>,
    pub max_param_step: f64,
}

impl PathSpec {
    pub fn refine(&self) -> Result<Vec<HenonParameter>> {
        if self.nodes.is_empty() {
            return Err(HenonError::Empty("parameter path has no nodes".into()));
        }
        if !(self.max_param_step > 0.0) {
            return Err(HenonError::InvalidArgument("maxParamStep must be positive".into()));
        }
        let mut out = vec![self.nodes[0]];
        for w in self.nodes.windows(2) {
            out.extend(parameter_path(&w[0], &w[1], self.max_param_step).into_iter().skip(1));
        }
        for p in &out {
            if p.a.norm() == 0.0 {
                return Err(HenonError::InvalidArgument("parameter path crosses a = 0".into()));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct OutputSpec {
    /// Directory receiving `verify` artifacts; nothing is written when absent.
    pub dir: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub parameter: ParameterSpec,
    pub domain: DomainOverrides,
    pub check: CheckOptions,
    pub motion: MotionOptions,
    pub path: Option<PathSpec>,
    pub output: OutputSpec,
    /// Seed of every randomized sample.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            parameter: ParameterSpec::default(),
            domain: DomainOverrides::default(),
            check: CheckOptions::default(),
            motion: MotionOptions::default(),
            path: None,
            output: OutputSpec::default(),
            seed: 20_240_917,
        }
    }
}

impl RunConfig {
    pub fn lambda(&self) -> Result<HenonParameter> {
        self.parameter.lambda()
    }

    pub fn domain_config(&self) -> Result<DomainConfig> {
        choose_domain_config(self.lambda()?.c, &self.domain)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| HenonError::Format(e.to_string()))?;
        check_version(cfg.schema_version)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(to_json_pretty(self)? + "\n")
    }
}

/// A seed for `continue`: a locus point on a wall of the given level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MotionSeed {
    pub point: PhasePoint,
    pub wall_tag: WallTag,
    pub level: f64,
}

/// One line of a JSON Lines stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "camelCase")]
pub enum Record {
    /// Stream metadata: the parameter and domain the samples belong to.
    #[serde(rename_all = "camelCase")]
    Header { schema_version: u32, lambda: HenonParameter, config: Option<DomainConfig> },
    Sample(LocusSample),
    Curve(LocusCurve),
    Seed(MotionSeed),
    #[serde(rename_all = "camelCase")]
    Track { track: usize, invariant: MotionInvariant, complete: bool, failure: Option<(HenonParameter, String)> },
    /// `λ.a`, `λ.c`, `p.x`, `p.y` as `[re, im]` pairs.
    Waypoint { track: usize, a: Complex64, c: Complex64, x: Complex64, y: Complex64, residual: f64 },
}

pub fn header(lambda: &HenonParameter, config: Option<&DomainConfig>) -> Record {
    Record::Header { schema_version: SCHEMA_VERSION, lambda: *lambda, config: config.copied() }
}

pub fn write_jsonl(records: &[Record]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&to_json_line(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl(reader: impl BufRead) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| HenonError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| HenonError::Format(format!("line {}: {e}", i + 1)))?;
        if let Record::Header { schema_version, .. } = &rec {
            check_version(*schema_version)?;
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<Record>> {
    read_jsonl(text.as_bytes())
}

pub fn tracks_to_records(tracks: &[MotionTrack]) -> Vec<Record> {
    let mut out = Vec::new();
    for (i, t) in tracks.iter().enumerate() {
        out.push(Record::Track { track: i, invariant: t.invariant, complete: t.complete, failure: t.failure.clone() });
        out.extend(t.waypoints.iter().map(|w| Record::Waypoint {
            track: i,
            a: w.lambda.a,
            c: w.lambda.c,
            x: w.p.x,
            y: w.p.y,
            residual: w.residual,
        }));
    }
    out
}

/// Reassembles tracks; waypoints attach to the track record with the same index.
pub fn tracks_from_records(records: &[Record]) -> Result<Vec<MotionTrack>> {
    let mut tracks: Vec<MotionTrack> = Vec::new();
    for r in records {
        match r {
            Record::Track { track, invariant, complete, failure } => {
                if *track != tracks.len() {
                    return Err(HenonError::Format(format!("track {track} out of sequence")));
                }
                tracks.push(MotionTrack { invariant: *invariant, waypoints: Vec::new(), complete: *complete, failure: failure.clone() });
            }
            Record::Waypoint { track, a, c, x, y, residual } => {
                let t = tracks
                    .get_mut(*track)
                    .ok_or_else(|| HenonError::Format(format!("waypoint for unknown track {track}")))?;
                t.waypoints.push(Waypoint {
                    lambda: HenonParameter { a: *a, c: *c },
                    p: PhasePoint::new(*x, *y),
                    residual: *residual,
                });
            }
            _ => {}
        }
    }
    Ok(tracks)
}

pub fn seeds_from_records(records: &[Record]) -> Vec<MotionSeed> {
    records.iter().filter_map(|r| if let Record::Seed(s) = r { Some(s.clone()) } else { None }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// `(Re y, Im y)`.
    YPlane,
    /// `(G₊, arg φ₊^{2ⁿ})`, with `n` the band of the point (or the track's invariant).
    PotentialAngle,
}

impl std::str::FromStr for Projection {
    type Err = HenonError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "y-plane" => Ok(Projection::YPlane),
            "potential-angle" => Ok(Projection::PotentialAngle),
            _ => Err(HenonError::InvalidArgument(format!("unknown projection {s:?}"))),
        }
    }
}

fn angle_point(lambda: &HenonParameter, p: &PhasePoint, n: Option<usize>, r: Option<f64>, ctl: &EscapeControl) -> Option<(f64, f64)> {
    let g = forward_potential(lambda, p, ctl, false).potential;
    if !g.is_escaping() {
        return None;
    }
    let n = n.or_else(|| r.and_then(|r| band_index(g.value, r))).unwrap_or(0);
    let b = phi_plus_power(lambda, p, n, ctl).ok()?;
    Some((g.value, b.log_value.im))
}

/// Projected points of every sample, curve and waypoint in the stream.
pub fn project_records(records: &[Record], proj: Projection) -> Vec<(f64, f64)> {
    let mut lambda = None;
    let mut config: Option<DomainConfig> = None;
    let mut track_n: Vec<Option<usize>> = Vec::new();
    let mut out = Vec::new();
    let mut push = |lambda: Option<HenonParameter>, p: &PhasePoint, n: Option<usize>, cfg: Option<&DomainConfig>| match proj {
        Projection::YPlane => out.push((p.y.re, p.y.im)),
        Projection::PotentialAngle => {
            let ctl = cfg.map(|c| c.escape_control()).unwrap_or_default();
            if let Some(l) = lambda {
                if let Some(pt) = angle_point(&l, p, n, cfg.map(|c| c.r), &ctl) {
                    out.push(pt);
                }
            }
        }
    };
    for r in records {
        match r {
            Record::Header { lambda: l, config: c, .. } => {
                lambda = Some(*l);
                config = *c;
            }
            Record::Sample(s) => push(lambda, &s.point, None, config.as_ref()),
            Record::Curve(c) => c.samples.iter().for_each(|s| push(lambda, &s.point, None, config.as_ref())),
            Record::Seed(s) => push(lambda, &s.point, None, config.as_ref()),
            Record::Track { invariant, .. } => track_n.push(match invariant.kind {
                InvariantKind::PhiPlusPower { n } => Some(n),
                _ => None,
            }),
            Record::Waypoint { track, a, c, x, y, .. } => {
                let n = track_n.get(*track).copied().flatten().or(Some(0));
                push(Some(HenonParameter { a: *a, c: *c }), &PhasePoint::new(*x, *y), n, None)
            }
        }
    }
    out
}

/// A scatter plot with fixed-precision coordinates; an empty input gives empty axes.
pub fn render_svg(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 48.0;
    let finite: Vec<(f64, f64)> = points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let w = (hi - lo).abs().max(1e-12 * (1.0 + lo.abs()));
        (lo - 0.05 * w, hi + 0.05 * w)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let esc = |s: &str| s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str(&format!("<title>{}</title>\n", esc(title)));
    s.push_str(&format!("<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"));
    s.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        esc(x_label)
    ));
    s.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        esc(y_label)
    ));
    for (v, x, anchor) in [(x0, M, "start"), (x1, W - M, "end")] {
        s.push_str(&format!("<text x=\"{x}\" y=\"{}\" font-size=\"10\" text-anchor=\"{anchor}\">{v:.4e}</text>\n", H - M + 14.0));
    }
    for (v, y) in [(y0, H - M), (y1, M + 10.0)] {
        s.push_str(&format!("<text x=\"{}\" y=\"{y}\" font-size=\"10\" text-anchor=\"end\">{v:.4e}</text>\n", M - 4.0));
    }
    s.push_str("<g fill=\"steelblue\">\n");
    for &(x, y) in &finite {
        s.push_str(&format!("<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.5\"/>\n", sx(x), sy(y)));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn render_records(records: &[Record], proj: Projection) -> String {
    let pts = project_records(records, proj);
    match proj {
        Projection::YPlane => render_svg(&pts, "y-plane", "Re y", "Im y"),
        Projection::PotentialAngle => render_svg(&pts, "potential-angle", "G+", "arg phi+^(2^n)"),
    }
}
