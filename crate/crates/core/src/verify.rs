//! The acceptance suite: numbered checks of the potentials, the locus, the model
//! counts and the boundary motion, each reduced to a pass flag and a few metrics.
//!
//! Results are deterministic for a fixed [`RunConfig`]. Wall-clock times are returned
//! beside the results and never enter the artifacts.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{DomainConfig, DomainContext};
use crate::dynamics::{apply, apply_inverse, HenonParameter, PhasePoint};
use crate::dyadic::DyadicString;
use crate::error::{HenonError, Result};
use crate::io::{artifact_string, tracks_to_records, write_jsonl, RunConfig};
use crate::locus::{refine_zero, RefineOptions, WallSpec, WallTag};
use crate::model::{
    analyze_omega_piece, analyze_upsilon_piece, build_model_graph, handles_between, ComponentReport, PieceAnalysis,
};
use crate::motion::{
    holomorphy_grid, holomorphy_residual, injectivity_check, parameter_path, resample_curve, track_point, MotionInvariant,
    MotionTrack, ParamDirection,
};
use crate::potentials::{
    grad_log_phi_minus, grad_log_phi_plus, green_1d, green_minus, green_plus, phi_plus_power, EscapeControl,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, title: &str) -> Self {
        Self { id, title: title.to_string(), passed: false, metrics: BTreeMap::new(), detail: String::new() }
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    fn note(&mut self, s: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(s.as_ref());
    }
}

/// A wall-clock budget and the time actually spent.
#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    pub name: String,
    pub limit: Duration,
    pub spent: Duration,
}

impl Budget {
    pub fn ok(&self) -> bool {
        self.spent <= self.limit
    }
}

#[derive(Clone, Debug)]
pub struct Timed {
    pub result: CriterionResult,
    pub elapsed: Duration,
    pub budgets: Vec<Budget>,
}

impl Timed {
    /// The numerical verdict and every runtime budget.
    pub fn passed(&self) -> bool {
        self.result.passed && self.budgets.iter().all(Budget::ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub lambda: HenonParameter,
    pub config: DomainConfig,
    pub seed: u64,
    pub results: Vec<CriterionResult>,
}

/// A suite run: the report plus the other artifacts it produced, keyed by file name.
#[derive(Clone, Debug)]
pub struct SuiteRun {
    pub report: SuiteReport,
    pub timed: Vec<Timed>,
    pub artifacts: BTreeMap<String, String>,
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "functional equations of G+ and G-"),
    (2, "Bottcher semiconjugacy"),
    (3, "analytic gradients against finite differences"),
    (4, "locus invariance under f and its inverse"),
    (5, "wall counts of the bounded pieces"),
    (6, "far piece: one P wall and end behaviour"),
    (7, "handle counts of the model graph"),
    (8, "boundary motion: holomorphy and injectivity"),
    (9, "structural invariance along a parameter path"),
    (10, "one-dimensional degeneration of G+"),
    (11, "determinism of verify artifacts"),
];

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("")
}

/// Shared state: the parameter, its domains and the piece analyses several checks reuse.
pub struct Suite {
    pub cfg: RunConfig,
    pub ctx: DomainContext,
    pieces: BTreeMap<String, (PieceAnalysis, Duration)>,
    artifacts: BTreeMap<String, String>,
}

fn uniform_box(rng: &mut ChaCha8Rng, half: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-half..half), rng.gen_range(-half..half))
}

/// Draws points with a fixed seed until `count` pass `keep`, in draw order.
fn draw_points<F>(seed: u64, half: f64, count: usize, keep: F) -> Vec<PhasePoint>
where
    F: Fn(&PhasePoint) -> bool + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    // Candidates are generated sequentially and tested in parallel batches.
    while out.len() < count {
        let batch: Vec<PhasePoint> = (0..count).map(|_| PhasePoint::new(uniform_box(&mut rng, half), uniform_box(&mut rng, half))).collect();
        let ok: Vec<bool> = batch.par_iter().map(&keep).collect();
        out.extend(batch.into_iter().zip(ok).filter(|(_, k)| *k).map(|(p, _)| p).take(count - out.len()));
    }
    out
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

impl Suite {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let lambda = cfg.lambda()?;
        let ctx = DomainContext::new(lambda, cfg.domain_config()?)?;
        Ok(Self { cfg: cfg.clone(), ctx, pieces: BTreeMap::new(), artifacts: BTreeMap::new() })
    }

    fn ctl(&self) -> EscapeControl {
        self.ctx.ctl()
    }

    fn lambda(&self) -> HenonParameter {
        self.ctx.lambda
    }

    /// Analyses of `∅`, `0`, `1` (keys are the labels) and the far piece (key `"U"`).
    fn piece(&mut self, key: &str) -> Result<&(PieceAnalysis, Duration)> {
        if !self.pieces.contains_key(key) {
            let t = Instant::now();
            let an = if key == "U" {
                analyze_upsilon_piece(&self.ctx, &self.cfg.check)?
            } else {
                let alpha: DyadicString = key.parse()?;
                analyze_omega_piece(&self.ctx, &alpha, &self.cfg.check)?
            };
            self.pieces.insert(key.to_string(), (an, t.elapsed()));
        }
        Ok(&self.pieces[key])
    }

    pub fn run(&mut self, id: u8) -> Result<Timed> {
        let start = Instant::now();
        let mut budgets = Vec::new();
        let mut budget = |name: &str, secs: f64, spent: Duration| {
            budgets.push(Budget { name: name.to_string(), limit: Duration::from_secs_f64(secs), spent })
        };
        let result = match id {
            1 => {
                let r = self.functional_equations()?;
                budget("total", 10.0, start.elapsed());
                r
            }
            2 => self.semiconjugacy()?,
            3 => self.gradients()?,
            4 => self.locus_invariance()?,
            5 => {
                let (r, times) = self.omega_counts()?;
                for (k, t) in times {
                    budget(&format!("component {k}"), 300.0, t);
                }
                r
            }
            6 => {
                let (r, t) = self.upsilon_counts()?;
                budget("far piece", 120.0, t);
                r
            }
            7 => {
                let r = self.handles()?;
                budget("total", 1.0, start.elapsed());
                r
            }
            8 => {
                let r = self.motion()?;
                budget("total", 600.0, start.elapsed());
                r
            }
            9 => self.structural()?,
            10 => self.degeneration()?,
            _ => return Err(HenonError::OutOfRange(format!("no criterion {id} (11 needs two runs, see run_suite)"))),
        };
        Ok(Timed { result, elapsed: start.elapsed(), budgets })
    }

    fn functional_equations(&self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(1, title(1));
        let (lam, ctl) = (self.lambda(), self.ctl());
        let half = self.ctx.cfg.y_bound;
        let log_a = lam.a.norm().ln();
        let decided_plus = |p: &PhasePoint| {
            let g0 = green_plus(&lam, p, 1e-12, &ctl).map(|g| g.is_decided()).unwrap_or(false);
            g0 && green_plus(&lam, &apply(&lam, p), 1e-12, &ctl).map(|g| g.is_decided()).unwrap_or(false)
        };
        let decided_minus = |p: &PhasePoint| {
            let g0 = green_minus(&lam, p, 1e-12, &ctl).map(|g| g.is_decided()).unwrap_or(false);
            g0 && apply_inverse(&lam, p)
                .and_then(|q| green_minus(&lam, &q, 1e-12, &ctl))
                .map(|g| g.is_decided())
                .unwrap_or(false)
        };
        let plus = draw_points(self.cfg.seed ^ 0x01, half, 10_000, decided_plus);
        let minus = draw_points(self.cfg.seed ^ 0x11, half, 10_000, decided_minus);
        let e_plus: Vec<f64> = plus
            .par_iter()
            .map(|p| {
                let g = green_plus(&lam, p, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                let gf = green_plus(&lam, &apply(&lam, p), 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                (gf - 2.0 * g).abs() / g.max(1.0)
            })
            .collect();
        let e_minus: Vec<f64> = minus
            .par_iter()
            .map(|p| {
                let g = green_minus(&lam, p, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                let q = apply_inverse(&lam, p).expect("decided above");
                let gb = green_minus(&lam, &q, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                (gb - 2.0 * g + log_a).abs() / g.abs().max(1.0)
            })
            .collect();
        let bad = e_plus.iter().chain(&e_minus).filter(|e| !(**e < 1e-8)).count();
        r.metric("points", (plus.len() + minus.len()) as f64);
        r.metric("maxErrorPlus", max_of(e_plus.iter().copied()));
        r.metric("maxErrorMinus", max_of(e_minus.iter().copied()));
        r.metric("violations", bad as f64);
        r.passed = bad == 0;
        Ok(r)
    }

    fn semiconjugacy(&self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(2, title(2));
        let (lam, ctl) = (self.lambda(), self.ctl());
        let escaping = |p: &PhasePoint| {
            green_plus(&lam, p, 1e-12, &ctl).map(|g| g.is_escaping()).unwrap_or(false)
                && phi_plus_power(&lam, p, 3, &ctl).is_ok()
                && phi_plus_power(&lam, &apply(&lam, p), 3, &ctl).is_ok()
        };
        let pts = draw_points(self.cfg.seed ^ 0x02, self.ctx.cfg.y_bound, 1000, escaping);
        let errs: Vec<(f64, f64)> = pts
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let n = i % 4;
                let b = phi_plus_power(&lam, p, n, &ctl).expect("escaping");
                let bf = phi_plus_power(&lam, &apply(&lam, p), n, &ctl).expect("escaping");
                let sq = b.value * b.value;
                let semi = (bf.value - sq).norm() / sq.norm();
                let g = green_plus(&lam, p, 1e-12, &ctl).expect("valid tolerance").value;
                let m = ((n as f64).exp2() * g).exp();
                (semi, (b.value.norm() - m).abs() / m)
            })
            .collect();
        let semi = max_of(errs.iter().map(|e| e.0));
        let modulus = max_of(errs.iter().map(|e| e.1));
        r.metric("points", pts.len() as f64);
        r.metric("maxSemiconjugacyError", semi);
        r.metric("maxModulusError", modulus);
        r.passed = semi < 1e-8 && modulus < 1e-8;
        Ok(r)
    }

    fn gradients(&self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(3, title(3));
        let (lam, ctl) = (self.lambda(), self.ctl());
        let escaping = |p: &PhasePoint| grad_log_phi_plus(&lam, p, &ctl).is_ok() && grad_log_phi_minus(&lam, p, &ctl).is_ok();
        let pts = draw_points(self.cfg.seed ^ 0x03, self.ctx.cfg.y_bound, 1000, escaping);
        let h = 1e-5;
        let fd = |g: &dyn Fn(&PhasePoint) -> f64, p: &PhasePoint| -> [f64; 4] {
            let v = p.to_real();
            let mut out = [0.0; 4];
            for k in 0..4 {
                let (mut hi, mut lo) = (v, v);
                hi[k] += h;
                lo[k] -= h;
                out[k] = (g(&PhasePoint::from_real(&hi)) - g(&PhasePoint::from_real(&lo))) / (2.0 * h);
            }
            out
        };
        let rel = |a: [f64; 4], b: [f64; 4]| {
            let num: f64 = (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt();
            num / b.iter().map(|x| x * x).sum::<f64>().sqrt()
        };
        let errs: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|p| {
                let gp = |q: &PhasePoint| green_plus(&lam, q, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                let gm = |q: &PhasePoint| green_minus(&lam, q, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                let ap = grad_log_phi_plus(&lam, p, &ctl).expect("escaping").real_gradient();
                let am = grad_log_phi_minus(&lam, p, &ctl).expect("escaping").real_gradient();
                (rel(fd(&gp, p), ap), rel(fd(&gm, p), am))
            })
            .collect();
        let ep = max_of(errs.iter().map(|e| e.0));
        let em = max_of(errs.iter().map(|e| e.1));
        let bad = errs.iter().filter(|e| !(e.0 < 1e-5 && e.1 < 1e-5)).count();
        r.metric("points", pts.len() as f64);
        r.metric("maxRelErrorPlus", ep);
        r.metric("maxRelErrorMinus", em);
        r.metric("violations", bad as f64);
        r.passed = bad == 0;
        Ok(r)
    }

    fn locus_invariance(&mut self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(4, title(4));
        let mut pool = Vec::new();
        for key in ["", "0", "1"] {
            let (an, _) = self.piece(key)?;
            pool.extend(an.curves.iter().flat_map(|c| c.samples.iter()).filter(|s| s.residual < 1e-9).map(|s| s.point));
        }
        if pool.len() < 500 {
            r.note(format!("only {} traced samples below 1e-9", pool.len()));
            r.metric("samples", pool.len() as f64);
            return Ok(r);
        }
        let picked: Vec<PhasePoint> = (0..500).map(|i| pool[i * pool.len() / 500]).collect();
        let (lam, ctl) = (self.lambda(), self.ctl());
        let opts = RefineOptions { tol_res: self.ctx.cfg.tol_res, ..RefineOptions::default() };
        let moves: Vec<(f64, f64)> = picked
            .par_iter()
            .map(|p| {
                let fw = refine_zero(&lam, &apply(&lam, p), &opts, &ctl).map(|x| x.moved).unwrap_or(f64::INFINITY);
                let bw = apply_inverse(&lam, p)
                    .and_then(|q| refine_zero(&lam, &q, &opts, &ctl))
                    .map(|x| x.moved)
                    .unwrap_or(f64::INFINITY);
                (fw, bw)
            })
            .collect();
        let fw = max_of(moves.iter().map(|m| m.0));
        let bw = max_of(moves.iter().map(|m| m.1));
        let bad = moves.iter().filter(|m| !(m.0 < 1e-6 && m.1 < 1e-6)).count();
        r.metric("samples", picked.len() as f64);
        r.metric("maxMoveForward", if fw.is_finite() { fw } else { -1.0 });
        r.metric("maxMoveBackward", if bw.is_finite() { bw } else { -1.0 });
        r.metric("violations", bad as f64);
        if !(fw.is_finite() && bw.is_finite()) {
            r.note("some images did not re-converge (move reported as -1)");
        }
        r.passed = bad == 0;
        Ok(r)
    }

    fn omega_counts(&mut self) -> Result<(CriterionResult, Vec<(String, Duration)>)> {
        let mut r = CriterionResult::new(5, title(5));
        let mut times = Vec::new();
        let mut ok = true;
        let mut reports = BTreeMap::new();
        for key in ["", "0", "1"] {
            let (an, t) = self.piece(key)?;
            let label = if key.is_empty() { "empty" } else { key };
            times.push((label.to_string(), *t));
            let rep = &an.report;
            let good = rep.wall_curve_counts == rep.expected_counts && rep.connected;
            ok &= good;
            r.note(format!("{label}: {} connected={}", count_string(rep), rep.connected));
            reports.insert(label.to_string(), rep.clone());
        }
        self.artifacts.insert("components.json".into(), artifact_string(&reports)?);
        r.passed = ok;
        Ok((r, times))
    }

    fn upsilon_counts(&mut self) -> Result<(CriterionResult, Duration)> {
        let mut r = CriterionResult::new(6, title(6));
        let (an, t) = self.piece("U")?;
        let rep = an.report.clone();
        let t = *t;
        let p = rep.wall_curve_counts.get(&WallTag::PWall).copied().unwrap_or(0);
        r.metric("pWallCurves", p as f64);
        r.note(format!("end behaviour {:?}, connected {}", rep.end_behavior, rep.connected));
        self.artifacts.insert("far_piece.json".into(), artifact_string(&rep)?);
        r.passed = p == 1 && rep.end_behavior == Some(true);
        Ok((r, t))
    }

    fn handles(&self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(7, title(7));
        let (m_min, m_max) = (-4, 20);
        let g = build_model_graph(m_min, m_max, 7)?;
        let mut brute: BTreeMap<(i64, i64), usize> = BTreeMap::new();
        for e in &g.edges {
            *brute.entry((e.from, e.to)).or_default() += 1;
        }
        let mut bad = Vec::new();
        let mut checked = 0;
        for k in 1..=8usize {
            for m in m_min..=(m_max - k as i64) {
                let h = handles_between(&g, m, k)?;
                let b = brute.get(&(m, m + k as i64)).copied().unwrap_or(0);
                checked += 1;
                if h != 1 << (k - 1) || h != b {
                    bad.push(format!("m={m} k={k}: {h} (brute {b})"));
                }
            }
        }
        r.metric("pairsChecked", checked as f64);
        r.metric("violations", bad.len() as f64);
        for b in bad.iter().take(5) {
            r.note(b);
        }
        r.passed = bad.is_empty();
        Ok(r)
    }

    fn motion(&mut self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(8, title(8));
        let (lam, ctl) = (self.lambda(), self.ctl());
        let level = self.ctx.cfg.r;
        let tol = self.ctx.cfg.tol_res;
        let opts = self.cfg.motion;
        let curve = {
            let (an, _) = self.piece("")?;
            an.curves.iter().find(|c| c.wall_tag == WallTag::GOuter && c.closed).cloned()
        };
        let Some(curve) = curve else {
            r.note("no closed outer level curve in the base piece");
            return Ok(r);
        };
        let seeds = resample_curve(&lam, &curve, 100, tol, &ctl)?;
        let wall = WallSpec::new(WallTag::GOuter, level);
        let invs: Vec<MotionInvariant> =
            seeds.iter().map(|p| MotionInvariant::for_wall(&lam, p, &wall, level, &ctl)).collect::<Result<_>>()?;
        let target = HenonParameter { a: lam.a * 2.0, c: lam.c };
        let path = parameter_path(&lam, &target, opts.max_param_step);
        let tracks: Vec<MotionTrack> = invs
            .par_iter()
            .zip(&seeds)
            .map(|(inv, p)| track_point(inv, &path, p, &opts, &ctl))
            .collect::<Result<_>>()?;
        let complete = tracks.iter().filter(|t| t.complete).count();
        let inj = injectivity_check(&tracks)?;
        self.artifacts.insert("motion_tracks.jsonl".into(), write_jsonl(&tracks_to_records(&tracks))?);
        let pairs: Vec<(MotionInvariant, PhasePoint)> = invs.iter().copied().zip(seeds.iter().copied()).collect();
        let step = 1e-6;
        let r1 = holomorphy_residual(&holomorphy_grid(&lam, &pairs, ParamDirection::A, step, 2, &opts, &ctl)?)?;
        let r2 = holomorphy_residual(&holomorphy_grid(&lam, &pairs, ParamDirection::A, step / 2.0, 2, &opts, &ctl)?)?;
        r.metric("tracks", tracks.len() as f64);
        r.metric("completeTracks", complete as f64);
        r.metric("waypoints", path.len() as f64);
        r.metric("minPairDistance", inj.min_distance);
        r.metric("holomorphyRatio", r1);
        r.metric("holomorphyRatioHalfStep", r2);
        let small = r1 < 1e-3;
        let halves = r2 <= 0.5 * r1;
        let injective = inj.min_distance > 0.0 && inj.per_waypoint.iter().all(|d| *d > 0.0);
        if !halves {
            r.note(format!("ratio did not halve with the grid step ({r1:.3e} -> {r2:.3e})"));
        }
        r.passed = small && halves && injective && complete == tracks.len();
        Ok(r)
    }

    fn structural(&mut self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(9, title(9));
        let base = self.lambda();
        let mut signatures = Vec::new();
        let mut ok = true;
        for s in [1.0, 1.5, 2.0] {
            let lam = HenonParameter::new(base.a * s, base.c)?;
            let reps: Vec<ComponentReport> = if s == 1.0 {
                let mut v = Vec::new();
                for key in ["", "0", "1", "U"] {
                    v.push(self.piece(key)?.0.report.clone());
                }
                v
            } else {
                let ctx = DomainContext::new(lam, self.ctx.cfg)?;
                let mut v = Vec::new();
                for key in ["", "0", "1"] {
                    v.push(analyze_omega_piece(&ctx, &key.parse()?, &self.cfg.check)?.report);
                }
                v.push(analyze_upsilon_piece(&ctx, &self.cfg.check)?.report);
                v
            };
            let pass5 = reps[..3].iter().all(|p| p.wall_curve_counts == p.expected_counts && p.connected);
            let u = &reps[3];
            let pass6 = u.wall_curve_counts.get(&WallTag::PWall) == Some(&1) && u.end_behavior == Some(true);
            ok &= pass5 && pass6;
            let sig: Vec<String> = reps.iter().map(|p| format!("{} {}", count_string(p), p.connected)).collect();
            r.note(format!("a x {s}: 5 {} 6 {}", verdict(pass5), verdict(pass6)));
            signatures.push(sig);
        }
        let identical = signatures.windows(2).all(|w| w[0] == w[1]);
        r.passed = ok && identical;
        Ok(r)
    }

    fn degeneration(&self) -> Result<CriterionResult> {
        let mut r = CriterionResult::new(10, title(10));
        let base = self.lambda();
        let lam = HenonParameter::new(base.a / base.a.norm() * 1e-8, base.c)?;
        let ctl = self.ctl();
        let escaping = |p: &PhasePoint| {
            green_plus(&lam, p, 1e-12, &ctl).map(|g| g.is_escaping()).unwrap_or(false)
                && green_1d(p.x, lam.c, 1e-12, &ctl).map(|g| g.is_escaping()).unwrap_or(false)
        };
        let pts = draw_points(self.cfg.seed ^ 0x0a, self.ctx.cfg.y_bound, 1000, escaping);
        let errs: Vec<f64> = pts
            .par_iter()
            .map(|p| {
                let g = green_plus(&lam, p, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                let g1 = green_1d(p.x, lam.c, 1e-12, &ctl).map(|g| g.value).unwrap_or(f64::NAN);
                (g - g1).abs()
            })
            .collect();
        let worst = max_of(errs.iter().copied());
        r.metric("points", pts.len() as f64);
        r.metric("maxDifference", worst);
        r.passed = errs.iter().all(|e| *e < 1e-4);
        Ok(r)
    }
}

fn count_string(rep: &ComponentReport) -> String {
    let parts: Vec<String> = rep.wall_curve_counts.iter().map(|(k, v)| format!("{}={v}", k.name())).collect();
    format!("({})", parts.join(","))
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Criteria 1 to 10 once, with their artifacts.
pub fn run_once(cfg: &RunConfig, mut progress: impl FnMut(&Timed)) -> Result<SuiteRun> {
    let mut suite = Suite::new(cfg)?;
    let mut timed = Vec::new();
    for (id, _) in CRITERIA.iter().filter(|c| c.0 <= 10) {
        let t = suite.run(*id)?;
        progress(&t);
        timed.push(t);
    }
    let report = SuiteReport {
        lambda: suite.lambda(),
        config: suite.ctx.cfg,
        seed: cfg.seed,
        results: timed.iter().map(|t| t.result.clone()).collect(),
    };
    let mut artifacts = suite.artifacts;
    artifacts.insert("verify_report.json".into(), artifact_string(&report)?);
    Ok(SuiteRun { report, timed, artifacts })
}

/// Two runs of criteria 1 to 10 from the same configuration; criterion 11 compares
/// their artifacts byte for byte. The first run's results and artifacts are returned.
pub fn run_suite(cfg: &RunConfig, mut progress: impl FnMut(&Timed)) -> Result<SuiteRun> {
    let start = Instant::now();
    let mut first = run_once(cfg, &mut progress)?;
    let second = run_once(cfg, |_| {})?;
    let mut r = CriterionResult::new(11, title(11));
    let differing: Vec<&String> = first
        .artifacts
        .keys()
        .chain(second.artifacts.keys())
        .filter(|k| first.artifacts.get(*k) != second.artifacts.get(*k))
        .collect();
    r.metric("artifacts", first.artifacts.len() as f64);
    r.metric("differing", differing.len() as f64);
    for k in &differing {
        r.note(format!("{k} differs"));
    }
    r.passed = differing.is_empty() && !first.artifacts.is_empty();
    let t = Timed { result: r, elapsed: start.elapsed(), budgets: Vec::new() };
    progress(&t);
    first.report.results.push(t.result.clone());
    first.timed.push(t);
    first.artifacts.insert("verify_report.json".into(), artifact_string(&first.report)?);
    Ok(first)
}

/// One line per criterion: id, verdict, title, metrics. No timings.
pub fn format_table(timed: &[Timed]) -> String {
    let mut s = String::new();
    for t in timed {
        let metrics: Vec<String> = t.result.metrics.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
        let over: Vec<&str> = t.budgets.iter().filter(|b| !b.ok()).map(|b| b.name.as_str()).collect();
        let mut line = format!("criterion {:>2} {} {}", t.result.id, verdict(t.passed()), t.result.title);
        if !metrics.is_empty() {
            line.push_str(&format!(" [{}]", metrics.join(" ")));
        }
        if !over.is_empty() {
            line.push_str(&format!(" over time budget: {}", over.join(", ")));
        }
        if !t.result.detail.is_empty() {
            line.push_str(&format!(" ({})", t.result.detail));
        }
        s.push_str(&line);
        s.push('\n');
    }
    s
}
