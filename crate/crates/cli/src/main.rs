use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use henon_core::domains::DomainContext;
use henon_core::io::{
    self, header, parse_jsonl, render_records, seeds_from_records, tracks_to_records, write_jsonl, MotionSeed, PathSpec,
    Projection, Record, RunConfig,
};
use henon_core::locus::{sample_component, WallSpec};
use henon_core::model::{analyze_omega_piece, analyze_upsilon_piece, build_model_graph, handles_between};
use henon_core::motion::{track_point, MotionInvariant, MotionTrack};
use henon_core::potentials::{green_minus, green_plus};
use henon_core::verify::{format_table, run_suite};
use henon_core::{DyadicString, HenonError, PhasePoint, Result};

#[derive(Parser)]
#[command(name = "henon", about = "Critical locus numerics for complex Henon maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate G+ (or G- with --minus) at a point.
    Green {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `X,Y`, each a real or complex number such as `1.5-2i`.
        #[arg(long)]
        point: String,
        #[arg(long)]
        minus: bool,
    },
    /// Sample and trace the locus in one bounded piece.
    Trace {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dyadic label; `""` or `∅` for the base piece.
        #[arg(long, default_value = "")]
        component: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a piece with its model counts. Exits 0 iff it matches.
    CheckModel {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "upsilon")]
        component: Option<String>,
        #[arg(long)]
        upsilon: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Handle counts between spheres of the model graph.
    ModelGraph {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        from: i64,
        #[arg(long)]
        to: Option<i64>,
    },
    /// Continue seeds along a parameter path. Exits 0 iff every track completes.
    Continue {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        seeds: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suite and print one line per criterion.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Plot a JSON Lines stream as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        proj: Projection,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn context(cfg: &RunConfig) -> Result<DomainContext> {
    DomainContext::new(cfg.lambda()?, cfg.domain_config()?)
}

fn parse_label(s: &str) -> Result<DyadicString> {
    if s == "∅" {
        return Ok(DyadicString::empty());
    }
    s.parse()
}

fn parse_point(s: &str) -> Result<PhasePoint> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y] = parts.as_slice() else {
        return Err(HenonError::InvalidArgument(format!("expected X,Y, got {s:?}")));
    };
    let num = |t: &str| {
        t.parse::<Complex64>().map_err(|_| HenonError::InvalidArgument(format!("not a complex number: {t:?}")))
    };
    Ok(PhasePoint::new(num(x)?, num(y)?))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    io::write_text(path, text)
}

/// `Ok(true)` maps to exit code 0, `Ok(false)` to 1.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Green { config, point, minus } => {
            let cfg = load_config(&config)?;
            let ctx = context(&cfg)?;
            let p = parse_point(&point)?;
            let v = if minus {
                green_minus(&ctx.lambda, &p, 1e-12, &ctx.ctl())?
            } else {
                green_plus(&ctx.lambda, &p, 1e-12, &ctx.ctl())?
            };
            println!("{}", io::to_json_pretty(&v)?);
            Ok(true)
        }
        Command::Trace { config, component, out } => {
            let cfg = load_config(&config)?;
            let ctx = context(&cfg)?;
            let alpha = parse_label(&component)?;
            let samples = sample_component(&ctx, &alpha, &cfg.check.grid)?;
            let an = analyze_omega_piece(&ctx, &alpha, &cfg.check)?;
            let mut records = vec![header(&ctx.lambda, Some(&ctx.cfg))];
            records.extend(samples.into_iter().map(Record::Sample));
            records.extend(an.curves.into_iter().map(Record::Curve));
            write_out(&out, &write_jsonl(&records)?)?;
            Ok(true)
        }
        Command::CheckModel { config, component, upsilon, out } => {
            let cfg = load_config(&config)?;
            let ctx = context(&cfg)?;
            let report = if upsilon {
                analyze_upsilon_piece(&ctx, &cfg.check)?.report
            } else {
                let alpha = parse_label(component.as_deref().unwrap_or(""))?;
                analyze_omega_piece(&ctx, &alpha, &cfg.check)?.report
            };
            io::write_artifact(&out, &report)?;
            Ok(report.matches_model)
        }
        Command::ModelGraph { depth, from, to } => {
            let to = to.unwrap_or(from + depth as i64 + 1);
            let g = build_model_graph(from, to, depth)?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "k\thandles").map_err(|e| HenonError::Io(e.to_string()))?;
            for k in 1..=depth + 1 {
                if from + k as i64 > to {
                    break;
                }
                let h = handles_between(&g, from, k)?;
                writeln!(stdout, "{k}\t{h}").map_err(|e| HenonError::Io(e.to_string()))?;
            }
            Ok(true)
        }
        Command::Continue { config, path, seeds, out } => {
            let cfg = load_config(&config)?;
            let ctx = context(&cfg)?;
            let spec: PathSpec = io::load_artifact(&path)?;
            let nodes = spec.refine()?;
            let records = parse_jsonl(&io::read_text(&seeds)?)?;
            let mut seeds: Vec<MotionSeed> = seeds_from_records(&records);
            // Curves from `trace` seed every one of their samples.
            for r in &records {
                if let Record::Curve(c) = r {
                    seeds.extend(c.samples.iter().map(|s| MotionSeed { point: s.point, wall_tag: c.wall_tag, level: c.level }));
                }
            }
            if seeds.is_empty() {
                return Err(HenonError::Empty("no seeds in input".into()));
            }
            let start = nodes[0];
            let ctl = ctx.ctl();
            let opts = henon_core::motion::MotionOptions { max_param_step: spec.max_param_step, ..cfg.motion };
            let tracks: Vec<MotionTrack> = seeds
                .par_iter()
                .map(|s| {
                    let wall = WallSpec::new(s.wall_tag, s.level);
                    let inv = MotionInvariant::for_wall(&start, &s.point, &wall, ctx.cfg.r, &ctl)?;
                    track_point(&inv, &nodes, &s.point, &opts, &ctl)
                })
                .collect::<Result<_>>()?;
            write_out(&out, &write_jsonl(&tracks_to_records(&tracks))?)?;
            Ok(tracks.iter().all(|t| t.complete))
        }
        Command::Verify { config } => {
            let cfg = load_config(&config)?;
            let run = run_suite(&cfg, |t| eprintln!("criterion {:>2} took {:.3} s", t.result.id, t.elapsed.as_secs_f64()))?;
            print!("{}", format_table(&run.timed));
            if let Some(dir) = &cfg.output.dir {
                for (name, text) in &run.artifacts {
                    write_out(&Path::new(dir).join(name), text)?;
                }
            }
            Ok(run.timed.iter().all(|t| t.passed()))
        }
        Command::Render { input, proj, out } => {
            let records = parse_jsonl(&io::read_text(&input)?)?;
            write_out(&out, &render_records(&records, proj))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("HENON_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let msg = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
