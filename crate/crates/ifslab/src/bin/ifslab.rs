//! Experiment runner and renderer for iterated function systems.
//!
//! Exit codes: 0 expected verdict, 2 contrary verdict, 3 inconclusive,
//! 64 parse/usage error, 70 runtime error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use ifslab::analysis::{alr_verify, pointwise_test, strict_refute};
use ifslab::experiment::{
    load_config, preset, run_experiment, EXIT_CONTRARY, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_PARSE,
    EXIT_RUNTIME,
};
use ifslab::hutchinson::iterate_orbit;
use ifslab::io::{fmt_f64, write_orbit_csv, write_point_cloud};
use ifslab::render::{render_pgm, render_svg, Viewport};
use ifslab::sets::SetApprox;
use ifslab::space::{Point, Space, SpaceKind};
use ifslab::{IfsError, Verdict};
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ifslab",
    version,
    about = "iterated function systems: orbits, attractor classification, gallery presets"
)]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Globals {
    /// Orbit resolution (grid snap cell is epsilon/2).
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Convergence tolerance for verdicts.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long, global = true, value_name = "N")]
    n_max: Option<usize>,
    /// Worker threads (results are identical at any count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: $IFSLAB_OUT_DIR or ./out).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a preset's added map is attracting with a local repellor.
    VerifyAlr {
        #[arg(long)]
        preset: String,
    },
    /// Iterate the operator from a seed and dump the orbit CSV.
    Orbit {
        #[arg(long)]
        preset: String,
        /// Seed point: `x`, `x,y`, or `inf`.
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        seed: String,
        #[arg(short, long)]
        n: Option<usize>,
        /// Also write one point-cloud CSV per step.
        #[arg(long)]
        dump_clouds: bool,
        /// Render this orbit step to `orbit-step<k>.pgm`.
        #[arg(long)]
        render_step: Option<usize>,
    },
    /// Classify convergence of the singleton orbit of a seed.
    Pointwise {
        #[arg(long)]
        preset: String,
        #[arg(long, allow_hyphen_values = true)]
        seed: String,
    },
    /// Run the local-repellor refutation of strict attraction.
    RefuteStrict {
        #[arg(long)]
        preset: String,
        /// Witness start; preset default when omitted.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        tail_start: Option<usize>,
    },
    /// Gallery utilities.
    Gallery {
        #[command(subcommand)]
        cmd: GalleryCmd,
    },
    /// File-driven experiments.
    Experiment {
        #[command(subcommand)]
        cmd: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum GalleryCmd {
    /// Render a preset's target set (PGM or SVG).
    Render {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 1024)]
        width: u32,
        #[arg(long, default_value_t = 64)]
        height: u32,
        /// Render format (pgm|svg).
        #[arg(long, default_value = "pgm")]
        render_format: String,
        /// Output file (default `<preset>.<ext>` under the out dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run a JSON experiment config.
    Run { config: PathBuf },
}

fn parse_seed(s: &str, space: &Space) -> Result<Point, IfsError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(Point::Infinity);
    }
    let parts: Vec<&str> = s.split(',').collect();
    let parse = |t: &str| -> Result<f64, IfsError> {
        t.trim()
            .parse::<f64>()
            .map_err(|e| IfsError::Parse(format!("bad seed `{t}`: {e}")))
    };
    match parts.as_slice() {
        [x] => {
            let x = parse(x)?;
            Ok(match space.kind() {
                SpaceKind::Circle => Point::angle(x),
                _ => Point::Line(x),
            })
        }
        [x, y] => Ok(Point::Plane(parse(x)?, parse(y)?)),
        _ => Err(IfsError::Parse(format!("bad seed `{s}`"))),
    }
}

fn out_dir(globals: &Globals) -> PathBuf {
    globals
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("IFSLAB_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn error_exit(e: &IfsError) -> i32 {
    if e.is_usage() {
        EXIT_PARSE
    } else {
        EXIT_RUNTIME
    }
}

fn run(cli: Cli) -> Result<i32, IfsError> {
    if let Some(n) = cli.globals.threads {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let dir = out_dir(&cli.globals);

    match &cli.cmd {
        Cmd::VerifyAlr { preset: name } => {
            let bundle = preset(name)?;
            let eps = cli.globals.epsilon.unwrap_or(bundle.defaults.epsilon);
            let tol = cli.globals.tol.unwrap_or(1e-9);
            let n_max = cli.globals.n_max.unwrap_or(20_000);
            let phi = bundle
                .phi
                .clone()
                .ok_or_else(|| IfsError::Invalid("preset has no distinguished map".into()))?;
            let samples = bundle.alr_samples(eps)?;
            let report = alr_verify(&phi, &samples, n_max, tol)?;
            let verdict = report.is_alr();
            match cli.globals.format {
                OutFormat::Json => println!(
                    "{{\"preset\":\"{}\",\"attracting\":{},\"repellor_found\":{},\"alr\":{}}}",
                    bundle.name,
                    report.attracting,
                    report.repellor.is_some(),
                    verdict
                ),
                OutFormat::Csv => {
                    println!("preset,attracting,repellor_found,alr");
                    println!(
                        "{},{},{},{}",
                        bundle.name,
                        report.attracting,
                        report.repellor.is_some(),
                        verdict
                    );
                }
            }
            Ok(if verdict { EXIT_OK } else { EXIT_CONTRARY })
        }
        Cmd::Orbit {
            preset: name,
            seed,
            n,
            dump_clouds,
            render_step,
        } => {
            let bundle = preset(name)?;
            let eps = cli.globals.epsilon.unwrap_or(bundle.defaults.epsilon);
            let n = n.or(cli.globals.n_max).unwrap_or(bundle.defaults.n_max);
            let space = bundle.system.space().clone();
            let seed_pt = parse_seed(seed, &space)?;
            let s0 = SetApprox::singleton(space, seed_pt, eps)?;
            let orbit = iterate_orbit(&bundle.system, &s0, n, eps)?;
            fs::create_dir_all(&dir)?;
            let path = dir.join("orbit.csv");
            let mut buf = Vec::new();
            write_orbit_csv(&mut buf, &orbit)?;
            fs::write(&path, buf)?;
            println!("wrote {}", path.display());
            if *dump_clouds {
                for (k, step) in orbit.steps.iter().enumerate() {
                    let p = dir.join(format!("orbit-step{k}.csv"));
                    let mut buf = Vec::new();
                    write_point_cloud(&mut buf, step)?;
                    fs::write(&p, buf)?;
                }
                println!("wrote {} step clouds", orbit.steps.len());
            }
            if let Some(k) = render_step {
                let k = (*k).min(orbit.steps.len() - 1);
                let vp = Viewport {
                    width: 1024,
                    height: 64,
                    ..bundle.viewport
                };
                let (bytes, drawn) = render_pgm(&orbit.steps[k], &vp)?;
                if drawn == 0 {
                    eprintln!("warning: step {k} missed the viewport");
                }
                let p = dir.join(format!("orbit-step{k}.pgm"));
                fs::write(&p, bytes)?;
                println!("wrote {}", p.display());
            }
            Ok(EXIT_OK)
        }
        Cmd::Pointwise { preset: name, seed } => {
            let bundle = preset(name)?;
            let eps = cli.globals.epsilon.unwrap_or(bundle.defaults.epsilon);
            let tol = cli.globals.tol.unwrap_or(bundle.defaults.tol);
            let n_max = cli.globals.n_max.unwrap_or(bundle.defaults.n_max);
            let space = bundle.system.space().clone();
            let seed_pt = parse_seed(seed, &space)?;
            let report =
                pointwise_test(&bundle.system, seed_pt, bundle.target(), n_max, tol, eps)?;
            let final_d = report.distances.last().copied().unwrap_or(f64::NAN);
            match cli.globals.format {
                OutFormat::Json => println!(
                    "{{\"preset\":\"{}\",\"seed\":\"{}\",\"verdict\":\"{}\",\"final_distance\":{}}}",
                    bundle.name,
                    seed_pt,
                    report.verdict,
                    fmt_f64(final_d)
                ),
                OutFormat::Csv => {
                    println!("preset,seed,verdict,final_distance");
                    println!(
                        "{},{},{},{}",
                        bundle.name,
                        seed_pt,
                        report.verdict,
                        fmt_f64(final_d)
                    );
                }
            }
            Ok(match report.verdict {
                Verdict::Converged => EXIT_OK,
                Verdict::Diverged => EXIT_CONTRARY,
                Verdict::Inconclusive => EXIT_INCONCLUSIVE,
            })
        }
        Cmd::RefuteStrict {
            preset: name,
            x0,
            tail_start,
        } => {
            let bundle = preset(name)?;
            let eps = cli.globals.epsilon.unwrap_or(bundle.defaults.epsilon);
            let n_max = cli.globals.n_max.unwrap_or(10_000);
            let space = bundle.system.space().clone();
            let x0_pt = x0.as_ref().map(|s| parse_seed(s, &space)).transpose()?;
            let witness = bundle.build_witness(eps, x0_pt)?;
            let report = strict_refute(
                &bundle.system,
                bundle.target(),
                &witness,
                *tail_start,
                n_max,
                eps,
            )?;
            match cli.globals.format {
                OutFormat::Json => println!(
                    "{{\"preset\":\"{}\",\"strict_refuted\":{},\"window\":[{},{}],\"x0_to_target\":{},\"min_distance\":{}}}",
                    bundle.name,
                    report.refuted,
                    report.window.0,
                    report.window.1,
                    fmt_f64(report.x0_to_target),
                    fmt_f64(report.min_distance)
                ),
                OutFormat::Csv => {
                    println!(
                        "preset,strict_refuted,window_start,window_end,x0_to_target,min_distance"
                    );
                    println!(
                        "{},{},{},{},{},{}",
                        bundle.name,
                        report.refuted,
                        report.window.0,
                        report.window.1,
                        fmt_f64(report.x0_to_target),
                        fmt_f64(report.min_distance)
                    );
                }
            }
            Ok(if report.refuted { EXIT_OK } else { EXIT_CONTRARY })
        }
        Cmd::Gallery { cmd } => match cmd {
            GalleryCmd::Render {
                preset: name,
                width,
                height,
                render_format,
                out,
            } => {
                let bundle = preset(name)?;
                let vp = Viewport {
                    width: *width,
                    height: *height,
                    ..bundle.viewport
                };
                fs::create_dir_all(&dir)?;
                let ext = render_format.as_str();
                let sanitized = bundle.name.replace([':', '{', '}', '"', ','], "_");
                let path = out
                    .clone()
                    .unwrap_or_else(|| dir.join(format!("{sanitized}.{ext}")));
                match ext {
                    "pgm" => {
                        let (bytes, drawn) = render_pgm(bundle.target(), &vp)?;
                        if drawn == 0 {
                            eprintln!("warning: nothing inside the viewport");
                        }
                        fs::write(&path, bytes)?;
                    }
                    "svg" => {
                        let (text, drawn) = render_svg(bundle.target(), &vp)?;
                        if drawn == 0 {
                            eprintln!("warning: nothing inside the viewport");
                        }
                        fs::write(&path, text)?;
                    }
                    other => {
                        return Err(IfsError::Parse(format!(
                            "unknown render format `{other}` (pgm or svg)"
                        )))
                    }
                }
                println!("wrote {}", path.display());
                Ok(EXIT_OK)
            }
        },
        Cmd::Experiment { cmd } => match cmd {
            ExperimentCmd::Run { config } => {
                let mut cfg = load_config(config)?;
                if let Some(e) = cli.globals.epsilon {
                    cfg.epsilon = Some(e);
                }
                if let Some(t) = cli.globals.tol {
                    cfg.tol = Some(t);
                }
                if let Some(n) = cli.globals.n_max {
                    cfg.n_max = Some(n);
                }
                let outcome = run_experiment(&cfg, &dir)?;
                match cli.globals.format {
                    OutFormat::Json => {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&outcome.report)
                                .map_err(|e| IfsError::Parse(e.to_string()))?
                        )
                    }
                    OutFormat::Csv => {
                        println!("seed,verdict,first_hit,final_distance");
                        for row in &outcome.report.pointwise {
                            println!(
                                "{},{},{},{}",
                                row.seed,
                                row.verdict,
                                row.first_hit.map(|k| k.to_string()).unwrap_or_default(),
                                row.final_distance
                            );
                        }
                        if let Some(r) = &outcome.report.strict_refuted {
                            println!("strict_refuted,{r}");
                        }
                    }
                }
                Ok(outcome.exit_code)
            }
        },
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version print normally; anything else is a usage
            // error under the exit-code contract.
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    std::process::exit(EXIT_OK);
                }
                _ => {
                    eprint!("{e}");
                    std::process::exit(EXIT_PARSE);
                }
            }
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_exit(&e)
        }
    };
    std::process::exit(code);
}
