//! File-driven experiment running: named gallery presets, JSON experiment
//! configs, classification reports and the CLI exit-code contract
//! (0 expected verdict, 2 contrary, 3 inconclusive, 64 parse, 70 runtime).

use crate::analysis::{
    pointwise_test, strict_refute, witnessing_sequence_until, RefuteReport, Verdict,
    WitnessingSequence,
};
use crate::descriptor::{PointDescriptor, SystemDescriptor};
use crate::error::{IfsError, Result};
use crate::gallery::{
    cantor_system_with, circle_example, kwietniak_system, line_example,
    sierpinski_carpet_system_with, sierpinski_triangle_system_with, CircleComponent,
    CircleExample, GapOptions, GapSystem, KwietniakExample, LineExample, LinePart,
};
use crate::hutchinson::iterate_orbit;
use crate::io::{fmt_f64, write_orbit_csv, write_point_cloud};
use crate::maps::{IfsSystem, MapHandle};
use crate::region::Region;
use crate::render::{render_pgm, render_svg, Viewport};
use crate::sets::{epsilon_net, SetApprox};
use crate::space::{Point, Space};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRARY: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_PARSE: i32 = 64;
pub const EXIT_RUNTIME: i32 = 70;

#[derive(Clone, Copy, Debug)]
pub struct RunDefaults {
    pub epsilon: f64,
    pub tol: f64,
    pub n_max: usize,
}

/// What a preset bundles beyond the bare system.
#[derive(Clone, Debug)]
pub enum PresetPayload {
    Gap(Box<GapSystem>),
    Kwietniak(Box<KwietniakExample>),
    Circle(Box<CircleExample>),
    Line(Box<LineExample>),
}

#[derive(Clone, Debug)]
pub struct PresetBundle {
    pub name: String,
    pub system: IfsSystem,
    /// The distinguished added map (the one carrying the local repellor).
    pub phi: Option<MapHandle>,
    pub payload: PresetPayload,
    pub defaults: RunDefaults,
    /// Seeds used when a run does not specify its own.
    pub default_seeds: Vec<Point>,
    pub viewport: Viewport,
}

impl PresetBundle {
    pub fn target(&self) -> &SetApprox {
        self.system
            .target()
            .expect("presets always carry a target")
    }

    /// Sample cloud for ALR verification on this preset's chart.
    pub fn alr_samples(&self, eps: f64) -> Result<SetApprox> {
        let space = self.system.space();
        match &self.payload {
            PresetPayload::Gap(g) => match g.hull() {
                Region::Interval { lo, hi } => epsilon_net(
                    space,
                    &Region::Interval { lo: *lo, hi: *hi },
                    eps.max(1e-3),
                ),
                hull => {
                    let pts = space
                        .sample(2_000, 0xa15)
                        .into_iter()
                        .filter(|p| hull.contains(space, p, 0.0))
                        .collect::<Vec<_>>();
                    SetApprox::new(space.clone(), pts, eps.max(1e-3))
                }
            },
            PresetPayload::Kwietniak(_) => {
                let pts: Vec<Point> = (-20..=20).map(|k| Point::Line(k as f64 / 2.0)).collect();
                SetApprox::new(space.clone(), pts, 1e-6)
            }
            PresetPayload::Circle(_) => {
                epsilon_net(space, &Region::Arc { from: 0.0, to: 0.0 }, eps.max(1e-2))
            }
            PresetPayload::Line(_) => {
                let b = match space.bounds() {
                    Some(crate::space::Bounds::Interval(lo, hi)) => (lo, hi),
                    _ => (-4.0, 4.0),
                };
                epsilon_net(
                    space,
                    &Region::Interval { lo: b.0, hi: b.1 },
                    eps.max(1e-2),
                )
            }
        }
    }

    /// Build the canonical refutation witness for this preset, reaching into
    /// the `10*eps`-neighborhood of its repellor.
    pub fn build_witness(&self, eps: f64, x0: Option<Point>) -> Result<WitnessingSequence> {
        match &self.payload {
            PresetPayload::Gap(g) => {
                let (default_x0, repellor) = g.central_witness_seed();
                witnessing_sequence_until(
                    g.phi(),
                    x0.unwrap_or(default_x0),
                    repellor,
                    10.0 * eps,
                    10_000,
                    1e-10,
                )
            }
            PresetPayload::Kwietniak(k) => witnessing_sequence_until(
                &k.phi,
                x0.unwrap_or(Point::Line(-5.0)),
                Point::Infinity,
                10.0 * eps,
                100_000,
                1e-9,
            ),
            PresetPayload::Circle(c) => {
                let (gs, ge) = *c.gaps.first().ok_or_else(|| {
                    IfsError::Invalid("full-circle target has no gap to witness in".into())
                })?;
                let len = crate::region::arc_length(gs, ge);
                let mid = Point::angle(gs + len / 2.0);
                witnessing_sequence_until(
                    &c.phi,
                    x0.unwrap_or(mid),
                    Point::angle(ge),
                    10.0 * eps,
                    10_000,
                    1e-10,
                )
            }
            PresetPayload::Line(l) => {
                let (a1, b1) = l.first_gap;
                let mid = Point::Line(0.5 * (a1 + b1));
                witnessing_sequence_until(
                    &l.phi,
                    x0.unwrap_or(mid),
                    Point::Line(b1),
                    10.0 * eps,
                    10_000,
                    1e-10,
                )
            }
        }
    }
}

fn parse_circle_spec(spec: &str) -> Result<Vec<CircleComponent>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct CircleSpec {
        #[serde(default)]
        points: Vec<f64>,
        #[serde(default)]
        arcs: Vec<[f64; 2]>,
    }
    let parsed: CircleSpec = serde_json::from_str(spec)
        .map_err(|e| IfsError::Parse(format!("circle spec: {e}")))?;
    let mut comps = Vec::new();
    for p in parsed.points {
        comps.push(CircleComponent::Point(p));
    }
    for [from, to] in parsed.arcs {
        comps.push(CircleComponent::Arc { from, to });
    }
    if comps.is_empty() {
        return Err(IfsError::Parse(
            "circle spec needs at least one point or arc".into(),
        ));
    }
    Ok(comps)
}

fn parse_line_spec(spec: &str) -> Result<Vec<LinePart>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct LineSpec {
        #[serde(default)]
        points: Vec<f64>,
        #[serde(default)]
        intervals: Vec<[f64; 2]>,
    }
    let parsed: LineSpec =
        serde_json::from_str(spec).map_err(|e| IfsError::Parse(format!("line spec: {e}")))?;
    let mut parts = Vec::new();
    for p in parsed.points {
        parts.push(LinePart::Point(p));
    }
    for [a, b] in parsed.intervals {
        parts.push(LinePart::Interval(a, b));
    }
    Ok(parts)
}

/// Resolve a preset name: `cantor`, `cantor-simplified`,
/// `sierpinski-carpet`, `sierpinski-triangle`, `kwietniak`,
/// `circle:<json>`, `line:<json>`.
pub fn preset(name: &str) -> Result<PresetBundle> {
    if let Some(spec) = name.strip_prefix("circle:") {
        let comps = parse_circle_spec(spec)?;
        let defaults = RunDefaults {
            epsilon: 1e-3,
            tol: 2e-2,
            n_max: 40,
        };
        let ex = circle_example(&comps, defaults.epsilon)?;
        let seeds: Vec<Point> = (0..8)
            .map(|k| Point::angle(std::f64::consts::TAU * (k as f64 + 0.37) / 8.0))
            .collect();
        return Ok(PresetBundle {
            name: name.to_string(),
            system: ex.system.clone(),
            phi: Some(ex.phi.clone()),
            payload: PresetPayload::Circle(Box::new(ex)),
            defaults,
            default_seeds: seeds,
            viewport: Viewport::new([0.0, 0.0], [std::f64::consts::TAU, 1.0], 1024, 64),
        });
    }
    if let Some(spec) = name.strip_prefix("line:") {
        let parts = parse_line_spec(spec)?;
        let defaults = RunDefaults {
            epsilon: 1e-4,
            tol: 2e-2,
            n_max: 40,
        };
        let ex = line_example(&parts, defaults.epsilon)?;
        let (lo, hi) = match ex.system.space().bounds() {
            Some(crate::space::Bounds::Interval(lo, hi)) => (lo, hi),
            _ => (-4.0, 4.0),
        };
        let seeds: Vec<Point> = (0..8)
            .map(|k| Point::Line(lo + (hi - lo) * (k as f64 + 0.5) / 8.0))
            .collect();
        return Ok(PresetBundle {
            name: name.to_string(),
            system: ex.system.clone(),
            phi: Some(ex.phi.clone()),
            payload: PresetPayload::Line(Box::new(ex)),
            defaults,
            default_seeds: seeds,
            viewport: Viewport::new([lo, 0.0], [hi, 1.0], 1024, 64),
        });
    }
    match name {
        "kwietniak" => {
            let defaults = RunDefaults {
                epsilon: 1e-3,
                tol: 2e-2,
                n_max: 400,
            };
            let ex = kwietniak_system(defaults.epsilon)?;
            let seeds: Vec<Point> = (-4..4).map(|k| Point::Line(k as f64 * 2.5)).collect();
            Ok(PresetBundle {
                name: name.to_string(),
                system: ex.system.clone(),
                phi: Some(ex.phi.clone()),
                payload: PresetPayload::Kwietniak(Box::new(ex)),
                defaults,
                default_seeds: seeds,
                viewport: Viewport::new(
                    [-std::f64::consts::PI, 0.0],
                    [std::f64::consts::PI, 1.0],
                    1024,
                    64,
                ),
            })
        }
        "cantor" | "cantor-simplified" => {
            let opts = if name == "cantor-simplified" {
                GapOptions::cantor().simplified()
            } else {
                GapOptions::cantor()
            };
            let g = cantor_system_with(opts)?;
            gap_bundle(name, g, RunDefaults {
                epsilon: 1e-4,
                tol: 2e-2,
                n_max: 15,
            })
        }
        "sierpinski-carpet" | "sierpinski-carpet-simplified" => {
            let opts = if name.ends_with("simplified") {
                GapOptions::carpet().simplified()
            } else {
                GapOptions::carpet()
            };
            let g = sierpinski_carpet_system_with(opts)?;
            gap_bundle(name, g, RunDefaults {
                epsilon: 4e-3,
                tol: 5e-2,
                n_max: 12,
            })
        }
        "sierpinski-triangle" => {
            let g = sierpinski_triangle_system_with(GapOptions::triangle())?;
            gap_bundle(name, g, RunDefaults {
                epsilon: 2e-3,
                tol: 5e-2,
                n_max: 14,
            })
        }
        other => Err(IfsError::Parse(format!("unknown preset `{other}`"))),
    }
}

fn gap_bundle(name: &str, g: GapSystem, defaults: RunDefaults) -> Result<PresetBundle> {
    let seeds: Vec<Point> = match g.hull() {
        Region::Interval { lo, hi } => (0..8)
            .map(|k| Point::Line(lo + (hi - lo) * (k as f64 + 0.5) / 8.0))
            .collect(),
        Region::Rect { min, max } => (0..8)
            .map(|k| {
                Point::Plane(
                    min[0] + (max[0] - min[0]) * (k as f64 + 0.5) / 8.0,
                    min[1] + (max[1] - min[1]) * ((k as f64 * 2.7) % 8.0 + 0.5) / 8.0,
                )
            })
            .collect(),
        Region::Triangle { v } => (0..8)
            .map(|k| {
                let t = (k as f64 + 0.5) / 8.0;
                Point::Plane(
                    v[0][0] * (1.0 - t) * 0.6 + v[1][0] * t * 0.6 + v[2][0] * 0.4,
                    v[0][1] * (1.0 - t) * 0.6 + v[1][1] * t * 0.6 + v[2][1] * 0.4,
                )
            })
            .collect(),
        _ => Vec::new(),
    };
    let viewport = match g.hull() {
        Region::Interval { lo, hi } => Viewport::new([*lo, 0.0], [*hi, 1.0], 1024, 64),
        _ => Viewport::new([0.0, 0.0], [1.0, 1.0], 512, 512),
    };
    Ok(PresetBundle {
        name: name.to_string(),
        system: g.system().clone(),
        phi: Some(g.phi().clone()),
        payload: PresetPayload::Gap(Box::new(g)),
        defaults,
        default_seeds: seeds,
        viewport,
    })
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    #[serde(default)]
    pub seeds: Vec<PointDescriptor>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub expected: ExpectedSpec,
    #[serde(default)]
    pub refute: Option<RefuteSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Preset { preset: String },
    Inline { inline: SystemDescriptor },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub orbit_csv: Option<String>,
    #[serde(default)]
    pub report_json: Option<String>,
    #[serde(default)]
    pub clouds_prefix: Option<String>,
    #[serde(default)]
    pub render: Option<RenderSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    pub path: String,
    pub format: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub viewport: Option<[[f64; 2]; 2]>,
    /// Orbit step to render; the target set when absent.
    #[serde(default)]
    pub step: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    #[serde(default)]
    pub pointwise: Option<String>,
    #[serde(default)]
    pub strict_refuted: Option<bool>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefuteSpec {
    #[serde(default)]
    pub x0: Option<PointDescriptor>,
    #[serde(default)]
    pub tail_start: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SeedVerdict {
    pub seed: String,
    pub verdict: String,
    pub first_hit: Option<usize>,
    pub final_distance: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefuteSummary {
    pub refuted: bool,
    pub window: [usize; 2],
    pub clamped: bool,
    pub x0_to_target: String,
    pub min_distance: String,
    pub floor: String,
    pub max_margin: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub system: String,
    pub epsilon: f64,
    pub tol: f64,
    pub n_max: usize,
    pub pointwise: Vec<SeedVerdict>,
    pub strict_refuted: Option<bool>,
    pub refute: Option<RefuteSummary>,
    pub artifacts: Vec<String>,
}

fn refute_summary(report: &RefuteReport, eps: f64) -> RefuteSummary {
    RefuteSummary {
        refuted: report.refuted,
        window: [report.window.0, report.window.1],
        clamped: report.clamped,
        x0_to_target: fmt_f64(report.x0_to_target),
        min_distance: fmt_f64(report.min_distance),
        floor: fmt_f64(report.x0_to_target - 3.0 * eps),
        max_margin: fmt_f64(
            report
                .rows
                .iter()
                .map(|r| r.margin)
                .fold(0.0_f64, f64::max),
        ),
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub exit_code: i32,
    pub report: ClassificationReport,
}

/// Run one experiment end to end: pointwise verdicts for every seed, the
/// strict-attraction refutation when requested, artifact files, and the
/// exit code from comparing verdicts with expectations.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    fs::create_dir_all(out_dir)?;
    let mut artifacts: Vec<String> = Vec::new();

    let (system, bundle, label) = match &config.system {
        SystemSpec::Preset { preset: name } => {
            let b = preset(name)?;
            (b.system.clone(), Some(b), name.clone())
        }
        SystemSpec::Inline { inline } => {
            let sys = inline.build()?;
            (sys, None, "inline".to_string())
        }
    };

    let defaults = bundle
        .as_ref()
        .map(|b| b.defaults)
        .unwrap_or(RunDefaults {
            epsilon: 1e-4,
            tol: 2e-2,
            n_max: 30,
        });
    let eps = config.epsilon.unwrap_or(defaults.epsilon);
    let tol = config.tol.unwrap_or(defaults.tol);
    let n_max = config.n_max.unwrap_or(defaults.n_max);
    if eps <= 0.0 || tol <= 0.0 || n_max == 0 {
        return Err(IfsError::Parse(
            "epsilon and tol must be positive and n_max at least 1".into(),
        ));
    }

    let space: Space = system.space().clone();
    let target = system.target().cloned();

    let seeds: Vec<Point> = if config.seeds.is_empty() {
        bundle
            .as_ref()
            .map(|b| b.default_seeds.clone())
            .unwrap_or_default()
    } else {
        config
            .seeds
            .iter()
            .map(|d| d.build(&space))
            .collect::<Result<Vec<_>>>()?
    };

    let mut pointwise = Vec::new();
    let mut verdicts = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        let target = target.as_ref().ok_or_else(|| {
            IfsError::Parse("pointwise runs need a target on the system".into())
        })?;
        let report = pointwise_test(&system, *seed, target, n_max, tol, eps)?;
        verdicts.push(report.verdict);
        pointwise.push(SeedVerdict {
            seed: seed.to_string(),
            verdict: report.verdict.to_string(),
            first_hit: report.first_hit,
            final_distance: fmt_f64(*report.distances.last().unwrap_or(&f64::NAN)),
        });

        if let Some(stem) = &config.outputs.orbit_csv {
            let path = indexed_path(out_dir, stem, i, seeds.len());
            let sys = IfsSystem::new(system.maps().to_vec())?.with_target(target.clone())?;
            let s0 = SetApprox::singleton(space.clone(), *seed, eps)?;
            let orbit = iterate_orbit(&sys, &s0, n_max, eps)?;
            let mut buf = Vec::new();
            write_orbit_csv(&mut buf, &orbit)?;
            fs::write(&path, buf)?;
            artifacts.push(path.display().to_string());
            if let Some(prefix) = &config.outputs.clouds_prefix {
                for (n, step) in orbit.steps.iter().enumerate() {
                    let cloud_path =
                        out_dir.join(format!("{prefix}-seed{i}-step{n}.csv"));
                    let mut buf = Vec::new();
                    write_point_cloud(&mut buf, step)?;
                    fs::write(&cloud_path, buf)?;
                    artifacts.push(cloud_path.display().to_string());
                }
            }
        }
    }

    let mut strict_refuted = None;
    let mut refute_sum = None;
    if config.refute.is_some() || config.expected.strict_refuted.is_some() {
        let bundle = bundle.as_ref().ok_or_else(|| {
            IfsError::Parse("refutation runs are preset-driven; use a preset system".into())
        })?;
        let target = target.as_ref().ok_or_else(|| {
            IfsError::Parse("refutation needs a target on the system".into())
        })?;
        let spec = config.refute.clone().unwrap_or_default();
        let x0 = spec.x0.map(|d| d.build(&space)).transpose()?;
        let witness = bundle.build_witness(eps, x0)?;
        let report = strict_refute(
            &system,
            target,
            &witness,
            spec.tail_start,
            spec.n_max.unwrap_or(10_000),
            eps,
        )?;
        strict_refuted = Some(report.refuted);
        refute_sum = Some(refute_summary(&report, eps));
    }

    if let Some(render) = &config.outputs.render {
        let set = match render.step {
            None => target.clone().ok_or_else(|| {
                IfsError::Parse("rendering the target needs a target".into())
            })?,
            Some(n) => {
                let target = target.clone().ok_or_else(|| {
                    IfsError::Parse("orbit rendering needs a target for distances".into())
                })?;
                let seed = seeds.first().copied().unwrap_or_else(|| {
                    target.points()[0]
                });
                let sys =
                    IfsSystem::new(system.maps().to_vec())?.with_target(target)?;
                let s0 = SetApprox::singleton(space.clone(), seed, eps)?;
                let orbit = iterate_orbit(&sys, &s0, n, eps)?;
                orbit.final_step().clone()
            }
        };
        let vp = match render.viewport {
            Some([min, max]) => Viewport::new(min, max, render.width, render.height),
            None => {
                let mut vp = bundle
                    .as_ref()
                    .map(|b| b.viewport)
                    .unwrap_or(Viewport::new([0.0, 0.0], [1.0, 1.0], 512, 512));
                vp.width = render.width;
                vp.height = render.height;
                vp
            }
        };
        let path = out_dir.join(&render.path);
        match render.format.as_str() {
            "pgm" => {
                let (bytes, drawn) = render_pgm(&set, &vp)?;
                if drawn == 0 {
                    eprintln!("warning: no points fell inside the render viewport");
                }
                fs::write(&path, bytes)?;
            }
            "svg" => {
                let (text, drawn) = render_svg(&set, &vp)?;
                if drawn == 0 {
                    eprintln!("warning: no points fell inside the render viewport");
                }
                fs::write(&path, text)?;
            }
            other => {
                return Err(IfsError::Parse(format!(
                    "unknown render format `{other}` (pgm or svg)"
                )))
            }
        }
        artifacts.push(path.display().to_string());
    }

    // Verdict comparison.
    let mut contrary = false;
    let mut inconclusive = false;
    if let Some(expected) = &config.expected.pointwise {
        let want = match expected.as_str() {
            "converged" => Verdict::Converged,
            "diverged" => Verdict::Diverged,
            other => {
                return Err(IfsError::Parse(format!(
                    "expected.pointwise must be converged or diverged, got `{other}`"
                )))
            }
        };
        for v in &verdicts {
            match v {
                v if *v == want => {}
                Verdict::Inconclusive => inconclusive = true,
                _ => contrary = true,
            }
        }
    }
    if let Some(want) = config.expected.strict_refuted {
        match strict_refuted {
            Some(got) if got == want => {}
            Some(_) => contrary = true,
            None => inconclusive = true,
        }
    }
    let exit_code = if contrary {
        EXIT_CONTRARY
    } else if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };

    let report = ClassificationReport {
        system: label,
        epsilon: eps,
        tol,
        n_max,
        pointwise,
        strict_refuted,
        refute: refute_sum,
        artifacts: artifacts.clone(),
    };

    let report_path = out_dir.join(
        config
            .outputs
            .report_json
            .clone()
            .unwrap_or_else(|| "report.json".to_string()),
    );
    fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;

    Ok(ExperimentOutcome { exit_code, report })
}

fn indexed_path(out_dir: &Path, stem: &str, index: usize, total: usize) -> PathBuf {
    if total <= 1 {
        return out_dir.join(stem);
    }
    let p = Path::new(stem);
    let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("csv");
    let base = p
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("orbit");
    out_dir.join(format!("{base}-seed{index}.{ext}"))
}

impl From<serde_json::Error> for IfsError {
    fn from(e: serde_json::Error) -> IfsError {
        IfsError::Parse(e.to_string())
    }
}

/// Parse an experiment config from a JSON file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| IfsError::Parse(format!("{}: {e}", path.display())))
}
