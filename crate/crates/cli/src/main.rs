//! `longsink`: generate example triangulations, classify shellability and
//! sinkability, search for shelling directions, build morphs, run direction
//! surveys, and export SVG snapshots.
//!
//! Exit codes: 0 on success, 1 when a search came up negative (no shelling
//! direction, not sinkable, morph construction failed, validation found a
//! violation), 2 on malformed input or numerical failure.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use longsink::generators::{
    equatorial_rotor, jessen_twist_angle, octahedron, random_coherent, schonhardt, shaddock_posed,
    ugly_flip_family, Pose, TwistParams,
};
use longsink::morph::{full_pipeline, one_bend_morph, sink_stage, validate_morph, PipelineOptions};
use longsink::shelling::{find_shelling_direction, is_shellable};
use longsink::sinking::{
    is_sinkable, retry_singular_with_rotation, FeasibilityReport, SinkOutcome, SinkResult,
};
use longsink::{Error, SphereTriangulation, Tolerance, Vec3};

use longsink_cli::export::{export_svg, render_svg, Projection, SvgOptions};
use longsink_cli::survey::{direction_survey, family_experiment};

#[derive(Parser)]
#[command(
    name = "longsink",
    version,
    about = "Shellability, sinkability, and morphs of spherical triangulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named example triangulation as JSON.
    Gen(GenArgs),
    /// Report shellability and sinkability at a pole.
    Classify(ClassifyArgs),
    /// Search for a direction from which the input is shellable.
    ShellDir(ShellDirArgs),
    /// Compute a sinking witness, optionally with animation keyframes.
    Sink(SinkArgs),
    /// Build a morph plan between two isomorphic triangulations.
    Morph(MorphArgs),
    /// Survey verdicts over random directions, or run the flip-family
    /// experiment.
    Survey(SurveyArgs),
    /// Render a triangulation, or every frame of a morph plan, to SVG.
    ExportSvg(ExportSvgArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Family {
    Octahedron,
    Schonhardt,
    Shaddock,
    Coherent,
    Flip,
    Rotor,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PoseArg {
    /// Symmetry axis along z.
    Standard,
    /// Quarter turn about the x-axis.
    X90,
}

impl From<PoseArg> for Pose {
    fn from(p: PoseArg) -> Pose {
        match p {
            PoseArg::Standard => Pose::Standard,
            PoseArg::X90 => Pose::RotatedX90,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProjectionArg {
    Stereographic,
    Gnomonic,
}

impl From<ProjectionArg> for Projection {
    fn from(p: ProjectionArg) -> Projection {
        match p {
            ProjectionArg::Stereographic => Projection::Stereographic,
            ProjectionArg::Gnomonic => Projection::Gnomonic,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Twist angle in radians. Defaults: schonhardt 0.3, shaddock the Jessen
    /// angle.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Pose for the twisted families.
    #[arg(long, value_enum, default_value_t = PoseArg::Standard)]
    pose: PoseArg,
    /// Vertex count for the coherent and flip families.
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half the belt face count for the rotor family.
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Belt thinness for the rotor family.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    input: PathBuf,
    #[arg(long, default_value = "0,0,1", value_parser = parse_pole)]
    pole: Vec3,
    /// Relative tolerance for sign decisions.
    #[arg(long)]
    tol: Option<f64>,
    /// On a singular verdict, retry at slightly rotated poles and report both
    /// outcomes. The original verdict is kept either way.
    #[arg(long)]
    retry_rotate: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShellDirArgs {
    input: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SinkArgs {
    input: PathBuf,
    #[arg(long, default_value = "0,0,1", value_parser = parse_pole)]
    pole: Vec3,
    #[arg(long)]
    tol: Option<f64>,
    /// Also emit this many animation keyframes of the sinking motion.
    #[arg(long, default_value_t = 0)]
    frames: usize,
    /// On a singular verdict, retry at slightly rotated poles and report both
    /// outcomes.
    #[arg(long)]
    retry_rotate: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MorphArgs {
    source: PathBuf,
    target: PathBuf,
    #[arg(long, default_value_t = PipelineOptions::default().seed)]
    seed: u64,
    /// Frames per stage.
    #[arg(long, default_value_t = 60)]
    frames: usize,
    #[arg(long)]
    tol: Option<f64>,
    /// Pose-search attempts before giving up.
    #[arg(long, default_value_t = 64)]
    rotation_budget: usize,
    /// Build the single-bend morph instead of the full pipeline.
    #[arg(long)]
    one_bend: bool,
    /// Pole for the single-bend morph.
    #[arg(long, default_value = "0,0,1", value_parser = parse_pole)]
    pole: Vec3,
    /// Validate the plan at this many samples per stage; a violation exits 1
    /// (the plan is still written).
    #[arg(long)]
    validate: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurveyArgs {
    /// Triangulation to survey; omit when running a family experiment.
    #[arg(required_unless_present = "family")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    directions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    /// Run the named family experiment instead of surveying one input;
    /// emits CSV.
    #[arg(long, value_enum, conflicts_with = "input", requires = "instances")]
    family: Option<ExperimentFamily>,
    /// Instances per family experiment.
    #[arg(long)]
    instances: Option<usize>,
    /// Vertex count per family instance.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExperimentFamily {
    Flip,
}

#[derive(Args)]
struct ExportSvgArgs {
    /// Triangulation JSON, or a morph plan JSON (detected by its "stages"
    /// key).
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ProjectionArg::Stereographic)]
    projection: ProjectionArg,
    /// Canvas edge length in pixels.
    #[arg(long, default_value_t = 800.0)]
    size: f64,
    /// Points sampled along each geodesic edge.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Output file for a triangulation; output directory for a morph plan
    /// (required in that case).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pole(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got {s:?}"));
    }
    let mut c = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        c[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("component {i}: {e}"))?;
    }
    let v = Vec3::new(c[0], c[1], c[2]);
    if v.norm() < 1e-12 {
        return Err("pole must be nonzero".into());
    }
    Ok(v)
}

fn tolerance(rel: Option<f64>) -> Tolerance {
    rel.map(Tolerance::new).unwrap_or_default()
}

fn load_triangulation(path: &Path) -> Result<SphereTriangulation, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), e)))?;
    SphereTriangulation::from_json_str(&text).map_err(|e| match e {
        Error::Json(j) => {
            Error::InvalidInput(format!("{}: malformed JSON: {}", path.display(), j))
        }
        other => other,
    })
}

fn write_output(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    let text = if content.ends_with('\n') {
        content.to_string()
    } else {
        format!("{content}\n")
    };
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pole_json(p: &Vec3) -> serde_json::Value {
    json!([p.x, p.y, p.z])
}

fn diagnostics_json(d: &FeasibilityReport) -> serde_json::Value {
    json!({
        "feasible": d.feasible,
        "min_nonpolar_vol": d.min_nonpolar_vol,
        "max_down_abs_vol": d.max_down_abs_vol,
        "max_z": d.max_z,
        "near_boundary": d.near_boundary,
    })
}

/// Adds verdict fields to a JSON report: `sinkable` is true, false, or null
/// (singular), with the witness, pivot ratio, residual, and diagnostics when
/// present.
fn describe_sink(report: &mut serde_json::Value, result: &SinkResult) {
    let obj = report.as_object_mut().expect("report is an object");
    match &result.outcome {
        SinkOutcome::Sinkable(heights) => {
            obj.insert("sinkable".into(), json!(true));
            obj.insert("verdict".into(), json!("sinkable"));
            obj.insert("witness_heights".into(), json!(heights));
        }
        SinkOutcome::Unsinkable => {
            obj.insert("sinkable".into(), json!(false));
            obj.insert("verdict".into(), json!("unsinkable"));
        }
        SinkOutcome::Singular { pivot_ratio } => {
            obj.insert("sinkable".into(), serde_json::Value::Null);
            obj.insert("verdict".into(), json!("singular"));
            obj.insert("pivot_ratio".into(), json!(pivot_ratio));
        }
    }
    if let Some(r) = result.residual {
        obj.insert("residual".into(), json!(r));
    }
    if let Some(d) = &result.diagnostics {
        obj.insert("diagnostics".into(), diagnostics_json(d));
    }
}

fn retry_json(
    t: &SphereTriangulation,
    pole: &Vec3,
    tol: Tolerance,
    seed: u64,
) -> anyhow::Result<serde_json::Value> {
    match retry_singular_with_rotation(t, pole, tol, seed)? {
        Some((new_pole, result)) => {
            let mut v = json!({ "decided": true, "pole": pole_json(&new_pole) });
            describe_sink(&mut v, &result);
            Ok(v)
        }
        None => Ok(json!({
            "decided": false,
            "note": "singularity persists under small pole rotations",
        })),
    }
}

fn run_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let t = match args.family {
        Family::Octahedron => octahedron(),
        Family::Schonhardt => schonhardt(&TwistParams {
            theta: args.theta.unwrap_or(0.3),
            pose: args.pose.into(),
        })?,
        Family::Shaddock => shaddock_posed(
            args.theta.unwrap_or_else(jessen_twist_angle),
            &args.pose.into(),
        )?,
        Family::Coherent => random_coherent(args.n, args.seed)?,
        Family::Flip => ugly_flip_family(args.n, args.seed)?,
        Family::Rotor => equatorial_rotor(args.m, args.eps)?.triangulation,
    };
    write_output(args.out.as_deref(), &t.to_json_string())?;
    Ok(ExitCode::SUCCESS)
}

fn run_classify(args: ClassifyArgs) -> anyhow::Result<ExitCode> {
    let t = load_triangulation(&args.input)?;
    let tol = tolerance(args.tol);
    let shellable = is_shellable(&t, &args.pole, tol)?;
    let sink = is_sinkable(&t, &args.pole, tol)?;
    let mut report = json!({
        "version": 1,
        "pole": pole_json(&args.pole),
        "shellable": shellable,
    });
    describe_sink(&mut report, &sink);
    if args.retry_rotate && matches!(sink.outcome, SinkOutcome::Singular { .. }) {
        report["retry"] = retry_json(&t, &args.pole, tol, args.seed)?;
    }
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn run_shell_dir(args: ShellDirArgs) -> anyhow::Result<ExitCode> {
    let t = load_triangulation(&args.input)?;
    let dir = find_shelling_direction(&t, tolerance(args.tol))?;
    let report = json!({ "version": 1, "direction": pole_json(&dir) });
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn run_sink(args: SinkArgs) -> anyhow::Result<ExitCode> {
    let t = load_triangulation(&args.input)?;
    let tol = tolerance(args.tol);
    let result = is_sinkable(&t, &args.pole, tol)?;
    let mut report = json!({ "version": 1, "pole": pole_json(&args.pole) });
    describe_sink(&mut report, &result);
    let sinkable = result.is_sinkable();
    if sinkable && args.frames > 0 {
        if let Some((stage, north)) = sink_stage(&t, &args.pole, tol, args.frames)? {
            let frames: Vec<Vec<[f64; 3]>> = stage
                .keyframes()?
                .into_iter()
                .map(|f| f.into_iter().map(|v| [v.x, v.y, v.z]).collect())
                .collect();
            report["north_face"] = json!(north);
            report["keyframes"] = json!(frames);
        }
    }
    if args.retry_rotate && matches!(result.outcome, SinkOutcome::Singular { .. }) {
        report["retry"] = retry_json(&t, &args.pole, tol, args.seed)?;
    }
    write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(if sinkable {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_morph(args: MorphArgs) -> anyhow::Result<ExitCode> {
    let t0 = load_triangulation(&args.source)?;
    let t1 = load_triangulation(&args.target)?;
    let opts = PipelineOptions {
        seed: args.seed,
        rotation_budget: args.rotation_budget,
        frames_per_stage: args.frames,
        tol: tolerance(args.tol),
    };
    let plan = if args.one_bend {
        one_bend_morph(&t0, &t1, &args.pole, &opts)?
    } else {
        full_pipeline(&t0, &t1, &opts)?
    };
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            plan.write_json(std::io::BufWriter::new(file))?;
        }
        None => {
            let mut buf = Vec::new();
            plan.write_json(&mut buf)?;
            buf.push(b'\n');
            std::io::stdout().write_all(&buf)?;
        }
    }
    if let Some(samples) = args.validate {
        if let Err(v) = validate_morph(&plan, samples) {
            eprintln!("validation violation: {v}");
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_survey(args: SurveyArgs) -> anyhow::Result<ExitCode> {
    let tol = tolerance(args.tol);
    match args.family {
        Some(ExperimentFamily::Flip) => {
            let instances = args.instances.expect("clap enforces --instances");
            let csv = family_experiment(instances, args.n, args.directions, args.seed, tol)?;
            write_output(args.out.as_deref(), &csv)?;
        }
        None => {
            let input = args.input.as_ref().expect("clap enforces the input");
            let t = load_triangulation(input)?;
            let report = direction_survey(&t, args.directions, args.seed, tol)?;
            write_output(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Morph plan mirror for frame export; unknown fields are ignored.
#[derive(Deserialize)]
struct PlanFile {
    stages: Vec<StageFile>,
}

#[derive(Deserialize)]
struct StageFile {
    faces: Vec<[usize; 3]>,
    frames: Vec<Vec<[f64; 3]>>,
}

fn edges_of(faces: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut set = std::collections::BTreeSet::new();
    for f in faces {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            set.insert((i.min(j), i.max(j)));
        }
    }
    set.into_iter().collect()
}

fn run_export_svg(args: ExportSvgArgs) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Error::InvalidInput(format!("{}: {}", args.input.display(), e)))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidInput(format!("{}: malformed JSON: {}", args.input.display(), e))
    })?;
    let opts = SvgOptions {
        projection: args.projection.into(),
        size: args.size,
        samples: args.samples,
    };
    if value.get("stages").is_some() {
        let plan: PlanFile = serde_json::from_value(value).map_err(|e| {
            Error::InvalidInput(format!("{}: bad morph plan: {}", args.input.display(), e))
        })?;
        let dir = args.out.clone().ok_or_else(|| {
            Error::InvalidInput("--out directory is required for morph plans".into())
        })?;
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut index = 0usize;
        let mut last: Option<&Vec<[f64; 3]>> = None;
        for stage in &plan.stages {
            let edges = edges_of(&stage.faces);
            for frame in &stage.frames {
                // Junction frames repeat the previous stage's last frame
                // bitwise; skip the duplicates.
                if last == Some(frame) {
                    continue;
                }
                let points: Vec<Vec3> =
                    frame.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
                let svg = render_svg(&points, &edges, &opts)?;
                let path = dir.join(format!("frame_{index:04}.svg"));
                fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
                index += 1;
                last = Some(frame);
            }
        }
        eprintln!("wrote {index} frames to {}", dir.display());
    } else {
        let t = SphereTriangulation::from_json_str(&text).map_err(|e| match e {
            Error::Json(j) => {
                Error::InvalidInput(format!("{}: malformed JSON: {}", args.input.display(), j))
            }
            other => other,
        })?;
        let svg = export_svg(&t, &opts)?;
        write_output(args.out.as_deref(), &svg)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// 1 for a negative search verdict, 2 for bad input or numerical failure.
fn exit_class(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::NoDirectionFound { .. }
            | Error::NotShellable
            | Error::MorphFailure(_)
            | Error::NoSinkableRotationFound { .. }
            | Error::NotIsomorphic
            | Error::SingularSystem { .. },
        ) => 1,
        _ => 2,
    }
}

fn run(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Gen(args) => run_gen(args),
        Command::Classify(args) => run_classify(args),
        Command::ShellDir(args) => run_shell_dir(args),
        Command::Sink(args) => run_sink(args),
        Command::Morph(args) => run_morph(args),
        Command::Survey(args) => run_survey(args),
        Command::ExportSvg(args) => run_export_svg(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_class(&e))
        }
    }
}
