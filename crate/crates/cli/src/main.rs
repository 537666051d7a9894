//! Command-line front end: orchestrates ingestion, preprocessing, metric
//! synthesis, behavioral analysis, statistics, photometry lookups and
//! synthetic-suite generation over a dataset root.
//!
//! Exit codes: 0 success, 1 data errors, 2 usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use om_core::behavior::FovModel;
use om_core::dataset::{ColumnSchema, DatasetRoot, IssueTable};
use om_core::model::{CourseId, LightLevel};
use om_core::photometry;
use om_core::pipeline::{self, PipelineOptions, STAT_VARIABLES};
use om_core::preprocess::ResampleSpec;
use om_core::report::{
    dunn_table, grouped_values_table, kw_summary_table, ssq_summary_table, KwSummaryRow,
    OutputFormat, Table, Value,
};
use om_core::simgen::{generate_suite, AgentParams, SuiteConfig};
use om_core::stats::{dunn_posthoc, kruskal_wallis, Adjustment, Factor};

#[derive(Parser)]
#[command(
    name = "om",
    about = "Data pipeline for a seated VR orientation-and-mobility test",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Shared {
    /// Dataset root (defaults to $OM_DATASET_ROOT).
    #[arg(long, env = "OM_DATASET_ROOT")]
    dataset_root: Option<PathBuf>,

    /// JSON column-schema file; omit for the canonical layout.
    #[arg(long)]
    schema: Option<PathBuf>,

    /// Output directory for report tables (default: <root>/reports).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output encoding: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,

    /// Skip the built-in data-issue catalog.
    #[arg(long)]
    no_issues: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Load every run and report parse statistics.
    Ingest(Shared),
    /// Apply corrections, resample, synchronize; write processed files.
    Preprocess(Shared),
    /// Synthesize the six per-run metrics.
    Metrics(Shared),
    /// Missed-object indicators and feature cross-tabulations.
    Behavior(Shared),
    /// Group statistics (Kruskal-Wallis + Dunn) over the run metrics.
    Stats(StatsArgs),
    /// Embedded lighting tables and grey-to-luminance interpolation.
    Photometry(PhotometryArgs),
    /// Generate a synthetic dataset tree with ground truth.
    Simulate(SimulateArgs),
    /// Full pipeline: processed files plus every report table.
    Report(Shared),
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    shared: Shared,

    /// Restrict to one factor: light_level, course or run_order.
    #[arg(long)]
    factor: Option<String>,

    /// Restrict to one variable, e.g. time_duration or n_missed_objects.
    #[arg(long)]
    var: Option<String>,

    /// Dunn p-value adjustment: none, bonferroni or holm.
    #[arg(long, default_value = "holm")]
    adjustment: String,

    /// Questionnaire responses file (subject_id;phase;i1..i16).
    #[arg(long)]
    ssq_file: Option<PathBuf>,
}

#[derive(Args)]
struct PhotometryArgs {
    /// Output directory for the table dump; omit to print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output encoding: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,

    /// Interpolate the luminance of one grey value and print it.
    #[arg(long)]
    grey: Option<u8>,

    /// Calibration anchor file (grey,luminance rows); omit for built-in.
    #[arg(long)]
    anchors: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Target directory for the generated tree.
    #[arg(long)]
    out: PathBuf,

    /// Number of runs.
    #[arg(long, default_value_t = 50)]
    runs: usize,

    /// Master seed; the same seed reproduces the tree byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Luminance detection threshold in cd/m².
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,

    /// Agent speed, m/s.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,

    /// Pose timestamp jitter standard deviation, seconds.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,

    /// Injected stop events per run.
    #[arg(long, default_value_t = 0)]
    stops: u32,

    /// Injected path-exit events per run.
    #[arg(long, default_value_t = 0)]
    exits: u32,

    /// Injected collision events per run.
    #[arg(long, default_value_t = 0)]
    collisions: u32,

    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // The global pool can only be configured once; later calls are a no-op.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Ingest(args) => pipeline_command(args, Stage::Ingest),
        Command::Preprocess(args) => pipeline_command(args, Stage::Preprocess),
        Command::Metrics(args) => pipeline_command(args, Stage::Metrics),
        Command::Behavior(args) => pipeline_command(args, Stage::Behavior),
        Command::Report(args) => pipeline_command(args, Stage::Report),
        Command::Stats(args) => stats_command(args),
        Command::Photometry(args) => photometry_command(args),
        Command::Simulate(args) => simulate_command(args),
    }
}

enum Stage {
    Ingest,
    Preprocess,
    Metrics,
    Behavior,
    Report,
}

fn resolve(
    shared: &Shared,
) -> anyhow::Result<(DatasetRoot, PathBuf, OutputFormat, PipelineOptions)> {
    let root_path = shared
        .dataset_root
        .clone()
        .context("no dataset root: pass --dataset-root or set OM_DATASET_ROOT")?;
    let root = DatasetRoot::new(&root_path);
    let out = shared
        .out
        .clone()
        .unwrap_or_else(|| root_path.join("reports"));
    let format = OutputFormat::parse(&shared.format)
        .with_context(|| format!("unknown format '{}'", shared.format))?;
    let schema = match &shared.schema {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading schema {}", path.display()))?;
            ColumnSchema::from_json(&text)?
        }
        None => ColumnSchema::default(),
    };
    init_jobs(shared.jobs);
    let opts = PipelineOptions {
        schema,
        issues: if shared.no_issues {
            IssueTable::empty()
        } else {
            IssueTable::builtin()
        },
        resample: ResampleSpec::default(),
        fov: FovModel::default(),
        adjustment: Adjustment::Holm,
        write_processed: false,
    };
    Ok((root, out, format, opts))
}

fn write_tables(tables: &[Table], out: &Path, format: OutputFormat) -> anyhow::Result<()> {
    for t in tables {
        let path = t.write(out, format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn pipeline_command(shared: Shared, stage: Stage) -> anyhow::Result<ExitCode> {
    let (root, out, format, mut opts) = resolve(&shared)?;
    if matches!(stage, Stage::Preprocess | Stage::Report) {
        opts.write_processed = true;
    }
    let output = pipeline::run_pipeline(&root, &opts)?;

    println!(
        "{} runs in summary, {} included, {} failed",
        output.outcomes.len(),
        output.n_included(),
        output.n_failed
    );

    let all = pipeline::report_tables(&output);
    let pick = |names: &[&str]| -> Vec<Table> {
        all.iter()
            .filter(|t| names.iter().any(|n| t.name.starts_with(n)))
            .cloned()
            .collect()
    };
    let tables = match stage {
        Stage::Ingest => pick(&["corrections"]),
        Stage::Preprocess => pick(&["corrections", "sync_reports"]),
        Stage::Metrics => pick(&["run_metrics"]),
        Stage::Behavior => pick(&["missed_objects", "crosstab_"]),
        Stage::Report => all.clone(),
    };
    write_tables(&tables, &out, format)?;

    if matches!(stage, Stage::Behavior | Stage::Report) {
        let path = om_core::dataset::write_missed_obj_info(&out, &output.missed_rows)?;
        println!("wrote {}", path.display());
    }

    // Machine-readable sidecar of warnings and failures.
    if matches!(stage, Stage::Report | Stage::Ingest) {
        let log = json_log(&output);
        std::fs::create_dir_all(&out)?;
        let path = out.join("pipeline_log.json");
        std::fs::write(&path, log)?;
        println!("wrote {}", path.display());
    }

    Ok(if output.n_failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn json_log(output: &pipeline::PipelineOutput) -> String {
    let failures: Vec<_> = output
        .outcomes
        .iter()
        .filter_map(|o| {
            o.error.as_ref().map(|e| {
                serde_json::json!({
                    "subject_id": o.ctx.subject_id,
                    "run_order": o.ctx.run_order.to_string(),
                    "error": e,
                })
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&serde_json::json!({
        "runs_total": output.outcomes.len(),
        "runs_included": output.n_included(),
        "runs_failed": output.n_failed,
        "warnings": output.warnings,
        "failures": failures,
    }))
    .expect("log serializes");
    text.push('\n');
    text
}

fn stats_command(args: StatsArgs) -> anyhow::Result<ExitCode> {
    let (root, out, format, mut opts) = resolve(&args.shared)?;
    let adjustment = match args.adjustment.to_ascii_lowercase().as_str() {
        "none" => Adjustment::None,
        "bonferroni" => Adjustment::Bonferroni,
        "holm" => Adjustment::Holm,
        other => bail!("unknown adjustment '{other}'"),
    };
    opts.adjustment = adjustment;
    let output = pipeline::run_pipeline(&root, &opts)?;

    let factors: Vec<Factor> = match args.factor.as_deref() {
        None => vec![Factor::LightLevel, Factor::Course, Factor::RunOrder],
        Some("light_level") => vec![Factor::LightLevel],
        Some("course") => vec![Factor::Course],
        Some("run_order") => vec![Factor::RunOrder],
        Some(other) => bail!("unknown factor '{other}'"),
    };
    let variables: Vec<String> = match &args.var {
        None => STAT_VARIABLES.iter().map(|s| s.to_string()).collect(),
        Some(v) => vec![v.clone()],
    };

    let mut tables = Vec::new();
    let mut kw_rows = Vec::new();
    for variable in &variables {
        for &factor in &factors {
            let g = pipeline::grouped_sample(&output.outcomes, factor, variable)?;
            let kw = kruskal_wallis(&g)?;
            println!(
                "{} x {}: statistic {:.3}, p {:.3e} (df {})",
                factor.as_str(),
                variable,
                kw.h_statistic,
                kw.p_value,
                kw.df
            );
            kw_rows.push(KwSummaryRow {
                variable: variable.clone(),
                factor,
                result: kw,
            });
            let dunn = dunn_posthoc(&g, adjustment)?;
            tables.push(dunn_table(
                format!("dunn_{}_{}", factor.as_str(), variable),
                &dunn,
            ));
            tables.push(grouped_values_table(
                format!("values_{}_{}", factor.as_str(), variable),
                &g,
            ));
        }
    }
    tables.insert(0, kw_summary_table(&kw_rows));

    if let Some(ssq_path) = &args.ssq_file {
        let rows = om_core::dataset::read::load_ssq_responses(ssq_path)?;
        tables.push(ssq_summary_table(&rows));
    }

    write_tables(&tables, &out, format)?;
    Ok(if output.n_failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn photometry_command(args: PhotometryArgs) -> anyhow::Result<ExitCode> {
    let format = OutputFormat::parse(&args.format)
        .with_context(|| format!("unknown format '{}'", args.format))?;
    let curve = match &args.anchors {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading anchors {}", path.display()))?;
            photometry::CalibrationCurve::from_text(&path.display().to_string(), &text)?
        }
        None => photometry::CalibrationCurve::builtin(),
    };

    if let Some(grey) = args.grey {
        let lum = curve.luminance_from_grey(grey)?;
        println!("{lum}");
        return Ok(ExitCode::SUCCESS);
    }

    let mut table = Table::new(
        "photometry",
        &[
            "element",
            "material_grey",
            "level",
            "ambient",
            "rendered_grey",
            "luminance_cd_m2",
        ],
    );
    for e in photometry::ElementKind::ALL {
        for level in LightLevel::all() {
            table.push(vec![
                e.as_str().into(),
                u32::from(photometry::material_grey(e)).into(),
                level.to_string().into(),
                photometry::ambient_intensity(level).into(),
                u32::from(photometry::rendered_grey(e, level)).into(),
                photometry::estimated_luminance(e, level).into(),
            ]);
        }
    }
    let mut anchors = Table::new("calibration_anchors", &["grey", "luminance_cd_m2"]);
    for &(g, l) in curve.anchors() {
        anchors.push(vec![u32::from(g).into(), Value::Float(l)]);
    }

    match &args.out {
        Some(dir) => write_tables(&[table, anchors], dir, format)?,
        None => {
            print!("{}", table.render(format));
            print!("{}", anchors.render(format));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_command(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    init_jobs(args.jobs);
    let config = SuiteConfig {
        n_runs: args.runs,
        courses: CourseId::evaluation_courses().to_vec(),
        levels: LightLevel::all().to_vec(),
        base_params: AgentParams {
            speed_mps: args.speed,
            detect_luminance_threshold: args.threshold,
            timestamp_jitter_sd: args.jitter,
            n_stops: args.stops,
            n_off_path: args.exits,
            n_collisions: args.collisions,
            ..AgentParams::default()
        },
        seed: args.seed,
    };
    let manifest = generate_suite(&args.out, &config)?;
    println!(
        "generated {} runs under {}",
        manifest.runs.len(),
        manifest.root.display()
    );
    Ok(ExitCode::SUCCESS)
}
