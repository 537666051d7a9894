//! End-to-end orchestration over one dataset root: load every run from the
//! summary, preprocess, synthesize metrics, build the behavioral and
//! statistical tables, and assemble the report bundle. Per-run failures are
//! collected, never fatal; the caller decides the exit status from the
//! failure count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{cross_tab, missed_object_table, CrossTabView, FovModel, RunBehaviorInput};
use crate::dataset::{
    self, load_course_meta, load_results_summary, load_run, ColumnSchema, DatasetRoot, IssueTable,
    ParseReport,
};
use crate::error::{Error, Result};
use crate::metrics::{synthesize_run_metrics, RunMetrics, OBJECTS_PER_COURSE};
use crate::model::{CourseGeometry, Event, PoseSample, RunContext};
use crate::preprocess::{preprocess_run, CorrectionLog, ResampleSpec, SyncReport};
use crate::report::{dunn_table, kw_summary_table, KwSummaryRow, Table, Value};
use crate::stats::{dunn_posthoc, kruskal_wallis, Adjustment, DunnMatrix, Factor, GroupedSample};

/// Pipeline configuration assembled by the caller (typically the CLI).
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub schema: ColumnSchema,
    pub issues: IssueTable,
    pub resample: ResampleSpec,
    pub fov: FovModel,
    pub adjustment: Adjustment,
    /// Persist corrected/interpolated files under `test_data_processed`.
    pub write_processed: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            schema: ColumnSchema::default(),
            issues: IssueTable::builtin(),
            resample: ResampleSpec::default(),
            fov: FovModel::default(),
            adjustment: Adjustment::Holm,
            write_processed: false,
        }
    }
}

/// Everything the pipeline knows about one run after processing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutcome {
    pub ctx: RunContext,
    /// Exclusion verdict ("subject_tolerance", "technical") or the per-run
    /// error message that forced exclusion.
    pub excluded_reason: Option<String>,
    pub eye_data_unusable: bool,
    pub metrics: Option<RunMetrics>,
    pub sync: Option<SyncReport>,
    pub correction: CorrectionLog,
    pub parse: ParseReport,
    /// Hard failure (unreadable or unparseable run).
    pub error: Option<String>,
}

impl RunOutcome {
    /// Whether this run participates in the analyses. Training runs flow
    /// through ingest and metric synthesis but are never analyzed.
    pub fn included(&self) -> bool {
        self.error.is_none()
            && self.excluded_reason.is_none()
            && self.metrics.is_some()
            && self.ctx.run_order.is_evaluation()
    }
}

/// Per-run payload kept for the behavior stage.
struct BehaviorPayload {
    events: Vec<Event>,
    head: Vec<PoseSample>,
}

/// Result bundle of a full pipeline pass.
pub struct PipelineOutput {
    pub outcomes: Vec<RunOutcome>,
    pub missed_rows: Vec<crate::behavior::MissedObjectRow>,
    pub kw_rows: Vec<KwSummaryRow>,
    pub dunn_matrices: Vec<(String, DunnMatrix)>,
    pub warnings: Vec<String>,
    /// Runs that failed hard (load or parse).
    pub n_failed: usize,
}

impl PipelineOutput {
    pub fn n_included(&self) -> usize {
        self.outcomes.iter().filter(|o| o.included()).count()
    }
}

/// The three variables the group statistics run over.
pub const STAT_VARIABLES: [&str; 3] = [
    "time_duration",
    "n_missed_objects",
    "time_before_first_step",
];

fn variable_value(m: &RunMetrics, variable: &str) -> Option<f64> {
    match variable {
        "time_duration" => Some(m.time_duration_s),
        "n_missed_objects" => Some(f64::from(m.n_missed_objects)),
        "time_before_first_step" => Some(m.time_before_first_step_s),
        "n_off_path" => Some(f64::from(m.n_off_path)),
        "n_collisions" => Some(f64::from(m.n_collisions)),
        "n_stops" => Some(f64::from(m.n_stops)),
        _ => None,
    }
}

/// Builds one factor's grouped sample over the included runs, groups in
/// canonical order (L1..L6, A..F, 1..12).
pub fn grouped_sample(
    outcomes: &[RunOutcome],
    factor: Factor,
    variable: &str,
) -> Result<GroupedSample> {
    let mut groups: Vec<(String, Vec<f64>)> = match factor {
        Factor::LightLevel => crate::model::LightLevel::all()
            .iter()
            .map(|l| (l.to_string(), Vec::new()))
            .collect(),
        Factor::Course => crate::model::CourseId::evaluation_courses()
            .iter()
            .map(|c| (c.to_string(), Vec::new()))
            .collect(),
        Factor::RunOrder => (1..=12).map(|n| (n.to_string(), Vec::new())).collect(),
    };
    for outcome in outcomes.iter().filter(|o| o.included()) {
        let Some(m) = &outcome.metrics else { continue };
        let Some(v) = variable_value(m, variable) else {
            return Err(Error::Stats(format!("unknown variable '{variable}'")));
        };
        let label = match factor {
            Factor::LightLevel => outcome.ctx.light_level.to_string(),
            Factor::Course => outcome.ctx.course_id.to_string(),
            Factor::RunOrder => outcome.ctx.run_order.to_string(),
        };
        if let Some((_, bucket)) = groups.iter_mut().find(|(l, _)| *l == label) {
            bucket.push(v);
        }
    }
    groups.retain(|(_, v)| !v.is_empty());
    GroupedSample::new(factor, groups)
}

fn process_one(
    root: &DatasetRoot,
    ctx: &RunContext,
    opts: &PipelineOptions,
) -> (RunOutcome, Option<BehaviorPayload>) {
    let mut outcome = RunOutcome {
        ctx: ctx.clone(),
        excluded_reason: None,
        eye_data_unusable: false,
        metrics: None,
        sync: None,
        correction: CorrectionLog::default(),
        parse: ParseReport::default(),
        error: None,
    };

    // Exclusion verdicts apply even when the files are missing entirely.
    if let Some(reason) = opts.issues.exclusion(ctx.subject_id, ctx.run_order) {
        outcome.excluded_reason = Some(reason.as_str().to_string());
    }
    outcome.eye_data_unusable = opts.issues.eye_invalid(ctx.subject_id, ctx.run_order);

    let record = match load_run(&root.raw_dir(), ctx.subject_id, ctx.run_order, &opts.schema) {
        Ok(r) => r,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return (outcome, None);
        }
    };
    outcome.parse = record.report.clone();

    let processed = match preprocess_run(&record, opts.resample, &opts.issues) {
        Ok(p) => p,
        Err(e) => {
            outcome.error = Some(e.to_string());
            return (outcome, None);
        }
    };
    outcome.correction = processed.correction.clone();
    outcome.sync = Some(processed.sync.clone());

    if opts.write_processed {
        if let Err(e) = dataset::write_processed(processed.as_streams(), &root.processed_dir()) {
            outcome.error = Some(e.to_string());
            return (outcome, None);
        }
    }

    match synthesize_run_metrics(&processed.events, OBJECTS_PER_COURSE) {
        Ok(m) => outcome.metrics = Some(m),
        Err(e) => {
            // Metric anchors missing after corrections: excluded, reason kept.
            if outcome.excluded_reason.is_none() {
                outcome.excluded_reason = Some(format!("metrics: {e}"));
            }
        }
    }

    let payload = BehaviorPayload {
        events: processed.events,
        head: processed.head,
    };
    (outcome, Some(payload))
}

/// Runs the full pipeline over every run named in the dataset summary.
pub fn run_pipeline(root: &DatasetRoot, opts: &PipelineOptions) -> Result<PipelineOutput> {
    opts.schema.validate()?;
    let mut contexts = load_results_summary(&root.meta_dir())?;
    contexts.sort_by_key(|c| (c.subject_id, c.run_order));

    let mut results: Vec<(RunOutcome, Option<BehaviorPayload>)> = contexts
        .par_iter()
        .map(|ctx| process_one(root, ctx, opts))
        .collect();
    results.sort_by_key(|(o, _)| (o.ctx.subject_id, o.ctx.run_order));

    let mut warnings: Vec<String> = Vec::new();
    for entry in opts.issues.unmatched(&contexts) {
        warnings.push(format!(
            "issue {} for run {}-{} matches no run in the summary",
            entry.kind.as_str(),
            entry.subject_id,
            entry.run_order
        ));
    }

    // Course metadata for every course used by an analyzable run. Only
    // evaluation runs are analyzed; training courses carry no metadata.
    let analyzable = |o: &RunOutcome| {
        o.included() && o.ctx.run_order.is_evaluation() && o.ctx.course_id.is_evaluation()
    };
    let mut course_meta: BTreeMap<char, CourseGeometry> = BTreeMap::new();
    for (outcome, payload) in &results {
        if payload.is_some() && analyzable(outcome) {
            let letter = outcome.ctx.course_id.letter();
            if let std::collections::btree_map::Entry::Vacant(slot) = course_meta.entry(letter) {
                slot.insert(load_course_meta(&root.meta_dir(), outcome.ctx.course_id)?);
            }
        }
    }

    let behavior_inputs: Vec<RunBehaviorInput<'_>> = results
        .iter()
        .filter(|(o, p)| analyzable(o) && p.is_some())
        .map(|(o, p)| {
            let payload = p.as_ref().unwrap();
            RunBehaviorInput {
                ctx: &o.ctx,
                events: &payload.events,
                head_stream: &payload.head,
            }
        })
        .collect();
    let missed_rows = missed_object_table(&behavior_inputs, &course_meta, &opts.fov)?;
    drop(behavior_inputs);

    let outcomes: Vec<RunOutcome> = results.iter().map(|(o, _)| o.clone()).collect();

    let mut kw_rows = Vec::new();
    let mut dunn_matrices = Vec::new();
    for variable in STAT_VARIABLES {
        for factor in [Factor::LightLevel, Factor::Course, Factor::RunOrder] {
            match grouped_sample(&outcomes, factor, variable) {
                Ok(g) => {
                    kw_rows.push(KwSummaryRow {
                        variable: variable.to_string(),
                        factor,
                        result: kruskal_wallis(&g)?,
                    });
                    dunn_matrices.push((
                        format!("dunn_{}_{}", factor.as_str(), variable),
                        dunn_posthoc(&g, opts.adjustment)?,
                    ));
                }
                Err(e) => warnings.push(format!(
                    "statistics skipped for {} x {variable}: {e}",
                    factor.as_str()
                )),
            }
        }
    }

    let n_failed = results.iter().filter(|(o, _)| o.error.is_some()).count();
    Ok(PipelineOutput {
        outcomes,
        missed_rows,
        kw_rows,
        dunn_matrices,
        warnings,
        n_failed,
    })
}

// ---------------------------------------------------------------------------
// Report bundle assembly
// ---------------------------------------------------------------------------

/// Per-run metrics table, excluded runs present with their reason.
pub fn metrics_table(outcomes: &[RunOutcome]) -> Table {
    let mut table = Table::new(
        "run_metrics",
        &[
            "subject_id",
            "run_order",
            "course",
            "light_level",
            "time_duration_s",
            "time_before_first_step_s",
            "n_off_path",
            "n_missed_objects",
            "n_collisions",
            "n_stops",
            "excluded_reason",
            "eye_data_unusable",
            "error",
        ],
    );
    for o in outcomes {
        let m = o.metrics;
        let num = |v: Option<f64>| v.map(Value::Float).unwrap_or_else(|| "".into());
        let cnt = |v: Option<u32>| v.map(Value::from).unwrap_or_else(|| "".into());
        table.push(vec![
            o.ctx.subject_id.into(),
            o.ctx.run_order.to_string().into(),
            o.ctx.course_id.to_string().into(),
            o.ctx.light_level.to_string().into(),
            num(m.map(|m| m.time_duration_s)),
            num(m.map(|m| m.time_before_first_step_s)),
            cnt(m.map(|m| m.n_off_path)),
            cnt(m.map(|m| m.n_missed_objects)),
            cnt(m.map(|m| m.n_collisions)),
            cnt(m.map(|m| m.n_stops)),
            o.excluded_reason.clone().unwrap_or_default().into(),
            Value::Int(i64::from(o.eye_data_unusable)),
            o.error.clone().unwrap_or_default().into(),
        ]);
    }
    table
}

/// Missed-object table in report form.
pub fn missed_table(rows: &[crate::behavior::MissedObjectRow]) -> Table {
    let mut table = Table::new(
        "missed_objects",
        &[
            "subject_id",
            "run_order",
            "course",
            "light_level",
            "object_label",
            "grey",
            "vertical",
            "horizontal",
            "n_gazes",
            "gaze_duration_s",
            "in_fov_duration_s",
        ],
    );
    for r in rows {
        table.push(vec![
            r.subject_id.into(),
            r.run_order.as_str().into(),
            r.course.to_string().into(),
            r.light_level.to_string().into(),
            r.object_label.as_str().into(),
            u32::from(r.grey).into(),
            r.vertical.as_str().into(),
            r.horizontal.as_str().into(),
            r.n_gazes.into(),
            r.gaze_duration_s.into(),
            r.in_fov_duration_s.into(),
        ]);
    }
    table
}

/// Per-run synchronization report table.
pub fn sync_table(outcomes: &[RunOutcome]) -> Table {
    let mut table = Table::new(
        "sync_reports",
        &[
            "subject_id",
            "run_order",
            "defined",
            "n_pairs",
            "r_x",
            "p_x",
            "pass_x",
            "r_z",
            "p_z",
            "pass_z",
        ],
    );
    for o in outcomes {
        let Some(sync) = &o.sync else { continue };
        let axis = |a: Option<crate::preprocess::AxisSync>| -> (Value, Value, Value) {
            match a {
                Some(a) => (a.r.into(), a.p.into(), Value::Int(i64::from(a.pass))),
                None => ("".into(), "".into(), Value::Int(0)),
            }
        };
        let (rx, px, passx) = axis(sync.x);
        let (rz, pz, passz) = axis(sync.z);
        table.push(vec![
            o.ctx.subject_id.into(),
            o.ctx.run_order.to_string().into(),
            Value::Int(i64::from(sync.defined)),
            Value::Int(sync.n_pairs as i64),
            rx,
            px,
            passx,
            rz,
            pz,
            passz,
        ]);
    }
    table
}

/// Correction/parse log table, one row per touched run.
pub fn corrections_table(outcomes: &[RunOutcome], warnings: &[String]) -> Table {
    let mut table = Table::new("corrections", &["scope", "detail"]);
    for o in outcomes {
        let id = format!("{}-{}", o.ctx.subject_id, o.ctx.run_order);
        if let Some(t) = o.correction.appended_system_end {
            table.push(vec![
                id.as_str().into(),
                format!("appended system end at {t}").into(),
            ]);
        }
        if o.correction.removed_destroys_after_end > 0 {
            table.push(vec![
                id.as_str().into(),
                format!(
                    "removed {} destroy record(s) after system end",
                    o.correction.removed_destroys_after_end
                )
                .into(),
            ]);
        }
        for note in &o.correction.notes {
            table.push(vec![id.as_str().into(), note.as_str().into()]);
        }
        for w in &o.parse.warnings {
            table.push(vec![id.as_str().into(), w.as_str().into()]);
        }
        if o.parse.unknown_actions > 0 {
            table.push(vec![
                id.as_str().into(),
                format!(
                    "{} unknown action token(s) preserved",
                    o.parse.unknown_actions
                )
                .into(),
            ]);
        }
        if let Some(e) = &o.error {
            table.push(vec![id.as_str().into(), format!("failed: {e}").into()]);
        }
    }
    for w in warnings {
        table.push(vec!["dataset".into(), w.as_str().into()]);
    }
    table
}

/// All report tables of one pipeline pass, in deterministic order.
pub fn report_tables(output: &PipelineOutput) -> Vec<Table> {
    let mut tables = vec![
        metrics_table(&output.outcomes),
        missed_table(&output.missed_rows),
        kw_summary_table(&output.kw_rows),
        sync_table(&output.outcomes),
        corrections_table(&output.outcomes, &output.warnings),
    ];
    for view in CrossTabView::ALL {
        let counts = cross_tab(&output.missed_rows, view);
        let mut t = Table::new(
            format!("crosstab_{}", view.as_str()),
            &["row", "column", "count"],
        );
        for ((r, c), n) in counts {
            t.push(vec![r.into(), c.into(), n.into()]);
        }
        tables.push(t);
    }
    for (name, matrix) in &output.dunn_matrices {
        tables.push(dunn_table(name.clone(), matrix));
    }
    tables
}
