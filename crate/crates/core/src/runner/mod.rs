//! Run orchestration: builds per-job indexes and model graphs once,
//! then drives sample x model work units across a worker pool.
//!
//! Jobs run sequentially in plan order; units inside a job are consumed
//! from a shared queue by `workers` threads. All shared state is
//! immutable during execution and every unit writes to distinct paths,
//! so worker count never changes the bytes on disk.

mod logger;

pub use logger::RunLogger;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::config::{ExtractionJob, ExtractionPlan, Modality, Source};
use crate::dataset::{
    clean_text, create_output_path, decode_png, decode_ppm, decode_wav, load_text_table,
    preprocess_audio, preprocess_visual, scan_media_folder, tokenize, write_feature, SampleKey,
    SamplePayload, TextTable, VisualParams,
};
use crate::error::{DataError, IoError, PipelineError};
use crate::model::{build_model, extract_features, InputContract, ModelGraph, ModelRegistry};

/// Per-job counters. On every finished job, `samples_ok +
/// samples_skipped == samples_total` and `files_written` equals the sum
/// of `|output_layers|` over ok units.
#[derive(Clone, Debug, PartialEq)]
pub struct JobReport {
    pub modality: Modality,
    pub source: Source,
    pub samples_total: usize,
    pub samples_ok: usize,
    pub samples_skipped: usize,
    pub files_written: usize,
}

/// Whole-run outcome.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub jobs: Vec<JobReport>,
    pub wall: Duration,
    pub log_path: PathBuf,
}

impl RunReport {
    pub fn samples_total(&self) -> usize {
        self.jobs.iter().map(|j| j.samples_total).sum()
    }

    pub fn samples_ok(&self) -> usize {
        self.jobs.iter().map(|j| j.samples_ok).sum()
    }

    pub fn samples_skipped(&self) -> usize {
        self.jobs.iter().map(|j| j.samples_skipped).sum()
    }

    pub fn files_written(&self) -> usize {
        self.jobs.iter().map(|j| j.files_written).sum()
    }
}

/// Where one sample's bytes come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleData {
    /// Media file to decode per unit.
    Media(PathBuf),
    /// Raw text from a table row.
    Text(String),
}

/// One indexed sample: output key plus data source.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSample {
    pub key: SampleKey,
    pub data: SampleData,
}

/// One (sample, model) pair, the granule of parallel execution.
#[derive(Clone, Copy, Debug)]
pub struct WorkUnit<'a, 'r> {
    pub job: &'a ExtractionJob,
    pub graph: &'a ModelGraph<'r>,
    pub sample: &'a RunSample,
}

/// Runs every job in the plan, in plan order.
pub fn execute_extractions(
    plan: &ExtractionPlan,
    registry: &ModelRegistry,
) -> Result<RunReport, PipelineError> {
    run_jobs(plan, registry, None)
}

/// Runs only the jobs of one modality, in plan order.
pub fn execute_modality(
    plan: &ExtractionPlan,
    registry: &ModelRegistry,
    modality: Modality,
) -> Result<RunReport, PipelineError> {
    run_jobs(plan, registry, Some(modality))
}

fn run_jobs(
    plan: &ExtractionPlan,
    registry: &ModelRegistry,
    filter: Option<Modality>,
) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let logger = RunLogger::create(&plan.log_dir_path())?;
    let selected: Vec<&ExtractionJob> = plan
        .jobs
        .iter()
        .filter(|job| filter.is_none_or(|m| job.modality == m))
        .collect();
    logger.info(&format!(
        "run started: {} job(s), {} worker(s)",
        selected.len(),
        plan.workers
    ));

    // Every path written across the whole run must be distinct.
    let mut seen_paths: HashSet<PathBuf> = HashSet::new();
    let mut reports = Vec::with_capacity(selected.len());
    for job in selected {
        match run_job(plan, job, registry, &logger, &mut seen_paths) {
            Ok(report) => {
                logger.info(&format!(
                    "job finished: {} {}: {} ok, {} skipped, {} file(s) written",
                    job.modality,
                    job.source.key(),
                    report.samples_ok,
                    report.samples_skipped,
                    report.files_written
                ));
                reports.push(report);
            }
            Err(err) => {
                logger.error(&format!("run aborted: {err}"));
                return Err(err);
            }
        }
    }

    let wall = started.elapsed();
    logger.info(&format!("run finished in {:.3}s", wall.as_secs_f64()));
    Ok(RunReport {
        jobs: reports,
        wall,
        log_path: logger.path().to_path_buf(),
    })
}

fn run_job(
    plan: &ExtractionPlan,
    job: &ExtractionJob,
    registry: &ModelRegistry,
    logger: &RunLogger,
    seen_paths: &mut HashSet<PathBuf>,
) -> Result<JobReport, PipelineError> {
    logger.info(&format!(
        "job started: {} {} from {}",
        job.modality,
        job.source.key(),
        job.input_folder
    ));

    // Graphs and the index are built once and shared read-only.
    let graphs = job
        .models
        .iter()
        .map(|spec| build_model(spec, job.modality, registry))
        .collect::<Result<Vec<_>, _>>()?;
    let samples = build_index(plan, job, logger)?;
    logger.info(&format!(
        "indexed {} sample(s), {} model(s)",
        samples.len(),
        graphs.len()
    ));

    // Model-major unit order: every sample of model 0, then model 1, ...
    let units: Vec<(usize, usize)> = (0..graphs.len())
        .flat_map(|g| (0..samples.len()).map(move |s| (g, s)))
        .collect();

    // Precompute all output paths; a collision aborts before any write.
    let output_root = job.output_path(&plan.dataset_path);
    for &(g, s) in &units {
        let graph = &graphs[g];
        for layer in &graph.output_layers {
            let path = create_output_path(
                &output_root,
                &graph.backend,
                &graph.name,
                layer,
                graph.output_layers.len(),
                &samples[s].key,
            );
            if !seen_paths.insert(path.clone()) {
                return Err(DataError::PathCollision { path }.into());
            }
        }
    }

    let pool = Pool {
        job,
        graphs: &graphs,
        samples: &samples,
        units: &units,
        output_root: &output_root,
        logger,
        skip_errors: plan.skip_errors,
        next: AtomicUsize::new(0),
        ok: AtomicUsize::new(0),
        skipped: AtomicUsize::new(0),
        files: AtomicUsize::new(0),
        failed: AtomicBool::new(false),
        first_error: Mutex::new(None),
    };
    if plan.workers == 1 {
        pool.drain();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..plan.workers {
                scope.spawn(|| pool.drain());
            }
        });
    }
    if let Some((_, err)) = pool.first_error.into_inner().expect("pool mutex poisoned") {
        return Err(err);
    }

    Ok(JobReport {
        modality: job.modality,
        source: job.source,
        samples_total: units.len(),
        samples_ok: pool.ok.into_inner(),
        samples_skipped: pool.skipped.into_inner(),
        files_written: pool.files.into_inner(),
    })
}

/// Shared execution state for one job's worker pool.
struct Pool<'a, 'r> {
    job: &'a ExtractionJob,
    graphs: &'a [ModelGraph<'r>],
    samples: &'a [RunSample],
    units: &'a [(usize, usize)],
    output_root: &'a Path,
    logger: &'a RunLogger,
    skip_errors: bool,
    next: AtomicUsize,
    ok: AtomicUsize,
    skipped: AtomicUsize,
    files: AtomicUsize,
    failed: AtomicBool,
    /// Smallest-index failure, kept so the surfaced error does not
    /// depend on scheduling.
    first_error: Mutex<Option<(usize, PipelineError)>>,
}

impl Pool<'_, '_> {
    fn drain(&self) {
        loop {
            if self.failed.load(Ordering::SeqCst) {
                return;
            }
            let idx = self.next.fetch_add(1, Ordering::SeqCst);
            if idx >= self.units.len() {
                return;
            }
            let (g, s) = self.units[idx];
            let unit = WorkUnit {
                job: self.job,
                graph: &self.graphs[g],
                sample: &self.samples[s],
            };
            match process_unit(&unit, self.output_root) {
                Ok(written) => {
                    self.ok.fetch_add(1, Ordering::SeqCst);
                    self.files.fetch_add(written.len(), Ordering::SeqCst);
                }
                Err(err) => {
                    self.logger.error(&format!(
                        "extraction failed: modality={} source={} model={} sample={}: {err}",
                        self.job.modality,
                        self.job.source.key(),
                        unit.graph.name,
                        unit.sample.key.file_stem()
                    ));
                    if self.skip_errors {
                        self.skipped.fetch_add(1, Ordering::SeqCst);
                    } else {
                        self.failed.store(true, Ordering::SeqCst);
                        let mut slot = self.first_error.lock().expect("pool mutex poisoned");
                        if slot.as_ref().is_none_or(|(i, _)| idx < *i) {
                            *slot = Some((idx, err));
                        }
                        return;
                    }
                }
            }
        }
    }
}

/// Decodes, preprocesses, extracts, and writes one unit. Returns the
/// written paths in output-layer order.
pub fn process_unit(
    unit: &WorkUnit<'_, '_>,
    output_root: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let payload = build_payload(unit.graph, unit.sample)?;
    let features = extract_features(unit.graph, &payload)?;
    let mut written = Vec::with_capacity(features.len());
    for (layer, tensor) in &features {
        let path = create_output_path(
            output_root,
            &unit.graph.backend,
            &unit.graph.name,
            layer,
            unit.graph.output_layers.len(),
            &unit.sample.key,
        );
        write_feature(tensor, &path)?;
        written.push(path);
    }
    Ok(written)
}

fn build_payload(
    graph: &ModelGraph<'_>,
    sample: &RunSample,
) -> Result<SamplePayload, PipelineError> {
    match (&graph.entry.input, &sample.data) {
        (InputContract::Visual { mean, std, .. }, SampleData::Media(path)) => {
            let bytes = std::fs::read(path).map_err(|e| IoError::new(path, e))?;
            let is_png = path
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("png"));
            let raw = if is_png {
                decode_png(&bytes)?
            } else {
                decode_ppm(&bytes)?
            };
            let params = VisualParams {
                target: graph.input_dims.expect("visual graphs carry dims"),
                mean: *mean,
                std: *std,
            };
            Ok(SamplePayload::Visual(preprocess_visual(&raw, &params)))
        }
        (InputContract::Audio { sample_rate }, SampleData::Media(path)) => {
            let bytes = std::fs::read(path).map_err(|e| IoError::new(path, e))?;
            let (wave, src_rate) = decode_wav(&bytes)?;
            Ok(SamplePayload::Audio(preprocess_audio(
                &wave,
                src_rate,
                *sample_rate,
            )?))
        }
        (InputContract::Textual { vocab }, SampleData::Text(text)) => {
            let tokens = if graph.clear_text {
                tokenize(&clean_text(text), vocab)
            } else {
                tokenize(text, vocab)
            };
            Ok(SamplePayload::Tokens(tokens))
        }
        // Modality agreement is enforced by build_model and build_index.
        _ => unreachable!("sample data kind mismatches the model's input contract"),
    }
}

fn build_index(
    plan: &ExtractionPlan,
    job: &ExtractionJob,
    logger: &RunLogger,
) -> Result<Vec<RunSample>, PipelineError> {
    let input = job.input_path(&plan.dataset_path);
    match job.modality {
        Modality::Visual | Modality::Audio => {
            let (entries, warnings) = scan_media_folder(&input, job.modality)?;
            for warning in &warnings {
                logger.warn(warning);
            }
            Ok(entries
                .into_iter()
                .map(|e| RunSample {
                    key: SampleKey::Item(e.id),
                    data: SampleData::Media(e.path),
                })
                .collect())
        }
        Modality::Textual => {
            let table = load_text_table(&input, job.source, job.columns.as_ref())?;
            Ok(match table {
                TextTable::Items(rows) => rows
                    .into_iter()
                    .map(|r| RunSample {
                        key: SampleKey::Item(r.item),
                        data: SampleData::Text(r.text),
                    })
                    .collect(),
                TextTable::Interactions(rows) => rows
                    .into_iter()
                    .map(|r| RunSample {
                        key: SampleKey::Interaction {
                            user: r.user,
                            item: r.item,
                        },
                        data: SampleData::Text(r.text),
                    })
                    .collect(),
            })
        }
    }
}
