//! Command-line front end: argument grammar, config wiring, summary
//! output, and the exit-code taxonomy.

use std::io::Write;
use std::path::PathBuf;

use featex::config::Source;
use featex::{
    apply_overrides, execute_extractions, execute_modality, load_registry, parse_yaml_config,
    validate_config, ConfigNode, ExtractionPlan, IoError, Modality, OverridePair, PipelineError,
    RunReport,
};

pub const USAGE: &str = "\
Usage: featex [extract] [OPTIONS] [KEY.PATH=VALUE ...]

Runs the extraction pipeline described by a YAML config, a set of
dot-path overrides, or both. Positional arguments are overrides applied
on top of the file in order, e.g. visual.items.output_folder=feats

Options:
  --config PATH     YAML configuration file
  --only MODALITY   restrict the run to visual, audio, or textual jobs
  --skip-errors     log per-sample failures and continue
  --workers N       worker threads, N >= 1 (overrides gpu_list)
  --registry PATH   model registry file (overrides model_registry)
  --log-dir PATH    run log directory
  -h, --help        show this help
";

/// Parsed command line. Flags beat positional overrides, which beat the
/// config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CliInvocation {
    pub config_path: Option<PathBuf>,
    pub overrides: Vec<OverridePair>,
    pub modality_filter: Option<Modality>,
    pub skip_errors: bool,
    pub workers: Option<usize>,
    pub registry: Option<PathBuf>,
    pub log_dir: Option<PathBuf>,
    pub show_help: bool,
}

/// Pure argument parse; `args` excludes the program name. An optional
/// leading "extract" subcommand is accepted and skipped.
pub fn parse_cli(args: &[String]) -> Result<CliInvocation, String> {
    let mut invocation = CliInvocation::default();
    let mut rest = args;
    if rest.first().map(String::as_str) == Some("extract") {
        rest = &rest[1..];
    }
    let mut i = 0;
    while i < rest.len() {
        let arg = rest[i].as_str();
        match arg {
            "-h" | "--help" => invocation.show_help = true,
            "--skip-errors" => invocation.skip_errors = true,
            "--config" | "--only" | "--workers" | "--registry" | "--log-dir" => {
                let value = rest
                    .get(i + 1)
                    .ok_or_else(|| format!("{arg} requires a value"))?;
                i += 1;
                match arg {
                    "--config" => invocation.config_path = Some(PathBuf::from(value)),
                    "--only" => {
                        invocation.modality_filter = Some(Modality::parse(value).ok_or(
                            format!("unknown modality '{value}' (visual, audio, or textual)"),
                        )?);
                    }
                    "--workers" => {
                        let n: usize = value.parse().map_err(|_| {
                            format!("--workers expects a positive integer, found '{value}'")
                        })?;
                        if n == 0 {
                            return Err("--workers must be at least 1".into());
                        }
                        invocation.workers = Some(n);
                    }
                    "--registry" => invocation.registry = Some(PathBuf::from(value)),
                    "--log-dir" => invocation.log_dir = Some(PathBuf::from(value)),
                    _ => unreachable!("matched above"),
                }
            }
            _ if arg.starts_with('-') && arg.len() > 1 => {
                return Err(format!("unknown flag '{arg}'"));
            }
            _ => {
                let pair = OverridePair::parse(arg).map_err(|e| e.to_string())?;
                invocation.overrides.push(pair);
            }
        }
        i += 1;
    }
    if !invocation.show_help && invocation.config_path.is_none() && invocation.overrides.is_empty()
    {
        return Err("nothing to do: provide --config and/or KEY=VALUE overrides".into());
    }
    Ok(invocation)
}

/// Builds the effective plan: config file, then positional overrides,
/// then flags. Validation warnings go to standard error.
pub fn build_plan(invocation: &CliInvocation) -> Result<ExtractionPlan, PipelineError> {
    let root = match &invocation.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| IoError::new(path, e))?;
            parse_yaml_config(&text)?
        }
        None => ConfigNode::empty_map(),
    };
    let root = apply_overrides(&root, &invocation.overrides)?;
    let validation = validate_config(&root)?;
    for warning in &validation.warnings {
        let _ = writeln!(std::io::stderr().lock(), "warning: {warning}");
    }
    let mut plan = validation.plan;
    if let Some(n) = invocation.workers {
        plan.workers = n;
    }
    if invocation.skip_errors {
        plan.skip_errors = true;
    }
    if let Some(path) = &invocation.registry {
        plan.registry_path = path.clone();
    }
    if let Some(dir) = &invocation.log_dir {
        plan.log_dir = dir.clone();
    }
    Ok(plan)
}

fn execute(invocation: &CliInvocation) -> Result<(), PipelineError> {
    let plan = build_plan(invocation)?;
    let registry = load_registry(&plan.registry_file())?;
    let report = match invocation.modality_filter {
        Some(modality) => execute_modality(&plan, &registry, modality),
        None => execute_extractions(&plan, &registry),
    }?;
    // A closed stdout (downstream pipe gone) is not an extraction
    // failure; the features and the run log are already on disk.
    match write_summary(&mut std::io::stdout().lock(), &report) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(IoError::new("<stdout>", e).into()),
        Ok(()) => Ok(()),
    }
}

fn write_summary(out: &mut impl Write, report: &RunReport) -> std::io::Result<()> {
    for job in &report.jobs {
        writeln!(
            out,
            "{}/{}: {} ok, {} skipped, {} file(s) written",
            job.modality,
            source_key(job.source),
            job.samples_ok,
            job.samples_skipped,
            job.files_written
        )?;
    }
    writeln!(
        out,
        "total: {} sample(s), {} file(s) written in {:.3}s",
        report.samples_total(),
        report.files_written(),
        report.wall.as_secs_f64()
    )?;
    writeln!(out, "log: {}", report.log_path.display())
}

fn source_key(source: Source) -> &'static str {
    source.key()
}

/// Exit taxonomy: 0 success, 1 config/usage, 2 data (malformed media
/// and tables included), 3 model, 4 I/O.
pub fn exit_code(err: &PipelineError) -> i32 {
    match err {
        PipelineError::Config(_) => 1,
        PipelineError::Data(_) | PipelineError::Format(_) => 2,
        PipelineError::Model(_) => 3,
        PipelineError::Io(_) => 4,
    }
}

/// Full CLI entry: parse, run, map errors to exit codes. Diagnostics go
/// out best-effort; a closed stream must not turn into a panic.
pub fn run(args: &[String]) -> i32 {
    let invocation = match parse_cli(args) {
        Ok(invocation) => invocation,
        Err(message) => {
            let mut err = std::io::stderr().lock();
            let _ = writeln!(err, "error: {message}");
            let _ = write!(err, "{USAGE}");
            return 1;
        }
    };
    if invocation.show_help {
        let _ = write!(std::io::stdout().lock(), "{USAGE}");
        return 0;
    }
    match execute(&invocation) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(std::io::stderr().lock(), "error: {err}");
            exit_code(&err)
        }
    }
}
