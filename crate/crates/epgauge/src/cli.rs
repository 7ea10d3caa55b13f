//! Subcommands `ingest`, `assess`, `compare`, `synth` and `fit`.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 domain error
//! (empty cohort, degenerate fit, unrealizable synthesis), 4 internal error.
//! `EPGAUGE_THREADS` caps the worker threads used for cohort assessment.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use epgauge_core::synth::{self, SynthSpec};
use epgauge_core::{
    fit_ep_with, CohortSelector, Corpus, EpFitOptions, PercentileBaseline, PercentileLevel, Stratum, ThresholdSchedule,
    ZeroPolicy,
};
use rayon::prelude::*;

use crate::assess::{assess_cohort, AssessOptions, CohortAssessment, LowNPolicy};
use crate::compare::{compare_dual, table5_preset_with};
use crate::config::{CohortConfig, RunConfig};
use crate::io::{self, Format, LoadOptions};
use crate::render::{self, canonical_json, plot_series, RenderFormat, Report};
use crate::tables;

pub const THREADS_ENV: &str = "EPGAUGE_THREADS";

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Domain(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Domain(m) | CliError::Internal(m) => m,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

fn internal<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "epgauge", version, about = "Research performance via the e_p index and lognormal citation models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a corpus, writing a rejects report.
    Ingest(IngestArgs),
    /// Assess named cohorts against per-stratum percentile baselines.
    Assess(AssessArgs),
    /// Compare two cohorts by e_p and lognormal tail probabilities.
    Compare(CompareArgs),
    /// Generate a synthetic corpus with a cohort of known e_p.
    Synth(SynthArgs),
    /// Fit e_p to a share table file (CSV or JSON).
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory. Without it, reports go to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated: csv, json, markdown.
    #[arg(long, value_delimiter = ',')]
    pub report_format: Vec<RenderFormat>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Corpus files; may be repeated.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// csv, tsv or jsonl; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<Format>,
    /// Inclusive publication-year window, `Y1-Y2`.
    #[arg(long, value_parser = parse_year_window)]
    pub year_window: Option<(i32, i32)>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated percentile levels.
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<PercentileLevel>,
    /// `YEAR:FIELD`; may be repeated. Defaults to every stratum in the corpus.
    #[arg(long)]
    pub stratum: Vec<Stratum>,
    /// `NAME=SELECTOR`; may be repeated.
    #[arg(long, value_parser = parse_named)]
    pub cohort: Vec<(String, String)>,
    /// `NAME=SELECTOR` giving the parent population of cohort NAME.
    #[arg(long, value_parser = parse_named)]
    pub parent: Vec<(String, String)>,
    /// High-segment over low-segment ratio that flags a deviation.
    #[arg(long)]
    pub deviation_threshold: Option<f64>,
    #[arg(long)]
    pub zero_policy: Option<ZeroPolicy>,
    /// Skip the lognormal fit.
    #[arg(long)]
    pub no_lognormal: bool,
    #[arg(long)]
    pub min_cohort: Option<u64>,
    /// error or flag.
    #[arg(long)]
    pub low_n: Option<LowNPolicy>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaPreset {
    Table5,
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComparePreset {
    Table5,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Built-in parameter set instead of assessment files.
    #[arg(long, conflicts_with_all = ["assessments", "a", "b"])]
    pub preset: Option<ComparePreset>,
    /// Assessment JSON written by `assess`; may be repeated.
    #[arg(long)]
    pub assessments: Vec<PathBuf>,
    /// Label of the reference cohort (ratio denominator).
    #[arg(long, requires = "b")]
    pub a: Option<String>,
    /// Label of the compared cohort (ratio numerator).
    #[arg(long, requires = "a")]
    pub b: Option<String>,
    /// Citation threshold schedule.
    #[arg(long, value_enum)]
    pub ca_preset: Option<CaPreset>,
    #[arg(long, default_value_t = 1000)]
    pub ca_base: u64,
    #[arg(long, default_value_t = 2011)]
    pub ca_base_year: i32,
    /// Year at which the citation window closes; required for `proportional`.
    #[arg(long)]
    pub ca_horizon: Option<i32>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// SynthSpec JSON; flags override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub n_global: Option<usize>,
    #[arg(long)]
    pub n_local: Option<usize>,
    #[arg(long)]
    pub target_ep: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub field: Option<String>,
    /// Corpus file format: csv, tsv or jsonl.
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Share table, `.csv` or `.json`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub deviation_threshold: Option<f64>,
}

fn parse_named(s: &str) -> Result<(String, String), String> {
    let (name, sel) = s.split_once('=').ok_or_else(|| format!("expected NAME=SELECTOR, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(format!("empty cohort name in `{s}`"));
    }
    Ok((name.to_string(), sel.trim().to_string()))
}

fn parse_year_window(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let a: i32 = a.trim().parse().map_err(|_| format!("bad year `{a}`"))?;
    let b: i32 = b.trim().parse().map_err(|_| format!("bad year `{b}`"))?;
    if a > b {
        return Err(format!("empty year window `{s}`"));
    }
    Ok((a, b))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(internal)
}

pub fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let pool = thread_pool()?;
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args, stdout, stderr),
        Command::Assess(args) => cmd_assess(args, &pool, stdout, stderr),
        Command::Compare(args) => cmd_compare(args, stdout, stderr),
        Command::Synth(args) => cmd_synth(args, stdout, stderr),
        Command::Fit(args) => cmd_fit(args, stdout, stderr),
    }
}

/// Loads the config file (if any) and applies the common flags.
fn base_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(input)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if !common.report_format.is_empty() {
        cfg.report_formats = Some(common.report_format.clone());
    }
    Ok(cfg)
}

fn apply_input(cfg: &mut RunConfig, args: &InputArgs) {
    if !args.input.is_empty() {
        cfg.input = args.input.clone();
    }
    if args.format.is_some() {
        cfg.format = args.format;
    }
    if args.year_window.is_some() {
        cfg.year_window = args.year_window;
    }
}

fn print_seed(stderr: &mut dyn Write, cfg: &RunConfig) {
    let _ = writeln!(stderr, "seed: {}", cfg.seed.unwrap_or(0));
}

struct Loaded {
    corpus: Corpus,
    rejections: Vec<(PathBuf, io::Rejection)>,
}

fn load_inputs(cfg: &RunConfig) -> Result<Loaded, CliError> {
    if cfg.input.is_empty() {
        return Err(CliError::Input("no input files (use --input or the config `input` key)".into()));
    }
    let opts = LoadOptions { year_window: cfg.year_window };
    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for path in &cfg.input {
        let format = cfg
            .format
            .or_else(|| Format::from_path(path))
            .ok_or_else(|| CliError::Input(format!("{}: cannot infer format, use --format", path.display())))?;
        let file = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let outcome = io::load_records(std::io::BufReader::new(file), format, &opts)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        rejections.extend(outcome.rejections.into_iter().map(|r| (path.clone(), r)));
        records.extend(outcome.corpus.into_records());
    }
    let corpus = Corpus::new(records).map_err(input)?;
    Ok(Loaded { corpus, rejections })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = create(path)?;
    f.write_all(bytes).and_then(|_| f.flush()).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn cmd_ingest(args: IngestArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    print_seed(stderr, &cfg);
    let loaded = load_inputs(&cfg)?;
    let rejected: Vec<io::Rejection> = loaded.rejections.iter().map(|(_, r)| r.clone()).collect();
    match &cfg.out {
        Some(dir) => {
            let mut rejects = Vec::new();
            io::write_rejections(&rejected, &mut rejects).map_err(internal)?;
            write_file(&dir.join("rejects.jsonl"), &rejects)?;
            let mut corpus = Vec::new();
            io::export(loaded.corpus.records(), Format::Csv, &mut corpus).map_err(internal)?;
            write_file(&dir.join("corpus.csv"), &corpus)?;
        }
        None => io::write_rejections(&rejected, &mut *stdout).map_err(internal)?,
    }
    let _ = writeln!(stderr, "loaded {} records, rejected {} rows", loaded.corpus.len(), rejected.len());
    for (stratum, n) in loaded.corpus.strata() {
        let _ = writeln!(stderr, "  {stratum}: {n}");
    }
    Ok(())
}

struct Job {
    label: String,
    selector: CohortSelector,
    parent: Option<CohortSelector>,
}

fn parse_selector(name: &str, text: &str) -> Result<CohortSelector, CliError> {
    let sel: CohortSelector = text.parse().map_err(|e| CliError::Input(format!("cohort `{name}`: {e}")))?;
    sel.validate().map_err(|e| CliError::Input(format!("cohort `{name}`: {e}")))?;
    Ok(sel)
}

fn assess_options(cfg: &RunConfig) -> AssessOptions {
    let mut opts = AssessOptions::default();
    if let Some(grid) = &cfg.grid {
        opts.grid = grid.clone();
    }
    if let Some(t) = cfg.deviation_threshold {
        opts.fit.deviation_ratio = t;
    }
    if cfg.lognormal == Some(false) {
        opts.lognormal = None;
    } else if let Some(policy) = cfg.zero_policy {
        opts.lognormal = Some(policy);
    }
    if let Some(n) = cfg.min_cohort {
        opts.min_cohort = n;
    }
    if let Some(p) = cfg.low_n_policy {
        opts.low_n = p;
    }
    opts
}

fn write_reports(
    cfg: &RunConfig,
    stem: &str,
    report: &Report,
    stdout: &mut dyn Write,
) -> Result<Vec<RenderFormat>, CliError> {
    let precision = cfg.precision.unwrap_or_default();
    let formats = match (&cfg.report_formats, &cfg.out) {
        (Some(f), _) => f.clone(),
        (None, Some(_)) => RenderFormat::ALL.to_vec(),
        (None, None) => vec![RenderFormat::Markdown],
    };
    for &format in &formats {
        let bytes = render::render(report, format, &precision).map_err(internal)?;
        match &cfg.out {
            Some(dir) => write_file(&dir.join(format!("{stem}.{}", format.extension())), &bytes)?,
            None => stdout.write_all(&bytes).map_err(internal)?,
        }
    }
    Ok(formats)
}

fn cmd_assess(
    args: AssessArgs,
    pool: &rayon::ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let mut cfg = base_config(&args.common)?;
    apply_input(&mut cfg, &args.input);
    if !args.grid.is_empty() {
        cfg.grid = Some(args.grid.clone());
    }
    if !args.stratum.is_empty() {
        cfg.strata = args.stratum.iter().map(ToString::to_string).collect();
    }
    if !args.cohort.is_empty() {
        cfg.cohorts = args
            .cohort
            .iter()
            .map(|(name, selector)| CohortConfig { name: name.clone(), selector: selector.clone(), parent: None })
            .collect();
    }
    for (name, parent) in &args.parent {
        let cohort = cfg
            .cohorts
            .iter_mut()
            .find(|c| &c.name == name)
            .ok_or_else(|| CliError::Input(format!("--parent names unknown cohort `{name}`")))?;
        cohort.parent = Some(parent.clone());
    }
    if args.deviation_threshold.is_some() {
        cfg.deviation_threshold = args.deviation_threshold;
    }
    if args.zero_policy.is_some() {
        cfg.zero_policy = args.zero_policy;
    }
    if args.no_lognormal {
        cfg.lognormal = Some(false);
    }
    if args.min_cohort.is_some() {
        cfg.min_cohort = args.min_cohort;
    }
    if args.low_n.is_some() {
        cfg.low_n_policy = args.low_n;
    }
    cfg.validate().map_err(input)?;
    print_seed(stderr, &cfg);

    if cfg.cohorts.is_empty() {
        return Err(CliError::Input("no cohorts (use --cohort NAME=SELECTOR or the config `cohorts` key)".into()));
    }
    let jobs = cfg
        .cohorts
        .iter()
        .map(|c| {
            Ok(Job {
                label: c.name.clone(),
                selector: parse_selector(&c.name, &c.selector)?,
                parent: c.parent.as_deref().map(|p| parse_selector(&c.name, p)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let strata_requested = cfg
        .strata
        .iter()
        .map(|s| s.parse::<Stratum>().map_err(|e| CliError::Input(format!("stratum `{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = assess_options(&cfg);

    let loaded = load_inputs(&cfg)?;
    if !loaded.rejections.is_empty() {
        let _ = writeln!(stderr, "rejected {} rows (run `ingest` for details)", loaded.rejections.len());
    }
    let corpus = &loaded.corpus;
    let strata: Vec<Stratum> =
        if strata_requested.is_empty() { corpus.strata().map(|(s, _)| s.clone()).collect() } else { strata_requested };
    if strata.is_empty() {
        return Err(CliError::Domain("corpus has no records".into()));
    }
    let assessments = pool.install(|| {
        let baselines = strata
            .par_iter()
            .map(|s| PercentileBaseline::build(corpus, s).map_err(domain))
            .collect::<Result<Vec<_>, _>>()?;
        let pairs: Vec<(&PercentileBaseline, &Job)> =
            baselines.iter().flat_map(|b| jobs.iter().map(move |j| (b, j))).collect();
        pairs
            .par_iter()
            .map(|(b, j)| assess_cohort(corpus, b, &j.label, &j.selector, j.parent.as_ref(), &opts))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<CohortAssessment>, _>>()
            .map_err(domain)
    })?;

    for a in assessments.iter().filter(|a| a.low_n) {
        let _ = writeln!(stderr, "warning: cohort `{}` in {} has only {} papers", a.label, a.stratum, a.n);
    }
    let precision = cfg.precision.unwrap_or_default();
    let report = Report::Assessments(assessments);
    write_reports(&cfg, "assessments", &report, stdout)?;
    if let (Some(dir), Report::Assessments(items)) = (&cfg.out, &report) {
        write_file(&dir.join("series.csv"), &plot_series(items, &precision).map_err(internal)?)?;
        for a in items {
            let name = format!("shares_{}_{}_{}.csv", sanitize(&a.label), a.stratum.year, sanitize(&a.stratum.field));
            let mut buf = Vec::new();
            tables::write_share_table_csv(&a.share_table, &mut buf).map_err(internal)?;
            write_file(&dir.join(name), &buf)?;
        }
    }
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn schedule_from(args: &CompareArgs, cfg: &RunConfig) -> Result<ThresholdSchedule, CliError> {
    match args.ca_preset {
        Some(CaPreset::Table5) => Ok(ThresholdSchedule::Table5),
        Some(CaPreset::Proportional) => {
            let horizon =
                args.ca_horizon.ok_or_else(|| CliError::Input("--ca-preset proportional needs --ca-horizon".into()))?;
            Ok(ThresholdSchedule::Proportional { base_citations: args.ca_base, base_year: args.ca_base_year, horizon })
        }
        None => Ok(cfg.ca_schedule.clone().unwrap_or_default()),
    }
}

fn cmd_compare(args: CompareArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    print_seed(stderr, &cfg);
    let schedule = schedule_from(&args, &cfg)?;
    let comparisons = if args.preset.is_some() {
        table5_preset_with(&schedule).map_err(domain)?
    } else {
        let (Some(a), Some(b)) = (&args.a, &args.b) else {
            return Err(CliError::Input("give --preset, or --assessments with --a and --b".into()));
        };
        if args.assessments.is_empty() {
            return Err(CliError::Input("--assessments is required with --a and --b".into()));
        }
        let mut all = Vec::new();
        for path in &args.assessments {
            let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let items = render::assessments_from_json(&bytes)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            all.extend(items);
        }
        let side = |label: &str| -> Vec<&CohortAssessment> { all.iter().filter(|c| c.label == label).collect() };
        let (side_a, side_b) = (side(a), side(b));
        if side_a.is_empty() || side_b.is_empty() {
            let missing = if side_a.is_empty() { a } else { b };
            return Err(CliError::Input(format!("no assessment labelled `{missing}`")));
        }
        let mut out = Vec::new();
        for ca in &side_a {
            for cb in side_b.iter().filter(|cb| cb.stratum == ca.stratum) {
                out.push(compare_dual(ca, cb, &schedule).map_err(domain)?);
            }
        }
        if out.is_empty() {
            return Err(CliError::Domain(format!("cohorts `{a}` and `{b}` share no stratum")));
        }
        out
    };
    write_reports(&cfg, "comparisons", &Report::Comparisons(comparisons), stdout)?;
    Ok(())
}

fn cmd_synth(args: SynthArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    let mut spec = match &args.spec {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SynthSpec>(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => cfg.synth.clone().unwrap_or_default(),
    };
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(v) = args.n_global {
        spec.n_global = v;
    }
    if let Some(v) = args.n_local {
        spec.n_local = v;
    }
    if let Some(v) = args.target_ep {
        spec.target_ep = v;
    }
    if let Some(v) = args.mu {
        spec.mu_g = v;
    }
    if let Some(v) = args.sigma {
        spec.sigma_g = v;
    }
    if let Some(v) = args.year {
        spec.year = v;
    }
    if let Some(v) = &args.field {
        spec.field_tag = v.clone();
    }
    spec.validate().map_err(input)?;
    let _ = writeln!(stderr, "seed: {}", spec.seed);

    let (corpus, _) = synth::generate(&spec).map_err(domain)?;
    let spec_json = canonical_json(&spec).map_err(internal)?;
    match &cfg.out {
        Some(dir) => {
            let path = dir.join(format!("corpus.{}", args.format));
            let mut f = create(&path)?;
            io::export(corpus.records(), args.format, &mut f).map_err(internal)?;
            write_file(&dir.join("synth_spec.json"), &spec_json)?;
        }
        None => io::export(corpus.records(), args.format, &mut *stdout).map_err(internal)?,
    }
    let _ = writeln!(
        stderr,
        "generated {} records; cohort of {} tagged `{}` (select with countries:{})",
        corpus.len(),
        spec.n_local,
        synth::LOCAL_TAG,
        synth::LOCAL_TAG
    );
    Ok(())
}

fn cmd_fit(args: FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let cfg = base_config(&args.common)?;
    print_seed(stderr, &cfg);
    let file = File::open(&args.table).map_err(|e| CliError::Input(format!("{}: {e}", args.table.display())))?;
    let is_json = args.table.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let table = if is_json { tables::read_share_table_json(file) } else { tables::read_share_table_csv(file) }
        .map_err(input)?;
    let mut opts = EpFitOptions::default();
    if let Some(t) = args.deviation_threshold.or(cfg.deviation_threshold) {
        opts.deviation_ratio = t;
    }
    let report = fit_ep_with(&table, &opts).map_err(domain)?;
    let bytes = canonical_json(&report).map_err(internal)?;
    match &cfg.out {
        Some(dir) => write_file(&dir.join("ep_fit.json"), &bytes),
        None => stdout.write_all(&bytes).map_err(internal),
    }
}
