use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use base64::Engine;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mlaudit::audit::{
    self, load_dataset, read_samples, run_scorer, run_suite, write_findings, write_report, write_scores, AuditError,
    ConceptCatalog, Field, LoadOptions, ScoreDataset, ScorerAdapter, ScorerOptions, Suite,
};
use mlaudit::detect::{detect, KeywordSet, MatchMode, ProbabilityScan, DEFAULT_KEYWORDS};
use mlaudit::pipeline::{
    build_call_graph, completeness_check, slice_pipeline, CallEdge, CompletenessReport, JumpRecord, NodeId,
    PipelineSlice, Role, RoleMap, UnresolvedJump,
};
use mlaudit::synth::{generate_scores, generate_trace, DisparityPlan, SyntheticAppPlan};
use mlaudit::trace::{
    decode_args, decode_return, parse_shorty, parse_trace, ParseOptions, TraceCounters, TraceError, TraceLog,
    TraceReader,
};

#[derive(Parser)]
#[command(name = "mlaudit", version, about = "Find, reconstruct and audit on-device ML pipelines from runtime traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode shorty-typed argument and return bytes.
    Decode(DecodeArgs),
    /// Stream a trace log and report record counters.
    Ingest(IngestArgs),
    /// Scan a trace for ML evidence and rank candidate functions.
    Detect(DetectArgs),
    /// Build the hybrid call graph and slice the pipeline around an anchor.
    Reconstruct(ReconstructArgs),
    /// Run a hypothesis suite over a score dataset and write reports.
    Assess(AssessArgs),
    /// Screen concepts for group-specific score elevation.
    Mine(MineArgs),
    /// Generate synthetic inputs with known ground truth.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    shorty: String,
    /// Argument bytes, base64 (or hex with --hex).
    #[arg(long, default_value = "")]
    args: String,
    /// Return bytes, base64 (or hex with --hex).
    #[arg(long)]
    ret: Option<String>,
    /// Arguments are preceded by a 4-byte receiver.
    #[arg(long)]
    instance: bool,
    #[arg(long)]
    hex: bool,
}

#[derive(Args)]
struct TraceInput {
    /// Line-delimited JSON trace log.
    #[arg(long)]
    trace: PathBuf,
    /// Fail when more than this share of lines is rejected.
    #[arg(long, default_value_t = 0.5)]
    max_reject_ratio: f64,
}

impl TraceInput {
    fn options(&self) -> ParseOptions {
        ParseOptions { max_reject_ratio: self.max_reject_ratio, ..ParseOptions::default() }
    }

    fn load(&self) -> Result<TraceLog> {
        let f = File::open(&self.trace).with_context(|| format!("opening {}", self.trace.display()))?;
        Ok(parse_trace(BufReader::new(f), self.options())?)
    }
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: TraceInput,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchArg {
    Substring,
    Token,
}

#[derive(Args)]
struct DetectorArgs {
    /// Keyword file, one per line, `#` comments. Defaults to the built-in list.
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MatchArg::Substring)]
    match_mode: MatchArg,
    /// Shortest array accepted as a probability vector.
    #[arg(long, default_value_t = 2)]
    min_len: usize,
    /// Also accept vectors whose entries are all exactly 0 or 1.
    #[arg(long)]
    allow_binary: bool,
}

impl DetectorArgs {
    fn build(&self) -> Result<(KeywordSet, ProbabilityScan)> {
        let mode = match self.match_mode {
            MatchArg::Substring => MatchMode::Substring,
            MatchArg::Token => MatchMode::Token,
        };
        let keywords = match &self.keywords {
            Some(p) => KeywordSet::from_config(&read_text(p)?, mode)?,
            None => KeywordSet::new(DEFAULT_KEYWORDS.iter().copied(), mode)?,
        };
        if self.min_len < 2 {
            bail!("--min-len must be at least 2");
        }
        Ok((keywords, ProbabilityScan { min_len: self.min_len, require_interior: !self.allow_binary }))
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: TraceInput,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Evidence report (JSON array).
    #[arg(long)]
    out: PathBuf,
    /// Ranked candidates (JSON array).
    #[arg(long)]
    candidates: Option<PathBuf>,
    /// Candidates printed to stdout.
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    input: TraceInput,
    /// Static call edges (JSON array).
    #[arg(long)]
    static_edges: Option<PathBuf>,
    /// Indirect-jump records (JSON array).
    #[arg(long)]
    jumps: Option<PathBuf>,
    /// Node id (`name` or `name@lib`), or `auto` for the top-ranked candidate.
    #[arg(long)]
    anchor: String,
    /// Role map, `{"node": ["input_source", ...]}`.
    #[arg(long)]
    roles: Option<PathBuf>,
    /// Mark detector candidates as output registers.
    #[arg(long)]
    mark_candidates: bool,
    /// Declared model inputs for the completeness check; defaults to the
    /// slice's input sources.
    #[arg(long, value_delimiter = ',')]
    inputs: Vec<String>,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Slice report (JSON). Printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the whole call graph.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Precomputed scores (external injection).
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Concept catalog, one per line. `bundled` selects the shipped 512-entry list.
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    max_orphan_ratio: f64,
}

impl DatasetArgs {
    fn catalog(&self) -> Result<Option<ConceptCatalog>> {
        Ok(match self.catalog.as_deref() {
            None => None,
            Some("bundled") => Some(ConceptCatalog::bundled()),
            Some(p) => Some(ConceptCatalog::from_text(&read_text(Path::new(p))?)?),
        })
    }

    fn load(&self) -> Result<ScoreDataset> {
        let catalog = self.catalog()?;
        let scores = self.scores.as_ref().context("--scores is required")?;
        Ok(load_dataset(
            open(&self.samples)?,
            open(scores)?,
            catalog.as_ref(),
            LoadOptions { max_orphan_ratio: self.max_orphan_ratio },
        )?)
    }
}

#[derive(Args)]
struct AssessArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Score by running this command per sample (internal injection);
    /// `{sample_id}` is replaced by the quoted id.
    #[arg(long, conflicts_with = "scores")]
    scorer_cmd: Option<String>,
    #[arg(long, default_value_t = 30.0)]
    scorer_timeout: f64,
    #[arg(long, default_value_t = 1)]
    scorer_retries: u32,
    #[arg(long, default_value_t = 4)]
    scorer_concurrency: usize,
    #[arg(long, default_value_t = 0.5)]
    max_failure_ratio: f64,
    /// Suite JSON with hypotheses and table options.
    #[arg(long)]
    suite: PathBuf,
    /// Seed for power simulations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Sex,
    Ethnicity,
    AgeBin,
    Demographic,
}

impl From<GroupArg> for Field {
    fn from(g: GroupArg) -> Field {
        match g {
            GroupArg::Sex => Field::Sex,
            GroupArg::Ethnicity => Field::Ethnicity,
            GroupArg::AgeBin => Field::AgeBin,
            GroupArg::Demographic => Field::Demographic,
        }
    }
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Keep only samples of this variant, e.g. grey_background.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value_t = 0.15)]
    threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = GroupArg::Demographic)]
    group_field: GroupArg,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Trace log, jumps, static edges, roles and ground truth.
    Trace(SynthArgs),
    /// samples.csv, scores.csv and ground truth.
    Scores(SynthArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Plan JSON.
    #[arg(long)]
    plan: PathBuf,
    /// Overrides the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_text(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn open(p: &Path) -> Result<File> {
    File::open(p).with_context(|| format!("opening {}", p.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(p: &Path) -> Result<T> {
    serde_json::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))
}

fn write_json<T: Serialize + ?Sized>(p: &Path, v: &T) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn print_counters(c: &TraceCounters) {
    eprintln!("records: {} read, {} accepted, {} rejected", c.read, c.accepted, c.rejected);
    for (reason, n) in &c.by_reason {
        eprintln!("  {reason}: {n}");
    }
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let bytes = |s: &str| -> Result<Vec<u8>> {
        if a.hex {
            let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
            if s.len() % 2 != 0 {
                bail!("odd number of hex digits");
            }
            (0..s.len()).step_by(2).map(|i| Ok(u8::from_str_radix(&s[i..i + 2], 16)?)).collect()
        } else {
            Ok(base64::engine::general_purpose::STANDARD.decode(s.trim())?)
        }
    };
    let sig = parse_shorty(&a.shorty)?;
    let mut out = io::stdout().lock();
    for (i, v) in decode_args(&sig, &bytes(&a.args)?, !a.instance)?.iter().enumerate() {
        writeln!(out, "arg{i} {} {v}", v.kind().as_char())?;
    }
    if let Some(r) = &a.ret {
        let v = decode_return(&sig, &bytes(r)?)?;
        writeln!(out, "ret {} {v}", v.kind().as_char())?;
    }
    Ok(())
}

fn cmd_ingest(a: &IngestArgs) -> Result<()> {
    let mut reader = TraceReader::new(BufReader::new(open(&a.input.trace)?), a.input.options());
    let mut records = 0u64;
    let mut decoded_args = 0u64;
    for r in reader.by_ref() {
        records += 1;
        if !r.raw_args.is_empty() && r.decode_args().is_ok() {
            decoded_args += 1;
        }
    }
    let counters = reader.finish()?;
    print_counters(&counters);
    println!("{records} records, {decoded_args} with decoded arguments");
    Ok(())
}

fn cmd_detect(a: &DetectArgs) -> Result<()> {
    let log = a.input.load()?;
    print_counters(&log.counters);
    let (keywords, scan) = a.detector.build()?;
    let d = detect(&log, &keywords, &scan);
    write_json(&a.out, &d.evidence)?;
    if let Some(p) = &a.candidates {
        write_json(p, &d.candidates)?;
    }
    println!("{} evidence items, {} candidate functions", d.evidence.len(), d.candidates.len());
    for c in d.candidates.iter().take(a.top) {
        let lib = c.library.as_deref().unwrap_or("-");
        let kinds: Vec<String> = c.rule_kinds.iter().map(|k| format!("{k:?}")).collect();
        println!("{:>6}  {:<40} {:<20} {}", c.evidence_count, c.function_name, lib, kinds.join("+"));
    }
    Ok(())
}

#[derive(Serialize)]
struct ReconstructReport {
    anchor: NodeId,
    slice: PipelineSlice,
    declared_inputs: Vec<NodeId>,
    completeness: CompletenessReport,
    complete: bool,
    unknown_role_nodes: Vec<NodeId>,
    unresolved_jumps: Vec<UnresolvedJump>,
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<()> {
    let log = a.input.load()?;
    print_counters(&log.counters);
    let static_edges: Vec<CallEdge> = a.static_edges.as_deref().map(read_json).transpose()?.unwrap_or_default();
    let jumps: Vec<JumpRecord> = a.jumps.as_deref().map(read_json).transpose()?.unwrap_or_default();
    let roles: RoleMap = a.roles.as_deref().map(read_json).transpose()?.unwrap_or_default();

    let mut graph = build_call_graph(&log, &static_edges, &jumps);
    let unknown_role_nodes = graph.apply_roles(&roles);
    let needs_detection = a.mark_candidates || a.anchor == "auto";
    let candidates = if needs_detection {
        let (keywords, scan) = a.detector.build()?;
        detect(&log, &keywords, &scan).candidates
    } else {
        Vec::new()
    };
    if a.mark_candidates {
        graph.mark_candidates(&candidates);
    }
    let anchor = if a.anchor == "auto" {
        let top = candidates.first().context("no detector candidates to anchor on")?;
        NodeId::new(&top.function_name, top.library.as_deref())
    } else {
        NodeId::from(a.anchor.as_str())
    };
    let slice = slice_pipeline(&graph, &anchor)?;
    let declared: BTreeSet<NodeId> = if a.inputs.is_empty() {
        slice.nodes.iter().filter(|id| slice.roles.get(*id).is_some_and(|r| r.contains(&Role::InputSource))).cloned().collect()
    } else {
        a.inputs.iter().map(|s| NodeId::from(s.as_str())).collect()
    };
    let completeness = completeness_check(&slice, &graph, &declared);
    let report = ReconstructReport {
        anchor,
        complete: completeness.is_complete(),
        declared_inputs: declared.into_iter().collect(),
        completeness,
        unknown_role_nodes,
        unresolved_jumps: graph.dump().unresolved_jumps,
        slice,
    };
    if let Some(p) = &a.graph_out {
        write_json(p, &graph.dump())?;
    }
    match &a.out {
        Some(p) => {
            write_json(p, &report)?;
            println!(
                "slice around {}: {} nodes, {} edges, complete={}",
                report.anchor.as_str(),
                report.slice.nodes.len(),
                report.slice.edges.len(),
                report.complete
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(())
}

fn cmd_assess(a: &AssessArgs) -> Result<()> {
    let suite = Suite::from_json(&read_text(&a.suite)?)?;
    let ds = match &a.scorer_cmd {
        None => a.data.load()?,
        Some(cmd) => {
            let catalog = a.data.catalog()?;
            let samples = read_samples(open(&a.data.samples)?)?;
            let opts = ScorerOptions {
                timeout: Duration::from_secs_f64(a.scorer_timeout),
                retries: a.scorer_retries,
                concurrency: a.scorer_concurrency,
                max_failure_ratio: a.max_failure_ratio,
            };
            let out = run_scorer(&ScorerAdapter::Internal { command: cmd.clone() }, &samples, catalog.as_ref(), &opts)?;
            fs::create_dir_all(&a.out_dir)?;
            write_scores(File::create(a.out_dir.join("scores.csv"))?, &out.rows)?;
            write_json(&a.out_dir.join("scorer_failures.json"), &out.failures)?;
            if !out.failures.is_empty() {
                eprintln!("{} of {} samples failed to score", out.failures.len(), samples.len());
            }
            ScoreDataset::from_rows(
                samples,
                out.rows,
                catalog.as_ref(),
                LoadOptions { max_orphan_ratio: a.data.max_orphan_ratio },
            )?
        }
    };
    let report = run_suite(&ds, &suite, a.seed)?;
    write_report(&report, &a.out_dir)?;

    println!("suite {}: {} samples, {} score cells", report.suite, report.n_samples, report.n_score_cells);
    if let Some(f) = &report.face_filter {
        println!("single-face filter: kept {}, discarded {} zero, {} multi", f.kept, f.discarded_zero, f.discarded_multi);
    }
    for o in &report.hypotheses {
        let rejected = o.results.iter().filter(|r| r.test.reject).count();
        match o.alpha_corrected {
            Some(alpha) => println!(
                "{}: alpha {} over {} groups, {} of {} strata rejected, {} skipped",
                o.id,
                alpha,
                o.family_size.unwrap_or(0),
                rejected,
                o.results.len(),
                o.skipped.len()
            ),
            None => {
                let outside = o.bins.iter().filter(|b| !b.median_inside).count();
                println!("{}: {} of {} bins have a median outside the bin", o.id, outside, o.bins.len());
            }
        }
    }
    println!("reports written to {}", a.out_dir.display());
    Ok(())
}

fn cmd_mine(a: &MineArgs) -> Result<()> {
    let ds = a.data.load()?.with_variant(a.variant.as_deref());
    if ds.samples.is_empty() {
        bail!("no samples left after the variant filter");
    }
    let findings = audit::mine(&ds, a.threshold, a.alpha, a.group_field.into());
    write_findings(&findings, &a.out_dir)?;
    let significant: Vec<_> = findings.iter().filter(|f| f.reject).collect();
    println!("{} concepts screened, {} significant", findings.len(), significant.len());
    for f in significant {
        println!("{:<4} {:<28} mean {:.3}  p {:.3e}", f.top_group, f.concept, f.top_mean, f.p_value);
    }
    Ok(())
}

fn cmd_synth(c: &SynthCommand) -> Result<()> {
    match c {
        SynthCommand::Trace(a) => {
            let mut plan: SyntheticAppPlan = read_json(&a.plan)?;
            if let Some(s) = a.seed {
                plan.seed = s;
            }
            let t = generate_trace(&plan)?;
            t.write_to(&a.out_dir)?;
            println!("{} records, {} jump records written to {}", t.log.records.len(), t.jumps.len(), a.out_dir.display());
        }
        SynthCommand::Scores(a) => {
            let mut plan: DisparityPlan = read_json(&a.plan)?;
            if let Some(s) = a.seed {
                plan.seed = s;
            }
            let s = generate_scores(&plan)?;
            s.write_to(&a.out_dir)?;
            println!("{} samples, {} score rows written to {}", s.samples.len(), s.scores.len(), a.out_dir.display());
        }
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if let Some(a) = e.downcast_ref::<AuditError>() {
        return a.exit_code() as u8;
    }
    match e.downcast_ref::<TraceError>() {
        Some(TraceError::ExcessiveCorruption { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decode(a) => cmd_decode(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Assess(a) => cmd_assess(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Synth(c) => cmd_synth(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
