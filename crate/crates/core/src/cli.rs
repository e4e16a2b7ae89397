//! The `mvsum` command line: summarize, merge, merge-all, bench and gen.
//!
//! Exit codes: 0 success, 1 input data error, 2 usage or configuration error.
//! Every file written is canonical, so reruns with the same flags are
//! byte-identical apart from timing columns.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{
    bench_pairwise, bench_strategies, fit_all, generate_views, view_seed, write_fits_csv,
    write_pair_records_csv, write_strategy_csv, BenchOptions, GenParams,
};
use crate::error::Error;
use crate::graph::Graph;
use crate::merge::merge;
use crate::multi_merge::{merge_all, Strategy};
use crate::rdf_io::{parse_ntriples, serialize_ntriples, ParseMode, Triple};
use crate::summary::{summarize_with_digest, DigestKind, ModelKind, Summary, HEADER_PREFIX};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mvsum",
    version,
    about = "Structural summaries of multi-view RDF graphs"
)]
pub struct Cli {
    /// Digest used for equivalence-class ids.
    #[arg(long, global = true, env = "MVSUM_DIGEST", default_value = "sha256", value_parser = parse_digest)]
    pub digest: DigestKind,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize N-Triples graphs; several inputs form one graph.
    Summarize(SummarizeArgs),
    /// Merge two summary files.
    Merge(MergeArgs),
    /// Merge every summary file of a directory.
    MergeAll(MergeAllArgs),
    /// Pairwise merge benchmark with time/size regressions.
    Bench(BenchArgs),
    /// Write synthetic views as N-Triples files.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "ACC", value_parser = parse_model)]
    pub model: ModelKind,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Skip malformed lines and report how many were dropped.
    #[arg(long)]
    pub skip_malformed: bool,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// One-row CSV with edge counts, wall time and case counts.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    SmallestFirst,
    LargestFirst,
    Random,
    GreedyParallel,
}

#[derive(Debug, Args)]
pub struct MergeAllArgs {
    /// Directory of `.nt` summary files.
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value = "smallest-first")]
    pub strategy: StrategyName,
    /// Worker count for greedy-parallel; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Required by the random strategy.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub schedule: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenFlags {
    #[arg(long, default_value_t = 4)]
    pub views: usize,
    #[arg(long, default_value_t = 200)]
    pub vertices: usize,
    #[arg(long, default_value_t = 600)]
    pub edges: usize,
    #[arg(long, default_value_t = 8)]
    pub predicates: usize,
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.3)]
    pub overlap: f64,
    #[arg(long, default_value_t = 0.5)]
    pub type_prob: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl GenFlags {
    pub fn params(&self) -> GenParams {
        GenParams {
            views: self.views,
            vertices_per_view: self.vertices,
            edges_per_view: self.edges,
            predicate_alphabet: self.predicates,
            class_alphabet: self.classes,
            overlap: self.overlap,
            type_prob: self.type_prob,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of summary files or graph files; graphs are summarized with `--model`.
    #[arg(required_unless_present = "gen", conflicts_with = "gen")]
    pub dir: Option<PathBuf>,
    /// Use generated views instead of a directory.
    #[arg(long)]
    pub gen: bool,
    #[command(flatten)]
    pub gen_flags: GenFlags,
    #[arg(long, default_value = "ACC", value_parser = parse_model)]
    pub model: ModelKind,
    /// Pairwise records CSV; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Regression fits CSV (three functions by two edge measures).
    #[arg(long)]
    pub fits: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long)]
    pub parallel: bool,
    /// Also time every strategy on the full set and write the results here.
    #[arg(long)]
    pub strategies: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub gen_flags: GenFlags,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_digest(s: &str) -> Result<DigestKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failed command: message plus whether it was the caller's fault.
#[derive(Debug)]
pub struct Failure {
    pub usage: bool,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            usage: true,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.usage {
            EXIT_USAGE
        } else {
            EXIT_DATA
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            usage: e.is_usage(),
            message: e.to_string(),
        }
    }
}

fn at(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| Failure {
        usage: e.is_usage(),
        message: format!("{}: {e}", path.display()),
    }
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| at(path)(Error::Io(e))
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("mvsum: {}", f.message);
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Summarize(a) => cmd_summarize(a, cli.digest),
        Command::Merge(a) => cmd_merge(a),
        Command::MergeAll(a) => cmd_merge_all(a),
        Command::Bench(a) => cmd_bench(a, cli.digest),
        Command::Gen(a) => cmd_gen(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_at(path))
}

/// Runs `f` against the file at `path`, or stdout when `path` is `None`.
fn with_output<F>(path: Option<&Path>, f: F) -> CmdResult
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).map_err(at(p))?;
            w.flush().map_err(io_at(p))
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush().map_err(|e| Error::Io(e).into())
        }
    }
}

/// Reads N-Triples files into one graph. Blank nodes are namespaced per file
/// when there is more than one file so that equal labels stay distinct.
pub fn read_graph(paths: &[PathBuf], mode: ParseMode) -> Result<(Graph, u64), Failure> {
    let mut g = Graph::new();
    let mut skipped = 0;
    let namespace = paths.len() > 1;
    for (idx, path) in paths.iter().enumerate() {
        let file = File::open(path).map_err(io_at(path))?;
        let mut reader = parse_ntriples(BufReader::new(file), mode);
        for t in reader.by_ref() {
            let mut t = t.map_err(at(path))?;
            if namespace {
                let (s, p, o) = t.into_parts();
                t = Triple::new(s.namespaced(idx), p, o.namespaced(idx)).map_err(at(path))?;
            }
            g.insert(t).map_err(at(path))?;
        }
        skipped += reader.skipped();
    }
    Ok((g, skipped))
}

pub fn read_summary(path: &Path) -> Result<Summary, Failure> {
    let file = File::open(path).map_err(io_at(path))?;
    Summary::read_ntriples(BufReader::new(file)).map_err(at(path))
}

fn is_summary_file(path: &Path) -> Result<bool, Failure> {
    let file = File::open(path).map_err(io_at(path))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(io_at(path))?;
    Ok(first.starts_with(HEADER_PREFIX))
}

/// `.nt` files of `dir`, sorted by name.
pub fn list_nt_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !dir.is_dir() {
        return Err(Failure::usage(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_at(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "nt"))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn cmd_summarize(a: &SummarizeArgs, digest: DigestKind) -> CmdResult {
    let mode = if a.skip_malformed {
        ParseMode::SkipAndCount
    } else {
        ParseMode::FailFast
    };
    let (g, skipped) = read_graph(&a.inputs, mode)?;
    if skipped > 0 {
        eprintln!("mvsum: skipped {skipped} malformed line(s)");
    }
    let s = summarize_with_digest(&g, a.model, digest);
    with_output(a.output.as_deref(), |w| Ok(s.write_ntriples(w)?))
}

const STATS_HEADER: [&str; 10] = [
    "left",
    "right",
    "edges_left",
    "edges_right",
    "edges_sum",
    "edges_union",
    "wall_ms",
    "case1",
    "case2",
    "case3",
];

fn cmd_merge(a: &MergeArgs) -> CmdResult {
    let s1 = read_summary(&a.left)?;
    let s2 = read_summary(&a.right)?;
    let (merged, rec) = merge(&s1, &s2)?;
    if let Some(stats) = &a.stats {
        let mut w = csv::Writer::from_writer(create(stats)?);
        let row = [
            stem(&a.left),
            stem(&a.right),
            rec.edges_s1.to_string(),
            rec.edges_s2.to_string(),
            rec.edges_sum.to_string(),
            rec.edges_union.to_string(),
            format!("{:.3}", rec.wall_ms()),
            rec.stats.case1.to_string(),
            rec.stats.case2.to_string(),
            rec.stats.case3.to_string(),
        ];
        w.write_record(STATS_HEADER)
            .and_then(|_| w.write_record(&row))
            .map_err(|e| at(stats)(e.into()))?;
        w.flush().map_err(io_at(stats))?;
    }
    with_output(a.output.as_deref(), |w| Ok(merged.write_ntriples(w)?))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn strategy_from(
    name: StrategyName,
    seed: Option<u64>,
    workers: Option<usize>,
) -> Result<Strategy, Failure> {
    Ok(match name {
        StrategyName::SmallestFirst => Strategy::SmallestFirst,
        StrategyName::LargestFirst => Strategy::LargestFirst,
        StrategyName::Random => {
            let seed = seed.ok_or_else(|| Failure::usage("--strategy random requires --seed"))?;
            Strategy::Random { seed }
        }
        StrategyName::GreedyParallel => {
            Strategy::greedy_parallel(workers.unwrap_or_else(default_workers))?
        }
    })
}

fn cmd_merge_all(a: &MergeAllArgs) -> CmdResult {
    let strategy = strategy_from(a.strategy, a.seed, a.workers)?;
    let files = list_nt_files(&a.dir)?;
    if files.is_empty() {
        return Err(Failure::usage(format!(
            "no .nt summary files in {}",
            a.dir.display()
        )));
    }
    let summaries = files
        .iter()
        .map(|p| read_summary(p))
        .collect::<Result<Vec<_>, _>>()?;
    let (merged, schedule) = merge_all(summaries, strategy)?;
    if let Some(path) = &a.schedule {
        let mut w = create(path)?;
        schedule.write_csv(&mut w).map_err(at(path))?;
        w.flush().map_err(io_at(path))?;
    }
    with_output(a.output.as_deref(), |w| Ok(merged.write_ntriples(w)?))
}

fn bench_inputs(a: &BenchArgs, digest: DigestKind) -> Result<Vec<(String, Summary)>, Failure> {
    if a.gen {
        let views = generate_views(&a.gen_flags.params())?;
        return Ok(views
            .views()
            .iter()
            .map(|(id, g)| (id.clone(), summarize_with_digest(g, a.model, digest)))
            .collect());
    }
    let dir = a.dir.as_deref().expect("clap requires dir without --gen");
    let mut out = Vec::new();
    for path in list_nt_files(dir)? {
        let s = if is_summary_file(&path)? {
            read_summary(&path)?
        } else {
            let (g, _) = read_graph(std::slice::from_ref(&path), ParseMode::FailFast)?;
            summarize_with_digest(&g, a.model, digest)
        };
        out.push((stem(&path), s));
    }
    Ok(out)
}

fn cmd_bench(a: &BenchArgs, digest: DigestKind) -> CmdResult {
    if a.repeats == 0 {
        return Err(Failure::usage("--repeats must be positive"));
    }
    let inputs = bench_inputs(a, digest)?;
    if inputs.len() < 2 {
        return Err(Failure::usage(format!(
            "bench needs at least 2 summaries, got {}",
            inputs.len()
        )));
    }
    let records = bench_pairwise(
        &inputs,
        BenchOptions {
            repeats: a.repeats,
            parallel: a.parallel,
        },
    )?;
    if let Some(path) = &a.fits {
        let model = inputs[0].1.model();
        let merge_records: Vec<_> = records.iter().map(|p| p.record).collect();
        let rows = fit_all(&merge_records, model)?;
        let mut w = create(path)?;
        write_fits_csv(&rows, &mut w).map_err(at(path))?;
        w.flush().map_err(io_at(path))?;
    }
    if let Some(path) = &a.strategies {
        let summaries: Vec<Summary> = inputs.iter().map(|(_, s)| s.clone()).collect();
        let strategies = [
            Strategy::SmallestFirst,
            Strategy::LargestFirst,
            Strategy::Random {
                seed: a.gen_flags.seed,
            },
            Strategy::greedy_parallel(a.workers.unwrap_or_else(default_workers))?,
        ];
        let timings = bench_strategies(&summaries, &strategies, a.runs, a.warmup)?;
        let mut w = create(path)?;
        write_strategy_csv(&timings, &mut w).map_err(at(path))?;
        w.flush().map_err(io_at(path))?;
    }
    with_output(a.output.as_deref(), |w| write_pair_records_csv(&records, w))
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let params = a.gen_flags.params();
    let views = generate_views(&params)?;
    fs::create_dir_all(&a.output).map_err(io_at(&a.output))?;
    let manifest_path = a.output.join("manifest.csv");
    let mut manifest = csv::Writer::from_writer(create(&manifest_path)?);
    let header = [
        "view",
        "file",
        "seed",
        "vertices",
        "edges",
        "typed_vertices",
    ];
    manifest
        .write_record(header)
        .map_err(|e| at(&manifest_path)(e.into()))?;
    for (i, (id, g)) in views.views().iter().enumerate() {
        let file = format!("{id}.nt");
        let path = a.output.join(&file);
        let mut w = create(&path)?;
        serialize_ntriples(&g.to_triples(), &mut w).map_err(io_at(&path))?;
        w.flush().map_err(io_at(&path))?;
        let typed = g
            .vertices()
            .iter()
            .filter(|v| !g.vertex_labels(v).is_empty())
            .count();
        let row = [
            id.clone(),
            file,
            view_seed(params.seed, i).to_string(),
            g.vertex_count().to_string(),
            g.edge_count().to_string(),
            typed.to_string(),
        ];
        manifest
            .write_record(&row)
            .map_err(|e| at(&manifest_path)(e.into()))?;
    }
    manifest.flush().map_err(io_at(&manifest_path))
}
