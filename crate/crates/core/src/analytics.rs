//! Synthetic multi-view generation, benchmark harness and the statistics used
//! to relate merge time to summary size.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, MultiViewSet};
use crate::merge::{merge, MergeRecord};
use crate::multi_merge::{merge_all, Strategy};
use crate::rdf_io::{Term, Triple, RDF_TYPE};
use crate::summary::{ModelKind, Summary};

pub const GEN_NS: &str = "urn:mvs:gen:";

/// Parameters of the synthetic multi-view generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub views: usize,
    pub vertices_per_view: usize,
    pub edges_per_view: usize,
    pub predicate_alphabet: usize,
    pub class_alphabet: usize,
    /// Fraction of each view's vertices drawn from a pool shared by all views.
    pub overlap: f64,
    pub type_prob: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            views: 4,
            vertices_per_view: 200,
            edges_per_view: 600,
            predicate_alphabet: 8,
            class_alphabet: 4,
            overlap: 0.3,
            type_prob: 0.5,
            seed: 1,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("views", self.views),
            ("vertices_per_view", self.vertices_per_view),
            ("edges_per_view", self.edges_per_view),
            ("predicate_alphabet", self.predicate_alphabet),
            ("class_alphabet", self.class_alphabet),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        for (name, v) in [("overlap", self.overlap), ("type_prob", self.type_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Number of vertices every view takes from the shared pool.
    pub fn shared_vertices(&self) -> usize {
        ((self.overlap * self.vertices_per_view as f64).round() as usize)
            .min(self.vertices_per_view)
    }
}

/// Seed of view `index` derived from the base seed (splitmix64 finalizer).
pub fn view_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates a set of views, `view0`, `view1`, ...
pub fn generate_views(params: &GenParams) -> Result<MultiViewSet> {
    params.validate()?;
    let mut views = MultiViewSet::new();
    for i in 0..params.views {
        let g = generate_view(params, i, view_seed(params.seed, i))?;
        views.push(format!("view{i}"), g)?;
    }
    Ok(views)
}

/// One view. Vertices are the shared pool plus view-private ones; edges are
/// drawn with replacement over (vertex, predicate, vertex) and deduplicated.
pub fn generate_view(params: &GenParams, view_index: usize, seed: u64) -> Result<Graph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = params.shared_vertices();
    let vertices: Vec<Term> = (0..params.vertices_per_view)
        .map(|i| {
            if i < shared {
                Term::Iri(format!("{GEN_NS}s{i}"))
            } else {
                Term::Iri(format!("{GEN_NS}v{view_index}x{i}"))
            }
        })
        .collect();
    let mut g = Graph::new();
    for _ in 0..params.edges_per_view {
        let s = &vertices[rng.random_range(0..vertices.len())];
        let p = rng.random_range(0..params.predicate_alphabet);
        let o = &vertices[rng.random_range(0..vertices.len())];
        g.insert(Triple::new(s.clone(), format!("{GEN_NS}p{p}"), o.clone())?)?;
    }
    for v in &vertices {
        if rng.random_bool(params.type_prob) {
            let c = rng.random_range(0..params.class_alphabet);
            g.insert(Triple::new(
                v.clone(),
                RDF_TYPE,
                Term::Iri(format!("{GEN_NS}C{c}")),
            )?)?;
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation coefficient.
    pub r: f64,
    /// Coefficient of determination, `1 - SS_res / SS_tot`.
    pub r2: f64,
    pub n: usize,
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn moments(xs: &[f64], ys: &[f64]) -> Result<Moments> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "sample lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 samples, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "a sample has zero variance".into(),
        ));
    }
    Ok(Moments {
        mean_x,
        mean_y,
        sxx,
        syy,
        sxy,
    })
}

/// Pearson product-moment correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let m = moments(xs, ys)?;
    Ok((m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ordinary least-squares line through `(xs, ys)`.
pub fn linfit(xs: &[f64], ys: &[f64]) -> Result<RegressionFit> {
    let m = moments(xs, ys)?;
    let slope = m.sxy / m.sxx;
    let intercept = m.mean_y - slope * m.mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(RegressionFit {
        slope,
        intercept,
        r: (m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0),
        r2: 1.0 - ss_res / m.syy,
        n: xs.len(),
    })
}

/// Function of the edge count that merge time is regressed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeFunction {
    E,
    ELogE,
    E2,
}

impl EdgeFunction {
    pub const ALL: [EdgeFunction; 3] = [EdgeFunction::E, EdgeFunction::ELogE, EdgeFunction::E2];

    pub fn apply(self, e: f64) -> f64 {
        match self {
            EdgeFunction::E => e,
            EdgeFunction::ELogE => {
                if e > 0.0 {
                    e * e.ln()
                } else {
                    0.0
                }
            }
            EdgeFunction::E2 => e * e,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeFunction::E => "E",
            EdgeFunction::ELogE => "ElogE",
            EdgeFunction::E2 => "E2",
        }
    }
}

impl fmt::Display for EdgeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which edge count of a merge is used: `|E1| + |E2|` or `|E1 ∪ E2|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EdgeMeasure {
    #[default]
    Sum,
    Union,
}

impl EdgeMeasure {
    pub const ALL: [EdgeMeasure; 2] = [EdgeMeasure::Sum, EdgeMeasure::Union];

    pub fn of(self, r: &MergeRecord) -> usize {
        match self {
            EdgeMeasure::Sum => r.edges_sum,
            EdgeMeasure::Union => r.edges_union,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeMeasure::Sum => "sum",
            EdgeMeasure::Union => "union",
        }
    }
}

impl fmt::Display for EdgeMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(EdgeMeasure::Sum),
            "union" => Ok(EdgeMeasure::Union),
            _ => Err(Error::InvalidParams(format!("unknown edge measure {s:?}"))),
        }
    }
}

/// Regresses wall time (ms) on `against(edge_measure)`.
pub fn correlate_times(
    records: &[MergeRecord],
    against: EdgeFunction,
    measure: EdgeMeasure,
) -> Result<RegressionFit> {
    let xs: Vec<f64> = records
        .iter()
        .map(|r| against.apply(measure.of(r) as f64))
        .collect();
    let ys: Vec<f64> = records.iter().map(MergeRecord::wall_ms).collect();
    linfit(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub model: ModelKind,
    pub function: EdgeFunction,
    pub measure: EdgeMeasure,
    pub fit: RegressionFit,
}

/// All three functions against both edge measures.
pub fn fit_all(records: &[MergeRecord], model: ModelKind) -> Result<Vec<FitRow>> {
    let mut rows = Vec::with_capacity(6);
    for function in EdgeFunction::ALL {
        for measure in EdgeMeasure::ALL {
            rows.push(FitRow {
                model,
                function,
                measure,
                fit: correlate_times(records, function, measure)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_fits_csv<W: Write>(rows: &[FitRow], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "model",
        "function",
        "edge_measure",
        "slope",
        "intercept",
        "r",
        "r2",
        "n",
    ])?;
    for row in rows {
        w.write_record([
            row.model.to_string(),
            row.function.to_string(),
            row.measure.to_string(),
            row.fit.slope.to_string(),
            row.fit.intercept.to_string(),
            row.fit.r.to_string(),
            row.fit.r2.to_string(),
            row.fit.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Each merge is repeated this many times and the median time is kept.
    pub repeats: usize,
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            repeats: 3,
            parallel: false,
        }
    }
}

/// One ordered pair of the pairwise benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub pair_id: usize,
    pub left: String,
    pub right: String,
    pub record: MergeRecord,
}

/// Median of a non-empty set of durations.
pub fn median(times: &mut [Duration]) -> Duration {
    times.sort_unstable();
    let n = times.len();
    if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2
    }
}

/// Merges `repeats` times and keeps the median wall time.
pub fn timed_merge(s1: &Summary, s2: &Summary, repeats: usize) -> Result<MergeRecord> {
    let repeats = repeats.max(1);
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let (_, rec) = merge(s1, s2)?;
        times.push(rec.wall_time);
        last = Some(rec);
    }
    let mut rec = last.expect("at least one repeat");
    rec.wall_time = median(&mut times);
    Ok(rec)
}

/// Merges every ordered pair of distinct summaries: n·(n−1) records.
pub fn bench_pairwise(
    summaries: &[(String, Summary)],
    opts: BenchOptions,
) -> Result<Vec<PairRecord>> {
    if summaries.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "pairwise benchmark needs at least 2 summaries, got {}",
            summaries.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..summaries.len())
        .flat_map(|i| {
            (0..summaries.len())
                .filter(move |&j| j != i)
                .map(move |j| (i, j))
        })
        .collect();
    let run = |(pair_id, &(i, j)): (usize, &(usize, usize))| -> Result<PairRecord> {
        Ok(PairRecord {
            pair_id,
            left: summaries[i].0.clone(),
            right: summaries[j].0.clone(),
            record: timed_merge(&summaries[i].1, &summaries[j].1, opts.repeats)?,
        })
    };
    if opts.parallel {
        pairs.par_iter().enumerate().map(run).collect()
    } else {
        pairs.iter().enumerate().map(run).collect()
    }
}

pub fn write_pair_records_csv<W: Write>(records: &[PairRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "pair_id",
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
    ])?;
    for p in records {
        let r = &p.record;
        w.write_record([
            p.pair_id.to_string(),
            p.left.clone(),
            p.right.clone(),
            r.edges_s1.to_string(),
            r.edges_s2.to_string(),
            r.edges_sum.to_string(),
            r.edges_union.to_string(),
            format!("{:.3}", r.wall_ms()),
            r.stats.case1.to_string(),
            r.stats.case2.to_string(),
            r.stats.case3.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Checks that case 3 counts agree between `(a, b)` and `(b, a)` for every pair.
pub fn case3_symmetric(records: &[PairRecord]) -> bool {
    let by_pair: HashMap<(&str, &str), usize> = records
        .iter()
        .map(|p| ((p.left.as_str(), p.right.as_str()), p.record.stats.case3))
        .collect();
    records
        .iter()
        .all(|p| by_pair.get(&(p.right.as_str(), p.left.as_str())) == Some(&p.record.stats.case3))
}

/// Timings of one strategy over repeated n-way merges.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTiming {
    pub strategy: Strategy,
    /// Measured runs, warm-up excluded.
    pub runs: Vec<Duration>,
    pub total_work: usize,
}

impl StrategyTiming {
    pub fn mean_ms(&self) -> f64 {
        self.runs.iter().map(|d| d.as_secs_f64() * 1e3).sum::<f64>() / self.runs.len() as f64
    }

    pub fn std_ms(&self) -> f64 {
        let mean = self.mean_ms();
        let var = self
            .runs
            .iter()
            .map(|d| (d.as_secs_f64() * 1e3 - mean).powi(2))
            .sum::<f64>()
            / self.runs.len() as f64;
        var.sqrt()
    }

    pub fn median_ms(&self) -> f64 {
        median(&mut self.runs.clone()).as_secs_f64() * 1e3
    }
}

/// Runs each strategy `warmup + runs` times, discarding the warm-up runs.
pub fn bench_strategies(
    summaries: &[Summary],
    strategies: &[Strategy],
    runs: usize,
    warmup: usize,
) -> Result<Vec<StrategyTiming>> {
    if runs == 0 {
        return Err(Error::InvalidParams("runs must be positive".into()));
    }
    strategies
        .iter()
        .map(|&strategy| {
            let mut times = Vec::with_capacity(runs);
            let mut total_work = 0;
            for i in 0..warmup + runs {
                let (_, schedule) = merge_all(summaries.to_vec(), strategy)?;
                if i >= warmup {
                    times.push(schedule.total_wall_time);
                    total_work = schedule.total_work();
                }
            }
            Ok(StrategyTiming {
                strategy,
                runs: times,
                total_work,
            })
        })
        .collect()
}

pub fn write_strategy_csv<W: Write>(timings: &[StrategyTiming], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "strategy",
        "runs",
        "mean_ms",
        "std_ms",
        "median_ms",
        "total_work",
    ])?;
    for t in timings {
        w.write_record([
            t.strategy.to_string(),
            t.runs.len().to_string(),
            format!("{:.3}", t.mean_ms()),
            format!("{:.3}", t.std_ms()),
            format!("{:.3}", t.median_ms()),
            t.total_work.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
