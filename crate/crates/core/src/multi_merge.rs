//! Merging n summaries into one.
//!
//! Every strategy builds a binary merge tree over the inputs; they differ only
//! in which pair is merged next. Since pairwise merging is associative and
//! commutative in its result, the final summary is the same for all of them.
//!
//! Input summaries get ids `0..n`; merge outputs get ids `n, n+1, ...` in the
//! order their merges start.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::num::NonZeroUsize;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::merge::{merge, MergeRecord};
use crate::summary::Summary;

pub const RANDOM_GENERATOR: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    SmallestFirst,
    LargestFirst,
    Random { seed: u64 },
    GreedyParallel { workers: NonZeroUsize },
}

impl Strategy {
    pub fn greedy_parallel(workers: usize) -> Result<Self> {
        NonZeroUsize::new(workers)
            .map(|workers| Strategy::GreedyParallel { workers })
            .ok_or_else(|| Error::InvalidParams("greedy-parallel needs at least one worker".into()))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::SmallestFirst => "smallest-first",
            Strategy::LargestFirst => "largest-first",
            Strategy::Random { .. } => "random",
            Strategy::GreedyParallel { .. } => "greedy-parallel",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random { seed } => write!(f, "random(seed={seed})"),
            Strategy::GreedyParallel { workers } => write!(f, "greedy-parallel(workers={workers})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub output: usize,
    pub record: MergeRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeSchedule {
    pub strategy: Strategy,
    /// Generator used by the random strategy.
    pub generator: Option<&'static str>,
    pub inputs: usize,
    pub steps: Vec<MergeStep>,
    pub total_wall_time: Duration,
}

impl MergeSchedule {
    /// Sum of `edges_sum` over all steps.
    pub fn total_work(&self) -> usize {
        self.steps.iter().map(|s| s.record.edges_sum).sum()
    }

    pub fn root(&self) -> usize {
        self.steps.last().map_or(0, |s| s.output)
    }

    /// Checks that the steps form a binary merge tree over the inputs.
    pub fn validate(&self) -> Result<()> {
        validate_tree(
            self.inputs,
            self.steps.iter().map(|s| (s.left, s.right, s.output)),
        )
    }

    /// CSV with columns `step,left_id,right_id,edges_left,edges_right,wall_ms,case1,case2,case3`.
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "step",
            "left_id",
            "right_id",
            "edges_left",
            "edges_right",
            "wall_ms",
            "case1",
            "case2",
            "case3",
        ])?;
        for (i, s) in self.steps.iter().enumerate() {
            let r = &s.record;
            w.write_record([
                i.to_string(),
                s.left.to_string(),
                s.right.to_string(),
                r.edges_s1.to_string(),
                r.edges_s2.to_string(),
                format!("{:.3}", r.wall_ms()),
                r.stats.case1.to_string(),
                r.stats.case2.to_string(),
                r.stats.case3.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn validate_tree(inputs: usize, steps: impl Iterator<Item = (usize, usize, usize)>) -> Result<()> {
    let bad = |msg: String| Err(Error::Corruption(format!("invalid merge schedule: {msg}")));
    let mut live: HashSet<usize> = (0..inputs).collect();
    let mut produced: HashSet<usize> = HashSet::new();
    let mut count = 0;
    for (l, r, o) in steps {
        count += 1;
        if l == r {
            return bad(format!("step merges {l} with itself"));
        }
        for id in [l, r] {
            if !live.remove(&id) {
                return bad(format!("id {id} is not available when consumed"));
            }
        }
        if o < inputs || !produced.insert(o) {
            return bad(format!("output id {o} is not fresh"));
        }
        live.insert(o);
    }
    if inputs > 0 && count != inputs - 1 {
        return bad(format!("{count} steps for {inputs} inputs"));
    }
    if live.len() > 1 {
        return bad(format!("{} roots remain", live.len()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    id: usize,
    size: usize,
}

/// Chooses the next pair from a pool of `(id, size)` entries.
struct Picker {
    strategy: Strategy,
    rng: Option<ChaCha8Rng>,
}

impl Picker {
    fn new(strategy: Strategy) -> Self {
        let rng = match strategy {
            Strategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Picker { strategy, rng }
    }

    /// Removes and returns the next pair; the first element is the left input.
    fn pick(&mut self, pool: &mut Vec<Entry>) -> (Entry, Entry) {
        debug_assert!(pool.len() >= 2);
        let first = self.pick_one(pool);
        let second = self.pick_one(pool);
        (first, second)
    }

    fn pick_one(&mut self, pool: &mut Vec<Entry>) -> Entry {
        let idx = match self.strategy {
            Strategy::SmallestFirst | Strategy::GreedyParallel { .. } => {
                position_min(pool, |e| (e.size, e.id))
            }
            Strategy::LargestFirst => position_min(pool, |e| (Reverse(e.size), e.id)),
            Strategy::Random { .. } => self
                .rng
                .as_mut()
                .expect("random strategy has a generator")
                .random_range(0..pool.len()),
        };
        pool.remove(idx)
    }
}

fn position_min<K: Ord>(pool: &[Entry], key: impl Fn(&Entry) -> K) -> usize {
    pool.iter()
        .enumerate()
        .min_by_key(|(_, e)| key(e))
        .map(|(i, _)| i)
        .expect("pool is not empty")
}

/// Merges all `summaries` into one following `strategy`.
pub fn merge_all(summaries: Vec<Summary>, strategy: Strategy) -> Result<(Summary, MergeSchedule)> {
    let first = summaries.first().ok_or(Error::EmptyInput)?;
    for s in &summaries[1..] {
        if s.model() != first.model() {
            return Err(Error::ModelMismatch {
                left: first.model(),
                right: s.model(),
            });
        }
        if s.digest() != first.digest() {
            return Err(Error::DigestMismatch {
                left: first.digest(),
                right: s.digest(),
            });
        }
    }
    let inputs = summaries.len();
    let start = Instant::now();
    let (result, steps) = match strategy {
        Strategy::GreedyParallel { workers } => merge_greedy_parallel(summaries, workers.get())?,
        _ => merge_sequential(summaries, Picker::new(strategy))?,
    };
    let schedule = MergeSchedule {
        strategy,
        generator: matches!(strategy, Strategy::Random { .. }).then_some(RANDOM_GENERATOR),
        inputs,
        steps,
        total_wall_time: start.elapsed(),
    };
    Ok((result, schedule))
}

fn merge_sequential(
    summaries: Vec<Summary>,
    mut picker: Picker,
) -> Result<(Summary, Vec<MergeStep>)> {
    let mut next_id = summaries.len();
    let mut pool: Vec<Entry> = Vec::with_capacity(summaries.len());
    let mut store: HashMap<usize, Summary> = HashMap::with_capacity(summaries.len());
    for (id, s) in summaries.into_iter().enumerate() {
        pool.push(Entry {
            id,
            size: s.edge_count(),
        });
        store.insert(id, s);
    }
    let mut steps = Vec::with_capacity(pool.len().saturating_sub(1));
    while pool.len() > 1 {
        let (a, b) = picker.pick(&mut pool);
        let left = store.remove(&a.id).expect("pooled summary is stored");
        let right = store.remove(&b.id).expect("pooled summary is stored");
        let (merged, record) = merge(&left, &right)?;
        let output = next_id;
        next_id += 1;
        pool.push(Entry {
            id: output,
            size: merged.edge_count(),
        });
        store.insert(output, merged);
        steps.push(MergeStep {
            left: a.id,
            right: b.id,
            output,
            record,
        });
    }
    let root = pool.pop().expect("at least one summary");
    Ok((store.remove(&root.id).expect("root is stored"), steps))
}

struct SharedPool {
    pool: Vec<Entry>,
    store: HashMap<usize, Summary>,
    in_flight: usize,
    next_id: usize,
    steps: Vec<MergeStep>,
    error: Option<Error>,
}

fn merge_greedy_parallel(
    summaries: Vec<Summary>,
    workers: usize,
) -> Result<(Summary, Vec<MergeStep>)> {
    let n = summaries.len();
    let mut shared = SharedPool {
        pool: Vec::with_capacity(n),
        store: HashMap::with_capacity(n),
        in_flight: 0,
        next_id: n,
        steps: Vec::with_capacity(n.saturating_sub(1)),
        error: None,
    };
    for (id, s) in summaries.into_iter().enumerate() {
        shared.pool.push(Entry {
            id,
            size: s.edge_count(),
        });
        shared.store.insert(id, s);
    }
    let state = Mutex::new(shared);
    let ready = Condvar::new();
    let worker_count = workers.min(n / 2).max(1);

    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| greedy_worker(&state, &ready));
        }
    });

    let mut shared = state
        .into_inner()
        .expect("worker panicked while holding the pool");
    if let Some(err) = shared.error.take() {
        return Err(err);
    }
    let root = shared.pool.pop().expect("one summary remains");
    Ok((
        shared.store.remove(&root.id).expect("root is stored"),
        shared.steps,
    ))
}

fn greedy_worker(state: &Mutex<SharedPool>, ready: &Condvar) {
    let mut picker = Picker::new(Strategy::SmallestFirst);
    let mut guard = state.lock().expect("pool lock");
    loop {
        if guard.error.is_some() {
            return;
        }
        if guard.pool.len() >= 2 {
            let (a, b) = picker.pick(&mut guard.pool);
            let left = guard.store.remove(&a.id).expect("pooled summary is stored");
            let right = guard.store.remove(&b.id).expect("pooled summary is stored");
            let output = guard.next_id;
            guard.next_id += 1;
            guard.in_flight += 1;
            drop(guard);

            let result = merge(&left, &right);

            guard = state.lock().expect("pool lock");
            guard.in_flight -= 1;
            match result {
                Ok((merged, record)) => {
                    guard.pool.push(Entry {
                        id: output,
                        size: merged.edge_count(),
                    });
                    guard.store.insert(output, merged);
                    guard.steps.push(MergeStep {
                        left: a.id,
                        right: b.id,
                        output,
                        record,
                    });
                }
                Err(e) => guard.error = Some(e),
            }
            ready.notify_all();
            continue;
        }
        if guard.in_flight == 0 {
            ready.notify_all();
            return;
        }
        guard = ready.wait(guard).expect("pool lock");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulatedStep {
    pub left: usize,
    pub right: usize,
    pub output: usize,
    pub cost: u64,
    pub output_size: usize,
    pub start: u64,
    pub finish: u64,
}

/// Dry-run of a merge schedule under a cost model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedSchedule {
    pub steps: Vec<SimulatedStep>,
    pub total_work: u64,
    /// Time at which the root is available (equals total work for the
    /// single-threaded strategies).
    pub makespan: u64,
}

impl SimulatedSchedule {
    pub fn validate(&self, inputs: usize) -> Result<()> {
        validate_tree(
            inputs,
            self.steps.iter().map(|s| (s.left, s.right, s.output)),
        )
    }
}

/// Simulates `strategy` on inputs of the given edge counts, with merge cost
/// `a + b` and output size `a + b`.
pub fn schedule_work(sizes: &[usize], strategy: Strategy) -> SimulatedSchedule {
    schedule_work_with(sizes, strategy, |a, b| a + b)
}

/// Like [`schedule_work`] with the output size of each merge supplied by
/// `output_size` (which should not exceed `a + b`).
pub fn schedule_work_with<F>(
    sizes: &[usize],
    strategy: Strategy,
    output_size: F,
) -> SimulatedSchedule
where
    F: Fn(usize, usize) -> usize,
{
    let mut pool: Vec<Entry> = sizes
        .iter()
        .enumerate()
        .map(|(id, &size)| Entry { id, size })
        .collect();
    let mut next_id = sizes.len();
    let mut steps = Vec::new();

    match strategy {
        Strategy::GreedyParallel { workers } => {
            let mut picker = Picker::new(strategy);
            let mut idle = workers.get();
            let mut now = 0u64;
            let mut running: BinaryHeap<Reverse<(u64, usize, usize)>> = BinaryHeap::new();
            loop {
                while idle > 0 && pool.len() >= 2 {
                    let (a, b) = picker.pick(&mut pool);
                    let cost = (a.size + b.size) as u64;
                    let out_size = output_size(a.size, b.size);
                    let output = next_id;
                    next_id += 1;
                    running.push(Reverse((now + cost, output, out_size)));
                    steps.push(SimulatedStep {
                        left: a.id,
                        right: b.id,
                        output,
                        cost,
                        output_size: out_size,
                        start: now,
                        finish: now + cost,
                    });
                    idle -= 1;
                }
                let Some(Reverse((finish, id, size))) = running.pop() else {
                    break;
                };
                now = finish;
                pool.push(Entry { id, size });
                idle += 1;
                // everything finishing at the same instant becomes available together
                while let Some(Reverse((f, id, size))) = running.peek().copied() {
                    if f != now {
                        break;
                    }
                    running.pop();
                    pool.push(Entry { id, size });
                    idle += 1;
                }
            }
            let makespan = steps.iter().map(|s| s.finish).max().unwrap_or(0);
            let total_work = steps.iter().map(|s| s.cost).sum();
            SimulatedSchedule {
                steps,
                total_work,
                makespan,
            }
        }
        _ => {
            let mut picker = Picker::new(strategy);
            let mut now = 0u64;
            while pool.len() > 1 {
                let (a, b) = picker.pick(&mut pool);
                let cost = (a.size + b.size) as u64;
                let out_size = output_size(a.size, b.size);
                let output = next_id;
                next_id += 1;
                pool.push(Entry {
                    id: output,
                    size: out_size,
                });
                steps.push(SimulatedStep {
                    left: a.id,
                    right: b.id,
                    output,
                    cost,
                    output_size: out_size,
                    start: now,
                    finish: now + cost,
                });
                now += cost;
            }
            SimulatedSchedule {
                total_work: now,
                makespan: now,
                steps,
            }
        }
    }
}
