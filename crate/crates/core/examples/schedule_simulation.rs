//! Dry-run cost model: merging summaries of sizes a and b costs a + b and
//! yields a summary of size a + b. No summaries are built.

use mvsum::multi_merge::{schedule_work, Strategy};

fn main() -> mvsum::Result<()> {
    let sizes = [1, 2, 3, 4];
    for strategy in [
        Strategy::SmallestFirst,
        Strategy::LargestFirst,
        Strategy::greedy_parallel(2)?,
    ] {
        let sim = schedule_work(&sizes, strategy);
        println!(
            "{strategy}: total_work={} makespan={}",
            sim.total_work, sim.makespan
        );
        for s in &sim.steps {
            println!(
                "  {} + {} -> {}  cost {}  [{}, {}]",
                s.left, s.right, s.output, s.cost, s.start, s.finish
            );
        }
    }

    // Skewed sizes: largest-first repeatedly re-merges the growing result.
    let skewed: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
    let small = schedule_work(&skewed, Strategy::SmallestFirst).total_work;
    let large = schedule_work(&skewed, Strategy::LargestFirst).total_work;
    println!("sizes {skewed:?}: smallest-first {small}, largest-first {large}");
    Ok(())
}
