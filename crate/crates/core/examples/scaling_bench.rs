//! Times merges of summary pairs of doubling size and regresses the time
//! on E, E·ln E and E².
//!
//! Run with `--release`; debug timings are noisy.

use mvsum::analytics::{fit_all, generate_view, timed_merge, GenParams};
use mvsum::summary::{summarize, ModelKind};

fn main() -> mvsum::Result<()> {
    let mut records = Vec::new();
    for k in 8..=14 {
        let edges = 1usize << k;
        let params = GenParams {
            vertices_per_view: edges / 3,
            edges_per_view: edges,
            predicate_alphabet: 32,
            class_alphabet: 16,
            overlap: 0.5,
            ..GenParams::default()
        };
        let s1 = summarize(&generate_view(&params, 0, k as u64)?, ModelKind::Acc);
        let s2 = summarize(&generate_view(&params, 1, 1000 + k as u64)?, ModelKind::Acc);
        let rec = timed_merge(&s1, &s2, 3)?;
        println!("|E| = {:>7}  {:>9.3} ms", rec.edges_sum, rec.wall_ms());
        records.push(rec);
    }
    println!();
    for row in fit_all(&records, ModelKind::Acc)? {
        println!(
            "{:<6} {:<6} r={:.4} r2={:.4}",
            row.function.as_str(),
            row.measure.as_str(),
            row.fit.r,
            row.fit.r2
        );
    }
    Ok(())
}
