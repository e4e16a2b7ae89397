//! Generates overlapping views and reports how much they share.

use mvsum::analytics::{bench_pairwise, generate_views, BenchOptions, GenParams};
use mvsum::summary::{summarize, ModelKind};

fn main() -> mvsum::Result<()> {
    for overlap in [0.0, 0.3, 0.9] {
        let params = GenParams {
            views: 3,
            overlap,
            seed: 11,
            ..GenParams::default()
        };
        let views = generate_views(&params)?;
        let union = views.merged();
        println!(
            "overlap {overlap}: union has {} vertices, {} edges",
            union.vertex_count(),
            union.edge_count()
        );
        let named: Vec<_> = views
            .views()
            .iter()
            .map(|(id, g)| (id.clone(), summarize(g, ModelKind::Ac)))
            .collect();
        for p in bench_pairwise(
            &named,
            BenchOptions {
                repeats: 1,
                parallel: false,
            },
        )? {
            println!("  {} -> {}: {:?}", p.left, p.right, p.record.stats);
        }
    }
    Ok(())
}
