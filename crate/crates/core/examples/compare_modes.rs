//! Mean kernel cycles of the three shipped presets on the standard workload.

use gsim_core::sim::{ft_bounds, simulate_queries, ArchConfig, WorkloadStats};
use gsim_core::workload::standard_workload;

fn main() -> gsim_core::Result<()> {
    let (queries, model) = standard_workload()?;
    let graphs: Vec<_> = queries.iter().flat_map(|(a, b)| [a, b]).collect();
    let stats = WorkloadStats::measure(&graphs, &model)?;
    println!(
        "input sparsity per layer: {:.3} {:.3} {:.3}",
        stats.input_sparsity(0),
        stats.input_sparsity(1),
        stats.input_sparsity(2)
    );
    let mut first = None;
    for name in ["baseline", "pipelined", "sparse"] {
        let cfg = ArchConfig::preset(name).expect("preset");
        let results = simulate_queries(&queries, &model, &cfg)?;
        let mean = results.iter().map(|r| r.report.total_kernel_cycles).sum::<u64>() as f64
            / results.len() as f64;
        let gcn = results.iter().map(|r| r.report.gcn_cycles()).sum::<u64>() as f64
            / results.len() as f64;
        let base = *first.get_or_insert(mean);
        let ft: u64 = results
            .iter()
            .map(|r| r.report.layers.iter().map(|l| l.ft_cycles()).sum::<u64>())
            .sum();
        let bound: u64 = ft_bounds(&stats, &cfg).iter().sum();
        println!(
            "{name:>10}: mean kernel {mean:9.1}  mean gcn {gcn:9.1}  speedup {:.2}x  ft/bound {:.3}",
            base / mean,
            ft as f64 / bound as f64,
        );
    }
    Ok(())
}
