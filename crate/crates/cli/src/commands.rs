use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use gsim_core::sim::{
    batch_curve, batch_report, lower_bound_cycles, simulate_queries, ArchConfig, BatchPoint,
    BatchReport, QueryResult, WorkloadStats,
};
use gsim_core::workload::{generate_dataset, standard_workload, DatasetSpec};
use gsim_core::{
    load_graph, load_model, normalize_adjacency, random_model, reorder_edges, save_graph,
    save_model, simgnn_score, Datapath, Graph, GoldenModel, DEFAULT_DIMS, DEFAULT_K,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::manifest::{RunManifest, Stamped};
use crate::{Batch, Cli, Command, Compare, DatasetArgs, Format, GenData, Global, ModelCmd, Run};

const INDEX_FILE: &str = "index.json";

pub fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::GenData(a) => gen_data(g, a),
        Command::Run(a) => run(g, a),
        Command::Compare(a) => compare(g, a),
        Command::Batch(a) => batch(g, a),
        Command::Model(ModelCmd::New) => model_new(g),
        Command::Model(ModelCmd::Inspect { path }) => model_inspect(path),
    }
}

fn manifest(g: &Global, command: &str) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        datasets: Vec::new(),
        model: None,
        configs: vec![g.config.clone()],
        batch_sizes: Vec::new(),
        seed: g.seed,
        out: g.out.clone(),
        format: g.format,
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn load_config(spec: &str) -> Result<ArchConfig> {
    let mut cfg = ArchConfig::load(spec).with_context(|| format!("loading config {spec}"))?;
    if cfg.name.is_empty() {
        cfg.name = spec.to_string();
    }
    Ok(cfg)
}

fn model_or_random(path: Option<&Path>, seed: u64) -> Result<GoldenModel> {
    match path {
        Some(p) => load_model(p).with_context(|| format!("loading model {}", p.display())),
        None => Ok(random_model(seed, &DEFAULT_DIMS, DEFAULT_K)?),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetIndex {
    seed: u64,
    count: usize,
    node_mean: f64,
    edge_mean: f64,
    vocab: usize,
    graphs: Vec<String>,
}

fn gen_data(g: &Global, a: &GenData) -> Result<()> {
    let spec = DatasetSpec {
        seed: g.seed,
        count: a.count,
        node_mean: a.node_mean,
        edge_mean: a.edge_mean,
        vocab: a.vocab,
    };
    let graphs = generate_dataset(&spec)?;
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    let mut names = Vec::with_capacity(graphs.len());
    for (i, graph) in graphs.iter().enumerate() {
        let name = format!("graph_{i:05}.json");
        save_graph(graph, g.out.join(&name))?;
        names.push(name);
    }
    let index = DatasetIndex {
        seed: g.seed,
        count: graphs.len(),
        node_mean: a.node_mean,
        edge_mean: a.edge_mean,
        vocab: a.vocab,
        graphs: names,
    };
    let path = write(&g.out, INDEX_FILE, &(serde_json::to_string_pretty(&index)? + "\n"))?;
    println!("wrote {} graphs, index {}", graphs.len(), path.display());
    Ok(())
}

/// Query pairs of a dataset: consecutive graphs of the index.
fn load_queries(args: &DatasetArgs, seed: u64) -> Result<(Vec<(Graph, Graph)>, GoldenModel)> {
    let Some(path) = &args.dataset else {
        let (queries, model) = standard_workload()?;
        let model = match &args.model {
            Some(_) => model_or_random(args.model.as_deref(), seed)?,
            None => model,
        };
        return Ok((queries, model));
    };
    let index_path = if path.is_dir() { path.join(INDEX_FILE) } else { path.clone() };
    let text = fs::read_to_string(&index_path)
        .with_context(|| format!("reading dataset index {}", index_path.display()))?;
    let index: DatasetIndex = serde_json::from_str(&text)
        .with_context(|| format!("parsing dataset index {}", index_path.display()))?;
    let dir = index_path.parent().unwrap_or(Path::new("."));
    let graphs = index
        .graphs
        .iter()
        .map(|name| load_graph(dir.join(name)).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let mut it = graphs.into_iter();
    let mut queries = Vec::new();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        queries.push((a, b));
    }
    ensure!(!queries.is_empty(), "dataset {} holds no query pair", index_path.display());
    Ok((queries, model_or_random(args.model.as_deref(), seed)?))
}

#[derive(Serialize)]
struct RunBody<'a> {
    score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    golden_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_delta: Option<f64>,
    report: &'a gsim_core::CycleReport,
}

fn run(g: &Global, a: &Run) -> Result<()> {
    let mut m = manifest(g, "run");
    m.datasets = vec![a.g1.clone(), a.g2.clone()];
    m.model = a.model.clone();
    let g1 = load_graph(&a.g1)?;
    let g2 = load_graph(&a.g2)?;
    let model = model_or_random(a.model.as_deref(), g.seed)?;
    let cfg = load_config(&g.config)?;
    let r = gsim_core::simulate_query(&g1, &g2, &model, &cfg)?;
    println!("score {:.9}", r.score);
    println!("total_kernel_cycles {}", r.report.total_kernel_cycles);

    let golden = if g.validate {
        let gs = simgnn_score(&g1, &g2, &model)?;
        println!("golden {:.9}", gs);
        println!("abs_delta {:.3e}", (r.score - gs).abs());
        Some(gs)
    } else {
        None
    };
    match g.format {
        Format::Json => {
            let body = RunBody {
                score: r.score,
                golden_score: golden,
                abs_delta: golden.map(|gs| (r.score - gs).abs()),
                report: &r.report,
            };
            write(&g.out, "report.json", &Stamped::new(&m, body).to_json())?;
        }
        Format::Csv => {
            write(&g.out, "report.csv", &r.report.to_csv())?;
            write(&g.out, "manifest.json", &Stamped::new(&m, ()).to_json())?;
        }
    }
    if g.dump_edge_stream {
        for (name, graph) in [("edges_g1.csv", &g1), ("edges_g2.csv", &g2)] {
            let norm = normalize_adjacency::<Datapath>(graph);
            write(&g.out, name, &reorder_edges(&norm, cfg.lat_acc as usize).to_csv())?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct CompareRow {
    config: String,
    mode: gsim_core::Mode,
    mean_cycles: f64,
    mean_gcn_cycles: f64,
    speedup: f64,
    bubble_pct: f64,
    lower_bound_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_delta: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

fn compare(g: &Global, a: &Compare) -> Result<()> {
    ensure!(a.configs.len() >= 2, "compare needs at least two configs");
    let mut m = manifest(g, "compare");
    m.configs = a.configs.clone();
    m.datasets = a.data.dataset.iter().cloned().collect();
    m.model = a.data.model.clone();
    let (queries, model) = load_queries(&a.data, g.seed)?;
    let bounds_input = queries
        .iter()
        .map(|(x, y)| WorkloadStats::for_query(x, y, &model))
        .collect::<gsim_core::Result<Vec<_>>>()?;
    let golden = if g.validate {
        Some(
            queries
                .iter()
                .map(|(x, y)| simgnn_score(x, y, &model))
                .collect::<gsim_core::Result<Vec<_>>>()?,
        )
    } else {
        None
    };

    let mut rows: Vec<CompareRow> = Vec::new();
    for spec in &a.configs {
        let cfg = load_config(spec)?;
        let results: Vec<QueryResult> = simulate_queries(&queries, &model, &cfg)?;
        let mean_cycles = mean(results.iter().map(|r| r.report.total_kernel_cycles as f64));
        let reference = rows.first().map_or(mean_cycles, |r| r.mean_cycles);
        rows.push(CompareRow {
            config: cfg.name.clone(),
            mode: cfg.mode,
            mean_cycles,
            mean_gcn_cycles: mean(results.iter().map(|r| r.report.gcn_cycles() as f64)),
            speedup: reference / mean_cycles,
            bubble_pct: 100.0 * mean(results.iter().map(|r| r.report.bubble_fraction())),
            lower_bound_ratio: mean(results.iter().zip(&bounds_input).map(|(r, s)| {
                r.report.total_kernel_cycles as f64 / lower_bound_cycles(s, &cfg).max(1) as f64
            })),
            max_abs_delta: golden.as_ref().map(|gs| {
                results
                    .iter()
                    .zip(gs)
                    .map(|(r, g)| (r.score - g).abs())
                    .fold(0.0, f64::max)
            }),
        });
    }

    let mut csv = String::from("config,mode,mean_cycles,mean_gcn_cycles,speedup,bubble_pct,lower_bound_ratio\n");
    let mut table = format!(
        "{:<12} {:<22} {:>12} {:>12} {:>8} {:>8} {:>9}\n",
        "config", "mode", "mean_cycles", "gcn_cycles", "speedup", "bubble%", "lb_ratio"
    );
    for r in &rows {
        let mode = serde_json::to_value(r.mode)?.as_str().unwrap_or_default().to_string();
        writeln!(
            csv,
            "{},{},{:.2},{:.2},{:.4},{:.3},{:.4}",
            r.config, mode, r.mean_cycles, r.mean_gcn_cycles, r.speedup, r.bubble_pct, r.lower_bound_ratio
        )?;
        writeln!(
            table,
            "{:<12} {:<22} {:>12.1} {:>12.1} {:>7.2}x {:>8.2} {:>9.3}",
            r.config, mode, r.mean_cycles, r.mean_gcn_cycles, r.speedup, r.bubble_pct, r.lower_bound_ratio
        )?;
    }
    print!("{table}");
    if let Some(d) = rows.iter().filter_map(|r| r.max_abs_delta).reduce(f64::max) {
        println!("max |score - golden| {d:.3e}");
    }
    write(&g.out, "compare.csv", &csv)?;
    let stamped = Stamped::new(&m, CompareBody { queries: queries.len(), rows });
    match g.format {
        Format::Json => write(&g.out, "compare.json", &stamped.to_json())?,
        Format::Csv => write(&g.out, "manifest.json", &Stamped::new(&m, ()).to_json())?,
    };
    Ok(())
}

#[derive(Serialize)]
struct CompareBody {
    queries: usize,
    rows: Vec<CompareRow>,
}

#[derive(Serialize)]
struct BatchBody {
    summary: BatchReport,
    curve: Vec<BatchPoint>,
}

fn batch(g: &Global, a: &Batch) -> Result<()> {
    if a.sizes.contains(&0) {
        bail!("batch sizes must be >= 1");
    }
    ensure!(!a.sizes.is_empty(), "no batch sizes given");
    let mut m = manifest(g, "batch");
    m.batch_sizes = a.sizes.clone();
    m.datasets = a.data.dataset.iter().cloned().collect();
    m.model = a.data.model.clone();
    let (queries, model) = load_queries(&a.data, g.seed)?;
    let cfg = load_config(&g.config)?;
    let kernel: Vec<u64> = simulate_queries(&queries, &model, &cfg)?
        .iter()
        .map(|r| r.report.total_kernel_cycles)
        .collect();
    let summary = batch_report(&kernel, &cfg, *a.sizes.iter().max().expect("non-empty"))?;
    let curve = batch_curve(summary.mean_kernel_cycles, cfg.invocation_overhead, &a.sizes);

    let mut csv = String::from("batch_size,avg_cycles_per_query,speedup_vs_batch1\n");
    for p in &curve {
        writeln!(csv, "{},{:.3},{:.4}", p.batch_size, p.avg_cycles_per_query, p.speedup_vs_batch1)?;
        println!(
            "batch {:>6}: {:>12.1} cycles/query  {:.3}x",
            p.batch_size, p.avg_cycles_per_query, p.speedup_vs_batch1
        );
    }
    println!(
        "mean kernel {:.1} cycles, overhead {} cycles, replication {}",
        summary.mean_kernel_cycles, summary.invocation_overhead, summary.replication
    );
    write(&g.out, "batch.csv", &csv)?;
    let stamped = Stamped::new(&m, BatchBody { summary, curve });
    match g.format {
        Format::Json => write(&g.out, "batch.json", &stamped.to_json())?,
        Format::Csv => write(&g.out, "manifest.json", &Stamped::new(&m, ()).to_json())?,
    };
    Ok(())
}

fn model_new(g: &Global) -> Result<()> {
    let model = random_model(g.seed, &DEFAULT_DIMS, DEFAULT_K)?;
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    let path = g.out.join("model.json");
    save_model(&model, &path)?;
    println!("wrote {}", path.display());
    model_inspect(&path)
}

fn model_inspect(path: &Path) -> Result<()> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let model = load_model(path)?;
    let params: usize = model.gcn.iter().map(|l| l.weight.as_slice().len() + l.bias.len()).sum::<usize>()
        + model.att.as_slice().len()
        + model.ntn_w.iter().map(|w| w.as_slice().len()).sum::<usize>()
        + model.ntn_v.as_slice().len()
        + model.ntn_b.len()
        + model.fcn.iter().map(|l| l.weight.as_slice().len() + l.bias.len()).sum::<usize>();
    let fcn: Vec<String> = model.fcn.iter().map(|l| format!("{}x{}", l.f_in(), l.f_out())).collect();
    println!("dims {:?}", model.dims());
    println!("ntn slices {} activation {:?}", model.k(), model.ntn_activation);
    println!("fcn {}", fcn.join(" "));
    println!("parameters {params}");
    println!("sha256 {}", hex::encode(Sha256::digest(&bytes)));
    Ok(())
}
