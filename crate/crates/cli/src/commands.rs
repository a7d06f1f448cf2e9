//! Subcommand implementations.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use dvic_core::clustering::{
    dvic_from_parts, kmeans, lund_from_parts, spectral_clustering, Algorithm, Clustering, DiffusionParams,
};
use dvic_core::datasets::{
    load_dataset, read_labels, synth_moons, synth_triangle, write_csv, Dataset, DatasetSpec, MoonsParams, Source,
};
use dvic_core::evaluation::{align_and_score, grid_search, n_grid, sigma_grid, GridSpec};
use dvic_core::graph::{MarkovGraph, NeighborTable};
use dvic_core::kde::kde_from_neighbors;
use dvic_core::spectral::{spectral_decompose, DEFAULT_TOL};
use dvic_core::unmixing::{unmix as unmix_cloud, EndmemberCount, UnmixingResult};
use serde_json::{json, Value};

use crate::output::{create_dir, write_json, write_labels_file, write_ppm, write_rows, write_text};
use crate::{AlgorithmArg, ClusterArgs, EvalArgs, GridArgs, InputArgs, SynthArgs, SynthKind, UnmixArgs};

/// Invalid command-line configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn algorithm(a: AlgorithmArg) -> Algorithm {
    match a {
        AlgorithmArg::Lund => Algorithm::Lund,
        AlgorithmArg::Dvic => Algorithm::Dvic,
        AlgorithmArg::Kmeans => Algorithm::Kmeans,
        AlgorithmArg::Spectral => Algorithm::Spectral,
    }
}

fn load(input: &InputArgs) -> Result<Dataset> {
    let path = &input.input;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let spec = match ext.as_deref() {
        Some("toml") => DatasetSpec::from_file(path)?,
        Some("hdr") => DatasetSpec {
            band_drop: input.band_drop.clone(),
            standardize: input.standardize,
            ..DatasetSpec::new(Source::Envi {
                path: path.clone(),
                labels: input.labels.clone(),
            })
        },
        _ => DatasetSpec {
            band_drop: input.band_drop.clone(),
            standardize: input.standardize,
            ..DatasetSpec::new(Source::Csv { path: path.clone() })
        },
    };
    Ok(load_dataset(&spec)?)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn summary(values: &[f64]) -> Value {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    json!({ "min": min, "mean": mean, "max": max })
}

fn unmixing_json(u: &UnmixingResult) -> Value {
    json!({
        "m": u.m,
        "endmember_indices": u.endmember_indices,
        "volume": u.volume,
        "noise_method": u.noise_method,
        "seed": u.seed,
        "purity": summary(u.purity()),
        "uniform_rows": u.abundances.uniform_rows.len(),
    })
}

pub fn synth(a: SynthArgs) -> Result<()> {
    create_dir(&a.out)?;
    let mut files = vec!["data.csv", "truth.csv"];
    let (cloud, params) = match a.kind {
        SynthKind::Triangle => {
            let (cloud, truth) = synth_triangle(a.seed)?;
            let rows: Vec<Vec<String>> = truth
                .abundances
                .chunks_exact(3)
                .map(|r| r.iter().map(f64::to_string).collect())
                .collect();
            write_rows(&a.out.join("abundances.csv"), &["a1", "a2", "a3"], &rows)?;
            files.push("abundances.csv");
            (cloud, json!({ "endmembers": truth.endmembers }))
        }
        SynthKind::Moons => {
            let p = MoonsParams {
                n: a.n,
                noise: a.noise,
                ..MoonsParams::default()
            };
            (synth_moons(&p, a.seed)?, serde_json::to_value(p)?)
        }
    };
    let kind = format!("{:?}", a.kind).to_ascii_lowercase();
    write_csv(&a.out.join("data.csv"), &cloud)?;
    let record = json!({ "kind": kind, "seed": a.seed });
    write_labels_file(&a.out.join("truth.csv"), cloud.labels().expect("synthetic data is labeled"), &record)?;
    files.push("manifest.json");
    write_json(
        &a.out.join("manifest.json"),
        &json!({
            "command": "synth",
            "kind": kind,
            "seed": a.seed,
            "n": cloud.len(),
            "dim": cloud.dim(),
            "params": params,
            "files": files,
        }),
    )?;
    println!("wrote {} points to {}", cloud.len(), a.out.display());
    Ok(())
}

pub fn cluster(a: ClusterArgs) -> Result<()> {
    let alg = algorithm(a.algorithm);
    let mut timings = serde_json::Map::new();
    let start = Instant::now();
    let ds = load(&a.input)?;
    let cloud = &ds.cloud;
    timings.insert("load".into(), json!(millis(start)));
    create_dir(&a.out)?;

    let mut unmixing = None;
    let clustering: Clustering = match alg {
        Algorithm::Lund | Algorithm::Dvic => {
            let mut params = DiffusionParams::new(a.n_neighbors, a.sigma0, a.t, a.k);
            params.ell = a.ell;
            params.validate(cloud.len())?;
            let s = Instant::now();
            let table = NeighborTable::build(cloud, a.n_neighbors)?;
            let graph = MarkovGraph::from_neighbors(&table, a.n_neighbors);
            timings.insert("graph".into(), json!(millis(s)));
            let s = Instant::now();
            let dec = spectral_decompose(&graph, a.ell.min(cloud.len()), DEFAULT_TOL)?;
            timings.insert("eigen".into(), json!(millis(s)));
            let s = Instant::now();
            let density = kde_from_neighbors(&table, a.n_neighbors, a.sigma0)?;
            timings.insert("kde".into(), json!(millis(s)));
            let mut c = if alg == Algorithm::Dvic {
                let s = Instant::now();
                let count = a.m.map_or(EndmemberCount::Hysime, EndmemberCount::Fixed);
                let u = unmix_cloud(cloud, count, a.replicates, a.seed)?;
                timings.insert("unmix".into(), json!(millis(s)));
                let s = Instant::now();
                let c = dvic_from_parts(density.values(), u.purity(), &dec, a.t, a.k)?;
                timings.insert("modes_and_labels".into(), json!(millis(s)));
                unmixing = Some(u);
                c
            } else {
                let s = Instant::now();
                let c = lund_from_parts(density.values(), &dec, a.t, a.k)?;
                timings.insert("modes_and_labels".into(), json!(millis(s)));
                c
            };
            c.params.n_neighbors = Some(a.n_neighbors);
            c.params.n_kde = Some(a.n_neighbors);
            c.params.sigma0 = Some(a.sigma0);
            if let Some(u) = &unmixing {
                c.params.replicates = Some(a.replicates);
                c.params.seed = Some(a.seed);
                c.params.m = Some(u.m);
            }
            c
        }
        Algorithm::Kmeans => {
            let s = Instant::now();
            let c = kmeans(cloud, a.k, a.replicates, a.seed)?;
            timings.insert("kmeans".into(), json!(millis(s)));
            c
        }
        Algorithm::Spectral => {
            let s = Instant::now();
            let graph = MarkovGraph::build(cloud, a.n_neighbors)?;
            timings.insert("graph".into(), json!(millis(s)));
            let s = Instant::now();
            let c = spectral_clustering(&graph, a.k, a.replicates, a.seed)?;
            timings.insert("eigen_and_kmeans".into(), json!(millis(s)));
            c
        }
    };

    let record = serde_json::to_value(&clustering.params)?;
    write_labels_file(&a.out.join("labels.csv"), &clustering.labels, &record)?;
    let mode_rows: Vec<Vec<String>> = clustering
        .modes
        .iter()
        .enumerate()
        .map(|(k, &i)| vec![(k + 1).to_string(), i.to_string()])
        .collect();
    write_rows(&a.out.join("modes.csv"), &["label", "index"], &mode_rows)?;
    write_diagnostics(&a.out.join("diagnostics.csv"), &clustering)?;

    let map = match cloud.shape() {
        Some((rows, cols)) => {
            write_ppm(&a.out.join("map.ppm"), rows, cols, &clustering.labels)?;
            json!("map.ppm")
        }
        None => {
            log::info!("input has no spatial shape; cluster map skipped");
            Value::Null
        }
    };
    let evaluation = match cloud.labels() {
        Some(truth) if truth.iter().any(|&l| l != 0) => {
            let r = align_and_score(&clustering.labels, truth)?;
            json!({ "oa": r.oa, "kappa": r.kappa, "n_eval": r.n_eval })
        }
        _ => Value::Null,
    };
    timings.insert("total".into(), json!(millis(start)));
    write_json(
        &a.out.join("report.json"),
        &json!({
            "command": "cluster",
            "algorithm": alg,
            "input": a.input.input,
            "n": cloud.len(),
            "dim": cloud.dim(),
            "preprocessing": ds.preprocessing,
            "params": record,
            "seed": a.seed,
            "modes": clustering.modes,
            "unmixing": unmixing.as_ref().map(unmixing_json),
            "evaluation": evaluation,
            "map": map,
            "timings_ms": timings,
        }),
    )?;
    println!("{alg}: {} points, {} clusters -> {}", cloud.len(), clustering.k, a.out.display());
    if let Some(oa) = evaluation.get("oa") {
        println!("OA {oa}");
    }
    Ok(())
}

fn write_diagnostics(path: &Path, c: &Clustering) -> Result<()> {
    let mut header = vec!["index", "label"];
    let mut cols: Vec<&[f64]> = Vec::new();
    if let Some(s) = &c.score {
        header.extend(["value", "dist_to_better", "score"]);
        cols.extend([s.value_fn.as_slice(), s.dist_fn.as_slice(), s.product.as_slice()]);
    }
    if let Some(d) = &c.density {
        header.push("density");
        cols.push(d);
    }
    if let Some(p) = &c.purity {
        header.push("purity");
        cols.push(p);
    }
    let rows: Vec<Vec<String>> = (0..c.labels.len())
        .map(|i| {
            let mut r = vec![i.to_string(), c.labels[i].to_string()];
            r.extend(cols.iter().map(|col| col[i].to_string()));
            r
        })
        .collect();
    write_rows(path, &header, &rows)
}

pub fn unmix(a: UnmixArgs) -> Result<()> {
    let ds = load(&a.input)?;
    let cloud = &ds.cloud;
    create_dir(&a.out)?;
    let start = Instant::now();
    let count = a.m.map_or(EndmemberCount::Hysime, EndmemberCount::Fixed);
    let u = unmix_cloud(cloud, count, a.replicates, a.seed)?;
    let elapsed = millis(start);

    let dim = cloud.dim();
    let band_names: Vec<String> = (0..dim).map(|j| format!("b{j}")).collect();
    let mut header = vec!["index"];
    header.extend(band_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = u
        .endmember_indices
        .iter()
        .zip(u.endmembers.chunks_exact(dim))
        .map(|(i, row)| std::iter::once(i.to_string()).chain(row.iter().map(f64::to_string)).collect())
        .collect();
    write_rows(&a.out.join("endmembers.csv"), &header, &rows)?;

    let ab_names: Vec<String> = (1..=u.m).map(|j| format!("a{j}")).collect();
    let mut header: Vec<&str> = ab_names.iter().map(String::as_str).collect();
    header.push("purity");
    let rows: Vec<Vec<String>> = (0..cloud.len())
        .map(|i| {
            let mut r: Vec<String> = u.abundances.row(i).iter().map(f64::to_string).collect();
            r.push(u.purity()[i].to_string());
            r
        })
        .collect();
    write_rows(&a.out.join("abundances.csv"), &header, &rows)?;
    write_json(
        &a.out.join("report.json"),
        &json!({
            "command": "unmix",
            "input": a.input.input,
            "n": cloud.len(),
            "dim": dim,
            "preprocessing": ds.preprocessing,
            "replicates": a.replicates,
            "seed": a.seed,
            "requested_m": a.m,
            "unmixing": unmixing_json(&u),
            "replicate_volumes": u.replicate_volumes,
            "timings_ms": { "unmix": elapsed },
        }),
    )?;
    println!("m = {}, endmembers at {:?}", u.m, u.endmember_indices);
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let pred = read_labels(&a.pred)?;
    let truth = read_labels(&a.truth)?;
    let r = align_and_score(&pred, &truth)?;
    println!("OA {:.6}", r.oa);
    println!("kappa {:.6}", r.kappa);
    println!("evaluated {}", r.n_eval);
    let mut table = String::from("confusion (rows: predicted");
    for c in &r.clusters {
        table.push_str(&format!(" {c}"));
    }
    table.push_str("; columns: truth");
    for c in &r.classes {
        table.push_str(&format!(" {c}"));
    }
    table.push_str(")\n");
    for row in &r.confusion {
        table.push_str(&row.iter().map(u64::to_string).collect::<Vec<_>>().join(" "));
        table.push('\n');
    }
    print!("{table}");
    if let Some(out) = &a.out {
        write_json(out, &serde_json::to_value(&r)?)?;
    }
    Ok(())
}

fn read_grid_spec(path: &Path) -> Result<GridSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
    };
    Ok(spec)
}

pub fn gridsearch(a: GridArgs) -> Result<()> {
    let alg = algorithm(a.algorithm);
    let ds = load(&a.input)?;
    let cloud = &ds.cloud;
    let truth = cloud
        .labels()
        .ok_or_else(|| ConfigError("grid search needs ground-truth labels in the input".into()))?;
    let spec = match &a.grid {
        Some(path) => read_grid_spec(path)?,
        None => {
            let k = match a.k {
                Some(k) => k,
                None => {
                    let mut classes: Vec<u32> = truth.iter().copied().filter(|&l| l != 0).collect();
                    classes.sort_unstable();
                    classes.dedup();
                    classes.len()
                }
            };
            let n_max = a.n_max.min(cloud.len() - 1);
            let ns = n_grid(a.n_min.min(n_max), n_max, a.n_count)?;
            let sigmas = match alg {
                Algorithm::Lund | Algorithm::Dvic => sigma_grid(cloud, a.sigma_count)?,
                _ => Vec::new(),
            };
            let mut spec = GridSpec::new(ns, sigmas, k);
            spec.t_grid = (!a.t.is_empty()).then(|| a.t.clone());
            spec.trials = a.trials;
            spec.seed = a.seed;
            spec.ell = a.ell;
            spec.replicates = a.replicates;
            spec
        }
    };
    create_dir(&a.out)?;
    let start = Instant::now();
    let report = grid_search(alg, cloud, &spec)?;
    let elapsed = millis(start);
    let mut value = serde_json::to_value(&report)?;
    value["input"] = json!(a.input.input);
    value["preprocessing"] = serde_json::to_value(&ds.preprocessing)?;
    value["best_oa"] = json!(report.best_oa());
    value["timings_ms"] = json!({ "search": elapsed });
    write_json(&a.out.join("grid.json"), &value)?;

    let failed = report.nodes.iter().filter(|n| n.error.is_some()).count();
    match report.best_node() {
        Some(b) => println!(
            "{alg}: best median OA {:.4} at N={:?} sigma0={:?} t={:?} ({} nodes, {failed} failed)",
            b.median_oa.unwrap_or(f64::NAN),
            b.n_neighbors,
            b.sigma0,
            b.t,
            report.nodes.len()
        ),
        None => println!("{alg}: every node failed ({} nodes)", report.nodes.len()),
    }
    write_text(&a.out.join("best.txt"), &format!("{}\n", report.best_oa().unwrap_or(f64::NAN)))?;
    Ok(())
}
