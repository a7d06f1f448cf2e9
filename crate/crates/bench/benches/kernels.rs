//! Hot kernels on the synthetic triangle (5000 points).

use criterion::{criterion_group, criterion_main, Criterion};
use dvic_core::clustering::dist_to_better_embedded;
use dvic_core::datasets::synth_triangle;
use dvic_core::diffusion::DiffusionEmbedding;
use dvic_core::kde::kde_from_neighbors;
use dvic_core::spectral::{spectral_decompose_with, EigenSolver, DEFAULT_ELL, DEFAULT_TOL};
use dvic_core::unmixing::avmax;
use dvic_core::{MarkovGraph, NeighborTable};

const N: usize = 30;

fn kernels(c: &mut Criterion) {
    let (cloud, _) = synth_triangle(0).expect("triangle");
    let table = NeighborTable::build(&cloud, N).expect("knn");
    let graph = MarkovGraph::from_neighbors(&table, N);
    let dec = spectral_decompose_with(&graph, DEFAULT_ELL, DEFAULT_TOL, EigenSolver::Lanczos).expect("eigen");
    let density = kde_from_neighbors(&table, N, 0.1).expect("kde");
    let emb = DiffusionEmbedding::new(&dec, 4.0);

    let mut g = c.benchmark_group("triangle");
    g.sample_size(10);
    g.bench_function("knn_table", |b| b.iter(|| NeighborTable::build(&cloud, N).unwrap()));
    g.bench_function("markov_graph", |b| b.iter(|| MarkovGraph::from_neighbors(&table, N)));
    g.bench_function("lanczos", |b| {
        b.iter(|| spectral_decompose_with(&graph, DEFAULT_ELL, DEFAULT_TOL, EigenSolver::Lanczos).unwrap())
    });
    g.bench_function("kde", |b| b.iter(|| kde_from_neighbors(&table, N, 0.1).unwrap()));
    g.bench_function("dist_to_better", |b| b.iter(|| dist_to_better_embedded(density.values(), &emb)));
    g.bench_function("avmax_10_replicates", |b| b.iter(|| avmax(&cloud, 3, 10, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
