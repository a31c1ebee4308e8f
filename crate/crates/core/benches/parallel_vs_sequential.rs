use boundary_homology::bounds::{complexity_ratio_scan_with, linspace, ScanMode};
use boundary_homology::complex::{build_lslvr_filtration_with, local_scales_with};
use boundary_homology::datasets::{generate_two_circles, BoundaryDescriptor};
use boundary_homology::experiment::{experiment_sweep_with, SweepConfig};
use boundary_homology::graph::{build_knn_graph_with, build_radius_graph_with};
use boundary_homology::selection::labeled_diagram;
use boundary_homology::Execution;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn kernels(c: &mut Criterion) {
    let cloud =
        generate_two_circles(2000, 7, &BoundaryDescriptor::default_two_circles(), 0.0).unwrap();
    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("radius_graph", name), |b| {
            b.iter(|| build_radius_graph_with(&cloud, 0.65, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("knn_graph", name), |b| {
            b.iter(|| build_knn_graph_with(&cloud, 10, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("local_scales", name), |b| {
            b.iter(|| local_scales_with(&cloud, 3, exec).unwrap())
        });
        let scales = local_scales_with(&cloud, 3, Execution::Sequential).unwrap();
        g.bench_function(BenchmarkId::new("lslvr_filtration", name), |b| {
            b.iter(|| build_lslvr_filtration_with(&cloud, &scales, 1.5, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("labeled_diagram", name), |b| {
            b.iter(|| labeled_diagram(&cloud, 3, 1.5, exec).unwrap())
        });
        let grid = linspace(0.1, 0.7, 601);
        g.bench_function(BenchmarkId::new("complexity_scan", name), |b| {
            b.iter(|| complexity_ratio_scan_with(ScanMode::vary_tau(1e-10), &grid, 0.1, exec))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = SweepConfig::parse(
        "n = 600\nfraction = 0.25\nfraction = 0.5\nseed = 1\nseed = 2\nseed = 3\n",
    )
    .unwrap();
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| experiment_sweep_with(&cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels, sweep);
criterion_main!(benches);
