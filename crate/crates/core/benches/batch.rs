use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bienayme::exec::Executor;
use bienayme::kernel::preset;
use bienayme::sampler::{run_batch, BatchRequest, Method, SampleBudget};

fn request(method: Method, n: u64) -> BatchRequest {
    BatchRequest {
        method,
        n: Some(n),
        types: Vec::new(),
        targets: Vec::new(),
        replicates: 64,
        seed: 1,
        first_stream: 0,
        budget: SampleBudget::default(),
    }
}

fn batches(c: &mut Criterion) {
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(2);
    let executors = [
        ("sequential", Executor::sequential()),
        ("parallel", Executor::with_threads(threads).unwrap()),
    ];
    let cases = [
        ("monotype_binary", Method::Exact, 10_001),
        ("two_type", Method::Exact, 10_000),
        ("monotype_binary", Method::Rejection, 101),
    ];
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    for (family, method, n) in cases {
        let fam = preset(family).unwrap();
        let req = request(method, n);
        for (label, exec) in &executors {
            let id = BenchmarkId::new(format!("{family}/{method:?}/{n}"), label);
            group.bench_function(id, |b| b.iter(|| run_batch(&fam, &req, exec).unwrap()));
        }
    }
    group.finish();
}

criterion_group!(benches, batches);
criterion_main!(benches);
