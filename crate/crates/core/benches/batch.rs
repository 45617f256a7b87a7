use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use maxfilter_core::embedding::embed_batch;
use maxfilter_core::rng;
use maxfilter_core::stability::{estimate_bilipschitz, SamplerConfig};
use maxfilter_core::{BispectrumEmbedding, Execution, FrequencyProfile, GroupAction, MaxFilterBank};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch_embed(c: &mut Criterion) {
    let action = GroupAction::circle(vec![1, 2, 3, 5]).unwrap();
    let bank = MaxFilterBank::generate(action.clone(), None, 1, Default::default()).unwrap();
    let mut r = rng::substream(7, rng::DATASET);
    let points: Vec<Vec<f64>> = (0..512).map(|_| rng::gaussian_vec(&mut r, action.dim_real(), 1.0)).collect();

    let mut g = c.benchmark_group("maxfilter_embed_512");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| embed_batch(&bank, black_box(&points), exec).unwrap())
        });
    }
    g.finish();

    let profile = FrequencyProfile::new(vec![(0, 2), (1, 2), (2, 2), (3, 2)]).unwrap();
    let bisp = BispectrumEmbedding::new(&profile, false);
    let points: Vec<Vec<f64>> = (0..2048).map(|_| rng::gaussian_vec(&mut r, 2 * profile.dim(), 1.0)).collect();
    let mut g = c.benchmark_group("bispectrum_embed_2048");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| embed_batch(&bisp, black_box(&points), exec).unwrap())
        });
    }
    g.finish();
}

fn stability_sampler(c: &mut Criterion) {
    let action = GroupAction::circle(vec![1, 2]).unwrap();
    let bank = MaxFilterBank::generate(action.clone(), None, 3, Default::default()).unwrap();
    let cfg = SamplerConfig::default();
    let mut g = c.benchmark_group("bilipschitz_256_pairs");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| estimate_bilipschitz(&bank, &action, &cfg, 256, 5, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, batch_embed, stability_sampler);
criterion_main!(benches);
