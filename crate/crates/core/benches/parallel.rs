use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paramsep::crypto::{ots_forge, ots_gen, ToyHash};
use paramsep::harness::{build_c1_classifier, run_c1, stream_rng, train_c1, AttackSpec, LearnerKind};
use paramsep::tasks::{Fixture1, Preset, Secret1, Task1};
use paramsep::Exec;

const BACKENDS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn trials(c: &mut Criterion) {
    let Preset::C1(p) = Preset::get("c1-small").unwrap() else { unreachable!() };
    let task = Task1::new(p).unwrap();
    let secret = Secret1::draw(&task, Fixture1::UniformQ, &mut stream_rng(1, "secret", 0));
    let samples = train_c1(&task, &secret, 399, 1);
    let (_, clf) = build_c1_classifier(&task, &secret, &samples, LearnerKind::Efficient, None, None, Exec::Sequential).unwrap();
    let attacks = [AttackSpec::none(), AttackSpec::noise_plant()];
    let mut g = c.benchmark_group("run_c1/1000");
    g.sample_size(10);
    for (name, exec) in BACKENDS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_c1(&task, &secret, std::slice::from_ref(&clf), &attacks, 1000, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn forge(c: &mut Criterion) {
    let keys = ots_gen(ToyHash::new(20).unwrap(), &mut stream_rng(2, "secret", 0));
    let mut g = c.benchmark_group("ots_forge/2^20");
    g.sample_size(10);
    for (name, exec) in BACKENDS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| ots_forge(black_box(&keys.vk), true, 1 << 20, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, trials, forge);
criterion_main!(benches);
