use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ce_bench::{positive_rows, synthetic_credit};
use ce_core::causal::{explain_counter, explain_resp, RespConfig};
use ce_core::classifier::Monotone2Cnf;
use ce_core::shapley::{kernel_shap, shap_hardness_check, KernelSamples, ShapExplainer, ShapOptions};
use ce_core::tabular::ProductSpace;

fn causal(c: &mut Criterion) {
    let (ds, model) = synthetic_credit();
    let space = ProductSpace::new(&ds);
    let entities = positive_rows(&ds, &model, 16);
    let mut group = c.benchmark_group("causal");
    group.bench_function("counter", |b| {
        b.iter(|| {
            for e in &entities {
                black_box(explain_counter(&space, &model, e, &RespConfig::default()).unwrap());
            }
        })
    });
    for gamma in [1, 2] {
        let cfg = RespConfig { max_contingency: gamma, ..RespConfig::default() };
        group.bench_with_input(BenchmarkId::new("resp", gamma), &cfg, |b, cfg| {
            b.iter(|| {
                for e in &entities {
                    black_box(explain_resp(&space, &model, e, cfg).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn shapley(c: &mut Criterion) {
    let (ds, model) = synthetic_credit();
    let explainer = ShapExplainer::new(&ds, &model).unwrap();
    let entities = positive_rows(&ds, &model, 16);
    let mut group = c.benchmark_group("shap");
    group.bench_function("empirical", |b| {
        b.iter(|| {
            for e in &entities {
                black_box(explainer.explain(e, &ShapOptions::default()).unwrap());
            }
        })
    });
    for samples in [KernelSamples::Exhaustive, KernelSamples::Count(64)] {
        let label = match samples {
            KernelSamples::Exhaustive => "exhaustive".to_string(),
            KernelSamples::Count(m) => m.to_string(),
        };
        group.bench_with_input(BenchmarkId::new("kernel", label), &samples, |b, &samples| {
            b.iter(|| {
                for (i, e) in entities.iter().enumerate() {
                    black_box(kernel_shap(&explainer, e, samples, i as u64).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduction");
    group.sample_size(10);
    for n in [8, 10, 12] {
        let clauses = (0..n - 1).map(|i| (i, i + 1)).collect();
        let f = Monotone2Cnf::new(n, clauses).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| shap_hardness_check(f).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, causal, shapley, reduction);
criterion_main!(benches);
