//! Benchmarks for the data-parallel kernels. Run `cargo bench` for the
//! rayon-backed paths and `cargo bench --no-default-features` for the
//! sequential fallback; the output names are identical so the two runs
//! compare directly.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use elladic::cli::bundled_field;
use elladic::criteria::survey_primes;
use elladic::field::hensel_embeddings;
use elladic::norms::BoundField;
use elladic::padic::PrecisionContext;
use elladic::poly::Polynomial;

#[cfg(feature = "parallel")]
const MODE: &str = "parallel";
#[cfg(not(feature = "parallel"))]
const MODE: &str = "sequential";

fn bench_hensel(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("hensel_lift/{MODE}"));
    let f = Polynomial::from_i64(&[1, 0, 0, 0, 1]); // x^4 + 1, ℓ = 17
    for precision in [64u32, 256, 1024] {
        let ctx = PrecisionContext::new(17, precision, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(precision), &ctx, |b, &ctx| {
            b.iter(|| hensel_embeddings(black_box(&f), ctx).unwrap())
        });
    }
    group.finish();
}

fn bench_log_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("log_matrix/{MODE}"));
    let (ell, file) = bundled_field("zeta8").unwrap();
    for precision in [32u32, 128, 512] {
        let ctx = PrecisionContext::new(ell, precision, 2).unwrap();
        let bound = BoundField::bind(file.to_spec().unwrap(), ctx).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(precision), &bound, |b, bound| {
            b.iter(|| bound.log_rows().unwrap())
        });
    }
    group.finish();
}

fn bench_survey(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("survey_primes/{MODE}"));
    let f = Polynomial::from_i64(&[1, 0, 0, 0, 1]);
    for bound in [5_000u64, 50_000] {
        group.bench_with_input(BenchmarkId::from_parameter(bound), &bound, |b, &bound| {
            b.iter(|| survey_primes(black_box(&f), 3, bound).unwrap())
        });
    }
    group.finish();
}

fn bench_us2_pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("us2_pipeline/{MODE}"));
    let (ell, file) = bundled_field("zeta8").unwrap();
    for precision in [12u32, 48] {
        let ctx = PrecisionContext::new(ell, precision, 2).unwrap();
        let bound = BoundField::bind(file.to_spec().unwrap(), ctx).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(precision), &bound, |b, bound| {
            b.iter(|| bound.us2().unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_hensel, bench_log_matrix, bench_survey, bench_us2_pipeline);
criterion_main!(benches);
