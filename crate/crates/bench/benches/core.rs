use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use viramem_core::corpus::load_corpus;
use viramem_core::distinct::{pearson_distance_matrix, DistanceOptions};
use viramem_core::features::RowMatrix;
use viramem_core::sentiment::{score_text, SentimentRuleset};
use viramem_core::stats::{glm_fit, Design, Family, GlmOptions};
use viramem_core::textprep::{extract_nouns, LexiconSet};

fn comments() -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/synthetic/corpus.ndjson");
    let records = load_corpus(&path).expect("synthetic corpus");
    records.into_iter().flat_map(|r| r.top_comments.into_iter().map(|c| c.body)).collect()
}

fn distance(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = c.benchmark_group("pearson_distance_matrix");
    group.sample_size(10);
    for (n, d) in [(100usize, 4096usize), (300, 4096)] {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let m = RowMatrix::from_rows(&rows);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{d}")), &m, |b, m| {
            b.iter(|| pearson_distance_matrix(m, &DistanceOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn nb_fit(c: &mut Criterion) {
    let n = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut data = Vec::with_capacity(n * 3);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (x1, x2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        data.extend([1.0, x1, x2]);
        let mu = (1.0 + 0.5 * x1 - 0.3 * x2).exp();
        let lambda: f64 = Gamma::new(2.0, 0.5 * mu).unwrap().sample(&mut rng);
        y.push(Poisson::new(lambda.max(1e-12)).unwrap().sample(&mut rng));
    }
    let names = ["intercept", "x1", "x2"].iter().map(|s| s.to_string()).collect();
    let design = Design::new(names, DMatrix::from_row_slice(n, 3, &data)).unwrap();
    c.bench_function("glm_fit negative binomial n=2000", |b| {
        b.iter(|| glm_fit(&design, &y, Family::NegativeBinomial, &GlmOptions::default()).unwrap())
    });
}

fn text(c: &mut Criterion) {
    let comments = comments();
    let rules = SentimentRuleset::default();
    let lex = LexiconSet::bundled();
    c.bench_function("score_text synthetic corpus", |b| {
        b.iter(|| comments.iter().map(|t| score_text(t, &rules).compound).sum::<f64>())
    });
    c.bench_function("extract_nouns synthetic corpus", |b| {
        b.iter(|| comments.iter().map(|t| extract_nouns(t, &lex).len()).sum::<usize>())
    });
}

criterion_group!(benches, distance, nb_fit, text);
criterion_main!(benches);
