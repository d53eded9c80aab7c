use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pacvd_core::abstraction::{abstract_target, AbstractionLevel, EngineOptions};
use pacvd_core::catalog::default_catalog;
use pacvd_core::eval::Similarity;
use pacvd_core::frontend::{parse_unit_str, SourceUnit};
use pacvd_core::graphs::{build_cfg, enumerate_acyclic_paths};

const SG: &str = include_str!("../../pacvd-core/fixtures/listing1/sg.c");
const BLOCK: &str = include_str!("../../pacvd-core/fixtures/listing1/block.c");

fn listing1_units() -> Vec<SourceUnit> {
    vec![
        parse_unit_str("sg.c", SG).unwrap(),
        parse_unit_str("block.c", BLOCK).unwrap(),
    ]
}

fn diamond_source(k: usize) -> String {
    let mut body = String::new();
    for i in 0..k {
        body.push_str(&format!("if (a) t{i}(); else e{i}();\n"));
    }
    format!("void f(int a) {{\n{body}}}\n")
}

fn bench_parse(c: &mut Criterion) {
    c.bench_function("parse_listing1", |b| {
        b.iter(|| {
            let units = listing1_units();
            black_box(units.len())
        })
    });
}

fn bench_abstract(c: &mut Criterion) {
    let units = listing1_units();
    let catalog = default_catalog();
    let opts = EngineOptions {
        depth_limit: 4,
        ..EngineOptions::default()
    };
    for level in [AbstractionLevel::A1, AbstractionLevel::A4] {
        c.bench_function(&format!("abstract_listing1_{level}"), |b| {
            b.iter(|| {
                let report =
                    abstract_target(&units, "sg_common_write", &catalog, level, &opts).unwrap();
                black_box(report.rendered.len())
            })
        });
    }
}

fn bench_paths(c: &mut Criterion) {
    let source = diamond_source(10);
    let unit = parse_unit_str("d.c", &source).unwrap();
    let cfg = build_cfg(&unit.functions[0]);
    c.bench_function("enumerate_paths_10_diamonds", |b| {
        b.iter(|| {
            let ps = enumerate_acyclic_paths(&cfg, 1 << 12);
            black_box(ps.paths.len())
        })
    });
}

fn bench_similarity(c: &mut Criterion) {
    let corpus: Vec<String> = (0..16)
        .map(|i| format!("void helper_{i}(int *p, int n) {{ use_{i}(p, n); free(p); }}"))
        .collect();
    let sim = Similarity::new(corpus);
    c.bench_function("similarity_16_callees", |b| {
        b.iter(|| {
            let mut total = 0.0;
            for i in 0..sim.len() {
                total += sim.score(SG, i);
            }
            black_box(total)
        })
    });
}

criterion_group!(benches, bench_parse, bench_abstract, bench_paths, bench_similarity);
criterion_main!(benches);
