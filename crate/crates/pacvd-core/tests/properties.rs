//! Property and oracle-equivalence tests over generated inputs.

mod support;

use proptest::prelude::*;

use pacvd_core::catalog::{default_catalog, load_catalog, serialize_catalog};
use pacvd_core::frontend::{self, parse_unit, parse_unit_str};
use pacvd_core::gateway::parse_verdict;
use pacvd_core::graphs::{build_call_graph, build_cfg, enumerate_acyclic_paths};

use support::{oracle_paths, CorpusGen, ProgramGen};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The parser never panics: arbitrary bytes give a unit or an error.
    #[test]
    fn parser_total_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_unit("fuzz.c", &bytes);
    }

    /// Verdict parsing is total and deterministic.
    #[test]
    fn verdict_parse_total(text in ".{0,200}") {
        let a = parse_verdict(&text);
        let b = parse_verdict(&text);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn call_extraction_matches_token_oracle() {
    // token-level oracle: identifiers immediately followed by `(`,
    // excluding control keywords, inside the function body
    const KEYWORDS: [&str; 8] = ["if", "while", "for", "switch", "return", "case", "do", "goto"];
    for seed in 0..100u64 {
        let mut gen = ProgramGen::new(seed);
        let source = gen.function("probe");
        let body_start = source.find('{').unwrap();
        let toks = pacvd_core::eval::tokenize(&source[body_start..]);
        let mut expected = 0usize;
        for w in toks.windows(2) {
            let first_char = w[0].chars().next().unwrap_or(' ');
            if w[1] == "("
                && (first_char.is_alphabetic() || first_char == '_')
                && !KEYWORDS.contains(&w[0].as_str())
            {
                expected += 1;
            }
        }
        let unit = parse_unit_str("gen.c", &source).expect("generated program parses");
        let calls = frontend::extract_calls(&unit.functions[0]);
        assert_eq!(calls.len(), expected, "seed {seed}:\n{source}");
    }
}

#[test]
fn round_trip_stability_over_generated_programs() {
    for seed in 0..100u64 {
        let mut gen = ProgramGen::new(seed ^ 0x5eed);
        let source = gen.function("rt");
        let unit = parse_unit_str("gen.c", &source).expect("parses");
        let printed = frontend::print::render_unit(&unit);
        let reparsed = parse_unit_str("gen.c", &printed).expect("printed output parses");
        assert_eq!(unit.functions[0].name, reparsed.functions[0].name);
        assert_eq!(unit.functions[0].params, reparsed.functions[0].params);
        assert_eq!(
            unit.functions[0].body, reparsed.functions[0].body,
            "seed {seed}:\n{source}\n--- printed ---\n{printed}"
        );
    }
}

#[test]
fn series_parallel_diamonds_have_two_to_the_k_paths() {
    for k in 1..=10usize {
        let mut body = String::new();
        for i in 0..k {
            body.push_str(&format!("if (a) t{i}(); else e{i}();\n"));
        }
        let source = format!("void f(int a) {{\n{body}}}\n");
        let unit = parse_unit_str("d.c", &source).unwrap();
        let cfg = build_cfg(&unit.functions[0]);
        let ps = enumerate_acyclic_paths(&cfg, 1 << 12);
        assert!(!ps.overflowed);
        assert_eq!(ps.paths.len(), 1 << k, "k = {k}");
    }
}

#[test]
fn path_enumeration_matches_independent_oracle() {
    for seed in 200..260u64 {
        let mut gen = ProgramGen::new(seed);
        let source = gen.function("pp");
        let unit = parse_unit_str("gen.c", &source).unwrap();
        let cfg = build_cfg(&unit.functions[0]);
        let ours = enumerate_acyclic_paths(&cfg, 4096);
        if ours.overflowed {
            continue;
        }
        let oracle = oracle_paths(&cfg, 8192);
        let mut a: Vec<Vec<usize>> = ours
            .paths
            .iter()
            .map(|p| p.iter().map(|b| b.0).collect())
            .collect();
        let mut b: Vec<Vec<usize>> = oracle
            .iter()
            .map(|p| p.iter().map(|x| x.0).collect())
            .collect();
        a.sort();
        b.sort();
        assert_eq!(a, b, "seed {seed}");
    }
}

#[test]
fn call_graph_depths_match_bfs_recomputation() {
    use std::collections::{BTreeMap, VecDeque};
    for seed in 0..50u64 {
        let mut gen = CorpusGen::new(seed);
        let corpus = gen.corpus(6);
        let unit = parse_unit_str("corpus.c", &corpus.source).unwrap();
        let graph = build_call_graph(&[unit], &corpus.target, 3).unwrap();

        // independent BFS over the graph's own edges
        let mut depth: BTreeMap<&str, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        depth.insert(&corpus.target, 0);
        queue.push_back(corpus.target.as_str());
        while let Some(cur) = queue.pop_front() {
            let d = depth[cur];
            for (caller, callee, _) in &graph.edges {
                if caller == cur && !depth.contains_key(callee.as_str()) {
                    depth.insert(callee, d + 1);
                    queue.push_back(callee);
                }
            }
        }
        for (name, d) in &graph.depth {
            assert_eq!(depth.get(name.as_str()), Some(d), "seed {seed}, node {name}");
            assert!(*d <= 3);
        }
        for (caller, callee, _) in &graph.edges {
            assert!(
                graph.depth[callee] <= graph.depth[caller] + 1,
                "depth invariant broken at ({caller}, {callee})"
            );
        }
    }
}

#[test]
fn catalog_round_trip_over_generated_catalogs() {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let categories = [
        "memory-alloc",
        "memory-free",
        "file-open",
        "file-close",
        "lock",
        "unlock",
        "other-resource",
    ];
    for _ in 0..50 {
        let n = rng.gen_range(0..8);
        let mut doc = String::from("version gen\n");
        let mut names = Vec::new();
        for i in 0..n {
            let name = format!("api_{i}");
            let cat = categories[rng.gen_range(0..categories.len())];
            let mut line = format!("api {name} {cat}");
            if i > 0 && rng.gen_bool(0.3) {
                line.push_str(&format!(" canonical=api_{}", rng.gen_range(0..i)));
            }
            if rng.gen_bool(0.3) {
                line.push_str(&format!(" cwe=CWE-{}", 400 + rng.gen_range(0..20)));
            }
            doc.push_str(&line);
            doc.push('\n');
            names.push(name);
        }
        if names.len() >= 2 {
            doc.push_str(&format!("pair {} {}\n", names[0], names[1]));
        }
        let catalog = load_catalog(&doc).expect("generated doc valid");
        let text = serialize_catalog(&catalog);
        let back = load_catalog(&text).expect("serialized form valid");
        assert_eq!(catalog, back);
    }
}

#[test]
fn function_spans_are_in_bounds_and_disjoint() {
    for seed in 0..30u64 {
        let mut gen = CorpusGen::new(seed ^ 0x90a7);
        let corpus = gen.corpus(5);
        let unit = parse_unit_str("spans.c", &corpus.source).unwrap();
        let mut spans: Vec<(usize, usize)> = unit.functions.iter().map(|f| f.span).collect();
        for (start, end) in &spans {
            assert!(start < end);
            assert!(*end <= unit.text.len());
        }
        spans.sort();
        for pair in spans.windows(2) {
            assert!(pair[0].1 <= pair[1].0, "overlapping spans: {pair:?}");
        }
    }
}

#[test]
fn jaccard_and_edit_components_are_symmetric() {
    // BM25 is query/document asymmetric by construction and stays out of
    // this check
    let texts = [
        "int f(void) { free(p); return g(x); }",
        "void g(int *q) { use(q); }",
        "int f(void) { free(p); return g(x); }",
        "",
    ];
    for a in &texts {
        for b in &texts {
            let ta: std::collections::BTreeSet<String> =
                pacvd_core::eval::tokenize(a).into_iter().collect();
            let tb: std::collections::BTreeSet<String> =
                pacvd_core::eval::tokenize(b).into_iter().collect();
            assert_eq!(
                pacvd_core::eval::jaccard(&ta, &tb),
                pacvd_core::eval::jaccard(&tb, &ta)
            );
            let sa = pacvd_core::eval::tokenize(a);
            let sb = pacvd_core::eval::tokenize(b);
            assert_eq!(
                pacvd_core::eval::levenshtein(&sa, &sb),
                pacvd_core::eval::levenshtein(&sb, &sa)
            );
        }
    }
}

#[test]
fn default_catalog_matches_call_sites_only_exactly() {
    let catalog = default_catalog();
    // names the engine must match and names it must not
    for present in ["malloc", "calloc", "realloc", "free", "open", "fopen", "fdopen", "opendir", "close", "fclose", "closedir"] {
        assert!(catalog.lookup(present).is_some(), "{present}");
    }
    for absent in ["printf", "memcpy", "my_free", "freeing", "xfree"] {
        assert!(catalog.lookup(absent).is_none(), "{absent}");
    }
}
