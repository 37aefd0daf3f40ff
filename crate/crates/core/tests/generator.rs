mod common;

use std::collections::{BTreeMap, HashSet};

use common::{bundled, bundled_stats, q};
use forge::error::Error;
use forge::generator::{
    build_prompt, expand_with, expand_workload, generate_with, generate_with_options, generate_workload,
    GenerateOptions, GenerationRequest, PredicateKind, Provider, ProviderCall, ProviderProfile, SelectivityLevel,
    SelectivityTarget, StatsStrategy,
};
use forge::schema::{ColumnRef, StatsMap};
use forge::sql::{canonical_key, parse_sql, print_sql, validate, Atom, CompareOp, Dialect, QueryAst, QueryCategory};
use forge::value::Value;
use forge::workload::Origin;
use proptest::prelude::*;

fn target(level: SelectivityLevel, kind: PredicateKind) -> SelectivityTarget {
    SelectivityTarget::new(level, kind)
}

fn assert_sound(queries: &[QueryAst]) {
    let (catalog, _) = bundled();
    let mut keys = HashSet::new();
    for ast in queries {
        let report = validate(ast, catalog);
        assert!(report.is_valid(), "{}: {}", print_sql(ast, Dialect::Generic), report.summary());
        let again = parse_sql(&print_sql(ast, Dialect::Generic)).expect("printed SQL parses");
        assert_eq!(&again, ast);
        assert!(keys.insert(canonical_key(ast)), "duplicate {}", print_sql(ast, Dialect::Generic));
    }
}

/// Start years of the title table, counted straight from the rows.
fn start_years() -> Vec<f64> {
    let (_, db) = bundled();
    let t = db.get("title").unwrap();
    t.column("start_year").unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
}

/// Frequency of the 32 equi-width buckets over `[min, max]` that holds `x`.
fn bucket_frequency(values: &[f64], x: f64) -> usize {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / 32.0;
    let idx = |v: f64| (((v - min) / width).floor() as usize).min(31);
    let b = idx(x);
    values.iter().filter(|v| idx(**v) == b).count()
}

#[test]
fn schema_aware_prompt_lists_every_table_column_and_count() {
    let (catalog, _) = bundled();
    let prompt = build_prompt(&GenerationRequest::schema_aware(10), catalog, bundled_stats());
    for t in &catalog.tables {
        assert!(prompt.contains(&t.name), "missing table {}", t.name);
        for c in &t.columns {
            assert!(prompt.contains(&c.name), "missing column {}.{}", t.name, c.name);
        }
    }
    assert!(prompt.contains("10"));
}

#[test]
fn context_prompt_contains_the_sentence_verbatim() {
    let (catalog, _) = bundled();
    let sentence = "Generate a workload of an accountant of movies.";
    let prompt = build_prompt(&GenerationRequest::context_aware(5, sentence), catalog, bundled_stats());
    assert!(prompt.contains(sentence));
}

#[test]
fn expansion_prompt_embeds_the_seed_queries() {
    let (catalog, _) = bundled();
    let seeds = vec![
        q("SELECT * FROM movies WHERE budget > 1000000"),
        q("SELECT * FROM movies WHERE rating BETWEEN 5 AND 7"),
    ];
    let prompt = build_prompt(&GenerationRequest::expansion(5, seeds.clone()), catalog, bundled_stats());
    for s in &seeds {
        assert!(prompt.contains(&print_sql(s, Dialect::Generic)));
    }
}

#[test]
fn selectivity_prompts_carry_only_their_own_statistics() {
    let (catalog, _) = bundled();
    let stats = bundled_stats();
    let s = &stats[&ColumnRef::new("title", "start_year")];
    let sample_list: Vec<String> = s.sample.iter().take(12).map(|v| v.to_string()).collect();
    let sample_text = sample_list.join(", ");
    let first_bucket = format!("[{}, {}): {}", s.histogram[0].lo, s.histogram[0].hi, s.histogram[0].frequency);
    let boundary = format!("min {}, max {}", s.min.as_ref().unwrap(), s.max.as_ref().unwrap());

    let prompt_for = |strategy| {
        let req = GenerationRequest::selectivity(
            20,
            target(SelectivityLevel::Selective, PredicateKind::InequalityOnly),
            strategy,
        );
        build_prompt(&req, catalog, stats)
    };
    let b = prompt_for(StatsStrategy::BoundariesOnly);
    let sa = prompt_for(StatsStrategy::SampleOnly);
    let h = prompt_for(StatsStrategy::HistogramOnly);

    assert!(b.contains(&boundary));
    assert!(!b.contains("Column value sample") && !b.contains("histogram") && !b.contains(&sample_text));
    assert!(sa.contains(&sample_text));
    assert!(!sa.contains("Column boundaries") && !sa.contains("histogram") && !sa.contains(&boundary));
    assert!(h.contains(&first_bucket));
    assert!(!h.contains("Column boundaries") && !h.contains("Column value sample") && !h.contains(&sample_text));
    assert!(b.contains("Create 20 query predicates with high selectivity"));
}

#[test]
fn mock_output_is_a_function_of_request_and_seed() {
    let (catalog, _) = bundled();
    let req = GenerationRequest::schema_aware(30);
    let run = |seed| generate_workload(&req, &ProviderProfile::mock(seed), catalog, bundled_stats()).unwrap();
    let a = run(7);
    let b = run(7);
    let c = run(8);
    let sql = |r: &forge::generator::GenerationResult| r.queries.iter().map(|q| q.sql.clone()).collect::<Vec<_>>();
    assert_eq!(sql(&a), sql(&b));
    assert_ne!(sql(&a), sql(&c));
}

#[test]
fn mock_parallel_rounds_are_reproducible() {
    let (catalog, _) = bundled();
    let mut profile = ProviderProfile::mock(3);
    profile.parallelism = 4;
    profile.max_queries_per_call = 5;
    let req = GenerationRequest::schema_aware(40);
    let a = generate_workload(&req, &profile, catalog, bundled_stats()).unwrap();
    let b = generate_workload(&req, &profile, catalog, bundled_stats()).unwrap();
    assert_eq!(a.queries, b.queries);
    assert_eq!(a.queries.len(), 40);
}

#[test]
fn batching_fifty_queries_at_twenty_per_call() {
    let (catalog, _) = bundled();
    let profile = ProviderProfile::mock(11);
    assert_eq!(profile.max_queries_per_call, 20);
    let res = generate_workload(&GenerationRequest::schema_aware(50), &profile, catalog, bundled_stats()).unwrap();
    assert!(res.calls_made >= 3, "calls made {}", res.calls_made);
    assert_eq!(res.queries.len(), 50);
    assert!(!res.incomplete);
    assert_eq!(res.per_call_latency_ms.len(), res.calls_made);
    assert_sound(&res.asts());
}

#[test]
fn category_mix_is_honoured() {
    let (catalog, _) = bundled();
    let req = GenerationRequest::schema_aware(15).with_mix([
        (QueryCategory::SimpleSelection, 5),
        (QueryCategory::ComplexJoin, 5),
        (QueryCategory::Aggregation, 5),
    ]);
    let res = generate_workload(&req, &ProviderProfile::mock(5), catalog, bundled_stats()).unwrap();
    let mut counts: BTreeMap<QueryCategory, usize> = BTreeMap::new();
    for wq in &res.queries {
        *counts.entry(QueryCategory::of(&wq.ast)).or_default() += 1;
    }
    assert_eq!(counts.get(&QueryCategory::SimpleSelection), Some(&5));
    assert_eq!(counts.get(&QueryCategory::ComplexJoin), Some(&5));
    assert_eq!(counts.get(&QueryCategory::Aggregation), Some(&5));
    assert_sound(&res.asts());
}

#[test]
fn mix_that_disagrees_with_n_is_rejected() {
    let (catalog, _) = bundled();
    let req = GenerationRequest::schema_aware(10).with_mix([(QueryCategory::ComplexJoin, 4)]);
    let err = generate_workload(&req, &ProviderProfile::mock(1), catalog, bundled_stats()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn unreachable_live_endpoint_yields_incomplete_result() {
    let (catalog, _) = bundled();
    let mut profile = ProviderProfile::live("http://127.0.0.1:9/v1/chat/completions", "any-model");
    profile.timeout_ms = 2_000;
    profile.max_retries = 3;
    let res = generate_workload(&GenerationRequest::schema_aware(10), &profile, catalog, bundled_stats()).unwrap();
    assert!(res.incomplete);
    assert_eq!(res.calls_made, 3);
    assert!(res.queries.is_empty());
}

#[test]
fn context_queries_lean_on_the_named_columns() {
    let (catalog, _) = bundled();
    let req = GenerationRequest::context_aware(40, "Generate a workload of an accountant of movies.");
    let res = generate_workload(&req, &ProviderProfile::mock(21), catalog, bundled_stats()).unwrap();
    let money = ["budget", "revenue", "duration", "rating"];
    let hits = res
        .queries
        .iter()
        .filter(|wq| wq.ast.atoms().iter().any(|a| money.contains(&a.column().name.as_str())))
        .count();
    let plain = generate_workload(&GenerationRequest::schema_aware(40), &ProviderProfile::mock(21), catalog, bundled_stats())
        .unwrap();
    let base = plain
        .queries
        .iter()
        .filter(|wq| wq.ast.atoms().iter().any(|a| money.contains(&a.column().name.as_str())))
        .count();
    assert!(hits > base, "context hits {hits}, schema-only hits {base}");
}

#[test]
fn expansion_stays_on_the_seed_table_and_varies_ranges() {
    let (catalog, _) = bundled();
    let seeds = vec![
        q("SELECT * FROM movies WHERE budget > 1000000"),
        q("SELECT * FROM movies WHERE rating BETWEEN 5 AND 7"),
    ];
    let res = expand_workload(&seeds, 5, &ProviderProfile::mock(9), catalog, bundled_stats()).unwrap();
    assert_eq!(res.queries.len(), 5);
    let seed_keys: HashSet<String> = seeds.iter().map(canonical_key).collect();
    for wq in &res.queries {
        assert_eq!(wq.ast.from_tables.len(), 1);
        assert_eq!(wq.ast.from_tables[0].name, "movies");
        assert!(!seed_keys.contains(&canonical_key(&wq.ast)));
        assert!(wq.ast.atoms().iter().all(|a| a.column().name == "budget" || a.column().name == "rating"));
    }
    assert_sound(&res.asts());
}

#[test]
fn expansion_of_zero_queries_is_rejected() {
    let (catalog, _) = bundled();
    let seeds = vec![q("SELECT * FROM movies WHERE budget > 1000000")];
    let err = expand_workload(&seeds, 0, &ProviderProfile::mock(1), catalog, bundled_stats()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

/// Always answers with the same three statements.
struct ThreeOnly;

impl Provider for ThreeOnly {
    fn name(&self) -> &str {
        "three"
    }

    fn complete(&self, _call: &ProviderCall<'_>) -> forge::Result<String> {
        Ok("SELECT * FROM movies WHERE budget > 2000000;\n\
            SELECT * FROM movies WHERE rating BETWEEN 4 AND 6;\n\
            SELECT * FROM movies WHERE budget < 500000;\n"
            .into())
    }
}

#[test]
fn under_delivery_is_topped_up_by_mutation() {
    let (catalog, _) = bundled();
    let seeds = vec![q("SELECT * FROM movies WHERE budget > 1000000")];
    let res = expand_with(
        &seeds,
        5,
        Some(&ThreeOnly),
        &ProviderProfile::mock(2),
        catalog,
        bundled_stats(),
        &GenerateOptions::default(),
    )
    .unwrap();
    let origins: Vec<Origin> = res.queries.iter().map(|q| q.origin).collect();
    assert_eq!(origins.iter().filter(|o| **o == Origin::Provider).count(), 3);
    assert_eq!(origins.iter().filter(|o| **o == Origin::Mutation).count(), 2);
    assert!(!res.incomplete);
    assert!(res.rejected.iter().any(|r| r.reason.contains("duplicate")));
    assert_sound(&res.asts());
}

struct Noisy;

impl Provider for Noisy {
    fn name(&self) -> &str {
        "noisy"
    }

    fn complete(&self, _call: &ProviderCall<'_>) -> forge::Result<String> {
        Ok("Here are your queries:\n```sql\n\
            SELECT * FROM movies WHERE budget > 10;\n\
            SELECT * FROM nowhere WHERE x = 1;\n\
            SELECT * FROM movies ORDER BY budget;\n\
            SELECT * FROM title WHERE start_year = 2001;\n```"
            .into())
    }
}

#[test]
fn rejects_are_recorded_with_reasons() {
    let (catalog, _) = bundled();
    let mut req = GenerationRequest::schema_aware(2);
    req.top_up = false;
    let res = generate_with(
        &req,
        &Noisy,
        &ProviderProfile::mock(0),
        catalog,
        bundled_stats(),
        &GenerateOptions::default(),
    )
    .unwrap();
    assert_eq!(res.queries.len(), 2);
    assert_eq!(res.calls_made, 1);
    let reasons: Vec<&str> = res.rejected.iter().map(|r| r.reason.as_str()).collect();
    assert!(reasons.iter().any(|r| r.contains("nowhere")), "{reasons:?}");
    assert!(reasons.iter().any(|r| r.to_uppercase().contains("ORDER")), "{reasons:?}");
    assert_eq!(res.rejected.len(), 2);
}

#[test]
fn transcripts_are_written_per_call() {
    let (catalog, _) = bundled();
    let dir = tempfile::tempdir().unwrap();
    let opts = GenerateOptions {
        transcript_dir: Some(dir.path().to_path_buf()),
        jobs: None,
    };
    let res = generate_with_options(
        &GenerationRequest::schema_aware(25),
        &ProviderProfile::mock(4),
        catalog,
        bundled_stats(),
        &opts,
    )
    .unwrap();
    for i in 1..=res.calls_made {
        let text = std::fs::read_to_string(dir.path().join(format!("call_{i:04}.txt"))).unwrap();
        assert!(text.contains("PROMPT") && text.contains("RESPONSE"));
    }
}

fn selectivity_run(level: SelectivityLevel, kind: PredicateKind, strategy: StatsStrategy, seed: u64) -> Vec<QueryAst> {
    let (catalog, _) = bundled();
    let req = GenerationRequest::selectivity(20, target(level, kind), strategy);
    let res = generate_workload(&req, &ProviderProfile::mock(seed), catalog, bundled_stats()).unwrap();
    assert_sound(&res.asts());
    res.asts()
}

#[test]
fn histogram_selective_equalities_land_in_sparse_buckets() {
    let years = start_years();
    let asts = selectivity_run(
        SelectivityLevel::Selective,
        PredicateKind::EqualityOnly,
        StatsStrategy::HistogramOnly,
        17,
    );
    let mean_bucket = years.len() as f64 / 32.0;
    let mut freqs = Vec::new();
    for ast in &asts {
        let [Atom::Compare { op: CompareOp::Eq, value, .. }] = ast.atoms()[..] else {
            panic!("expected a single equality: {}", print_sql(ast, Dialect::Generic));
        };
        freqs.push(bucket_frequency(&years, value.as_f64().unwrap()));
    }
    assert!(freqs.len() >= 15);
    let sparse = freqs.iter().filter(|f| (**f as f64) < mean_bucket).count();
    assert!(sparse * 10 >= freqs.len() * 9, "bucket frequencies {freqs:?}");

    let dense = selectivity_run(
        SelectivityLevel::NonSelective,
        PredicateKind::EqualityOnly,
        StatsStrategy::HistogramOnly,
        17,
    );
    let dense_mean: f64 = dense
        .iter()
        .map(|a| match a.atoms()[0] {
            Atom::Compare { value, .. } => bucket_frequency(&years, value.as_f64().unwrap()) as f64,
            _ => unreachable!(),
        })
        .sum::<f64>()
        / dense.len() as f64;
    let sparse_mean = freqs.iter().sum::<usize>() as f64 / freqs.len() as f64;
    assert!(sparse_mean * 2.0 < dense_mean, "{sparse_mean} vs {dense_mean}");
}

#[test]
fn boundary_ranges_for_non_selective_inequalities_cover_half_the_span() {
    let years = start_years();
    let min = years.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = years.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let asts = selectivity_run(
        SelectivityLevel::NonSelective,
        PredicateKind::InequalityOnly,
        StatsStrategy::BoundariesOnly,
        23,
    );
    assert!(!asts.is_empty());
    for ast in &asts {
        let covered = match ast.atoms()[0] {
            Atom::Compare { op: CompareOp::Ge | CompareOp::Gt, value, .. } => max - value.as_f64().unwrap(),
            Atom::Compare { op: CompareOp::Le | CompareOp::Lt, value, .. } => value.as_f64().unwrap() - min,
            Atom::Between { low, high, .. } => high.as_f64().unwrap() - low.as_f64().unwrap(),
            other => panic!("unexpected atom {other:?}"),
        };
        assert!(covered >= 0.5 * (max - min) - 1.0, "{} covers {covered}", print_sql(ast, Dialect::Generic));
    }
}

#[test]
fn boundary_ranges_for_selective_inequalities_are_narrow() {
    let years = start_years();
    let span = years.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - years.iter().cloned().fold(f64::INFINITY, f64::min);
    for ast in selectivity_run(
        SelectivityLevel::Selective,
        PredicateKind::InequalityOnly,
        StatsStrategy::BoundariesOnly,
        29,
    ) {
        let Atom::Between { low, high, .. } = ast.atoms()[0] else {
            panic!("expected BETWEEN");
        };
        assert!(high.as_f64().unwrap() - low.as_f64().unwrap() <= 0.02 * span);
    }
}

#[test]
fn sample_selective_equalities_use_sampled_values() {
    let stats = bundled_stats();
    let sample: HashSet<String> = stats[&ColumnRef::new("title", "start_year")]
        .sample
        .iter()
        .map(Value::to_string)
        .collect();
    for ast in selectivity_run(
        SelectivityLevel::Selective,
        PredicateKind::EqualityOnly,
        StatsStrategy::SampleOnly,
        31,
    ) {
        let Atom::Compare { value, .. } = ast.atoms()[0] else {
            panic!("expected equality");
        };
        assert!(sample.contains(&value.to_string()));
    }
}

#[test]
fn missing_statistics_name_the_column() {
    let (catalog, _) = bundled();
    let mut stats: StatsMap = bundled_stats().clone();
    stats.remove(&ColumnRef::new("title", "start_year"));
    let req = GenerationRequest::selectivity(
        5,
        target(SelectivityLevel::Selective, PredicateKind::EqualityOnly),
        StatsStrategy::HistogramOnly,
    );
    let err = generate_workload(&req, &ProviderProfile::mock(1), catalog, &stats).unwrap_err();
    assert!(matches!(err, Error::MissingStatistics(_)));
    assert!(err.to_string().contains("title.start_year"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_generated_query_is_valid_distinct_and_round_trips(seed in any::<u64>(), n in 1usize..40) {
        let (catalog, _) = bundled();
        let res = generate_workload(&GenerationRequest::schema_aware(n), &ProviderProfile::mock(seed), catalog, bundled_stats()).unwrap();
        prop_assert!(res.queries.len() <= n);
        prop_assert_eq!(res.queries.len(), n);
        assert_sound(&res.asts());
    }
}
