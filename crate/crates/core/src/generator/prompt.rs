use std::fmt::Write;

use crate::generator::request::{
    GenerationRequest, Intent, PredicateKind, SelectivityLevel, StatsStrategy,
};
use crate::schema::{stats::find_stats, SchemaCatalog, StatsMap};
use crate::sql::{print_sql, Dialect, QueryCategory};

const RULES: &str = "\
Rules:
- Use only the tables and columns listed above.
- Join tables with equality predicates between columns, following the foreign keys.
- Allowed: SELECT ... FROM ... [WHERE ...] [GROUP BY ...], inner joins, comparisons, BETWEEN, IN lists, one level of IN (SELECT ...), COUNT, SUM, AVG.
- Not allowed: ORDER BY, LIMIT, HAVING, OUTER JOIN, UNION, LIKE, NOT, IS NULL, CASE, functions other than COUNT, SUM and AVG.
- Answer with SQL only: one statement per line, each ending with a semicolon.
";

fn render_schema(catalog: &SchemaCatalog, out: &mut String) {
    out.push_str("Database schema:\n");
    for t in &catalog.tables {
        let cols: Vec<String> = t
            .columns
            .iter()
            .map(|c| {
                let mut s = format!("{} {}", c.name, c.value_type.to_string().to_uppercase());
                if c.name.eq_ignore_ascii_case(&t.primary_key) {
                    s.push_str(" PRIMARY KEY");
                }
                s
            })
            .collect();
        let _ = writeln!(out, "  {}({})", t.name, cols.join(", "));
    }
    if !catalog.foreign_keys.is_empty() {
        out.push_str("Foreign keys:\n");
        for fk in &catalog.foreign_keys {
            let _ = writeln!(out, "  {} -> {}", fk.from, fk.to);
        }
    }
    out.push('\n');
}

fn category_phrase(c: QueryCategory) -> &'static str {
    match c {
        QueryCategory::SimpleSelection => "simple single-table selection queries",
        QueryCategory::ComplexJoin => "multi-table join queries",
        QueryCategory::Aggregation => "aggregation queries with GROUP BY",
    }
}

fn render_stats_slice(req: &GenerationRequest, stats: &StatsMap, out: &mut String) {
    let (Some(target), Some(strategy)) = (&req.selectivity_target, req.stats_strategy) else {
        return;
    };
    match strategy {
        StatsStrategy::BoundariesOnly => out.push_str("Column boundaries:\n"),
        StatsStrategy::SampleOnly => out.push_str("Column value sample:\n"),
        StatsStrategy::HistogramOnly => {
            out.push_str("Column histogram (equi-width buckets, lo <= value < hi, last bucket includes hi):\n")
        }
    }
    for col in &target.target_columns {
        let Some(s) = find_stats(stats, col) else {
            let _ = writeln!(out, "  {col}: no statistics available");
            continue;
        };
        match strategy {
            StatsStrategy::BoundariesOnly => {
                let show = |v: &Option<crate::value::Value>| v.as_ref().map_or("n/a".to_string(), |v| v.to_string());
                let _ = writeln!(out, "  {col}: min {}, max {}", show(&s.min), show(&s.max));
            }
            StatsStrategy::SampleOnly => {
                let vals: Vec<String> = s.sample.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "  {col} ({} values): [{}]", vals.len(), vals.join(", "));
            }
            StatsStrategy::HistogramOnly => {
                let _ = writeln!(out, "  {col}:");
                for b in &s.histogram {
                    let _ = writeln!(out, "    [{}, {}): {}", b.lo, b.hi, b.frequency);
                }
            }
        }
    }
    out.push('\n');
}

/// Renders the prompt for one generation request.
pub fn build_prompt(req: &GenerationRequest, catalog: &SchemaCatalog, stats: &StatsMap) -> String {
    let mut out = String::new();
    render_schema(catalog, &mut out);
    let n = req.n;
    match req.intent {
        Intent::SchemaAware => {
            let _ = writeln!(
                out,
                "Generate a workload of {n} diverse SQL queries for this database, mixing light lookups with heavier joins and aggregations."
            );
        }
        Intent::ContextAware => {
            let _ = writeln!(
                out,
                "Generate a workload of {n} SQL queries for testing a cardinality estimator on this database."
            );
            let _ = writeln!(out, "Use case: {}", req.context_text.as_deref().unwrap_or_default());
        }
        Intent::WorkloadExpansion => {
            out.push_str("Existing workload:\n");
            for q in req.seed_workload.iter().flatten() {
                let _ = writeln!(out, "  {};", print_sql(q, Dialect::Generic));
            }
            let _ = writeln!(
                out,
                "\nGenerate {n} additional queries in the spirit of this workload: keep its tables and columns, vary the constants and combine its conditions."
            );
        }
        Intent::SelectivityTargeted => {
            let target = req.selectivity_target.as_ref().expect("validated request");
            let level = match target.level {
                SelectivityLevel::Selective => "high selectivity that produce a small number of results",
                SelectivityLevel::NonSelective => "low selectivity that produce a large number of results",
            };
            let kind = match target.predicate_kind {
                PredicateKind::EqualityOnly => "equality predicates (=) only",
                PredicateKind::InequalityOnly => "inequality predicates (<, <=, >, >=, BETWEEN) only",
            };
            let cols: Vec<String> = target.target_columns.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "Create {n} query predicates with {level}.");
            let _ = writeln!(out, "Use {kind} on {}.", cols.join(", "));
            out.push_str("Write each predicate as a full query: SELECT * FROM <table> WHERE <predicate>;\n\n");
            render_stats_slice(req, stats, &mut out);
        }
    }
    if let Some(mix) = &req.category_mix {
        let parts: Vec<String> = mix
            .iter()
            .filter(|(_, c)| **c > 0)
            .map(|(cat, c)| format!("{c} {}", category_phrase(*cat)))
            .collect();
        let _ = writeln!(out, "The workload must contain exactly {}.", parts.join(", "));
    }
    out.push('\n');
    out.push_str(RULES);
    out
}
