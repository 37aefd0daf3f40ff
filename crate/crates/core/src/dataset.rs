//! The bundled desk-scale IMDB-like schema and its deterministic data generator.
//!
//! This is our own reduction of the IMDB schema: eight tables, at most a few
//! thousand rows each, with skewed distributions (recent years dominate
//! `title.start_year`, a few persons and companies appear very often).

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};

use crate::error::Result;
use crate::schema::{load_table_data, Database, SchemaCatalog, TableData};
use crate::seed;
use crate::value::Value;

/// Seed the bundled CSV files were generated with.
pub const BUNDLED_SEED: u64 = 20_250_401;

pub const IMDB_SCHEMA_JSON: &str = r#"{
  "tables": [
    {"name": "kind_type", "primary_key": "id", "columns": [
      {"name": "id", "type": "integer"}, {"name": "kind", "type": "text"}]},
    {"name": "role_type", "primary_key": "id", "columns": [
      {"name": "id", "type": "integer"}, {"name": "role", "type": "text"}]},
    {"name": "title", "primary_key": "id", "indexes": ["kind_id"], "columns": [
      {"name": "id", "type": "integer"}, {"name": "title", "type": "text"},
      {"name": "kind_id", "type": "integer"}, {"name": "start_year", "type": "integer"}]},
    {"name": "movies", "primary_key": "id", "indexes": ["title_id"], "columns": [
      {"name": "id", "type": "integer"}, {"name": "title_id", "type": "integer"},
      {"name": "genre", "type": "text"}, {"name": "release_year", "type": "integer"},
      {"name": "rating", "type": "decimal"}, {"name": "duration", "type": "integer"},
      {"name": "budget", "type": "integer"}, {"name": "revenue", "type": "integer"}]},
    {"name": "persons", "primary_key": "id", "columns": [
      {"name": "id", "type": "integer"}, {"name": "name", "type": "text"},
      {"name": "gender", "type": "text"}, {"name": "birth_year", "type": "integer"}]},
    {"name": "cast_info", "primary_key": "id", "indexes": ["person_id", "movie_id"], "columns": [
      {"name": "id", "type": "integer"}, {"name": "person_id", "type": "integer"},
      {"name": "movie_id", "type": "integer"}, {"name": "role_id", "type": "integer"},
      {"name": "nr_order", "type": "integer"}]},
    {"name": "companies", "primary_key": "id", "columns": [
      {"name": "id", "type": "integer"}, {"name": "name", "type": "text"},
      {"name": "country_code", "type": "text"}]},
    {"name": "movie_companies", "primary_key": "id", "indexes": ["movie_id", "company_id"], "columns": [
      {"name": "id", "type": "integer"}, {"name": "movie_id", "type": "integer"},
      {"name": "company_id", "type": "integer"}, {"name": "company_type", "type": "text"}]}
  ],
  "foreign_keys": [
    {"from": "title.kind_id", "to": "kind_type.id"},
    {"from": "movies.title_id", "to": "title.id"},
    {"from": "cast_info.person_id", "to": "persons.id"},
    {"from": "cast_info.movie_id", "to": "movies.id"},
    {"from": "cast_info.role_id", "to": "role_type.id"},
    {"from": "movie_companies.movie_id", "to": "movies.id"},
    {"from": "movie_companies.company_id", "to": "companies.id"}
  ]
}
"#;

#[derive(Debug, Clone, Copy)]
pub struct DatasetSize {
    pub titles: usize,
    pub persons: usize,
    pub cast_info: usize,
    pub companies: usize,
    pub movie_companies: usize,
}

impl Default for DatasetSize {
    fn default() -> Self {
        Self {
            titles: 2500,
            persons: 1500,
            cast_info: 6000,
            companies: 300,
            movie_companies: 3000,
        }
    }
}

pub fn imdb_schema() -> SchemaCatalog {
    SchemaCatalog::from_json_str(IMDB_SCHEMA_JSON).expect("bundled schema is valid")
}

/// Directory holding the bundled `schema.json` and CSV files.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("imdb")
}

/// Loads the bundled schema and data from [`bundled_dir`].
pub fn load_bundled() -> Result<(SchemaCatalog, Database)> {
    let dir = bundled_dir();
    let catalog = SchemaCatalog::load(dir.join("schema.json"))?;
    let db = load_table_data(&catalog, &dir)?;
    Ok((catalog, db))
}

const KINDS: &[(&str, f64)] = &[
    ("movie", 0.45),
    ("tv series", 0.10),
    ("tv movie", 0.08),
    ("video movie", 0.07),
    ("tv mini series", 0.04),
    ("video game", 0.03),
    ("episode", 0.23),
];
const ROLES: &[(&str, f64)] = &[
    ("actor", 0.38),
    ("actress", 0.28),
    ("producer", 0.07),
    ("writer", 0.06),
    ("cinematographer", 0.03),
    ("composer", 0.03),
    ("costume designer", 0.02),
    ("director", 0.05),
    ("editor", 0.03),
    ("miscellaneous crew", 0.03),
    ("production designer", 0.02),
];
const GENRES: &[(&str, f64)] = &[
    ("Drama", 0.24),
    ("Comedy", 0.18),
    ("Action", 0.10),
    ("Thriller", 0.09),
    ("Romance", 0.07),
    ("Horror", 0.07),
    ("Documentary", 0.06),
    ("Crime", 0.05),
    ("Adventure", 0.05),
    ("Sci-Fi", 0.04),
    ("Animation", 0.03),
    ("Western", 0.02),
];
const COUNTRIES: &[(&str, f64)] = &[
    ("[us]", 0.45),
    ("[gb]", 0.12),
    ("[fr]", 0.08),
    ("[de]", 0.07),
    ("[jp]", 0.06),
    ("[in]", 0.06),
    ("[ca]", 0.05),
    ("[it]", 0.04),
    ("[es]", 0.04),
    ("[kr]", 0.03),
];
const ADJECTIVES: &[&str] = &[
    "Silent", "Broken", "Golden", "Last", "Hidden", "Crimson", "Endless", "Lost", "Wild", "Dark",
    "Bright", "Frozen", "Secret", "Distant", "Burning", "Quiet",
];
const NOUNS: &[&str] = &[
    "River", "City", "Night", "Empire", "Garden", "Horizon", "Shadow", "Promise", "Storm",
    "Harbor", "Kingdom", "Signal", "Journey", "Mirror", "Winter", "Road",
];
const FIRST: &[&str] = &[
    "Anna", "Ben", "Clara", "David", "Elena", "Felix", "Grace", "Hugo", "Ines", "Jonas", "Katja",
    "Leo", "Maria", "Noah", "Olga", "Paul", "Rosa", "Sam", "Tara", "Umar",
];
const LAST: &[&str] = &[
    "Adler", "Brooks", "Costa", "Dubois", "Evans", "Fischer", "Garcia", "Hansen", "Ito", "Jensen",
    "Kowalski", "Lopez", "Meyer", "Novak", "Okafor", "Petrov", "Quinn", "Rossi", "Schmidt", "Tanaka",
];
const STUDIO_WORDS: &[&str] = &[
    "Apex", "Blue", "Cobalt", "Delta", "Echo", "Falcon", "Granite", "Harbor", "Iris", "Juniper",
    "Keystone", "Lumen", "Meridian", "North", "Orbit",
];
const STUDIO_SUFFIX: &[&str] = &["Pictures", "Films", "Studios", "Entertainment", "Media"];

fn weighted<'a>(rng: &mut ChaCha8Rng, items: &'a [(&'a str, f64)]) -> (usize, &'a str) {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let mut x = rng.gen::<f64>() * total;
    for (i, (name, w)) in items.iter().enumerate() {
        if x < *w {
            return (i, name);
        }
        x -= w;
    }
    (items.len() - 1, items[items.len() - 1].0)
}

/// Skewed pick of a 1-based id: small ids are popular.
fn skewed_id(rng: &mut ChaCha8Rng, n: usize, power: f64) -> i64 {
    let u: f64 = rng.gen();
    ((u.powf(power) * n as f64).floor() as i64).min(n as i64 - 1) + 1
}

fn table(catalog: &SchemaCatalog, name: &str, rows: Vec<Vec<Value>>) -> TableData {
    TableData::from_rows(catalog.table(name).expect("bundled table"), rows)
        .expect("generator emits well-typed rows")
}

/// Deterministically generates the bundled dataset.
pub fn generate_imdb(seed: u64, size: DatasetSize) -> Database {
    let catalog = imdb_schema();
    let mut rng = seed::rng(seed);
    let int = Value::Int;
    let text = |s: &str| Value::Text(s.to_string());

    let kind_type = KINDS
        .iter()
        .enumerate()
        .map(|(i, (k, _))| vec![int(i as i64 + 1), text(k)])
        .collect();
    let role_type = ROLES
        .iter()
        .enumerate()
        .map(|(i, (r, _))| vec![int(i as i64 + 1), text(r)])
        .collect();

    let recency: Exp<f64> = Exp::new(1.0 / 16.0).expect("valid rate");
    let mut start_years = Vec::with_capacity(size.titles);
    let mut titles = Vec::with_capacity(size.titles);
    for id in 1..=size.titles as i64 {
        let (kind, _) = weighted(&mut rng, KINDS);
        let year = if rng.gen_bool(0.85) {
            (2023.0 - recency.sample(&mut rng).floor()).max(1900.0) as i64
        } else {
            rng.gen_range(1900..=2023)
        };
        start_years.push(year);
        let name = format!(
            "The {} {}",
            ADJECTIVES.choose(&mut rng).unwrap(),
            NOUNS.choose(&mut rng).unwrap()
        );
        titles.push(vec![int(id), Value::Text(name), int(kind as i64 + 1), int(year)]);
    }

    let mut title_ids: Vec<i64> = (1..=size.titles as i64).collect();
    title_ids.shuffle(&mut rng);
    let rating: Normal<f64> = Normal::new(6.3, 1.2).expect("valid normal");
    let duration: Normal<f64> = Normal::new(105.0, 22.0).expect("valid normal");
    let budget: LogNormal<f64> = LogNormal::new(16.0, 1.2).expect("valid lognormal");
    let roi: LogNormal<f64> = LogNormal::new(0.3, 0.9).expect("valid lognormal");
    let mut movies = Vec::with_capacity(size.titles);
    for (i, tid) in title_ids.iter().enumerate() {
        let (_, genre) = weighted(&mut rng, GENRES);
        let start = start_years[*tid as usize - 1];
        let release = (start + i64::from(rng.gen_bool(0.2))).min(2024);
        let r = (rating.sample(&mut rng) as f64).clamp(1.0, 10.0);
        let d = (duration.sample(&mut rng) as f64).clamp(45.0, 240.0).round() as i64;
        let b = ((budget.sample(&mut rng) / 1000.0).round() * 1000.0).max(10_000.0);
        let rev = ((b * roi.sample(&mut rng)) / 1000.0).round() * 1000.0;
        movies.push(vec![
            int(i as i64 + 1),
            int(*tid),
            text(genre),
            int(release),
            Value::Dec((r * 10.0).round() / 10.0),
            int(d),
            int(b as i64),
            int(rev as i64),
        ]);
    }
    let n_movies = movies.len();

    let birth: Normal<f64> = Normal::new(1965.0, 18.0).expect("valid normal");
    let persons = (1..=size.persons as i64)
        .map(|id| {
            let name = format!("{} {}", FIRST.choose(&mut rng).unwrap(), LAST.choose(&mut rng).unwrap());
            let gender = if rng.gen_bool(0.55) { "m" } else { "f" };
            let by = (birth.sample(&mut rng) as f64).clamp(1890.0, 2010.0).round() as i64;
            vec![int(id), Value::Text(name), text(gender), int(by)]
        })
        .collect();

    let cast_info = (1..=size.cast_info as i64)
        .map(|id| {
            let (role, _) = weighted(&mut rng, ROLES);
            let order = 1 + (rng.gen::<f64>().powf(2.0) * 30.0).floor() as i64;
            vec![
                int(id),
                int(skewed_id(&mut rng, size.persons, 2.0)),
                int(skewed_id(&mut rng, n_movies, 1.5)),
                int(role as i64 + 1),
                int(order.min(30)),
            ]
        })
        .collect();

    let companies = (1..=size.companies as i64)
        .map(|id| {
            let name = format!(
                "{} {}",
                STUDIO_WORDS.choose(&mut rng).unwrap(),
                STUDIO_SUFFIX.choose(&mut rng).unwrap()
            );
            let (_, cc) = weighted(&mut rng, COUNTRIES);
            vec![int(id), Value::Text(name), text(cc)]
        })
        .collect();

    let movie_companies = (1..=size.movie_companies as i64)
        .map(|id| {
            let kind = if rng.gen_bool(0.6) {
                "production companies"
            } else {
                "distributors"
            };
            vec![
                int(id),
                int(rng.gen_range(1..=n_movies as i64)),
                int(skewed_id(&mut rng, size.companies, 2.0)),
                text(kind),
            ]
        })
        .collect();

    [
        table(&catalog, "kind_type", kind_type),
        table(&catalog, "role_type", role_type),
        table(&catalog, "title", titles),
        table(&catalog, "movies", movies),
        table(&catalog, "persons", persons),
        table(&catalog, "cast_info", cast_info),
        table(&catalog, "companies", companies),
        table(&catalog, "movie_companies", movie_companies),
    ]
    .into_iter()
    .collect()
}

/// Writes `schema.json` and one CSV per table into `dir`.
pub fn write_dataset(dir: &Path, db: &Database) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    let schema_path = dir.join("schema.json");
    std::fs::write(&schema_path, IMDB_SCHEMA_JSON).map_err(|e| crate::Error::io(&schema_path, e))?;
    for t in db.iter() {
        t.write_csv(&dir.join(format!("{}.csv", t.table)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic_and_fk_consistent() {
        let size = DatasetSize {
            titles: 200,
            persons: 100,
            cast_info: 300,
            companies: 20,
            movie_companies: 150,
        };
        let a = generate_imdb(7, size);
        let b = generate_imdb(7, size);
        assert_eq!(a, b);
        let movies = a.get("movies").unwrap();
        let cast = a.get("cast_info").unwrap();
        let max_movie = movies.row_count as i64;
        assert!(cast
            .column("movie_id")
            .unwrap()
            .iter()
            .all(|v| matches!(v, Value::Int(i) if (1..=max_movie).contains(i))));
    }
}
