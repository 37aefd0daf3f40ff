use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{ColumnRef, Database, TableData};
use crate::seed;
use crate::value::{Value, ValueType};

pub const DEFAULT_BUCKET_COUNT: usize = 32;
pub const DEFAULT_SAMPLE_SIZE: usize = 1000;

pub type StatsMap = BTreeMap<ColumnRef, ColumnStatistics>;

/// One equi-width bucket. Values satisfy `lo <= v < hi`, except the last
/// bucket which also includes `hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub lo: f64,
    pub hi: f64,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStatistics {
    pub column: ColumnRef,
    pub value_type: ValueType,
    pub row_count: usize,
    /// Set when the table has no rows; min/max are then absent.
    pub empty: bool,
    pub min: Option<Value>,
    pub max: Option<Value>,
    pub distinct_count: usize,
    pub sample: Vec<Value>,
    /// Empty for text columns.
    pub histogram: Vec<HistogramBucket>,
}

impl ColumnStatistics {
    pub fn min_f64(&self) -> Option<f64> {
        self.min.as_ref().and_then(Value::as_f64)
    }

    pub fn max_f64(&self) -> Option<f64> {
        self.max.as_ref().and_then(Value::as_f64)
    }

    /// Index of the bucket holding `v`, if `v` lies within `[min, max]`.
    pub fn bucket_index(&self, v: f64) -> Option<usize> {
        let first = self.histogram.first()?;
        let last = self.histogram.last()?;
        if v < first.lo || v > last.hi {
            return None;
        }
        bucket_of(v, first.lo, last.hi, self.histogram.len())
    }
}

fn bucket_of(v: f64, min: f64, max: f64, buckets: usize) -> Option<usize> {
    if !(min..=max).contains(&v) {
        return None;
    }
    let width = (max - min) / buckets as f64;
    if width <= 0.0 {
        return Some(0);
    }
    let idx = ((v - min) / width).floor() as usize;
    Some(idx.min(buckets - 1))
}

/// Computes per-column statistics for one table.
pub fn compute_statistics(
    data: &TableData,
    sample_size: usize,
    bucket_count: usize,
    seed: u64,
) -> Result<Vec<ColumnStatistics>> {
    if bucket_count == 0 {
        return Err(Error::Precondition("bucket_count must be at least 1".into()));
    }
    if sample_size == 0 {
        return Err(Error::Precondition("sample_size must be at least 1".into()));
    }
    let table_seed = seed::sub_seed(seed, &data.table.to_ascii_lowercase());
    Ok((0..data.columns.len())
        .into_par_iter()
        .map(|ci| column_statistics(data, ci, sample_size, bucket_count, table_seed))
        .collect())
}

fn column_statistics(
    data: &TableData,
    ci: usize,
    sample_size: usize,
    bucket_count: usize,
    table_seed: u64,
) -> ColumnStatistics {
    let values = &data.columns[ci];
    let value_type = data.column_types[ci];
    let column = ColumnRef::new(&data.table, &data.column_names[ci]);
    let distinct_count = values.iter().map(Value::key).collect::<HashSet<_>>().len();

    let mut rng = seed::rng(seed::indexed_seed(table_seed, ci as u64));
    let take = sample_size.min(values.len());
    let mut picked = index::sample(&mut rng, values.len(), take).into_vec();
    picked.sort_unstable();
    let sample = picked.into_iter().map(|i| values[i].clone()).collect();

    let mut stats = ColumnStatistics {
        column,
        value_type,
        row_count: data.row_count,
        empty: data.row_count == 0,
        min: None,
        max: None,
        distinct_count,
        sample,
        histogram: Vec::new(),
    };
    if stats.empty || !value_type.is_numeric() {
        return stats;
    }

    let min = values.iter().min_by(|a, b| a.total_cmp(b)).cloned();
    let max = values.iter().max_by(|a, b| a.total_cmp(b)).cloned();
    let (lo, hi) = (
        min.as_ref().and_then(Value::as_f64).unwrap_or(0.0),
        max.as_ref().and_then(Value::as_f64).unwrap_or(0.0),
    );
    let width = (hi - lo) / bucket_count as f64;
    let mut histogram: Vec<HistogramBucket> = (0..bucket_count)
        .map(|b| HistogramBucket {
            lo: lo + width * b as f64,
            hi: if b + 1 == bucket_count {
                hi
            } else {
                lo + width * (b + 1) as f64
            },
            frequency: 0,
        })
        .collect();
    for v in values.iter().filter_map(Value::as_f64) {
        if let Some(b) = bucket_of(v, lo, hi, bucket_count) {
            histogram[b].frequency += 1;
        }
    }
    stats.min = min;
    stats.max = max;
    stats.histogram = histogram;
    stats
}

/// Statistics for every column of every loaded table.
pub fn compute_database_statistics(
    db: &Database,
    sample_size: usize,
    bucket_count: usize,
    seed: u64,
) -> Result<StatsMap> {
    let mut out = StatsMap::new();
    for table in db.iter() {
        for s in compute_statistics(table, sample_size, bucket_count, seed)? {
            out.insert(s.column.clone(), s);
        }
    }
    Ok(out)
}

/// Lookup helper tolerant of identifier case.
pub(crate) fn find_stats<'a>(stats: &'a StatsMap, col: &ColumnRef) -> Option<&'a ColumnStatistics> {
    stats
        .get(col)
        .or_else(|| stats.iter().find(|(k, _)| k.matches(&col.table, &col.column)).map(|(_, v)| v))
}

/// Occurrence counts of each sampled value.
pub(crate) fn sample_frequencies(stats: &ColumnStatistics) -> Vec<(Value, usize)> {
    let mut counts: HashMap<_, (Value, usize)> = HashMap::new();
    for v in &stats.sample {
        counts.entry(v.key()).or_insert_with(|| (v.clone(), 0)).1 += 1;
    }
    let mut out: Vec<_> = counts.into_values().collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
