//! Synthetic flow generation.
//!
//! [`generate_flow`] interprets one [`PatternSpec`] against a [`Catalog`];
//! [`generate_dataset`] samples patterns by weight and keeps flows distinct
//! by content hash. Every random choice draws from a [`SeedStream`] fork, so
//! output depends only on the inputs and the seed, never on thread count.

mod annotate;
mod catalog;
mod generate;
mod pattern;
mod rng;
mod split;

pub use annotate::annotate;
pub use catalog::{
    ActionSpec, ActionTag, Catalog, FieldSpec, InputTemplate, TableSpec, TriggerClass, TriggerSpec, ValueTemplate,
};
pub use generate::generate_flow;
pub use pattern::{
    default_registry, pattern, pattern_steps, ActionPick, GenParams, GenStep, PatternSpec, PATTERN_COUNTS,
};
pub use rng::SeedStream;
pub use split::{split_dataset, split_ids, Split, SplitManifest};

use crate::flow::{parse_flow_value, serialize_flow, Flow, FlowId, ParseError};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rayon::prelude::*;
use serde_json::Value;
use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::path::Path;

/// Attempts per dataset slot before giving up on distinctness.
pub const MAX_ATTEMPTS: u64 = 64;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("empty pattern registry")]
    EmptyRegistry,
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("no distinct flow for slot {slot} after {attempts} attempts")]
    ExhaustedRetries { slot: usize, attempts: u64 },
    #[error("line {line}: {source}")]
    Record { line: usize, source: ParseError },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One JSONL line: a serialized flow plus `id` and `pattern`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub id: FlowId,
    pub pattern: Option<String>,
    pub flow: Flow,
}

impl FlowRecord {
    pub fn new(flow: Flow, pattern: Option<String>) -> Self {
        FlowRecord {
            id: flow.content_id(),
            pattern,
            flow,
        }
    }

    pub fn to_json_line(&self) -> String {
        let mut value: Value = serde_json::from_str(&serialize_flow(&self.flow)).expect("flow serializes to JSON");
        let obj = value.as_object_mut().expect("flow is a JSON object");
        obj.insert("id".into(), Value::String(self.id.0.clone()));
        if let Some(p) = &self.pattern {
            obj.insert("pattern".into(), Value::String(p.clone()));
        }
        value.to_string()
    }

    /// A missing `id` is recomputed from the content.
    pub fn from_json_line(line: &str) -> Result<Self, ParseError> {
        let mut value: Value = serde_json::from_str(line).map_err(|e| ParseError::MalformedJson(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| ParseError::MalformedJson("line is not a JSON object".into()))?;
        let id = obj.remove("id").and_then(|v| v.as_str().map(str::to_string));
        let pattern = obj.remove("pattern").and_then(|v| v.as_str().map(str::to_string));
        let flow = parse_flow_value(&value)?;
        let id = id.map(FlowId).unwrap_or_else(|| flow.content_id());
        Ok(FlowRecord { id, pattern, flow })
    }
}

pub fn write_records(mut out: impl Write, records: &[FlowRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()
}

/// Reads records, skipping blank lines. Errors carry 1-based line numbers.
pub fn read_records(input: impl BufRead) -> Result<Vec<FlowRecord>, SynthError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = FlowRecord::from_json_line(&line).map_err(|source| SynthError::Record { line: i + 1, source })?;
        records.push(record);
    }
    Ok(records)
}

pub fn read_records_file(path: &Path) -> Result<Vec<FlowRecord>, SynthError> {
    read_records(io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_records_file(path: &Path, records: &[FlowRecord]) -> io::Result<()> {
    write_records(io::BufWriter::new(std::fs::File::create(path)?), records)
}

/// `count` flows with patterns drawn in proportion to their weights.
///
/// First attempts are generated in parallel; slots whose flow collides with
/// an earlier one are then regenerated in slot order with fresh seeds.
pub fn generate_dataset(
    registry: &[PatternSpec],
    catalog: &Catalog,
    count: usize,
    seed: u64,
) -> Result<Vec<FlowRecord>, SynthError> {
    if registry.is_empty() {
        return Err(SynthError::EmptyRegistry);
    }
    if count == 0 {
        return Err(SynthError::ZeroCount);
    }
    for p in registry {
        p.validate().map_err(SynthError::InvalidPattern)?;
    }
    catalog.validate().map_err(SynthError::InvalidCatalog)?;

    let root = SeedStream::new(seed);
    let weights =
        WeightedIndex::new(registry.iter().map(|p| p.weight)).map_err(|e| SynthError::InvalidPattern(e.to_string()))?;
    let attempt = |slot: usize, pattern: &PatternSpec, k: u64| {
        let flow_seed = root.named("flow").index(slot as u64).index(k).key();
        FlowRecord::new(generate_flow(pattern, catalog, flow_seed), Some(pattern.name.clone()))
    };

    let first: Vec<(usize, FlowRecord)> = (0..count)
        .into_par_iter()
        .map(|slot| {
            let p = weights.sample(&mut root.named("pattern").index(slot as u64).rng());
            (p, attempt(slot, &registry[p], 0))
        })
        .collect();

    let mut seen: HashSet<FlowId> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    for (slot, (p, record)) in first.into_iter().enumerate() {
        let mut record = record;
        let mut k = 0;
        while seen.contains(&record.id) {
            k += 1;
            if k >= MAX_ATTEMPTS {
                return Err(SynthError::ExhaustedRetries { slot, attempts: k });
            }
            record = attempt(slot, &registry[p], k);
        }
        seen.insert(record.id.clone());
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn dataset_is_deterministic_and_distinct() {
        let reg = default_registry(&GenParams::default());
        let cat = Catalog::default();
        let a = generate_dataset(&reg, &cat, 500, 11).unwrap();
        let b = generate_dataset(&reg, &cat, 500, 11).unwrap();
        assert_eq!(a, b);
        let ids: HashSet<_> = a.iter().map(|r| &r.id).collect();
        assert_eq!(ids.len(), 500);
        assert_eq!(generate_dataset(&reg, &cat, 1, 0).unwrap().len(), 1);
    }

    #[test]
    fn pattern_shares_follow_weights() {
        let reg = default_registry(&GenParams::default());
        let data = generate_dataset(&reg, &Catalog::default(), 5000, 3).unwrap();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for r in &data {
            *counts.entry(r.pattern.as_deref().unwrap()).or_default() += 1;
        }
        let crud = counts["crud_loop"] as f64 / 5000.0;
        assert!((crud - 2148.0 / 14376.0).abs() < 0.02, "{crud}");
    }

    #[test]
    fn tiny_space_exhausts_retries() {
        let reg = vec![pattern("trigger_only", &GenParams::default()).unwrap()];
        let mut cat = Catalog::default();
        cat.triggers.retain(|t| t.trigger_type == "inbound_email");
        let err = generate_dataset(&reg, &cat, 50, 0).unwrap_err();
        assert!(matches!(err, SynthError::ExhaustedRetries { .. }), "{err}");
        assert!(matches!(
            generate_dataset(&[], &cat, 1, 0),
            Err(SynthError::EmptyRegistry)
        ));
        assert!(matches!(generate_dataset(&reg, &cat, 0, 0), Err(SynthError::ZeroCount)));
    }

    #[test]
    fn records_round_trip() {
        let reg = default_registry(&GenParams::default());
        let data = generate_dataset(&reg, &Catalog::default(), 40, 5).unwrap();
        let mut buf = Vec::new();
        write_records(&mut buf, &data).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, data);

        let bad = b"\n{\"type\":\"flow\"}\n";
        match read_records(&bad[..]) {
            Err(SynthError::Record { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
