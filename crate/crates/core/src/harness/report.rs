use super::dataset::{Prediction, Sample, SourceType};
use super::HarnessError;
use crate::metrics::{Evaluator, MetricConfig, MetricResult};
use crate::render::{classify_orientation, classify_resolution, ImageOrientation, ResolutionClass};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScoreOptions {
    pub metrics: MetricConfig,
    /// Leave samples without a prediction out of every aggregate.
    pub exclude_missing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionStatus {
    Parsed,
    Unparsed,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub sample_id: String,
    pub source_type: SourceType,
    pub pattern: Option<String>,
    pub orientation: Option<ImageOrientation>,
    pub resolution: Option<ResolutionClass>,
    pub status: PredictionStatus,
    pub metrics: MetricResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub count: usize,
    pub means: MetricResult,
}

impl GroupStats {
    fn of<'a>(rows: impl IntoIterator<Item = &'a SampleScore>) -> Self {
        let mut count = 0;
        let mut sums = [0.0; 6];
        for r in rows {
            count += 1;
            for (s, v) in sums.iter_mut().zip(r.metrics.values()) {
                *s += v;
            }
        }
        let means = if count == 0 {
            [0.0; 6]
        } else {
            sums.map(|s| s / count as f64)
        };
        GroupStats {
            count,
            means: MetricResult::from_values(means),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// One row per sample, sorted by sample id.
    pub per_sample: Vec<SampleScore>,
    pub overall: GroupStats,
    pub by_source: BTreeMap<String, GroupStats>,
    /// Only samples with known dimensions.
    pub by_orientation: BTreeMap<String, GroupStats>,
    pub by_resolution: BTreeMap<String, GroupStats>,
    /// Only samples with a pattern name.
    pub by_pattern: BTreeMap<String, GroupStats>,
    /// Rows left out of the aggregates by `exclude_missing`.
    pub excluded: usize,
}

fn grouped(rows: &[&SampleScore], key: impl Fn(&SampleScore) -> Option<String>) -> BTreeMap<String, GroupStats> {
    let mut groups: BTreeMap<String, Vec<&SampleScore>> = BTreeMap::new();
    for r in rows {
        if let Some(k) = key(r) {
            groups.entry(k).or_default().push(r);
        }
    }
    groups.into_iter().map(|(k, v)| (k, GroupStats::of(v))).collect()
}

/// Scores every sample against its prediction. A sample without one
/// scores zero; a prediction for an unknown sample is an error.
pub fn score(samples: &[Sample], predictions: &[Prediction], opts: &ScoreOptions) -> Result<EvalReport, HarnessError> {
    let mut ids = HashSet::new();
    for s in samples {
        if !ids.insert(s.id.as_str()) {
            return Err(HarnessError::DuplicateSampleId(s.id.clone()));
        }
    }
    let mut by_sample: HashMap<&str, &Prediction> = HashMap::new();
    for p in predictions {
        if !ids.contains(p.sample_id.as_str()) {
            return Err(HarnessError::UnknownSampleId(p.sample_id.clone()));
        }
        if by_sample.insert(&p.sample_id, p).is_some() {
            return Err(HarnessError::DuplicatePrediction(p.sample_id.clone()));
        }
    }

    let evaluator = Evaluator::new(opts.metrics);
    let mut per_sample: Vec<SampleScore> = samples
        .par_iter()
        .map(|s| {
            let (status, metrics) = match by_sample.get(s.id.as_str()) {
                None => (PredictionStatus::Missing, MetricResult::zero()),
                Some(p) => (
                    if p.parsed.is_ok() {
                        PredictionStatus::Parsed
                    } else {
                        PredictionStatus::Unparsed
                    },
                    evaluator.evaluate_pair(p.parsed.as_ref(), &s.reference),
                ),
            };
            SampleScore {
                sample_id: s.id.clone(),
                source_type: s.source_type,
                pattern: s.pattern.clone(),
                orientation: s.dimensions.map(|(w, h)| classify_orientation(w, h)),
                resolution: s.dimensions.map(|(w, h)| classify_resolution(w, h)),
                status,
                metrics,
            }
        })
        .collect();
    per_sample.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let counted: Vec<&SampleScore> = per_sample
        .iter()
        .filter(|r| !(opts.exclude_missing && r.status == PredictionStatus::Missing))
        .collect();
    let excluded = per_sample.len() - counted.len();
    Ok(EvalReport {
        overall: GroupStats::of(counted.iter().copied()),
        by_source: grouped(&counted, |r| Some(r.source_type.as_str().to_string())),
        by_orientation: grouped(&counted, |r| r.orientation.map(|o| o.as_str().to_string())),
        by_resolution: grouped(&counted, |r| r.resolution.map(|c| c.as_str().to_string())),
        by_pattern: grouped(&counted, |r| r.pattern.clone()),
        excluded,
        per_sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

pub fn emit_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Markdown => markdown(report),
    }
}

fn markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| Group | N | {} |", MetricResult::COLUMNS.join(" | "));
    let _ = writeln!(out, "|---|---:|{}", "---:|".repeat(MetricResult::COLUMNS.len()));
    if report.overall.count == 0 {
        return out;
    }
    let mut row = |name: &str, g: &GroupStats| {
        let cells: Vec<String> = g.means.values().iter().map(|v| format!("{v:.3}")).collect();
        let _ = writeln!(out, "| {name} | {} | {} |", g.count, cells.join(" | "));
    };
    row("overall", &report.overall);
    for (prefix, groups) in [
        ("source", &report.by_source),
        ("orientation", &report.by_orientation),
        ("resolution", &report.by_resolution),
        ("pattern", &report.by_pattern),
    ] {
        for (k, g) in groups {
            row(&format!("{prefix}: {k}"), g);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::parse_flow;

    const FIXTURE: &str = include_str!("../../tests/fixtures/scheduled_loop.json");

    fn sample(id: &str, source: SourceType, dims: Option<(u32, u32)>) -> Sample {
        let mut s = Sample::new(id, parse_flow(FIXTURE).unwrap());
        s.source_type = source;
        s.dimensions = dims;
        s
    }

    #[test]
    fn identity_batch_scores_one() {
        let samples: Vec<_> = (0..3)
            .map(|i| sample(&format!("s{i}"), SourceType::Synthetic, None))
            .collect();
        let preds: Vec<_> = samples
            .iter()
            .map(|s| Prediction::from_output(&s.id, FIXTURE))
            .collect();
        let r = score(&samples, &preds, &ScoreOptions::default()).unwrap();
        assert_eq!(r.overall.means.values(), [1.0; 6]);
        let md = emit_report(&r, ReportFormat::Markdown);
        assert!(
            md.contains("| overall | 3 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 |"),
            "{md}"
        );
    }

    #[test]
    fn groups_and_missing() {
        let samples = vec![
            sample("a", SourceType::Synthetic, Some((800, 300))),
            sample("b", SourceType::Synthetic, None),
            sample("c", SourceType::Manual, Some((500, 500))),
        ];
        let preds = vec![
            Prediction::from_output("a", FIXTURE),
            Prediction::from_output("c", "garbage"),
        ];
        let r = score(&samples, &preds, &ScoreOptions::default()).unwrap();
        assert_eq!(r.by_source["synthetic"].count, 2);
        assert_eq!(r.by_source["manual"].count, 1);
        assert_eq!(r.by_orientation.values().map(|g| g.count).sum::<usize>(), 2);
        assert_eq!(r.by_resolution["small"].count, 2);
        assert_eq!(r.per_sample[1].status, PredictionStatus::Missing);
        assert!((r.overall.means.trigger_match - 1.0 / 3.0).abs() < 1e-12);

        let opts = ScoreOptions {
            exclude_missing: true,
            ..Default::default()
        };
        let r = score(&samples, &preds, &opts).unwrap();
        assert_eq!((r.overall.count, r.excluded, r.per_sample.len()), (2, 1, 3));
        assert_eq!(r.overall.means.trigger_match, 0.5);
    }

    #[test]
    fn order_independent() {
        let samples: Vec<_> = (0..6)
            .map(|i| sample(&format!("s{i}"), SourceType::Digital, None))
            .collect();
        let preds: Vec<_> = samples
            .iter()
            .enumerate()
            .map(|(i, s)| Prediction::from_output(&s.id, if i % 2 == 0 { FIXTURE } else { "{}" }))
            .collect();
        let a = score(&samples, &preds, &ScoreOptions::default()).unwrap();
        let mut s2 = samples.clone();
        s2.reverse();
        let mut p2 = preds.clone();
        p2.rotate_left(2);
        assert_eq!(a, score(&s2, &p2, &ScoreOptions::default()).unwrap());
    }

    #[test]
    fn orphan_and_duplicate_predictions() {
        let samples = vec![sample("a", SourceType::Other, None)];
        let orphan = score(
            &samples,
            &[Prediction::from_output("zz", FIXTURE)],
            &ScoreOptions::default(),
        );
        assert!(matches!(orphan, Err(HarnessError::UnknownSampleId(id)) if id == "zz"));
        let dup = vec![
            Prediction::from_output("a", FIXTURE),
            Prediction::from_output("a", FIXTURE),
        ];
        assert!(matches!(
            score(&samples, &dup, &ScoreOptions::default()),
            Err(HarnessError::DuplicatePrediction(_))
        ));
    }

    #[test]
    fn empty_report_and_json_round_trip() {
        let r = score(&[], &[], &ScoreOptions::default()).unwrap();
        let md = emit_report(&r, ReportFormat::Markdown);
        assert_eq!(md.lines().count(), 2);
        assert!(md.starts_with("| Group | N | FlowSim w/ inputs | FlowSim no inputs | TreeBLEU w/ inputs"));

        let samples = vec![sample("a", SourceType::Whiteboard, Some((1000, 1001)))];
        let r = score(
            &samples,
            &[Prediction::from_output("a", FIXTURE)],
            &ScoreOptions::default(),
        )
        .unwrap();
        let back: EvalReport = serde_json::from_str(&emit_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }
}
