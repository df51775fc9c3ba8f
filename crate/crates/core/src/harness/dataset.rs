use super::HarnessError;
use crate::flow::{extract_flow_from_model_output, parse_flow_value, Flow, ParseError};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceType {
    #[default]
    Synthetic,
    Manual,
    Digital,
    Whiteboard,
    UserInterface,
    Other,
}

impl SourceType {
    pub const ALL: [SourceType; 6] = [
        SourceType::Synthetic,
        SourceType::Manual,
        SourceType::Digital,
        SourceType::Whiteboard,
        SourceType::UserInterface,
        SourceType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceType::Synthetic => "synthetic",
            SourceType::Manual => "manual",
            SourceType::Digital => "digital",
            SourceType::Whiteboard => "whiteboard",
            SourceType::UserInterface => "user_interface",
            SourceType::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub reference: Flow,
    pub image_path: Option<PathBuf>,
    pub source_type: SourceType,
    /// Pixel dimensions, present together or not at all.
    pub dimensions: Option<(u32, u32)>,
    pub pattern: Option<String>,
}

impl Sample {
    pub fn new(id: impl Into<String>, reference: Flow) -> Self {
        Sample {
            id: id.into(),
            reference,
            image_path: None,
            source_type: SourceType::default(),
            dimensions: None,
            pattern: None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct SampleLine {
    id: Option<String>,
    image_path: Option<PathBuf>,
    #[serde(default)]
    source_type: SourceType,
    width: Option<u32>,
    height: Option<u32>,
    pattern: Option<String>,
}

const METADATA_KEYS: [&str; 6] = ["id", "image_path", "source_type", "width", "height", "pattern"];

/// Parses one dataset line. The reference flow sits under `reference`, or
/// the line is itself a flow with the metadata keys added (the format the
/// generator writes).
fn parse_line(text: &str, line: usize) -> Result<Sample, HarnessError> {
    let json = |msg: String| HarnessError::Json { line, msg };
    let mut value: Value = serde_json::from_str(text).map_err(|e| json(e.to_string()))?;
    let meta: SampleLine = serde_json::from_value(value.clone()).map_err(|e| json(e.to_string()))?;
    let id = meta
        .id
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| json("missing sample `id`".into()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| json("line is not an object".into()))?;
    let reference = match obj.remove("reference") {
        Some(r) => r,
        None => {
            for k in METADATA_KEYS {
                obj.remove(k);
            }
            value
        }
    };
    let reference = parse_flow_value(&reference).map_err(|source| HarnessError::InvalidReference {
        line,
        id: id.clone(),
        source,
    })?;
    let dimensions = match (meta.width, meta.height) {
        (Some(w), Some(h)) if w > 0 && h > 0 => Some((w, h)),
        (None, None) => None,
        _ => return Err(HarnessError::Dimensions { line, id }),
    };
    Ok(Sample {
        id,
        reference,
        image_path: meta.image_path,
        source_type: meta.source_type,
        dimensions,
        pattern: meta.pattern,
    })
}

/// Reads a JSONL dataset. Blank lines are skipped; line numbers in errors
/// are 1-based.
pub fn read_dataset(input: impl BufRead) -> Result<Vec<Sample>, HarnessError> {
    let mut seen = HashSet::new();
    let mut samples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample = parse_line(&line, i + 1)?;
        if !seen.insert(sample.id.clone()) {
            return Err(HarnessError::DuplicateId {
                line: i + 1,
                id: sample.id,
            });
        }
        samples.push(sample);
    }
    Ok(samples)
}

/// Reads a dataset file; relative image paths resolve against its directory.
pub fn load_dataset(path: &Path) -> Result<Vec<Sample>, HarnessError> {
    let file = std::fs::File::open(path)?;
    let mut samples = read_dataset(std::io::BufReader::new(file))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for s in &mut samples {
        if let Some(p) = s.image_path.as_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sample_id: String,
    /// Model text, stored verbatim.
    pub raw_output: String,
    pub parsed: Result<Flow, ParseError>,
}

impl Prediction {
    pub fn from_output(sample_id: impl Into<String>, raw_output: impl Into<String>) -> Self {
        let raw_output = raw_output.into();
        let parsed = extract_flow_from_model_output(&raw_output);
        Prediction {
            sample_id: sample_id.into(),
            raw_output,
            parsed,
        }
    }

    pub fn failed(sample_id: impl Into<String>, reason: impl Into<String>) -> Self {
        Prediction {
            sample_id: sample_id.into(),
            raw_output: String::new(),
            parsed: Err(ParseError::NoResponse(reason.into())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionLine {
    sample_id: String,
    raw_output: String,
}

pub fn read_predictions(input: impl BufRead) -> Result<Vec<Prediction>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: PredictionLine = serde_json::from_str(&line).map_err(|e| HarnessError::Json {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(Prediction::from_output(p.sample_id, p.raw_output));
    }
    Ok(out)
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>, HarnessError> {
    read_predictions(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One `{sample_id, raw_output}` line per prediction.
pub fn write_predictions(mut out: impl std::io::Write, predictions: &[Prediction]) -> std::io::Result<()> {
    for p in predictions {
        let line = PredictionLine {
            sample_id: p.sample_id.clone(),
            raw_output: p.raw_output.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&line).expect("strings serialize"))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../../tests/fixtures/scheduled_loop.json");

    fn line(id: &str, extra: &str) -> String {
        let flow: Value = serde_json::from_str(FIXTURE).unwrap();
        format!(r#"{{"id":"{id}","reference":{flow}{extra}}}"#)
    }

    #[test]
    fn reads_valid_lines() {
        let text = [
            line("a", ""),
            line("b", r#","source_type":"whiteboard","width":800,"height":300"#),
            line("c", ""),
        ]
        .join("\n");
        let s = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].source_type, SourceType::Whiteboard);
        assert_eq!(s[1].dimensions, Some((800, 300)));
        assert_eq!(s[0].source_type, SourceType::Synthetic);
    }

    #[test]
    fn flattened_lines_are_flows() {
        let mut v: Value = serde_json::from_str(FIXTURE).unwrap();
        v["id"] = "x".into();
        v["pattern"] = "scheduled_loop".into();
        let s = read_dataset(v.to_string().as_bytes()).unwrap();
        assert_eq!(s[0].pattern.as_deref(), Some("scheduled_loop"));
        assert_eq!(s[0].reference.components.len(), 4);
    }

    #[test]
    fn duplicate_id_names_line() {
        let text = [line("a", ""), line("a", "")].join("\n");
        match read_dataset(text.as_bytes()) {
            Err(HarnessError::DuplicateId { line, id }) => assert_eq!((line, id.as_str()), (2, "a")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_reference_names_sample() {
        let text = r#"{"id":"broken","reference":{"type":"flow","scope":"global","components":[]}}"#;
        let err = read_dataset(text.as_bytes()).unwrap_err();
        assert!(matches!(&err, HarnessError::InvalidReference { id, .. } if id == "broken"));
        assert!(err.to_string().contains("broken"));
    }

    #[test]
    fn half_dimensions_rejected() {
        let text = line("a", r#","width":10"#);
        assert!(matches!(
            read_dataset(text.as_bytes()),
            Err(HarnessError::Dimensions { .. })
        ));
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![
            Prediction::from_output("a", format!("```json\n{FIXTURE}\n```")),
            Prediction::from_output("b", "no idea"),
        ];
        assert!(preds[0].parsed.is_ok());
        assert!(preds[1].parsed.is_err());
        let mut buf = Vec::new();
        write_predictions(&mut buf, &preds).unwrap();
        assert_eq!(read_predictions(&buf[..]).unwrap(), preds);
    }
}
