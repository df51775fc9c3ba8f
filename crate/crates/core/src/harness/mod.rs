//! Batch evaluation: load references and predictions, score them, and
//! report means overall and per source type, image orientation, image
//! resolution and pattern.

mod client;
mod dataset;
mod report;

pub use client::{
    fetch_predictions, fetch_with, request_body, response_text, HttpModelClient, ModelClient, ModelEndpointConfig,
    DEFAULT_PROMPT, IMAGE_SLOT,
};
pub use dataset::{
    load_dataset, load_predictions, read_dataset, read_predictions, write_predictions, Prediction, Sample, SourceType,
};
pub use report::{
    emit_report, score, EvalReport, GroupStats, PredictionStatus, ReportFormat, SampleScore, ScoreOptions,
};

use crate::flow::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Json { line: usize, msg: String },
    #[error("line {line}: duplicate sample id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: sample `{id}` has an invalid reference: {source}")]
    InvalidReference {
        line: usize,
        id: String,
        source: ParseError,
    },
    #[error("line {line}: sample `{id}` needs both width and height, both positive")]
    Dimensions { line: usize, id: String },
    #[error("duplicate sample id `{0}`")]
    DuplicateSampleId(String),
    #[error("prediction for unknown sample `{0}`")]
    UnknownSampleId(String),
    #[error("more than one prediction for sample `{0}`")]
    DuplicatePrediction(String),
    #[error("config error: {0}")]
    Config(String),
}
