//! Newline-delimited JSON inference messages.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use tfn_core::model::predict;
use tfn_core::{Params, Vector};

/// One request line. Extra fields (such as a dataset record's `label`) are
/// ignored, so dataset JSONL files can be fed directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceRequest {
    #[serde(default)]
    pub id: Option<String>,
    pub video: Vec<f64>,
    pub audio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResponse {
    pub id: String,
    pub probability: f64,
    pub label: String,
    /// Wall-clock time of the forward pass alone.
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub line: usize,
    pub error: String,
}

pub fn label_for(probability: f64, threshold: f64) -> &'static str {
    if probability >= threshold {
        "fraud"
    } else {
        "legit"
    }
}

/// Parses and scores one line. `line` is 1-based and names the request when
/// it carries no id.
pub fn handle_line(
    params: &Params,
    threshold: f64,
    text: &str,
    line: usize,
) -> Result<InferenceResponse, ErrorResponse> {
    let fail = |id: Option<String>, error: String| ErrorResponse { id, line, error };
    let req: InferenceRequest =
        serde_json::from_str(text).map_err(|e| fail(None, format!("malformed request: {e}")))?;
    let id = req.id.unwrap_or_else(|| format!("line-{line}"));
    let (video, audio) = (Vector::new(req.video), Vector::new(req.audio));
    let start = Instant::now();
    let p = predict(params, &video, &audio).map_err(|e| fail(Some(id.clone()), e.to_string()))?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(InferenceResponse {
        label: label_for(p, threshold).to_string(),
        id,
        probability: p,
        elapsed_ms,
    })
}
