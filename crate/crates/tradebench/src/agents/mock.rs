//! Deterministic mock backends for LLM-free testing.
//!
//! Two fixture formats are supported, one JSON object per line:
//! - `{"prompt_sha256": "...", "response": "..."}` — exact responses keyed by
//!   prompt hash; any unknown prompt is an error.
//! - `{"day_index": 0, "action": 1.0}` — a scripted action sequence; the k-th
//!   trading request receives the k-th action rendered through the documented
//!   response template, and analyst/reflection requests get canned text.
//!
//! A file must use one format only. Scripted mocks fail once the script runs
//! out, which doubles as a reproducible mid-run outage.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::Deserialize;

use crate::agents::backend::{
    prompt_sha256, BackendError, ChatBackend, ChatRequest, ChatResponse, RequestKind,
};
use crate::agents::parse::render_action_response;

enum MockMode {
    /// Responses keyed by prompt hash.
    Fixture(HashMap<String, String>),
    /// Actions consumed by successive trading requests.
    Scripted {
        actions: Vec<f64>,
        next: Mutex<usize>,
    },
    /// Echoes the user prompt back; handy for prompt-content tests.
    Echo,
}

pub struct MockBackend {
    mode: MockMode,
}

impl MockBackend {
    pub fn echo() -> Self {
        MockBackend {
            mode: MockMode::Echo,
        }
    }

    pub fn scripted(actions: Vec<f64>) -> Self {
        MockBackend {
            mode: MockMode::Scripted {
                actions,
                next: Mutex::new(0),
            },
        }
    }

    pub fn from_fixture_map(map: HashMap<String, String>) -> Self {
        MockBackend {
            mode: MockMode::Fixture(map),
        }
    }

    /// Load either fixture format from a JSONL file.
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Line {
            Hash {
                prompt_sha256: String,
                response: String,
            },
            Script {
                day_index: usize,
                action: f64,
            },
        }

        let path_str = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::BadFixture {
            path: path_str.clone(),
            line: 0,
            reason: e.to_string(),
        })?;
        let mut map: HashMap<String, String> = HashMap::new();
        let mut script: Vec<(usize, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let parsed: Line = serde_json::from_str(raw).map_err(|e| BackendError::BadFixture {
                path: path_str.clone(),
                line,
                reason: e.to_string(),
            })?;
            match parsed {
                Line::Hash {
                    prompt_sha256,
                    response,
                } => {
                    map.insert(prompt_sha256, response);
                }
                Line::Script { day_index, action } => script.push((day_index, action)),
            }
        }
        if !map.is_empty() && !script.is_empty() {
            return Err(BackendError::BadFixture {
                path: path_str,
                line: 0,
                reason: "file mixes prompt-hash and scripted-action lines".into(),
            });
        }
        if !script.is_empty() {
            script.sort_by_key(|(day, _)| *day);
            return Ok(MockBackend::scripted(
                script.into_iter().map(|(_, a)| a).collect(),
            ));
        }
        Ok(MockBackend::from_fixture_map(map))
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let text = match &self.mode {
            MockMode::Echo => request.user.clone(),
            MockMode::Fixture(map) => {
                let hash = prompt_sha256(&request.system, &request.user);
                map.get(&hash)
                    .cloned()
                    .ok_or(BackendError::MissingFixture(hash))?
            }
            MockMode::Scripted { actions, next } => match request.kind {
                RequestKind::Trading => {
                    let mut next = next.lock().unwrap();
                    let index = *next;
                    let action = actions
                        .get(index)
                        .copied()
                        .ok_or(BackendError::ScriptExhausted(index))?;
                    *next += 1;
                    render_action_response(action)
                }
                RequestKind::MarketReport => "mock market report.".to_string(),
                RequestKind::NewsReport => "mock news digest.".to_string(),
                RequestKind::Reflection => "mock reflection.".to_string(),
            },
        };
        Ok(ChatResponse {
            text,
            model_id: self.model_id(),
            latency: std::time::Duration::ZERO,
        })
    }

    fn model_id(&self) -> String {
        match self.mode {
            MockMode::Fixture(_) => "mock-fixture".to_string(),
            MockMode::Scripted { .. } => "mock-scripted".to_string(),
            MockMode::Echo => "mock-echo".to_string(),
        }
    }
}
