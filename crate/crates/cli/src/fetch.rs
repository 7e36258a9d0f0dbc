//! Embedding acquisition over the one-route HTTP contract.
//!
//! `POST <url>` with `{"texts": [...]}`; the service answers
//! `{"embeddings": [[...], ...]}`, one vector per text in request order.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use dbgraph::serializer::Abstract;
use dbgraph::EmbeddingMatrixF32;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Endpoint {
    pub url: String,
    pub dim: usize,
    pub batch_size: usize,
    /// Retries per batch after the first attempt.
    pub max_retries: usize,
    pub timeout: Duration,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub embeddings: Vec<Vec<f32>>,
}

const BACKOFF: Duration = Duration::from_millis(50);

fn post_batch(agent: &ureq::Agent, endpoint: &Endpoint, texts: Vec<String>) -> Result<Vec<Vec<f32>>> {
    let request = EmbedRequest { texts };
    let mut last = String::new();
    for attempt in 0..=endpoint.max_retries {
        if attempt > 0 {
            thread::sleep(BACKOFF * (1 << attempt.min(6)));
        }
        let response = agent.post(&endpoint.url).send_json(&request);
        let parsed = response.and_then(|mut r| r.body_mut().read_json::<EmbedResponse>());
        match parsed {
            Ok(body) => return Ok(body.embeddings),
            Err(e) => last = e.to_string(),
        }
    }
    Err(CliError::Service(format!(
        "{} failed after {} attempts: {last}",
        endpoint.url,
        endpoint.max_retries + 1
    )))
}

/// Embeds `abstracts` in batches, preserving input order.
pub fn fetch_embeddings(abstracts: &[Abstract], endpoint: &Endpoint) -> Result<EmbeddingMatrixF32> {
    if endpoint.batch_size == 0 {
        return Err(CliError::Config("batch_size must be >= 1".into()));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(endpoint.timeout))
        .build()
        .into();
    let mut data = Vec::with_capacity(abstracts.len() * endpoint.dim);
    for batch in abstracts.chunks(endpoint.batch_size) {
        let texts = batch.iter().map(|a| a.text.clone()).collect();
        let vectors = post_batch(&agent, endpoint, texts)?;
        if vectors.len() != batch.len() {
            return Err(CliError::Service(format!(
                "{} vectors returned for {} texts",
                vectors.len(),
                batch.len()
            )));
        }
        for v in vectors {
            if v.len() != endpoint.dim {
                return Err(CliError::Invariant(format!(
                    "service returned {}-dim vectors, {} configured",
                    v.len(),
                    endpoint.dim
                )));
            }
            data.extend(v);
        }
    }
    let ids = abstracts.iter().map(|a| a.db_id.clone()).collect();
    Ok(EmbeddingMatrixF32::from_rows(ids, endpoint.dim, data)?)
}
