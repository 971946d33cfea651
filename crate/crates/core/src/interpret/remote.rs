//! HTTP provider adapter.
//!
//! Request: `POST {endpoint}` with JSON
//! `{"model": ..., "template_version": ..., "prompt": <rendered text>, "document": <PromptDocument>}`
//! and, when a key is configured, `Authorization: Bearer <key>`. The response
//! body must be the provider output object `{"body": ..., "keywords": {...}}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{InterpretError, InterpretationProvider, PromptDocument};

pub const ENV_ENDPOINT: &str = "YAO_REMOTE_ENDPOINT";
pub const ENV_MODEL: &str = "YAO_REMOTE_MODEL";
pub const ENV_KEY_VAR: &str = "YAO_REMOTE_KEY_ENV";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    #[serde(default = "default_model")]
    pub model: String,
    /// Name of the environment variable holding the API key; the key itself
    /// is never stored in configuration.
    #[serde(default)]
    pub key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_model() -> String {
    "default".to_owned()
}

fn default_timeout() -> u64 {
    60
}

impl RemoteConfig {
    /// Reads `YAO_REMOTE_ENDPOINT`, `YAO_REMOTE_MODEL` and `YAO_REMOTE_KEY_ENV`.
    pub fn from_env() -> Result<Self, InterpretError> {
        let endpoint = std::env::var(ENV_ENDPOINT)
            .map_err(|_| InterpretError::ProviderUnavailable(format!("{ENV_ENDPOINT} is not set")))?;
        Ok(Self {
            endpoint,
            model: std::env::var(ENV_MODEL).unwrap_or_else(|_| default_model()),
            key_env: std::env::var(ENV_KEY_VAR).ok(),
            timeout_secs: default_timeout(),
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, InterpretError> {
        serde_json::from_str(text).map_err(|e| InterpretError::ProviderUnavailable(format!("bad remote config: {e}")))
    }
}

#[derive(Debug)]
pub struct RemoteProvider {
    config: RemoteConfig,
    agent: ureq::Agent,
}

/// Builds the remote adapter. Fails when the endpoint is blank or the key
/// variable it names is unset.
pub fn remote_provider_stub(config: RemoteConfig) -> Result<RemoteProvider, InterpretError> {
    if config.endpoint.trim().is_empty() {
        return Err(InterpretError::ProviderUnavailable(
            "remote endpoint is not configured".into(),
        ));
    }
    if let Some(var) = &config.key_env {
        if std::env::var(var).is_err() {
            return Err(InterpretError::ProviderUnavailable(format!(
                "key variable {var} is not set"
            )));
        }
    }
    let agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
        .build()
        .into();
    Ok(RemoteProvider { config, agent })
}

impl InterpretationProvider for RemoteProvider {
    fn id(&self) -> &str {
        &self.config.model
    }

    fn complete(&self, doc: &PromptDocument) -> Result<String, InterpretError> {
        let unavailable = |e: ureq::Error| InterpretError::ProviderUnavailable(e.to_string());
        let body = json!({
            "model": self.config.model,
            "template_version": doc.template_version,
            "prompt": doc.render_text(),
            "document": doc,
        });
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(var) = &self.config.key_env {
            let key = std::env::var(var)
                .map_err(|_| InterpretError::ProviderUnavailable(format!("key variable {var} is not set")))?;
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(&body).map_err(unavailable)?;
        response.body_mut().read_to_string().map_err(unavailable)
    }
}
