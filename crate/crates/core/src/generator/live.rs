use std::time::Duration;

use serde_json::json;

use crate::error::{Error, Result};
use crate::generator::provider::{Provider, ProviderCall, ProviderProfile};

const SYSTEM_PROMPT: &str = "You are a database expert who writes SQL workloads. Reply with SQL statements only.";

/// Client for an OpenAI-compatible `chat/completions` endpoint.
pub struct LiveProvider {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
}

/// Replaces `${NAME}` with the value of environment variable `NAME`.
pub fn substitute_env(raw: &str) -> Result<String> {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let tail = &rest[start + 2..];
        let end = tail
            .find('}')
            .ok_or_else(|| Error::Config(format!("unterminated `${{` in `{raw}`")))?;
        let name = &tail[..end];
        let value = std::env::var(name)
            .map_err(|_| Error::Config(format!("environment variable `{name}` is not set")))?;
        out.push_str(&value);
        rest = &tail[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl LiveProvider {
    pub fn new(profile: &ProviderProfile) -> Result<Self> {
        let endpoint = profile
            .endpoint
            .clone()
            .ok_or_else(|| Error::Config("live provider needs an endpoint".into()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(profile.timeout_ms))
            .build()
            .map_err(|e| Error::Provider(e.to_string()))?;
        Ok(Self {
            client,
            endpoint,
            model: profile.model.clone().unwrap_or_else(|| "gpt-4o".to_string()),
            temperature: profile.temperature,
            api_key: profile.api_key.as_deref().map(substitute_env).transpose()?,
        })
    }
}

impl Provider for LiveProvider {
    fn name(&self) -> &str {
        "live"
    }

    fn complete(&self, call: &ProviderCall<'_>) -> Result<String> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": call.prompt},
            ],
        });
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Error::Provider(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().unwrap_or_default();
            return Err(Error::Provider(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>())));
        }
        let v: serde_json::Value = resp.json().map_err(|e| Error::Provider(e.to_string()))?;
        v["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::Provider("response has no choices[0].message.content".into()))
    }
}
