use std::io::Write;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Command result. Everything outside `envelope` depends only on the config and tool version.
#[derive(Debug, Serialize)]
pub struct RunReport<P: Serialize> {
    pub command: &'static str,
    pub config_digest: String,
    pub tool_version: &'static str,
    pub payload: P,
    pub envelope: Envelope,
}

#[derive(Debug, Serialize)]
pub struct Envelope {
    pub wall_clock_ms: u64,
}

impl<P: Serialize> RunReport<P> {
    pub fn new(command: &'static str, raw_config: &[u8], payload: P, elapsed: Duration) -> Self {
        RunReport {
            command,
            config_digest: hex::encode(Sha256::digest(raw_config)),
            tool_version: env!("CARGO_PKG_VERSION"),
            payload,
            envelope: Envelope { wall_clock_ms: elapsed.as_millis() as u64 },
        }
    }
}

/// Pretty JSON to `path`, or stdout when there is none.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
