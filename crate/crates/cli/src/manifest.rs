use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// Everything needed to rerun a command and get the same bytes back.
///
/// The worker-thread count and output locations are deliberately absent:
/// neither may change a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<P: Serialize>(
        command: &str,
        params: &P,
        seed: Option<u64>,
        timestamp: String,
    ) -> Result<Self, CliError> {
        Ok(Self {
            command: command.to_string(),
            params: serde_json::to_value(params).map_err(|e| CliError::Internal(e.to_string()))?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        })
    }
}

/// `--timestamp` if given (RFC 3339), else `SOURCE_DATE_EPOCH`, else now.
pub fn resolve_timestamp(flag: Option<&str>) -> Result<String, CliError> {
    if let Some(ts) = flag {
        let parsed = DateTime::parse_from_rfc3339(ts)
            .map_err(|e| CliError::Usage(format!("invalid --timestamp {ts:?}: {e}")))?;
        return Ok(parsed
            .with_timezone(&Utc)
            .to_rfc3339_opts(SecondsFormat::Secs, true));
    }
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        let secs: i64 = epoch
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid SOURCE_DATE_EPOCH {epoch:?}")))?;
        let dt = DateTime::<Utc>::from_timestamp(secs, 0)
            .ok_or_else(|| CliError::Usage(format!("SOURCE_DATE_EPOCH out of range: {secs}")))?;
        return Ok(dt.to_rfc3339_opts(SecondsFormat::Secs, true));
    }
    Ok(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true))
}
