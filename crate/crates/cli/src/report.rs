//! Report document: one JSON file per command run, deterministic byte-for-byte
//! given identical inputs and tool version. Wall-clock timings go to stderr,
//! never into the report.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use holder_core::error::Result;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub params: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus_certificate: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seminorm: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale_profile: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_profile_min: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub far_profile_max: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bmo: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vmo: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meyers: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurements: Option<Value>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: &str, inputs: Vec<InputDigest>, params: Value) -> Self {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs,
            params,
            modulus_certificate: None,
            seminorm: None,
            scale_profile: None,
            far_profile_min: None,
            far_profile_max: None,
            verdict: None,
            bmo: None,
            vmo: None,
            meyers: None,
            plan: None,
            pipeline: None,
            measurements: None,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn digest_file(path: &str) -> Result<InputDigest> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect::<String>();
    Ok(InputDigest { path: path.to_string(), sha256 })
}
