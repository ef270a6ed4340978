//! Provenance header shared by every persisted artifact.
//!
//! Each artifact file starts with one line
//! `# linkpred <kind> key=value key=value ...`; `seed` and `config_hash` are
//! always present.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactMeta {
    pub kind: String,
    pub fields: BTreeMap<String, String>,
}

impl ArtifactMeta {
    pub fn new(kind: &str, seed: u64, config_hash: &str) -> Self {
        let mut fields = BTreeMap::new();
        fields.insert("seed".to_string(), seed.to_string());
        fields.insert("config_hash".to_string(), config_hash.to_string());
        ArtifactMeta {
            kind: kind.to_string(),
            fields,
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.get(key).map(String::as_str)
    }

    pub fn config_hash(&self) -> &str {
        self.get("config_hash").unwrap_or("")
    }

    pub fn to_line(&self) -> String {
        let mut line = format!("# linkpred {}", self.kind);
        for (k, v) in &self.fields {
            line.push(' ');
            line.push_str(k);
            line.push('=');
            line.push_str(v);
        }
        line
    }

    pub fn parse_line(path: &Path, line: &str) -> Result<Self> {
        let rest = line
            .strip_prefix("# linkpred ")
            .ok_or_else(|| Error::artifact(path, "missing `# linkpred` provenance header"))?;
        let mut parts = rest.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| Error::artifact(path, "provenance header has no kind"))?
            .to_string();
        let mut fields = BTreeMap::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::artifact(path, format!("bad provenance field `{p}`")))?;
            fields.insert(k.to_string(), v.to_string());
        }
        Ok(ArtifactMeta { kind, fields })
    }

    /// Error unless this artifact has the expected kind and config hash.
    pub fn expect(&self, path: &Path, kind: &str, config_hash: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::artifact(path, format!("expected a {kind} artifact, found {}", self.kind)));
        }
        if self.config_hash() != config_hash {
            return Err(Error::artifact(
                path,
                format!(
                    "produced by config hash {}, current config hash is {config_hash}",
                    self.config_hash()
                ),
            ));
        }
        Ok(())
    }
}

/// Short hex digest used to tie artifacts to the config that made them.
pub fn hash_hex(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}
