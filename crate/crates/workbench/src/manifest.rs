use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub threads: usize,
}

/// Record of one run. The digest covers everything except outputs and
/// timing, so it is known before any artifact is written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub mode: String,
    pub seed: u64,
    pub version: String,
    /// Role name to SHA-256 of the input bytes.
    pub inputs: BTreeMap<String, String>,
    /// File name to SHA-256 of the artifact bytes.
    pub outputs: BTreeMap<String, String>,
    pub timing: Timing,
    pub digest: String,
}

#[derive(Serialize)]
struct Identity<'a> {
    command: &'a str,
    params: &'a BTreeMap<String, String>,
    mode: &'a str,
    seed: u64,
    version: &'a str,
    inputs: &'a BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, mode: &str, seed: u64) -> Self {
        let mut m = Self {
            command: command.into(),
            params: BTreeMap::new(),
            mode: mode.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timing: Timing::default(),
            digest: String::new(),
        };
        m.digest = m.identity_digest();
        m
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self.digest = self.identity_digest();
        self
    }

    pub fn input(&mut self, role: &str, bytes: &[u8]) -> &mut Self {
        self.inputs.insert(role.into(), sha256_hex(bytes));
        self.digest = self.identity_digest();
        self
    }

    pub fn identity_digest(&self) -> String {
        let id = Identity {
            command: &self.command,
            params: &self.params,
            mode: &self.mode,
            seed: self.seed,
            version: &self.version,
            inputs: &self.inputs,
        };
        sha256_hex(serde_json::to_string(&id).expect("identity serializes").as_bytes())
    }

    /// Writes `bytes` to `dir/name` through a temporary file and records
    /// its digest.
    pub fn write_artifact(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&dir.join(name), bytes)?;
        self.outputs.insert(name.into(), sha256_hex(bytes));
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn save(&self, dir: &Path) -> io::Result<()> {
        write_atomic(&dir.join("manifest.json"), self.to_json().as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}
