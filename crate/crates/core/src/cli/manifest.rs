use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codec::{CodecConfig, ToolFlags};

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

/// What a run was asked to do and what it produced. Equal `config_hash`
/// values must come with equal `output_hashes`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub input: String,
    pub input_hash: String,
    pub outputs: Vec<String>,
    pub qps: Vec<u8>,
    pub frames: usize,
    pub tools: ToolFlags,
    /// SHA-256 over the input hash and every setting that affects output.
    pub config_hash: String,
    pub output_hashes: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Attested<'a> {
    input_hash: &'a str,
    qps: &'a [u8],
    frames: usize,
    rfs: bool,
    pfe: bool,
    config: &'a CodecConfig,
}

impl RunManifest {
    pub fn new(
        input: &Path,
        input_bytes: &[u8],
        qps: Vec<u8>,
        frames: usize,
        tools: ToolFlags,
        config: &CodecConfig,
    ) -> serde_json::Result<Self> {
        let input_hash = sha256_hex(input_bytes);
        // joint inference does not change any output, so it stays out
        let config = CodecConfig { qp: 0, ..config.clone() };
        let attested = serde_json::to_vec(&Attested {
            input_hash: &input_hash,
            qps: &qps,
            frames,
            rfs: tools.rfs,
            pfe: tools.pfe,
            config: &config,
        })?;
        Ok(Self {
            input: input.display().to_string(),
            input_hash,
            outputs: Vec::new(),
            qps,
            frames,
            tools,
            config_hash: sha256_hex(&attested),
            output_hashes: BTreeMap::new(),
        })
    }

    pub fn add_output(&mut self, name: &str, data: &[u8]) {
        self.output_hashes.insert(name.to_string(), sha256_hex(data));
    }
}
