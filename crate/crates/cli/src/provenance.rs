use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::Context;
use cogload::dataset::Manifest;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything needed to tell where an artifact came from. Embedded in every
/// JSON output and as `# ` comment lines at the top of every CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Input path as given on the command line → SHA-256 of its content.
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, config: &impl Serialize, seed: u64) -> anyhow::Result<Self> {
        let versions = BTreeMap::from([
            ("cogload".to_string(), cogload::VERSION.to_string()),
            ("cogload-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("manifest".to_string(), cogload::dataset::MANIFEST_VERSION.to_string()),
        ]);
        Ok(Self {
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            seed,
            versions,
            inputs: BTreeMap::new(),
        })
    }

    pub fn add_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let mut h = Sha256::new();
        hash_file(&mut h, path)?;
        self.inputs.insert(path.display().to_string(), hex(&h.finalize()));
        Ok(())
    }

    /// One hash over the manifest and every signal file it references, in
    /// manifest order.
    pub fn add_dataset(&mut self, manifest_path: &Path, manifest: &Manifest) -> anyhow::Result<()> {
        let mut h = Sha256::new();
        hash_file(&mut h, manifest_path)?;
        for subject in &manifest.subjects {
            for rec in &subject.recordings {
                hash_file(&mut h, &manifest.resolve(rec))?;
            }
        }
        self.inputs.insert(manifest_path.display().to_string(), hex(&h.finalize()));
        Ok(())
    }

    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("command: {}", self.command),
            format!("config: {}", self.config),
            format!("seed: {}", self.seed),
            format!(
                "versions: {}",
                self.versions.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
            ),
        ];
        lines.extend(self.inputs.iter().map(|(p, h)| format!("input: {p} sha256={h}")));
        lines
    }
}

fn hash_file(h: &mut Sha256, path: &Path) -> anyhow::Result<()> {
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).with_context(|| format!("reading {}", path.display()))?;
        if n == 0 {
            return Ok(());
        }
        h.update(&buf[..n]);
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// CSV with provenance comment lines first.
pub fn write_csv(path: &Path, prov: &Provenance, header: &[String], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for line in prov.comment_lines() {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
