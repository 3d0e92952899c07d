//! Artifact writing and validation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Where a run came from; embedded in every JSON artifact.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub mode: String,
    pub seed: u64,
    pub config_sha256: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Csv {
        name: String,
        header: Vec<String>,
        rows: Vec<Vec<f64>>,
    },
    Json {
        name: String,
        value: Value,
        required_keys: Vec<String>,
    },
}

impl Artifact {
    pub fn csv(name: &str, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Artifact::Csv {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn json(name: &str, value: Value, required_keys: &[&str]) -> Self {
        Artifact::Json {
            name: name.into(),
            value,
            required_keys: required_keys.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Artifact::Csv { name, .. } | Artifact::Json { name, .. } => name,
        }
    }

    fn render(&self) -> Result<Vec<u8>> {
        match self {
            Artifact::Csv { header, rows, .. } => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(header)?;
                for row in rows {
                    ensure!(row.len() == header.len(), "{}: ragged row", self.name());
                    ensure!(
                        row.iter().all(|x| x.is_finite()),
                        "{}: non-finite value",
                        self.name()
                    );
                    w.write_record(row.iter().map(|x| x.to_string()))?;
                }
                Ok(w.into_inner()?)
            }
            Artifact::Json { value, .. } => {
                let mut out = serde_json::to_vec_pretty(value)?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    fn validate(&self, bytes: &[u8]) -> Result<()> {
        match self {
            Artifact::Csv { header, rows, .. } => {
                ensure!(!bytes.contains(&b'\r'), "{}: CR line ending", self.name());
                let mut r = csv::Reader::from_reader(bytes);
                let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
                ensure!(&found == header, "{}: header mismatch", self.name());
                let mut n = 0;
                for rec in r.records() {
                    let rec = rec?;
                    ensure!(rec.len() == header.len(), "{}: ragged row", self.name());
                    for field in rec.iter() {
                        field
                            .parse::<f64>()
                            .with_context(|| format!("{}: bad number {field:?}", self.name()))?;
                    }
                    n += 1;
                }
                ensure!(n == rows.len(), "{}: row count mismatch", self.name());
                Ok(())
            }
            Artifact::Json { required_keys, .. } => {
                let v: Value = serde_json::from_slice(bytes)?;
                let Some(obj) = v.as_object() else {
                    bail!("{}: top level is not an object", self.name());
                };
                for k in required_keys {
                    ensure!(obj.contains_key(k), "{}: missing key {k}", self.name());
                }
                Ok(())
            }
        }
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Renders every artifact first, then writes each atomically, reads it
/// back and validates it, and finally writes `manifest.json`.
pub fn write_all(dir: &Path, provenance: &Provenance, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let rendered = artifacts
        .iter()
        .map(|a| Ok((a, a.render()?)))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (artifact, bytes) in &rendered {
        let path = write_atomic(dir, artifact.name(), bytes)?;
        let back = fs::read(&path)?;
        artifact.validate(&back)?;
        files.push(serde_json::json!({
            "name": artifact.name(),
            "bytes": back.len(),
            "sha256": hex::encode(Sha256::digest(&back)),
        }));
        written.push(path);
    }
    let manifest = Artifact::json(
        "manifest.json",
        serde_json::json!({ "provenance": provenance, "files": files }),
        &["provenance", "files"],
    );
    let bytes = manifest.render()?;
    let path = write_atomic(dir, manifest.name(), &bytes)?;
    manifest.validate(&fs::read(&path)?)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            command: "test".into(),
            mode: "analytic".into(),
            seed: 1,
            config_sha256: "00".into(),
            version: "0".into(),
        }
    }

    #[test]
    fn csv_uses_lf_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let a = Artifact::csv("x.csv", &["a", "b"], vec![vec![1.0, 0.5], vec![2.0, 1e-9]]);
        write_all(dir.path(), &prov(), &[a]).unwrap();
        let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
        assert_eq!(text, "a,b\n1,0.5\n2,0.000000001\n");
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn missing_json_key_fails_validation() {
        let a = Artifact::json("y.json", serde_json::json!({"a": 1}), &["b"]);
        let bytes = a.render().unwrap();
        assert!(a.validate(&bytes).is_err());
    }

    #[test]
    fn bad_rows_rejected_before_writing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("sub");
        let a = Artifact::csv("x.csv", &["a"], vec![vec![f64::NAN]]);
        assert!(write_all(&out, &prov(), &[a]).is_err());
        assert!(!out.exists());
    }
}
