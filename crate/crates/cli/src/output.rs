use crate::CliError;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub config: Value,
    pub artifacts: Vec<String>,
}

/// Artifacts are held in memory and written only once the run succeeded.
pub struct Run {
    command: &'static str,
    config: Value,
    seed: Option<u64>,
    files: Vec<(String, Vec<u8>)>,
}

impl Run {
    pub fn new(command: &'static str, config: &impl Serialize, seed: Option<u64>) -> Result<Self, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::config(e.to_string()))?;
        Ok(Run { command, config, seed, files: Vec::new() })
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn add_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    pub fn add_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn manifest(&self) -> Manifest {
        let canonical = serde_json::to_string(&self.config).expect("config serializes");
        let hash = Sha256::digest(canonical.as_bytes());
        Manifest {
            tool: "gffi",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            config_sha256: hash.iter().map(|b| format!("{b:02x}")).collect(),
            config: self.config.clone(),
            artifacts: self.files.iter().map(|f| f.0.clone()).collect(),
        }
    }

    /// Writes every artifact to a temporary name, then renames them all;
    /// on failure the temporaries are removed.
    pub fn commit(mut self, out: &Path) -> Result<Manifest, CliError> {
        let manifest = self.manifest();
        self.add_json("manifest.json", &manifest)?;
        fs::create_dir_all(out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
        let tmp = |name: &str| out.join(format!(".{name}.partial"));
        let mut written: Vec<&str> = Vec::new();
        for (name, bytes) in &self.files {
            if let Err(e) = fs::write(tmp(name), bytes) {
                for n in &written {
                    let _ = fs::remove_file(tmp(n));
                }
                let _ = fs::remove_file(tmp(name));
                return Err(CliError::io(format!("{name}: {e}")));
            }
            written.push(name.as_str());
        }
        for name in written {
            fs::rename(tmp(name), out.join(name)).map_err(|e| CliError::io(format!("{name}: {e}")))?;
        }
        Ok(manifest)
    }
}
