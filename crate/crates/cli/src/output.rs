use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files under one directory and records their hashes.
pub struct OutDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: BTreeMap::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes `bytes` to `name` (a relative path) and remembers its hash.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish<C: Serialize + Clone>(
        mut self,
        command: &str,
        config: &C,
    ) -> Result<Manifest<C>, CliError> {
        let config_json =
            serde_json::to_string(config).map_err(|e| CliError::Internal(e.to_string()))?;
        let manifest = Manifest {
            tool: "visfore".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            config: config.clone(),
            outputs: std::mem::take(&mut self.files),
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let path = self.root.join("manifest.json");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

/// Run manifest: the fully resolved config plus hashes of every output.
/// Holds no timestamps or host details so reruns are byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub config: C,
    pub outputs: BTreeMap<String, String>,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.write("a/b.txt", b"abc").unwrap();
        let m = out.finish("test", &vec![1, 2]).unwrap();
        assert_eq!(m.outputs["a/b.txt"], sha256_hex(b"abc"));
        assert_eq!(m.config_sha256, sha256_hex(b"[1,2]"));
        let back: Manifest<Vec<i32>> =
            serde_json::from_str(&read_text(&dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
