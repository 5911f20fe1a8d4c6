use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::Failure;

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
    pub settings: serde_json::Value,
    pub outputs: Vec<String>,
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(root).map_err(|e| Failure::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(mut self, command: &'static str, inputs: Vec<PathBuf>, seed: u64, settings: serde_json::Value) -> Result<PathBuf, Failure> {
        let manifest = RunManifest {
            tool: "flownet",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs,
            seed,
            settings,
            outputs: self.written.clone(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(self.root)
    }
}
