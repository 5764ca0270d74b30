use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Output directory of one run. Every file written through it carries the
/// resolved configuration.
pub struct OutDir {
    path: PathBuf,
    config: Value,
}

impl OutDir {
    pub fn create(command: &str, out: Option<&Path>, config: &impl Serialize) -> Result<Self, CliError> {
        let path = match out {
            Some(p) => p.to_path_buf(),
            None => {
                let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S%.3f");
                PathBuf::from("out").join(format!("{command}-{stamp}"))
            }
        };
        fs::create_dir_all(&path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(CliError::Runtime)?;
        let config = json!({ "command": command, "params": config });
        Ok(Self { path, config })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes `{"config": ..., <fields of value>}`.
    pub fn json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("config".into(), self.config.clone());
        match serde_json::to_value(value).map_err(|e| CliError::Runtime(e.into()))? {
            Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("result".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json value");
        self.write(name, &(text + "\n"))
    }

    /// Writes a CSV whose first line is `# config: <json>`.
    pub fn csv(&self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let mut text = format!("# config: {}\n", self.config);
        text.push_str(std::str::from_utf8(body).expect("csv is utf-8"));
        self.write(name, &text)
    }

    pub fn raw(&self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, body)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let p = self.path.join(name);
        fs::write(&p, text)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(CliError::Runtime)
    }
}
