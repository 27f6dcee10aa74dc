use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use crate::error::CliResult;

/// Writes report files of the enabled formats into one directory.
pub struct Sink {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, formats: &[Format]) -> Self {
        Sink {
            dir: dir.to_path_buf(),
            formats: formats.to_vec(),
            written: Vec::new(),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn put(&mut self, format: Format, name: &str, body: &str) -> CliResult<()> {
        if !self.formats.contains(&format) {
            return Ok(());
        }
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, body: &str) -> CliResult<()> {
        self.put(Format::Csv, name, body)
    }

    pub fn svg(&mut self, name: &str, body: &str) -> CliResult<()> {
        self.put(Format::Svg, name, body)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> CliResult<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.put(Format::Json, name, &body)
    }
}
