//! Artifact files. Every file carries the config hash: CSV files and
//! scripts as a leading `# config_hash:` comment, JSON as a field.

use std::fs;
use std::path::PathBuf;

use crate::config::{Format, RunConfig};

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl Artifacts {
    /// Creates the output directory and stores the config file form in it.
    pub fn create(config: &RunConfig) -> std::io::Result<Self> {
        fs::create_dir_all(&config.out)?;
        let mut artifacts = Artifacts {
            dir: config.out.clone(),
            hash: config.hash(),
            formats: config.formats.clone(),
            written: Vec::new(),
        };
        let body = format!("# config_hash: {}\n{}", artifacts.hash, config.to_file());
        artifacts.write("config.txt", &body)?;
        Ok(artifacts)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    fn commented(&self, body: &str) -> String {
        format!("# config_hash: {}\n{body}", self.hash)
    }

    /// Tables are written when CSV is requested, or when a plot script
    /// needs them.
    pub fn csv(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        if self.wants(Format::Csv) || self.wants(Format::Gnuplot) {
            let text = self.commented(body);
            self.write(name, &text)?;
        }
        Ok(())
    }

    pub fn json(&mut self, name: &str, mut value: serde_json::Value) -> std::io::Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        if let Some(map) = value.as_object_mut() {
            map.insert("config_hash".into(), self.hash.clone().into());
        }
        let mut text = serde_json::to_string_pretty(&value).expect("json values serialize");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn gnuplot(&mut self, name: &str, script: &str) -> std::io::Result<()> {
        if self.wants(Format::Gnuplot) {
            let text = self.commented(script);
            self.write(name, &text)?;
        }
        Ok(())
    }

    /// Always written: the plain-text summary.
    pub fn text(&mut self, name: &str, body: &str) -> std::io::Result<()> {
        let text = self.commented(body);
        self.write(name, &text)
    }
}

/// Preamble shared by the plot scripts: comma-separated input with a
/// header row, PNG output next to the script.
pub fn gnuplot_preamble(png: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,600\n\
         set output '{png}'\n\
         set grid\n"
    )
}

