//! Artifact assembly and delivery. Every subcommand produces one
//! [`CommandOutput`]; rendering keeps the body deterministic for a given
//! config and confines the timestamp to a comment header.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::config::OutputFormat;
use crate::CliError;

/// The data half of an artifact.
pub enum Payload {
    /// Rectangular rows for CSV (or a JSON row array).
    Table {
        header: Vec<&'static str>,
        rows: Vec<Vec<String>>,
    },
    /// A structured report.
    Report(serde_json::Value),
}

/// One finished artifact: a name for the output file, the fully resolved
/// config for embedding, and the payload.
pub struct CommandOutput {
    pub name: &'static str,
    pub config: serde_json::Value,
    pub payload: Payload,
}

/// Where and how [`deliver`] writes the artifact.
pub struct Delivery {
    pub out: Option<std::path::PathBuf>,
    pub format: OutputFormat,
}

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

impl CommandOutput {
    /// Renders to the final text. CSV artifacts start with one `#` metadata
    /// line carrying the config and timestamp; everything after that line
    /// depends only on the config and seeds. JSON artifacts embed the config
    /// and omit the timestamp entirely.
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> Result<String, CliError> {
        if !matches!(self.payload, Payload::Table { .. }) {
            return Err(CliError::Config(format!(
                "{} emits a structured report; use --format json",
                self.name
            )));
        }
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let meta = json!({
            "command": self.name,
            "generated_unix": stamp,
            "config": self.config,
        });
        let mut text = format!("# {meta}\n");
        text.push_str(&self.csv_body()?);
        Ok(text)
    }

    /// The CSV body below the metadata line.
    pub fn csv_body(&self) -> Result<String, CliError> {
        let Payload::Table { header, rows } = &self.payload else {
            return Err(CliError::Config(format!(
                "{} has no tabular form",
                self.name
            )));
        };
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(header)
            .and_then(|()| rows.iter().try_for_each(|row| writer.write_record(row)))
            .map_err(|e| CliError::Numeric(format!("csv encoding failed: {e}")))?;
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Numeric(format!("csv encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Numeric(format!("csv encoding failed: {e}")))
    }

    fn render_json(&self) -> Result<String, CliError> {
        let results = match &self.payload {
            Payload::Table { header, rows } => {
                let objects: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|row| {
                        header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| ((*k).to_string(), json!(v)))
                            .collect::<serde_json::Map<_, _>>()
                            .into()
                    })
                    .collect();
                json!(objects)
            }
            Payload::Report(value) => value.clone(),
        };
        let doc = json!({
            "command": self.name,
            "config": self.config,
            "results": results,
        });
        serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Numeric(format!("json encoding failed: {e}")))
    }
}

/// Writes the artifact to `<out>/<name>.<ext>`, or to stdout when no
/// directory was requested.
pub fn deliver(output: &CommandOutput, delivery: &Delivery) -> Result<(), CliError> {
    let text = output.render(delivery.format)?;
    match &delivery.out {
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| {
                CliError::Config(format!("cannot create {}: {e}", dir.display()))
            })?;
            write_probe(dir)?;
            let path = dir.join(format!("{}.{}", output.name, delivery.format.extension()));
            std::fs::write(&path, &text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
    }
}

/// Confirms the directory is writable beyond the single artifact write, so
/// permission problems surface as config errors.
fn write_probe(dir: &Path) -> Result<(), CliError> {
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"ok")
        .and_then(|()| std::fs::remove_file(&probe))
        .map_err(|e| CliError::Config(format!("output dir {} not writable: {e}", dir.display())))
}
