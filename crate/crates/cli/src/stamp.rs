//! Reproducibility headers embedded in every artifact.
//!
//! Each output records the tool version, the subcommand, and every setting
//! that shaped it: paths as typed, seeds, model parameters, derived
//! defaults. Headers carry no wall-clock time or host details, so re-running
//! the same command over the same inputs reproduces the artifact byte for
//! byte, and the header alone is enough to re-run it.

use indexmap::IndexMap;

/// Ordered key/value configuration record attached to one artifact.
#[derive(Debug, Clone)]
pub struct Stamp {
    command: &'static str,
    entries: IndexMap<String, String>,
}

impl Stamp {
    pub fn new(command: &'static str) -> Self {
        Stamp { command, entries: IndexMap::new() }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    /// Chainable [`set`](Self::set) for building a stamp in one expression.
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    /// First header line: tool, version, subcommand.
    pub fn tool_line(&self) -> String {
        format!("dstlab {} {}", env!("CARGO_PKG_VERSION"), self.command)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// `#`-comment block prepended to CSV artifacts. Every CSV reader in the
    /// toolkit skips `#` lines, so stamped files round-trip unmodified.
    pub fn csv_header(&self) -> String {
        let mut out = format!("# {}\n", self.tool_line());
        for (k, v) in &self.entries {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out
    }

    /// The header as a JSON object, stored under a top-level `config` key.
    pub fn json_value(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        map.insert("tool".into(), "dstlab".into());
        map.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        map.insert("command".into(), self.command.into());
        for (k, v) in &self.entries {
            map.insert(k.clone(), v.clone().into());
        }
        serde_json::Value::Object(map)
    }

    /// Visible configuration section for markdown artifacts.
    pub fn markdown(&self) -> String {
        let mut out = format!("Generated by `{}`.\n\n", self.tool_line());
        for (k, v) in &self.entries {
            out.push_str(&format!("- {k}: `{v}`\n"));
        }
        out
    }
}

/// A complete JSON artifact: `config` header followed by payload fields, in
/// insertion order, pretty-printed with a trailing newline.
pub fn json_artifact(stamp: &Stamp, payload: Vec<(&str, serde_json::Value)>) -> String {
    let mut map = serde_json::Map::new();
    map.insert("config".into(), stamp.json_value());
    for (k, v) in payload {
        map.insert(k.to_string(), v);
    }
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .expect("artifact serialization cannot fail");
    text.push('\n');
    text
}
