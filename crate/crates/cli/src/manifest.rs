use std::time::{SystemTime, UNIX_EPOCH};

use dscs::format::Document;

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Provenance recorded alongside every output: the command line, tool
/// version, seed, and wall-clock timestamps.
#[derive(Debug, Clone)]
pub struct RunManifest {
    command: String,
    args: Vec<String>,
    base_seed: Option<u64>,
    started_unix: u64,
}

impl RunManifest {
    pub fn start(command: &str, base_seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            base_seed,
            started_unix: unix_now(),
        }
    }

    fn fill(&self, doc: &mut Document, prefix: &str) {
        doc.set(&format!("{prefix}command"), &self.command);
        doc.set(&format!("{prefix}args"), self.args.join(" "));
        doc.set(&format!("{prefix}tool_version"), env!("CARGO_PKG_VERSION"));
        if let Some(seed) = self.base_seed {
            doc.set(&format!("{prefix}base_seed"), seed);
        }
        doc.set(&format!("{prefix}started_unix"), self.started_unix);
        doc.set(&format!("{prefix}finished_unix"), unix_now());
    }

    /// Adds `manifest.*` keys to an output document.
    pub fn embed(&self, doc: &mut Document) {
        self.fill(doc, "manifest.");
    }

    /// Stand-alone manifest, for outputs that cannot carry one (CSV).
    pub fn document(&self, output: &str) -> Document {
        let mut doc = Document::new("manifest");
        self.fill(&mut doc, "");
        doc.set("output", output);
        doc
    }
}
