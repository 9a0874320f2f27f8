use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use shiftlab::criteria::{ConditionReport, Verdict};

/// A failed run: exit code 2 for usage and input errors, 1 otherwise.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn run(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<shiftlab::Error> for Failure {
    fn from(e: shiftlab::Error) -> Self {
        use shiftlab::Error as E;
        match e {
            E::Argument(_) | E::Json(_) => Failure::usage(e.to_string()),
            E::Resource { .. } | E::WindowBounds { .. } | E::Truncation { .. } => {
                Failure::run(format!("resource: {e}"))
            }
            _ => Failure::run(e.to_string()),
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

/// An input file as recorded in the manifest.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
}

impl Input {
    pub fn read(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        Ok(Self { path: path.to_owned(), text })
    }

    /// Typed parse; serde's message carries line and column.
    pub fn parse<T: DeserializeOwned>(&self) -> Outcome<T> {
        serde_json::from_str(&self.text).map_err(|e| Failure::usage(format!("{}: {e}", self.path.display())))
    }

    pub fn record(&self) -> Value {
        json!({
            "path": self.path.display().to_string(),
            "sha256": format!("{:x}", Sha256::digest(self.text.as_bytes())),
        })
    }
}

/// Everything a report depends on. Thread counts are left out on purpose:
/// results do not depend on them.
pub fn manifest(command: &str, params: &impl Serialize, inputs: &[(&str, &Input)]) -> Value {
    let inputs: serde_json::Map<String, Value> = inputs.iter().map(|(k, i)| (k.to_string(), i.record())).collect();
    json!({
        "tool": "shiftlab",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "params": serde_json::to_value(params).expect("arguments serialize"),
        "inputs": inputs,
    })
}

pub struct Csv {
    rows: Vec<(i64, f64, String)>,
}

impl Csv {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn push(&mut self, index: i64, value: f64, series: impl Into<String>) {
        self.rows.push((index, value, series.into()));
    }

    fn write(&self, path: &Path) -> Outcome<()> {
        let fail = |e: csv::Error| Failure::run(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(fail)?;
        w.write_record(["index", "value", "series"]).map_err(fail)?;
        for (i, v, s) in &self.rows {
            w.serialize((i, v, s)).map_err(fail)?;
        }
        w.flush().map_err(|e| Failure::run(format!("{}: {e}", path.display())))
    }
}

pub struct Output<'a> {
    pub out: Option<&'a Path>,
    pub csv: Option<&'a Path>,
}

fn write_json(path: &Path, v: &Value) -> Outcome<()> {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    fs::write(path, s).map_err(|e| Failure::run(format!("{}: {e}", path.display())))
}

/// Writes the report (with its manifest embedded), the manifest sidecar and
/// the CSV table. Without `--out` the report goes to stdout.
pub fn emit(dest: &Output<'_>, manifest: Value, mut report: Value, csv: Option<Csv>) -> Outcome<()> {
    report["manifest"] = manifest.clone();
    match dest.out {
        Some(p) => {
            write_json(p, &report)?;
            let mut side = p.as_os_str().to_owned();
            side.push(".manifest.json");
            write_json(Path::new(&side), &manifest)?;
        }
        None => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
    }
    if let (Some(p), Some(t)) = (dest.csv, csv) {
        t.write(p)?;
    }
    Ok(())
}

/// Prints one line per report (and its witnesses when violated) to stderr
/// if stdout carries the report, else to stdout. Returns the exit code.
pub fn summarize(reports: &[&ConditionReport], to_stderr: bool) -> u8 {
    let mut code = 0;
    for r in reports {
        let verdict = match r.verdict {
            Verdict::HoldsOnWindow => "holds",
            Verdict::Violated => "VIOLATED",
            Verdict::Inconclusive => "inconclusive",
        };
        let mut lines = vec![format!("{}: {verdict}", r.id)];
        if r.verdict == Verdict::Violated {
            code = 1;
            for w in &r.witnesses {
                lines.push(format!("  witness {:?} {}: value {} vs bound {}", w.indices, w.kind, w.value, w.bound));
            }
        }
        for n in &r.notes {
            lines.push(format!("  note: {n}"));
        }
        for l in lines {
            if to_stderr {
                eprintln!("{l}");
            } else {
                println!("{l}");
            }
        }
    }
    code
}
