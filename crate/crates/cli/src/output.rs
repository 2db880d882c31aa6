//! CSV emission with a trailing metadata block, CSV input readers and JSON diagnostics.

use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Floating-point cell with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// SHA-256 of the configuration text and the effective seed.
pub fn config_hash(text: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update(b"\nseed=");
    h.update(seed.to_string().as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// In-memory CSV table; written in one piece so that failed runs leave no partial output.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    metadata: Vec<(String, String)>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new(), metadata: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Adds a `key=value` pair to the trailing comment block.
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Serializes the table: header, rows, then `# config_hash=…, version=…` and any further
    /// metadata as comment lines.
    pub fn render(&self, hash: &str) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let mut out = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.extend_from_slice(format!("# config_hash={hash}, version={VERSION}\n").as_bytes());
        for (k, v) in &self.metadata {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path, hash: &str) -> Result<(), CliError> {
        let bytes = self.render(hash)?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e)))
    }
}

/// `<out>.diag.json`.
pub fn diag_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".diag.json");
    PathBuf::from(s)
}

/// Sibling of `out` named `<stem>.<suffix>.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e)))
}

/// Parsed CSV input: header names, numeric rows and `key=value` metadata from comment lines.
#[derive(Debug, Clone, Default)]
pub struct CsvInput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Vec<(String, String)>,
}

impl CsvInput {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Reads a numeric CSV whose header must start with `required` (further columns may follow only
/// if listed in `optional`). Lines starting with `#` are metadata.
pub fn read_numeric_csv(path: &Path, required: &[&str], optional: &[&str]) -> Result<CsvInput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
    let bad = |msg: String| CliError::Config(format!("{}: {}", path.display(), msg));
    let mut metadata = Vec::new();
    for line in text.lines().filter_map(|l| l.trim_start().strip_prefix('#')) {
        for part in line.split(',') {
            if let Some((k, v)) = part.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let allowed = required.len() + optional.len();
    if header.len() < required.len()
        || header.len() > allowed
        || header.iter().zip(required.iter().chain(optional)).any(|(h, e)| h != e)
    {
        let mut expected = required.join(",");
        if !optional.is_empty() {
            expected.push_str(&format!("[,{}]", optional.join(",")));
        }
        return Err(bad(format!("expected header {expected}, found {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("row {}: '{}' is not a number", i + 1, s))))
            .collect::<Result<Vec<f64>, _>>()?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(bad(format!("row {}: non-finite value", i + 1)));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(CsvInput { header, rows, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn render_has_header_rows_and_footer() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![fmt_f(1.0), fmt_f(2.0)]);
        t.meta("regime", "C1");
        let s = String::from_utf8(t.render("abc").unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[2], format!("# config_hash=abc, version={VERSION}"));
        assert_eq!(lines[3], "# regime=C1");
    }

    #[test]
    fn reads_back_rendered_tables() {
        let mut t = Table::new(["lambda", "weight"]);
        t.push(vec![fmt_f(0.5), fmt_f(0.25)]);
        t.meta("zone_n", fmt_f(2.0));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        t.write(&p, "h").unwrap();
        let input = read_numeric_csv(&p, &["lambda", "weight"], &["is_kernel"]).unwrap();
        assert_eq!(input.rows, vec![vec![0.5, 0.25]]);
        assert_eq!(input.meta("config_hash"), Some("h"));
        assert_eq!(input.meta("zone_n").map(|v| v.parse::<f64>().unwrap()), Some(2.0));
        assert!(read_numeric_csv(&p, &["lambda", "weight", "is_kernel"], &[]).is_err());
    }

    #[test]
    fn hash_depends_on_seed() {
        assert_ne!(config_hash("x", 1), config_hash("x", 2));
        assert_eq!(config_hash("x", 1).len(), 64);
    }
}
