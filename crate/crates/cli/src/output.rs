//! Artifact writing: CSV tables, atomic file replacement and the manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Columns of every time-series file.
pub const TIMESERIES_COLUMNS: [&str; 9] =
    ["step", "omega_t", "lambda_t", "mean_n", "fidelity", "infidelity", "delta_g", "p_step", "p_cumulative"];

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // keeps -0 and 0 identical across runs
        return "0.00000000000e0".to_string();
    }
    format!("{x:.11e}")
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self { columns: columns.iter().map(|c| c.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    file.write_all(contents.as_bytes()).map_err(|e| CliError::io(&tmp, e))?;
    file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub timestamp: u64,
    pub config: std::collections::BTreeMap<String, String>,
    pub artifacts: Vec<Artifact>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

/// Collects artifacts written into one output directory.
#[derive(Debug)]
pub struct Bundle {
    pub dir: PathBuf,
    pub artifacts: Vec<Artifact>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl Bundle {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new(), summary: Default::default() })
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), &table.render())?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            kind: "csv".into(),
            columns: table.columns.clone(),
            rows: Some(table.rows.len()),
        });
        Ok(())
    }

    pub fn text(&mut self, name: &str, kind: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), contents)?;
        self.artifacts.push(Artifact { path: name.to_string(), kind: kind.into(), columns: Vec::new(), rows: None });
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn finish(self, mode: &str, config: &std::collections::BTreeMap<String, String>) -> Result<Manifest, CliError> {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let manifest = Manifest {
            tool: "mbcool".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            mode: mode.into(),
            timestamp,
            config: config.clone(),
            artifacts: self.artifacts,
            summary: self.summary,
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST), &(text + "\n"))?;
        Ok(manifest)
    }
}

/// Checks that every declared artifact exists, is non-empty and that CSV
/// headers and row counts match the manifest.
pub fn verify(dir: &Path) -> Result<usize, CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CliError::Verify(format!("{}: {e}", path.display())))?;
    if manifest.artifacts.is_empty() {
        return Err(CliError::Verify("manifest lists no artifacts".into()));
    }
    for a in &manifest.artifacts {
        let file = dir.join(&a.path);
        let body = fs::read_to_string(&file).map_err(|e| CliError::Verify(format!("{}: {e}", file.display())))?;
        if body.trim().is_empty() {
            return Err(CliError::Verify(format!("{} is empty", a.path)));
        }
        if a.kind == "csv" {
            let mut lines = body.lines();
            let header = lines.next().unwrap_or("");
            if header != a.columns.join(",") {
                return Err(CliError::Verify(format!("{}: header `{header}` does not match manifest", a.path)));
            }
            let rows = lines.filter(|l| !l.is_empty()).count();
            if Some(rows) != a.rows {
                return Err(CliError::Verify(format!("{}: {rows} rows, manifest says {:?}", a.path, a.rows)));
            }
        }
    }
    Ok(manifest.artifacts.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(1.0), "1.00000000000e0");
        assert_eq!(num(-0.0), num(0.0));
        assert_eq!(num(1.640625e-5), "1.64062500000e-5");
        assert_eq!(num(1.0 / 3.0).trim_start_matches('-').replace('.', "").split('e').next().unwrap().len(), 12);
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::new(dir.path()).unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        b.table("t.csv", &t).unwrap();
        b.text("plot.py", "script", "print(1)\n").unwrap();
        b.finish("cs", &Default::default()).unwrap();
        assert_eq!(verify(dir.path()).unwrap(), 2);

        fs::write(dir.path().join("t.csv"), "a,c\n1,2\n").unwrap();
        assert!(matches!(verify(dir.path()), Err(CliError::Verify(_))));
        fs::remove_file(dir.path().join("plot.py")).unwrap();
        assert!(verify(dir.path()).is_err());
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
