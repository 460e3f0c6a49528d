//! CSV tables, run manifests and content hashes.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Git-style object hash: `sha256("blob {len}\0{bytes}")`, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    format!("{:x}", h.finalize())
}

/// Compact JSON with object keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json's map is ordered by key unless `preserve_order` is enabled.
    Ok(serde_json::to_string(&serde_json::to_value(value)?)?)
}

/// Writes `rows` under `header` after `#`-prefixed metadata lines.
pub fn write_csv<R: Serialize>(path: &Path, metadata: &[(String, String)], rows: &[R]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for (k, v) in metadata {
        writeln!(file, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidParameter(format!("csv: {other:?}")),
    }
}

/// Reads a CSV written by [`write_csv`], skipping metadata lines.
pub fn read_csv_records(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|x| x.iter().map(String::from).collect()).map_err(csv_err))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&serde_json::to_value(value)?)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Output directory plus the list of files written into it.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    /// Path of `name` inside the directory; `name` must be a bare file name.
    pub fn path(&mut self, name: &str) -> Result<PathBuf> {
        if name.contains('/') || name.contains('\\') || name == ".." || name.is_empty() {
            return Err(Error::InvalidParameter(format!("output name '{name}' must be a plain file name")));
        }
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(self.dir.join(name))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `(file, content hash)` of every file written so far.
    pub fn hashes(&self) -> Result<Vec<Value>> {
        self.files
            .iter()
            .map(|f| {
                let bytes = fs::read(self.dir.join(f))?;
                Ok(serde_json::json!({ "file": f, "sha256": content_hash(&bytes) }))
            })
            .collect()
    }
}

/// Run manifest. `wall_time_s` is only present on request so that reruns
/// stay byte-identical by default.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub config_hash: String,
    pub outputs: Vec<Value>,
    pub caveats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Manifest {
    pub fn new<C: Serialize>(subcommand: &str, seed: Option<u64>, config: &C) -> Result<Self> {
        let canonical = canonical_json(config)?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            seed,
            config: serde_json::from_str(&canonical)?,
            config_hash: content_hash(canonical.as_bytes()),
            outputs: Vec::new(),
            caveats: Vec::new(),
            summary: None,
            wall_time_s: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_convention() {
        // git hash-object with the sha256 object format
        assert_eq!(content_hash(b""), "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813");
        assert_eq!(content_hash(b"hello\n"), "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4");
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2, "c": 3}});
        assert_eq!(canonical_json(&v).unwrap(), r#"{"a":{"c":3,"d":2},"b":1}"#);
    }

    #[test]
    fn csv_round_trip_skips_metadata() {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            y: &'static str,
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &[("seed".into(), "3".into())], &[Row { x: 0.5, y: "a" }, Row { x: 1e-20, y: "b" }]).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# seed: 3\nx,y\n"));
        let (h, rows) = read_csv_records(&p).unwrap();
        assert_eq!(h, vec!["x", "y"]);
        assert_eq!(rows[1], vec!["1e-20", "b"]);
    }

    #[test]
    fn output_names_stay_inside() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::new(dir.path()).unwrap();
        assert!(out.path("../x.csv").is_err());
        assert!(out.path("a/b.csv").is_err());
        assert!(out.path("ok.csv").is_ok());
    }
}
