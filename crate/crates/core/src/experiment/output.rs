use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::ela::CATALOGUE_VERSION;
use crate::error::Result;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes through a temporary sibling, then renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// In-memory CSV with LF line endings.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    columns: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let columns: Vec<String> = columns.iter().map(|c| c.as_ref().to_string()).collect();
        writer.write_record(&columns)?;
        Ok(Self { writer, columns })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| crate::Error::Io(e.into_error()))
    }
}

/// Number formatting shared by every artifact: shortest round-trip form,
/// empty for absent values.
pub fn fmt_num(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

#[derive(Serialize)]
struct Meta<'a> {
    artifact: &'a str,
    artifact_version: &'a str,
    catalogue_version: &'a str,
    experiment: &'a str,
    config_hash: String,
    columns: &'a [String],
}

/// Writes a CSV and its `.meta.json` sidecar. Returns the CSV path.
pub fn emit_csv(config: &ExperimentConfig, name: &str, table: CsvTable) -> Result<PathBuf> {
    let columns = table.columns().to_vec();
    emit_bytes(config, name, &columns, &table.into_bytes()?)
}

/// As [`emit_csv`] for CSV text produced elsewhere; columns are read from
/// its header line.
pub fn emit_csv_bytes(config: &ExperimentConfig, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let header = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let columns: Vec<String> = String::from_utf8_lossy(header).split(',').map(str::to_string).collect();
    emit_bytes(config, name, &columns, bytes)
}

fn emit_bytes(config: &ExperimentConfig, name: &str, columns: &[String], bytes: &[u8]) -> Result<PathBuf> {
    let path = config.output_dir.join(name);
    let meta = Meta {
        artifact: name,
        artifact_version: ARTIFACT_VERSION,
        catalogue_version: CATALOGUE_VERSION,
        experiment: config.experiment.name(),
        config_hash: config.hash(),
        columns,
    };
    let mut meta_json = serde_json::to_vec_pretty(&meta)?;
    meta_json.push(b'\n');
    write_atomic(&path, bytes)?;
    write_atomic(&config.output_dir.join(format!("{name}.meta.json")), &meta_json)?;
    Ok(path)
}

/// Cached result of one work unit, or `None` when absent or unreadable.
pub fn read_cache<T: DeserializeOwned>(path: &Path) -> Option<T> {
    let bytes = fs::read(path).ok()?;
    match serde_json::from_slice(&bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("ignoring unreadable cache file {}: {e}", path.display());
            None
        }
    }
}

pub fn write_cache<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &serde_json::to_vec(value)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn table_layout() {
        let mut t = CsvTable::new(&["a", "b"]).unwrap();
        t.row([fmt_num(0.1), fmt_opt(None)]).unwrap();
        assert_eq!(t.into_bytes().unwrap(), b"a,b\n0.1,\n");
    }
}
