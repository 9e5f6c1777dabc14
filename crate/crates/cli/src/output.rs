//! Result emission: CSV files (UTF-8, metadata comment line, header row) and
//! JSON summaries. Float formatting uses Rust's shortest round-trip
//! representation, so identical runs produce byte-identical files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "sinai-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata stamped into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    /// The hash covers the subcommand name, seed and semantic parameters —
    /// not workers or output paths — so reruns on different worker counts
    /// stamp identical metadata.
    pub fn new<P: Serialize>(subcommand: &str, seed: u64, params: &P) -> Result<Self, CliError> {
        let canonical = serde_json::json!({
            "subcommand": subcommand,
            "seed": seed,
            "params": params,
        });
        let bytes = serde_json::to_vec(&canonical)
            .map_err(|e| CliError::Runtime(format!("serialising config for hashing: {e}")))?;
        let digest = Sha256::digest(&bytes);
        let mut hash = String::with_capacity(16);
        for b in &digest[..8] {
            hash.push_str(&format!("{b:02x}"));
        }
        Ok(Self {
            tool: TOOL,
            version: VERSION,
            seed,
            config_hash: hash,
        })
    }

    fn comment_line(&self) -> String {
        format!(
            "# {} v{} seed={} config_hash={}",
            self.tool, self.version, self.seed, self.config_hash
        )
    }
}

pub fn write_csv<I>(dir: &Path, name: &str, meta: &Meta, header: &str, rows: I) -> Result<PathBuf, CliError>
where
    I: IntoIterator<Item = String>,
{
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating output dir {dir:?}: {e}")))?;
    let path = dir.join(name);
    let file = std::fs::File::create(&path)
        .map_err(|e| CliError::Runtime(format!("creating {path:?}: {e}")))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| CliError::Runtime(format!("writing {path:?}: {e}"));
    writeln!(w, "{}", meta.comment_line()).map_err(io_err)?;
    writeln!(w, "{header}").map_err(io_err)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(path)
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    meta: &Meta,
    body: &T,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating output dir {dir:?}: {e}")))?;
    let path = dir.join(name);
    let value = serde_json::json!({
        "meta": meta,
        "result": body,
    });
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Runtime(format!("serialising {path:?}: {e}")))?;
    std::fs::write(&path, text + "\n")
        .map_err(|e| CliError::Runtime(format!("writing {path:?}: {e}")))?;
    Ok(path)
}

/// `Display`-based cell formatting; `None` becomes an empty cell.
pub fn opt_cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
