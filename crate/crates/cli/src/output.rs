use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Header written at the top of every artifact.
#[derive(Debug, Clone)]
pub struct Header {
    pub experiment: String,
    pub config_json: String,
    pub seed: Option<u64>,
}

impl Header {
    pub fn lines(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# toric-bath {}\n# experiment: {}\n# seed: {}\n# config: {}\n",
            toric_bath::VERSION,
            self.experiment,
            seed,
            self.config_json
        )
    }
}

pub struct OutDir {
    pub path: PathBuf,
    header: Header,
}

impl OutDir {
    pub fn create(path: &Path, header: Header) -> Result<Self, CliError> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::Unwritable(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            header,
        })
    }

    fn open(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        let p = self.path.join(name);
        let file =
            File::create(&p).map_err(|e| CliError::Unwritable(format!("{}: {e}", p.display())))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.header.lines().as_bytes())
            .map_err(|e| CliError::Unwritable(format!("{}: {e}", p.display())))?;
        Ok(w)
    }

    /// CSV with the header block as leading `#` lines.
    pub fn csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let w = self.open(name)?;
        let mut csv = csv::Writer::from_writer(w);
        for r in rows {
            csv.serialize(r)
                .map_err(|e| CliError::Unwritable(format!("{name}: {e}")))?;
        }
        csv.flush()
            .map_err(|e| CliError::Unwritable(format!("{name}: {e}")))?;
        Ok(self.path.join(name))
    }

    /// Pretty JSON preceded by the header block.
    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut w = self.open(name)?;
        let body = serde_json::to_string_pretty(value).expect("summary serializes");
        writeln!(w, "{body}")
            .and_then(|_| w.flush())
            .map_err(|e| CliError::Unwritable(format!("{name}: {e}")))?;
        Ok(self.path.join(name))
    }
}

/// Strips `#` header lines so the remainder parses as CSV or JSON.
pub fn strip_header(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Config echoed in an artifact header.
pub fn header_config(text: &str) -> Option<&str> {
    text.lines().find_map(|l| l.strip_prefix("# config: "))
}
