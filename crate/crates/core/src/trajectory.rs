//! Trajectory records and the tab-separated trajectory file.
//!
//! One line per record: `step\tmx\tmy\tmz` with six fractional digits and
//! no header. `step` counts completed integration steps; physical time is
//! `step * dt`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub step: u64,
    /// Averaged magnetization divided by ms.
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineEnding {
    #[default]
    Lf,
    /// Byte-compatible with output produced by `fprintf(..., '\r\n')`.
    CrLf,
}

impl LineEnding {
    pub fn as_str(self) -> &'static str {
        match self {
            LineEnding::Lf => "\n",
            LineEnding::CrLf => "\r\n",
        }
    }
}

pub fn format_record(rec: &TrajectoryRecord, ending: LineEnding) -> String {
    format!(
        "{}\t{:.6}\t{:.6}\t{:.6}{}",
        rec.step,
        rec.mx,
        rec.my,
        rec.mz,
        ending.as_str()
    )
}

/// Receives trajectory records in step order.
pub trait TrajectorySink {
    fn record(&mut self, rec: TrajectoryRecord) -> Result<()>;
}

impl TrajectorySink for Vec<TrajectoryRecord> {
    fn record(&mut self, rec: TrajectoryRecord) -> Result<()> {
        self.push(rec);
        Ok(())
    }
}

/// Streams records to a file as they arrive.
pub struct TrajectoryWriter {
    path: PathBuf,
    out: BufWriter<File>,
    ending: LineEnding,
}

impl TrajectoryWriter {
    pub fn create(path: impl AsRef<Path>, ending: LineEnding) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok(TrajectoryWriter {
            path,
            out: BufWriter::new(file),
            ending,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|source| Error::Io {
            path: self.path.clone(),
            source,
        })
    }
}

impl TrajectorySink for TrajectoryWriter {
    fn record(&mut self, rec: TrajectoryRecord) -> Result<()> {
        self.out
            .write_all(format_record(&rec, self.ending).as_bytes())
            .map_err(|source| Error::Io {
                path: self.path.clone(),
                source,
            })
    }
}

pub fn write_trajectory(records: &[TrajectoryRecord], path: impl AsRef<Path>, ending: LineEnding) -> Result<()> {
    let mut w = TrajectoryWriter::create(path, ending)?;
    for rec in records {
        w.record(*rec)?;
    }
    w.finish()
}

/// Parses a trajectory file written by [`write_trajectory`] (either line ending).
pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectoryRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::config(n + 1, format!("malformed trajectory line `{line}`"));
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        out.push(TrajectoryRecord {
            step: cols[0].trim().parse().map_err(|_| bad())?,
            mx: num(cols[1])?,
            my: num(cols[2])?,
            mz: num(cols[3])?,
        });
    }
    Ok(out)
}
