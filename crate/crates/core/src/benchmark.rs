//! Per-step timing of the standard problem #3 cube across sizes, backends
//! and precisions.

use std::fmt::Write as _;
use std::time::Instant;

use crate::backend::Backend;
use crate::demag::{build_demag_tensor, demag_field_direct};
use crate::error::{Error, Result};
use crate::grid::{init_uniform, Grid, Vec3, VectorField};
use crate::problems::standard_problem_3_benchmark;
use crate::real::{Precision, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub sizes: Vec<usize>,
    pub backends: Vec<Backend>,
    pub precisions: Vec<Precision>,
    pub warmup_steps: u64,
    pub measure_steps: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            sizes: vec![8, 16, 32, 64],
            backends: vec![Backend::Serial, Backend::Parallel],
            precisions: vec![Precision::F64, Precision::F32],
            warmup_steps: 5,
            measure_steps: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub ms_per_step: f64,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub size: usize,
    pub backend: Backend,
    pub precision: Precision,
    /// The error message if this configuration could not be run.
    pub result: std::result::Result<Measurement, String>,
}

impl BenchmarkRow {
    pub fn label(&self) -> String {
        format!("{}^3", self.size)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkReport {
    pub fn time(&self, size: usize, backend: Backend, precision: Precision) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.size == size && r.backend == backend && r.precision == precision)
            .and_then(|r| r.result.as_ref().ok())
            .map(|m| m.ms_per_step)
    }

    /// Serial time divided by `backend` time at the same size and precision.
    pub fn speedup(&self, size: usize, backend: Backend, precision: Precision) -> Option<f64> {
        let serial = self.time(size, Backend::Serial, precision)?;
        let other = self.time(size, backend, precision)?;
        Some(serial / other)
    }

    fn sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !v.contains(&r.size) {
                v.push(r.size);
            }
        }
        v
    }

    fn columns(&self) -> Vec<(Backend, Precision)> {
        let mut v = Vec::new();
        for r in &self.rows {
            if !v.contains(&(r.backend, r.precision)) {
                v.push((r.backend, r.precision));
            }
        }
        v
    }

    /// `size\tbackend\tprecision\tms_per_step`, one line per row. Failed rows
    /// carry `NA` in the last column.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let t = match &r.result {
                Ok(m) => format!("{:.6}", m.ms_per_step),
                Err(_) => "NA".to_string(),
            };
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.label(), r.backend, r.precision, t);
        }
        out
    }

    /// Aligned text table: one row per size, a time column (ms per step)
    /// per backend and precision, and a speedup column after every
    /// non-serial backend.
    pub fn render_table(&self) -> String {
        let mut header = vec!["Size".to_string()];
        let cols = self.columns();
        for &(b, p) in &cols {
            header.push(format!("{b} {p} (ms)"));
            if b != Backend::Serial {
                header.push(format!("Speedup {p}"));
            }
        }
        let mut body = Vec::new();
        for n in self.sizes() {
            let mut line = vec![format!("{n}^3")];
            for &(b, p) in &cols {
                let row = self.rows.iter().find(|r| r.size == n && r.backend == b && r.precision == p);
                line.push(match row.map(|r| &r.result) {
                    Some(Ok(m)) => format!("{:.3}", m.ms_per_step),
                    Some(Err(_)) => "failed".into(),
                    None => "-".into(),
                });
                if b != Backend::Serial {
                    line.push(match self.speedup(n, b, p) {
                        Some(s) => format!("{s:.2}"),
                        None => "-".into(),
                    });
                }
            }
            body.push(line);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| body.iter().map(|l| l[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let fmt_line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = fmt_line(&header);
        out.push('\n');
        out.push_str(&"-".repeat(out.len() - 1));
        out.push('\n');
        for line in &body {
            out.push_str(&fmt_line(line));
            out.push('\n');
        }
        for r in &self.rows {
            if let Err(e) = &r.result {
                let _ = writeln!(out, "{} {} {}: {e}", r.label(), r.backend, r.precision);
            }
        }
        out
    }
}

/// Mean wall time per integration step of the `n³` benchmark cube.
/// Setup and warmup steps are excluded from the measurement.
pub fn measure_step<T: Real>(n: usize, backend: Backend, warmup: u64, measure: u64) -> Result<Measurement> {
    if measure == 0 {
        return Err(Error::InvalidArgument("at least one measured step is required".into()));
    }
    let spec = standard_problem_3_benchmark(n)?;
    let mut state = spec.build_state::<T>(backend)?;
    for _ in 0..warmup {
        state.advance()?;
    }
    let start = Instant::now();
    for _ in 0..measure {
        state.advance()?;
    }
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    Ok(Measurement {
        ms_per_step: elapsed / measure as f64,
        steps: measure,
    })
}

/// Mean wall time in ms of one direct-sum demag evaluation on an `n³` cube.
pub fn measure_direct_demag(n: usize, repeats: u32) -> Result<f64> {
    let grid = Grid::new(n, n, n, 1.0)?;
    let tensor = build_demag_tensor(&grid)?;
    let m: VectorField<f64> = init_uniform(grid, Vec3::new(1.0, 0.5, 0.25), 1000.0)?;
    let repeats = repeats.max(1);
    let start = Instant::now();
    for _ in 0..repeats {
        std::hint::black_box(demag_field_direct(&m, &tensor, &grid)?);
    }
    Ok(start.elapsed().as_secs_f64() * 1e3 / repeats as f64)
}

/// Runs every size × backend × precision combination. A failing row is
/// recorded and the remaining rows still run.
pub fn run_benchmark(opts: &BenchmarkOptions) -> Result<BenchmarkReport> {
    run_benchmark_with(opts, |_| {})
}

/// Like [`run_benchmark`], calling `progress` after each row.
pub fn run_benchmark_with(opts: &BenchmarkOptions, mut progress: impl FnMut(&BenchmarkRow)) -> Result<BenchmarkReport> {
    if opts.sizes.is_empty() || opts.backends.is_empty() || opts.precisions.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs at least one size, backend and precision".into()));
    }
    if opts.measure_steps == 0 {
        return Err(Error::InvalidArgument("at least one measured step is required".into()));
    }
    let mut report = BenchmarkReport::default();
    for &size in &opts.sizes {
        for &precision in &opts.precisions {
            for &backend in &opts.backends {
                let (w, m) = (opts.warmup_steps, opts.measure_steps);
                let result = match precision {
                    Precision::F64 => measure_step::<f64>(size, backend, w, m),
                    Precision::F32 => measure_step::<f32>(size, backend, w, m),
                };
                let row = BenchmarkRow {
                    size,
                    backend,
                    precision,
                    result: result.map_err(|e| e.to_string()),
                };
                progress(&row);
                report.rows.push(row);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(size: usize, backend: Backend, precision: Precision, ms: f64) -> BenchmarkRow {
        BenchmarkRow {
            size,
            backend,
            precision,
            result: Ok(Measurement {
                ms_per_step: ms,
                steps: 10,
            }),
        }
    }

    #[test]
    fn speedup_is_serial_over_other() {
        let report = BenchmarkReport {
            rows: vec![
                row(8, Backend::Serial, Precision::F64, 4.0),
                row(8, Backend::Parallel, Precision::F64, 1.0),
            ],
        };
        assert_eq!(report.speedup(8, Backend::Serial, Precision::F64), Some(1.0));
        assert_eq!(report.speedup(8, Backend::Parallel, Precision::F64), Some(4.0));
        assert_eq!(report.speedup(8, Backend::Parallel, Precision::F32), None);
    }

    #[test]
    fn table_and_tsv_layout() {
        let mut rows = Vec::new();
        for n in [8, 16] {
            rows.push(row(n, Backend::Serial, Precision::F64, 2.0 * n as f64));
            rows.push(row(n, Backend::Parallel, Precision::F64, n as f64));
        }
        rows.push(BenchmarkRow {
            size: 32,
            backend: Backend::Serial,
            precision: Precision::F64,
            result: Err("allocation of 1 elements failed".into()),
        });
        let report = BenchmarkReport { rows };
        let tsv = report.to_tsv();
        assert_eq!(tsv.lines().count(), 5);
        assert_eq!(tsv.lines().next().unwrap(), "8^3\tserial\tf64\t16.000000");
        assert!(tsv.ends_with("32^3\tserial\tf64\tNA\n"));
        let table = report.render_table();
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Size"));
        assert!(lines[0].contains("Speedup f64"));
        assert!(lines[2].starts_with("8^3"));
        assert!(lines[2].trim_end().ends_with("2.00"));
        assert!(lines[4].contains("failed"));
        assert!(table.contains("allocation"));
    }

    #[test]
    fn small_run_produces_every_row() {
        let opts = BenchmarkOptions {
            sizes: vec![2, 3],
            backends: vec![Backend::Serial, Backend::Parallel],
            precisions: vec![Precision::F64, Precision::F32],
            warmup_steps: 1,
            measure_steps: 2,
        };
        let report = run_benchmark(&opts).unwrap();
        assert_eq!(report.rows.len(), 8);
        for r in &report.rows {
            let m = r.result.as_ref().unwrap();
            assert_eq!(m.steps, 2);
            assert!(m.ms_per_step > 0.0);
        }
        assert_eq!(report.speedup(3, Backend::Serial, Precision::F32), Some(1.0));
    }

    #[test]
    fn bad_options_rejected() {
        let mut opts = BenchmarkOptions {
            sizes: vec![],
            ..BenchmarkOptions::default()
        };
        assert!(run_benchmark(&opts).is_err());
        opts.sizes = vec![2];
        opts.measure_steps = 0;
        assert!(run_benchmark(&opts).is_err());
    }

    #[test]
    fn zero_size_row_fails_but_others_run() {
        let opts = BenchmarkOptions {
            sizes: vec![0, 2],
            backends: vec![Backend::Serial],
            precisions: vec![Precision::F64],
            warmup_steps: 0,
            measure_steps: 1,
        };
        let report = run_benchmark(&opts).unwrap();
        assert!(report.rows[0].result.is_err());
        assert!(report.rows[1].result.is_ok());
    }
}
