//! Signal ingestion and matrix/heatmap output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use frst_core::{Grid, Signal, TfMatrix};
use num_complex::Complex;

use crate::error::{CliError, Result};

/// Largest accepted deviation of a time step from the mean step, relative
/// to the mean step.
pub const STEP_JITTER_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Wav,
}

impl InputFormat {
    /// `wav` for a `.wav` extension, `csv` otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("wav") => InputFormat::Wav,
            _ => InputFormat::Csv,
        }
    }
}

pub fn ingest(path: &Path, format: InputFormat) -> Result<Signal> {
    match format {
        InputFormat::Csv => ingest_csv(path),
        InputFormat::Wav => ingest_wav(path),
    }
}

/// Uniform grid through `points`, rejecting step jitter above
/// [`STEP_JITTER_RTOL`].
pub fn uniform_grid(points: &[f64], path: &Path) -> Result<Grid> {
    if points.len() < 2 {
        return Err(CliError::parse(path, "need at least two samples"));
    }
    let n = points.len();
    let step = (points[n - 1] - points[0]) / (n - 1) as f64;
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::NonUniformGrid { path: path.into(), detail: "times must increase".into() });
    }
    for (i, pair) in points.windows(2).enumerate() {
        let jitter = ((pair[1] - pair[0]) - step).abs() / step;
        if jitter > STEP_JITTER_RTOL {
            return Err(CliError::NonUniformGrid {
                path: path.into(),
                detail: format!("step {} at row {} vs mean step {step}", pair[1] - pair[0], i + 1),
            });
        }
    }
    Ok(Grid::new(points[0], step, n)?)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn parse_row(record: &StringRecord) -> Option<Vec<f64>> {
    record.iter().map(|f| f.parse::<f64>().ok()).collect()
}

/// Two columns `t,value` or three `t,re,im`; an optional non-numeric header
/// line and `#` comments are skipped.
fn ingest_csv(path: &Path) -> Result<Signal> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, record) in csv_reader(path)?.records().enumerate() {
        let record = record.map_err(|e| CliError::parse(path, e.to_string()))?;
        let Some(row) = parse_row(&record) else {
            if line == 0 {
                continue;
            }
            return Err(CliError::parse(path, format!("row {}: non-numeric field", line + 1)));
        };
        let value = match row.as_slice() {
            [_, v] => Complex::new(*v, 0.0),
            [_, re, im] => Complex::new(*re, *im),
            _ => {
                return Err(CliError::parse(
                    path,
                    format!("row {}: expected 2 or 3 columns, found {}", line + 1, row.len()),
                ))
            }
        };
        times.push(row[0]);
        values.push(value);
    }
    let grid = uniform_grid(&times, path)?;
    Ok(Signal::new(grid, values)?)
}

/// 16-bit PCM mono, scaled to `[-1, 1]`, sampled from `t = 0`.
fn ingest_wav(path: &Path) -> Result<Signal> {
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => CliError::io(path, io),
        other => CliError::UnsupportedFormat { path: path.into(), detail: other.to_string() },
    })?;
    let spec = reader.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(CliError::UnsupportedFormat {
            path: path.into(),
            detail: format!(
                "{} channel(s), {}-bit {:?}; expected 16-bit PCM mono",
                spec.channels, spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    let values = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| Complex::new(f64::from(v) / 32768.0, 0.0)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    let grid = Grid::new(0.0, 1.0 / f64::from(spec.sample_rate), values.len())?;
    Ok(Signal::new(grid, values)?)
}

/// Nine significant digits; fixed notation for moderate magnitudes.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_matrix_csv(path: &Path, tf: &TfMatrix, cell: impl Fn(Complex<f64>) -> f64) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = WriterBuilder::new().from_writer(BufWriter::new(file));
    let io_err = |e: csv::Error| CliError::parse(path, e.to_string());
    let mut header = vec!["xi\\tau".to_string()];
    header.extend(tf.tau_grid().points().map(|t| t.to_string()));
    w.write_record(&header).map_err(io_err)?;
    for r in 0..tf.rows() {
        let mut row = vec![tf.xi_grid().point(r).to_string()];
        row.extend(tf.row(r).iter().map(|&v| format_sig9(cell(v))));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Binary P5 PGM of `|FRST|`, one row per frequency in ascending order,
/// min-max scaled to 0..=255 (all zeros when the range is degenerate).
pub fn pgm_bytes(tf: &TfMatrix) -> Vec<u8> {
    let abs: Vec<f64> = tf.values().iter().map(|v| v.norm()).collect();
    let lo = abs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = format!("P5\n{} {}\n255\n", tf.cols(), tf.rows()).into_bytes();
    out.extend(abs.iter().map(|&v| if hi > lo { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 0 }));
    out
}

/// Writes `frst_re.csv`, `frst_im.csv`, `frst_abs.csv` and `frst_abs.pgm`.
/// CSV row 0 holds the tau axis and column 0 the frequency axis (both at
/// full precision); cells carry nine significant digits.
pub fn emit_matrix(tf: &TfMatrix, dir: &Path) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let re = dir.join("frst_re.csv");
    let im = dir.join("frst_im.csv");
    let abs = dir.join("frst_abs.csv");
    let pgm = dir.join("frst_abs.pgm");
    write_matrix_csv(&re, tf, |v| v.re)?;
    write_matrix_csv(&im, tf, |v| v.im)?;
    write_matrix_csv(&abs, tf, |v| v.norm())?;
    fs::write(&pgm, pgm_bytes(tf)).map_err(|e| CliError::io(&pgm, e))?;
    Ok(vec![re, im, abs, pgm])
}

/// Matrix read back from an emitted CSV.
#[derive(Debug, Clone)]
pub struct MatrixCsv {
    pub tau: Vec<f64>,
    pub xi: Vec<f64>,
    /// Row-major, one row per frequency.
    pub values: Vec<f64>,
}

pub fn read_matrix_csv(path: &Path) -> Result<MatrixCsv> {
    let mut records = csv_reader(path)?.into_records();
    let header = records
        .next()
        .ok_or_else(|| CliError::parse(path, "empty matrix file"))?
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    let tau: Vec<f64> = header
        .iter()
        .skip(1)
        .map(|f| f.parse().map_err(|_| CliError::parse(path, format!("bad tau value {f:?}"))))
        .collect::<Result<_>>()?;
    let mut xi = Vec::new();
    let mut values = Vec::new();
    for (line, record) in records.enumerate() {
        let record = record.map_err(|e| CliError::parse(path, e.to_string()))?;
        let row = parse_row(&record).ok_or_else(|| CliError::parse(path, format!("row {}: non-numeric", line + 2)))?;
        if row.len() != tau.len() + 1 {
            return Err(CliError::parse(path, format!("row {}: {} cells, expected {}", line + 2, row.len(), tau.len() + 1)));
        }
        xi.push(row[0]);
        values.extend_from_slice(&row[1..]);
    }
    Ok(MatrixCsv { tau, xi, values })
}

/// `t,re,im` rows.
pub fn write_signal_csv(path: &Path, signal: &Signal) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut body = String::from("t,re,im\n");
    for (t, v) in signal.grid().points().zip(signal.values()) {
        body.push_str(&format!("{t},{},{}\n", v.re, v.im));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0.00000000");
        assert_eq!(format_sig9(1.0), "1.00000000");
        assert_eq!(format_sig9(-123.456), "-123.456000");
        assert_eq!(format_sig9(0.00123), "0.00123000000");
        assert_eq!(format_sig9(1.5e-9), "1.50000000e-9");
        assert_eq!(format_sig9(2.0e12), "2.00000000e12");
        for x in [std::f64::consts::PI, -1.0e-7 / 3.0, 98765.4321, 1e20 / 7.0] {
            let back: f64 = format_sig9(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-8);
        }
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(InputFormat::from_path(Path::new("a/b.WAV")), InputFormat::Wav);
        assert_eq!(InputFormat::from_path(Path::new("a/b.csv")), InputFormat::Csv);
        assert_eq!(InputFormat::from_path(Path::new("noext")), InputFormat::Csv);
    }

    #[test]
    fn jitter_is_rejected() {
        let p = Path::new("x.csv");
        assert!(uniform_grid(&[0.0, 0.5, 1.0], p).is_ok());
        assert!(matches!(uniform_grid(&[0.0, 0.5, 1.1], p), Err(CliError::NonUniformGrid { .. })));
        assert!(matches!(uniform_grid(&[1.0, 0.5, 0.0], p), Err(CliError::NonUniformGrid { .. })));
        assert!(matches!(uniform_grid(&[1.0], p), Err(CliError::Parse { .. })));
    }
}
