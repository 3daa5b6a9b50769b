//! File formats: feature and Gram CSV, JSON-lines reports, loss traces and
//! parameter snapshots.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. JSON uses the shortest representation
//! that round-trips.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::checks::{PsdReport, SweepReport};
use crate::config::RunConfig;
use crate::diff::kernel::Projection;
use crate::diff::params::ParamVector;
use crate::error::{Error, Result};
use crate::geometry::{clip_project, exp0, BallPoint, Curvature, TangentVector};
use crate::kernels::{gram, GramMatrix};
use crate::learning::eval::EvalReport;

/// Feature rows with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub header: Vec<String>,
    pub labels: Option<Vec<usize>>,
    pub rows: Vec<Vec<f64>>,
}

fn parse_err(line: u64, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        msg: msg.into(),
    }
}

/// Reads a header row, an optional leading `label` column and real-valued
/// feature columns. Line numbers are 1-based and count the header; columns
/// are 1-based.
pub fn read_features<R: Read>(reader: R) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(1, 1, "missing header row"));
    }
    let labelled = header[0].eq_ignore_ascii_case("label");
    let width = header.len() - usize::from(labelled);
    if width == 0 {
        return Err(parse_err(1, 1, "no feature columns"));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                rec.len().min(header.len()) + 1,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let mut fields = rec.iter().enumerate();
        if labelled {
            let (_, raw) = fields.next().expect("length checked");
            labels.push(
                raw.parse::<usize>()
                    .map_err(|_| parse_err(line, 1, format!("invalid label {raw:?}")))?,
            );
        }
        let row = fields
            .map(|(col, raw)| match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(parse_err(line, col + 1, format!("invalid number {raw:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(2, 1, "no data rows"));
    }
    Ok(FeatureTable {
        header,
        labels: labelled.then_some(labels),
        rows,
    })
}

pub fn write_features<W: Write>(mut w: W, labels: Option<&[usize]>, rows: &[Vec<f64>]) -> Result<()> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    if labels.is_some() {
        header.insert(0, "label".into());
    }
    writeln!(w, "{}", header.join(","))?;
    for (i, row) in rows.iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        if let Some(l) = labels {
            fields.insert(0, l[i].to_string());
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `re` alone when the imaginary part is zero, otherwise `re+imj` / `re-imj`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format_f64(z.re)
    } else if z.im.is_sign_negative() {
        format!("{}{}j", format_f64(z.re), format_f64(z.im))
    } else {
        format!("{}+{}j", format_f64(z.re), format_f64(z.im))
    }
}

pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('j') else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // The imaginary sign is the last '+' or '-' not following an exponent marker.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re = body[..split].parse().ok()?;
    let im = body[split..].trim_start_matches('+').parse().ok()?;
    Some(Complex64::new(re, im))
}

/// One row per matrix row, no header.
pub fn write_gram<W: Write>(mut w: W, g: &GramMatrix) -> Result<()> {
    for i in 0..g.size() {
        let row: Vec<String> = (0..g.size()).map(|j| format_complex(g.get(i, j))).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_gram<R: BufRead>(r: R) -> Result<GramMatrix> {
    let mut entries = Vec::new();
    let mut n = 0;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<Complex64> = line
            .split(',')
            .enumerate()
            .map(|(j, f)| parse_complex(f).ok_or_else(|| parse_err(i as u64 + 1, j + 1, format!("invalid entry {f:?}"))))
            .collect::<Result<_>>()?;
        if n == 0 {
            n = row.len();
        } else if row.len() != n {
            return Err(parse_err(i as u64 + 1, 1, "ragged matrix row"));
        }
        entries.extend(row);
    }
    if n == 0 || entries.len() != n * n {
        return Err(parse_err(1, 1, "matrix must be square and non-empty"));
    }
    GramMatrix::from_entries(n, entries)
}

/// Projects one raw feature vector into the ball, rejecting images within
/// the boundary margin.
pub fn project_point(x: &[f64], c: Curvature, projection: Projection) -> Result<BallPoint> {
    let p = match projection {
        Projection::Exp0 => exp0(&TangentVector::new(x.to_vec())?, c)?,
        Projection::Clip { beta, eps } => clip_project(x, c, beta, eps)?,
    };
    BallPoint::new(p.coords().to_vec(), c)
}

/// Gram matrix of feature rows under the kernel a run config describes.
/// Poles take the feature width unless the config carries explicit params.
pub fn gram_from_features(config: &RunConfig, rows: &[Vec<f64>]) -> Result<GramMatrix> {
    let dim = rows.first().map_or(0, Vec::len);
    let params = config.initial_params_for_dim(dim);
    let kernel = params.kernel_config(&config.kernel.spec())?;
    let c = kernel.curvature();
    let points = rows
        .iter()
        .map(|x| {
            if x.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
            }
            project_point(x, c, config.projection)
        })
        .collect::<Result<Vec<_>>>()?;
    gram(&kernel, &points)
}

/// Line-delimited report records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum ReportRecord {
    Psd(PsdReport),
    Sweep(SweepReport),
    Eval(EvalReport),
    Coefficients(CoefficientReport),
}

/// Learned radial coefficients after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub variant: String,
    pub truncation: usize,
    pub alphas: Vec<f64>,
    pub raw: Vec<f64>,
}

impl ReportRecord {
    pub fn passed(&self) -> bool {
        match self {
            ReportRecord::Psd(r) => r.verdict.passed(),
            ReportRecord::Sweep(r) => r.verdict.passed(),
            ReportRecord::Eval(_) | ReportRecord::Coefficients(_) => true,
        }
    }
}

pub fn write_reports<W: Write>(mut w: W, records: &[ReportRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_reports<R: BufRead>(r: R) -> Result<Vec<ReportRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| parse_err(i as u64 + 1, e.column(), e.to_string()))?);
    }
    Ok(out)
}

pub fn write_loss_trace<W: Write>(mut w: W, losses: &[f64]) -> Result<()> {
    writeln!(w, "step,loss")?;
    for (i, l) in losses.iter().enumerate() {
        writeln!(w, "{i},{}", format_f64(*l))?;
    }
    Ok(())
}

/// Constrained values implied by a parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedParams {
    pub curvature: f64,
    pub poles: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bandwidth: f64,
}

/// The run configuration with `kernel.params` set, plus derived values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSnapshot {
    pub config: RunConfig,
    pub derived: DerivedParams,
}

impl ParamsSnapshot {
    pub fn new(config: &RunConfig, params: &ParamVector) -> Result<Self> {
        let m = params.materialize()?;
        let poles = m
            .multiplier
            .as_ref()
            .map(|mp| {
                mp.poles()
                    .iter()
                    .map(|p| p.real_coords().expect("poles are real"))
                    .collect()
            })
            .unwrap_or_default();
        let mut config = config.clone();
        config.kernel.params = Some(params.clone());
        Ok(Self {
            config,
            derived: DerivedParams {
                curvature: m.curvature.value(),
                poles,
                weights: m.weights,
                alphas: m.alphas,
                bandwidth: m.bandwidth,
            },
        })
    }

    pub fn params(&self) -> &ParamVector {
        self.config.kernel.params.as_ref().expect("snapshot carries params")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Self = serde_json::from_str(text).map_err(|e| parse_err(e.line() as u64, e.column(), e.to_string()))?;
        if snap.config.kernel.params.is_none() {
            return Err(parse_err(1, 1, "snapshot has no kernel.params"));
        }
        snap.config.validate()?;
        Ok(snap)
    }
}
