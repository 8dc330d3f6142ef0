//! File formats: comma-separated datasets, the versioned JSON model file,
//! benchmark reports, prediction columns and ψ-curve tables.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineKind, BaselineModel};
use crate::dataset::{Label, LabeledDataset};
use crate::directions::{Direction, DirectionSet};
use crate::dqc::{DqcConfig, ThetaSelection, TrainedDqc};
use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;
use crate::simbench::{BenchmarkReport, FittedClassifier};

pub const DEFAULT_LABEL_COLUMN: &str = "label";
pub const MODEL_FORMAT: &str = "dirquant-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Reads a headed CSV with numeric features and an integer label column.
pub fn read_dataset<R: Read>(reader: R, label_column: &str) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Parse(format!("missing label column '{label_column}'")))?;
    let p = headers.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = r + 2;
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                let label: Label = cell.parse().map_err(|_| {
                    Error::Parse(format!("line {line}: label '{cell}' is not a positive integer"))
                })?;
                labels.push(label);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Parse(format!(
                        "line {line}, column '{}': non-numeric cell '{cell}'",
                        &headers[c]
                    ))
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse(format!("line {line}: non-finite value '{cell}'")));
                }
                values.push(v);
            }
        }
    }
    let n = labels.len();
    let x = DMatrix::from_row_slice(n, p, &values);
    LabeledDataset::new(x, labels)
}

/// Reads only the feature columns (any label column is ignored).
pub fn read_features<R: Read>(reader: R, label_column: &str) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = headers.iter().position(|h| h == label_column);
    let p = headers.len() - usize::from(label_idx.is_some());
    let mut values = Vec::new();
    let mut n = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_idx {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::Parse(format!("line {}: non-numeric cell '{cell}'", r + 2))
            })?;
            values.push(v);
        }
        n += 1;
    }
    Ok(DMatrix::from_row_slice(n, p, &values))
}

pub fn load_dataset(path: &Path, label_column: &str) -> Result<LabeledDataset> {
    read_dataset(std::fs::File::open(path)?, label_column)
}

/// Writes `x1..xp` feature columns followed by the label column.
pub fn write_dataset<W: Write>(writer: W, data: &LabeledDataset, label_column: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.p()).map(|j| format!("x{j}")).collect();
    header.push(label_column.to_string());
    w.write_record(&header)?;
    let x = data.observations();
    for i in 0..data.n() {
        let mut rec: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.labels()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(path: &Path, data: &LabeledDataset, label_column: &str) -> Result<()> {
    write_dataset(std::fs::File::create(path)?, data, label_column)
}

pub fn write_predictions<W: Write>(mut writer: W, labels: &[Label], label_column: &str) -> Result<()> {
    writeln!(writer, "{label_column}")?;
    for l in labels {
        writeln!(writer, "{l}")?;
    }
    Ok(())
}

pub fn write_psi_curve<W: Write>(mut writer: W, curve: &[(f64, f64)]) -> Result<()> {
    writeln!(writer, "theta,psi")?;
    for (t, v) in curve {
        writeln!(writer, "{t},{v}")?;
    }
    Ok(())
}

/// On-disk model envelope shared by every classifier kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    format_version: u32,
    kind: String,
    p: usize,
    classes: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    thetas: Vec<QuantileLevel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    directions: Vec<Direction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    direction_groups: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    weights: Vec<f64>,
    /// DQC: `K x S` directional quantiles; baselines: `K x p` class parameters.
    class_parameters: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    priors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection: Option<ThetaSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<DqcConfig>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn rows_matrix(rows: &[Vec<f64>], ncols: usize) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged parameter matrix".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl ModelFile {
    fn from_model(model: &FittedClassifier) -> Self {
        match model {
            FittedClassifier::Dqc(m) => ModelFile {
                format: MODEL_FORMAT.into(),
                format_version: MODEL_FORMAT_VERSION,
                kind: "dqc".into(),
                p: m.p(),
                classes: m.classes(),
                thetas: m.thetas().to_vec(),
                directions: m.directions().directions().to_vec(),
                direction_groups: m.directions().groups().map(<[usize]>::to_vec).unwrap_or_default(),
                weights: m.weights().to_vec(),
                class_parameters: matrix_rows(m.class_quantiles()),
                priors: m.priors().to_vec(),
                selection: m.selection().cloned(),
                config: m.config().cloned(),
            },
            FittedClassifier::Baseline(b) => ModelFile {
                format: MODEL_FORMAT.into(),
                format_version: MODEL_FORMAT_VERSION,
                kind: b.kind().name().into(),
                p: b.p(),
                classes: b.classes(),
                thetas: b.theta().into_iter().collect(),
                directions: Vec::new(),
                direction_groups: Vec::new(),
                weights: Vec::new(),
                class_parameters: matrix_rows(b.params()),
                priors: Vec::new(),
                selection: None,
                config: None,
            },
        }
    }

    fn into_model(self) -> Result<FittedClassifier> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Parse(format!("not a model file (format '{}')", self.format)));
        }
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion(self.format_version));
        }
        if self.class_parameters.len() != self.classes {
            return Err(Error::Parse("class parameter rows differ from class count".into()));
        }
        let baseline = |kind| -> Result<FittedClassifier> {
            let params = rows_matrix(&self.class_parameters, self.p)?;
            Ok(FittedClassifier::Baseline(BaselineModel::from_parts(
                kind,
                params,
                self.thetas.first().copied(),
            )?))
        };
        match self.kind.as_str() {
            "centroid" => baseline(BaselineKind::Centroid),
            "median" => baseline(BaselineKind::Median),
            "cqc" => baseline(BaselineKind::Cqc),
            "dqc" => {
                let s = self.directions.len();
                let directions = if self.direction_groups.is_empty() {
                    DirectionSet::new(self.directions)?
                } else {
                    DirectionSet::grouped(self.directions, self.direction_groups)?
                };
                if directions.dim() != self.p {
                    return Err(Error::DimensionMismatch {
                        expected: self.p,
                        found: directions.dim(),
                    });
                }
                let q = rows_matrix(&self.class_parameters, s)?;
                Ok(FittedClassifier::Dqc(TrainedDqc::from_parts(
                    self.thetas,
                    directions,
                    self.weights,
                    q,
                    self.priors,
                    self.selection,
                    self.config,
                )?))
            }
            other => Err(Error::Parse(format!("unknown model kind '{other}'"))),
        }
    }
}

pub fn write_model<W: Write>(writer: W, model: &FittedClassifier) -> Result<()> {
    serde_json::to_writer_pretty(writer, &ModelFile::from_model(model))?;
    Ok(())
}

pub fn read_model<R: Read>(reader: R) -> Result<FittedClassifier> {
    let file: ModelFile = serde_json::from_reader(reader)?;
    file.into_model()
}

pub fn save_model(path: &Path, model: &FittedClassifier) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write_model(&mut f, model)?;
    writeln!(f)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<FittedClassifier> {
    read_model(std::fs::File::open(path)?)
}

/// Per-replication rows as CSV, preceded by `#` provenance lines.
///
/// Wall-clock times are left out so the output depends only on the inputs
/// and seeds; see [`report_timings`].
pub fn report_csv(report: &BenchmarkReport) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# scenario={} n={} p={} correlated={} shift={} df={} replications={} seed={}",
        c.scenario.number(),
        c.n,
        c.p,
        c.correlated,
        c.shift,
        c.df,
        c.replications,
        c.seed
    );
    if let Some(d) = &report.dqc_config {
        let grid: Vec<String> = d.theta_grid.iter().map(|t| t.value().to_string()).collect();
        let dirs = d
            .directions_per_theta
            .map_or_else(|| "auto".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "# dqc theta_grid={} directions={} mode={:?} spread={} cv_folds={} seed={} clip={} location={:?}",
            grid.join(";"),
            dirs,
            d.direction_mode,
            d.spread,
            d.cv_folds,
            d.seed,
            d.clip_nonnegative_weights,
            d.location
        );
    }
    for note in &report.notes {
        let _ = writeln!(out, "# note: {note}");
    }
    out.push_str("classifier,replication,error_rate,status\n");
    for r in &report.rows {
        let (rate, status) = match (&r.error_rate, &r.failure) {
            (Some(e), _) => (e.to_string(), "ok".to_string()),
            (None, Some(msg)) => (String::new(), format!("failed: {}", msg.replace(',', ";"))),
            (None, None) => (String::new(), "failed".to_string()),
        };
        let _ = writeln!(out, "{},{},{},{}", r.classifier, r.replication, rate, status);
    }
    out.push_str("# summary\nclassifier,mean,std_error,completed,failed\n");
    for s in report.summary() {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{},{}",
            s.classifier, s.mean, s.std_error, s.completed, s.failed
        );
    }
    out
}

/// Mean wall time per classifier, in seconds.
pub fn report_timings(report: &BenchmarkReport) -> String {
    let mut out = String::from("classifier,mean_seconds\n");
    for name in report.classifiers() {
        let times: Vec<f64> = report
            .rows
            .iter()
            .filter(|r| r.classifier == name)
            .map(|r| r.seconds)
            .collect();
        let mean = times.iter().sum::<f64>() / times.len().max(1) as f64;
        let _ = writeln!(out, "{name},{mean:.3}");
    }
    out
}

/// Aligned plain-text table of mean error rates: one row per classifier,
/// one column per report (labelled by its dimension `p`).
pub fn format_table(reports: &[BenchmarkReport]) -> String {
    let mut names: Vec<String> = Vec::new();
    for r in reports {
        for n in r.classifiers() {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    let mut out = String::new();
    if let Some(first) = reports.first() {
        let c = &first.config;
        let _ = writeln!(
            out,
            "Scenario {} ({}), n = {}, {} replications",
            c.scenario.number(),
            if c.correlated { "correlated" } else { "uncorrelated" },
            c.n,
            c.replications
        );
    }
    let _ = write!(out, "{:<14}", "Dimension p");
    for r in reports {
        let _ = write!(out, "{:>9}", r.config.p);
    }
    out.push('\n');
    for name in &names {
        let label = match name.as_str() {
            "dqc" => "DQC",
            "centroid" => "Centroid",
            "median" => "Median",
            "cqc" => "CQC",
            other => other,
        };
        let _ = write!(out, "{label:<14}");
        for r in reports {
            match r.mean_error(name) {
                Some(m) if m.is_finite() => {
                    let _ = write!(out, "{m:>9.3}");
                }
                _ => {
                    let _ = write!(out, "{:>9}", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
