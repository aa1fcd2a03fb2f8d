//! Datasets, the embedding CSV format, synthetic generation and report emission.
//!
//! Embedding CSV layout (UTF-8, LF line endings):
//!
//! ```text
//! id,split,label:<K>,f0,f1,...,f<d-1>
//! 0,train,3,0.25,-1.5,...
//! 1,test,0,...
//! ```
//!
//! The header declares the class count in the `label:<K>` column and the
//! feature dimension by the number of trailing columns. Ids must be dense
//! `0..N` in any row order. Floats are written in shortest round-trip form,
//! so a loaded dataset re-serializes to the same bytes and the same digest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::al_loop::{RoundRecord, RunReport};
use crate::budget::PseudoAssignment;
use crate::strategies::ScoredInstance;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: usize,
    pub features: Vec<f64>,
    /// Ground truth. Only the oracle and the evaluation path read this.
    pub true_label: usize,
}

/// An immutable embedding dataset with a train and test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    dim: usize,
    classes: usize,
    instances: Vec<Instance>,
    splits: Vec<Split>,
    train_ids: Vec<usize>,
    test_ids: Vec<usize>,
    digest: String,
}

impl Dataset {
    /// Builds a dataset from `(instance, split)` rows. Ids must be dense `0..N`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        classes: usize,
        rows: Vec<(Instance, Split)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("feature dimension must be >= 1".into()));
        }
        if classes == 0 {
            return Err(Error::InvalidConfig("class count must be >= 1".into()));
        }
        if rows.is_empty() {
            return Err(Error::EmptyInput("dataset has no instances"));
        }
        let n = rows.len();
        let mut slots: Vec<Option<(Instance, Split)>> = vec![None; n];
        for (inst, split) in rows {
            if inst.features.len() != dim {
                return Err(Error::Shape {
                    expected: dim,
                    got: inst.features.len(),
                });
            }
            if inst.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            if inst.true_label >= classes {
                return Err(Error::LabelOutOfRange {
                    label: inst.true_label,
                    classes,
                });
            }
            let id = inst.id;
            if id >= n {
                return Err(Error::InvalidConfig(format!(
                    "instance ids must be dense 0..{n}, found {id}"
                )));
            }
            if slots[id].is_some() {
                return Err(Error::InvalidConfig(format!("duplicate instance id {id}")));
            }
            slots[id] = Some((inst, split));
        }
        let (instances, splits): (Vec<_>, Vec<_>) = slots.into_iter().map(Option::unwrap).unzip();
        let train_ids = (0..n).filter(|&i| splits[i] == Split::Train).collect();
        let test_ids = (0..n).filter(|&i| splits[i] == Split::Test).collect();
        let mut ds = Dataset {
            name: name.into(),
            dim,
            classes,
            instances,
            splits,
            train_ids,
            test_ids,
            digest: String::new(),
        };
        ds.digest = hex::encode(Sha256::digest(ds.to_csv().as_bytes()));
        Ok(ds)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// SHA-256 of the canonical CSV serialization, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn instance(&self, id: usize) -> Option<&Instance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn features(&self, id: usize) -> &[f64] {
        &self.instances[id].features
    }

    pub fn true_label(&self, id: usize) -> usize {
        self.instances[id].true_label
    }

    pub fn split(&self, id: usize) -> Split {
        self.splits[id]
    }

    pub fn train_ids(&self) -> &[usize] {
        &self.train_ids
    }

    pub fn test_ids(&self) -> &[usize] {
        &self.test_ids
    }

    /// Canonical embedding CSV text.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.dim * 20 + 16));
        out.push_str("id,split,label:");
        let _ = write!(out, "{}", self.classes);
        for j in 0..self.dim {
            let _ = write!(out, ",f{j}");
        }
        out.push('\n');
        for (inst, split) in self.instances.iter().zip(&self.splits) {
            let _ = write!(out, "{},{},{}", inst.id, split.as_str(), inst.true_label);
            for v in &inst.features {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Parses embedding CSV text. Errors carry the 1-based line number.
pub fn parse_embedding_csv(name: &str, text: &str) -> Result<Dataset> {
    let fmt = |line: usize, msg: String| Error::Format { line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| fmt(1, "missing header row".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 4 || cols[0] != "id" || cols[1] != "split" {
        return Err(fmt(
            1,
            "header must be `id,split,label:<K>,f0,...` with at least one feature".into(),
        ));
    }
    let classes: usize = cols[2]
        .strip_prefix("label:")
        .and_then(|k| k.parse().ok())
        .filter(|&k: &usize| k >= 1)
        .ok_or_else(|| fmt(1, format!("bad label column `{}`, expected label:<K>", cols[2])))?;
    let dim = cols.len() - 3;

    let mut rows = Vec::new();
    let mut line_of_id = std::collections::HashMap::new();
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != dim + 3 {
            return Err(fmt(
                line,
                format!("expected {} fields, found {}", dim + 3, fields.len()),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| fmt(line, format!("bad id `{}`", fields[0])))?;
        if let Some(prev) = line_of_id.insert(id, line) {
            return Err(fmt(line, format!("duplicate id {id} (first seen on line {prev})")));
        }
        let split = match fields[1] {
            "train" => Split::Train,
            "test" => Split::Test,
            other => return Err(fmt(line, format!("unknown split tag `{other}`"))),
        };
        let label: usize = fields[2]
            .parse()
            .map_err(|_| fmt(line, format!("bad label `{}`", fields[2])))?;
        if label >= classes {
            return Err(fmt(line, format!("label {label} >= class count {classes}")));
        }
        let mut features = Vec::with_capacity(dim);
        for (j, f) in fields[3..].iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| fmt(line, format!("feature f{j}: bad number `{f}`")))?;
            if !v.is_finite() {
                return Err(fmt(line, format!("feature f{j}: non-finite value")));
            }
            features.push(v);
        }
        rows.push((
            Instance {
                id,
                features,
                true_label: label,
            },
            split,
        ));
    }
    if rows.is_empty() {
        return Err(fmt(2, "no data rows".into()));
    }
    let n = rows.len();
    if let Some((id, line)) = line_of_id.iter().filter(|(&id, _)| id >= n).min_by_key(|(_, &l)| l) {
        return Err(fmt(*line, format!("ids must be dense 0..{n}, found {id}")));
    }
    Dataset::new(name, dim, classes, rows)
}

pub fn load_embedding_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_embedding_csv(&name, &text)
}

/// Gaussian-cluster dataset standing in for frozen network embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dim: usize,
    pub per_class: usize,
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// The reference dataset: K=10, d=32, 600 per class, s=6, sigma=1.
    fn default() -> Self {
        SyntheticSpec {
            classes: 10,
            dim: 32,
            per_class: 600,
            separation: 6.0,
            sigma: 1.0,
            seed: 0,
        }
    }
}

const MAX_MEAN_ATTEMPTS: usize = 10_000;

/// Fraction of each class assigned to the training split.
pub const TRAIN_FRACTION: f64 = 0.8;

/// Generates `classes` isotropic Gaussian clusters.
///
/// Class means are drawn from `N(0, s²/d · I)` and rejected until every pair
/// is at least `s` apart. Each class is split 80/20 into train and test, and
/// ids are assigned after a seeded global shuffle.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.classes == 0 || spec.dim == 0 || spec.per_class == 0 {
        return Err(Error::InvalidConfig(
            "classes, dim and per_class must all be >= 1".into(),
        ));
    }
    if !(spec.separation > 0.0 && spec.separation.is_finite()) {
        return Err(Error::InvalidConfig("separation must be positive".into()));
    }
    if !(spec.sigma > 0.0 && spec.sigma.is_finite()) {
        return Err(Error::InvalidConfig("sigma must be positive".into()));
    }
    let mut rng = rng::rng_from(spec.seed);
    let spread = spec.separation / (spec.dim as f64).sqrt();
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(spec.classes);
    while means.len() < spec.classes {
        let mut placed = false;
        for _ in 0..MAX_MEAN_ATTEMPTS {
            let cand: Vec<f64> = (0..spec.dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    spread * z
                })
                .collect::<Vec<f64>>();
            let ok = means.iter().all(|m| {
                let d2: f64 = m.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() >= spec.separation
            });
            if ok {
                means.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Generation(format!(
                "could not place mean {} at separation {} after {MAX_MEAN_ATTEMPTS} attempts",
                means.len(),
                spec.separation
            )));
        }
    }

    let n_train = ((spec.per_class as f64) * TRAIN_FRACTION).round() as usize;
    let mut raw: Vec<(Vec<f64>, usize, Split)> = Vec::with_capacity(spec.classes * spec.per_class);
    for (label, mean) in means.iter().enumerate() {
        for i in 0..spec.per_class {
            let features = mean
                .iter()
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + spec.sigma * z
                })
                .collect();
            let split = if i < n_train { Split::Train } else { Split::Test };
            raw.push((features, label, split));
        }
    }
    // Fisher-Yates with the same stream keeps the whole draw a function of the spec.
    for i in (1..raw.len()).rev() {
        let j = rng.random_range(0..=i);
        raw.swap(i, j);
    }
    let rows = raw
        .into_iter()
        .enumerate()
        .map(|(id, (features, true_label, split))| {
            (
                Instance {
                    id,
                    features,
                    true_label,
                },
                split,
            )
        })
        .collect();
    let name = format!(
        "synthetic-k{}-d{}-n{}-s{}-sigma{}-seed{}",
        spec.classes, spec.dim, spec.per_class, spec.separation, spec.sigma, spec.seed
    );
    Dataset::new(name, spec.dim, spec.classes, rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

pub const REPORT_CSV_HEADER: &str =
    "round,test_accuracy,train_loss,oracle_spent,pseudo_count,pseudo_accuracy,wall_time_ms";

fn push_record(out: &mut String, r: &RoundRecord) {
    let _ = write!(
        out,
        "{},{},{},{},{},",
        r.round, r.test_accuracy, r.train_loss, r.oracle_spent, r.pseudo_count
    );
    if let Some(acc) = r.pseudo_accuracy {
        let _ = write!(out, "{acc}");
    }
    let _ = writeln!(out, ",{}", r.wall_time_ms);
}

pub fn report_to_csv(report: &RunReport) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in &report.rounds {
        push_record(&mut out, r);
    }
    out
}

pub fn report_to_json(report: &RunReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let body = match format {
        ReportFormat::Json => report_to_json(report)?,
        ReportFormat::Csv => report_to_csv(report),
    };
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

pub fn read_report_json(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: RunReport = serde_json::from_str(&text)?;
    if report.format_version != RunReport::FORMAT_VERSION {
        return Err(Error::Integrity(format!(
            "{}: unsupported report format version {}",
            path.display(),
            report.format_version
        )));
    }
    Ok(report)
}

/// Per-round score dump: `id,uncertainty,density,hybrid` (density empty when not computed).
pub fn scores_to_csv(scored: &[ScoredInstance]) -> String {
    let mut out = String::from("id,uncertainty,density,hybrid\n");
    for s in scored {
        let _ = write!(out, "{},{},", s.id, s.uncertainty);
        if let Some(d) = s.density {
            let _ = write!(out, "{d}");
        }
        let _ = writeln!(out, ",{}", s.hybrid);
    }
    out
}

pub const PSEUDO_AUDIT_HEADER: &str = "id,label,confidence,round";

/// Pseudo-label audit rows for one round, without header.
pub fn pseudo_audit_rows(round: usize, assignments: &[PseudoAssignment]) -> String {
    let mut out = String::new();
    for a in assignments {
        let _ = writeln!(out, "{},{},{},{round}", a.instance_id, a.label, a.confidence);
    }
    out
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}
