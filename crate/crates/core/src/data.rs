//! Dataset ingestion and partitioning across nodes, plus synthetic instances
//! with known constants.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{LossFamily, NodeDataset, ProblemConstants, ProblemInstance};
use crate::vector::ModelVector;

/// Default ridge weight for classification datasets.
pub const DEFAULT_LOGISTIC_LAMBDA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    /// Two-class labels mapped to {−1, +1}.
    Binary,
}

/// Label column by zero-based index or by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        label_column: LabelColumn,
        task: Task,
        /// Raw label value mapped to +1 (binary tasks).
        #[serde(default)]
        positive_label: Option<String>,
        /// Subtract the label mean (regression tasks).
        #[serde(default = "default_true")]
        center_labels: bool,
    },
    SyntheticQuadratic {
        dimension: usize,
        condition_number: f64,
        rank: usize,
    },
    SyntheticLogistic {
        dimension: usize,
        separation: f64,
    },
}

fn default_true() -> bool {
    true
}

/// Per-node sample count, or every sample dealt round-robin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSamples", into = "RawSamples")]
pub enum SamplesPerNode {
    Count(usize),
    All,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSamples {
    Count(usize),
    Word(String),
}

impl TryFrom<RawSamples> for SamplesPerNode {
    type Error = String;

    fn try_from(raw: RawSamples) -> std::result::Result<Self, String> {
        match raw {
            RawSamples::Count(0) => Err("samples_per_node must be at least 1".into()),
            RawSamples::Count(m) => Ok(SamplesPerNode::Count(m)),
            RawSamples::Word(w) if w == "all" => Ok(SamplesPerNode::All),
            RawSamples::Word(w) => Err(format!("expected a count or \"all\", got {w:?}")),
        }
    }
}

impl From<SamplesPerNode> for RawSamples {
    fn from(s: SamplesPerNode) -> Self {
        match s {
            SamplesPerNode::Count(m) => RawSamples::Count(m),
            SamplesPerNode::All => RawSamples::Word("all".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub source: DataSource,
    pub nodes: usize,
    /// CSV: samples per node or `"all"`. Synthetic sources: samples per node,
    /// with `"all"` meaning d (quadratic) or 4d (logistic).
    #[serde(default = "default_samples")]
    pub samples_per_node: SamplesPerNode,
    /// Standardize CSV features globally before partitioning.
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub seed: u64,
    /// Loss override; defaults to least squares (regression) or regularized
    /// logistic with λ = 0.1 (binary).
    #[serde(default)]
    pub family: Option<LossFamily>,
}

fn default_samples() -> SamplesPerNode {
    SamplesPerNode::All
}

impl DatasetSpec {
    pub fn new(source: DataSource, nodes: usize) -> Self {
        Self {
            source,
            nodes,
            samples_per_node: SamplesPerNode::All,
            standardize: true,
            seed: 0,
            family: None,
        }
    }
}

/// Parsed CSV: numeric features plus raw or mapped labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub feature_names: Option<Vec<String>>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
}

fn parse_cell(raw: &str, row: usize, column: usize) -> Result<f64> {
    let t = raw.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumeric {
            row,
            column,
            value: raw.to_string(),
        })
}

/// Reads a comma-separated file. A header row is assumed when the label
/// column is named, or when any feature cell of the first row is
/// non-numeric. Row numbers in errors are zero-based file rows.
pub fn read_csv(
    path: &Path,
    label_column: &LabelColumn,
    task: Task,
    positive_label: Option<&str>,
) -> Result<CsvData> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(rec);
    }
    let first = rows
        .first()
        .ok_or_else(|| Error::invalid("csv", format!("{} has no rows", path.display())))?;
    let width = first.len();

    let (label_idx, has_header) = match label_column {
        LabelColumn::Name(name) => {
            let idx = first.iter().position(|c| c == name).ok_or_else(|| {
                Error::invalid("label_column", format!("no header column named {name:?}"))
            })?;
            (idx, true)
        }
        LabelColumn::Index(i) => {
            if *i >= width {
                return Err(Error::invalid(
                    "label_column",
                    format!("index {i} out of range for {width} columns"),
                ));
            }
            let header = first
                .iter()
                .enumerate()
                .any(|(c, v)| c != *i && v.trim().parse::<f64>().is_err());
            (*i, header)
        }
    };
    if width < 2 {
        return Err(Error::invalid("csv", "need at least one feature column and a label"));
    }
    let feature_names = has_header.then(|| {
        first
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != label_idx)
            .map(|(_, v)| v.to_string())
            .collect()
    });

    let skip = usize::from(has_header);
    let mut features = Vec::with_capacity(rows.len() - skip);
    let mut raw_labels = Vec::with_capacity(rows.len() - skip);
    for (r, rec) in rows.iter().enumerate().skip(skip) {
        if rec.len() != width {
            return Err(Error::invalid(
                "csv",
                format!("row {r} has {} columns, expected {width}", rec.len()),
            ));
        }
        let mut x = Vec::with_capacity(width - 1);
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                raw_labels.push((r, cell.to_string()));
            } else {
                x.push(parse_cell(cell, r, c)?);
            }
        }
        features.push(x);
    }
    if features.is_empty() {
        return Err(Error::invalid("csv", "no data rows"));
    }

    let labels = match task {
        Task::Regression => raw_labels
            .iter()
            .map(|(r, v)| parse_cell(v, *r, label_idx))
            .collect::<Result<Vec<_>>>()?,
        Task::Binary => map_binary(&raw_labels, positive_label)?,
    };
    Ok(CsvData {
        feature_names,
        features,
        labels,
    })
}

/// Two distinct values → {−1, +1}. The explicit positive label wins; else the
/// larger of two numeric values, else the first value seen, is +1.
fn map_binary(raw: &[(usize, String)], positive: Option<&str>) -> Result<Vec<f64>> {
    let mut distinct: Vec<&str> = Vec::new();
    for (_, v) in raw {
        if !distinct.contains(&v.as_str()) {
            distinct.push(v);
            if distinct.len() > 2 {
                return Err(Error::LabelMapping(format!(
                    "more than two label values: {distinct:?}"
                )));
            }
        }
    }
    if distinct.len() != 2 {
        return Err(Error::LabelMapping(format!(
            "need exactly two label values, found {distinct:?}"
        )));
    }
    let pos = match positive {
        Some(p) => {
            if !distinct.contains(&p) {
                return Err(Error::LabelMapping(format!(
                    "positive label {p:?} not among {distinct:?}"
                )));
            }
            p
        }
        None => match (distinct[0].parse::<f64>(), distinct[1].parse::<f64>()) {
            (Ok(a), Ok(b)) if a > b => distinct[0],
            (Ok(_), Ok(_)) => distinct[1],
            _ => distinct[0],
        },
    };
    Ok(raw
        .iter()
        .map(|(_, v)| if v == pos { 1.0 } else { -1.0 })
        .collect())
}

/// Zero-mean, unit-variance columns (population variance). Constant columns
/// are dropped; returns the kept column indices.
pub fn standardize(features: &mut [Vec<f64>]) -> Vec<usize> {
    let n = features.len() as f64;
    let d = features.first().map_or(0, Vec::len);
    let mut kept = Vec::with_capacity(d);
    let mut stats = Vec::with_capacity(d);
    for c in 0..d {
        let mean = features.iter().map(|r| r[c]).sum::<f64>() / n;
        let var = features.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd <= 1e-12 * mean.abs().max(1.0) {
            log::warn!("dropping constant feature column {c}");
            continue;
        }
        kept.push(c);
        stats.push((mean, sd));
    }
    for row in features.iter_mut() {
        *row = kept
            .iter()
            .zip(&stats)
            .map(|(&c, (m, s))| (row[c] - m) / s)
            .collect();
    }
    kept
}

/// Seeded shuffle, then deal: node j receives shuffled positions
/// `j, j + N, j + 2N, …`. With `Count(m)` only the first `N·m` shuffled
/// samples are dealt.
pub fn round_robin(
    samples: usize,
    nodes: usize,
    per_node: SamplesPerNode,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if nodes == 0 {
        return Err(Error::invalid("nodes", "must be at least 1"));
    }
    if nodes > samples {
        return Err(Error::invalid(
            "nodes",
            format!("{nodes} nodes but only {samples} samples"),
        ));
    }
    let used = match per_node {
        SamplesPerNode::All => samples,
        SamplesPerNode::Count(m) => {
            let need = nodes.saturating_mul(m);
            if m == 0 || need > samples {
                return Err(Error::invalid(
                    "samples_per_node",
                    format!("{nodes} nodes x {m} samples exceeds {samples} available"),
                ));
            }
            need
        }
    };
    let mut order: Vec<usize> = (0..samples).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut parts = vec![Vec::with_capacity(used / nodes + 1); nodes];
    for (pos, &idx) in order.iter().take(used).enumerate() {
        parts[pos % nodes].push(idx);
    }
    Ok(parts)
}

fn default_family(task: Task) -> LossFamily {
    match task {
        Task::Regression => LossFamily::LeastSquares,
        Task::Binary => LossFamily::RegularizedLogistic {
            lambda: DEFAULT_LOGISTIC_LAMBDA,
        },
    }
}

fn attach_constants(problem: ProblemInstance) -> Result<ProblemInstance> {
    match problem.family() {
        LossFamily::LogLoss => Ok(problem),
        _ => problem.with_computed_constants(),
    }
}

/// Builds the node-partitioned problem described by `spec`, with constants
/// attached whenever the loss family admits them.
pub fn load_and_partition(spec: &DatasetSpec) -> Result<ProblemInstance> {
    match &spec.source {
        DataSource::Csv {
            path,
            label_column,
            task,
            positive_label,
            center_labels,
        } => {
            let mut data = read_csv(path, label_column, *task, positive_label.as_deref())?;
            if spec.standardize {
                standardize(&mut data.features);
                if data.features[0].is_empty() {
                    return Err(Error::invalid("csv", "every feature column is constant"));
                }
            }
            if *task == Task::Regression && *center_labels {
                let mean = data.labels.iter().sum::<f64>() / data.labels.len() as f64;
                for y in &mut data.labels {
                    *y -= mean;
                }
            }
            let parts = round_robin(
                data.features.len(),
                spec.nodes,
                spec.samples_per_node,
                spec.seed,
            )?;
            let nodes = parts
                .iter()
                .map(|idx| {
                    let rows: Vec<Vec<f64>> =
                        idx.iter().map(|&i| data.features[i].clone()).collect();
                    let ys: Vec<f64> = idx.iter().map(|&i| data.labels[i]).collect();
                    NodeDataset::from_rows(&rows, &ys)
                })
                .collect::<Result<Vec<_>>>()?;
            let family = spec.family.unwrap_or_else(|| default_family(*task));
            attach_constants(ProblemInstance::new(nodes, family)?)
        }
        DataSource::SyntheticQuadratic {
            dimension,
            condition_number,
            rank,
        } => {
            let m = match spec.samples_per_node {
                SamplesPerNode::Count(m) => m,
                SamplesPerNode::All => *dimension,
            };
            synthesize_quadratic_with(
                *dimension,
                *condition_number,
                *rank,
                spec.nodes,
                m,
                spec.seed,
            )
        }
        DataSource::SyntheticLogistic {
            dimension,
            separation,
        } => {
            let m = match spec.samples_per_node {
                SamplesPerNode::Count(m) => m,
                SamplesPerNode::All => 4 * dimension,
            };
            let lambda = match spec.family {
                Some(LossFamily::RegularizedLogistic { lambda }) => lambda,
                None => DEFAULT_LOGISTIC_LAMBDA,
                Some(other) => {
                    return Err(Error::invalid(
                        "family",
                        format!("synthetic logistic data cannot use {}", other.name()),
                    ))
                }
            };
            synthesize_logistic(*dimension, *separation, spec.nodes, m, lambda, spec.seed)
        }
    }
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Log-spaced spectrum `1, …, 1/cond` over the first `rank` entries, zero
/// beyond.
fn spectrum(d: usize, cond: f64, rank: usize) -> Vec<f64> {
    (0..d)
        .map(|i| {
            if i >= rank {
                0.0
            } else if rank == 1 {
                1.0
            } else {
                cond.powf(-(i as f64) / (rank - 1) as f64)
            }
        })
        .collect()
}

/// Least-squares instance with every node's Gram matrix equal to
/// `Q diag(s) Qᵀ`, `s` log-spaced from 1 to `1/cond`; `L = 1`, `μ = 1/cond`
/// (0 when `rank < d`). Labels are noiseless so `F* = 0`. One sample per
/// dimension per node.
pub fn synthesize_quadratic(
    dimension: usize,
    condition_number: f64,
    rank: usize,
    nodes: usize,
    seed: u64,
) -> Result<ProblemInstance> {
    synthesize_quadratic_with(dimension, condition_number, rank, nodes, dimension, seed)
}

/// [`synthesize_quadratic`] with `samples_per_node ≥ d` rows per node.
pub fn synthesize_quadratic_with(
    dimension: usize,
    condition_number: f64,
    rank: usize,
    nodes: usize,
    samples_per_node: usize,
    seed: u64,
) -> Result<ProblemInstance> {
    let d = dimension;
    if d == 0 {
        return Err(Error::invalid("dimension", "must be at least 1"));
    }
    if !(condition_number >= 1.0 && condition_number.is_finite()) {
        return Err(Error::invalid("condition_number", "must be finite and >= 1"));
    }
    if rank == 0 || rank > d {
        return Err(Error::invalid("rank", format!("need 1 <= rank <= d = {d}")));
    }
    if nodes == 0 {
        return Err(Error::invalid("nodes", "must be at least 1"));
    }
    let m = samples_per_node;
    if m < d {
        return Err(Error::invalid(
            "samples_per_node",
            format!("need at least d = {d} rows per node"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = gaussian_matrix(d, d, &mut rng).qr().q();
    let s = spectrum(d, condition_number, rank);
    let root = DMatrix::from_diagonal(&DVector::from_iterator(d, s.iter().map(|v| v.sqrt())));
    let shape = &root * q.transpose() * (m as f64).sqrt();

    // θ* in the range of the Gram matrix: the minimum-norm minimizer.
    let basis = q.columns(0, rank).into_owned();
    let coeffs = DVector::from_fn(rank, |_, _| rng.sample(StandardNormal));
    let theta_star = &basis * coeffs;

    let mut parts = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let u = gaussian_matrix(m, d, &mut rng).qr().q();
        let x = u * &shape;
        let y = &x * &theta_star;
        parts.push(NodeDataset::new(x, y)?);
    }
    let problem = ProblemInstance::new(parts, LossFamily::LeastSquares)?;
    let theta_star = ModelVector::from_dvector(theta_star);
    let f_star = problem.global_objective(&theta_star)?;
    let gradient_bound =
        problem.estimate_gradient_bound(&ModelVector::zeros(d), &theta_star)?;
    let mu = if rank == d {
        1.0 / condition_number
    } else {
        0.0
    };
    problem.with_constants(ProblemConstants {
        lipschitz: 1.0,
        strong_convexity: mu,
        gradient_bound,
        theta_star,
        f_star,
    })
}

/// Two Gaussian classes offset by `±separation` along a random unit
/// direction; regularized logistic loss.
pub fn synthesize_logistic(
    dimension: usize,
    separation: f64,
    nodes: usize,
    samples_per_node: usize,
    lambda: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if dimension == 0 || nodes == 0 || samples_per_node == 0 {
        return Err(Error::invalid(
            "synthetic logistic",
            "dimension, nodes and samples per node must be at least 1",
        ));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::invalid("separation", "must be non-negative and finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DVector::from_fn(dimension, |_, _| rng.sample::<f64, _>(StandardNormal));
    w /= w.norm();
    let mut parts = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let mut x = gaussian_matrix(samples_per_node, dimension, &mut rng);
        let y = DVector::from_fn(samples_per_node, |_, _| {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        });
        for (i, mut row) in x.row_iter_mut().enumerate() {
            row += w.transpose() * (y[i] * separation);
        }
        parts.push(NodeDataset::new(x, y)?);
    }
    ProblemInstance::new(parts, LossFamily::RegularizedLogistic { lambda })?
        .with_computed_constants()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    #[test]
    fn deal_order_contract() {
        let parts = round_robin(4, 2, SamplesPerNode::All, 3).unwrap();
        let mut order: Vec<usize> = (0..4).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(parts[0], vec![order[0], order[2]]);
        assert_eq!(parts[1], vec![order[1], order[3]]);
    }

    #[test]
    fn partition_is_disjoint_cover() {
        let parts = round_robin(103, 7, SamplesPerNode::All, 1).unwrap();
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        assert_eq!(all, (0..103).collect::<Vec<_>>());
        assert!(round_robin(3, 4, SamplesPerNode::All, 0).is_err());
        assert!(round_robin(10, 4, SamplesPerNode::Count(3), 0).is_err());
        let p = round_robin(10, 4, SamplesPerNode::Count(2), 0).unwrap();
        assert!(p.iter().all(|v| v.len() == 2));
    }

    #[test]
    fn binary_labels_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("a,b,c,class\n");
        for i in 0..6 {
            let l = if i % 2 == 0 { "g" } else { "b" };
            body.push_str(&format!("{i},{},{},{l}\n", i * i, 7 - i));
        }
        let path = write(&dir, "ion.csv", &body);
        let d = read_csv(&path, &LabelColumn::Index(3), Task::Binary, None).unwrap();
        assert_eq!(d.feature_names.as_ref().unwrap().len(), 3);
        assert_eq!(d.labels, vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let by_name = read_csv(&path, &LabelColumn::Name("class".into()), Task::Binary, Some("b"))
            .unwrap();
        assert_eq!(by_name.labels[0], -1.0);
    }

    #[test]
    fn headerless_numeric_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(&dir, "x.csv", "0,1.5,2\n1,0.5,3\n0,2.5,1\n");
        let d = read_csv(&path, &LabelColumn::Index(0), Task::Binary, None).unwrap();
        assert!(d.feature_names.is_none());
        assert_eq!(d.labels, vec![-1.0, 1.0, -1.0]);
        assert_eq!(d.features[1], vec![0.5, 3.0]);
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let bad = write(&dir, "bad.csv", "1,2,3\n4,x,6\n");
        assert!(matches!(
            read_csv(&bad, &LabelColumn::Index(2), Task::Regression, None),
            Err(Error::NonNumeric { row: 1, column: 1, .. })
        ));
        let three = write(&dir, "three.csv", "1,a\n2,b\n3,c\n");
        assert!(matches!(
            read_csv(&three, &LabelColumn::Index(1), Task::Binary, None),
            Err(Error::LabelMapping(_))
        ));
        assert!(matches!(
            read_csv(&dir.path().join("missing.csv"), &LabelColumn::Index(0), Task::Regression, None),
            Err(Error::Io { .. })
        ));
        assert!(read_csv(&bad, &LabelColumn::Index(5), Task::Regression, None).is_err());
    }

    #[test]
    fn standardize_drops_constant_columns() {
        let mut rows = vec![
            vec![1.0, 5.0, 2.0],
            vec![2.0, 5.0, 4.0],
            vec![4.0, 5.0, 9.0],
            vec![7.0, 5.0, 1.0],
        ];
        let kept = standardize(&mut rows);
        assert_eq!(kept, vec![0, 2]);
        for c in 0..2 {
            let mean = rows.iter().map(|r| r[c]).sum::<f64>() / 4.0;
            let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn synthetic_quadratic_condition_matches_dense_oracle() {
        let p = synthesize_quadratic(10, 100.0, 10, 3, 5).unwrap();
        let c = p.compute_constants().unwrap();
        assert!((c.lipschitz / c.strong_convexity - 100.0).abs() < 1e-8);
        let attached = p.constants().unwrap();
        assert_eq!(attached.f_star, 0.0);
        // Dense symmetric eigensolver on the first node's Gram matrix.
        let eig = p.nodes()[0].gram().symmetric_eigen();
        let hi = eig.eigenvalues.max();
        let lo = eig.eigenvalues.min();
        assert!((hi - 1.0).abs() < 1e-10 && (lo - 0.01).abs() < 1e-10);
    }

    #[test]
    fn synthetic_rank_deficient_is_convex() {
        let p = synthesize_quadratic(10, 50.0, 6, 4, 2).unwrap();
        let c = p.constants().unwrap();
        assert_eq!(c.strong_convexity, 0.0);
        assert_eq!(c.f_star, 0.0);
        assert_eq!(p.compute_constants().unwrap().strong_convexity, 0.0);
    }

    #[test]
    fn synthetic_is_reproducible() {
        let a = synthesize_quadratic(4, 10.0, 4, 2, 9).unwrap();
        let b = synthesize_quadratic(4, 10.0, 4, 2, 9).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        let l = synthesize_logistic(3, 1.0, 2, 8, 0.1, 4).unwrap();
        assert_eq!(l.node_count(), 2);
        assert!(synthesize_quadratic(4, 0.5, 4, 2, 0).is_err());
        assert!(synthesize_quadratic(4, 10.0, 5, 2, 0).is_err());
    }

    #[test]
    fn samples_per_node_serde() {
        let a: SamplesPerNode = serde_json::from_str("\"all\"").unwrap();
        assert_eq!(a, SamplesPerNode::All);
        let c: SamplesPerNode = serde_json::from_str("12").unwrap();
        assert_eq!(c, SamplesPerNode::Count(12));
        assert!(serde_json::from_str::<SamplesPerNode>("0").is_err());
        assert_eq!(serde_json::to_string(&SamplesPerNode::All).unwrap(), "\"all\"");
    }
}
