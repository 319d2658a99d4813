//! Feature-by-subject expression matrices, TSV ingestion and the
//! median-normalize / signed-log preprocessing transform.
//!
//! Matrix files are UTF-8 tab-separated text. The first row holds subject
//! IDs (its first cell is a free-form corner label), and every following row
//! holds a feature ID and one numeric value per subject. Group labels come
//! either from a two-column `subject<TAB>group` file or from header cells of
//! the form `subject:group`.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{DfdrError, Result};

/// Where subject group labels are read from.
#[derive(Debug, Clone)]
pub enum LabelSource {
    /// Two-column `subject<TAB>group` file; subjects absent from the matrix
    /// are ignored.
    File(PathBuf),
    /// Header cells are `subject:group`, split at the last `:`.
    Header,
}

/// An m x n matrix of measurements, features in rows and subjects in columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    feature_ids: Vec<String>,
    subject_ids: Vec<String>,
    labels: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix from row-major `values` (length m*n).
    pub fn new(
        values: Vec<f64>,
        feature_ids: Vec<String>,
        subject_ids: Vec<String>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let m = feature_ids.len();
        let n = subject_ids.len();
        if m == 0 {
            return Err(DfdrError::Validation("matrix has no features".into()));
        }
        if n < 2 {
            return Err(DfdrError::Validation(format!(
                "matrix has {n} subject(s); at least 2 are required"
            )));
        }
        if values.len() != m * n {
            return Err(DfdrError::Validation(format!(
                "expected {} values for a {m} x {n} matrix, got {}",
                m * n,
                values.len()
            )));
        }
        if labels.len() != n {
            return Err(DfdrError::Validation(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        if let Some(dup) = first_duplicate(&feature_ids) {
            return Err(DfdrError::Validation(format!("duplicate feature ID '{dup}'")));
        }
        if let Some(dup) = first_duplicate(&subject_ids) {
            return Err(DfdrError::Validation(format!("duplicate subject ID '{dup}'")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DfdrError::Validation(format!(
                "non-finite value at feature '{}', subject '{}'",
                feature_ids[pos / n],
                subject_ids[pos % n]
            )));
        }
        Ok(Self {
            values,
            feature_ids,
            subject_ids,
            labels,
        })
    }

    pub fn from_rows(
        rows: &[Vec<f64>],
        feature_ids: Vec<String>,
        subject_ids: Vec<String>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let n = subject_ids.len();
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return Err(DfdrError::Validation(format!(
                "row {i} has {} values, expected {n}",
                rows[i].len()
            )));
        }
        Self::new(rows.concat(), feature_ids, subject_ids, labels)
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    pub fn feature_ids(&self) -> &[String] {
        &self.feature_ids
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_subjects();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn get(&self, feature: usize, subject: usize) -> f64 {
        self.values[feature * self.n_subjects() + subject]
    }

    /// Column indices of the subjects labelled `group`.
    pub fn group_indices(&self, group: &str) -> Result<Vec<usize>> {
        let idx: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_str() == group)
            .map(|(j, _)| j)
            .collect();
        if idx.is_empty() {
            return Err(DfdrError::UnknownGroup(group.to_string()));
        }
        Ok(idx)
    }

    /// Group tags with their sizes, in order of first appearance.
    pub fn groups(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = Vec::new();
        for l in &self.labels {
            match out.iter_mut().find(|(g, _)| g == l) {
                Some((_, c)) => *c += 1,
                None => out.push((l.clone(), 1)),
            }
        }
        out
    }

    /// Index of a feature by ID.
    pub fn feature_index(&self, id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == id)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}

fn first_duplicate(ids: &[String]) -> Option<&str> {
    let mut seen = HashSet::with_capacity(ids.len());
    ids.iter().find(|id| !seen.insert(id.as_str())).map(|s| s.as_str())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| DfdrError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> DfdrError {
    DfdrError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a TSV matrix and attaches group labels.
pub fn load_matrix(path: &Path, labels: &LabelSource) -> Result<DataMatrix> {
    let text = read_text(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "file is empty"))?;
    let header_cells: Vec<&str> = header.split('\t').skip(1).map(str::trim).collect();

    let (subject_ids, header_labels): (Vec<String>, Option<Vec<String>>) = match labels {
        LabelSource::Header => {
            let mut ids = Vec::with_capacity(header_cells.len());
            let mut tags = Vec::with_capacity(header_cells.len());
            for cell in &header_cells {
                let (id, tag) = cell.rsplit_once(':').ok_or_else(|| {
                    parse_err(path, 1, format!("header cell '{cell}' is not of the form subject:group"))
                })?;
                ids.push(id.to_string());
                tags.push(tag.to_string());
            }
            (ids, Some(tags))
        }
        LabelSource::File(_) => (header_cells.iter().map(|s| s.to_string()).collect(), None),
    };
    let n = subject_ids.len();

    let mut feature_ids = Vec::new();
    let mut values = Vec::new();
    for (line_no, line) in lines {
        let mut cells = line.split('\t');
        let id = cells.next().unwrap_or_default().trim();
        let before = values.len();
        for (j, cell) in cells.enumerate() {
            let cell = cell.trim();
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    parse_err(
                        path,
                        line_no,
                        format!("non-numeric value '{cell}' in column {}", j + 2),
                    )
                })?;
            values.push(v);
        }
        let got = values.len() - before;
        if got != n {
            return Err(parse_err(
                path,
                line_no,
                format!("row '{id}' has {got} values, expected {n}"),
            ));
        }
        feature_ids.push(id.to_string());
    }

    let labels = match (labels, header_labels) {
        (_, Some(tags)) => tags,
        (LabelSource::File(lpath), None) => {
            let map = load_labels(lpath)?;
            subject_ids
                .iter()
                .map(|s| {
                    map.get(s).cloned().ok_or_else(|| {
                        DfdrError::Validation(format!("subject '{s}' has no group label"))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        (LabelSource::Header, None) => unreachable!(),
    };

    DataMatrix::new(values, feature_ids, subject_ids, labels)
}

/// Reads a two-column `subject<TAB>group` file.
pub fn load_labels(path: &Path) -> Result<HashMap<String, String>> {
    let text = read_text(path)?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cells.len() != 2 || cells.iter().any(|c| c.is_empty()) {
            return Err(parse_err(path, i + 1, "expected 'subject<TAB>group'"));
        }
        if map.insert(cells[0].to_string(), cells[1].to_string()).is_some() {
            return Err(DfdrError::Validation(format!(
                "subject '{}' is labelled more than once",
                cells[0]
            )));
        }
    }
    Ok(map)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// `sign(x) * ln(1 + |x|)`; zero maps to zero.
pub fn signed_log(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

/// Divides each subject column by its median over all features, then applies
/// [`signed_log`] elementwise.
pub fn preprocess(matrix: &DataMatrix) -> Result<DataMatrix> {
    let m = matrix.n_features();
    let n = matrix.n_subjects();
    let mut medians = Vec::with_capacity(n);
    let mut col = vec![0.0; m];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = matrix.get(i, j);
        }
        let med = median(&mut col);
        if med == 0.0 {
            return Err(DfdrError::ZeroMedian {
                subject: matrix.subject_ids[j].clone(),
            });
        }
        medians.push(med);
    }
    let values = matrix
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| signed_log(x / medians[k % n]))
        .collect();
    Ok(DataMatrix {
        values,
        ..matrix.clone()
    })
}
