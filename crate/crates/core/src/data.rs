//! Datasets, pseudo-observations and the preprocessing steps applied before
//! fitting: ranking, splitting, outlier injection, flipping and censoring.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::copula::Rectangle;
use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::rng;

/// Row-major `n x d` matrix of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    normalized: bool,
}

impl Dataset {
    /// Raw observations with arbitrary finite values.
    pub fn raw(dim: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(dim, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("row {}: non-finite value", i / dim)));
        }
        Ok(Dataset { dim, values, normalized: false })
    }

    /// Pseudo-observations; every entry must lie strictly inside `(0, 1)`.
    pub fn normalized(dim: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(dim, values.len())?;
        if let Some(i) = values.iter().position(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::Data(format!(
                "row {}: value {} is not strictly inside (0, 1)",
                i / dim,
                values[i]
            )));
        }
        Ok(Dataset { dim, values, normalized: true })
    }

    pub fn from_rows(rows: &[Vec<f64>], normalized: bool) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Data("rows have differing lengths".into()));
        }
        let values = rows.concat();
        if normalized {
            Dataset::normalized(dim, values)
        } else {
            Dataset::raw(dim, values)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Rows selected by index, keeping the normalization flag.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Dataset { dim: self.dim, values, normalized: self.normalized }
    }

    /// Parse CSV text: optional header, `d` numeric columns per row. Any
    /// malformed row rejects the whole input, listing every bad line.
    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut dim = None;
        let mut values = Vec::new();
        let mut problems = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            match parsed {
                Err(_) if i == 0 => continue, // header
                Err(e) => problems.push(format!("line {line}: {e}")),
                Ok(row) if row.iter().any(|v| !v.is_finite()) => {
                    problems.push(format!("line {line}: non-finite value"))
                }
                Ok(row) => {
                    let d = *dim.get_or_insert(row.len());
                    if row.len() != d {
                        problems.push(format!("line {line}: expected {d} columns, found {}", row.len()));
                    } else {
                        values.extend(row);
                    }
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Data(format!("malformed CSV: {}", problems.join("; "))));
        }
        let dim = dim.ok_or_else(|| Error::Data("CSV contains no data rows".into()))?;
        Dataset::raw(dim, values)
    }

    /// Load a CSV file; the result counts as normalized when every entry is
    /// already inside `(0, 1)`.
    pub fn load(path: &Path) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        let ds = Dataset::read_csv(std::io::BufReader::new(file))?;
        if ds.values.iter().all(|&v| v > 0.0 && v < 1.0) {
            Ok(Dataset { normalized: true, ..ds })
        } else {
            Ok(ds)
        }
    }

    /// One row per line, 17 significant digits, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_matrix(writer, self.dim, &self.values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub(crate) fn write_matrix<W: Write>(writer: W, dim: usize, values: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in values.chunks_exact(dim.max(1)) {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn check_shape(dim: usize, len: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Data("dataset dimension must be positive".into()));
    }
    if !len.is_multiple_of(dim) {
        return Err(Error::Data(format!("{len} values do not form rows of width {dim}")));
    }
    Ok(())
}

/// Interval-censored observations: each coordinate is only known to lie in
/// `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredDataset {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Noise level used to synthesize the intervals, if any.
    pub lambda: Option<f64>,
}

impl CensoredDataset {
    pub fn new(dim: usize, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_shape(dim, lower.len())?;
        if lower.len() != upper.len() {
            return Err(Error::Data("lower and upper bounds differ in length".into()));
        }
        for (i, (&a, &b)) in lower.iter().zip(&upper).enumerate() {
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return Err(Error::Data(format!("row {}: invalid interval [{a}, {b}]", i / dim)));
            }
        }
        Ok(CensoredDataset { dim, lower, upper, lambda: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lower.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self, i: usize) -> &[f64] {
        &self.lower[i * self.dim..(i + 1) * self.dim]
    }

    pub fn upper(&self, i: usize) -> &[f64] {
        &self.upper[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rectangle(&self, i: usize) -> Rectangle {
        Rectangle { lower: self.lower(i).to_vec(), upper: self.upper(i).to_vec() }
    }

    pub fn subset(&self, idx: &[usize]) -> CensoredDataset {
        let mut lower = Vec::with_capacity(idx.len() * self.dim);
        let mut upper = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            lower.extend_from_slice(self.lower(i));
            upper.extend_from_slice(self.upper(i));
        }
        CensoredDataset { dim: self.dim, lower, upper, lambda: self.lambda }
    }

    /// Read a CSV whose rows hold `d` lower bounds followed by `d` upper
    /// bounds.
    pub fn load(path: &Path) -> Result<CensoredDataset> {
        let file = std::fs::File::open(path)?;
        let flat = Dataset::read_csv(std::io::BufReader::new(file))?;
        if flat.dim % 2 != 0 {
            return Err(Error::Data(format!(
                "censored CSV needs an even column count (lower bounds then upper bounds), found {}",
                flat.dim
            )));
        }
        let d = flat.dim / 2;
        let mut lower = Vec::with_capacity(flat.values.len() / 2);
        let mut upper = Vec::with_capacity(flat.values.len() / 2);
        for row in flat.rows() {
            lower.extend_from_slice(&row[..d]);
            upper.extend_from_slice(&row[d..]);
        }
        CensoredDataset::new(d, lower, upper)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut flat = Vec::with_capacity(2 * self.lower.len());
        for i in 0..self.len() {
            flat.extend_from_slice(self.lower(i));
            flat.extend_from_slice(self.upper(i));
        }
        let file = std::fs::File::create(path)?;
        write_matrix(std::io::BufWriter::new(file), 2 * self.dim, &flat)
    }
}

/// Replace every column by its average ranks divided by `n + 1`.
pub fn rank_normalize(data: &Dataset) -> Result<Dataset> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Data("rank normalization needs at least two rows".into()));
    }
    let d = data.dim;
    let mut out = vec![0.0; n * d];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..d {
        let col = data.column(j);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        if col[order[0]] == col[order[n - 1]] {
            return Err(Error::Data(format!("column {j} is constant")));
        }
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // ranks start+1..=end share their average
            let rank = (start + 1 + end) as f64 / 2.0;
            for &i in &order[start..end] {
                out[i * d + j] = rank / (n + 1) as f64;
            }
            start = end;
        }
    }
    Dataset::normalized(d, out)
}

/// Random partition with `round(ratio * n)` training rows, then rank
/// normalization of each part on its own.
pub fn split(data: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::domain(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let n = data.len();
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Data(format!("split of {n} rows at ratio {ratio} leaves an empty part")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::sequential(seed));
    let train = rank_normalize(&data.subset(&idx[..n_train]))?;
    let test = rank_normalize(&data.subset(&idx[n_train..]))?;
    Ok((train, test))
}

/// Default outlier rate: one uniform point per hundred observations.
pub const DEFAULT_OUTLIER_RATE: f64 = 0.01;

/// Append `floor(n * rate)` independent uniform points.
pub fn inject_outliers(data: &Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("outlier rate must be finite and >= 0, got {rate}")));
    }
    let extra = (data.len() as f64 * rate).floor() as usize;
    let mut values = data.values.clone();
    values.reserve(extra * data.dim);
    for k in 0..extra {
        let mut r = rng::stream(seed, k as u64);
        for _ in 0..data.dim {
            values.push(rng::open_uniform(&mut r));
        }
    }
    Ok(Dataset { dim: data.dim, values, normalized: data.normalized })
}

/// `u -> 1 - u` on the selected coordinates.
pub fn flip(data: &Dataset, coords: &[usize]) -> Result<Dataset> {
    if let Some(&j) = coords.iter().find(|&&j| j >= data.dim) {
        return Err(Error::domain(format!("coordinate {j} out of range for dimension {}", data.dim)));
    }
    let mut values = data.values.clone();
    for row in values.chunks_exact_mut(data.dim) {
        for &j in coords {
            row[j] = 1.0 - row[j];
        }
    }
    Ok(Dataset { dim: data.dim, values, normalized: data.normalized })
}

/// Widen each entry to `[max(0, u - a), min(1, u + b)]` with `a, b` uniform
/// on `[0, lambda]`.
pub fn censor(data: &Dataset, lambda: f64, seed: u64) -> Result<CensoredDataset> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("censoring level must be positive, got {lambda}")));
    }
    let mut lower = Vec::with_capacity(data.values.len());
    let mut upper = Vec::with_capacity(data.values.len());
    for (i, row) in data.rows().enumerate() {
        let mut r = rng::stream(seed, i as u64);
        for &u in row {
            let a: f64 = r.random::<f64>() * lambda;
            let b: f64 = r.random::<f64>() * lambda;
            lower.push((u - a).max(0.0));
            upper.push((u + b).min(1.0));
        }
    }
    let mut out = CensoredDataset::new(data.dim, lower, upper)?;
    out.lambda = Some(lambda);
    Ok(out)
}

/// Sample Kendall tau between two columns, O(n^2).
pub fn kendall_tau(data: &Dataset, a: usize, b: usize) -> f64 {
    let (x, y) = (data.column(a), data.column(b));
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += ((x[i] - x[j]) * (y[i] - y[j])).signum();
        }
    }
    s / (n * (n - 1) / 2) as f64
}
