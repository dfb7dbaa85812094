//! Datasets, Nyström samples, CSV I/O and preprocessing.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

fn validate_points(points: &[f64], dim: usize, what: &str) -> Result<usize> {
    if dim == 0 {
        return Err(Error::InvalidInput(format!("{what}: dimension must be at least 1")));
    }
    if points.is_empty() || !points.len().is_multiple_of(dim) {
        return Err(Error::InvalidInput(format!(
            "{what}: {} values do not form a non-empty table with {dim} columns",
            points.len()
        )));
    }
    if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what}: non-finite value at row {}, column {}",
            pos / dim,
            pos % dim
        )));
    }
    Ok(points.len() / dim)
}

fn flatten_rows(rows: Vec<Vec<f64>>, what: &str) -> Result<(Vec<f64>, usize)> {
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    let mut flat = Vec::with_capacity(rows.len() * dim);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != dim {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has {} columns, expected {dim}",
                row.len()
            )));
        }
        flat.extend(row);
    }
    Ok((flat, dim))
}

/// `N` points in `ℝᵈ`, stored row-major. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n_points: usize,
    dim: usize,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        let n_points = validate_points(&points, dim, "dataset")?;
        Ok(Self { points, n_points, dim })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (flat, dim) = flatten_rows(rows, "dataset")?;
        Self::new(flat, dim)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Keeps the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.n_points {
                return Err(Error::IndexOutOfRange { index: i, len: self.n_points });
            }
            points.extend_from_slice(self.row(i));
        }
        Self::new(points, self.dim)
    }

    /// Drops the rows at `excluded` (0-based). Duplicated indices are ignored.
    pub fn exclude_rows(&self, excluded: &[usize]) -> Result<Self> {
        let drop: HashSet<usize> = excluded.iter().copied().collect();
        if let Some(&bad) = drop.iter().find(|&&i| i >= self.n_points) {
            return Err(Error::IndexOutOfRange { index: bad, len: self.n_points });
        }
        let keep: Vec<usize> = (0..self.n_points).filter(|i| !drop.contains(i)).collect();
        if keep.is_empty() {
            return Err(Error::InvalidInput("row exclusion removes every row".into()));
        }
        self.select(&keep)
    }
}

/// A multiset of `n` landmark points in `ℝᵈ`; the optimisation variable.
#[derive(Debug, Clone, PartialEq)]
pub struct NystromSample {
    landmarks: Vec<f64>,
    n_landmarks: usize,
    dim: usize,
}

impl NystromSample {
    pub fn new(landmarks: Vec<f64>, dim: usize) -> Result<Self> {
        let n_landmarks = validate_points(&landmarks, dim, "landmarks")?;
        Ok(Self {
            landmarks,
            n_landmarks,
            dim,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (flat, dim) = flatten_rows(rows, "landmarks")?;
        Self::new(flat, dim)
    }

    /// Landmarks copied from the data rows at `indices` (repeats allowed).
    pub fn from_indices(data: &Dataset, indices: &[usize]) -> Result<Self> {
        let picked = data.select(indices)?;
        Self::new(picked.points, data.dim())
    }

    pub fn n_landmarks(&self) -> usize {
        self.n_landmarks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn landmark(&self, k: usize) -> &[f64] {
        &self.landmarks[k * self.dim..(k + 1) * self.dim]
    }

    pub fn landmarks(&self) -> std::slice::ChunksExact<'_, f64> {
        self.landmarks.chunks_exact(self.dim)
    }

    /// Flattened coordinates in landmark-major order.
    pub fn as_slice(&self) -> &[f64] {
        &self.landmarks
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.landmarks
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.landmarks().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_against(&self, data: &Dataset) -> Result<()> {
        if self.dim != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: self.dim,
            });
        }
        Ok(())
    }
}

/// Reads a rectangular numeric CSV table (comma separated, optional single
/// header line).
pub fn load_csv_table(path: &Path, has_header: bool) -> Result<(Vec<f64>, usize)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
    let mut values = Vec::new();
    let mut dim = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
        // 1-based line numbers, as an editor shows them
        let row = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match dim {
            None => dim = Some(record.len()),
            Some(d) if d != record.len() => {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    row,
                    column: record.len().min(d) + 1,
                    reason: format!("ragged row: {} fields, expected {d}", record.len()),
                })
            }
            _ => {}
        }
        for (j, cell) in record.iter().enumerate() {
            let parse_err = |reason: String| Error::Parse {
                path: path.to_owned(),
                row,
                column: j + 1,
                reason,
            };
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value {cell:?}")));
            }
            values.push(v);
        }
    }
    match dim {
        Some(d) if !values.is_empty() => Ok((values, d)),
        _ => Err(Error::InvalidInput(format!("{}: no data rows", path.display()))),
    }
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let (values, dim) = load_csv_table(path.as_ref(), has_header)?;
    Dataset::new(values, dim)
}

pub fn load_landmarks_csv(path: impl AsRef<Path>, has_header: bool) -> Result<NystromSample> {
    let (values, dim) = load_csv_table(path.as_ref(), has_header)?;
    NystromSample::new(values, dim)
}

/// Reads 0-based row indices, one per line; blank lines and `#` comments are
/// skipped.
pub fn load_exclusion_list(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let idx = line.parse::<usize>().map_err(|_| Error::Parse {
            path: path.to_owned(),
            row: i + 1,
            column: 1,
            reason: format!("not a row index: {line:?}"),
        })?;
        out.push(idx);
    }
    Ok(out)
}

/// Writes rows of `dim` values as CSV using the shortest round-trip decimal
/// representation of each value.
pub fn write_csv_rows(path: impl AsRef<Path>, values: &[f64], dim: usize) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for row in values.chunks_exact(dim) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Centres every column and scales it to unit population variance
/// (denominator `N`).
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let n = data.n_points();
    let d = data.dim();
    if n < 2 {
        return Err(Error::InvalidInput("standardisation needs at least 2 points".into()));
    }
    let mut points = data.as_slice().to_vec();
    for j in 0..d {
        let mean = data.rows().map(|r| r[j]).sum::<f64>() / n as f64;
        for i in 0..n {
            points[i * d + j] -= mean;
        }
        let var = (0..n).map(|i| points[i * d + j].powi(2)).sum::<f64>() / n as f64;
        if var == 0.0 {
            return Err(Error::ZeroVariance { column: j });
        }
        let sd = var.sqrt();
        for i in 0..n {
            points[i * d + j] /= sd;
        }
    }
    Dataset::new(points, d)
}

/// Removes rows that are bitwise identical to an earlier row.
pub fn deduplicate(data: &Dataset) -> Dataset {
    let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(data.n_points());
    let mut points = Vec::with_capacity(data.as_slice().len());
    for row in data.rows() {
        if seen.insert(row.iter().map(|v| v.to_bits()).collect()) {
            points.extend_from_slice(row);
        }
    }
    Dataset::new(points, data.dim()).expect("a non-empty subset of a valid dataset is valid")
}

/// Two-component isotropic Gaussian mixture restricted to `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiGaussian {
    /// Probability of the component centred at `(-0.8, 0.8)`.
    pub weight: f64,
    pub means: [[f64; 2]; 2],
    /// Per-coordinate variance of each component.
    pub variance: f64,
}

impl Default for BiGaussian {
    fn default() -> Self {
        Self {
            weight: 0.5,
            means: [[-0.8, 0.8], [0.8, -0.8]],
            variance: 0.5,
        }
    }
}

impl BiGaussian {
    /// Draws `n_points` i.i.d. points by rejection onto the square.
    pub fn generate(&self, n_points: usize, seed: u64) -> Result<Dataset> {
        if n_points == 0 {
            return Err(Error::invalid("n_points", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::invalid("weight", format!("must lie in [0, 1], got {}", self.weight)));
        }
        let normal = Normal::new(0.0, self.variance.sqrt())
            .map_err(|e| Error::invalid("variance", e.to_string()))?;
        let mut rng = rng_from_seed(seed);
        let mut points = Vec::with_capacity(2 * n_points);
        while points.len() < 2 * n_points {
            let c = if rng.random::<f64>() < self.weight { 0 } else { 1 };
            let x = self.means[c][0] + normal.sample(&mut rng);
            let y = self.means[c][1] + normal.sample(&mut rng);
            if (-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y) {
                points.push(x);
                points.push(y);
            }
        }
        Dataset::new(points, 2)
    }
}

/// Equal-weight bi-Gaussian set on `[-1, 1]²`, see [`BiGaussian`].
pub fn bigaussian_generate(n_points: usize, seed: u64) -> Result<Dataset> {
    BiGaussian::default().generate(n_points, seed)
}

/// Row indices of `n` distinct data points drawn uniformly without
/// replacement.
pub fn sample_initial_indices(n_points: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 || n > n_points {
        return Err(Error::invalid(
            "n_landmarks",
            format!("need 1 <= n <= N = {n_points}, got {n}"),
        ));
    }
    let mut rng = rng_from_seed(seed);
    Ok(rand::seq::index::sample(&mut rng, n_points, n).into_vec())
}

/// Initial Nyström sample: `n` distinct rows of `data` drawn uniformly
/// without replacement.
pub fn sample_initial(data: &Dataset, n: usize, seed: u64) -> Result<NystromSample> {
    let idx = sample_initial_indices(data.n_points(), n, seed)?;
    NystromSample::from_indices(data, &idx)
}
