use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::GaugeError;

/// A uniform grid: point `idx` sits at `origin + spacing * idx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl GridSpec {
    /// `n` points per axis covering `[lo, hi]` in every coordinate.
    pub fn cube(dimension: usize, lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2, "need at least two points per axis");
        Self {
            dimension,
            origin: vec![lo; dimension],
            spacing: (hi - lo) / (n - 1) as f64,
            shape: vec![n; dimension],
        }
    }

    pub fn check(&self) -> Result<(), GaugeError> {
        if self.dimension == 0
            || self.origin.len() != self.dimension
            || self.shape.len() != self.dimension
        {
            return Err(GaugeError::BadGrid("origin and shape must have `dimension` entries".into()));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(GaugeError::BadGrid("spacing must be positive".into()));
        }
        if self.shape.contains(&0) {
            return Err(GaugeError::BadGrid("shape entries must be positive".into()));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dimension];
        for a in (0..self.dimension.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dimension];
        for a in (0..self.dimension).rev() {
            idx[a] = p % self.shape[a];
            p /= self.shape[a];
        }
        idx
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + self.spacing * i as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Bivector,
    TwoForm,
}

/// Number of strictly upper-triangular entries of a `d × d` matrix.
pub fn component_count(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Position of `(i, j)`, `i < j`, in row-major upper-triangular order.
pub fn component_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

/// An antisymmetric matrix per grid point, stored as its upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub kind: FieldKind,
    /// `data[p * m + c]`, `m` = [`component_count`], `c` = [`component_index`].
    pub data: Vec<f64>,
}

impl SampledField {
    pub fn zeros(grid: GridSpec, kind: FieldKind) -> Self {
        let n = grid.point_count() * component_count(grid.dimension);
        Self {
            grid,
            kind,
            data: vec![0.0; n],
        }
    }

    /// Samples `f(x, i, j)` for every point and every `i < j`.
    pub fn from_fn(grid: GridSpec, kind: FieldKind, f: impl Fn(&[f64], usize, usize) -> f64) -> Self {
        let d = grid.dimension;
        let mut out = Self::zeros(grid, kind);
        let m = component_count(d);
        for p in 0..out.grid.point_count() {
            let x = out.grid.coords(p);
            for i in 0..d {
                for j in i + 1..d {
                    out.data[p * m + component_index(d, i, j)] = f(&x, i, j);
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<(), GaugeError> {
        self.grid.check()?;
        let expected = self.grid.point_count() * component_count(self.grid.dimension);
        if self.data.len() != expected {
            return Err(GaugeError::BadGrid(format!(
                "expected {expected} values, found {}",
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn components(&self) -> usize {
        component_count(self.grid.dimension)
    }

    /// Entry `(i, j)` at point `p`, any `i`, `j`.
    #[inline]
    pub fn get(&self, p: usize, i: usize, j: usize) -> f64 {
        let d = self.grid.dimension;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.data[p * self.components() + component_index(d, i, j)],
            std::cmp::Ordering::Greater => -self.data[p * self.components() + component_index(d, j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    pub fn matrix(&self, p: usize) -> DMatrix<f64> {
        let d = self.grid.dimension;
        DMatrix::from_fn(d, d, |i, j| self.get(p, i, j))
    }

    /// Stores the antisymmetric part of `m` at `p`; returns `max |m + mᵀ| / 2`.
    pub fn set_matrix(&mut self, p: usize, m: &DMatrix<f64>) -> f64 {
        let d = self.grid.dimension;
        let c = self.components();
        let mut asym: f64 = 0.0;
        for i in 0..d {
            asym = asym.max(m[(i, i)].abs());
            for j in i + 1..d {
                asym = asym.max(((m[(i, j)] + m[(j, i)]) / 2.0).abs());
                self.data[p * c + component_index(d, i, j)] = (m[(i, j)] - m[(j, i)]) / 2.0;
            }
        }
        asym
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn added(&self, other: &SampledField) -> Result<Self, GaugeError> {
        if self.grid != other.grid {
            return Err(GaugeError::GridMismatch);
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }
}

/// One entry of an analytic field specification:
/// `c + Σ_a linear[a] x_a + Σ_ab quadratic[a][b] x_a x_b` at `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEntry {
    pub i: usize,
    pub j: usize,
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub linear: Vec<f64>,
    #[serde(default)]
    pub quadratic: Vec<Vec<f64>>,
}

/// Coefficient table for a polynomial (degree ≤ 2) antisymmetric field.
/// An entry sets `(i, j)`, and `(j, i)` follows by antisymmetry; missing
/// entries are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpec {
    pub kind: FieldKind,
    /// Grid to sample on, when the spec is used on its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub entries: Vec<AnalyticEntry>,
}

impl AnalyticEntry {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for (a, c) in self.linear.iter().enumerate() {
            v += c * x[a];
        }
        for (a, row) in self.quadratic.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                v += c * x[a] * x[b];
            }
        }
        v
    }
}

impl AnalyticSpec {
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledField, GaugeError> {
        grid.check()?;
        let d = grid.dimension;
        for e in &self.entries {
            if e.i == e.j || e.i >= d || e.j >= d {
                return Err(GaugeError::BadSpec(format!("entry ({}, {}) out of range", e.i, e.j)));
            }
            if e.linear.len() > d || e.quadratic.len() > d || e.quadratic.iter().any(|r| r.len() > d) {
                return Err(GaugeError::BadSpec(format!(
                    "entry ({}, {}) has too many coefficients",
                    e.i, e.j
                )));
            }
        }
        Ok(SampledField::from_fn(grid.clone(), self.kind, |x, i, j| {
            self.entries
                .iter()
                .map(|e| {
                    if (e.i, e.j) == (i, j) {
                        e.eval(x)
                    } else if (e.j, e.i) == (i, j) {
                        -e.eval(x)
                    } else {
                        0.0
                    }
                })
                .sum()
        }))
    }
}

/// JSON sidecar of a binary field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dimension: usize,
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
    pub kind: FieldKind,
    /// Binary file, relative to the sidecar's directory.
    pub data: String,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> GaugeError {
    GaugeError::Io(format!("{}: {e}", path.display()))
}

/// Reads a field from its JSON sidecar and the little-endian `f64` data
/// file it names.
pub fn read_field(sidecar: &Path) -> Result<SampledField, GaugeError> {
    let text = fs::read_to_string(sidecar).map_err(|e| io_err(sidecar, e))?;
    let header: FieldHeader = serde_json::from_str(&text).map_err(|e| io_err(sidecar, e))?;
    let data_path = sidecar
        .parent()
        .map(|p| p.join(&header.data))
        .unwrap_or_else(|| PathBuf::from(&header.data));
    let bytes = fs::read(&data_path).map_err(|e| io_err(&data_path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(io_err(&data_path, "length is not a multiple of 8"));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let field = SampledField {
        grid: GridSpec {
            dimension: header.dimension,
            origin: header.origin,
            spacing: header.spacing,
            shape: header.shape,
        },
        kind: header.kind,
        data,
    };
    field.check()?;
    Ok(field)
}

/// Writes `field` as a JSON sidecar plus a binary file next to it with the
/// extension replaced by `.bin`.
pub fn write_field(sidecar: &Path, field: &SampledField) -> Result<(), GaugeError> {
    let data_path = sidecar.with_extension("bin");
    let header = FieldHeader {
        dimension: field.grid.dimension,
        origin: field.grid.origin.clone(),
        spacing: field.grid.spacing,
        shape: field.grid.shape.clone(),
        kind: field.kind,
        data: data_path
            .file_name()
            .expect("file name")
            .to_string_lossy()
            .into_owned(),
    };
    let bytes: Vec<u8> = field.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    fs::write(&data_path, bytes).map_err(|e| io_err(&data_path, e))?;
    let text = serde_json::to_string_pretty(&header).map_err(|e| io_err(sidecar, e))?;
    fs::write(sidecar, text + "\n").map_err(|e| io_err(sidecar, e))
}
