//! Sampled vector-valued functions on axis-aligned boxes.
//!
//! A [`Grid`] is the tensor product of uniformly spaced axes; a
//! [`GridFunction`] stores one `R^m` value per grid point in row-major
//! multi-index order (last axis fastest) together with the norms chosen for
//! the source and target spaces. Functions are immutable after construction
//! and safe to share across threads.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{HolderError, Result};
use crate::modulus::Modulus;

/// Norm applied to target-space vectors in `R^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorNorm {
    L2,
    Linf,
    L1,
}

/// Norm applied to source-space points in `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceNorm {
    L2,
    Linf,
}

impl VectorNorm {
    pub fn apply(&self, v: &[f64]) -> f64 {
        match self {
            VectorNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            VectorNorm::Linf => v.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
            VectorNorm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn diff(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            VectorNorm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            VectorNorm::Linf => a
                .iter()
                .zip(b)
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())),
            VectorNorm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }
}

impl SourceNorm {
    pub fn apply(&self, v: &[f64]) -> f64 {
        match self {
            SourceNorm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            SourceNorm::Linf => v.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
        }
    }

    pub fn diff(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            SourceNorm::L2 => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            SourceNorm::Linf => a
                .iter()
                .zip(b)
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs())),
        }
    }
}

/// Pair of norms fixing the geometry of the source and target spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormSpec {
    pub y: VectorNorm,
    pub x: SourceNorm,
}

impl Default for NormSpec {
    fn default() -> Self {
        NormSpec { y: VectorNorm::L2, x: SourceNorm::L2 }
    }
}

/// Largest supported grid point count; guards untrusted headers and index
/// overflow.
pub const MAX_POINTS: usize = 100_000_000;

/// Uniform tensor-product grid on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        let n = shape.len();
        if n == 0 {
            return Err(HolderError::Argument("grid dimension must be at least 1".into()));
        }
        if origin.len() != n || spacing.len() != n {
            return Err(HolderError::Argument(format!(
                "origin/spacing/shape lengths disagree: {}/{}/{}",
                origin.len(),
                spacing.len(),
                n
            )));
        }
        for a in 0..n {
            if !origin[a].is_finite() {
                return Err(HolderError::Argument(format!("origin[{a}] must be finite")));
            }
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(HolderError::Argument(format!(
                    "spacing[{a}] must be positive and finite, got {}",
                    spacing[a]
                )));
            }
            if shape[a] < 2 {
                return Err(HolderError::Argument(format!(
                    "shape[{a}] must be at least 2, got {}",
                    shape[a]
                )));
            }
        }
        if shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .filter(|&t| t <= MAX_POINTS)
            .is_none()
        {
            return Err(HolderError::Argument(format!(
                "grid point count exceeds the supported maximum {MAX_POINTS}"
            )));
        }
        Ok(Grid { origin, spacing, shape })
    }

    /// 1-D grid covering `[a, b]` with the given spacing; `b - a` must be a
    /// whole number of steps (within float tolerance).
    pub fn line(a: f64, b: f64, spacing: f64) -> Result<Self> {
        let steps = (b - a) / spacing;
        let n = steps.round();
        if (steps - n).abs() > 1e-9 || n < 1.0 {
            return Err(HolderError::Argument(format!(
                "interval [{a}, {b}] is not a whole number of steps of {spacing}"
            )));
        }
        Grid::new(vec![a], vec![spacing], vec![n as usize + 1])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dim();
        let mut s = vec![1usize; n];
        for a in (0..n.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let strides = self.strides();
        idx.iter().zip(&strides).map(|(i, s)| i * s).sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut rem = flat;
        let strides = self.strides();
        strides
            .iter()
            .map(|&s| {
                let i = rem / s;
                rem %= s;
                i
            })
            .collect()
    }

    /// Coordinates of the grid point with the given flat index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + i as f64 * self.spacing[a])
            .collect()
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.origin[a] + (self.shape[a] - 1) as f64 * self.spacing[a])
            .collect()
    }

    /// Largest source-norm of any box corner; a bound on `‖x‖` over the box.
    pub fn max_point_norm(&self, norm: SourceNorm) -> f64 {
        let lo = &self.origin;
        let hi = self.upper();
        let worst: Vec<f64> = (0..self.dim())
            .map(|a| lo[a].abs().max(hi[a].abs()))
            .collect();
        norm.apply(&worst)
    }

    /// True when the closed box contains the closed source-norm ball B(0, r).
    pub fn contains_ball(&self, r: f64, norm: SourceNorm) -> bool {
        let hi = self.upper();
        match norm {
            // The l2 ball contains the linf ball of the same radius, so the
            // axis-interval test suffices for both supported norms.
            SourceNorm::L2 | SourceNorm::Linf => {
                (0..self.dim()).all(|a| self.origin[a] <= -r && hi[a] >= r)
            }
        }
    }

    /// Clamps a point into the closed box, componentwise.
    pub fn clamp_point(&self, x: &[f64]) -> Vec<f64> {
        let hi = self.upper();
        x.iter()
            .enumerate()
            .map(|(a, &v)| v.clamp(self.origin[a], hi[a]))
            .collect()
    }
}

/// A sampled function `f: box → R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    ycomp: usize,
    values: Vec<f64>,
    norms: NormSpec,
    label: String,
}

impl GridFunction {
    pub fn new(
        grid: Grid,
        ycomp: usize,
        values: Vec<f64>,
        norms: NormSpec,
        label: impl Into<String>,
    ) -> Result<Self> {
        if ycomp == 0 {
            return Err(HolderError::Argument("ycomp must be at least 1".into()));
        }
        let expected = grid.len() * ycomp;
        if values.len() != expected {
            return Err(HolderError::Argument(format!(
                "value array length {} does not match point count × ycomp = {}",
                values.len(),
                expected
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HolderError::Argument(format!(
                "value at offset {i} is not finite"
            )));
        }
        Ok(GridFunction { grid, ycomp, values, norms, label: label.into() })
    }

    /// Samples a scalar closed-form function on the grid.
    pub fn sample_scalar(
        grid: Grid,
        norms: NormSpec,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let values: Vec<f64> = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        GridFunction::new(grid, 1, values, norms, label)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ycomp(&self) -> usize {
        self.ycomp
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norms(&self) -> NormSpec {
        self.norms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_norms(mut self, norms: NormSpec) -> Self {
        self.norms = norms;
        self
    }

    /// Value vector at a flat point index.
    pub fn value(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.ycomp..(flat + 1) * self.ycomp]
    }

    /// Source-norm of the grid point itself.
    pub fn point_norm(&self, flat: usize) -> f64 {
        self.norms.x.apply(&self.grid.point(flat))
    }

    /// Source-norm distance between two grid points.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.norms.x.diff(&self.grid.point(i), &self.grid.point(j))
    }

    /// Replaces the stored values, keeping geometry and norms.
    pub fn with_values(&self, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        GridFunction::new(self.grid.clone(), self.ycomp, values, self.norms, label)
    }

    /// Pointwise difference `self - other` on a shared grid.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.grid != other.grid || self.ycomp != other.ycomp {
            return Err(HolderError::Argument(
                "grid functions must share grid and ycomp".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        self.with_values(values, format!("{}-{}", self.label, other.label))
    }

    /// Sup over grid points of the target-norm difference to `other`.
    pub fn sup_diff(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid || self.ycomp != other.ycomp {
            return Err(HolderError::Argument(
                "grid functions must share grid and ycomp".into(),
            ));
        }
        let mut sup = 0.0_f64;
        for i in 0..self.grid.len() {
            sup = sup.max(self.norms.y.diff(self.value(i), other.value(i)));
        }
        Ok(sup)
    }

    /// Multilinear interpolation at a point of the closed box.
    ///
    /// Exact at grid points and on affine data; never overshoots the convex
    /// hull of the cell values.
    pub fn eval_interp(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.dim();
        if x.len() != n {
            return Err(HolderError::Argument(format!(
                "query point has dimension {}, grid has {}",
                x.len(),
                n
            )));
        }
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0_f64; n];
        for a in 0..n {
            let extent = (self.grid.shape[a] - 1) as f64;
            let u_raw = (x[a] - self.grid.origin[a]) / self.grid.spacing[a];
            let tol = 1e-9 * extent.max(1.0);
            if u_raw < -tol || u_raw > extent + tol {
                return Err(HolderError::Domain(format!(
                    "query coordinate {} on axis {a} lies outside the box",
                    x[a]
                )));
            }
            let mut u = u_raw.clamp(0.0, extent);
            // Snap to the lattice so grid points reproduce stored values exactly.
            if (u - u.round()).abs() < 1e-9 {
                u = u.round();
            }
            let i = (u.floor() as usize).min(self.grid.shape[a] - 2);
            base[a] = i;
            frac[a] = u - i as f64;
        }
        let strides = self.grid.strides();
        let m = self.ycomp;
        let mut out = vec![0.0_f64; m];
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..n {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat += (base[a] + bit) * strides[a];
            }
            if w == 0.0 {
                continue;
            }
            let v = self.value(flat);
            for c in 0..m {
                out[c] += w * v[c];
            }
        }
        Ok(out)
    }

    /// `‖f(x_i) − f(x_j)‖_Y / ω(‖x_i − x_j‖_X)` for distinct grid points.
    pub fn pair_oscillation(&self, m: &Modulus, i: &[usize], j: &[usize]) -> Result<f64> {
        if i == j {
            return Err(HolderError::Argument(
                "pair oscillation needs two distinct points".into(),
            ));
        }
        self.pair_oscillation_flat(m, self.grid.flat_index(i), self.grid.flat_index(j))
    }

    pub fn pair_oscillation_flat(&self, m: &Modulus, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(HolderError::Argument(
                "pair oscillation needs two distinct points".into(),
            ));
        }
        let num = self.norms.y.diff(self.value(i), self.value(j));
        let den = m.eval(self.dist(i, j))?;
        Ok(num / den)
    }
}

/// Serializes in the grid CSV format (see [`parse_csv`]). Reals use the
/// shortest round-trip decimal form.
pub fn to_csv_string(f: &GridFunction) -> String {
    let g = f.grid();
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = String::new();
    let _ = writeln!(out, "# dim: {}", g.dim());
    let _ = writeln!(
        out,
        "# shape: {}",
        g.shape().iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    );
    let _ = writeln!(out, "# origin: {}", join(g.origin()));
    let _ = writeln!(out, "# spacing: {}", join(g.spacing()));
    let _ = writeln!(out, "# ycomp: {}", f.ycomp());
    let _ = writeln!(out, "# label: {}", f.label().replace('\n', " "));
    for p in 0..g.len() {
        let _ = writeln!(out, "{}", join(f.value(p)));
    }
    out
}

pub fn save_grid_function(f: &GridFunction, path: impl AsRef<std::path::Path>) -> Result<()> {
    std::fs::write(path, to_csv_string(f))?;
    Ok(())
}

pub fn load_grid_function(path: impl AsRef<std::path::Path>) -> Result<GridFunction> {
    parse_csv(&std::fs::read_to_string(path)?)
}

/// Parses the grid CSV format:
///
/// ```text
/// # dim: 2
/// # shape: 3,3
/// # origin: -1,-1
/// # spacing: 1,1
/// # ycomp: 1
/// # label: demo
/// <one row per grid point, ycomp comma-separated reals, row-major order>
/// ```
///
/// Errors name the offending 1-based line. Loaded functions start with the
/// default norms; override with [`GridFunction::with_norms`].
pub fn parse_csv(text: &str) -> Result<GridFunction> {
    let mut dim: Option<usize> = None;
    let mut shape: Option<Vec<usize>> = None;
    let mut origin: Option<Vec<f64>> = None;
    let mut spacing: Option<Vec<f64>> = None;
    let mut ycomp: Option<usize> = None;
    let mut label = String::new();

    let mut rows: Vec<f64> = Vec::new();
    let mut expected_rows = 0usize;
    let mut seen_rows = 0usize;
    let mut grid: Option<Grid> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if grid.is_some() {
                return Err(HolderError::Parse {
                    line: line_no,
                    msg: "header line after data rows".into(),
                });
            }
            let (key, value) = rest.split_once(':').ok_or_else(|| HolderError::Parse {
                line: line_no,
                msg: "header line must look like `# key: value`".into(),
            })?;
            let value = value.trim();
            match key.trim() {
                "dim" => {
                    dim = Some(value.parse().map_err(|_| HolderError::Parse {
                        line: line_no,
                        msg: format!("invalid dim `{value}`"),
                    })?)
                }
                "shape" => shape = Some(parse_usize_list(value, line_no)?),
                "origin" => origin = Some(parse_f64_list(value, line_no)?),
                "spacing" => spacing = Some(parse_f64_list(value, line_no)?),
                "ycomp" => {
                    ycomp = Some(value.parse().map_err(|_| HolderError::Parse {
                        line: line_no,
                        msg: format!("invalid ycomp `{value}`"),
                    })?)
                }
                "label" => label = value.to_string(),
                other => {
                    return Err(HolderError::Parse {
                        line: line_no,
                        msg: format!("unknown header key `{other}`"),
                    })
                }
            }
            continue;
        }

        // First data row: all headers must be present and consistent.
        if grid.is_none() {
            let d = dim.ok_or_else(|| missing_header(line_no, "dim"))?;
            let sh = shape.clone().ok_or_else(|| missing_header(line_no, "shape"))?;
            let or = origin.clone().ok_or_else(|| missing_header(line_no, "origin"))?;
            let sp = spacing.clone().ok_or_else(|| missing_header(line_no, "spacing"))?;
            let m = ycomp.ok_or_else(|| missing_header(line_no, "ycomp"))?;
            if sh.len() != d || or.len() != d || sp.len() != d {
                return Err(HolderError::Parse {
                    line: line_no,
                    msg: format!("shape/origin/spacing lengths must equal dim = {d}"),
                });
            }
            let g = Grid::new(or, sp, sh).map_err(|e| HolderError::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            expected_rows = g.len();
            let total_values = expected_rows.checked_mul(m).filter(|&t| t <= MAX_POINTS);
            let Some(total_values) = total_values else {
                return Err(HolderError::Parse {
                    line: line_no,
                    msg: format!("value count exceeds the supported maximum {MAX_POINTS}"),
                });
            };
            // Allocation grows with actual rows; a header claiming a huge
            // grid cannot reserve memory the input never provides.
            rows.reserve(total_values.min(1 << 20));
            grid = Some(g);
        }

        let m = ycomp.unwrap();
        if seen_rows == expected_rows {
            return Err(HolderError::Parse {
                line: line_no,
                msg: format!("more data rows than the {expected_rows} grid points"),
            });
        }
        let mut count = 0usize;
        for part in line.split(',') {
            let v: f64 = part.trim().parse().map_err(|_| HolderError::Parse {
                line: line_no,
                msg: format!("invalid number `{part}`"),
            })?;
            if !v.is_finite() {
                return Err(HolderError::Parse {
                    line: line_no,
                    msg: format!("non-finite value `{part}`"),
                });
            }
            rows.push(v);
            count += 1;
        }
        if count != m {
            return Err(HolderError::Parse {
                line: line_no,
                msg: format!("expected {m} values per row, got {count}"),
            });
        }
        seen_rows += 1;
    }

    let grid = grid.ok_or(HolderError::Parse { line: 1, msg: "no data rows".into() })?;
    if seen_rows != expected_rows {
        return Err(HolderError::Parse {
            line: text.lines().count(),
            msg: format!("expected {expected_rows} data rows, got {seen_rows}"),
        });
    }
    GridFunction::new(grid, ycomp.unwrap(), rows, NormSpec::default(), label)
        .map_err(|e| HolderError::Parse { line: 1, msg: e.to_string() })
}

fn missing_header(line: usize, key: &str) -> HolderError {
    HolderError::Parse { line, msg: format!("missing header `{key}` before data rows") }
}

fn parse_usize_list(value: &str, line: usize) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|p| {
            p.trim().parse().map_err(|_| HolderError::Parse {
                line,
                msg: format!("invalid integer `{p}`"),
            })
        })
        .collect()
}

fn parse_f64_list(value: &str, line: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| HolderError::Parse {
                line,
                msg: format!("invalid number `{p}`"),
            })?;
            if !v.is_finite() {
                return Err(HolderError::Parse {
                    line,
                    msg: format!("non-finite number `{p}`"),
                });
            }
            Ok(v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line_fn(a: f64, b: f64, h: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        let grid = Grid::line(a, b, h).unwrap();
        GridFunction::sample_scalar(grid, NormSpec::default(), "t", |x| f(x[0])).unwrap()
    }

    #[test]
    fn row_major_indexing() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 4]).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.strides(), vec![4, 1]);
        assert_eq!(g.flat_index(&[1, 2]), 6);
        assert_eq!(g.multi_index(6), vec![1, 2]);
        assert_eq!(g.point(6), vec![1.0, 2.0]);
    }

    #[test]
    fn parse_simple_file() {
        let text = "# dim: 1\n# shape: 3\n# origin: 0\n# spacing: 0.5\n# ycomp: 1\n# label: fixture\n0\n1\n0\n";
        let f = parse_csv(text).unwrap();
        assert_eq!(f.grid().shape(), &[3]);
        assert_eq!(f.values(), &[0.0, 1.0, 0.0]);
        assert_eq!(f.label(), "fixture");
    }

    #[test]
    fn parse_rejects_nan() {
        let text = "# dim: 1\n# shape: 2\n# origin: 0\n# spacing: 1\n# ycomp: 1\n0\nNaN\n";
        let err = parse_csv(text).unwrap_err();
        assert!(matches!(err, HolderError::Parse { line: 7, .. }), "{err}");
    }

    #[test]
    fn parse_rejects_shape_mismatch() {
        let text = "# dim: 1\n# shape: 3\n# origin: 0\n# spacing: 1\n# ycomp: 1\n0\n1\n";
        let err = parse_csv(text).unwrap_err();
        assert!(matches!(err, HolderError::Parse { .. }), "{err}");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let grid = Grid::new(vec![-1.0, 0.25], vec![0.5, 0.125], vec![4, 5]).unwrap();
        let values: Vec<f64> = (0..grid.len() * 2)
            .map(|_| rng.gen_range(-5.0..5.0) * rng.gen_range(1e-8..1e8_f64))
            .collect();
        let f = GridFunction::new(grid, 2, values, NormSpec::default(), "roundtrip").unwrap();
        let g = parse_csv(&to_csv_string(&f)).unwrap();
        assert_eq!(f.values(), g.values());
        assert_eq!(f.grid(), g.grid());
    }

    #[test]
    fn interp_is_exact_at_grid_points() {
        let f = line_fn(0.0, 1.0, 0.25, |x| (x * 7.1).sin());
        for i in 0..f.grid().len() {
            let v = f.eval_interp(&f.grid().point(i)).unwrap();
            assert_eq!(v[0], f.value(i)[0]);
        }
    }

    #[test]
    fn interp_midpoint_is_mean_of_neighbors() {
        let f = line_fn(0.0, 2.0, 0.5, |x| 3.0 * x + 1.0);
        let v = f.eval_interp(&[0.75]).unwrap();
        assert_relative_eq!(v[0], (f.value(1)[0] + f.value(2)[0]) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn interp_2d_quarter_points() {
        // Bilinear fixture on the unit cell: corner values 1, 2, 4, 8.
        let grid = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 2]).unwrap();
        let f = GridFunction::new(
            grid,
            1,
            vec![1.0, 2.0, 4.0, 8.0],
            NormSpec::default(),
            "bilinear",
        )
        .unwrap();
        // Tensor weights at (1/4, 1/4): (3/4·3/4, 3/4·1/4, 1/4·3/4, 1/4·1/4).
        let v = f.eval_interp(&[0.25, 0.25]).unwrap()[0];
        let expected = 0.5625 * 1.0 + 0.1875 * 2.0 + 0.1875 * 4.0 + 0.0625 * 8.0;
        assert_relative_eq!(v, expected, epsilon = 1e-15);
        let v2 = f.eval_interp(&[0.75, 0.25]).unwrap()[0];
        let expected2 = 0.1875 * 1.0 + 0.0625 * 2.0 + 0.5625 * 4.0 + 0.1875 * 8.0;
        assert_relative_eq!(v2, expected2, epsilon = 1e-15);
    }

    #[test]
    fn interp_rejects_outside_box() {
        let f = line_fn(0.0, 1.0, 0.5, |x| x);
        assert!(matches!(f.eval_interp(&[1.5]), Err(HolderError::Domain(_))));
    }

    #[test]
    fn interp_reproduces_affine_functions() {
        let grid = Grid::new(vec![-1.0, 2.0], vec![0.5, 0.25], vec![5, 9]).unwrap();
        let f = GridFunction::sample_scalar(grid, NormSpec::default(), "affine", |x| {
            2.0 * x[0] - 3.0 * x[1] + 0.5
        })
        .unwrap();
        let queries = [[-0.9, 2.1], [0.13, 3.7], [1.0, 4.0], [-1.0, 2.0]];
        for q in queries {
            let v = f.eval_interp(&q).unwrap()[0];
            assert_relative_eq!(v, 2.0 * q[0] - 3.0 * q[1] + 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn pair_oscillation_formula() {
        let m = Modulus::power(0.5).unwrap();
        let f = line_fn(0.0, 1.0, 0.25, |x| x);
        // constant numerator zero
        let c = line_fn(0.0, 1.0, 0.25, |_| 3.0);
        assert_eq!(c.pair_oscillation(&m, &[0], &[3]).unwrap(), 0.0);
        // f(x) = x at distance 0.25: 0.25 / sqrt(0.25) = 0.5
        let v = f.pair_oscillation(&m, &[1], &[2]).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-14);
        assert!(f.pair_oscillation(&m, &[1], &[1]).is_err());
    }

    #[test]
    fn pair_oscillation_matches_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = Grid::line(0.0, 1.0, 0.25).unwrap();
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = GridFunction::new(grid, 1, values.clone(), NormSpec::default(), "r").unwrap();
        let m = Modulus::power(0.5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    continue;
                }
                let direct = (values[i] - values[j]).abs()
                    / ((i as f64 - j as f64).abs() * 0.25).sqrt();
                assert_relative_eq!(
                    f.pair_oscillation(&m, &[i], &[j]).unwrap(),
                    direct,
                    epsilon = 1e-14
                );
                // symmetry
                assert_eq!(
                    f.pair_oscillation(&m, &[i], &[j]).unwrap(),
                    f.pair_oscillation(&m, &[j], &[i]).unwrap()
                );
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn vec3() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-1e3_f64..1e3, 3)
        }

        proptest! {
            #![proptest_config(proptest::test_runner::Config::with_cases(1000))]

            #[test]
            fn norm_axioms(u in vec3(), v in vec3(), c in -100.0_f64..100.0) {
                for norm in [VectorNorm::L2, VectorNorm::Linf, VectorNorm::L1] {
                    let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                    let scaled: Vec<f64> = u.iter().map(|a| c * a).collect();
                    prop_assert!(norm.apply(&sum) <= (norm.apply(&u) + norm.apply(&v)) * (1.0 + 1e-12) + 1e-12);
                    let lhs = norm.apply(&scaled);
                    let rhs = c.abs() * norm.apply(&u);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
                }
            }
        }
    }
}
