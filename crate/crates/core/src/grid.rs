//! Uniform cell-centred grids on `[-L, L]^d` and the nonnegative fields
//! sampled on them.
//!
//! A field is a vector of per-cell values plus a constant `background`
//! that stands for the value everywhere outside the box. Cells may carry
//! `+inf` (a hard trap); such cells never take part in arithmetic.
//!
//! Convolution is the exact convolution of the two piecewise-constant
//! interpolants, sampled at cell centres. Differences of two cell centres
//! are lattice vertices, so each output cell averages the `2^d` cells
//! that touch the vertex. This keeps symmetric inputs symmetric and
//! preserves total mass whenever nothing crosses the box boundary.

use std::cmp::Ordering;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

pub const MAX_DIM: usize = 3;

/// Cell-centred grid with `points` cells per axis on `[-half_extent, half_extent]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_extent: f64,
    points: usize,
}

/// Lexicographic multi-index; unused trailing axes are zero.
pub type MultiIndex = [usize; MAX_DIM];
/// Integer cell coordinate `k` with cell centre `(k + 1/2) h` per axis.
pub type Lattice = [i64; MAX_DIM];

impl Grid {
    pub fn new(dim: usize, half_extent: f64, points: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::InvalidGrid(format!("half extent {half_extent} must be positive")));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be even and at least 2"
            )));
        }
        Ok(Self { dim, half_extent, points })
    }

    /// Grid with the given spacing whose box covers at least `[-reach, reach]^dim`.
    pub fn covering(dim: usize, spacing: f64, reach: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        let half = ((reach / spacing).ceil() as usize).max(1);
        Self::new(dim, half as f64 * spacing, 2 * half)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    /// `h^d`
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_extent).powi(self.dim as i32)
    }

    pub fn axis_center(&self, i: usize) -> f64 {
        -self.half_extent + (i as f64 + 0.5) * self.spacing()
    }

    pub fn multi_index(&self, mut flat: usize) -> MultiIndex {
        let mut idx = [0; MAX_DIM];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &MultiIndex) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn center(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.axis_center(idx[a]);
        }
        c
    }

    pub fn lattice(&self, flat: usize) -> Lattice {
        let idx = self.multi_index(flat);
        let half = (self.points / 2) as i64;
        let mut k = [0; MAX_DIM];
        for a in 0..self.dim {
            k[a] = idx[a] as i64 - half;
        }
        k
    }

    pub fn flat_from_lattice(&self, k: &Lattice) -> Option<usize> {
        let half = (self.points / 2) as i64;
        let mut flat = 0usize;
        for &ka in &k[..self.dim] {
            let i = ka + half;
            if i < 0 || i >= self.points as i64 {
                return None;
            }
            flat = flat * self.points + i as usize;
        }
        Some(flat)
    }

    /// Lattice coordinate of the cell containing `point` (unbounded).
    pub fn lattice_of_point(&self, point: &[f64]) -> Lattice {
        let h = self.spacing();
        let mut k = [0; MAX_DIM];
        for a in 0..self.dim {
            k[a] = (point[a] / h).floor() as i64;
        }
        k
    }

    pub fn nearest_cell(&self, point: &[f64]) -> Option<usize> {
        self.flat_from_lattice(&self.lattice_of_point(point))
    }

    /// Index of the cell mirrored through the origin.
    pub fn reflect(&self, flat: usize) -> usize {
        let mut idx = self.multi_index(flat);
        for a in 0..self.dim {
            idx[a] = self.points - 1 - idx[a];
        }
        self.flat_index(&idx)
    }

    /// Exact squared distance of a cell centre from the origin in units of `(h/2)^2`.
    pub fn radial_key(&self, flat: usize) -> u64 {
        let idx = self.multi_index(flat);
        idx[..self.dim]
            .iter()
            .map(|&i| {
                let t = 2 * i as i64 + 1 - self.points as i64;
                (t * t) as u64
            })
            .sum()
    }

    /// Cells sorted by distance from the origin; ties broken by flat (lexicographic) index.
    /// Every rearrangement and the domination checker share this order.
    pub fn radial_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&c| (self.radial_key(c), c));
        order
    }

    /// Same dimension and spacing, so cell centres of both grids lie on one lattice.
    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && (self.spacing() - other.spacing()).abs() <= 1e-12 * self.spacing().max(other.spacing())
    }
}

/// Nonnegative extended-real function on a grid with constant background outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    grid: Grid,
    values: Vec<T>,
    background: T,
}

fn check_value<T: Scalar>(cell: usize, v: T) -> Result<()> {
    if v.is_nan() {
        return Err(Error::InvalidValue { cell, value: f64::NAN, reason: "NaN" });
    }
    if v < T::zero() {
        return Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "negative" });
    }
    Ok(())
}

impl<T: Scalar> GridField<T> {
    pub fn new(grid: Grid, values: Vec<T>, background: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        for (cell, &v) in values.iter().enumerate() {
            check_value(cell, v)?;
        }
        if !background.is_finite() || background < T::zero() {
            return Err(Error::InvalidParameter(format!(
                "background {background} must be finite and nonnegative"
            )));
        }
        Ok(Self { grid, values, background })
    }

    pub fn constant(grid: Grid, value: T, background: T) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()], background)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![T::zero(); grid.len()], background: T::zero() }
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(grid: Grid, background: T, f: impl Fn(&[f64]) -> T) -> Result<Self> {
        let values = (0..grid.len()).map(|c| f(&grid.center(c)[..grid.dim()])).collect();
        Self::new(grid, values, background)
    }

    /// Indicator of the cells whose centres satisfy `inside`.
    pub fn indicator(grid: Grid, inside: impl Fn(&[f64]) -> bool) -> Self {
        let values = (0..grid.len())
            .map(|c| if inside(&grid.center(c)[..grid.dim()]) { T::one() } else { T::zero() })
            .collect();
        Self { grid, values, background: T::zero() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn background(&self) -> T {
        self.background
    }

    pub fn value(&self, flat: usize) -> T {
        self.values[flat]
    }

    pub fn has_hard_part(&self) -> bool {
        self.values.iter().any(|v| v.is_infinite())
    }

    pub fn is_indicator(&self) -> bool {
        self.background == T::zero() && self.values.iter().all(|&v| v == T::zero() || v == T::one())
    }

    /// Number of cells with a nonzero value.
    pub fn support_len(&self) -> usize {
        self.values.iter().filter(|&&v| v != T::zero()).count()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(self.background, |m, &v| m.max(v))
    }

    /// Value at a lattice coordinate; background outside the box.
    pub fn at_lattice(&self, k: &Lattice) -> T {
        match self.grid.flat_from_lattice(k) {
            Some(c) => self.values[c],
            None => self.background,
        }
    }

    /// Value of the cell containing `point`; background outside the box.
    pub fn value_at(&self, point: &[f64]) -> T {
        self.at_lattice(&self.grid.lattice_of_point(point))
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.background)
    }

    pub fn with_background(&self, background: T) -> Result<Self> {
        Self::new(self.grid, self.values.clone(), background)
    }

    pub fn cast<U: Scalar>(&self) -> GridField<U> {
        GridField {
            grid: self.grid,
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
            background: U::lit(self.background.as_f64()),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.require_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs())))
    }

    /// Discrete L1 distance `h^d sum |f - g|`.
    pub fn l1_distance(&self, other: &Self) -> Result<T> {
        self.require_same_grid(other)?;
        let s = compensated_sum(self.values.iter().zip(&other.values).map(|(&a, &b)| (a - b).abs()));
        Ok(s * T::lit(self.grid.cell_volume()))
    }

    pub fn require_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<T>, background: T) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, background }
    }

    /// `sigma - f`, defined when every value is at most `sigma`.
    pub fn complement_to(&self, sigma: T) -> Result<Self> {
        for (cell, &v) in self.values.iter().enumerate() {
            if v > sigma {
                return Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "exceeds complement level" });
            }
        }
        if self.background > sigma {
            return Err(Error::Background { background: self.background.as_f64(), required: sigma.as_f64() });
        }
        Self::new(self.grid, self.values.iter().map(|&v| sigma - v).collect(), sigma - self.background)
    }

    pub fn scale(&self, c: T) -> Result<Self> {
        if !(c.is_finite() && c >= T::zero()) {
            return Err(Error::InvalidParameter(format!("scale factor {c}")));
        }
        if self.has_hard_part() {
            return Err(Error::InfiniteValue);
        }
        Self::new(self.grid, self.values.iter().map(|&v| c * v).collect(), c * self.background)
    }

    /// Multiplies by `1 / integrate(self)`.
    pub fn normalized(&self) -> Result<Self> {
        let mass = integrate(self)?;
        if !(mass > T::zero() && mass.is_finite()) {
            return Err(Error::NotNormalized(mass.as_f64()));
        }
        self.scale(T::one() / mass)
    }
}

/// `h^d * sum(values)`; `+inf` when any cell is infinite.
pub fn integrate<T: Scalar>(f: &GridField<T>) -> Result<T> {
    if f.background != T::zero() {
        return Err(Error::Background { background: f.background.as_f64(), required: 0.0 });
    }
    if f.has_hard_part() {
        return Ok(T::infinity());
    }
    Ok(compensated_sum(f.values.iter().copied()) * T::lit(f.grid.cell_volume()))
}

/// `h^d * sum(sigma - values)` for a field whose background is `sigma`.
pub fn integrate_deficit<T: Scalar>(f: &GridField<T>, sigma: T) -> Result<T> {
    if f.background != sigma {
        return Err(Error::Background { background: f.background.as_f64(), required: sigma.as_f64() });
    }
    for (cell, &v) in f.values.iter().enumerate() {
        if v > sigma {
            return Err(Error::InvalidValue { cell, value: v.as_f64(), reason: "exceeds background level" });
        }
    }
    Ok(compensated_sum(f.values.iter().map(|&v| sigma - v)) * T::lit(f.grid.cell_volume()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionMethod {
    /// Paired direct summation, `O(N^2)`, bit-for-bit commutative.
    Direct,
    /// Zero-padded FFT, `O(N log N)`.
    Fft,
    Auto,
}

/// Zero-padded convolution sampled at cell centres (see module docs).
pub fn convolve<T: Scalar>(f: &GridField<T>, g: &GridField<T>) -> Result<GridField<T>> {
    convolve_with(f, g, ConvolutionMethod::Auto)
}

pub fn convolve_with<T: Scalar>(
    f: &GridField<T>,
    g: &GridField<T>,
    method: ConvolutionMethod,
) -> Result<GridField<T>> {
    f.require_same_grid(g)?;
    for x in [f, g] {
        if x.background != T::zero() {
            return Err(Error::Background { background: x.background.as_f64(), required: 0.0 });
        }
        if x.has_hard_part() {
            return Err(Error::InfiniteValue);
        }
    }
    let grid = f.grid;
    let method = match method {
        ConvolutionMethod::Auto => {
            let work = (grid.points + 1).pow(grid.dim as u32) as f64 * grid.len() as f64 / 2.0;
            if work <= 4.0e6 {
                ConvolutionMethod::Direct
            } else {
                ConvolutionMethod::Fft
            }
        }
        m => m,
    };
    let window = match method {
        ConvolutionMethod::Fft => fft_window(&f.values, &g.values, &grid),
        _ => direct_window(&f.values, &g.values, &grid),
    };
    let values = vertex_average(&window, &grid, T::lit(grid.cell_volume()));
    Ok(GridField::from_parts_unchecked(grid, values, T::zero()))
}

/// Full discrete convolution sums `F[s] = sum_{i+j=s} f_i g_j` for the
/// `(m+1)^d` window `s in [m/2-1, 3m/2-1]^d` needed at cell centres.
fn direct_window<T: Scalar>(f: &[T], g: &[T], grid: &Grid) -> Vec<T> {
    let d = grid.dim;
    let m = grid.points;
    let wlen = m + 1;
    let base = m / 2 - 1;
    let total = wlen.pow(d as u32);
    let mut out = vec![T::zero(); total];
    for (w, slot) in out.iter_mut().enumerate() {
        let mut s = [0usize; MAX_DIM];
        let mut rem = w;
        for a in (0..d).rev() {
            s[a] = rem % wlen + base;
            rem /= wlen;
        }
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for a in 0..d {
            lo[a] = s[a].saturating_sub(m - 1);
            hi[a] = s[a].min(m - 1);
        }
        let mut i = lo;
        let mut acc = T::zero();
        'outer: loop {
            let mut j = [0usize; MAX_DIM];
            for a in 0..d {
                j[a] = s[a] - i[a];
            }
            match i[..d].cmp(&j[..d]) {
                Ordering::Less => {
                    let fi = grid.flat_index(&i);
                    let fj = grid.flat_index(&j);
                    acc = acc + (f[fi] * g[fj] + f[fj] * g[fi]);
                }
                Ordering::Equal => {
                    let fi = grid.flat_index(&i);
                    acc = acc + f[fi] * g[fi];
                }
                // j only decreases from here on in lexicographic order
                Ordering::Greater => break 'outer,
            }
            let mut a = d;
            loop {
                if a == 0 {
                    break 'outer;
                }
                a -= 1;
                if i[a] < hi[a] {
                    i[a] += 1;
                    break;
                }
                i[a] = lo[a];
            }
        }
        *slot = acc;
    }
    out
}

fn fft_lines<T: Scalar>(buf: &mut [Complex<T>], d: usize, n: usize, fft: &Arc<dyn Fft<T>>) {
    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    let total = n.pow(d as u32);
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for start in 0..total {
            if (start / stride) % n != 0 {
                continue;
            }
            for (k, v) in line.iter_mut().enumerate() {
                *v = buf[start + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                buf[start + k * stride] = *v;
            }
        }
    }
}

fn fft_window<T: Scalar>(f: &[T], g: &[T], grid: &Grid) -> Vec<T> {
    let d = grid.dim;
    let m = grid.points;
    let n = (2 * m - 1).next_power_of_two();
    let total = n.pow(d as u32);
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = vec![zero; total];
    let mut b = vec![zero; total];
    for c in 0..grid.len() {
        let idx = grid.multi_index(c);
        let p = idx[..d].iter().fold(0, |acc, &i| acc * n + i);
        a[p] = Complex::new(f[c], T::zero());
        b[p] = Complex::new(g[c], T::zero());
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fft_lines(&mut a, d, n, &fwd);
    fft_lines(&mut b, d, n, &fwd);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = *x * *y;
    }
    fft_lines(&mut a, d, n, &inv);
    let scale = T::one() / T::lit(total as f64);
    let wlen = m + 1;
    let base = m / 2 - 1;
    let mut out = vec![T::zero(); wlen.pow(d as u32)];
    for (w, slot) in out.iter_mut().enumerate() {
        let mut s = [0usize; MAX_DIM];
        let mut rem = w;
        for a_ in (0..d).rev() {
            s[a_] = rem % wlen + base;
            rem /= wlen;
        }
        let q = s[..d].iter().fold(0, |acc, &i| acc * n + i);
        *slot = (a[q].re * scale).max(T::zero());
    }
    out
}

/// Averages the `2^d` window sums touching each output cell and applies `h^d`.
fn vertex_average<T: Scalar>(window: &[T], grid: &Grid, cell_volume: T) -> Vec<T> {
    let d = grid.dim;
    let m = grid.points;
    let wlen = m + 1;
    let corners = 1usize << d;
    let weight = cell_volume / T::lit(corners as f64);
    (0..grid.len())
        .map(|c| {
            let r = grid.multi_index(c);
            let mut acc = T::zero();
            for corner in 0..corners {
                let mut w = 0;
                for a in 0..d {
                    w = w * wlen + r[a] + ((corner >> a) & 1);
                }
                acc = acc + window[w];
            }
            acc * weight
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Product,
    Min,
}

/// Pointwise combination; the backgrounds combine by the same rule.
pub fn combine<T: Scalar>(f: &GridField<T>, g: &GridField<T>, op: BinaryOp) -> Result<GridField<T>> {
    f.require_same_grid(g)?;
    let apply = |a: T, b: T| -> Result<T> {
        match op {
            BinaryOp::Min => Ok(a.min(b)),
            BinaryOp::Product => {
                if a.is_infinite() || b.is_infinite() {
                    Err(Error::InfiniteValue)
                } else {
                    Ok(a * b)
                }
            }
        }
    };
    let values = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(&a, &b)| apply(a, b))
        .collect::<Result<Vec<_>>>()?;
    GridField::new(f.grid, values, apply(f.background, g.background)?)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CellRecord {
    Finite(f64),
    Tag(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRecord {
    dim: usize,
    half_extent: f64,
    points: usize,
    background: f64,
    values: Vec<CellRecord>,
}

const BINARY_MAGIC: &[u8; 4] = b"GFLD";

impl<T: Scalar> GridField<T> {
    /// JSON record `{dim, half_extent, points, background, values}`; infinite cells are `"inf"`.
    pub fn to_json(&self) -> String {
        let record = FieldRecord {
            dim: self.grid.dim,
            half_extent: self.grid.half_extent,
            points: self.grid.points,
            background: self.background.as_f64(),
            values: self
                .values
                .iter()
                .map(|v| {
                    if v.is_infinite() {
                        CellRecord::Tag("inf".into())
                    } else {
                        CellRecord::Finite(v.as_f64())
                    }
                })
                .collect(),
        };
        serde_json::to_string(&record).expect("field record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: FieldRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let grid = Grid::new(record.dim, record.half_extent, record.points)?;
        let values = record
            .values
            .into_iter()
            .map(|c| match c {
                CellRecord::Finite(v) => Ok(T::lit(v)),
                CellRecord::Tag(t) if t == "inf" => Ok(T::infinity()),
                CellRecord::Tag(t) => Err(Error::Format(format!("unknown cell tag {t:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values, T::lit(record.background))
    }

    /// Little-endian binary: magic, dim (u8), points (u64), half extent, background, values (f64).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(29 + 8 * self.values.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.push(self.grid.dim as u8);
        out.extend_from_slice(&(self.grid.points as u64).to_le_bytes());
        out.extend_from_slice(&self.grid.half_extent.to_le_bytes());
        out.extend_from_slice(&self.background.as_f64().to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("binary field: {what}"));
        if bytes.len() < 29 || &bytes[..4] != BINARY_MAGIC {
            return Err(bad("missing header"));
        }
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let dim = bytes[4] as usize;
        let points = u64::from_le_bytes(bytes[5..13].try_into().unwrap()) as usize;
        let grid = Grid::new(dim, f64_at(13), points)?;
        let background = f64_at(21);
        if bytes.len() != 29 + 8 * grid.len() {
            return Err(bad("length does not match header"));
        }
        let values = (0..grid.len()).map(|c| T::lit(f64_at(29 + 8 * c))).collect();
        Self::new(grid, values, T::lit(background))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(l: f64, m: usize) -> Grid {
        Grid::new(1, l, m).unwrap()
    }

    #[test]
    fn make_grid_examples() {
        let g = grid1(2.0, 4);
        assert_eq!(g.spacing(), 1.0);
        let centers: Vec<f64> = (0..4).map(|c| g.center(c)[0]).collect();
        assert_eq!(centers, vec![-1.5, -0.5, 0.5, 1.5]);

        let g2 = Grid::new(2, 1.0, 2).unwrap();
        assert_eq!(g2.len(), 4);
        assert_eq!(g2.spacing(), 1.0);
        let cs: Vec<[f64; 3]> = (0..4).map(|c| g2.center(c)).collect();
        assert_eq!(cs[0][..2], [-0.5, -0.5]);
        assert_eq!(cs[1][..2], [-0.5, 0.5]);
        assert_eq!(cs[3][..2], [0.5, 0.5]);

        assert!(matches!(Grid::new(1, 1.0, 3), Err(Error::InvalidGrid(_))));
        assert!(Grid::new(1, 0.0, 4).is_err());
        assert!(Grid::new(1, -1.0, 4).is_err());
        assert!(Grid::new(4, 1.0, 4).is_err());
    }

    #[test]
    fn lattice_round_trip_and_reflection() {
        let g = Grid::new(2, 3.0, 6).unwrap();
        for c in 0..g.len() {
            let k = g.lattice(c);
            assert_eq!(g.flat_from_lattice(&k), Some(c));
            let center = g.center(c);
            assert_eq!(g.nearest_cell(&center[..2]), Some(c));
            let r = g.reflect(c);
            let cr = g.center(r);
            assert_eq!(cr[0], -center[0]);
            assert_eq!(cr[1], -center[1]);
        }
        assert_eq!(g.flat_from_lattice(&[3, 0, 0]), None);
    }

    #[test]
    fn integrate_examples() {
        let g = grid1(2.0, 8);
        let f = GridField::constant(g, 3.0, 0.0).unwrap();
        assert_eq!(integrate(&f).unwrap(), 12.0);

        let g = grid1(4.0, 64);
        let ind = GridField::<f64>::indicator(g, |x| x[0] > 0.0 && x[0] < 2.0);
        assert_eq!(integrate(&ind).unwrap(), 2.0);

        let mut vals = vec![1.0; 64];
        vals[3] = f64::INFINITY;
        let hard = GridField::new(g, vals, 0.0).unwrap();
        assert!(hard.has_hard_part());
        assert_eq!(integrate(&hard).unwrap(), f64::INFINITY);

        let bg = GridField::constant(g, 1.0, 1.0).unwrap();
        assert!(matches!(integrate(&bg), Err(Error::Background { .. })));
    }

    #[test]
    fn integrate_deficit_examples() {
        let g = grid1(4.0, 64);
        let f = GridField::<f64>::indicator(g, |x| x[0] > 0.0 && x[0] < 2.0).complement_to(1.0).unwrap();
        assert_eq!(f.background(), 1.0);
        assert_eq!(integrate_deficit(&f, 1.0).unwrap(), 2.0);

        let one = GridField::constant(g, 1.0, 1.0).unwrap();
        assert_eq!(integrate_deficit(&one, 1.0).unwrap(), 0.0);

        let half = GridField::from_fn(g, 1.0, |x| if x[0] > 0.0 && x[0] < 4.0 { 0.5 } else { 1.0 }).unwrap();
        assert_eq!(integrate_deficit(&half, 1.0).unwrap(), 2.0);

        let above = GridField::constant(g, 1.5, 1.0).unwrap();
        assert!(integrate_deficit(&above, 1.0).is_err());
    }

    #[test]
    fn deficit_and_plain_integral_agree() {
        let g = grid1(4.0, 32);
        let sigma = 2.0;
        let f = GridField::from_fn(g, sigma, |x| if x[0].abs() < 1.0 { 0.25 } else { sigma }).unwrap();
        let plain = integrate(&f.with_background(0.0).unwrap()).unwrap();
        let deficit = integrate_deficit(&f, sigma).unwrap();
        assert!((deficit - (sigma * g.box_volume() - plain)).abs() < 1e-12);
    }

    #[test]
    fn convolve_boxes_gives_triangle() {
        let g = grid1(4.0, 400);
        let b = GridField::<f64>::indicator(g, |x| x[0].abs() < 0.5);
        let c = convolve(&b, &b).unwrap();
        let h = g.spacing();
        for cell in 0..g.len() {
            let x = g.center(cell)[0];
            let exact = (1.0 - x.abs()).max(0.0);
            assert!((c.value(cell) - exact).abs() <= 2.0 * h, "x={x}");
        }
    }

    #[test]
    fn convolve_with_point_mass_shifts() {
        let g = grid1(4.0, 32);
        let h = g.spacing();
        let f = GridField::from_fn(g, 0.0, |x| (-(x[0] * x[0])).exp()).unwrap();
        let j = 20;
        let mut dv = vec![0.0; g.len()];
        dv[j] = 1.0 / h;
        let delta = GridField::new(g, dv, 0.0).unwrap();
        let c = convolve_with(&f, &delta, ConvolutionMethod::Direct).unwrap();
        // cell j sits at (j - m/2 + 1/2) h; the output averages the two cells straddling the shift
        let shift = j as i64 - 16;
        for r in 0..g.len() as i64 {
            let a = r - shift - 1;
            let b = r - shift;
            let fa = if (0..32).contains(&a) { f.value(a as usize) } else { 0.0 };
            let fb = if (0..32).contains(&b) { f.value(b as usize) } else { 0.0 };
            assert!((c.value(r as usize) - 0.5 * (fa + fb)).abs() < 1e-14);
        }
    }

    #[test]
    fn convolve_gaussians() {
        // N(mu1, s1^2) * N(mu2, s2^2) = N(mu1+mu2, s1^2+s2^2)
        let g = grid1(12.0, 480);
        let h = g.spacing();
        let gauss = |mu: f64, s: f64| {
            move |x: &[f64]| (-(x[0] - mu).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
        };
        let f = GridField::from_fn(g, 0.0, gauss(1.0, 0.7)).unwrap();
        let k = GridField::from_fn(g, 0.0, gauss(-2.0, 0.9)).unwrap();
        let c = convolve(&f, &k).unwrap();
        let s = (0.7f64 * 0.7 + 0.9 * 0.9).sqrt();
        let expect = gauss(-1.0, s);
        for cell in 0..g.len() {
            let x = g.center(cell);
            assert!((c.value(cell) - expect(&x[..1])).abs() < h, "cell {cell}");
        }
    }

    #[test]
    fn convolution_paths_agree_and_commute() {
        for (d, m) in [(1usize, 40usize), (2, 12), (3, 6)] {
            let g = Grid::new(d, 3.0, m).unwrap();
            let f = GridField::from_fn(g, 0.0, |x| {
                let r: f64 = x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum();
                (-r).exp() * (1.0 + x[0].sin().abs())
            })
            .unwrap();
            let k = GridField::from_fn(g, 0.0, |x| if x.iter().all(|v| v.abs() < 1.1) { 1.0 + x[0] } else { 0.0 }.max(0.0))
                .unwrap();
            let direct = convolve_with(&f, &k, ConvolutionMethod::Direct).unwrap();
            let swapped = convolve_with(&k, &f, ConvolutionMethod::Direct).unwrap();
            assert_eq!(direct.values(), swapped.values());
            let fft = convolve_with(&f, &k, ConvolutionMethod::Fft).unwrap();
            let scale = direct.max_value();
            assert!(direct.max_abs_diff(&fft).unwrap() <= 1e-12 * scale);
        }
    }

    #[test]
    fn convolution_preserves_mass_when_supports_fit() {
        let g = Grid::new(2, 4.0, 16).unwrap();
        let f = GridField::from_fn(g, 0.0, |x| if x[0].abs() < 1.5 && x[1].abs() < 1.0 { 2.0 } else { 0.0 }).unwrap();
        let k = GridField::from_fn(g, 0.0, |x| if (x[0] - 0.5).abs() < 1.0 && x[1].abs() < 1.5 { 0.5 } else { 0.0 })
            .unwrap();
        let c = convolve(&f, &k).unwrap();
        let lhs: f64 = integrate(&c).unwrap();
        let rhs = integrate(&f).unwrap() * integrate(&k).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn convolve_rejects_bad_inputs() {
        let g = grid1(2.0, 8);
        let other = grid1(2.0, 16);
        let a = GridField::<f64>::zeros(g);
        let b = GridField::<f64>::zeros(other);
        assert_eq!(convolve(&a, &b), Err(Error::GridMismatch));
        let mut v = vec![0.0; 8];
        v[2] = f64::INFINITY;
        let hard = GridField::new(g, v, 0.0).unwrap();
        assert_eq!(convolve(&a, &hard), Err(Error::InfiniteValue));
        let bg = GridField::constant(g, 1.0, 1.0).unwrap();
        assert!(convolve(&a, &bg).is_err());
    }

    #[test]
    fn combine_examples() {
        let g = grid1(4.0, 16);
        let a = GridField::<f64>::indicator(g, |x| x[0] > -1.0 && x[0] < 2.0);
        let b = GridField::<f64>::indicator(g, |x| x[0] > 0.0 && x[0] < 3.0);
        let ab = GridField::<f64>::indicator(g, |x| x[0] > 0.0 && x[0] < 2.0);
        assert_eq!(combine(&a, &b, BinaryOp::Product).unwrap(), ab);
        assert_eq!(combine(&a, &b, BinaryOp::Min).unwrap(), ab);

        let c = a.complement_to(1.0).unwrap();
        assert_eq!(c.background(), 1.0);
        for cell in 0..g.len() {
            assert_eq!(c.value(cell), 1.0 - a.value(cell));
        }
        let z = a.scale(0.0).unwrap();
        assert_eq!(z, GridField::zeros(g));
    }

    #[test]
    fn serialization_round_trips_exactly() {
        let g = Grid::new(2, 1.7, 4).unwrap();
        let mut f = GridField::from_fn(g, 0.1, |x| (x[0] * 3.1).sin().abs() / 7.0).unwrap();
        f.values[5] = f64::INFINITY;
        let back = GridField::<f64>::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let back = GridField::<f64>::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!(back, f);
        let f32_field: GridField<f32> = f.cast();
        assert_eq!(GridField::<f32>::from_json(&f32_field.to_json()).unwrap(), f32_field);
        assert!(GridField::<f64>::from_json("{\"dim\":1}").is_err());
        assert!(GridField::<f64>::from_bytes(b"nope").is_err());
    }

    #[test]
    fn generic_over_f32() {
        let g = grid1(2.0, 8);
        let f = GridField::<f32>::constant(g, 0.5, 0.0).unwrap();
        assert_eq!(integrate(&f).unwrap(), 2.0f32);
        let c = convolve(&f, &f).unwrap();
        assert!(integrate(&c).unwrap() > 0.0);
    }
}
