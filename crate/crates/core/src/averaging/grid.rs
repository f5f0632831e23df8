//! Sampled functions on boxes.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::delta_grid::{MeasuredBox, MultiIndex};
use crate::error::{check_dim, invalid, Error, Result};

/// Values at the cell centers of a uniform grid on a box, row-major with the
/// last axis fastest.
///
/// Off-center values are multilinear interpolations of the nearest centers;
/// within half a cell of the boundary the nearest center value is used, and
/// outside the closed box the function is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    bbox: MeasuredBox,
    resolution: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(bbox: MeasuredBox, resolution: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        check_dim(bbox.dim(), resolution.len())?;
        if resolution.iter().any(|&r| r == 0) {
            return Err(Error::DegenerateGrid("resolution must be positive".into()));
        }
        if bbox.sides().iter().any(|&s| !(s > 0.0)) {
            return Err(Error::DegenerateGrid("box has an empty side".into()));
        }
        let count = resolution.iter().try_fold(1usize, |a, &r| a.checked_mul(r));
        if count != Some(values.len()) {
            return Err(invalid(format!(
                "expected {} values, got {}",
                resolution.iter().product::<usize>(),
                values.len()
            )));
        }
        Ok(GridFunction {
            bbox,
            resolution,
            values,
        })
    }

    /// Samples `f` at every cell center.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(
        bbox: MeasuredBox,
        resolution: Vec<usize>,
        mut f: F,
    ) -> Result<Self> {
        let mut g = GridFunction::zeros(bbox, resolution)?;
        let n = g.len();
        let mut x = vec![0.0; g.dim()];
        for lin in 0..n {
            g.center_into(lin, &mut x);
            g.values[lin] = f(&x);
        }
        Ok(g)
    }

    pub fn constant(bbox: MeasuredBox, resolution: Vec<usize>, c: f64) -> Result<Self> {
        let n = resolution.iter().product();
        GridFunction::new(bbox, resolution, vec![c; n])
    }

    pub fn zeros(bbox: MeasuredBox, resolution: Vec<usize>) -> Result<Self> {
        GridFunction::constant(bbox, resolution, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bbox(&self) -> &MeasuredBox {
        &self.bbox
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_sides(&self) -> Vec<f64> {
        self.bbox
            .sides()
            .iter()
            .zip(&self.resolution)
            .map(|(s, &r)| s / r as f64)
            .collect()
    }

    pub fn cell_measure(&self) -> f64 {
        self.bbox.volume() / self.values.len() as f64
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.resolution)
            .fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = lin % self.resolution[j];
            lin /= self.resolution[j];
        }
        idx
    }

    pub fn center(&self, lin: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.center_into(lin, &mut x);
        x
    }

    fn center_into(&self, mut lin: usize, x: &mut [f64]) {
        let lower = self.bbox.lower();
        let upper = self.bbox.upper();
        for j in (0..self.dim()).rev() {
            let r = self.resolution[j];
            let i = lin % r;
            lin /= r;
            x[j] = lower[j] + (upper[j] - lower[j]) * (i as f64 + 0.5) / r as f64;
        }
    }

    /// Multilinear interpolation; zero outside the closed box.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.dim() {
            2 => self.eval2(x[0], x[1]),
            _ => self.eval_general(x),
        }
    }

    #[inline]
    fn axis_coord(&self, j: usize, v: f64) -> Option<(usize, f64)> {
        let lo = self.bbox.lower()[j];
        let hi = self.bbox.upper()[j];
        if !(v >= lo && v <= hi) {
            return None;
        }
        let r = self.resolution[j];
        if r == 1 {
            return Some((0, 0.0));
        }
        let u = ((v - lo) / (hi - lo) * r as f64 - 0.5).clamp(0.0, (r - 1) as f64);
        let i = (u.floor() as usize).min(r - 2);
        Some((i, u - i as f64))
    }

    #[inline]
    pub fn eval2(&self, x0: f64, x1: f64) -> f64 {
        let Some((i, w0)) = self.axis_coord(0, x0) else {
            return 0.0;
        };
        let Some((j, w1)) = self.axis_coord(1, x1) else {
            return 0.0;
        };
        let r1 = self.resolution[1];
        let base = i * r1 + j;
        let step0 = if self.resolution[0] > 1 { r1 } else { 0 };
        let step1 = if r1 > 1 { 1 } else { 0 };
        let v = &self.values;
        let a = v[base] + w1 * (v[base + step1] - v[base]);
        let b = v[base + step0] + w1 * (v[base + step0 + step1] - v[base + step0]);
        a + w0 * (b - a)
    }

    fn eval_general(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = Vec::with_capacity(n);
        for j in 0..n {
            match self.axis_coord(j, x[j]) {
                Some(c) => base.push(c),
                None => return 0.0,
            }
        }
        let mut total = 0.0;
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut lin = 0;
            for j in 0..n {
                let (i, w) = base[j];
                let up = (corner >> (n - 1 - j)) & 1 == 1 && self.resolution[j] > 1;
                weight *= if (corner >> (n - 1 - j)) & 1 == 1 {
                    w
                } else {
                    1.0 - w
                };
                lin = lin * self.resolution[j] + i + up as usize;
            }
            if weight != 0.0 {
                total += weight * self.values[lin];
            }
        }
        total
    }

    /// Same values on the translated box, `x ↦ f(x − z)`.
    pub fn translate(&self, z: &[f64]) -> Result<Self> {
        Ok(GridFunction {
            bbox: self.bbox.translate(z)?,
            ..self.clone()
        })
    }

    /// Same values on a box scaled axis-wise about the origin.
    pub fn rescale(&self, factors: &[f64]) -> Result<Self> {
        check_dim(self.dim(), factors.len())?;
        let lower: Vec<f64> = self
            .bbox
            .lower()
            .iter()
            .zip(factors)
            .map(|(l, s)| l * s)
            .collect();
        let upper: Vec<f64> = self
            .bbox
            .upper()
            .iter()
            .zip(factors)
            .map(|(u, s)| u * s)
            .collect();
        GridFunction::new(
            MeasuredBox::new(lower, upper)?,
            self.resolution.clone(),
            self.values.clone(),
        )
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<Self> {
        if self.bbox != other.bbox || self.resolution != other.resolution {
            return Err(invalid("grid functions live on different grids"));
        }
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            ..self.clone()
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Little-endian binary: `n`, lower corner, upper corner, resolution,
    /// then the values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.dim();
        let mut out = Vec::with_capacity(8 * (1 + 3 * n + self.values.len()));
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for v in self.bbox.lower().iter().chain(self.bbox.upper()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for &r in &self.resolution {
            out.extend_from_slice(&(r as u64).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut words = bytes
            .chunks_exact(8)
            .map(|c| <[u8; 8]>::try_from(c).unwrap());
        if bytes.len() % 8 != 0 {
            return Err(Error::Io(
                "binary grid length is not a multiple of 8".into(),
            ));
        }
        let mut next = || {
            words
                .next()
                .ok_or_else(|| Error::Io("truncated binary grid".into()))
        };
        let n = u64::from_le_bytes(next()?) as usize;
        if n == 0 || n > 16 {
            return Err(Error::Io(format!("unsupported grid dimension {n}")));
        }
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for _ in 0..n {
            lower.push(f64::from_le_bytes(next()?));
        }
        for _ in 0..n {
            upper.push(f64::from_le_bytes(next()?));
        }
        let mut resolution = Vec::with_capacity(n);
        for _ in 0..n {
            resolution.push(u64::from_le_bytes(next()?) as usize);
        }
        let count = resolution.iter().try_fold(1usize, |a, &r| a.checked_mul(r));
        let count = count.ok_or_else(|| Error::Io("resolution overflows".into()))?;
        if bytes.len() != 8 * (1 + 3 * n + count) {
            return Err(Error::Io(
                "binary grid payload length does not match resolution".into(),
            ));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(next()?));
        }
        GridFunction::new(MeasuredBox::new(lower, upper)?, resolution, values)
    }

    pub fn write_binary<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        GridFunction::from_bytes(&bytes)
    }

    /// CSV with one row per cell: indices, center coordinates, value.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let n = self.dim();
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..n).map(|j| format!("i{j}")).collect();
        header.extend((0..n).map(|j| format!("x{j}")));
        header.push("value".into());
        w.write_record(&header).map_err(csv_error)?;
        for lin in 0..self.len() {
            let idx = self.multi_index(lin);
            let x = self.center(lin);
            let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            row.extend(x.iter().map(|v| format!("{v:?}")));
            row.push(format!("{:?}", self.values[lin]));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout of [`write_csv`](Self::write_csv). The box is
    /// recovered from the cell centers, so every axis needs two or more cells.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let width = r.headers().map_err(csv_error)?.len();
        if width < 3 || (width - 1) % 2 != 0 {
            return Err(Error::Io("CSV grid needs columns i.., x.., value".into()));
        }
        let n = (width - 1) / 2;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_error)?;
            let idx = (0..n)
                .map(|j| {
                    rec[j]
                        .trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Io(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let nums = (n..width)
                .map(|j| {
                    rec[j]
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Io(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((idx, nums));
        }
        let resolution: Vec<usize> = (0..n)
            .map(|j| rows.iter().map(|(i, _)| i[j] + 1).max().unwrap_or(0))
            .collect();
        if resolution.iter().any(|&r| r < 2) {
            return Err(Error::DegenerateGrid(
                "CSV grids need at least two cells per axis".into(),
            ));
        }
        let total: usize = resolution.iter().product();
        if rows.len() != total {
            return Err(Error::Io(format!(
                "expected {total} rows, got {}",
                rows.len()
            )));
        }
        let mut first = vec![f64::NAN; n];
        let mut last = vec![f64::NAN; n];
        let mut values = vec![f64::NAN; total];
        let mut seen = vec![false; total];
        for (idx, nums) in &rows {
            let lin = idx
                .iter()
                .zip(&resolution)
                .fold(0, |acc, (&i, &r)| acc * r + i);
            if seen[lin] {
                return Err(Error::Io(format!("duplicate cell {idx:?}")));
            }
            seen[lin] = true;
            values[lin] = nums[n];
            for j in 0..n {
                if idx[j] == 0 {
                    first[j] = nums[j];
                }
                if idx[j] == resolution[j] - 1 {
                    last[j] = nums[j];
                }
            }
        }
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for j in 0..n {
            let h = (last[j] - first[j]) / (resolution[j] - 1) as f64;
            lower.push(first[j] - 0.5 * h);
            upper.push(last[j] + 0.5 * h);
        }
        GridFunction::new(MeasuredBox::new(lower, upper)?, resolution, values)
    }

    /// Iterates over all multi-indices in row-major order.
    /// Per-axis index ranges `[first, end)` of the cells whose centers lie
    /// in `[b.lower, b.upper)`, or `None` when there are none.
    pub fn cell_range(&self, b: &MeasuredBox) -> Option<Vec<(usize, usize)>> {
        if b.dim() != self.dim() {
            return None;
        }
        let mut out = Vec::with_capacity(self.dim());
        for j in 0..self.dim() {
            let lo = self.bbox.lower()[j];
            let h = self.bbox.sides()[j] / self.resolution[j] as f64;
            let first = ((b.lower()[j] - lo) / h - 0.5).ceil().max(0.0);
            let end = ((b.upper()[j] - lo) / h - 0.5)
                .ceil()
                .min(self.resolution[j] as f64);
            if !(first < end) {
                return None;
            }
            out.push((first as usize, end as usize));
        }
        Some(out)
    }

    /// Linear indices of the cells in a [`cell_range`](Self::cell_range).
    pub fn cells_in(&self, ranges: &[(usize, usize)]) -> Vec<usize> {
        let counts: Vec<i64> = ranges.iter().map(|(a, b)| (b - a) as i64).collect();
        let mut idx = vec![0usize; ranges.len()];
        MultiIndex::new(&counts)
            .map(|off| {
                for j in 0..ranges.len() {
                    idx[j] = ranges[j].0 + off[j] as usize;
                }
                self.linear_index(&idx)
            })
            .collect()
    }

    pub fn indices(&self) -> MultiIndex {
        let counts: Vec<i64> = self.resolution.iter().map(|&r| r as i64).collect();
        MultiIndex::new(&counts)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// `(Σ |v|^p · cell)^{1/p}`, or the max for `p = ∞`.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_with(f, None, p)
}

/// `(Σ |v|^p · w · cell)^{1/p}`; the weight must share `f`'s grid.
pub fn weighted_lp_norm(f: &GridFunction, weight: &GridFunction, p: f64) -> Result<f64> {
    if f.resolution() != weight.resolution() || f.bbox() != weight.bbox() {
        return Err(invalid("weight must live on the same grid"));
    }
    lp_norm_with(f, Some(weight.values()), p)
}

fn lp_norm_with(f: &GridFunction, weight: Option<&[f64]>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let cell = f.cell_measure();
    let term = |v: f64| -> f64 {
        if p == 1.0 {
            v.abs()
        } else if p == 2.0 {
            v * v
        } else {
            v.abs().powf(p)
        }
    };
    let sum: f64 = match weight {
        None => f.values().iter().map(|&v| term(v)).sum(),
        Some(w) => f.values().iter().zip(w).map(|(&v, &w)| term(v) * w).sum(),
    };
    Ok((sum * cell).powf(1.0 / p))
}
