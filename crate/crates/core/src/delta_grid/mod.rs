//! Non-isotropic dilations, δ-cubes and shifted dyadic δ-grids.
//!
//! A dilation `δ_t(x) = (t^{a_1} x_1, …, t^{a_n} x_n)` is normalized to
//! `b_j = a_j / min a`. A δ-cube at scale `k` has side `2^{⌈k b_j⌉}` in
//! coordinate `j`.
//!
//! Shifted grids are indexed by `s ∈ {0, 1/3, 2/3}^n`. In coordinate `j` a
//! cube with side exponent `e = ⌈k b_j⌉` occupies
//! `2^e [i + σ(e) s_j, i + 1 + σ(e) s_j)` with `σ(e) = (-1)^e`. The
//! alternating sign keeps every shifted grid nested across scales: a
//! scale change by `2^r` maps the offset lattice `2^e(ℤ ± s)` into itself
//! because `2^r ≡ (-1)^r (mod 3)`. With an unsigned offset only `s = 0`
//! would nest.

mod exact;

pub use exact::Triadic;

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

pub const MIN_SCALE: i32 = -64;
pub const MAX_SCALE: i32 = 64;

/// Guard subtracted before taking the ceiling of an irrational `k·b_j`.
pub const CEIL_GUARD: f64 = 1.0 / (1u64 << 40) as f64;

/// A normalized exponent `b_j`, exact when the input was rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Rational(Rational64),
    Real(f64),
}

impl Exponent {
    pub fn value(&self) -> f64 {
        match self {
            Exponent::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Real(x) => *x,
        }
    }

    /// `⌈k·b⌉`.
    pub fn ceil_mul(&self, k: i32) -> i32 {
        match self {
            Exponent::Rational(r) => {
                let num = k as i64 * r.numer();
                Integer::div_ceil(&num, r.denom()) as i32
            }
            Exponent::Real(b) => (k as f64 * b - CEIL_GUARD).ceil() as i32,
        }
    }
}

/// Detects a float that is exactly `p/q` with a small denominator.
fn exact_ratio(x: f64) -> Option<Rational64> {
    for q in 1..=1024i64 {
        let p = (x * q as f64).round();
        if p.abs() < 1e15 && p / q as f64 == x {
            return Some(Rational64::new(p as i64, q));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Dilation {
    exponents: Vec<f64>,
    normalized: Vec<Exponent>,
    base_axis: usize,
}

impl TryFrom<Vec<f64>> for Dilation {
    type Error = Error;
    fn try_from(a: Vec<f64>) -> Result<Self> {
        normalize_dilation(&a)
    }
}

impl From<Dilation> for Vec<f64> {
    fn from(d: Dilation) -> Vec<f64> {
        d.exponents
    }
}

/// Builds a dilation from raw exponents, normalizing by the smallest one.
///
/// When every `a_j` is a ratio with denominator at most 1024 the normalized
/// exponents are stored exactly.
pub fn normalize_dilation(a: &[f64]) -> Result<Dilation> {
    if a.is_empty() {
        return Err(invalid("dilation needs at least one exponent"));
    }
    if a.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(invalid("dilation exponents must be positive and finite"));
    }
    let base_axis = a
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let rationals: Option<Vec<Rational64>> = a.iter().map(|&x| exact_ratio(x)).collect();
    let normalized = match rationals {
        Some(r) => {
            let min = r[base_axis];
            r.iter().map(|x| Exponent::Rational(x / min)).collect()
        }
        None => {
            let min = a[base_axis];
            a.iter()
                .enumerate()
                .map(|(i, x)| Exponent::Real(if i == base_axis { 1.0 } else { x / min }))
                .collect()
        }
    };
    Ok(Dilation {
        exponents: a.to_vec(),
        normalized,
        base_axis,
    })
}

impl Dilation {
    /// Exact rational exponents.
    pub fn from_rationals(a: &[Rational64]) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("dilation needs at least one exponent"));
        }
        if a.iter().any(|x| *x <= Rational64::from_integer(0)) {
            return Err(invalid("dilation exponents must be positive"));
        }
        let base_axis = (0..a.len()).min_by(|&i, &j| a[i].cmp(&a[j])).unwrap();
        let min = a[base_axis];
        Ok(Dilation {
            exponents: a.iter().map(|r| Exponent::Rational(*r).value()).collect(),
            normalized: a.iter().map(|x| Exponent::Rational(x / min)).collect(),
            base_axis,
        })
    }

    /// The isotropic dilation `t ↦ (t, …, t)`.
    pub fn isotropic(n: usize) -> Self {
        normalize_dilation(&vec![1.0; n]).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn normalized(&self) -> &[Exponent] {
        &self.normalized
    }

    pub fn normalized_values(&self) -> Vec<f64> {
        self.normalized.iter().map(Exponent::value).collect()
    }

    /// The coordinate whose exponent is minimal; time is reparametrized as
    /// `t ↦ t^{a_{j0}}` so that this coordinate scales linearly.
    pub fn base_axis(&self) -> usize {
        self.base_axis
    }

    /// `a_{j0}`, the exponent of the reparametrization.
    pub fn time_power(&self) -> f64 {
        self.exponents[self.base_axis]
    }

    /// `⌈k·b_j⌉` for every coordinate.
    pub fn side_exponents(&self, k: i32) -> Vec<i32> {
        self.normalized.iter().map(|b| b.ceil_mul(k)).collect()
    }

    /// Componentwise `t^{a_j} p_j`.
    pub fn apply(&self, t: f64, p: &[f64]) -> Result<Vec<f64>> {
        dilate(self, t, p)
    }
}

/// `2^{⌈k·b_j⌉}` for every coordinate.
pub fn cube_side_lengths(k: i32, d: &Dilation) -> Vec<f64> {
    d.side_exponents(k)
        .into_iter()
        .map(|e| 2f64.powi(e))
        .collect()
}

/// Componentwise `t^{a_j} p_j`.
pub fn dilate(d: &Dilation, t: f64, p: &[f64]) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!(
            "dilation parameter must be positive, got {t}"
        )));
    }
    check_dim(d.dim(), p.len())?;
    Ok(d.exponents
        .iter()
        .zip(p)
        .map(|(a, x)| t.powf(*a) * x)
        .collect())
}

/// The unique scale `k` with `2^{⌈k b_j⌉} = l`, if any.
pub fn scale_from_side(l: f64, j: usize, d: &Dilation) -> Result<Option<i32>> {
    if j >= d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            got: j + 1,
        });
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::NonDyadic(l));
    }
    let e = l.log2().round() as i32;
    if 2f64.powi(e) != l {
        return Err(Error::NonDyadic(l));
    }
    let b = d.normalized[j];
    Ok((MIN_SCALE..=MAX_SCALE).find(|&k| b.ceil_mul(k) == e))
}

/// `ρ_δ(x, y) = max_i |x_i − y_i|^{1/b_i}`.
pub fn rho_delta(x: &[f64], y: &[f64], d: &Dilation) -> Result<f64> {
    check_dim(d.dim(), x.len())?;
    check_dim(d.dim(), y.len())?;
    Ok(x.iter()
        .zip(y)
        .zip(&d.normalized)
        .map(|((a, b), e)| (a - b).abs().powf(1.0 / e.value()))
        .fold(0.0, f64::max))
}

/// A grid shift component: `0`, `1/3` or `2/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Shift {
    Zero,
    OneThird,
    TwoThirds,
}

impl Shift {
    pub const ALL: [Shift; 3] = [Shift::Zero, Shift::OneThird, Shift::TwoThirds];

    /// The shift in thirds: 0, 1 or 2.
    pub fn thirds(self) -> i64 {
        match self {
            Shift::Zero => 0,
            Shift::OneThird => 1,
            Shift::TwoThirds => 2,
        }
    }

    pub fn from_thirds(t: i64) -> Shift {
        match t.rem_euclid(3) {
            0 => Shift::Zero,
            1 => Shift::OneThird,
            _ => Shift::TwoThirds,
        }
    }

    pub fn as_rational(self) -> Rational64 {
        Rational64::new(self.thirds(), 3)
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shift::Zero => "0",
            Shift::OneThird => "1/3",
            Shift::TwoThirds => "2/3",
        })
    }
}

impl From<Shift> for String {
    fn from(s: Shift) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Shift {
    type Error = Error;
    fn try_from(s: String) -> Result<Shift> {
        match s.trim() {
            "0" => Ok(Shift::Zero),
            "1/3" => Ok(Shift::OneThird),
            "2/3" => Ok(Shift::TwoThirds),
            other => Err(invalid(format!("unknown shift {other:?}"))),
        }
    }
}

/// All `3^n` grid shifts, in lexicographic order.
pub fn all_shifts(n: usize) -> Vec<Vec<Shift>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                Shift::ALL.iter().map(move |&s| {
                    let mut w = v.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

fn sigma(e: i32) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `floor(v / 2^e − σt/3)`: the index of the cell containing `v` in a grid
/// with side `2^e` and offset `σt/3` of a side.
fn index_of(v: Triadic, e: i32, signed_thirds: i64) -> Result<i64> {
    let st = signed_thirds as i128;
    let sh = v.exp() as i64 - e as i64;
    let q: i128 = if sh >= 0 {
        let big = exact::shl_checked(v.num(), sh as u32).ok_or(Error::PositionOverflow)?;
        Integer::div_floor(&(big - st), &3)
    } else {
        let s = (-sh) as u32;
        if s <= 120 {
            let den = 3i128 << s;
            Integer::div_floor(&(v.num() - (st << s)), &den)
        } else {
            // |v / 2^e| is far below one third of a cell.
            if st == 0 {
                if v.num() >= 0 {
                    0
                } else {
                    -1
                }
            } else {
                Integer::div_floor(&(-st), &3)
            }
        }
    };
    i64::try_from(q).map_err(|_| Error::PositionOverflow)
}

fn check_scale(k: i32) -> Result<()> {
    if (MIN_SCALE..=MAX_SCALE).contains(&k) {
        Ok(())
    } else {
        Err(Error::ScaleOutOfRange(k))
    }
}

/// An axis-parallel box `[lower, upper)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl MeasuredBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(invalid("box needs at least one dimension"));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !l.is_finite() || !u.is_finite() || u < l {
                return Err(invalid(format!("invalid box side [{l}, {u}]")));
            }
        }
        Ok(MeasuredBox { lower, upper })
    }

    /// The box `center ± half_widths`.
    pub fn centered(center: &[f64], half_widths: &[f64]) -> Result<Self> {
        check_dim(center.len(), half_widths.len())?;
        MeasuredBox::new(
            center.iter().zip(half_widths).map(|(c, h)| c - h).collect(),
            center.iter().zip(half_widths).map(|(c, h)| c + h).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn sides(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.sides().iter().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Half-open containment.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v < *u)
    }

    /// Closed containment.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn intersects(&self, other: &MeasuredBox) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|j| self.lower[j] < other.upper[j] && other.lower[j] < self.upper[j])
    }

    pub fn translate(&self, z: &[f64]) -> Result<Self> {
        check_dim(self.dim(), z.len())?;
        MeasuredBox::new(
            self.lower.iter().zip(z).map(|(a, b)| a + b).collect(),
            self.upper.iter().zip(z).map(|(a, b)| a + b).collect(),
        )
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &MeasuredBox) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        MeasuredBox::new(
            self.lower
                .iter()
                .zip(&other.lower)
                .map(|(a, b)| a.min(*b))
                .collect(),
            self.upper
                .iter()
                .zip(&other.upper)
                .map(|(a, b)| a.max(*b))
                .collect(),
        )
    }
}

/// Relative position of two cubes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeRelation {
    Disjoint,
    Equal,
    /// The first cube strictly contains the second.
    Contains,
    /// The first cube is strictly inside the second.
    Inside,
    /// Overlapping without nesting; impossible within one shifted grid.
    Overlapping,
}

/// A cube of a shifted dyadic δ-grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeltaCube {
    pub scale: i32,
    pub position: Vec<i64>,
    pub shift: Vec<Shift>,
}

impl DeltaCube {
    pub fn new(scale: i32, position: Vec<i64>, shift: Vec<Shift>) -> Result<Self> {
        check_scale(scale)?;
        check_dim(position.len(), shift.len())?;
        Ok(DeltaCube {
            scale,
            position,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn side_exponents(&self, d: &Dilation) -> Vec<i32> {
        d.side_exponents(self.scale)
    }

    pub fn side_lengths(&self, d: &Dilation) -> Vec<f64> {
        cube_side_lengths(self.scale, d)
    }

    pub fn volume(&self, d: &Dilation) -> f64 {
        self.side_lengths(d).iter().product()
    }

    /// Exact `[lower, upper)` per coordinate.
    pub fn exact_bounds(&self, d: &Dilation) -> Vec<(Triadic, Triadic)> {
        self.side_exponents(d)
            .into_iter()
            .zip(self.position.iter().zip(&self.shift))
            .map(|(e, (&i, s))| {
                let off = sigma(e) * s.thirds();
                let lo = 3 * i as i128 + off as i128;
                (Triadic::new(lo, e), Triadic::new(lo + 3, e))
            })
            .collect()
    }

    /// The realized box (corners rounded to the nearest float).
    pub fn realized_box(&self, d: &Dilation) -> MeasuredBox {
        let b = self.exact_bounds(d);
        MeasuredBox {
            lower: b.iter().map(|(l, _)| l.to_f64()).collect(),
            upper: b.iter().map(|(_, u)| u.to_f64()).collect(),
        }
    }

    pub fn center(&self, d: &Dilation) -> Vec<f64> {
        self.realized_box(d).center()
    }

    /// Exact half-open containment of a point.
    pub fn contains_point(&self, x: &[f64], d: &Dilation) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        self.exact_bounds(d)
            .iter()
            .zip(x)
            .all(|((lo, hi), &v)| match Triadic::from_f64(v) {
                Some(t) => *lo <= t && t < *hi,
                None => false,
            })
    }

    /// Exact comparison of the realized boxes.
    pub fn relation(&self, other: &DeltaCube, d: &Dilation) -> CubeRelation {
        let a = self.exact_bounds(d);
        let b = other.exact_bounds(d);
        let mut a_in_b = true;
        let mut b_in_a = true;
        for ((alo, ahi), (blo, bhi)) in a.iter().zip(&b) {
            if ahi <= blo || bhi <= alo {
                return CubeRelation::Disjoint;
            }
            a_in_b &= blo <= alo && ahi <= bhi;
            b_in_a &= alo <= blo && bhi <= ahi;
        }
        match (a_in_b, b_in_a) {
            (true, true) => CubeRelation::Equal,
            (false, true) => CubeRelation::Contains,
            (true, false) => CubeRelation::Inside,
            (false, false) => CubeRelation::Overlapping,
        }
    }

    /// The cube one scale up in the same grid.
    pub fn parent(&self, d: &Dilation) -> Result<DeltaCube> {
        let k = self.scale + 1;
        check_scale(k)?;
        let lower: Vec<Triadic> = self.exact_bounds(d).into_iter().map(|(l, _)| l).collect();
        cube_at(&lower, k, &self.shift, d)
    }

    /// Number of descendants per axis `levels` scales down.
    pub fn descendant_counts(&self, levels: usize, d: &Dilation) -> Result<Vec<i64>> {
        let k = self.scale - levels as i32;
        check_scale(k)?;
        Ok(self
            .side_exponents(d)
            .iter()
            .zip(d.side_exponents(k))
            .map(|(e, f)| 1i64 << (e - f))
            .collect())
    }

    /// The descendant `levels` scales down at per-axis offset `local`
    /// (counted from the lower corner).
    pub fn descendant(&self, levels: usize, local: &[i64], d: &Dilation) -> Result<DeltaCube> {
        check_dim(self.dim(), local.len())?;
        let k = self.scale - levels as i32;
        check_scale(k)?;
        let lower: Vec<Triadic> = self.exact_bounds(d).into_iter().map(|(l, _)| l).collect();
        let first = cube_at(&lower, k, &self.shift, d)?;
        let position = first
            .position
            .iter()
            .zip(local)
            .map(|(p, o)| p + o)
            .collect();
        Ok(DeltaCube {
            scale: k,
            position,
            shift: self.shift.clone(),
        })
    }

    /// The cubes one scale down in the same grid, row-major.
    pub fn children(&self, d: &Dilation) -> Result<Vec<DeltaCube>> {
        let k = self.scale - 1;
        check_scale(k)?;
        let lower: Vec<Triadic> = self.exact_bounds(d).into_iter().map(|(l, _)| l).collect();
        let first = cube_at(&lower, k, &self.shift, d)?;
        let counts: Vec<i64> = self
            .side_exponents(d)
            .iter()
            .zip(d.side_exponents(k))
            .map(|(e, f)| 1i64 << (e - f))
            .collect();
        let mut out = Vec::new();
        for idx in MultiIndex::new(&counts) {
            let position = first
                .position
                .iter()
                .zip(&idx)
                .map(|(p, o)| p + o)
                .collect();
            out.push(DeltaCube {
                scale: k,
                position,
                shift: self.shift.clone(),
            });
        }
        Ok(out)
    }
}

/// The grid cube at scale `k` containing an exact point.
fn cube_at(x: &[Triadic], k: i32, shift: &[Shift], d: &Dilation) -> Result<DeltaCube> {
    let position = d
        .side_exponents(k)
        .into_iter()
        .zip(x.iter().zip(shift))
        .map(|(e, (v, s))| index_of(*v, e, sigma(e) * s.thirds()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaCube {
        scale: k,
        position,
        shift: shift.to_vec(),
    })
}

/// The cube of grid `s` at scale `k` whose half-open box contains `x`.
pub fn grid_cube_containing(x: &[f64], k: i32, s: &[Shift], d: &Dilation) -> Result<DeltaCube> {
    check_scale(k)?;
    check_dim(d.dim(), x.len())?;
    check_dim(d.dim(), s.len())?;
    let exact: Vec<Triadic> = x
        .iter()
        .map(|&v| Triadic::from_f64(v).ok_or_else(|| invalid("point must be finite")))
        .collect::<Result<_>>()?;
    cube_at(&exact, k, s, d)
}

/// Which third of the cube a cover piece occupies along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThirdPosition {
    Minus,
    Zero,
    Plus,
}

impl ThirdPosition {
    fn offset(self) -> i64 {
        match self {
            ThirdPosition::Minus => -1,
            ThirdPosition::Zero => 0,
            ThirdPosition::Plus => 1,
        }
    }
}

/// One piece `(Q/3)^γ` of the one-third cover.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverPiece {
    pub gamma: Vec<ThirdPosition>,
    /// Exact `[lower, upper)` of the piece.
    pub bounds: Vec<(Triadic, Triadic)>,
    /// The grid cube whose middle third is this piece; its `shift` names the
    /// grid the piece belongs to.
    pub cube: DeltaCube,
}

impl CoverPiece {
    pub fn realized_box(&self) -> MeasuredBox {
        MeasuredBox {
            lower: self.bounds.iter().map(|(l, _)| l.to_f64()).collect(),
            upper: self.bounds.iter().map(|(_, u)| u.to_f64()).collect(),
        }
    }
}

/// Splits `Q` into its `3^n` congruent thirds `(Q/3)^γ`, `γ ∈ {−, 0, +}^n`.
///
/// Each piece is the middle third of a cube of the same scale obtained by
/// translating `Q` by `γ` thirds of its side; that cube lies in another
/// shifted grid, reported in [`CoverPiece::cube`].
pub fn one_third_cover(q: &DeltaCube, d: &Dilation) -> Vec<CoverPiece> {
    let exps = q.side_exponents(d);
    let bounds = q.exact_bounds(d);
    let n = q.dim();
    let mut out = Vec::with_capacity(3usize.pow(n as u32));
    for idx in MultiIndex::new(&vec![3; n]) {
        let gamma: Vec<ThirdPosition> = idx
            .iter()
            .map(|&g| {
                [
                    ThirdPosition::Minus,
                    ThirdPosition::Zero,
                    ThirdPosition::Plus,
                ][g as usize]
            })
            .collect();
        let mut position = Vec::with_capacity(n);
        let mut shift = Vec::with_capacity(n);
        let mut piece = Vec::with_capacity(n);
        for j in 0..n {
            let g = gamma[j].offset();
            let sg = sigma(exps[j]);
            // Lower corner of the translated cube, in units of 2^e / 3.
            let lo3 = bounds[j].0.num() + g as i128;
            let t = (q.shift[j].thirds() + sg * g).rem_euclid(3);
            let i = (lo3 - (sg * t) as i128) / 3;
            position.push(i as i64);
            shift.push(Shift::from_thirds(t));
            piece.push((
                Triadic::new(lo3 + 1, exps[j]),
                Triadic::new(lo3 + 2, exps[j]),
            ));
        }
        out.push(CoverPiece {
            gamma,
            bounds: piece,
            cube: DeltaCube {
                scale: q.scale,
                position,
                shift,
            },
        });
    }
    out
}

/// The smallest-scale cube, over all shifted grids, containing the box.
///
/// Existence is the one-third trick: once a side is at least three times the
/// box width, one of the three offsets avoids splitting it.
pub fn enclosing_cube(b: &MeasuredBox, d: &Dilation) -> Result<DeltaCube> {
    check_dim(d.dim(), b.dim())?;
    let lo: Vec<Triadic> = b
        .lower()
        .iter()
        .map(|&v| Triadic::from_f64(v).unwrap())
        .collect();
    let hi: Vec<Triadic> = b
        .upper()
        .iter()
        .map(|&v| Triadic::from_f64(v).unwrap())
        .collect();
    let widths = b.sides();
    'scales: for k in MIN_SCALE..=MAX_SCALE {
        let exps = d.side_exponents(k);
        // A cube narrower than the box cannot hold it, and at such scales
        // the positions of far-away boxes may not fit in an i64.
        if exps.iter().zip(&widths).any(|(&e, &w)| 2f64.powi(e) < w) {
            continue;
        }
        let mut position = Vec::new();
        let mut shift = Vec::new();
        for j in 0..d.dim() {
            let mut found = None;
            for s in Shift::ALL {
                let st = sigma(exps[j]) * s.thirds();
                let i = index_of(lo[j], exps[j], st)?;
                let upper = Triadic::new(3 * i as i128 + 3 + st as i128, exps[j]);
                if hi[j] <= upper {
                    found = Some((i, s));
                    break;
                }
            }
            match found {
                Some((i, s)) => {
                    position.push(i);
                    shift.push(s);
                }
                None => continue 'scales,
            }
        }
        return Ok(DeltaCube {
            scale: k,
            position,
            shift,
        });
    }
    Err(Error::ScaleOutOfRange(MAX_SCALE + 1))
}

/// Row-major iteration over `0..counts[0] × … × 0..counts[n-1]`.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    counts: Vec<i64>,
    current: Option<Vec<i64>>,
}

impl MultiIndex {
    pub fn new(counts: &[i64]) -> Self {
        let current = if counts.iter().all(|&c| c > 0) {
            Some(vec![0; counts.len()])
        } else {
            None
        };
        MultiIndex {
            counts: counts.to_vec(),
            current,
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        let mut j = next.len();
        loop {
            if j == 0 {
                self.current = None;
                break;
            }
            j -= 1;
            next[j] += 1;
            if next[j] < self.counts[j] {
                self.current = Some(next);
                break;
            }
            next[j] = 0;
        }
        Some(out)
    }
}

impl PartialOrd for DeltaCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeltaCube {
    /// Coarser scales first, then position and shift.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .scale
            .cmp(&self.scale)
            .then_with(|| self.position.cmp(&other.position))
            .then_with(|| self.shift.cmp(&other.shift))
    }
}
