//! The five scaling families that witness the necessary conditions on
//! `(1/p, 1/q)` for `f ↦ sup_{t∈[1,2]} |∫_0^1 f(y1 − tx, y2 − t(x^d + c)) dx|`.
//!
//! Each family pairs an indicator `1_S` with an evaluation domain `D` on
//! which the maximal function has a known lower bound. Measuring
//! `‖M 1_S‖_{L^q(D)}` and `‖1_S‖_p` for a range of `k` and fitting log-log
//! slopes reproduces the exponents that force each condition.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::averaging::{lp_norm, Averager, GridFunction};
use crate::delta_grid::MeasuredBox;
use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::fit::{fit_line, LineFit};
use crate::geometry::quadrature::integrate_real;
use crate::geometry::{Cutoff, SurfaceSpec};
use crate::regions::{ExponentPoint, HalfPlane};

/// Upper limit on the cells of one indicator grid.
pub const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    S1,
    S2,
    S3,
    S4,
    S5,
}

impl Tag {
    pub const ALL: [Tag; 5] = [Tag::S1, Tag::S2, Tag::S3, Tag::S4, Tag::S5];

    /// The offset `c` of the operator the family is built for.
    pub fn offset(self) -> f64 {
        if self == Tag::S5 {
            1.0
        } else {
            0.0
        }
    }

    /// Largest `k` of the default sweep.
    pub fn default_k_max(self) -> i32 {
        match self {
            Tag::S4 | Tag::S5 => 5,
            _ => 6,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::S1 => "S1",
            Tag::S2 => "S2",
            Tag::S3 => "S3",
            Tag::S4 => "S4",
            Tag::S5 => "S5",
        };
        f.write_str(s)
    }
}

impl FromStr for Tag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tag> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(Tag::S1),
            "S2" => Ok(Tag::S2),
            "S3" => Ok(Tag::S3),
            "S4" => Ok(Tag::S4),
            "S5" => Ok(Tag::S5),
            _ => Err(invalid(format!("unknown family {s:?}"))),
        }
    }
}

/// An exponent `constant + inv_p/p + inv_q/q` in `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentLaw {
    pub constant: Rational64,
    pub inv_p: Rational64,
    pub inv_q: Rational64,
}

impl ExponentLaw {
    fn new(constant: i64, inv_p: i64, inv_q: i64) -> Self {
        ExponentLaw {
            constant: Rational64::from_integer(constant),
            inv_p: Rational64::from_integer(inv_p),
            inv_q: Rational64::from_integer(inv_q),
        }
    }

    pub fn at(&self, p: f64, q: f64) -> f64 {
        let r = |v: Rational64| *v.numer() as f64 / *v.denom() as f64;
        r(self.constant) + r(self.inv_p) / p + r(self.inv_q) / q
    }
}

/// Predicted growth exponents of `‖M 1_S‖_{L^q(D)}` and `‖1_S‖_p`.
pub fn predicted_exponents(tag: Tag, d: u32) -> (ExponentLaw, ExponentLaw) {
    let n = d as i64 + 1;
    match tag {
        Tag::S1 => (ExponentLaw::new(0, 0, 1), ExponentLaw::new(0, 1, 0)),
        Tag::S2 => (ExponentLaw::new(0, 0, -2), ExponentLaw::new(0, -1, 0)),
        Tag::S3 => (ExponentLaw::new(-1, 0, -n), ExponentLaw::new(0, -n, 0)),
        Tag::S4 => (ExponentLaw::new(-1, 0, -1), ExponentLaw::new(0, -3, 0)),
        Tag::S5 => (ExponentLaw::new(-1, 0, -1), ExponentLaw::new(0, -n, 0)),
    }
}

/// The condition on `(1/p, 1/q)` the family forces, as `a/p + b/q ≤ c`.
pub fn predicted_condition(tag: Tag, d: u32) -> HalfPlane {
    let r = Rational64::from_integer;
    let n = r(d as i64 + 1);
    match tag {
        Tag::S1 => HalfPlane::new(r(-1), r(1), r(0), false),
        Tag::S2 => HalfPlane::new(Rational64::new(1, 2), r(-1), r(0), false),
        Tag::S3 => HalfPlane::new(n, -n, r(1), false),
        Tag::S4 => HalfPlane::new(r(3), r(-1), r(1), false),
        Tag::S5 => HalfPlane::new(n, r(-1), r(1), false),
    }
}

/// Whether the family certifies unboundedness at `pt`.
pub fn check_sharpness(tag: Tag, d: u32, pt: &ExponentPoint) -> bool {
    !predicted_condition(tag, d).holds(pt.inv_p, pt.inv_q)
}

/// The set where the maximal function is bounded below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Box(MeasuredBox),
    Disk {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{s(1,1) + u·direction : s ∈ [1, 2], |u| ≤ half_width}`.
    Strip {
        direction: [f64; 2],
        half_width: f64,
    },
}

/// A quadrature node of a [`Domain`] with the dilation the lower-bound
/// argument uses there.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSample {
    pub y: Vec<f64>,
    pub weight: f64,
    pub witness_time: f64,
}

impl Domain {
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Box(b) => b.volume(),
            Domain::Disk { radius, .. } => PI * radius * radius,
            Domain::Strip {
                direction,
                half_width,
            } => (direction[1] - direction[0]).abs() * 2.0 * half_width,
        }
    }

    /// Midpoint nodes on an `n × n` partition of the domain's own
    /// coordinates, so node sets at different `k` are rescaled copies.
    pub fn samples(&self, n: usize, witness: impl Fn(&[f64], f64) -> f64) -> Vec<DomainSample> {
        let mid = |i: usize| (i as f64 + 0.5) / n as f64;
        let mut out = Vec::new();
        match self {
            Domain::Box(b) => {
                let cell = b.volume() / (n * n) as f64;
                for i in 0..n {
                    for j in 0..n {
                        let y = vec![
                            b.lower()[0] + b.sides()[0] * mid(i),
                            b.lower()[1] + b.sides()[1] * mid(j),
                        ];
                        let t = witness(&y, 0.0);
                        out.push(DomainSample {
                            y,
                            weight: cell,
                            witness_time: t,
                        });
                    }
                }
            }
            Domain::Disk { center, radius } => {
                let side = 2.0 * radius / n as f64;
                for i in 0..n {
                    for j in 0..n {
                        let u = -radius + side * (i as f64 + 0.5);
                        let v = -radius + side * (j as f64 + 0.5);
                        if u * u + v * v <= radius * radius {
                            let y = vec![center[0] + u, center[1] + v];
                            let t = witness(&y, 0.0);
                            out.push(DomainSample {
                                y,
                                weight: side * side,
                                witness_time: t,
                            });
                        }
                    }
                }
            }
            Domain::Strip {
                direction,
                half_width,
            } => {
                let jacobian = (direction[1] - direction[0]).abs();
                let weight = jacobian * 2.0 * half_width / (n * n) as f64;
                for i in 0..n {
                    for j in 0..n {
                        let s = 1.0 + mid(i);
                        let u = half_width * (2.0 * mid(j) - 1.0);
                        let y = vec![s + u * direction[0], s + u * direction[1]];
                        let t = witness(&y, s);
                        out.push(DomainSample {
                            y,
                            weight,
                            witness_time: t,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Unit vectors of the tilted rectangle: `e1` is tangent to the curve at
/// `x = 1`, `e2` is normal to it.
pub fn tilted_frame(d: u32) -> ([f64; 2], [f64; 2]) {
    let d = d as f64;
    let n = (d * d + 1.0).sqrt();
    ([-1.0 / n, -d / n], [-d / n, 1.0 / n])
}

/// One member of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub tag: Tag,
    pub k: i32,
    pub d: u32,
    /// Rasterized indicator. Axis-parallel sets are widened by one cell so
    /// the interpolant is at least 1 on all of `S`; tilted sets use
    /// cell-center membership.
    pub indicator: GridFunction,
    pub domain: Domain,
    /// Pointwise lower bound of `M 1_S` on the domain.
    pub lower_bound: f64,
    pub lhs_law: ExponentLaw,
    pub rhs_law: ExponentLaw,
}

/// Grid over `[lo, hi]` per axis with `cells` cells across and a two-cell
/// margin.
fn padded_grid(
    lo: [f64; 2],
    hi: [f64; 2],
    cells: [usize; 2],
) -> Result<(MeasuredBox, Vec<usize>, [f64; 2])> {
    let h = [
        (hi[0] - lo[0]) / cells[0] as f64,
        (hi[1] - lo[1]) / cells[1] as f64,
    ];
    let res = vec![cells[0] + 4, cells[1] + 4];
    let total = res[0].checked_mul(res[1]).unwrap_or(usize::MAX);
    if total > MAX_CELLS {
        return Err(invalid(format!(
            "{total} cells exceed the limit {MAX_CELLS}"
        )));
    }
    let b = MeasuredBox::new(
        vec![lo[0] - 2.0 * h[0], lo[1] - 2.0 * h[1]],
        vec![hi[0] + 2.0 * h[0], hi[1] + 2.0 * h[1]],
    )?;
    Ok((b, res, h))
}

/// `1` on every cell within one cell (per axis) of the box `[lo, hi]`.
fn raster_box(lo: [f64; 2], hi: [f64; 2], cells: [usize; 2]) -> Result<GridFunction> {
    let (b, res, h) = padded_grid(lo, hi, cells)?;
    // Centers sit at half-integer multiples of h from lo, so the test is
    // done in cell units to stay exact across k.
    GridFunction::from_fn(b, res, |x| {
        let inside = (0..2).all(|j| {
            let u = (x[j] - lo[j]) / h[j];
            let w = (hi[j] - lo[j]) / h[j];
            u >= -1.0 && u <= w + 1.0
        });
        if inside {
            1.0
        } else {
            0.0
        }
    })
}

fn unresolvable(k: i32, e: Error) -> Error {
    match e {
        Error::InvalidInput(reason) => Error::Unresolvable { k, reason },
        other => other,
    }
}

/// Builds family `tag` at scale `k` with `cells` grid cells across the
/// thinnest width of `S` (at least 4).
pub fn build_example(tag: Tag, k: i32, d: u32, cells: usize) -> Result<Example> {
    if d < 2 {
        return Err(invalid("type order d must be at least 2"));
    }
    if k < 1 {
        return Err(invalid("scale k must be at least 1"));
    }
    if cells < 4 {
        return Err(invalid("indicators need at least 4 cells across"));
    }
    let (lhs_law, rhs_law) = predicted_exponents(tag, d);
    let kf = k as f64;
    let df = d as f64;
    let small = (-kf).exp2();
    let thin = (-df * kf).exp2();
    let build = || -> Result<(GridFunction, Domain, f64)> {
        match tag {
            Tag::S1 => {
                let big = kf.exp2();
                let f = raster_box([-1.0, -big], [1.0, big], [cells, cells])?;
                let dom = Domain::Box(MeasuredBox::new(vec![0.0, 0.0], vec![1.0, big])?);
                Ok((f, dom, 1.0))
            }
            Tag::S2 => {
                let r = small;
                let h = 2.0 * r / cells as f64;
                let n = ((1.0 + 2.0 * r) / h).ceil() as usize;
                let lo = [-1.0 - r, -1.0 - r];
                let (b, res, hh) =
                    padded_grid(lo, [lo[0] + n as f64 * h, lo[1] + n as f64 * h], [n, n])?;
                let f = raster_tube(&b, &res, hh, d, r)?;
                Ok((
                    f,
                    Domain::Disk {
                        center: vec![0.0, 0.0],
                        radius: r,
                    },
                    1.0,
                ))
            }
            Tag::S3 => {
                let f = raster_box([-small, -thin], [small, thin], [cells, cells])?;
                let dom = Domain::Box(MeasuredBox::new(vec![0.0, 0.0], vec![small, thin])?);
                Ok((f, dom, small))
            }
            Tag::S4 => {
                let (e1, e2) = tilted_frame(d);
                let (w1, w2) = (20.0 * small, 20.0 * small * small);
                let h = 2.0 * w2 / cells as f64;
                let half = [
                    w1 * e1[0].abs() + w2 * e2[0].abs(),
                    w1 * e1[1].abs() + w2 * e2[1].abs(),
                ];
                let n = [
                    (2.0 * half[0] / h).ceil() as usize,
                    (2.0 * half[1] / h).ceil() as usize,
                ];
                let lo = [-(n[0] as f64) * h / 2.0, -(n[1] as f64) * h / 2.0];
                let (b, res, _) = padded_grid(lo, [-lo[0], -lo[1]], n)?;
                let f = GridFunction::from_fn(b, res, |x| {
                    let u = x[0] * e1[0] + x[1] * e1[1];
                    let v = x[0] * e2[0] + x[1] * e2[1];
                    if u.abs() <= w1 && v.abs() <= w2 {
                        1.0
                    } else {
                        0.0
                    }
                })?;
                let dom = Domain::Strip {
                    direction: e1,
                    half_width: small,
                };
                Ok((f, dom, small / (df * df + 1.0).sqrt()))
            }
            Tag::S5 => {
                let f = raster_box(
                    [-10.0 * small, -10.0 * thin],
                    [10.0 * small, 10.0 * thin],
                    [cells, cells],
                )?;
                let dom = Domain::Box(MeasuredBox::new(vec![0.0, 1.0], vec![small, 2.0])?);
                Ok((f, dom, 0.5 * small))
            }
        }
    };
    let (indicator, domain, lower_bound) = build().map_err(|e| unresolvable(k, e))?;
    Ok(Example {
        tag,
        k,
        d,
        indicator,
        domain,
        lower_bound,
        lhs_law,
        rhs_law,
    })
}

/// `1` on cells whose centers lie within `r` of `{(−x, −x^d) : x ∈ [0, 1]}`.
fn raster_tube(
    b: &MeasuredBox,
    res: &[usize],
    h: [f64; 2],
    d: u32,
    r: f64,
) -> Result<GridFunction> {
    let mut f = GridFunction::zeros(b.clone(), res.to_vec())?;
    let step = 0.25 * h[0].min(h[1]);
    let span = [(r / h[0]).ceil() as i64 + 2, (r / h[1]).ceil() as i64 + 2];
    // The arc length is below 1 + d, so chords stay shorter than `step`.
    let samples = ((1.0 + d as f64) / step).ceil() as usize;
    let point = |i: usize| {
        let x = i as f64 / samples as f64;
        [-x, -x.powi(d as i32)]
    };
    for i in 0..samples {
        let (p0, p1) = (point(i), point(i + 1));
        let ci = [
            ((p0[0] - b.lower()[0]) / h[0]) as i64,
            ((p0[1] - b.lower()[1]) / h[1]) as i64,
        ];
        for a in (ci[0] - span[0]).max(0)..=(ci[0] + span[0]).min(res[0] as i64 - 1) {
            for bb in (ci[1] - span[1]).max(0)..=(ci[1] + span[1]).min(res[1] as i64 - 1) {
                let c = [
                    b.lower()[0] + (a as f64 + 0.5) * h[0],
                    b.lower()[1] + (bb as f64 + 0.5) * h[1],
                ];
                if segment_distance(c, p0, p1) <= r {
                    let k = f.linear_index(&[a as usize, bb as usize]);
                    f.values_mut()[k] = 1.0;
                }
            }
        }
    }
    Ok(f)
}

fn segment_distance(c: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ac = [c[0] - a[0], c[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let s = if len2 > 0.0 {
        ((ac[0] * ab[0] + ac[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ac[0] - s * ab[0]).hypot(ac[1] - s * ab[1])
}

/// The operator `∫_0^1 f(y1 − tx, y2 − t(x^d + c)) dx` under isotropic
/// dilation.
pub fn model_operator(d: u32, c: f64) -> Result<(SurfaceSpec, Cutoff)> {
    Ok((
        SurfaceSpec::finite_type_curve(d, c, vec![1.0], 1, 1.0)?,
        Cutoff::unit_interval(),
    ))
}

/// Sampling parameters for [`measure_example`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSettings {
    /// Grid cells across the thinnest width of `S`.
    pub cells: usize,
    /// Nodes per axis of the domain quadrature.
    pub domain_nodes: usize,
    /// Uniform samples of `[1, 2]` for the wide families.
    pub dense_times: usize,
    /// Half-width, in units of the family's time scale, of the window
    /// searched around the witness time for the thin families.
    pub window: f64,
    /// Samples across that window.
    pub window_times: usize,
}

impl Default for MeasureSettings {
    fn default() -> Self {
        MeasureSettings {
            cells: 32,
            domain_nodes: 12,
            dense_times: 32,
            window: 48.0,
            window_times: 97,
        }
    }
}

/// Measurements of one family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub k: i32,
    /// `‖M 1_S‖_{L^q(D)}`.
    pub lhs_norm: f64,
    /// `‖1_S‖_p`.
    pub rhs_norm: f64,
    /// Smallest ratio of the witness average to the stated lower bound
    /// over the domain nodes.
    pub witness_ratio: f64,
}

/// Dilations at which the supremum is sampled for a node.
fn time_samples(ex: &Example, node: &DomainSample, s: &MeasureSettings) -> Vec<f64> {
    let scale = match ex.tag {
        Tag::S1 | Tag::S2 | Tag::S3 => {
            return (0..s.dense_times)
                .map(|i| 1.0 + i as f64 / (s.dense_times - 1).max(1) as f64)
                .collect();
        }
        Tag::S4 => (-2.0 * ex.k as f64).exp2(),
        Tag::S5 => (-(ex.d as f64) * ex.k as f64).exp2(),
    };
    let n = s.window_times.max(2);
    let mut out: Vec<f64> = (0..n)
        .map(|i| node.witness_time + scale * s.window * (2.0 * i as f64 / (n - 1) as f64 - 1.0))
        .filter(|t| (1.0..=2.0).contains(t))
        .collect();
    out.push(node.witness_time);
    out
}

/// `‖M 1_S‖_{L^q(D)}`, `‖1_S‖_p` and the lower-bound check for one member.
pub fn measure_example(
    ex: &Example,
    p: f64,
    q: f64,
    settings: &MeasureSettings,
    exec: Execution,
) -> Result<ScalingRow> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(invalid("exponents must be at least 1"));
    }
    let (spec, cutoff) = model_operator(ex.d, ex.tag.offset())?;
    let op = Averager::new(&spec, &cutoff)?;
    let tag = ex.tag;
    let nodes = ex.domain.samples(settings.domain_nodes, |y, s| match tag {
        Tag::S4 => s,
        Tag::S5 => y[1],
        _ => 1.0,
    });
    if nodes.is_empty() {
        return Err(invalid("evaluation domain has no nodes"));
    }
    let values = exec.try_map_range(nodes.len(), |i| -> Result<(f64, f64)> {
        let node = &nodes[i];
        let mut best: f64 = 0.0;
        for t in time_samples(ex, node, settings) {
            best = best.max(op.average(&ex.indicator, t, &node.y)?.abs());
        }
        let witness = op.average(&ex.indicator, node.witness_time, &node.y)?;
        Ok((best, witness))
    })?;
    let mut sum = 0.0;
    let mut witness_ratio = f64::INFINITY;
    for (node, (m, w)) in nodes.iter().zip(&values) {
        sum += m.powf(q) * node.weight;
        witness_ratio = witness_ratio.min(w / ex.lower_bound);
    }
    Ok(ScalingRow {
        k: ex.k,
        lhs_norm: sum.powf(1.0 / q),
        rhs_norm: lp_norm(&ex.indicator, p)?,
        witness_ratio,
    })
}

/// A sweep over `k` with fitted slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tag: Tag,
    pub d: u32,
    pub p: f64,
    pub q: f64,
    pub rows: Vec<ScalingRow>,
    pub lhs_fit: LineFit,
    pub rhs_fit: LineFit,
    pub predicted_lhs: f64,
    pub predicted_rhs: f64,
}

impl ScalingReport {
    pub fn lhs_relative_error(&self) -> f64 {
        ((self.lhs_fit.slope - self.predicted_lhs) / self.predicted_lhs).abs()
    }

    pub fn rhs_relative_error(&self) -> f64 {
        ((self.rhs_fit.slope - self.predicted_rhs) / self.predicted_rhs).abs()
    }

    pub fn min_witness_ratio(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.witness_ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fits `log2` of both norms against `k`.
pub fn measure_scaling(
    tag: Tag,
    d: u32,
    p: f64,
    q: f64,
    ks: &[i32],
    settings: &MeasureSettings,
    exec: Execution,
) -> Result<ScalingReport> {
    if ks.len() < 3 {
        return Err(invalid("slope fits need at least three values of k"));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let ex = build_example(tag, k, d, settings.cells)?;
        rows.push(measure_example(&ex, p, q, settings, exec)?);
    }
    let kx: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let log = |v: f64| -> Result<f64> {
        if v > 0.0 {
            Ok(v.log2())
        } else {
            Err(Error::Quadrature {
                requested: 0.0,
                achieved: v,
            })
        }
    };
    let lhs: Vec<f64> = rows
        .iter()
        .map(|r| log(r.lhs_norm))
        .collect::<Result<_>>()?;
    let rhs: Vec<f64> = rows
        .iter()
        .map(|r| log(r.rhs_norm))
        .collect::<Result<_>>()?;
    let (lhs_law, rhs_law) = predicted_exponents(tag, d);
    Ok(ScalingReport {
        tag,
        d,
        p,
        q,
        lhs_fit: fit_line(&kx, &lhs)?,
        rhs_fit: fit_line(&kx, &rhs)?,
        predicted_lhs: lhs_law.at(p, q),
        predicted_rhs: rhs_law.at(p, q),
        rows,
    })
}

/// Area of the ideal set `S`. The S2 tube uses `2rL + πr²`, exact while
/// `r` stays below the curve's smallest radius of curvature.
pub fn exact_volume(tag: Tag, k: i32, d: u32) -> Result<f64> {
    let kf = k as f64;
    let df = d as f64;
    let small = (-kf).exp2();
    Ok(match tag {
        Tag::S1 => 2.0 * 2.0 * kf.exp2(),
        Tag::S2 => {
            let (length, _) = integrate_real(
                |x| (1.0 + (df * x.powi(d as i32 - 1)).powi(2)).sqrt(),
                0.0,
                1.0,
                8,
                1e-13,
                1 << 12,
            )?;
            2.0 * small * length + PI * small * small
        }
        Tag::S3 => 4.0 * small * (-df * kf).exp2(),
        Tag::S4 => 1600.0 * small * small * small,
        Tag::S5 => 400.0 * small * (-df * kf).exp2(),
    })
}

/// The discrete dilations `t_i` of the S4 and S5 arguments.
pub fn witness_times(tag: Tag, k: i32, d: u32) -> Vec<f64> {
    let spacing = match tag {
        Tag::S4 => 100.0 * (-2.0 * k as f64).exp2(),
        Tag::S5 => 100.0 * (-(d as f64) * k as f64).exp2(),
        _ => return vec![1.0],
    };
    let n = (1.0 / spacing).floor() as usize;
    (0..=n).map(|i| 1.0 + i as f64 * spacing).collect()
}

/// Checks that the sets `D_{t_i}` of S4 (tilted rectangles) or S5
/// (slabs) are pairwise disjoint.
pub fn windows_disjoint(tag: Tag, k: i32, d: u32) -> bool {
    let ts = witness_times(tag, k, d);
    let small = (-(k as f64)).exp2();
    match tag {
        Tag::S4 => {
            let (e1, e2) = tilted_frame(d);
            let half = [small, small * small];
            let proj = |t: f64| [t * (e1[0] + e1[1]), t * (e2[0] + e2[1])];
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    let (a, b) = (proj(ts[i]), proj(ts[j]));
                    let apart = (0..2).any(|m| (a[m] - b[m]).abs() > 2.0 * half[m]);
                    if !apart {
                        return false;
                    }
                }
            }
            true
        }
        Tag::S5 => {
            let thin = (-(d as f64) * k as f64).exp2();
            ts.windows(2)
                .all(|w| w[0] + w[0].powi(1 - d as i32) * thin < w[1])
        }
        _ => true,
    }
}

/// Largest observed `|((tx, tx^d) − (t, t))·e1| / 2^{−k}` and the same
/// along `e2` over `2^{−2k}`, for `x` in the last `(d²+1)^{−1/2} 2^{−k}` of
/// `[0, 1]` and `t ∈ [1, 2]`.
pub fn taylor_control(k: i32, d: u32, samples: usize) -> (f64, f64) {
    let (e1, e2) = tilted_frame(d);
    let small = (-(k as f64)).exp2();
    let df = d as f64;
    let len = small / (df * df + 1.0).sqrt();
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..=samples {
        let t = 1.0 + i as f64 / samples as f64;
        for j in 0..=samples {
            let x = 1.0 - len * j as f64 / samples as f64;
            let v = [t * x - t, t * x.powi(d as i32) - t];
            let a = (v[0] * e1[0] + v[1] * e1[1]).abs() / small;
            let b = (v[0] * e2[0] + v[1] * e2[1]).abs() / (small * small);
            worst = (worst.0.max(a), worst.1.max(b));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for t in Tag::ALL {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
        }
        assert!("S6".parse::<Tag>().is_err());
    }

    #[test]
    fn conditions_match_the_theorem() {
        let pt = |a, b, c, d| ExponentPoint::from_ratios((a, b), (c, d)).unwrap();
        assert!(check_sharpness(Tag::S1, 2, &pt(1, 2, 3, 4)));
        assert!(!check_sharpness(Tag::S4, 2, &pt(1, 2, 1, 2)));
        assert!(check_sharpness(Tag::S5, 2, &pt(1, 2, 1, 4)));
        let c5 = predicted_condition(Tag::S5, 3);
        assert_eq!(c5.a, Rational64::from_integer(4));
    }

    #[test]
    fn s1_and_s3_geometry() {
        let s1 = build_example(Tag::S1, 3, 2, 8).unwrap();
        match &s1.domain {
            Domain::Box(b) => assert_eq!(
                (b.lower().to_vec(), b.upper().to_vec()),
                (vec![0.0, 0.0], vec![1.0, 8.0])
            ),
            _ => panic!("S1 evaluates on a box"),
        }
        let s3 = build_example(Tag::S3, 2, 2, 8).unwrap();
        // The raster covers S3 = [−1/4, 1/4] × [−1/16, 1/16] plus one cell.
        assert_eq!(s3.indicator.eval(&[0.25, 0.0625]), 1.0);
        assert_eq!(s3.indicator.eval(&[-0.25, -0.0625]), 1.0);
        assert_eq!(s3.indicator.eval(&[0.4, 0.0]), 0.0);
    }

    #[test]
    fn tube_covers_the_curve() {
        let s2 = build_example(Tag::S2, 2, 2, 8).unwrap();
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            for (du, dv) in [(0.0, 0.0), (0.1, 0.0), (0.0, -0.1), (-0.08, 0.08)] {
                assert_eq!(s2.indicator.eval(&[-x + du, -x * x + dv]), 1.0);
            }
        }
        assert_eq!(s2.indicator.eval(&[-0.5, 0.4]), 0.0);
    }

    #[test]
    fn windows_and_taylor_bounds() {
        for d in [2, 3] {
            for k in 2..=6 {
                assert!(windows_disjoint(Tag::S4, k, d));
                assert!(windows_disjoint(Tag::S5, k, d));
                let (a, b) = taylor_control(k, d, 40);
                assert!(a <= 10.0 && b <= 10.0, "k={k} d={d}: {a} {b}");
            }
        }
    }

    #[test]
    fn strip_measure_matches_nodes() {
        let (e1, _) = tilted_frame(2);
        let dom = Domain::Strip {
            direction: e1,
            half_width: 0.125,
        };
        let w: f64 = dom.samples(10, |_, s| s).iter().map(|n| n.weight).sum();
        assert!((w - dom.measure()).abs() < 1e-14);
    }
}
