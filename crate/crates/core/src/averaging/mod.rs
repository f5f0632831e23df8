//! Averaging operators `A_t f(y) = ∫ f(y − δ_t Γ(x)) η(x) dx`, their
//! maximal functions, and norm measurements.
//!
//! Integrals are computed exactly piecewise: the parameter interval is cut
//! wherever the curve crosses a grid center line or a box edge, so the
//! interpolated integrand is smooth on every piece and a five-point Gauss
//! rule per piece is accurate.

mod grid;
mod sampling;

pub use grid::{lp_norm, weighted_lp_norm, GridFunction};
pub use sampling::{SamplingMode, TimeSampling};

use crate::delta_grid::MeasuredBox;
use crate::error::{check_dim, invalid, Error, Result};
use crate::exec::Execution;
use crate::geometry::quadrature::{integrate_real, GL5_NODES, GL5_WEIGHTS};
use crate::geometry::{Cutoff, Family, Poly, SurfaceSpec};

/// Default number of Gauss pieces across the cutoff support.
pub const DEFAULT_PIECES: usize = 32;

#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    h: f64,
    n: usize,
}

impl Axis {
    fn of(f: &GridFunction, j: usize) -> Axis {
        let lo = f.bbox().lower()[j];
        let hi = f.bbox().upper()[j];
        let n = f.resolution()[j];
        Axis {
            lo,
            hi,
            h: (hi - lo) / n as f64,
            n,
        }
    }

    fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.h
    }

    /// Center indices whose line lies strictly inside `(a, b)`.
    fn centers_between(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let first = ((a - self.lo) / self.h - 0.5).floor() + 1.0;
        let last = ((b - self.lo) / self.h - 0.5).ceil() - 1.0;
        let first = first.max(0.0);
        let last = last.min(self.n as f64 - 1.0);
        if !(first <= last) {
            return 0..0;
        }
        first as usize..last as usize + 1
    }
}

/// An averaging operator for a fixed curve or surface and cutoff.
#[derive(Debug, Clone)]
pub struct Averager<'a> {
    spec: &'a SurfaceSpec,
    cutoff: &'a Cutoff,
    support: Vec<(f64, f64)>,
    critical: Vec<f64>,
    reach: Vec<(f64, f64)>,
    pieces: usize,
    refinement: usize,
}

impl<'a> Averager<'a> {
    pub fn new(spec: &'a SurfaceSpec, cutoff: &'a Cutoff) -> Result<Self> {
        check_dim(spec.param_dim(), cutoff.param_dim())?;
        let support = cutoff.support_intervals();
        let r = spec.support_radius() * (1.0 + 1e-12);
        if support.iter().any(|&(lo, hi)| lo < -r || hi > r) {
            return Err(invalid(format!(
                "cutoff support leaves the truncation domain |x| <= {}",
                spec.support_radius()
            )));
        }
        let (lo, hi) = support[support.len() - 1];
        let critical = spec.profile_slope().sign_changes(lo, hi, 512);
        let mut reach: Vec<(f64, f64)> = support.clone();
        reach.push(spec.profile().range_with_critical(lo, hi, &critical));
        Ok(Averager {
            spec,
            cutoff,
            support,
            critical,
            reach,
            pieces: DEFAULT_PIECES,
            refinement: 0,
        })
    }

    /// Minimum number of Gauss pieces across the cutoff support.
    pub fn with_pieces(mut self, pieces: usize) -> Self {
        self.pieces = pieces.max(1);
        self
    }

    /// Extra samples placed uniformly inside the window of `t` where the
    /// average can be non-zero; resolves thin targets missed by a fixed
    /// sampling.
    pub fn with_window_refinement(mut self, samples: usize) -> Self {
        self.refinement = samples;
        self
    }

    pub fn spec(&self) -> &SurfaceSpec {
        self.spec
    }

    pub fn cutoff(&self) -> &Cutoff {
        self.cutoff
    }

    /// Range of each coordinate of `Γ` over the cutoff support.
    pub fn reach(&self) -> &[(f64, f64)] {
        &self.reach
    }

    /// Smallest `m` with `δ_t Γ(supp η)` inside the middle quarter of the
    /// scale-`k` cube for every `τ ≤ 2^{k−m}`.
    pub fn block_offset(&self) -> i32 {
        let b = self.spec.dilation().normalized_values();
        let mut m = i32::MIN;
        for (j, &(g0, g1)) in self.reach.iter().enumerate() {
            let r = g0.abs().max(g1.abs());
            if r > 0.0 {
                m = m.max(((r.log2() + 3.0) / b[j]).ceil() as i32);
            }
        }
        if m == i32::MIN {
            0
        } else {
            m
        }
    }

    pub fn dyadic_sampling(
        &self,
        k_min: i32,
        k_max: i32,
        per_block: usize,
    ) -> Result<TimeSampling> {
        TimeSampling::dyadic_blocks(
            k_min,
            k_max,
            per_block,
            self.block_offset(),
            self.spec.dilation().time_power(),
        )
    }

    fn scales(&self, t: f64) -> Vec<f64> {
        self.spec
            .dilation()
            .exponents()
            .iter()
            .map(|a| t.powf(*a))
            .collect()
    }

    /// `A_t f(y)`.
    pub fn average(&self, f: &GridFunction, t: f64, y: &[f64]) -> Result<f64> {
        self.check(f, y)?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!(
                "dilation parameter must be positive, got {t}"
            )));
        }
        Ok(self.average_unchecked(f, t, y))
    }

    fn check(&self, f: &GridFunction, y: &[f64]) -> Result<()> {
        check_dim(self.spec.ambient_dim(), f.dim())?;
        check_dim(self.spec.ambient_dim(), y.len())?;
        if f.resolution().iter().any(|&r| r < 2) {
            return Err(Error::DegenerateGrid(
                "interpolation needs two samples per axis".into(),
            ));
        }
        Ok(())
    }

    fn average_unchecked(&self, f: &GridFunction, t: f64, y: &[f64]) -> f64 {
        let s = self.scales(t);
        let h = self.spec.profile();
        let p = self.spec.param_dim();
        let last = p - 1;
        // Breakpoints for each parameter.
        let mut parts: Vec<Vec<f64>> = Vec::with_capacity(p);
        for j in 0..p {
            let axis = Axis::of(f, j);
            let Some(mut br) = linear_breaks(y[j], s[j], axis, self.support[j]) else {
                return 0.0;
            };
            if j == last {
                let (a, b) = (br[0], br[br.len() - 1]);
                profile_breaks(
                    y[p],
                    s[p],
                    Axis::of(f, p),
                    h,
                    self.spec.profile_slope(),
                    &self.critical,
                    a,
                    b,
                    &mut br,
                );
                br.sort_by(f64::total_cmp);
                br.dedup();
            }
            let max_len = (self.support[j].1 - self.support[j].0) / self.pieces as f64;
            parts.push(refine(&br, max_len));
        }
        let (plo, phi) = (f.bbox().lower()[p], f.bbox().upper()[p]);
        let profile_ok = |x: f64| {
            let v = y[p] - s[p] * h.eval(x);
            v >= plo && v <= phi
        };
        if p == 1 {
            let mut total = 0.0;
            for w in parts[0].windows(2) {
                let (a, b) = (w[0], w[1]);
                if !(b > a) || !profile_ok(0.5 * (a + b)) {
                    continue;
                }
                let c = 0.5 * (a + b);
                let r = 0.5 * (b - a);
                let mut sum = 0.0;
                for (node, weight) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
                    let x = c + r * node;
                    let eta = self.cutoff.eval(&[x]);
                    if eta != 0.0 {
                        sum += weight * eta * f.eval2(y[0] - s[0] * x, y[1] - s[1] * h.eval(x));
                    }
                }
                total += r * sum;
            }
            return total;
        }
        let mut total = 0.0;
        let mut point = vec![0.0; p + 1];
        for w2 in parts[1].windows(2) {
            let (a2, b2) = (w2[0], w2[1]);
            if !(b2 > a2) || !profile_ok(0.5 * (a2 + b2)) {
                continue;
            }
            let (c2, r2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
            for (n2, w2w) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
                let x2 = c2 + r2 * n2;
                point[1] = y[1] - s[1] * x2;
                point[2] = y[2] - s[2] * h.eval(x2);
                let mut inner = 0.0;
                for w1 in parts[0].windows(2) {
                    let (a1, b1) = (w1[0], w1[1]);
                    if !(b1 > a1) {
                        continue;
                    }
                    let (c1, r1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
                    let mut sum = 0.0;
                    for (n1, w1w) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
                        let x1 = c1 + r1 * n1;
                        let eta = self.cutoff.eval(&[x1, x2]);
                        if eta != 0.0 {
                            point[0] = y[0] - s[0] * x1;
                            sum += w1w * eta * f.eval(&point);
                        }
                    }
                    inner += r1 * sum;
                }
                total += r2 * w2w * inner;
            }
        }
        total
    }

    /// Interval of `t` outside which `A_t f(y)` vanishes, from the
    /// coordinate ranges of `Γ` and the box of `f`.
    pub fn time_window(&self, f_box: &MeasuredBox, y: &[f64]) -> Option<(f64, f64)> {
        let mut lo: f64 = 0.0;
        let mut hi = f64::INFINITY;
        for (j, (&(g0, g1), a)) in self
            .reach
            .iter()
            .zip(self.spec.dilation().exponents())
            .enumerate()
        {
            let j0 = y[j] - f_box.upper()[j];
            let j1 = y[j] - f_box.lower()[j];
            let (slo, shi) = scale_window(g0, g1, j0, j1)?;
            let inv = 1.0 / a;
            lo = lo.max(slo.powf(inv) * (1.0 - 1e-9));
            hi = hi.min(shi.powf(inv) * (1.0 + 1e-9));
        }
        (lo <= hi).then_some((lo, hi))
    }

    fn sup_over(&self, f: &GridFunction, y: &[f64], samples: &[f64]) -> f64 {
        let Some((w0, w1)) = self.time_window(f.bbox(), y) else {
            return 0.0;
        };
        let mut best: f64 = 0.0;
        for &t in samples {
            if t >= w0 && t <= w1 {
                best = best.max(self.average_unchecked(f, t, y).abs());
            }
        }
        if self.refinement > 0 && !samples.is_empty() {
            let a = w0.max(samples[0]);
            let b = w1.min(samples[samples.len() - 1]);
            if a <= b {
                for i in 0..self.refinement {
                    let t = a + (b - a) * (i as f64 + 0.5) / self.refinement as f64;
                    best = best.max(self.average_unchecked(f, t, y).abs());
                }
            }
        }
        best
    }

    /// `max_t |A_t f(y)|` over a dense sampling of `[1, 2]`.
    pub fn local_max(&self, f: &GridFunction, y: &[f64], ts: &TimeSampling) -> Result<f64> {
        self.check(f, y)?;
        if ts.is_empty() {
            return Err(invalid("empty time sampling"));
        }
        Ok(self.sup_over(f, y, ts.samples()))
    }

    /// Maximum over an arbitrary sampling, dyadic or dense.
    pub fn sampled_max(&self, f: &GridFunction, y: &[f64], ts: &TimeSampling) -> Result<f64> {
        self.local_max(f, y, ts)
    }

    /// `sup_k max_{τ ∈ block k} |A_t f(y)|`.
    pub fn global_max(
        &self,
        f: &GridFunction,
        y: &[f64],
        k_min: i32,
        k_max: i32,
        per_block: usize,
    ) -> Result<f64> {
        let ts = self.dyadic_sampling(k_min, k_max, per_block)?;
        self.local_max(f, y, &ts)
    }

    /// The maximal function sampled at the cell centers of `eval_box`.
    pub fn maximal_grid(
        &self,
        f: &GridFunction,
        ts: &TimeSampling,
        eval_box: &MeasuredBox,
        eval_resolution: &[usize],
        exec: Execution,
    ) -> Result<GridFunction> {
        let template = GridFunction::zeros(eval_box.clone(), eval_resolution.to_vec())?;
        self.check(f, &template.center(0))?;
        if ts.is_empty() {
            return Err(invalid("empty time sampling"));
        }
        let values = exec.map_range(template.len(), |lin| {
            self.sup_over(f, &template.center(lin), ts.samples())
        });
        GridFunction::new(eval_box.clone(), eval_resolution.to_vec(), values)
    }
}

/// Set of `σ > 0` with `σ·[g0, g1] ∩ [j0, j1] ≠ ∅`.
fn scale_window(g0: f64, g1: f64, j0: f64, j1: f64) -> Option<(f64, f64)> {
    let mut lo: f64 = 0.0;
    let mut hi = f64::INFINITY;
    // σ·g1 ≥ j0
    if g1 > 0.0 {
        lo = lo.max(j0 / g1);
    } else if g1 == 0.0 {
        if j0 > 0.0 {
            return None;
        }
    } else if j0 >= 0.0 {
        return None;
    } else {
        hi = hi.min(j0 / g1);
    }
    // σ·g0 ≤ j1
    if g0 < 0.0 {
        lo = lo.max(j1 / g0);
    } else if g0 == 0.0 {
        if j1 < 0.0 {
            return None;
        }
    } else if j1 <= 0.0 {
        return None;
    } else {
        hi = hi.min(j1 / g0);
    }
    (lo <= hi).then_some((lo, hi))
}

/// Clips `support` to where `y − s·x` stays in the axis range and adds the
/// crossings of center lines.
fn linear_breaks(y: f64, s: f64, axis: Axis, support: (f64, f64)) -> Option<Vec<f64>> {
    let a = support.0.max((y - axis.hi) / s);
    let b = support.1.min((y - axis.lo) / s);
    if !(a < b) {
        return None;
    }
    let mut out = vec![a];
    // y − s·x is decreasing in x, so walk centers from high to low.
    for i in axis.centers_between(y - s * b, y - s * a).rev() {
        let x = (y - axis.center(i)) / s;
        if x > a && x < b {
            out.push(x);
        }
    }
    out.push(b);
    Some(out)
}

/// Adds the points of `(a, b)` where `y − s·h(x)` crosses a center line or
/// a box edge.
#[allow(clippy::too_many_arguments)]
fn profile_breaks(
    y: f64,
    s: f64,
    axis: Axis,
    h: &Poly,
    dh: &Poly,
    critical: &[f64],
    a: f64,
    b: f64,
    out: &mut Vec<f64>,
) {
    let mut knots = vec![a];
    knots.extend(critical.iter().copied().filter(|&c| c > a && c < b));
    knots.push(b);
    out.extend_from_slice(&knots[1..knots.len() - 1]);
    for w in knots.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (hu, hv) = (h.eval(u), h.eval(v));
        let (pu, pv) = (y - s * hu, y - s * hv);
        let (pmin, pmax) = if pu < pv { (pu, pv) } else { (pv, pu) };
        let mut levels: Vec<f64> = axis
            .centers_between(pmin, pmax)
            .map(|i| axis.center(i))
            .collect();
        for edge in [axis.lo, axis.hi] {
            if edge > pmin && edge < pmax {
                levels.push(edge);
            }
        }
        for level in levels {
            out.push(solve_monotone(h, dh, (y - level) / s, u, v, hu, hv));
        }
    }
}

/// Root of `h(x) = target` on `[u, v]` where `h` is monotone and brackets
/// the target; safeguarded Newton.
fn solve_monotone(h: &Poly, dh: &Poly, target: f64, u: f64, v: f64, hu: f64, hv: f64) -> f64 {
    let increasing = hv > hu;
    let (mut lo, mut hi) = (u, v);
    let mut x = if hv != hu {
        u + (v - u) * (target - hu) / (hv - hu)
    } else {
        0.5 * (u + v)
    };
    x = x.clamp(u, v);
    for _ in 0..100 {
        let fx = h.eval(x) - target;
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let d = dh.eval(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Splits every gap longer than `max_len` into equal pieces.
fn refine(breaks: &[f64], max_len: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len() * 2);
    out.push(breaks[0]);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / max_len).ceil().max(1.0) as usize;
        for i in 1..n {
            out.push(a + (b - a) * i as f64 / n as f64);
        }
        out.push(b);
    }
    out
}

/// `A_t f(y)` with default settings.
pub fn average(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    t: f64,
    y: &[f64],
) -> Result<f64> {
    Averager::new(spec, cutoff)?.average(f, t, y)
}

/// `max_{t ∈ ts} |A_t f(y)|` for a dense sampling of `[1, 2]`.
pub fn local_max(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    y: &[f64],
    ts: &TimeSampling,
) -> Result<f64> {
    if !matches!(ts.mode(), SamplingMode::Dense { .. }) {
        return Err(invalid(
            "local maximal function needs a dense sampling of [1, 2]",
        ));
    }
    Averager::new(spec, cutoff)?.local_max(f, y, ts)
}

/// Supremum over dyadic blocks `k_min..=k_max`, `per_block` steps each.
pub fn global_max(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    y: &[f64],
    k_min: i32,
    k_max: i32,
    per_block: usize,
) -> Result<f64> {
    Averager::new(spec, cutoff)?.global_max(f, y, k_min, k_max, per_block)
}

/// `‖local_max f‖_{L^q(eval box)} / ‖f‖_p`.
#[allow(clippy::too_many_arguments)]
pub fn norm_ratio(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    p: f64,
    q: f64,
    ts: &TimeSampling,
    eval_box: &MeasuredBox,
    eval_resolution: &[usize],
    exec: Execution,
) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(invalid(format!("L^q norm needs q >= 1, got {q}")));
    }
    let denom = lp_norm(f, p)?;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let m = Averager::new(spec, cutoff)?.maximal_grid(f, ts, eval_box, eval_resolution, exec)?;
    Ok(lp_norm(&m, q)? / denom)
}

/// `‖sup_t |A_t f(· + z) − A_t f(·)|‖_{L^q(eval box)}`.
#[allow(clippy::too_many_arguments)]
pub fn continuity_diff_norm(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    z: &[f64],
    q: f64,
    ts: &TimeSampling,
    eval_box: &MeasuredBox,
    eval_resolution: &[usize],
    exec: Execution,
) -> Result<f64> {
    let op = Averager::new(spec, cutoff)?;
    check_dim(spec.ambient_dim(), z.len())?;
    let template = GridFunction::zeros(eval_box.clone(), eval_resolution.to_vec())?;
    op.check(f, &template.center(0))?;
    if ts.is_empty() {
        return Err(invalid("empty time sampling"));
    }
    let values = exec.map_range(template.len(), |lin| {
        let y = template.center(lin);
        let yz: Vec<f64> = y.iter().zip(z).map(|(a, b)| a + b).collect();
        let w0 = op.time_window(f.bbox(), &y);
        let w1 = op.time_window(f.bbox(), &yz);
        let mut best: f64 = 0.0;
        for &t in ts.samples() {
            let live = |w: Option<(f64, f64)>| w.is_some_and(|(a, b)| t >= a && t <= b);
            if !live(w0) && !live(w1) {
                continue;
            }
            let d = op.average_unchecked(f, t, &yz) - op.average_unchecked(f, t, &y);
            best = best.max(d.abs());
        }
        best
    });
    lp_norm(
        &GridFunction::new(eval_box.clone(), eval_resolution.to_vec(), values)?,
        q,
    )
}

/// Checks `|∫ f(y − Γ(x)) η(x) dx| ≤ local_max f(y)` for the homogeneous
/// curve, computing the left side with an independent adaptive rule.
pub fn transference_lower(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    y: &[f64],
    ts: &TimeSampling,
) -> Result<bool> {
    if spec.family() != Family::HomogeneousCurve {
        return Err(invalid("transference applies to the homogeneous curve"));
    }
    let op = Averager::new(spec, cutoff)?;
    op.check(f, y)?;
    let (lo, hi) = cutoff.support_intervals()[0];
    let h = spec.profile();
    let cells = f.resolution().iter().max().copied().unwrap_or(1);
    let tol = 1e-10 * (1.0 + f.max_abs());
    let (single, err) = integrate_real(
        |x| cutoff.eval(&[x]) * f.eval2(y[0] - x, y[1] - h.eval(x)),
        lo,
        hi,
        4 * cells,
        tol,
        1 << 20,
    )?;
    let sup = op.local_max(f, y, ts)?;
    Ok(single.abs() <= sup + err + 1e-8 * (1.0 + sup))
}
