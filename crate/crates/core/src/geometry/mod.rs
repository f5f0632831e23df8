//! Curve and surface families, cutoffs, and Fourier transforms of the
//! measures they carry.
//!
//! Every family is a graph over its parameters whose last coordinate is a
//! polynomial `h` of the last parameter:
//!
//! | family | point | `h(s)` |
//! |---|---|---|
//! | finite-type curve | `(x, h(x))` | `c + s^d φ(s)` |
//! | homogeneous curve | `(x, h(x))` | `s^d` |
//! | perturbed homogeneous curve | `(x, h(x))` | `s^d φ(s)` |
//! | non-vanishing surface | `(x₁, x₂, h(x₂))` | `s² φ(s)` |
//! | finite-type surface | `(x₁, x₂, h(x₂))` | `c + s^d φ(s)` |
//! | degenerate surface | `(x₁, x₂, h(x₂))` | `s^d φ(s)` |

pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::delta_grid::{normalize_dilation, Dilation, Exponent};
use crate::error::{check_dim, invalid, Error, Result};
use crate::exec::Execution;
use crate::fit::{log_log_slope, LineFit};
use quadrature::{gauss_legendre, integrate_complex, integrate_real};

/// Default radius of the parameter neighbourhood around the origin.
pub const DEFAULT_SUPPORT_RADIUS: f64 = 0.125;

const MAX_PANELS: usize = 400_000;

/// A real polynomial in one variable, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }

    /// Points in `(a, b)` where the polynomial changes sign, located by a
    /// sign scan on `samples` sub-intervals refined with bisection.
    pub fn sign_changes(&self, a: f64, b: f64, samples: usize) -> Vec<f64> {
        let mut roots = Vec::new();
        let n = samples.max(1);
        let mut x0 = a;
        let mut f0 = self.eval(a);
        for i in 1..=n {
            let x1 = if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            };
            let f1 = self.eval(x1);
            if f0 == 0.0 && x0 > a {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut hi, mut flo) = (x0, x1, f0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = self.eval(mid);
                    if (fm < 0.0) == (flo < 0.0) && fm != 0.0 {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    /// Exact range over `[a, b]`, given the critical points inside it.
    pub fn range_with_critical(&self, a: f64, b: f64, critical: &[f64]) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        for &c in critical.iter().filter(|&&c| c > a && c < b) {
            let v = self.eval(c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// The family of a curve or surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    FiniteTypeCurve { c: f64 },
    HomogeneousCurve,
    PerturbedHomogeneousCurve,
    NonVanishingSurface,
    FiniteTypeSurface { c: f64 },
    DegenerateSurface,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::FiniteTypeCurve { .. } => "finite_type_curve",
            Family::HomogeneousCurve => "homogeneous_curve",
            Family::PerturbedHomogeneousCurve => "perturbed_homogeneous_curve",
            Family::NonVanishingSurface => "non_vanishing_surface",
            Family::FiniteTypeSurface { .. } => "finite_type_surface",
            Family::DegenerateSurface => "degenerate_surface",
        }
    }

    pub fn from_name(name: &str, c: f64) -> Result<Family> {
        Ok(match name {
            "finite_type_curve" => Family::FiniteTypeCurve { c },
            "homogeneous_curve" => Family::HomogeneousCurve,
            "perturbed_homogeneous_curve" => Family::PerturbedHomogeneousCurve,
            "non_vanishing_surface" => Family::NonVanishingSurface,
            "finite_type_surface" => Family::FiniteTypeSurface { c },
            "degenerate_surface" => Family::DegenerateSurface,
            other => return Err(invalid(format!("unknown family {other:?}"))),
        })
    }

    pub fn offset(&self) -> f64 {
        match self {
            Family::FiniteTypeCurve { c } | Family::FiniteTypeSurface { c } => *c,
            _ => 0.0,
        }
    }

    pub fn is_curve(&self) -> bool {
        matches!(
            self,
            Family::FiniteTypeCurve { .. }
                | Family::HomogeneousCurve
                | Family::PerturbedHomogeneousCurve
        )
    }

    pub fn param_dim(&self) -> usize {
        if self.is_curve() {
            1
        } else {
            2
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.param_dim() + 1
    }
}

/// Serialized form of a [`SurfaceSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub family: String,
    pub d: u32,
    pub m: u32,
    #[serde(default)]
    pub c: f64,
    pub phi_coeffs: Vec<f64>,
    pub exponents: Vec<f64>,
    pub support_radius: f64,
}

/// A validated curve or surface together with its dilation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecDocument", into = "SpecDocument")]
pub struct SurfaceSpec {
    family: Family,
    d: u32,
    m: u32,
    phi: Vec<f64>,
    dilation: Dilation,
    support_radius: f64,
    profile: Poly,
    profile_slope: Poly,
}

fn exponents_equal(a: &Exponent, b: f64) -> bool {
    match a {
        Exponent::Rational(r) => {
            let v = *r.numer() as f64 / *r.denom() as f64;
            v == b
        }
        Exponent::Real(x) => (x - b).abs() <= 1e-12 * b.abs().max(1.0),
    }
}

impl SurfaceSpec {
    pub fn new(
        family: Family,
        d: u32,
        m: u32,
        phi: Vec<f64>,
        dilation: Dilation,
        support_radius: f64,
    ) -> Result<Self> {
        if d < 2 {
            return Err(invalid("type order d must be at least 2"));
        }
        if m < 1 {
            return Err(invalid("perturbation order m must be at least 1"));
        }
        if !(support_radius > 0.0) || !support_radius.is_finite() {
            return Err(invalid("support radius must be positive"));
        }
        check_dim(family.ambient_dim(), dilation.dim())?;
        if phi.is_empty() || phi[0] == 0.0 || phi.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phi must have a finite, non-zero constant term"));
        }
        if phi.len() > m as usize + 5 {
            return Err(invalid(format!(
                "phi is truncated at degree m+4 = {}",
                m + 4
            )));
        }
        if let Some(first) = phi.iter().skip(1).position(|c| *c != 0.0) {
            if first + 1 != m as usize {
                return Err(invalid(format!(
                    "phi's first non-constant term has degree {}, expected m = {m}",
                    first + 1
                )));
            }
        }
        let b = dilation.normalized();
        match family {
            Family::HomogeneousCurve => {
                if !(exponents_equal(&b[0], 1.0) && exponents_equal(&b[1], d as f64)) {
                    return Err(invalid("homogeneous curve needs the dilation (t, t^d)"));
                }
            }
            Family::FiniteTypeCurve { .. } => {
                if exponents_equal(&b[1], d as f64 * b[0].value()) {
                    return Err(invalid("finite-type curve needs d*b1 != b2"));
                }
            }
            Family::DegenerateSurface => {
                if !exponents_equal(&b[2], d as f64 * b[1].value()) {
                    return Err(invalid("degenerate surface needs d*b2 = b3"));
                }
            }
            Family::NonVanishingSurface => {
                if d != 2 {
                    return Err(invalid("non-vanishing surface has type order 2"));
                }
            }
            _ => {}
        }
        let phi_used = if family == Family::HomogeneousCurve {
            vec![1.0]
        } else {
            phi.clone()
        };
        let mut h = vec![0.0; d as usize + phi_used.len()];
        h[0] = family.offset();
        for (i, c) in phi_used.iter().enumerate() {
            h[d as usize + i] += c;
        }
        let profile = Poly::new(h);
        let profile_slope = profile.derivative();
        Ok(SurfaceSpec {
            family,
            d,
            m,
            phi,
            dilation,
            support_radius,
            profile,
            profile_slope,
        })
    }

    /// `(x, x^d)` with dilation `(t, t^d)`.
    pub fn homogeneous_curve(d: u32, support_radius: f64) -> Result<Self> {
        let dil = normalize_dilation(&[1.0, d as f64])?;
        SurfaceSpec::new(
            Family::HomogeneousCurve,
            d,
            1,
            vec![1.0],
            dil,
            support_radius,
        )
    }

    /// `(x, x^d φ(x) + c)` with isotropic dilation.
    pub fn finite_type_curve(
        d: u32,
        c: f64,
        phi: Vec<f64>,
        m: u32,
        support_radius: f64,
    ) -> Result<Self> {
        SurfaceSpec::new(
            Family::FiniteTypeCurve { c },
            d,
            m,
            phi,
            Dilation::isotropic(2),
            support_radius,
        )
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn param_dim(&self) -> usize {
        self.family.param_dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.family.ambient_dim()
    }

    /// The polynomial `h` giving the last coordinate.
    pub fn profile(&self) -> &Poly {
        &self.profile
    }

    pub fn profile_slope(&self) -> &Poly {
        &self.profile_slope
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        let r = self.support_radius * (1.0 + 1e-12);
        x.iter().all(|v| v.abs() <= r)
    }

    /// The point `Γ(x)`.
    pub fn point(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.param_dim(), x.len())?;
        if !self.in_domain(x) {
            return Err(invalid(format!(
                "parameter {x:?} outside the truncation domain |x| <= {}",
                self.support_radius
            )));
        }
        let mut out = vec![0.0; self.ambient_dim()];
        self.point_into(x, &mut out);
        Ok(out)
    }

    /// `Γ(x)` without domain checks.
    #[inline]
    pub fn point_into(&self, x: &[f64], out: &mut [f64]) {
        let p = x.len();
        out[..p].copy_from_slice(x);
        out[p] = self.profile.eval(x[p - 1]);
    }

    fn check_cutoff(&self, cutoff: &Cutoff) -> Result<()> {
        check_dim(self.param_dim(), cutoff.center.len())?;
        let r = self.support_radius * (1.0 + 1e-12);
        for (lo, hi) in cutoff.support_intervals() {
            if lo < -r || hi > r {
                return Err(invalid(format!(
                    "cutoff support [{lo}, {hi}] leaves the truncation domain |x| <= {}",
                    self.support_radius
                )));
            }
        }
        Ok(())
    }
}

impl TryFrom<SpecDocument> for SurfaceSpec {
    type Error = Error;
    fn try_from(doc: SpecDocument) -> Result<Self> {
        let family = Family::from_name(&doc.family, doc.c)?;
        let dilation = normalize_dilation(&doc.exponents)?;
        SurfaceSpec::new(
            family,
            doc.d,
            doc.m,
            doc.phi_coeffs,
            dilation,
            doc.support_radius,
        )
    }
}

impl From<SurfaceSpec> for SpecDocument {
    fn from(s: SurfaceSpec) -> SpecDocument {
        SpecDocument {
            family: s.family.name().to_string(),
            d: s.d,
            m: s.m,
            c: s.family.offset(),
            phi_coeffs: s.phi,
            exponents: s.dilation.exponents().to_vec(),
            support_radius: s.support_radius,
        }
    }
}

/// `Γ(x)` for a spec, checked against its truncation domain.
pub fn surface_point(spec: &SurfaceSpec, x: &[f64]) -> Result<Vec<f64>> {
    spec.point(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// `exp(−1/(1−|u|²))` for `|u| < 1`, `u = (x − center)/radius`.
    SmoothBump,
    /// Indicator of the box `center ± radius`.
    Indicator,
}

/// The cutoff `η` on parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub profile: CutoffProfile,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Cutoff {
    pub fn new(profile: CutoffProfile, center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || center.is_empty() || center.len() > 2 {
            return Err(invalid(
                "cutoff needs a positive radius and a 1- or 2-dimensional center",
            ));
        }
        Ok(Cutoff {
            profile,
            center,
            radius,
        })
    }

    /// Smooth bump centered at the origin.
    pub fn bump(param_dim: usize, radius: f64) -> Result<Self> {
        Cutoff::new(CutoffProfile::SmoothBump, vec![0.0; param_dim], radius)
    }

    /// The indicator of `[0, 1]`.
    pub fn unit_interval() -> Self {
        Cutoff {
            profile: CutoffProfile::Indicator,
            center: vec![0.5],
            radius: 0.5,
        }
    }

    /// Smooth bump supported on `[lo, hi]`.
    pub fn bump_on(lo: f64, hi: f64) -> Result<Self> {
        Cutoff::new(
            CutoffProfile::SmoothBump,
            vec![0.5 * (lo + hi)],
            0.5 * (hi - lo),
        )
    }

    pub fn param_dim(&self) -> usize {
        self.center.len()
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.profile {
            CutoffProfile::SmoothBump => {
                let u2: f64 = x
                    .iter()
                    .zip(&self.center)
                    .map(|(v, c)| ((v - c) / self.radius).powi(2))
                    .sum();
                if u2 < 1.0 {
                    (-1.0 / (1.0 - u2)).exp()
                } else {
                    0.0
                }
            }
            CutoffProfile::Indicator => {
                let inside = x
                    .iter()
                    .zip(&self.center)
                    .all(|(v, c)| (v - c).abs() <= self.radius);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Per-axis support intervals.
    pub fn support_intervals(&self) -> Vec<(f64, f64)> {
        self.center
            .iter()
            .map(|c| (c - self.radius, c + self.radius))
            .collect()
    }

    /// `∫ η`.
    pub fn integral(&self) -> f64 {
        let (lo, hi) = self.support_intervals()[0];
        match (self.profile, self.param_dim()) {
            (CutoffProfile::Indicator, p) => (2.0 * self.radius).powi(p as i32),
            (CutoffProfile::SmoothBump, 1) => {
                integrate_real(|x| self.eval(&[x]), lo, hi, 8, 1e-14, 10_000)
                    .map(|r| r.0)
                    .unwrap_or(f64::NAN)
            }
            (CutoffProfile::SmoothBump, _) => {
                let (lo2, hi2) = self.support_intervals()[1];
                gauss_legendre(
                    |x1| gauss_legendre(|x2| self.eval(&[x1, x2]), lo2, hi2, 64),
                    lo,
                    hi,
                    64,
                )
            }
        }
    }
}

/// `∫ e^{−i ξ·Γ(x)} η(x) dx` by adaptive Gauss–Kronrod quadrature.
///
/// The initial panel count keeps the phase change per panel below π, so
/// each panel sees at most half an oscillation.
pub fn measure_fourier(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    xi: &[f64],
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    check_dim(spec.ambient_dim(), xi.len())?;
    spec.check_cutoff(cutoff)?;
    let support = cutoff.support_intervals();
    let (lo, hi) = support[support.len() - 1];
    let slope_bound = max_abs_on(spec.profile_slope(), lo, hi).max(1.0);
    let xi_norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let panels_for = |len: f64| {
        ((xi_norm * slope_bound * len / std::f64::consts::PI).ceil() as usize).max(1) + 1
    };
    let h = spec.profile();
    if spec.param_dim() == 1 {
        let f = |x: f64| {
            let phase = xi[0] * x + xi[1] * h.eval(x);
            Complex64::from_polar(cutoff.eval(&[x]), -phase)
        };
        return integrate_complex(f, lo, hi, panels_for(hi - lo), tol, MAX_PANELS).map(|q| q.value);
    }
    let (lo1, hi1) = support[0];
    let inner_tol = tol / (4.0 * (hi1 - lo1).max(1.0));
    let failure = std::cell::Cell::new(None);
    let outer = |x1: f64| {
        let inner = |x2: f64| {
            let phase = xi[0] * x1 + xi[1] * x2 + xi[2] * h.eval(x2);
            Complex64::from_polar(cutoff.eval(&[x1, x2]), -phase)
        };
        match integrate_complex(inner, lo, hi, panels_for(hi - lo), inner_tol, MAX_PANELS) {
            Ok(q) => q.value,
            Err(e) => {
                failure.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        }
    };
    let q = integrate_complex(outer, lo1, hi1, panels_for(hi1 - lo1), tol, MAX_PANELS / 16)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(q.value)
}

fn max_abs_on(p: &Poly, lo: f64, hi: f64) -> f64 {
    let crit = p.derivative().sign_changes(lo, hi, 256);
    let (a, b) = p.range_with_critical(lo, hi, &crit);
    a.abs().max(b.abs())
}

/// Unit normal of a curve at parameter `x0` (the direction whose phase is
/// stationary at `x0`).
pub fn normal_direction(spec: &SurfaceSpec, x0: f64) -> Result<Vec<f64>> {
    if spec.param_dim() != 1 {
        return Err(invalid("normal_direction is defined for curves"));
    }
    let s = spec.profile_slope().eval(x0);
    let n = (1.0 + s * s).sqrt();
    Ok(vec![-s / n, 1.0 / n])
}

/// `count` unit directions covering a half-circle (2D) or a hemisphere
/// (3D); conjugate symmetry covers the rest.
pub fn sample_directions(ambient_dim: usize, count: usize) -> Vec<Vec<f64>> {
    let count = count.max(1);
    if ambient_dim == 2 {
        (0..count)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|i| {
                let z = 1.0 - (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect()
    }
}

/// `|d̂μ(λω)|` for each `λ`.
pub fn decay_along(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    direction: &[f64],
    lambdas: &[f64],
    tol: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    exec.try_map_range(lambdas.len(), |i| {
        let xi: Vec<f64> = direction.iter().map(|w| w * lambdas[i]).collect();
        measure_fourier(spec, cutoff, &xi, tol).map(|v| v.norm())
    })
}

/// `max_ω |d̂μ(λω)|` over the supplied directions, for each `λ`.
pub fn worst_direction_decay(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    directions: &[Vec<f64>],
    lambdas: &[f64],
    tol: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    let nd = directions.len();
    let values = exec.try_map_range(lambdas.len() * nd, |idx| {
        let (li, di) = (idx / nd, idx % nd);
        let xi: Vec<f64> = directions[di].iter().map(|w| w * lambdas[li]).collect();
        measure_fourier(spec, cutoff, &xi, tol).map(|v| v.norm())
    })?;
    Ok(values
        .chunks(nd)
        .map(|c| c.iter().cloned().fold(0.0, f64::max))
        .collect())
}

/// Least-squares slope of `log |d̂μ|` against `log λ`.
pub fn decay_slope(lambdas: &[f64], magnitudes: &[f64]) -> Result<LineFit> {
    log_log_slope(lambdas, magnitudes)
}

/// The critical point of `x ↦ −s x + x^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub x: f64,
    /// Whether `x` lies in the support `[1, 2]`, i.e. `s ∈ [d, d·2^{d−1}]`.
    pub in_support: bool,
}

/// `x_c = (s/d)^{1/(d−1)}`.
pub fn stationary_point(s: f64, d: u32) -> Result<StationaryPoint> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("stationary point needs s > 0"));
    }
    if d < 2 {
        return Err(invalid("stationary point needs d >= 2"));
    }
    let df = d as f64;
    let x = (s / df).powf(1.0 / (df - 1.0));
    let in_support = s >= df && s <= df * 2f64.powi(d as i32 - 1);
    Ok(StationaryPoint { x, in_support })
}

/// The stationary phase value `(d−1) t ξ₂ (−ξ₁/(d ξ₂))^{d/(d−1)}`.
pub fn phase_value(xi: &[f64], t: f64, d: u32) -> Result<f64> {
    check_dim(2, xi.len())?;
    if d < 2 {
        return Err(invalid("phase value needs d >= 2"));
    }
    if !(t > 0.0) {
        return Err(invalid("phase value needs t > 0"));
    }
    if xi[1] == 0.0 || !(-xi[0] / xi[1] > 0.0) {
        return Err(invalid("phase value needs xi2 != 0 and -xi1/xi2 > 0"));
    }
    let df = d as f64;
    Ok((df - 1.0) * t * xi[1] * (-xi[0] / (df * xi[1])).powf(df / (df - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta_grid::normalize_dilation;

    #[test]
    fn surface_point_examples() {
        let s = SurfaceSpec::homogeneous_curve(2, 2.0).unwrap();
        assert_eq!(surface_point(&s, &[1.0]).unwrap(), vec![1.0, 1.0]);
        let s = SurfaceSpec::finite_type_curve(2, 0.0, vec![0.5], 1, 2.0).unwrap();
        assert_eq!(surface_point(&s, &[2.0]).unwrap(), vec![2.0, 2.0]);
        let s = SurfaceSpec::finite_type_curve(2, 5.0, vec![1.0], 1, 1.0).unwrap();
        assert_eq!(surface_point(&s, &[0.0]).unwrap(), vec![0.0, 5.0]);
        assert!(surface_point(&s, &[1.5]).is_err());
        let dil = normalize_dilation(&[1.0, 1.0, 1.0]).unwrap();
        let s = SurfaceSpec::new(
            Family::FiniteTypeSurface { c: 1.0 },
            3,
            1,
            vec![2.0],
            dil,
            1.0,
        )
        .unwrap();
        assert_eq!(
            surface_point(&s, &[0.25, 0.5]).unwrap(),
            vec![0.25, 0.5, 1.25]
        );
    }

    #[test]
    fn phi_jet_conditions() {
        let dil = normalize_dilation(&[1.0, 2.0]).unwrap();
        let mk = |phi: Vec<f64>, m| {
            SurfaceSpec::new(
                Family::PerturbedHomogeneousCurve,
                2,
                m,
                phi,
                dil.clone(),
                1.0,
            )
        };
        assert!(mk(vec![1.0, 0.0, 3.0], 2).is_ok());
        assert!(mk(vec![1.0, 0.0, 3.0], 1).is_err());
        assert!(mk(vec![0.0, 1.0], 1).is_err());
        assert!(mk(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 1).is_err());
        assert!(mk(vec![1.0], 3).is_ok());
    }

    #[test]
    fn family_dilation_consistency() {
        let bad = normalize_dilation(&[1.0, 3.0]).unwrap();
        assert!(
            SurfaceSpec::new(Family::HomogeneousCurve, 2, 1, vec![1.0], bad.clone(), 1.0).is_err()
        );
        assert!(SurfaceSpec::new(
            Family::FiniteTypeCurve { c: 0.0 },
            3,
            1,
            vec![1.0],
            bad,
            1.0
        )
        .is_err());
        let ok = normalize_dilation(&[1.0, 1.0, 2.0]).unwrap();
        assert!(SurfaceSpec::new(Family::DegenerateSurface, 2, 1, vec![1.0], ok, 1.0).is_ok());
        let bad = normalize_dilation(&[1.0, 1.0, 3.0]).unwrap();
        assert!(SurfaceSpec::new(Family::DegenerateSurface, 2, 1, vec![1.0], bad, 1.0).is_err());
    }

    #[test]
    fn spec_json_fields() {
        let s = SurfaceSpec::finite_type_curve(3, 0.5, vec![1.0, 0.0, 2.0], 2, 0.125).unwrap();
        let doc = SpecDocument::from(s.clone());
        assert_eq!(doc.family, "finite_type_curve");
        assert_eq!(doc.c, 0.5);
        assert_eq!(SurfaceSpec::try_from(doc).unwrap(), s);
    }

    #[test]
    fn zero_frequency_is_cutoff_integral() {
        let s = SurfaceSpec::homogeneous_curve(2, 1.0).unwrap();
        let c = Cutoff::bump(1, 1.0).unwrap();
        let v = measure_fourier(&s, &c, &[0.0, 0.0], 1e-12).unwrap();
        assert!((v.re - 0.443_993_816_168_079_4).abs() < 1e-10);
        assert!(v.im.abs() < 1e-14);
        assert!((c.integral() - v.re).abs() < 1e-10);
    }

    #[test]
    fn conjugate_symmetry() {
        let s = SurfaceSpec::finite_type_curve(3, 0.2, vec![1.0, 0.5], 1, 0.5).unwrap();
        let c = Cutoff::bump(1, 0.5).unwrap();
        let a = measure_fourier(&s, &c, &[3.0, -40.0], 1e-12).unwrap();
        let b = measure_fourier(&s, &c, &[-3.0, 40.0], 1e-12).unwrap();
        assert!((a - b.conj()).norm() < 1e-11);
    }

    #[test]
    fn stationary_point_examples() {
        assert_eq!(stationary_point(3.0, 3).unwrap().x, 1.0);
        let p = stationary_point(4.0, 2).unwrap();
        assert_eq!((p.x, p.in_support), (2.0, true));
        let p = stationary_point(0.75, 3).unwrap();
        assert_eq!((p.x, p.in_support), (0.5, false));
        assert!(stationary_point(0.0, 2).is_err());
        for &(s, d) in &[(2.5, 2u32), (7.0, 3), (20.0, 4)] {
            let x = stationary_point(s, d).unwrap().x;
            let deriv = -s + d as f64 * x.powi(d as i32 - 1);
            assert!(deriv.abs() < 1e-13 * s);
        }
    }

    #[test]
    fn phase_value_examples() {
        assert_eq!(phase_value(&[-2.0, 1.0], 1.0, 2).unwrap(), 1.0);
        assert_eq!(phase_value(&[-3.0, 1.0], 2.0, 3).unwrap(), 4.0);
        let a = phase_value(&[-1.3, 0.7], 1.5, 3).unwrap();
        let b = phase_value(&[-13.0, 7.0], 1.5, 3).unwrap();
        assert!((b - 10.0 * a).abs() < 1e-12 * b.abs());
        assert!(phase_value(&[1.0, 1.0], 1.0, 2).is_err());
        assert!(phase_value(&[1.0, 0.0], 1.0, 2).is_err());
    }

    #[test]
    fn poly_sign_changes() {
        let p = Poly::new(vec![0.0, -1.0, 0.0, 1.0]); // x^3 - x
        let r = p.sign_changes(-2.0, 2.0, 7);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 1.0).abs() < 1e-12 && r[1].abs() < 1e-12 && (r[2] - 1.0).abs() < 1e-12);
    }
}
