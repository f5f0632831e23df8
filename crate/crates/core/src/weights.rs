//! Weights on δ-cubes: Muckenhoupt and reverse Hölder characteristics, the
//! interpolation exponent α, and weighted maximal-norm ratios.
//!
//! The supremum over all δ-cubes is replaced by a finite family of boxes
//! inside the weight's box. [`dyadic_family`] gives grid-positioned cubes,
//! [`sliding_family`] gives every cell-aligned translate.

use std::path::Path;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::averaging::{weighted_lp_norm, Averager, GridFunction, TimeSampling};
use crate::delta_grid::{
    cube_side_lengths, grid_cube_containing, DeltaCube, Dilation, MeasuredBox, MultiIndex, Shift,
};
use crate::error::{check_dim, invalid, Error, Result};
use crate::exec::Execution;
use crate::geometry::{Cutoff, SurfaceSpec};

/// A strictly positive function on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    data: GridFunction,
    dilation: Dilation,
}

impl Weight {
    pub fn new(data: GridFunction, dilation: Dilation) -> Result<Self> {
        check_dim(dilation.dim(), data.dim())?;
        if let Some(v) = data
            .values()
            .iter()
            .find(|v| !(**v > 0.0) || !v.is_finite())
        {
            return Err(invalid(format!(
                "weights must be positive and finite, found {v}"
            )));
        }
        Ok(Weight { data, dilation })
    }

    pub fn constant(
        bbox: MeasuredBox,
        resolution: Vec<usize>,
        c: f64,
        dilation: Dilation,
    ) -> Result<Self> {
        Weight::new(GridFunction::constant(bbox, resolution, c)?, dilation)
    }

    /// `low` on the half of the box below the midpoint of `axis`, `high` on
    /// the other half.
    pub fn two_valued_split(
        bbox: MeasuredBox,
        resolution: Vec<usize>,
        axis: usize,
        low: f64,
        high: f64,
        dilation: Dilation,
    ) -> Result<Self> {
        if axis >= bbox.dim() {
            return Err(invalid("split axis out of range"));
        }
        let mid = 0.5 * (bbox.lower()[axis] + bbox.upper()[axis]);
        let data =
            GridFunction::from_fn(bbox, resolution, |x| if x[axis] < mid { low } else { high })?;
        Weight::new(data, dilation)
    }

    /// `|x|^γ` clipped to `[1/4, 4]`.
    pub fn clipped_power(
        bbox: MeasuredBox,
        resolution: Vec<usize>,
        gamma: f64,
        dilation: Dilation,
    ) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(invalid("power must be finite"));
        }
        let data = GridFunction::from_fn(bbox, resolution, |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            r.powf(gamma).clamp(0.25, 4.0)
        })?;
        Weight::new(data, dilation)
    }

    pub fn read_binary<P: AsRef<Path>>(path: P, dilation: Dilation) -> Result<Self> {
        Weight::new(GridFunction::read_binary(path)?, dilation)
    }

    pub fn data(&self) -> &GridFunction {
        &self.data
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    /// `cω`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Weight::new(self.data.map(|v| v * c), self.dilation.clone())
    }

    /// Mean of `ω^power` over the cells whose centers lie in `b`.
    fn mean_power(&self, b: &MeasuredBox, power: f64) -> Result<f64> {
        let ranges = self
            .data
            .cell_range(b)
            .ok_or_else(|| invalid("cube contains no weight cell"))?;
        let cells = self.data.cells_in(&ranges);
        let values = self.data.values();
        let sum: f64 = if power == 1.0 {
            cells.iter().map(|&k| values[k]).sum()
        } else {
            cells.iter().map(|&k| values[k].powf(power)).sum()
        };
        Ok(sum / cells.len() as f64)
    }
}

fn inside(b: &MeasuredBox, outer: &MeasuredBox) -> bool {
    (0..b.dim()).all(|j| {
        let tol = 1e-12 * outer.sides()[j];
        b.lower()[j] >= outer.lower()[j] - tol && b.upper()[j] <= outer.upper()[j] + tol
    })
}

fn check_window(k_min: i32, k_max: i32) -> Result<()> {
    if k_max < k_min {
        return Err(invalid("empty scale window"));
    }
    Ok(())
}

/// Realized boxes of the cubes of the given grids at scales
/// `k_min..=k_max` that lie inside the weight's box.
pub fn dyadic_family(
    w: &Weight,
    k_min: i32,
    k_max: i32,
    shifts: &[Vec<Shift>],
) -> Result<Vec<MeasuredBox>> {
    check_window(k_min, k_max)?;
    let d = w.dilation();
    let bbox = w.data().bbox();
    let mut out = Vec::new();
    for k in k_min..=k_max {
        for shift in shifts {
            check_dim(d.dim(), shift.len())?;
            let lo = grid_cube_containing(bbox.lower(), k, shift, d)?;
            let hi = grid_cube_containing(bbox.upper(), k, shift, d)?;
            let counts: Vec<i64> = lo
                .position
                .iter()
                .zip(&hi.position)
                .map(|(a, b)| b - a + 1)
                .collect();
            for off in MultiIndex::new(&counts) {
                let position = lo.position.iter().zip(&off).map(|(a, o)| a + o).collect();
                let b = DeltaCube::new(k, position, shift.clone())?.realized_box(d);
                if inside(&b, bbox) && w.data().cell_range(&b).is_some() {
                    out.push(b);
                }
            }
        }
    }
    Ok(out)
}

/// Every δ-cube of scale `k_min..=k_max` with cell-aligned corners inside
/// the weight's box. Scales whose sides are not whole numbers of cells are
/// skipped.
pub fn sliding_family(w: &Weight, k_min: i32, k_max: i32) -> Result<Vec<MeasuredBox>> {
    check_window(k_min, k_max)?;
    let grid = w.data();
    let cell = grid.cell_sides();
    let bbox = grid.bbox();
    let mut out = Vec::new();
    'scales: for k in k_min..=k_max {
        let sides = cube_side_lengths(k, w.dilation());
        let mut span = Vec::with_capacity(sides.len());
        for j in 0..sides.len() {
            let n = sides[j] / cell[j];
            if n.fract() != 0.0 || n < 1.0 || n as usize > grid.resolution()[j] {
                continue 'scales;
            }
            span.push(n as usize);
        }
        let counts: Vec<i64> = span
            .iter()
            .zip(grid.resolution())
            .map(|(s, r)| (r - s + 1) as i64)
            .collect();
        for off in MultiIndex::new(&counts) {
            let lower: Vec<f64> = (0..sides.len())
                .map(|j| bbox.lower()[j] + off[j] as f64 * cell[j])
                .collect();
            let upper: Vec<f64> = (0..sides.len())
                .map(|j| bbox.lower()[j] + (off[j] as usize + span[j]) as f64 * cell[j])
                .collect();
            out.push(MeasuredBox::new(lower, upper)?);
        }
    }
    Ok(out)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid(format!("characteristic needs 1 < p < ∞, got {p}")));
    }
    Ok(())
}

fn sup_over<F>(cubes: &[MeasuredBox], exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&MeasuredBox) -> Result<f64> + Sync + Send,
{
    if cubes.is_empty() {
        return Err(invalid("empty cube family"));
    }
    let values = exec.try_map_range(cubes.len(), |i| f(&cubes[i]))?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `max_Q ⟨ω⟩_Q ⟨ω^{1−p'}⟩_Q^{p−1}` over the family.
pub fn ap_characteristic(
    w: &Weight,
    p: f64,
    cubes: &[MeasuredBox],
    exec: Execution,
) -> Result<f64> {
    check_p(p)?;
    let dual_power = 1.0 - p / (p - 1.0);
    sup_over(cubes, exec, |b| {
        Ok(w.mean_power(b, 1.0)? * w.mean_power(b, dual_power)?.powf(p - 1.0))
    })
}

/// `max_Q ⟨ω⟩_{Q,p} / ⟨ω⟩_Q` over the family.
pub fn rh_characteristic(
    w: &Weight,
    p: f64,
    cubes: &[MeasuredBox],
    exec: Execution,
) -> Result<f64> {
    check_p(p)?;
    sup_over(cubes, exec, |b| {
        Ok(w.mean_power(b, p)?.powf(1.0 / p) / w.mean_power(b, 1.0)?)
    })
}

/// `α = max(1/(r − p), (q − 1)/(q − r))` for `p < r < q`.
pub fn alpha_exponent(p: f64, q: f64, r: f64) -> Result<f64> {
    if !(p < r && r < q) {
        return Err(invalid(format!(
            "need p < r < q, got p = {p}, r = {r}, q = {q}"
        )));
    }
    Ok((1.0 / (r - p)).max((q - 1.0) / (q - r)))
}

/// [`alpha_exponent`] in exact arithmetic.
pub fn alpha_exponent_exact(p: Rational64, q: Rational64, r: Rational64) -> Result<Rational64> {
    if !(p < r && r < q) {
        return Err(invalid(format!(
            "need p < r < q, got p = {p}, r = {r}, q = {q}"
        )));
    }
    let first = (r - p).recip();
    let second = (q - Rational64::from_integer(1)) / (q - r);
    Ok(if first >= second { first } else { second })
}

/// `([ω]_{A_{r/p}} [ω]_{RH_{(q/r)'}})^α`, the factor by which the weighted
/// maximal bound may exceed the unweighted one.
pub fn characteristic_bound(
    w: &Weight,
    p: f64,
    q: f64,
    r: f64,
    cubes: &[MeasuredBox],
    exec: Execution,
) -> Result<f64> {
    let alpha = alpha_exponent(p, q, r)?;
    let ap = ap_characteristic(w, r / p, cubes, exec)?;
    let rh = rh_characteristic(w, q / (q - r), cubes, exec)?;
    Ok((ap * rh).powf(alpha))
}

/// `‖M f‖_{L^r(ω)} / ‖f‖_{L^r(ω)}` with the maximal function sampled on
/// the weight's grid.
#[allow(clippy::too_many_arguments)]
pub fn weighted_norm_ratio(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    w: &Weight,
    r: f64,
    ts: &TimeSampling,
    exec: Execution,
) -> Result<f64> {
    let denom = weighted_lp_norm(f, w.data(), r)?;
    if denom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let m = Averager::new(spec, cutoff)?.maximal_grid(f, ts, f.bbox(), f.resolution(), exec)?;
    Ok(weighted_lp_norm(&m, w.data(), r)? / denom)
}

/// Summary of one weight against one cube family, as reported by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub p: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub cubes: usize,
    pub ap: f64,
    pub rh: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta_grid::all_shifts;

    fn unit_box() -> MeasuredBox {
        MeasuredBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_weights_have_unit_characteristics() {
        let d = Dilation::isotropic(2);
        let one = Weight::constant(unit_box(), vec![8, 8], 1.0, d.clone()).unwrap();
        let fam = dyadic_family(&one, -3, 0, &all_shifts(2)).unwrap();
        assert!(!fam.is_empty());
        for p in [1.5, 2.0, 3.0] {
            assert_eq!(
                ap_characteristic(&one, p, &fam, Execution::Sequential).unwrap(),
                1.0
            );
            assert_eq!(
                rh_characteristic(&one, p, &fam, Execution::Sequential).unwrap(),
                1.0
            );
        }
        let seven = one.scaled(7.0).unwrap();
        assert!(
            (ap_characteristic(&seven, 2.5, &fam, Execution::Sequential).unwrap() - 1.0).abs()
                < 1e-14
        );
    }

    #[test]
    fn split_weight_on_the_whole_box() {
        let d = Dilation::isotropic(2);
        let w = Weight::two_valued_split(unit_box(), vec![4, 4], 0, 1.0, 4.0, d).unwrap();
        let whole = vec![unit_box()];
        let ap = ap_characteristic(&w, 2.0, &whole, Execution::Sequential).unwrap();
        assert!((ap - 1.5625).abs() < 1e-12);
        let rh = rh_characteristic(&w, 2.0, &whole, Execution::Sequential).unwrap();
        assert!((rh - 8.5f64.sqrt() / 2.5).abs() < 1e-12);
    }

    #[test]
    fn sliding_family_contains_dyadic_family() {
        let d = Dilation::isotropic(2);
        let w = Weight::constant(unit_box(), vec![8, 8], 1.0, d).unwrap();
        let slide = sliding_family(&w, -3, 0).unwrap();
        assert_eq!(slide.len(), 64 + 49 + 25 + 1);
        let dy = dyadic_family(&w, -3, 0, &[vec![Shift::Zero; 2]]).unwrap();
        assert_eq!(dy.len(), 64 + 16 + 4 + 1);
        assert!(dy.iter().all(|b| slide.contains(b)));
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_exponent(2.0, 6.0, 3.0).unwrap(), 5.0 / 3.0);
        assert_eq!(alpha_exponent(1.0, 3.0, 2.0).unwrap(), 2.0);
        assert_eq!(alpha_exponent(2.0, 4.0, 3.0).unwrap(), 3.0);
        let r = |n, d| Rational64::new(n, d);
        assert_eq!(
            alpha_exponent_exact(r(2, 1), r(6, 1), r(3, 1)).unwrap(),
            r(5, 3)
        );
        assert!(alpha_exponent(3.0, 4.0, 2.0).is_err());
    }

    #[test]
    fn nonpositive_weights_are_rejected() {
        let d = Dilation::isotropic(2);
        assert!(Weight::constant(unit_box(), vec![2, 2], 0.0, d.clone()).is_err());
        assert!(Weight::constant(unit_box(), vec![2, 2], -1.0, d).is_err());
    }
}
