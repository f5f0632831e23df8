//! The seven experiments. Each one writes CSV tables and a JSON summary
//! to the output directory and returns the summary.

use clap::Args;
use curvmax_core::averaging::{
    continuity_diff_norm, lp_norm, norm_ratio, GridFunction, TimeSampling,
};
use curvmax_core::counterexamples::{measure_scaling, MeasureSettings, ScalingReport, Tag};
use curvmax_core::delta_grid::{all_shifts, enclosing_cube, MeasuredBox, Shift};
use curvmax_core::fit::{log_log_slope, LineFit};
use curvmax_core::geometry::{
    decay_along, decay_slope, measure_fourier, normal_direction, sample_directions,
    worst_direction_decay, Cutoff, SurfaceSpec,
};
use curvmax_core::regions::{
    boundary_polyline, compare_regions, ratio_f64, ExponentPoint, Region, RegionKind, Verdict,
};
use curvmax_core::sparse::{select_sparse, verify_sparse_domination, CubeRecord, DominationConfig};
use curvmax_core::weights::{
    alpha_exponent, ap_characteristic, characteristic_bound, dyadic_family, rh_characteristic,
    sliding_family, weighted_norm_ratio, CharacteristicReport, Weight,
};
use curvmax_core::Execution;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{parse_exponent, parse_pair, to_f64, SurfaceArgs};
use crate::output::{num, OutDir};
use crate::CliError;

/// Settings every experiment receives after merging.
pub struct Context {
    pub out: OutDir,
    pub seed: u64,
    pub exec: Execution,
}

fn square(r: f64) -> Result<MeasuredBox, CliError> {
    Ok(MeasuredBox::new(vec![-r, -r], vec![r, r])?)
}

/// Test data on `[-1, 1]²`: `indicator` of the middle square, a `bump`,
/// or seeded uniform `random` values.
fn test_data(
    kind: &str,
    resolution: usize,
    rng: &mut ChaCha8Rng,
) -> Result<GridFunction, CliError> {
    let b = square(1.0)?;
    let res = vec![resolution, resolution];
    Ok(match kind {
        "indicator" => GridFunction::from_fn(b, res, |x| {
            (x[0].abs() < 0.5 && x[1].abs() < 0.5) as u8 as f64
        })?,
        "bump" => GridFunction::from_fn(b, res, |x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0))?,
        "random" => {
            let values = (0..resolution * resolution)
                .map(|_| rng.gen_range(0.0..1.0))
                .collect();
            GridFunction::new(b, res, values)?
        }
        other => return Err(CliError::Config(format!("unknown data {other:?}"))),
    })
}

// regions ------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RegionsArgs {
    /// `delta0` … `delta3`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub d: Option<u32>,
    /// Region to compare against.
    #[arg(long)]
    pub compare: Option<String>,
    /// Type order of the compared region; defaults to `d`.
    #[arg(long)]
    pub compare_d: Option<u32>,
    /// Denominator of the rational cross-check grid.
    #[arg(long)]
    pub samples: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionsSummary {
    pub region: String,
    pub d: u32,
    pub vertices: Vec<ExponentPoint>,
    pub compare: Option<String>,
    pub verdict: Option<Verdict>,
    pub only_first: Option<ExponentPoint>,
    pub only_second: Option<ExponentPoint>,
}

pub fn regions(a: &RegionsArgs, ctx: &Context) -> Result<RegionsSummary, CliError> {
    let kind = RegionKind::parse(a.family.as_deref().unwrap_or("delta0"))?;
    let d = a.d.unwrap_or(2);
    let region = Region::named(kind, d)?;
    let mut rows = Vec::new();
    let mut push_boundary = |r: &Region| {
        for (i, v) in boundary_polyline(r).iter().enumerate() {
            rows.push(vec![
                r.name.clone(),
                i.to_string(),
                v.inv_p.to_string(),
                v.inv_q.to_string(),
                num(ratio_f64(v.inv_p)),
                num(ratio_f64(v.inv_q)),
            ]);
        }
    };
    push_boundary(&region);
    let mut summary = RegionsSummary {
        region: region.name.clone(),
        d,
        vertices: region.closure_vertices(),
        compare: None,
        verdict: None,
        only_first: None,
        only_second: None,
    };
    if let Some(other) = &a.compare {
        let other = Region::named(RegionKind::parse(other)?, a.compare_d.unwrap_or(d))?;
        push_boundary(&other);
        let c = compare_regions(&region, &other, a.samples.unwrap_or(60))?;
        if !c.scan_consistent {
            return Err(CliError::Numerical(
                "rational grid scan contradicts the exact comparison".into(),
            ));
        }
        summary.compare = Some(other.name.clone());
        summary.verdict = Some(c.verdict);
        summary.only_first = c.only_first;
        summary.only_second = c.only_second;
    }
    ctx.out.csv(
        "regions_boundary.csv",
        &[
            "region",
            "vertex",
            "inv_p",
            "inv_q",
            "inv_p_f64",
            "inv_q_f64",
        ],
        rows,
    )?;
    ctx.out.json("regions_summary.json", &summary)?;
    Ok(summary)
}

// fourier-decay ------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FourierArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceArgs,
    /// `worst` (maximum over sampled directions) or `normal`.
    #[arg(long)]
    pub direction: Option<String>,
    /// Base point of the normal direction.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Number of sampled directions for `worst`.
    #[arg(long)]
    pub directions: Option<usize>,
    /// λ runs over 2^lambda-min-exp … 2^lambda-max-exp.
    #[arg(long)]
    pub lambda_min_exp: Option<i32>,
    #[arg(long)]
    pub lambda_max_exp: Option<i32>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSummary {
    pub spec: SurfaceSpec,
    pub cutoff: Cutoff,
    pub direction: String,
    pub zero_frequency: f64,
    pub lambdas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub fit: LineFit,
}

pub fn fourier_decay(a: &FourierArgs, ctx: &Context) -> Result<FourierSummary, CliError> {
    let (spec, cutoff) = a.surface.resolve("homogeneous", 2)?;
    let tol = a.tol.unwrap_or(1e-10);
    let (lo, hi) = (
        a.lambda_min_exp.unwrap_or(4),
        a.lambda_max_exp.unwrap_or(10),
    );
    if hi - lo < 2 {
        return Err(CliError::Config(
            "the slope fit needs at least three values of λ".into(),
        ));
    }
    let lambdas: Vec<f64> = (lo..=hi).map(|e| 2f64.powi(e)).collect();
    let direction = a.direction.clone().unwrap_or_else(|| "worst".into());
    let magnitudes = match direction.as_str() {
        "worst" => {
            let dirs = sample_directions(spec.ambient_dim(), a.directions.unwrap_or(64));
            worst_direction_decay(&spec, &cutoff, &dirs, &lambdas, tol, ctx.exec)?
        }
        "normal" => {
            let n = normal_direction(&spec, a.x0.unwrap_or(0.75))?;
            decay_along(&spec, &cutoff, &n, &lambdas, tol, ctx.exec)?
        }
        other => return Err(CliError::Config(format!("unknown direction {other:?}"))),
    };
    let zero_frequency =
        measure_fourier(&spec, &cutoff, &vec![0.0; spec.ambient_dim()], tol)?.norm();
    let fit = decay_slope(&lambdas, &magnitudes)?;
    let rows = std::iter::once([num(0.0), num(zero_frequency)]).chain(
        lambdas
            .iter()
            .zip(&magnitudes)
            .map(|(l, m)| [num(*l), num(*m)]),
    );
    ctx.out
        .csv("fourier_decay.csv", &["lambda", "magnitude"], rows)?;
    let summary = FourierSummary {
        spec,
        cutoff,
        direction,
        zero_frequency,
        lambdas,
        magnitudes,
        fit,
    };
    ctx.out.json("fourier_decay_summary.json", &summary)?;
    Ok(summary)
}

// maximal-norm -------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MaximalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceArgs,
    /// Exponent pairs `p:q`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub pairs: Option<Vec<String>>,
    /// `indicator`, `bump` or `random`.
    #[arg(long)]
    pub data: Option<String>,
    /// Cells per axis of the data on [-1, 1]².
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Cells per axis of the evaluation box [-2, 2]².
    #[arg(long)]
    pub eval_resolution: Option<usize>,
    /// Uniform steps across t ∈ [1, 2].
    #[arg(long)]
    pub time_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub p: Rational64,
    pub q: Rational64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalSummary {
    pub spec: SurfaceSpec,
    pub data: String,
    pub rows: Vec<NormRow>,
}

pub fn maximal_norm(a: &MaximalArgs, ctx: &Context) -> Result<MaximalSummary, CliError> {
    let (spec, cutoff) = a.surface.resolve("homogeneous", 2)?;
    let pairs = a
        .pairs
        .clone()
        .unwrap_or_else(|| vec!["2:2".into(), "3/2:3".into()]);
    let pairs = pairs
        .iter()
        .map(|s| parse_pair(s))
        .collect::<Result<Vec<_>, _>>()?;
    let data = a.data.clone().unwrap_or_else(|| "indicator".into());
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let f = test_data(&data, a.resolution.unwrap_or(32), &mut rng)?;
    let ts = TimeSampling::dense(a.time_samples.unwrap_or(64))?;
    let eval = square(2.0)?;
    let er = a.eval_resolution.unwrap_or(32);
    let mut rows = Vec::new();
    for (p, q) in pairs {
        let ratio = norm_ratio(
            &spec,
            &cutoff,
            &f,
            to_f64(p),
            to_f64(q),
            &ts,
            &eval,
            &[er, er],
            ctx.exec,
        )?;
        rows.push(NormRow { p, q, ratio });
    }
    ctx.out.csv(
        "maximal_norm.csv",
        &["p", "q", "ratio"],
        rows.iter()
            .map(|r| [r.p.to_string(), r.q.to_string(), num(r.ratio)]),
    )?;
    let summary = MaximalSummary { spec, data, rows };
    ctx.out.json("maximal_norm_summary.json", &summary)?;
    Ok(summary)
}

// scaling ------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScalingArgs {
    /// Family `S1` … `S5`.
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub kmin: Option<i32>,
    #[arg(long)]
    pub kmax: Option<i32>,
    /// Grid cells across the thinnest width of each set.
    #[arg(long)]
    pub cells: Option<usize>,
    /// Quadrature nodes per axis of the evaluation domain.
    #[arg(long)]
    pub domain_nodes: Option<usize>,
}

pub fn scaling(a: &ScalingArgs, ctx: &Context) -> Result<ScalingReport, CliError> {
    let tag: Tag = a.tag.as_deref().unwrap_or("S1").parse()?;
    let d = a.d.unwrap_or(2);
    let p = parse_exponent(a.p.as_deref().unwrap_or("2"))?;
    let q = parse_exponent(a.q.as_deref().unwrap_or("2"))?;
    let ks: Vec<i32> = (a.kmin.unwrap_or(2)..=a.kmax.unwrap_or(tag.default_k_max())).collect();
    let defaults = MeasureSettings::default();
    let settings = MeasureSettings {
        cells: a.cells.unwrap_or(defaults.cells),
        domain_nodes: a.domain_nodes.unwrap_or(defaults.domain_nodes),
        ..defaults
    };
    let report = measure_scaling(tag, d, to_f64(p), to_f64(q), &ks, &settings, ctx.exec)?;
    ctx.out.csv(
        "scaling.csv",
        &["tag", "d", "k", "lhs_norm", "rhs_norm", "witness_ratio"],
        report.rows.iter().map(|r| {
            [
                tag.to_string(),
                d.to_string(),
                r.k.to_string(),
                num(r.lhs_norm),
                num(r.rhs_norm),
                num(r.witness_ratio),
            ]
        }),
    )?;
    ctx.out.json("scaling_summary.json", &report)?;
    Ok(report)
}

// sparse -------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SparseArgs {
    /// Type order of the homogeneous model curve.
    #[arg(long)]
    pub d: Option<u32>,
    /// Stopping constant.
    #[arg(long)]
    pub c: Option<f64>,
    /// Levels below each root cube.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// `indicator`, `bump` or `random`, used for both f and g.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSummary {
    pub c: f64,
    pub p: Rational64,
    pub q: Rational64,
    pub root_k: i32,
    pub root_position: Vec<i64>,
    pub selected: Vec<CubeRecord>,
    pub pairing: f64,
    pub best_form: f64,
    pub ratio: f64,
}

pub fn sparse(a: &SparseArgs, ctx: &Context) -> Result<SparseSummary, CliError> {
    let spec = SurfaceSpec::homogeneous_curve(a.d.unwrap_or(2), 1.0)?;
    let cutoff = Cutoff::bump_on(0.5, 1.0)?;
    let (p, q) = (
        parse_exponent(a.p.as_deref().unwrap_or("5/2"))?,
        parse_exponent(a.q.as_deref().unwrap_or("10/3"))?,
    );
    if q == Rational64::from_integer(1) {
        return Err(CliError::Config(
            "q must exceed 1 for the dual exponent".into(),
        ));
    }
    let q_dual = to_f64(q / (q - 1));
    let c = a.c.unwrap_or(10.0);
    let depth = a.depth.unwrap_or(4);
    let data = a.data.clone().unwrap_or_else(|| "indicator".into());
    let res = a.resolution.unwrap_or(32);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let f = test_data(&data, res, &mut rng)?;
    let g = test_data(&data, res, &mut rng)?;

    // One stopping-time selection on the cube enclosing the data.
    let dil = spec.dilation();
    let root = enclosing_cube(f.bbox(), dil)?;
    let counts: Vec<usize> = root
        .descendant_counts(depth, dil)?
        .iter()
        .map(|&v| v as usize)
        .collect();
    let fr = GridFunction::from_fn(root.realized_box(dil), counts.clone(), |x| f.eval(x))?;
    let gr = GridFunction::from_fn(root.realized_box(dil), counts, |x| g.eval(x))?;
    let selection = select_sparse(&fr, &gr, &root, to_f64(p), q_dual, c, depth, dil)?;
    ctx.out
        .json("sparse_selection.json", &selection.records())?;

    let cfg = DominationConfig {
        c,
        depth,
        exec: ctx.exec,
        ..Default::default()
    };
    let shifts: Vec<Vec<Shift>> = all_shifts(2);
    let report =
        verify_sparse_domination(&spec, &cutoff, &f, &g, to_f64(p), q_dual, &shifts, &cfg)?;
    let summary = SparseSummary {
        c,
        p,
        q,
        root_k: root.scale,
        root_position: root.position.clone(),
        selected: selection.records(),
        pairing: report.pairing,
        best_form: report.best_form,
        ratio: report.ratio,
    };
    ctx.out.csv(
        "sparse_forms.csv",
        &["shift", "roots", "cubes", "form"],
        report.forms.iter().map(|s| {
            let shift: Vec<String> = s
                .shift
                .iter()
                .map(|v| v.as_rational().to_string())
                .collect();
            [
                shift.join(" "),
                s.roots.len().to_string(),
                s.cubes.to_string(),
                num(s.form),
            ]
        }),
    )?;
    ctx.out.json("sparse_summary.json", &summary)?;
    Ok(summary)
}

// weights ------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct WeightsArgs {
    /// `constant`, `split` or `power`.
    #[arg(long)]
    pub weight: Option<String>,
    /// Weight stored in the binary grid format; overrides `weight`.
    #[arg(long)]
    pub weight_file: Option<std::path::PathBuf>,
    /// Exponent of the clipped power |x|^gamma.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Value of the right half for `split` (the left half is 1).
    #[arg(long)]
    pub contrast: Option<f64>,
    /// Exponents at which the characteristics are reported.
    #[arg(long, value_delimiter = ',')]
    pub ps: Option<Vec<f64>>,
    /// Scale range of the cube family.
    #[arg(long)]
    pub kmin: Option<i32>,
    #[arg(long)]
    pub kmax: Option<i32>,
    /// Triple `p:q:r` for the weighted bound.
    #[arg(long)]
    pub triple: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBound {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub bound: f64,
    pub weighted_ratio: f64,
    pub unweighted_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsSummary {
    pub weight: String,
    pub characteristics: Vec<CharacteristicReport>,
    pub bound: Option<WeightedBound>,
}

pub fn weights(a: &WeightsArgs, ctx: &Context) -> Result<WeightsSummary, CliError> {
    let spec = SurfaceSpec::homogeneous_curve(2, 1.0)?;
    let cutoff = Cutoff::bump_on(0.5, 1.0)?;
    let dil = spec.dilation().clone();
    let bx = square(2.0)?;
    let n = a.resolution.unwrap_or(32);
    let res = vec![n, n];
    let (name, w) = match &a.weight_file {
        Some(path) => (
            path.display().to_string(),
            Weight::read_binary(path, dil.clone())?,
        ),
        None => {
            let name = a.weight.clone().unwrap_or_else(|| "power".into());
            let w = match name.as_str() {
                "constant" => Weight::constant(bx.clone(), res.clone(), 1.0, dil.clone())?,
                "split" => Weight::two_valued_split(
                    bx.clone(),
                    res.clone(),
                    0,
                    1.0,
                    a.contrast.unwrap_or(4.0),
                    dil.clone(),
                )?,
                "power" => Weight::clipped_power(
                    bx.clone(),
                    res.clone(),
                    a.gamma.unwrap_or(0.5),
                    dil.clone(),
                )?,
                other => return Err(CliError::Config(format!("unknown weight {other:?}"))),
            };
            (name, w)
        }
    };
    let (k_min, k_max) = (a.kmin.unwrap_or(-3), a.kmax.unwrap_or(1));
    let mut cubes = sliding_family(&w, k_min, k_max)?;
    cubes.extend(dyadic_family(&w, k_min, k_max, &all_shifts(2))?);
    let mut characteristics = Vec::new();
    for &p in a.ps.as_deref().unwrap_or(&[2.0]) {
        characteristics.push(CharacteristicReport {
            p,
            k_min,
            k_max,
            cubes: cubes.len(),
            ap: ap_characteristic(&w, p, &cubes, ctx.exec)?,
            rh: rh_characteristic(&w, p, &cubes, ctx.exec)?,
        });
    }
    let bound = match &a.triple {
        None => None,
        Some(t) => {
            let parts: Vec<&str> = t.split(':').collect();
            let [p, q, r] = parts.as_slice() else {
                return Err(CliError::Config(format!("expected p:q:r, got {t:?}")));
            };
            let (p, q, r) = (
                to_f64(parse_exponent(p)?),
                to_f64(parse_exponent(q)?),
                to_f64(parse_exponent(r)?),
            );
            let f = GridFunction::from_fn(
                w.data().bbox().clone(),
                w.data().resolution().to_vec(),
                |x| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0),
            )?;
            let ts = TimeSampling::dense(16)?;
            let one =
                Weight::constant(f.bbox().clone(), f.resolution().to_vec(), 1.0, dil.clone())?;
            Some(WeightedBound {
                p,
                q,
                r,
                alpha: alpha_exponent(p, q, r)?,
                bound: characteristic_bound(&w, p, q, r, &cubes, ctx.exec)?,
                weighted_ratio: weighted_norm_ratio(&spec, &cutoff, &f, &w, r, &ts, ctx.exec)?,
                unweighted_ratio: weighted_norm_ratio(&spec, &cutoff, &f, &one, r, &ts, ctx.exec)?,
            })
        }
    };
    ctx.out.csv(
        "weights.csv",
        &["p", "k_min", "k_max", "cubes", "ap", "rh"],
        characteristics.iter().map(|c| {
            [
                num(c.p),
                c.k_min.to_string(),
                c.k_max.to_string(),
                c.cubes.to_string(),
                num(c.ap),
                num(c.rh),
            ]
        }),
    )?;
    let summary = WeightsSummary {
        weight: name,
        characteristics,
        bound,
    };
    ctx.out.json("weights_summary.json", &summary)?;
    Ok(summary)
}

// continuity ---------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ContinuityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceArgs,
    /// Norm exponent of the difference.
    #[arg(long)]
    pub q: Option<f64>,
    /// Coordinate along which f is shifted.
    #[arg(long)]
    pub axis: Option<usize>,
    /// |z| runs over 2^-zmin-exp … 2^-zmax-exp.
    #[arg(long)]
    pub zmin_exp: Option<i32>,
    #[arg(long)]
    pub zmax_exp: Option<i32>,
    /// Dilations; a single `1` gives the convolution difference.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub eval_resolution: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuitySummary {
    pub spec: SurfaceSpec,
    pub shifts: Vec<f64>,
    pub differences: Vec<f64>,
    pub fit: LineFit,
}

pub fn continuity(a: &ContinuityArgs, ctx: &Context) -> Result<ContinuitySummary, CliError> {
    let mut surface = a.surface.clone();
    surface.cutoff.get_or_insert_with(|| "unit-interval".into());
    let (spec, cutoff) = surface.resolve("finite-type", 2)?;
    let q = a.q.unwrap_or(2.0);
    let axis = a.axis.unwrap_or(0);
    if axis >= spec.ambient_dim() {
        return Err(CliError::Config(format!("axis {axis} out of range")));
    }
    let (lo, hi) = (a.zmin_exp.unwrap_or(2), a.zmax_exp.unwrap_or(8));
    if hi - lo < 2 {
        return Err(CliError::Config(
            "the slope fit needs at least three shifts".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let f = test_data(
        a.data.as_deref().unwrap_or("indicator"),
        a.resolution.unwrap_or(256),
        &mut rng,
    )?;
    let norm = lp_norm(&f, q)?;
    let ts = TimeSampling::explicit(a.times.clone().unwrap_or_else(|| vec![1.0]))?;
    let eval = MeasuredBox::new(vec![-1.0, -2.0], vec![3.0, 2.0])?;
    let er = a.eval_resolution.unwrap_or(64);
    let shifts: Vec<f64> = (lo..=hi).map(|e| 2f64.powi(-e)).collect();
    let mut differences = Vec::with_capacity(shifts.len());
    for &s in &shifts {
        let mut z = vec![0.0; spec.ambient_dim()];
        z[axis] = s;
        differences.push(
            continuity_diff_norm(&spec, &cutoff, &f, &z, q, &ts, &eval, &[er, er], ctx.exec)?
                / norm,
        );
    }
    let fit = log_log_slope(&shifts, &differences)?;
    ctx.out.csv(
        "continuity.csv",
        &["z", "difference"],
        shifts
            .iter()
            .zip(&differences)
            .map(|(z, v)| [num(*z), num(*v)]),
    )?;
    let summary = ContinuitySummary {
        spec,
        shifts,
        differences,
        fit,
    };
    ctx.out.json("continuity_summary.json", &summary)?;
    Ok(summary)
}
