//! Stopping-time sparse selection, Calderón–Zygmund decomposition and
//! sparse forms on δ-cubes.
//!
//! Work happens in the local cell space of a root cube `Q0`: level `ℓ`
//! holds the descendants `ℓ` scales below `Q0`, and cube sums are built
//! bottom-up so every average is a sum over whole cells.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::averaging::{Averager, GridFunction};
use crate::delta_grid::{
    enclosing_cube, grid_cube_containing, DeltaCube, Dilation, MeasuredBox, MultiIndex, Shift,
};
use crate::error::{check_dim, invalid, Error, Result};
use crate::exec::Execution;
use crate::geometry::{Cutoff, SurfaceSpec};

/// Default stopping constant.
pub const DEFAULT_STOPPING_CONSTANT: f64 = 10.0;

/// Per-level descendant counts and the cell resolution of a root cube.
#[derive(Debug, Clone)]
struct LocalGrid {
    counts: Vec<Vec<usize>>,
    cells: Vec<usize>,
}

impl LocalGrid {
    fn new(root: &DeltaCube, levels: usize, cells: &[usize], d: &Dilation) -> Result<Self> {
        let mut counts = Vec::with_capacity(levels + 1);
        for l in 0..=levels {
            let c = root.descendant_counts(l, d)?;
            counts.push(c.iter().map(|&v| v as usize).collect::<Vec<_>>());
        }
        for (j, &r) in cells.iter().enumerate() {
            let finest = counts[levels][j];
            if r % finest != 0 {
                return Err(invalid(format!(
                    "axis {j}: {r} cells do not subdivide the {finest} cubes of the finest level"
                )));
            }
        }
        Ok(LocalGrid {
            counts,
            cells: cells.to_vec(),
        })
    }

    fn levels(&self) -> usize {
        self.counts.len() - 1
    }

    fn len(&self, level: usize) -> usize {
        self.counts[level].iter().product()
    }

    fn cells_per_cube(&self, level: usize) -> Vec<usize> {
        self.cells
            .iter()
            .zip(&self.counts[level])
            .map(|(r, c)| r / c)
            .collect()
    }

    fn cell_count(&self, level: usize) -> u64 {
        self.cells_per_cube(level)
            .iter()
            .map(|&v| v as u64)
            .product()
    }

    fn linear(&self, level: usize, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts[level])
            .fold(0, |a, (&i, &c)| a * c + i)
    }

    fn multi(&self, level: usize, mut lin: usize) -> Vec<usize> {
        let n = self.cells.len();
        let mut idx = vec![0; n];
        for j in (0..n).rev() {
            idx[j] = lin % self.counts[level][j];
            lin /= self.counts[level][j];
        }
        idx
    }

    fn split(&self, level: usize) -> Vec<usize> {
        self.counts[level + 1]
            .iter()
            .zip(&self.counts[level])
            .map(|(a, b)| a / b)
            .collect()
    }

    fn children(&self, level: usize, idx: &[usize]) -> Vec<Vec<usize>> {
        let split = self.split(level);
        let counts: Vec<i64> = split.iter().map(|&s| s as i64).collect();
        MultiIndex::new(&counts)
            .map(|o| {
                idx.iter()
                    .zip(&split)
                    .zip(&o)
                    .map(|((&i, &s), &oo)| i * s + oo as usize)
                    .collect()
            })
            .collect()
    }
}

/// Sums of a cell quantity over every cube of every level.
#[derive(Debug, Clone)]
struct Pyramid {
    sums: Vec<Vec<f64>>,
}

impl Pyramid {
    fn build(grid: &LocalGrid, values: &[f64]) -> Pyramid {
        let levels = grid.levels();
        let n = grid.cells.len();
        let per = grid.cells_per_cube(levels);
        let mut finest = vec![0.0; grid.len(levels)];
        let mut idx = vec![0usize; n];
        for (lin, v) in values.iter().enumerate() {
            let mut rest = lin;
            for j in (0..n).rev() {
                idx[j] = rest % grid.cells[j] / per[j];
                rest /= grid.cells[j];
            }
            finest[grid.linear(levels, &idx)] += v;
        }
        let mut sums = vec![finest];
        for l in (0..levels).rev() {
            let split = grid.split(l);
            let child = sums.last().unwrap();
            let mut parent = vec![0.0; grid.len(l)];
            for (lin, v) in child.iter().enumerate() {
                let ci = grid.multi(l + 1, lin);
                let pi: Vec<usize> = ci.iter().zip(&split).map(|(c, s)| c / s).collect();
                parent[grid.linear(l, &pi)] += v;
            }
            sums.push(parent);
        }
        sums.reverse();
        Pyramid { sums }
    }

    fn sum(&self, level: usize, lin: usize) -> f64 {
        self.sums[level][lin]
    }
}

fn powered(f: &GridFunction, p: f64) -> Vec<f64> {
    if p == 1.0 {
        f.values().iter().map(|v| v.abs()).collect()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).collect()
    }
}

fn check_exponent(name: &str, p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!(
            "{name} must be a finite exponent >= 1, got {p}"
        )));
    }
    Ok(())
}

fn check_on_root(f: &GridFunction, root: &DeltaCube, d: &Dilation) -> Result<()> {
    check_dim(root.dim(), f.dim())?;
    let rb = root.realized_box(d);
    for j in 0..root.dim() {
        let tol = 1e-12 * rb.sides()[j];
        if (rb.lower()[j] - f.bbox().lower()[j]).abs() > tol
            || (rb.upper()[j] - f.bbox().upper()[j]).abs() > tol
        {
            return Err(invalid("grid function must live on the root cube's box"));
        }
    }
    Ok(())
}

/// `(|Q|^{-1} Σ_{cells in Q} |f|^p · cell)^{1/p}`, where the cells in `Q`
/// are those whose centers lie in `Q`.
pub fn average_pq(f: &GridFunction, cube: &DeltaCube, p: f64, d: &Dilation) -> Result<f64> {
    check_exponent("p", p)?;
    check_dim(f.dim(), cube.dim())?;
    let ranges = f
        .cell_range(&cube.realized_box(d))
        .ok_or_else(|| invalid("cube contains no grid cell"))?;
    let cells = f.cells_in(&ranges);
    let sum: f64 = cells
        .iter()
        .map(|&k| {
            let v = f.values()[k].abs();
            if p == 1.0 {
                v
            } else {
                v.powf(p)
            }
        })
        .sum();
    let count = cells.len();
    Ok((sum / count as f64).powf(1.0 / p))
}

/// One selected cube with its witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCube {
    pub cube: DeltaCube,
    /// Scales below the root.
    pub level: usize,
    /// Per-axis offset among the root's descendants at this level.
    pub local: Vec<usize>,
    /// Index of the cube this one was selected under.
    pub parent: Option<usize>,
    pub volume: f64,
    pub cells: u64,
    /// Cells of the cube not covered by its own stopping cubes.
    pub witness_cells: u64,
    pub f_average: f64,
    pub g_average: f64,
}

impl SparseCube {
    pub fn witness_fraction(&self) -> f64 {
        self.witness_cells as f64 / self.cells as f64
    }
}

/// Per-cube record of the JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub k: i32,
    pub position: Vec<i64>,
    pub shift: Vec<Shift>,
    pub witness_volume_fraction: f64,
}

/// The output of [`select_sparse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseCollection {
    pub root: DeltaCube,
    pub levels: usize,
    pub cubes: Vec<SparseCube>,
}

impl SparseCollection {
    /// `Σ |S| ⟨f⟩_{S,p} ⟨g⟩_{S,q'}` from the averages recorded at selection.
    pub fn form(&self) -> f64 {
        self.cubes
            .iter()
            .map(|c| c.volume * c.f_average * c.g_average)
            .sum()
    }

    pub fn records(&self) -> Vec<CubeRecord> {
        self.cubes
            .iter()
            .map(|c| CubeRecord {
                k: c.cube.scale,
                position: c.cube.position.clone(),
                shift: c.cube.shift.clone(),
                witness_volume_fraction: c.witness_fraction(),
            })
            .collect()
    }

    /// Stopping cubes selected directly under cube `i`.
    pub fn stopping_children(&self, i: usize) -> impl Iterator<Item = &SparseCube> {
        self.cubes.iter().filter(move |c| c.parent == Some(i))
    }
}

fn check_constant(c: f64, p: f64, q_dual: f64) -> Result<()> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(invalid(format!("stopping constant must exceed 1, got {c}")));
    }
    let packing = c.powf(-p) + c.powf(-q_dual);
    if packing > 0.25 {
        return Err(Error::StoppingConstantTooSmall { c, packing });
    }
    Ok(())
}

/// Whether all cells of a cube carry the same value.
fn cube_is_flat(f: &GridFunction, grid: &LocalGrid, level: usize, idx: &[usize]) -> bool {
    let per = grid.cells_per_cube(level);
    let counts: Vec<i64> = per.iter().map(|&v| v as i64).collect();
    let mut first = None;
    let mut cell = vec![0usize; idx.len()];
    for off in MultiIndex::new(&counts) {
        for j in 0..idx.len() {
            cell[j] = idx[j] * per[j] + off[j] as usize;
        }
        let v = f.values()[f.linear_index(&cell)];
        match first {
            None => first = Some(v),
            Some(u) if u != v => return false,
            _ => {}
        }
    }
    true
}

/// Recursive stopping-time selection under `root`.
///
/// Stopping cubes of `S` are the maximal strict descendants `T` with
/// `⟨f⟩_{T,p} > C⟨f⟩_{S,p}` or `⟨g⟩_{T,q'} > C⟨g⟩_{S,q'}`; the selection
/// recurses into each. `f` and `g` must live on the root's box with a
/// resolution that subdivides the cubes `max_depth` scales down.
#[allow(clippy::too_many_arguments)]
pub fn select_sparse(
    f: &GridFunction,
    g: &GridFunction,
    root: &DeltaCube,
    p: f64,
    q_dual: f64,
    c: f64,
    max_depth: usize,
    d: &Dilation,
) -> Result<SparseCollection> {
    check_exponent("p", p)?;
    check_exponent("q'", q_dual)?;
    check_constant(c, p, q_dual)?;
    check_on_root(f, root, d)?;
    check_on_root(g, root, d)?;
    if f.resolution() != g.resolution() {
        return Err(invalid("f and g must share a grid"));
    }
    let grid = LocalGrid::new(root, max_depth, f.resolution(), d)?;
    let pf = Pyramid::build(&grid, &powered(f, p));
    let pg = Pyramid::build(&grid, &powered(g, q_dual));
    let mean = |pyr: &Pyramid, level: usize, lin: usize, e: f64| {
        (pyr.sum(level, lin) / grid.cell_count(level) as f64).powf(1.0 / e)
    };
    let root_volume = root.volume(d);
    let volume_at = |level: usize| root_volume / grid.len(level) as f64;

    let mut cubes: Vec<SparseCube> = Vec::new();
    let mut queue: VecDeque<(usize, Vec<usize>, Option<usize>)> = VecDeque::new();
    queue.push_back((0, vec![0; root.dim()], None));
    while let Some((level, idx, parent)) = queue.pop_front() {
        let lin = grid.linear(level, &idx);
        let af = mean(&pf, level, lin, p);
        let ag = mean(&pg, level, lin, q_dual);
        let me = cubes.len();
        let local: Vec<i64> = idx.iter().map(|&v| v as i64).collect();
        cubes.push(SparseCube {
            cube: root.descendant(level, &local, d)?,
            level,
            local: idx.clone(),
            parent,
            volume: volume_at(level),
            cells: grid.cell_count(level),
            witness_cells: 0,
            f_average: af,
            g_average: ag,
        });
        if level == max_depth
            && grid.cell_count(level) > 1
            && !(cube_is_flat(f, &grid, level, &idx) && cube_is_flat(g, &grid, level, &idx))
        {
            return Err(Error::DepthExceeded(max_depth));
        }
        let mut stack: Vec<(usize, Vec<usize>)> = if level < max_depth {
            grid.children(level, &idx)
                .into_iter()
                .rev()
                .map(|ch| (level + 1, ch))
                .collect()
        } else {
            Vec::new()
        };
        let mut stopping = Vec::new();
        while let Some((l, ci)) = stack.pop() {
            let cl = grid.linear(l, &ci);
            if mean(&pf, l, cl, p) > c * af || mean(&pg, l, cl, q_dual) > c * ag {
                stopping.push((l, ci));
            } else if l < max_depth {
                for ch in grid.children(l, &ci).into_iter().rev() {
                    stack.push((l + 1, ch));
                }
            }
        }
        let covered: u64 = stopping.iter().map(|(l, _)| grid.cell_count(*l)).sum();
        cubes[me].witness_cells = cubes[me].cells - covered;
        for (l, ci) in stopping {
            queue.push_back((l, ci, Some(me)));
        }
    }
    let collection = SparseCollection {
        root: root.clone(),
        levels: max_depth,
        cubes,
    };
    certify(&collection, &grid)?;
    Ok(collection)
}

/// Checks disjointness and `4|E_S| > |S|` by assigning every finest cube
/// to the deepest selected cube containing it.
fn certify(s: &SparseCollection, grid: &LocalGrid) -> Result<()> {
    let levels = grid.levels();
    let mut owner = vec![usize::MAX; grid.len(levels)];
    for (i, cube) in s.cubes.iter().enumerate() {
        // Parents precede children, so later cubes overwrite their ancestors.
        let scale: Vec<usize> = grid.counts[levels]
            .iter()
            .zip(&grid.counts[cube.level])
            .map(|(a, b)| a / b)
            .collect();
        let counts: Vec<i64> = scale.iter().map(|&v| v as i64).collect();
        let mut idx = vec![0usize; scale.len()];
        for off in MultiIndex::new(&counts) {
            for j in 0..idx.len() {
                idx[j] = cube.local[j] * scale[j] + off[j] as usize;
            }
            let lin = grid.linear(levels, &idx);
            if let Some(par) = cube.parent {
                if owner[lin] != par && !is_ancestor(s, owner[lin], par) {
                    return Err(invalid("stopping cube escapes its parent"));
                }
            }
            owner[lin] = i;
        }
    }
    let per_finest = grid.cell_count(levels);
    let mut owned = vec![0u64; s.cubes.len()];
    for &o in &owner {
        if o == usize::MAX {
            return Err(invalid("root does not cover the grid"));
        }
        owned[o] += per_finest;
    }
    for (cube, &w) in s.cubes.iter().zip(&owned) {
        if w != cube.witness_cells {
            return Err(invalid("witness sets overlap"));
        }
        if 4 * w <= cube.cells {
            return Err(invalid(format!(
                "sparseness fails: witness {w} of {} cells",
                cube.cells
            )));
        }
    }
    Ok(())
}

fn is_ancestor(s: &SparseCollection, mut node: usize, target: usize) -> bool {
    while node != usize::MAX {
        if node == target {
            return true;
        }
        node = match s.cubes[node].parent {
            Some(p) => p,
            None => return false,
        };
    }
    false
}

/// `Σ_S |S| ⟨f⟩_{S,p} ⟨g⟩_{S,q'}` with averages recomputed from the grids.
pub fn sparse_form(
    cubes: &[DeltaCube],
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q_dual: f64,
    d: &Dilation,
) -> Result<f64> {
    let mut total = 0.0;
    for q in cubes {
        total += q.volume(d) * average_pq(f, q, p, d)? * average_pq(g, q, q_dual, d)?;
    }
    Ok(total)
}

/// A bad cube of the Calderón–Zygmund decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BadCube {
    pub cube: DeltaCube,
    pub level: usize,
    pub local: Vec<usize>,
    /// `b_P = (f − ⟨f⟩_P) 1_P` on the cells of `P`.
    pub part: GridFunction,
    /// Grid index of the first cell of `P`.
    pub first_cell: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CzDecomposition {
    pub good: GridFunction,
    pub bad: Vec<BadCube>,
    /// `C⟨f⟩_{Q0,p}`.
    pub threshold: f64,
    /// Bound on `‖f_∞‖_∞`: the threshold times the largest parent-to-child
    /// volume ratio to the power `1/p`.
    pub good_bound: f64,
}

impl CzDecomposition {
    /// `f_∞ + Σ b_P` on the grid.
    pub fn reconstruct(&self) -> GridFunction {
        let mut out = self.good.clone();
        for b in &self.bad {
            for (lin, v) in b.part.values().iter().enumerate() {
                let off = b.part.multi_index(lin);
                let idx: Vec<usize> = off.iter().zip(&b.first_cell).map(|(o, f)| o + f).collect();
                let k = out.linear_index(&idx);
                out.values_mut()[k] += v;
            }
        }
        out
    }
}

/// Calderón–Zygmund decomposition of `f` on `root` at threshold
/// `C⟨f⟩_{root,p}`. The grid cells must be the cubes some number of scales
/// below the root.
pub fn cz_decompose(
    f: &GridFunction,
    root: &DeltaCube,
    p: f64,
    c: f64,
    d: &Dilation,
) -> Result<CzDecomposition> {
    check_exponent("p", p)?;
    if !(c > 1.0) {
        return Err(invalid("stopping constant must exceed 1"));
    }
    check_on_root(f, root, d)?;
    let mut levels = None;
    for l in 0..=128usize {
        let counts = root.descendant_counts(l, d)?;
        let matches = counts
            .iter()
            .zip(f.resolution())
            .all(|(&a, &r)| a as usize == r);
        if matches {
            levels = Some(l);
            break;
        }
        if counts
            .iter()
            .zip(f.resolution())
            .any(|(&a, &r)| a as usize > r)
        {
            break;
        }
    }
    let levels = levels
        .ok_or_else(|| invalid("grid cells are not the descendants of the root at one scale"))?;
    let grid = LocalGrid::new(root, levels, f.resolution(), d)?;
    let pf = Pyramid::build(&grid, &powered(f, p));
    let avg = |level: usize, lin: usize| {
        (pf.sum(level, lin) / grid.cell_count(level) as f64).powf(1.0 / p)
    };
    let threshold = c * avg(0, 0);
    let mut ratio: f64 = 1.0;
    for l in 0..levels {
        ratio = ratio.max(grid.split(l).iter().product::<usize>() as f64);
    }
    let mut good = f.clone();
    let mut bad = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = if levels > 0 {
        grid.children(0, &vec![0; root.dim()])
            .into_iter()
            .rev()
            .map(|ch| (1, ch))
            .collect()
    } else {
        Vec::new()
    };
    while let Some((l, idx)) = stack.pop() {
        if avg(l, grid.linear(l, &idx)) > threshold {
            let per = grid.cells_per_cube(l);
            let first_cell: Vec<usize> = idx.iter().zip(&per).map(|(i, p)| i * p).collect();
            let counts: Vec<i64> = per.iter().map(|&v| v as i64).collect();
            let cells: Vec<usize> = MultiIndex::new(&counts)
                .map(|o| {
                    let cell: Vec<usize> = o
                        .iter()
                        .zip(&first_cell)
                        .map(|(&a, &b)| a as usize + b)
                        .collect();
                    f.linear_index(&cell)
                })
                .collect();
            let mean = cells.iter().map(|&k| f.values()[k]).sum::<f64>() / cells.len() as f64;
            let part_values: Vec<f64> = cells.iter().map(|&k| f.values()[k] - mean).collect();
            for (&k, b) in cells.iter().zip(&part_values) {
                good.values_mut()[k] = f.values()[k] - b;
            }
            let local: Vec<i64> = idx.iter().map(|&v| v as i64).collect();
            let cube = root.descendant(l, &local, d)?;
            let part = GridFunction::new(cube.realized_box(d), per, part_values)?;
            bad.push(BadCube {
                cube,
                level: l,
                local: idx,
                part,
                first_cell,
            });
        } else if l < levels {
            for ch in grid.children(l, &idx).into_iter().rev() {
                stack.push((l + 1, ch));
            }
        }
    }
    Ok(CzDecomposition {
        good,
        bad,
        threshold,
        good_bound: ratio.powf(1.0 / p) * threshold,
    })
}

/// Settings for [`verify_sparse_domination`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationConfig {
    pub c: f64,
    /// Levels below each root cube at which `f` and `g` are resampled.
    pub depth: usize,
    /// Dyadic blocks used for the maximal function.
    pub k_min: i32,
    pub k_max: i32,
    pub per_block: usize,
    pub exec: Execution,
}

impl Default for DominationConfig {
    fn default() -> Self {
        DominationConfig {
            c: DEFAULT_STOPPING_CONSTANT,
            depth: 4,
            k_min: -2,
            k_max: 6,
            per_block: 32,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftForm {
    pub shift: Vec<Shift>,
    pub roots: Vec<DeltaCube>,
    pub cubes: usize,
    pub form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    /// `⟨Mf, g⟩`.
    pub pairing: f64,
    pub forms: Vec<ShiftForm>,
    pub best_form: f64,
    /// `⟨Mf, g⟩ / max_s Λ_s`, zero when both vanish.
    pub ratio: f64,
}

/// Roots of grid `shift` at the scale of the enclosing cube that meet `b`.
fn roots_covering(b: &MeasuredBox, shift: &[Shift], d: &Dilation) -> Result<Vec<DeltaCube>> {
    let k = enclosing_cube(b, d)?.scale;
    let lo = grid_cube_containing(b.lower(), k, shift, d)?;
    let hi = grid_cube_containing(b.upper(), k, shift, d)?;
    let counts: Vec<i64> = lo
        .position
        .iter()
        .zip(&hi.position)
        .map(|(a, z)| z - a + 1)
        .collect();
    let mut out = Vec::new();
    for off in MultiIndex::new(&counts) {
        let position = lo.position.iter().zip(&off).map(|(a, o)| a + o).collect();
        let cube = DeltaCube::new(k, position, shift.to_vec())?;
        if cube.realized_box(d).intersects(b) {
            out.push(cube);
        }
    }
    Ok(out)
}

fn resample(
    f: &GridFunction,
    root: &DeltaCube,
    depth: usize,
    d: &Dilation,
) -> Result<GridFunction> {
    let res: Vec<usize> = root
        .descendant_counts(depth, d)?
        .iter()
        .map(|&v| v as usize)
        .collect();
    GridFunction::from_fn(root.realized_box(d), res, |x| f.eval(x))
}

/// Compares `⟨Mf, g⟩` with the largest sparse form over the given grids.
#[allow(clippy::too_many_arguments)]
pub fn verify_sparse_domination(
    spec: &SurfaceSpec,
    cutoff: &Cutoff,
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q_dual: f64,
    shifts: &[Vec<Shift>],
    cfg: &DominationConfig,
) -> Result<DominationReport> {
    check_exponent("p", p)?;
    check_exponent("q'", q_dual)?;
    check_constant(cfg.c, p, q_dual)?;
    if shifts.is_empty() {
        return Err(invalid("no grids to compare against"));
    }
    let d = spec.dilation();
    let op = Averager::new(spec, cutoff)?;
    let ts = op.dyadic_sampling(cfg.k_min, cfg.k_max, cfg.per_block)?;
    let cell = g.cell_measure();
    let terms = cfg.exec.try_map_range(g.len(), |lin| -> Result<f64> {
        let gv = g.values()[lin];
        if gv == 0.0 {
            return Ok(0.0);
        }
        Ok(op.sampled_max(f, &g.center(lin), &ts)? * gv * cell)
    })?;
    let pairing: f64 = terms.iter().sum();
    let support = f.bbox().hull(g.bbox())?;
    let mut forms = Vec::with_capacity(shifts.len());
    for shift in shifts {
        check_dim(d.dim(), shift.len())?;
        let roots = roots_covering(&support, shift, d)?;
        let collections = cfg.exec.try_map_range(roots.len(), |i| {
            let fr = resample(f, &roots[i], cfg.depth, d)?;
            let gr = resample(g, &roots[i], cfg.depth, d)?;
            select_sparse(&fr, &gr, &roots[i], p, q_dual, cfg.c, cfg.depth, d)
        })?;
        forms.push(ShiftForm {
            shift: shift.clone(),
            roots: roots.clone(),
            cubes: collections.iter().map(|s| s.cubes.len()).sum(),
            form: collections.iter().map(SparseCollection::form).sum(),
        });
    }
    let best_form = forms.iter().map(|f| f.form).fold(0.0, f64::max);
    let ratio = if pairing == 0.0 {
        0.0
    } else if best_form == 0.0 {
        return Err(Error::ZeroDenominator);
    } else {
        pairing / best_form
    };
    Ok(DominationReport {
        pairing,
        forms,
        best_form,
        ratio,
    })
}

/// `max/min` of a family of domination ratios.
pub fn ratio_spread(reports: &[DominationReport]) -> f64 {
    let max = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let min = reports
        .iter()
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta_grid::normalize_dilation;

    fn unit_root() -> (DeltaCube, Dilation) {
        let d = Dilation::isotropic(2);
        (
            DeltaCube::new(0, vec![0, 0], vec![Shift::Zero; 2]).unwrap(),
            d,
        )
    }

    #[test]
    fn averages_of_simple_data() {
        let (q, d) = unit_root();
        let c = GridFunction::constant(q.realized_box(&d), vec![4, 4], 3.0).unwrap();
        for p in [1.0, 2.0, 5.0] {
            assert!((average_pq(&c, &q, p, &d).unwrap() - 3.0).abs() < 1e-15);
        }
        let half = GridFunction::from_fn(q.realized_box(&d), vec![4, 4], |x| {
            if x[0] < 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        for p in [1.0, 2.0, 3.0] {
            assert!((average_pq(&half, &q, p, &d).unwrap() - 0.5f64.powf(1.0 / p)).abs() < 1e-15);
        }
        let far = DeltaCube::new(0, vec![5, 5], vec![Shift::Zero; 2]).unwrap();
        assert!(average_pq(&c, &far, 1.0, &d).is_err());
    }

    #[test]
    fn flat_data_selects_only_the_root() {
        let (q, d) = unit_root();
        let one = GridFunction::constant(q.realized_box(&d), vec![8, 8], 1.0).unwrap();
        let s = select_sparse(&one, &one, &q, 2.0, 2.0, 10.0, 3, &d).unwrap();
        assert_eq!(s.cubes.len(), 1);
        assert_eq!(s.cubes[0].witness_cells, s.cubes[0].cells);
        assert!((s.form() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_constant_is_rejected() {
        let (q, d) = unit_root();
        let one = GridFunction::constant(q.realized_box(&d), vec![2, 2], 1.0).unwrap();
        let r = select_sparse(&one, &one, &q, 1.0, 1.0, 6.0, 1, &d);
        assert!(matches!(r, Err(Error::StoppingConstantTooSmall { .. })));
    }

    #[test]
    fn spike_gives_a_chain() {
        let (q, d) = unit_root();
        let mut f = GridFunction::zeros(q.realized_box(&d), vec![32, 32]).unwrap();
        let k = f.linear_index(&[5, 22]);
        f.values_mut()[k] = 1.0;
        let g = GridFunction::constant(q.realized_box(&d), vec![32, 32], 1.0).unwrap();
        let s = select_sparse(&f, &g, &q, 2.0, 2.0, 10.0, 5, &d).unwrap();
        // Averages ⟨f⟩_{T,2} = 2^{level−5}; the first cube above 10·2^{−5}
        // is level 4, then each step down doubles only, so the chain stops.
        assert_eq!(s.cubes.len(), 2);
        assert_eq!(s.cubes[1].level, 4);
        assert_eq!(s.cubes[1].local, vec![2, 11]);
    }

    #[test]
    fn two_disjoint_cubes_form() {
        let d = Dilation::isotropic(2);
        let a = DeltaCube::new(0, vec![0, 0], vec![Shift::Zero; 2]).unwrap();
        let b = DeltaCube::new(0, vec![1, 0], vec![Shift::Zero; 2]).unwrap();
        let bbox = MeasuredBox::new(vec![0.0, 0.0], vec![2.0, 1.0]).unwrap();
        let one = GridFunction::constant(bbox, vec![4, 2], 1.0).unwrap();
        let v = sparse_form(&[a.clone(), b], &one, &one, 2.0, 3.0, &d).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        assert!((sparse_form(&[a], &one, &one, 2.0, 3.0, &d).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cz_on_dyadic_data() {
        let d = normalize_dilation(&[1.0, 2.0]).unwrap();
        let q = DeltaCube::new(1, vec![0, 0], vec![Shift::Zero; 2]).unwrap();
        // Two levels down: 4 × 16 cells.
        let f = GridFunction::from_fn(q.realized_box(&d), vec![4, 16], |x| {
            if x[0] < 0.5 && x[1] < 0.25 {
                64.0
            } else {
                ((x[0] * 8.0).floor() + (x[1] * 4.0).floor()) / 4.0
            }
        })
        .unwrap();
        let cz = cz_decompose(&f, &q, 1.0, 4.0, &d).unwrap();
        assert!(!cz.bad.is_empty());
        let rec = cz.reconstruct();
        assert_eq!(rec.values(), f.values());
        for b in &cz.bad {
            let s: f64 = b.part.values().iter().sum();
            let scale: f64 = b
                .part
                .values()
                .iter()
                .map(|v| v.abs())
                .sum::<f64>()
                .max(1.0);
            assert!(s.abs() <= 1e-12 * scale);
        }
        assert!(cz.good.max_abs() <= cz.good_bound);
    }
}
