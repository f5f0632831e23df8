//! Independent reference implementations shared by the integration tests
//! and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;

use curvmax_core::averaging::GridFunction;
use curvmax_core::delta_grid::{normalize_dilation, DeltaCube, Dilation, MultiIndex, Shift};
use curvmax_core::sparse::SparseCollection;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::Rng;

pub type Q = Rational64;

/// `2^e` as a rational.
pub fn pow2(e: i32) -> Q {
    if e >= 0 {
        Q::from_integer(1i64 << e)
    } else {
        Q::new(1, 1i64 << (-e))
    }
}

/// Exact `[lower, upper)` per axis, computed from the cube's definition
/// with rational side exponents `b`.
pub fn rational_bounds(cube: &DeltaCube, b: &[Q]) -> Vec<(Q, Q)> {
    cube.position
        .iter()
        .zip(&cube.shift)
        .zip(b)
        .map(|((&i, s), bj)| {
            let e = (Q::from_integer(cube.scale as i64) * bj)
                .ceil()
                .to_integer() as i32;
            let sign = if e.rem_euclid(2) == 0 {
                Q::one()
            } else {
                -Q::one()
            };
            let side = pow2(e);
            let lower = side * (Q::from_integer(i) + sign * s.as_rational());
            (lower, lower + side)
        })
        .collect()
}

/// The index `i` along one axis with `x ∈ 2^e [i + σ s, i + 1 + σ s)`.
pub fn rational_position(x: Q, scale: i32, bj: Q, shift: Q) -> i64 {
    let e = (Q::from_integer(scale as i64) * bj).ceil().to_integer() as i32;
    let sign = if e.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    };
    (x / pow2(e) - sign * shift).floor().to_integer()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Disjoint,
    Nested,
    Overlapping,
}

pub fn relation(a: &[(Q, Q)], b: &[(Q, Q)]) -> Relation {
    let mut a_in_b = true;
    let mut b_in_a = true;
    for ((alo, ahi), (blo, bhi)) in a.iter().zip(b) {
        if ahi <= blo || bhi <= alo {
            return Relation::Disjoint;
        }
        a_in_b &= blo <= alo && ahi <= bhi;
        b_in_a &= alo <= blo && bhi <= ahi;
    }
    if a_in_b || b_in_a {
        Relation::Nested
    } else {
        Relation::Overlapping
    }
}

pub fn volume(bounds: &[(Q, Q)]) -> Q {
    bounds.iter().fold(Q::one(), |acc, (l, u)| acc * (u - l))
}

pub fn intersection_volume(a: &[(Q, Q)], b: &[(Q, Q)]) -> Q {
    let mut v = Q::one();
    for ((alo, ahi), (blo, bhi)) in a.iter().zip(b) {
        let lo = if alo > blo { alo } else { blo };
        let hi = if ahi < bhi { ahi } else { bhi };
        if hi <= lo {
            return Q::zero();
        }
        v *= hi - lo;
    }
    v
}

/// A random dyadic rational `m / 2^10` with `|m| < 2^14`.
pub fn random_dyadic<R: Rng>(rng: &mut R) -> Q {
    Q::new(rng.gen_range(-(1i64 << 14)..(1i64 << 14)), 1 << 10)
}

pub fn q_to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// `(mean over the cells whose centers lie in the cube of |v|^p)^{1/p}`,
/// found by scanning every cell of the grid.
pub fn scan_average(f: &GridFunction, cube: &DeltaCube, p: f64, d: &Dilation) -> f64 {
    let b = cube.realized_box(d);
    let mut sum = 0.0;
    let mut count = 0usize;
    for lin in 0..f.len() {
        if b.contains(&f.center(lin)) {
            sum += f.values()[lin].abs().powf(p);
            count += 1;
        }
    }
    assert!(count > 0, "cube holds no cell");
    (sum / count as f64).powf(1.0 / p)
}

/// All strict descendants of `s` down to `depth` scales below `root`.
fn descendants(
    s: &DeltaCube,
    s_level: usize,
    depth: usize,
    d: &Dilation,
) -> Vec<(usize, DeltaCube)> {
    let mut out = Vec::new();
    for l in 1..=(depth - s_level) {
        let counts = s.descendant_counts(l, d).unwrap();
        for off in MultiIndex::new(&counts) {
            out.push((s_level + l, s.descendant(l, &off, d).unwrap()));
        }
    }
    out
}

fn strictly_inside(inner: &DeltaCube, outer: &DeltaCube, d: &Dilation) -> bool {
    inner.scale < outer.scale && {
        let a = inner.realized_box(d);
        let b = outer.realized_box(d);
        (0..a.dim()).all(|j| b.lower()[j] <= a.lower()[j] && a.upper()[j] <= b.upper()[j])
    }
}

/// Exhaustive stopping-time selection: for each selected cube, every strict
/// descendant is tested, and the stopping cubes are those with no tested
/// ancestor between them and the selected cube. Returns `(cube, parent)`
/// pairs.
#[allow(clippy::too_many_arguments)]
pub fn exhaustive_selection(
    f: &GridFunction,
    g: &GridFunction,
    root: &DeltaCube,
    p: f64,
    q_dual: f64,
    c: f64,
    depth: usize,
    d: &Dilation,
) -> BTreeSet<(DeltaKey, Option<DeltaKey>)> {
    let mut out = BTreeSet::new();
    let mut work = vec![(0usize, root.clone(), None::<DeltaKey>)];
    while let Some((level, s, parent)) = work.pop() {
        out.insert((key(&s), parent));
        let af = scan_average(f, &s, p, d);
        let ag = scan_average(g, &s, q_dual, d);
        let hits: Vec<(usize, DeltaCube)> = descendants(&s, level, depth, d)
            .into_iter()
            .filter(|(_, t)| {
                scan_average(f, t, p, d) > c * af || scan_average(g, t, q_dual, d) > c * ag
            })
            .collect();
        for (l, t) in &hits {
            let covered = hits.iter().any(|(_, u)| strictly_inside(t, u, d));
            if !covered {
                work.push((*l, t.clone(), Some(key(&s))));
            }
        }
    }
    out
}

pub type DeltaKey = (i32, Vec<i64>);

pub fn key(c: &DeltaCube) -> DeltaKey {
    (c.scale, c.position.clone())
}

/// Small configurations: (dilation, root, depth) with at most 16 finest cells.
pub fn small_grids() -> Vec<(Dilation, DeltaCube, usize)> {
    let mut out = Vec::new();
    let line = Dilation::isotropic(1);
    for depth in 1..=3 {
        out.push((
            line.clone(),
            DeltaCube::new(0, vec![0], vec![Shift::Zero]).unwrap(),
            depth,
        ));
        out.push((
            line.clone(),
            DeltaCube::new(1, vec![-1], vec![Shift::OneThird]).unwrap(),
            depth,
        ));
    }
    let plane = Dilation::isotropic(2);
    for depth in 1..=2 {
        out.push((
            plane.clone(),
            DeltaCube::new(0, vec![0, 0], vec![Shift::Zero; 2]).unwrap(),
            depth,
        ));
        out.push((
            plane.clone(),
            DeltaCube::new(2, vec![1, -2], vec![Shift::TwoThirds, Shift::OneThird]).unwrap(),
            depth,
        ));
    }
    let parabolic = normalize_dilation(&[1.0, 2.0]).unwrap();
    out.push((
        parabolic,
        DeltaCube::new(0, vec![0, 0], vec![Shift::Zero; 2]).unwrap(),
        1,
    ));
    let uneven = normalize_dilation(&[2.0, 3.0]).unwrap();
    out.push((
        uneven,
        DeltaCube::new(1, vec![0, 3], vec![Shift::OneThird, Shift::Zero]).unwrap(),
        1,
    ));
    out.push((
        Dilation::isotropic(3),
        DeltaCube::new(0, vec![0; 3], vec![Shift::Zero; 3]).unwrap(),
        1,
    ));
    out
}

pub fn finest_resolution(root: &DeltaCube, depth: usize, d: &Dilation) -> Vec<usize> {
    root.descendant_counts(depth, d)
        .unwrap()
        .iter()
        .map(|&v| v as usize)
        .collect()
}

/// Heavy-tailed nonnegative data: mostly small, occasionally huge, often zero.
pub fn spiky<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..4) {
            0 => 0.0,
            1 => rng.gen_range(0.0..1.0),
            _ => rng.gen_range(-4.0f64..6.0).exp2().powi(2),
        })
        .collect()
}

pub fn selection_pairs(s: &SparseCollection) -> BTreeSet<(DeltaKey, Option<DeltaKey>)> {
    s.cubes
        .iter()
        .map(|c| (key(&c.cube), c.parent.map(|p| key(&s.cubes[p].cube))))
        .collect()
}

/// Owner of every finest cell: the deepest selected cube containing it.
pub fn owners(s: &SparseCollection, d: &Dilation, res: &[usize]) -> Vec<usize> {
    let root_box = s.root.realized_box(d);
    let template = GridFunction::zeros(root_box, res.to_vec()).unwrap();
    (0..template.len())
        .map(|lin| {
            let x = template.center(lin);
            s.cubes
                .iter()
                .enumerate()
                .filter(|(_, c)| c.cube.contains_point(&x, d))
                .max_by_key(|(_, c)| c.level)
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect()
}

/// `num / 3 · 2^exp` as a rational.
pub fn triadic_to_q(t: &curvmax_core::delta_grid::Triadic) -> Q {
    Q::new(t.num() as i64, 3) * pow2(t.exp())
}
