//! Exponent regions in the `(1/p, 1/q)` square, decided in exact rational
//! arithmetic.
//!
//! A region is a convex set cut out by strict and weak half-planes inside
//! `[0, 1]²`, together with finitely many exceptional points.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

type Q = Rational64;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// A point `(1/p, 1/q)` with rational coordinates in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub inv_p: Q,
    pub inv_q: Q,
}

impl ExponentPoint {
    pub fn new(inv_p: Q, inv_q: Q) -> Result<Self> {
        let unit = |v: Q| v >= Q::zero() && v <= Q::one();
        if !unit(inv_p) || !unit(inv_q) {
            return Err(invalid(format!(
                "exponent point ({inv_p}, {inv_q}) outside [0,1]^2"
            )));
        }
        Ok(ExponentPoint { inv_p, inv_q })
    }

    pub fn from_ratios(p: (i64, i64), q_: (i64, i64)) -> Result<Self> {
        if p.1 == 0 || q_.1 == 0 {
            return Err(invalid("zero denominator"));
        }
        ExponentPoint::new(q(p.0, p.1), q(q_.0, q_.1))
    }

    /// Point from exponents `p, q ∈ [1, ∞]`, with `None` for infinity.
    pub fn from_exponents(p: Option<Q>, q_: Option<Q>) -> Result<Self> {
        let inv = |v: Option<Q>| -> Result<Q> {
            match v {
                None => Ok(Q::zero()),
                Some(v) if v >= Q::one() => Ok(v.recip()),
                Some(v) => Err(invalid(format!("exponent {v} below 1"))),
            }
        };
        ExponentPoint::new(inv(p)?, inv(q_)?)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (ratio_f64(self.inv_p), ratio_f64(self.inv_q))
    }
}

impl fmt::Display for ExponentPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.inv_p, self.inv_q)
    }
}

pub fn ratio_f64(v: Q) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

/// `a·(1/p) + b·(1/q) < c`, or `≤ c` when not strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfPlane {
    pub a: Q,
    pub b: Q,
    pub c: Q,
    pub strict: bool,
}

impl HalfPlane {
    pub fn new(a: Q, b: Q, c: Q, strict: bool) -> Self {
        HalfPlane { a, b, c, strict }
    }

    fn value(&self, x: Q, y: Q) -> Q {
        self.a * x + self.b * y
    }

    pub fn holds(&self, x: Q, y: Q) -> bool {
        let v = self.value(x, y);
        if self.strict {
            v < self.c
        } else {
            v <= self.c
        }
    }

    pub fn complement(&self) -> HalfPlane {
        HalfPlane {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            strict: !self.strict,
        }
    }

    fn closed(&self) -> HalfPlane {
        HalfPlane {
            strict: false,
            ..*self
        }
    }
}

fn unit_square() -> [HalfPlane; 4] {
    let (z, o) = (Q::zero(), Q::one());
    [
        HalfPlane::new(-o, z, z, false),
        HalfPlane::new(o, z, o, false),
        HalfPlane::new(z, -o, z, false),
        HalfPlane::new(z, o, o, false),
    ]
}

/// A convex polygon in the unit square plus exceptional points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub constraints: Vec<HalfPlane>,
    pub exceptional: Vec<ExponentPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    Delta0,
    Delta1,
    Delta2,
    Delta3,
}

impl RegionKind {
    pub fn parse(name: &str) -> Result<RegionKind> {
        match name.to_ascii_lowercase().as_str() {
            "delta0" | "d0" => Ok(RegionKind::Delta0),
            "delta1" | "d1" => Ok(RegionKind::Delta1),
            "delta2" | "d2" => Ok(RegionKind::Delta2),
            "delta3" | "d3" => Ok(RegionKind::Delta3),
            other => Err(invalid(format!("unknown region {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::Delta0 => "delta0",
            RegionKind::Delta1 => "delta1",
            RegionKind::Delta2 => "delta2",
            RegionKind::Delta3 => "delta3",
        }
    }
}

impl Region {
    pub fn new(
        name: impl Into<String>,
        constraints: Vec<HalfPlane>,
        exceptional: Vec<ExponentPoint>,
    ) -> Self {
        Region {
            name: name.into(),
            constraints,
            exceptional,
        }
    }

    /// The named regions; `d` is ignored for the circular region.
    pub fn named(kind: RegionKind, d: u32) -> Result<Region> {
        if kind != RegionKind::Delta0 && d < 2 {
            return Err(invalid("type order d must be at least 2"));
        }
        let (z, o) = (Q::zero(), Q::one());
        let dq = Q::from_integer(d as i64);
        // 1/(2p) < 1/q  ⇔  x/2 − y < 0
        let lower_diag = HalfPlane::new(q(1, 2), -o, z, true);
        // 1/q ≤ 1/p  ⇔  −x + y ≤ 0
        let upper_diag = HalfPlane::new(-o, o, z, false);
        // 1/q > s/p − 1  ⇔  s·x − y < 1
        let slope = |s: Q| HalfPlane::new(s, -o, o, true);
        // 1/q > 1/p − 1/(d+1)  ⇔  x − y < 1/(d+1)
        let type_cut = HalfPlane::new(o, -o, (dq + o).recip(), true);
        let origin = ExponentPoint { inv_p: z, inv_q: z };
        let (constraints, exceptional) = match kind {
            RegionKind::Delta0 => (
                vec![lower_diag, upper_diag, slope(Q::from_integer(3))],
                vec![origin],
            ),
            RegionKind::Delta1 => (
                vec![lower_diag, upper_diag, slope(Q::from_integer(3)), type_cut],
                vec![origin],
            ),
            RegionKind::Delta2 => (vec![lower_diag, upper_diag, slope(dq + o)], vec![origin]),
            RegionKind::Delta3 => (
                vec![lower_diag, upper_diag, slope(Q::from_integer(2)), type_cut],
                vec![origin, ExponentPoint { inv_p: o, inv_q: o }],
            ),
        };
        let name = match kind {
            RegionKind::Delta0 => kind.name().to_string(),
            _ => format!("{}(d={d})", kind.name()),
        };
        Ok(Region::new(name, constraints, exceptional))
    }

    fn all_constraints(&self) -> Vec<HalfPlane> {
        let mut all = unit_square().to_vec();
        all.extend_from_slice(&self.constraints);
        all
    }

    pub fn contains(&self, pt: &ExponentPoint) -> bool {
        self.exceptional.contains(pt) || self.polygon_contains(pt.inv_p, pt.inv_q)
    }

    fn polygon_contains(&self, x: Q, y: Q) -> bool {
        self.all_constraints().iter().all(|h| h.holds(x, y))
    }

    /// Vertices of the closure of the polygonal part, counter-clockwise.
    pub fn closure_vertices(&self) -> Vec<ExponentPoint> {
        vertices(&self.all_constraints())
    }
}

/// `in_region` for the named regions.
pub fn in_region(kind: RegionKind, d: u32, pt: &ExponentPoint) -> Result<bool> {
    Ok(Region::named(kind, d)?.contains(pt))
}

/// `{(x, y) : (x, 1 − y) ∈ L}`.
pub fn dual_region(region: &Region) -> Region {
    let constraints = region
        .constraints
        .iter()
        .map(|h| HalfPlane {
            a: h.a,
            b: -h.b,
            c: h.c - h.b,
            strict: h.strict,
        })
        .collect();
    let exceptional = region
        .exceptional
        .iter()
        .map(|p| ExponentPoint {
            inv_p: p.inv_p,
            inv_q: Q::one() - p.inv_q,
        })
        .collect();
    let name = match region.name.strip_suffix('\'') {
        Some(base) => base.to_string(),
        None => format!("{}'", region.name),
    };
    Region::new(name, constraints, exceptional)
}

fn intersect(h1: &HalfPlane, h2: &HalfPlane) -> Option<(Q, Q)> {
    let det = h1.a * h2.b - h1.b * h2.a;
    if det.is_zero() {
        return None;
    }
    let x = (h1.c * h2.b - h1.b * h2.c) / det;
    let y = (h1.a * h2.c - h1.c * h2.a) / det;
    Some((x, y))
}

/// Vertices of the closed polygon `∩ closure(h)`, counter-clockwise.
fn vertices(constraints: &[HalfPlane]) -> Vec<ExponentPoint> {
    let closed: Vec<HalfPlane> = constraints.iter().map(HalfPlane::closed).collect();
    let mut pts: Vec<(Q, Q)> = Vec::new();
    for i in 0..closed.len() {
        for j in i + 1..closed.len() {
            if let Some((x, y)) = intersect(&closed[i], &closed[j]) {
                if closed.iter().all(|h| h.holds(x, y)) && !pts.contains(&(x, y)) {
                    pts.push((x, y));
                }
            }
        }
    }
    sort_ccw(&mut pts);
    pts.into_iter()
        .map(|(inv_p, inv_q)| ExponentPoint { inv_p, inv_q })
        .collect()
}

fn sort_ccw(pts: &mut [(Q, Q)]) {
    if pts.len() < 3 {
        pts.sort();
        return;
    }
    let n = Q::from_integer(pts.len() as i64);
    let cx = pts.iter().fold(Q::zero(), |s, p| s + p.0) / n;
    let cy = pts.iter().fold(Q::zero(), |s, p| s + p.1) / n;
    // Half-plane split by angle, then cross-product order within halves.
    let upper = |p: &(Q, Q)| p.1 > cy || (p.1 == cy && p.0 > cx);
    pts.sort_by(|p, r| {
        let (hp, hr) = (upper(p), upper(r));
        if hp != hr {
            return hr.cmp(&hp);
        }
        let cross = (p.0 - cx) * (r.1 - cy) - (p.1 - cy) * (r.0 - cx);
        Q::zero().cmp(&cross)
    });
}

/// Shape of a convex set given by strict and weak half-planes.
enum Shape {
    Empty,
    Point(ExponentPoint),
    Infinite(ExponentPoint),
}

fn classify(constraints: &[HalfPlane]) -> Shape {
    let verts = vertices(constraints);
    let inside = |x: Q, y: Q| constraints.iter().all(|h| h.holds(x, y));
    match verts.len() {
        0 => Shape::Empty,
        1 => {
            let v = verts[0];
            if inside(v.inv_p, v.inv_q) {
                Shape::Point(v)
            } else {
                Shape::Empty
            }
        }
        _ => {
            let first = verts[0];
            let collinear = verts.iter().all(|v| {
                let w = verts[1];
                (w.inv_p - first.inv_p) * (v.inv_q - first.inv_q)
                    == (w.inv_q - first.inv_q) * (v.inv_p - first.inv_p)
            });
            let n = Q::from_integer(verts.len() as i64);
            let (mx, my) = if collinear {
                let (mut lo, mut hi) = (first, first);
                for v in &verts {
                    if (v.inv_p, v.inv_q) < (lo.inv_p, lo.inv_q) {
                        lo = *v;
                    }
                    if (v.inv_p, v.inv_q) > (hi.inv_p, hi.inv_q) {
                        hi = *v;
                    }
                }
                ((lo.inv_p + hi.inv_p) / 2, (lo.inv_q + hi.inv_q) / 2)
            } else {
                (
                    verts.iter().fold(Q::zero(), |s, v| s + v.inv_p) / n,
                    verts.iter().fold(Q::zero(), |s, v| s + v.inv_q) / n,
                )
            };
            if inside(mx, my) {
                Shape::Infinite(ExponentPoint {
                    inv_p: mx,
                    inv_q: my,
                })
            } else {
                Shape::Empty
            }
        }
    }
}

/// A point of `A \ B`, or `None` when `A ⊆ B`.
pub fn difference_witness(a: &Region, b: &Region) -> Option<ExponentPoint> {
    for e in &a.exceptional {
        if !b.contains(e) {
            return Some(*e);
        }
    }
    let base = a.all_constraints();
    for h in &b.constraints {
        let mut cs = base.clone();
        cs.push(h.complement());
        match classify(&cs) {
            Shape::Empty => {}
            Shape::Point(p) => {
                if !b.exceptional.contains(&p) {
                    return Some(p);
                }
            }
            Shape::Infinite(p) => {
                // The set is infinite, so some point avoids the finitely many
                // exceptional points of `b`; the probe usually does.
                if !b.contains(&p) {
                    return Some(p);
                }
                return Some(avoid_points(&cs, b));
            }
        }
    }
    None
}

/// A point of the infinite convex set `cs` outside `b`.
fn avoid_points(cs: &[HalfPlane], b: &Region) -> ExponentPoint {
    let verts = vertices(cs);
    let inside = |x: Q, y: Q| cs.iter().all(|h| h.holds(x, y));
    for i in 0..verts.len() {
        for j in 0..verts.len() {
            for w in 1..8i64 {
                let t = q(w, 8);
                let x = verts[i].inv_p * t + verts[j].inv_p * (Q::one() - t);
                let y = verts[i].inv_q * t + verts[j].inv_q * (Q::one() - t);
                let p = ExponentPoint { inv_p: x, inv_q: y };
                if inside(x, y) && !b.contains(&p) {
                    return p;
                }
            }
        }
    }
    unreachable!("an infinite convex set is not covered by finitely many points")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    FirstInSecond,
    SecondInFirst,
    Incomparable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Equal => "equal",
            Verdict::FirstInSecond => "subset",
            Verdict::SecondInFirst => "superset",
            Verdict::Incomparable => "incomparable",
        };
        f.write_str(s)
    }
}

/// Result of comparing two regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub verdict: Verdict,
    /// A point in the first region but not the second.
    pub only_first: Option<ExponentPoint>,
    /// A point in the second region but not the first.
    pub only_second: Option<ExponentPoint>,
    /// First grid points (denominator `samples`) in each difference.
    pub scan_only_first: Option<ExponentPoint>,
    pub scan_only_second: Option<ExponentPoint>,
    /// Whether the grid scan is consistent with the exact verdict.
    pub scan_consistent: bool,
}

/// Exact comparison by half-plane implication, cross-checked on the grid
/// of points with denominator `samples`.
pub fn compare_regions(a: &Region, b: &Region, samples: u32) -> Result<Comparison> {
    if samples == 0 {
        return Err(invalid("samples must be at least 1"));
    }
    let only_first = difference_witness(a, b);
    let only_second = difference_witness(b, a);
    let verdict = match (only_first.is_some(), only_second.is_some()) {
        (false, false) => Verdict::Equal,
        (false, true) => Verdict::FirstInSecond,
        (true, false) => Verdict::SecondInFirst,
        (true, true) => Verdict::Incomparable,
    };
    let n = samples as i64;
    let (mut scan_first, mut scan_second) = (None, None);
    for i in 0..=n {
        for j in 0..=n {
            let p = ExponentPoint {
                inv_p: q(i, n),
                inv_q: q(j, n),
            };
            let (ia, ib) = (a.contains(&p), b.contains(&p));
            if ia && !ib && scan_first.is_none() {
                scan_first = Some(p);
            }
            if ib && !ia && scan_second.is_none() {
                scan_second = Some(p);
            }
        }
    }
    let scan_consistent = (only_first.is_some() || scan_first.is_none())
        && (only_second.is_some() || scan_second.is_none());
    Ok(Comparison {
        verdict,
        only_first,
        only_second,
        scan_only_first: scan_first,
        scan_only_second: scan_second,
        scan_consistent,
    })
}

/// The closed boundary polyline of the polygonal part, first vertex
/// repeated at the end.
pub fn boundary_polyline(region: &Region) -> Vec<ExponentPoint> {
    let mut v = region.closure_vertices();
    if let Some(&first) = v.first() {
        v.push(first);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: i64, b: i64, c: i64, d: i64) -> ExponentPoint {
        ExponentPoint::from_ratios((a, b), (c, d)).unwrap()
    }

    #[test]
    fn membership_examples() {
        for d in 2..8 {
            assert!(in_region(RegionKind::Delta1, d, &pt(0, 1, 0, 1)).unwrap());
        }
        assert!(in_region(RegionKind::Delta3, 2, &pt(1, 1, 1, 1)).unwrap());
        assert!(!in_region(RegionKind::Delta0, 2, &pt(1, 1, 1, 1)).unwrap());
        assert!(!in_region(RegionKind::Delta0, 2, &pt(1, 2, 1, 2)).unwrap());
        assert!(in_region(RegionKind::Delta0, 2, &pt(1, 3, 1, 4)).unwrap());
    }

    #[test]
    fn dual_examples() {
        let l = Region::new("l", vec![], vec![pt(0, 1, 0, 1)]);
        let l = Region {
            constraints: Region::named(RegionKind::Delta3, 2).unwrap().constraints,
            ..l
        };
        let dual = dual_region(&l);
        assert!(l.contains(&pt(1, 2, 1, 3)));
        assert!(dual.contains(&pt(1, 2, 2, 3)));
        assert!(dual.contains(&pt(0, 1, 1, 1)));
        assert_eq!(dual_region(&dual), l);
    }

    #[test]
    fn known_comparisons() {
        let d0 = Region::named(RegionKind::Delta0, 0).unwrap();
        for d in 2..=4 {
            let c =
                compare_regions(&Region::named(RegionKind::Delta1, d).unwrap(), &d0, 120).unwrap();
            assert_eq!(c.verdict, Verdict::Equal, "d={d}");
            assert!(c.scan_consistent);
        }
        let c = compare_regions(&Region::named(RegionKind::Delta1, 5).unwrap(), &d0, 120).unwrap();
        assert_eq!(c.verdict, Verdict::FirstInSecond);
        let w = c.scan_only_second.unwrap();
        assert!(d0.contains(&w) && !Region::named(RegionKind::Delta1, 5).unwrap().contains(&w));
        let c = compare_regions(&Region::named(RegionKind::Delta2, 2).unwrap(), &d0, 120).unwrap();
        assert_eq!(c.verdict, Verdict::Equal);
        let c = compare_regions(&Region::named(RegionKind::Delta2, 3).unwrap(), &d0, 120).unwrap();
        assert_eq!(c.verdict, Verdict::FirstInSecond);
        let c = compare_regions(&d0, &Region::named(RegionKind::Delta3, 2).unwrap(), 120).unwrap();
        assert_eq!(c.verdict, Verdict::FirstInSecond);
    }

    #[test]
    fn polygon_vertices() {
        let d0 = Region::named(RegionKind::Delta0, 0).unwrap();
        let v = d0.closure_vertices();
        assert_eq!(v.len(), 3);
        for p in [pt(0, 1, 0, 1), pt(1, 2, 1, 2), pt(2, 5, 1, 5)] {
            assert!(v.contains(&p), "{p}");
        }
        // The lower vertex of the Δ3 polygon lies on both cut lines.
        let d3 = Region::named(RegionKind::Delta3, 3).unwrap();
        assert!(d3.closure_vertices().contains(&pt(3, 4, 2, 4)));
    }
}
