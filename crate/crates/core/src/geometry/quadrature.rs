//! Adaptive Gauss–Kronrod and fixed Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Five-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// One 15-point Kronrod panel: (Kronrod value, |Kronrod − Gauss|).
fn kronrod_panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive Gauss–Kronrod integration of a complex integrand on `[a, b]`.
///
/// Starts from `initial_panels` equal panels and bisects the panel with the
/// largest error estimate until the summed estimate is below `tol`.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(
            "quadrature tolerance must be positive".into(),
        ));
    }
    if a == b {
        return Ok(Quadrature {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        });
    }
    let n0 = initial_panels.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let h = (b - a) / n0 as f64;
    for i in 0..n0 {
        let lo = a + h * i as f64;
        let hi = if i + 1 == n0 {
            b
        } else {
            a + h * (i + 1) as f64
        };
        let (value, error) = kronrod_panel(&f, lo, hi);
        heap.push(Panel {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let total_error = |heap: &BinaryHeap<Panel>| heap.iter().map(|p| p.error).sum::<f64>();
    let mut err = total_error(&heap);
    let mut iterations = 0usize;
    while err > tol && heap.len() < max_panels {
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod_panel(&f, worst.a, mid);
        let (v2, e2) = kronrod_panel(&f, mid, worst.b);
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        iterations += 1;
        // Recompute occasionally to avoid drift from incremental updates.
        err = if iterations % 64 == 0 {
            total_error(&heap)
        } else {
            err - worst.error + e1 + e2
        };
    }
    let err = total_error(&heap);
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels
        .iter()
        .fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    if err > tol {
        return Err(Error::Quadrature {
            requested: tol,
            achieved: err,
        });
    }
    Ok(Quadrature {
        value,
        error: err,
        panels: panels.len(),
    })
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: f64,
    max_panels: usize,
) -> Result<(f64, f64)> {
    let q = integrate_complex(
        |x| Complex64::new(f(x), 0.0),
        a,
        b,
        initial_panels,
        tol,
        max_panels,
    )?;
    Ok((q.value.re, q.error))
}

/// Composite five-point Gauss–Legendre rule over `[a, b]` with `pieces`
/// equal sub-intervals.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for i in 0..pieces {
        let lo = a + h * i as f64;
        let c = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
            s += w * f(c + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}
