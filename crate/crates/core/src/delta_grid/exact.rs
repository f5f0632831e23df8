//! Exact coordinates of the form `num · 2^exp / 3`.
//!
//! Every corner of a cube in a shifted grid, and every finite `f64`, has this
//! form, so containment and nesting can be decided without rounding.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy)]
pub struct Triadic {
    num: i128,
    exp: i32,
}

fn bit_len(n: i128) -> u32 {
    128 - n.unsigned_abs().leading_zeros()
}

/// Compares `n1·2^e1` with `n2·2^e2`.
fn cmp_scaled(n1: i128, e1: i32, n2: i128, e2: i32) -> Ordering {
    let s1 = n1.signum();
    let s2 = n2.signum();
    if s1 != s2 || s1 == 0 {
        return s1.cmp(&s2);
    }
    let top1 = bit_len(n1) as i64 + e1 as i64;
    let top2 = bit_len(n2) as i64 + e2 as i64;
    if top1 != top2 {
        let mag = top1.cmp(&top2);
        return if s1 > 0 { mag } else { mag.reverse() };
    }
    // Equal leading bit positions: the exponent gap is bounded by the bit
    // lengths, so the shift below cannot overflow.
    if e1 >= e2 {
        (n1 << (e1 - e2) as u32).cmp(&n2)
    } else {
        n1.cmp(&(n2 << (e2 - e1) as u32))
    }
}

impl Triadic {
    /// The value `num · 2^exp / 3`.
    pub fn new(num: i128, exp: i32) -> Self {
        Triadic { num, exp }
    }

    pub fn zero() -> Self {
        Triadic { num: 0, exp: 0 }
    }

    /// Exact conversion of a finite float.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        if x == 0.0 {
            return Some(Triadic::zero());
        }
        let bits = x.to_bits();
        let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i128 << 52), raw_exp - 1075)
        };
        Some(Triadic {
            num: 3 * sign * mant,
            exp,
        })
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn exp(&self) -> i32 {
        self.exp
    }

    /// Float approximation; exact whenever the value is representable and
    /// the numerator is a multiple of three.
    pub fn to_f64(&self) -> f64 {
        if self.num % 3 == 0 {
            scale2((self.num / 3) as f64, self.exp)
        } else {
            scale2(self.num as f64 / 3.0, self.exp)
        }
    }

    /// Exact difference, if the aligned numerators fit in 128 bits.
    pub fn checked_sub(&self, other: &Triadic) -> Option<Triadic> {
        let e = self.exp.min(other.exp);
        let a = shl_checked(self.num, (self.exp - e) as u32)?;
        let b = shl_checked(other.num, (other.exp - e) as u32)?;
        Some(Triadic {
            num: a.checked_sub(b)?,
            exp: e,
        })
    }

    pub fn checked_add(&self, other: &Triadic) -> Option<Triadic> {
        let neg = Triadic {
            num: -other.num,
            exp: other.exp,
        };
        self.checked_sub(&neg)
    }

    pub fn checked_mul_int(&self, k: i128) -> Option<Triadic> {
        Some(Triadic {
            num: self.num.checked_mul(k)?,
            exp: self.exp,
        })
    }
}

/// `x · 2^e` without intermediate overflow or underflow.
fn scale2(mut x: f64, mut e: i32) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e)
}

pub(crate) fn shl_checked(n: i128, s: u32) -> Option<i128> {
    if n == 0 {
        return Some(0);
    }
    if bit_len(n) + s > 126 {
        return None;
    }
    Some(n << s)
}

impl PartialEq for Triadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Triadic {}

impl PartialOrd for Triadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Triadic {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_scaled(self.num, self.exp, other.num, other.exp)
    }
}
