//! Compensated floating-point building blocks.
//!
//! Two tiers live here. [`NeumaierSum`] is the everyday compensated
//! accumulator used by the closed-form sums and the truncated series
//! checks. [`Expansion`] is a multi-component f64 expansion (error-free
//! transformations in the style of Shewchuk's adaptive-precision
//! arithmetic): addition, subtraction and multiplication are exact,
//! division is iteratively refined to ~150 bits. The expansion tier exists
//! because the alternating binomial sum for the infinite-window expectation
//! cancels catastrophically — its terms reach ~1e29 around `n = 100` while
//! the result stays below 100, so plain f64 terms, however carefully
//! summed, carry no information. Expansions keep the terms exact and the
//! cancellation harmless.

use crate::math;
use alloc::vec::Vec;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if math::abs(self.sum) >= math::abs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Exact sum of two floats: returns `(fl(a+b), error)`. Knuth's branchless
/// version, valid for any ordering of magnitudes.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

/// Exact product via fused multiply-add.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, math::fma(a, b, -p))
}

/// A number stored as a sum of f64 components in roughly increasing
/// magnitude order. The empty expansion is zero.
///
/// Every operation is a chain of error-free transformations, so the value
/// represented is exact regardless of component count; compression keeps
/// the component count small. Components that underflow below the
/// subnormal range are flushed to zero and dropped; the absolute error this
/// introduces is below ~1e-290 per operation, irrelevant at the precisions
/// targeted here.
#[derive(Clone, Debug, Default)]
pub struct Expansion(Vec<f64>);

impl Expansion {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            Self(alloc::vec![x])
        }
    }

    /// Exact conversion from an unsigned 128-bit integer (at most three
    /// components of 53 bits each, low chunk first).
    pub fn from_u128(mut v: u128) -> Self {
        let mut comps = Vec::new();
        let mut scale = 1.0f64;
        while v > 0 {
            let chunk = (v & ((1u128 << 53) - 1)) as f64;
            if chunk != 0.0 {
                comps.push(chunk * scale);
            }
            v >>= 53;
            scale *= 9007199254740992.0; // 2^53
        }
        Self(comps)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Rounded value (summed small-to-large).
    pub fn value(&self) -> f64 {
        let mut acc = 0.0;
        for &c in &self.0 {
            acc += c;
        }
        acc
    }

    pub fn negate(&self) -> Self {
        Self(self.0.iter().map(|&c| -c).collect())
    }

    /// Grow the expansion by a single float (exact).
    fn grow(&self, b: f64) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut q = b;
        for &e in &self.0 {
            let (s, h) = two_sum(q, e);
            if h != 0.0 {
                out.push(h);
            }
            q = s;
        }
        if q != 0.0 {
            out.push(q);
        }
        Self(out)
    }

    /// Exact sum of two expansions.
    pub fn add(&self, other: &Self) -> Self {
        let mut acc = self.clone();
        for &b in &other.0 {
            acc = acc.grow(b);
        }
        acc.compressed()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    /// Exact product by a single float (SCALE-EXPANSION).
    pub fn scale(&self, b: f64) -> Self {
        if self.0.is_empty() || b == 0.0 {
            return Self::zero();
        }
        let mut out = Vec::with_capacity(2 * self.0.len());
        let (mut q, h) = two_prod(self.0[0], b);
        if h != 0.0 {
            out.push(h);
        }
        for &e in &self.0[1..] {
            let (t, t_err) = two_prod(e, b);
            let (q1, h1) = two_sum(q, t_err);
            if h1 != 0.0 {
                out.push(h1);
            }
            let (q2, h2) = two_sum(t, q1);
            if h2 != 0.0 {
                out.push(h2);
            }
            q = q2;
        }
        if q != 0.0 {
            out.push(q);
        }
        Self(out).compressed()
    }

    /// Exact product of two expansions.
    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = Self::zero();
        for &b in &other.0 {
            acc = acc.add(&self.scale(b));
        }
        acc
    }

    /// `self^n` by binary exponentiation (exact up to underflow flushing).
    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_f64(1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Quotient refined to three components (~150-bit relative accuracy).
    pub fn div_approx(&self, den: &Self) -> Self {
        let d = den.value();
        debug_assert!(d != 0.0, "division by zero expansion");
        let mut quotient = Self::zero();
        let mut residual = self.clone();
        for _ in 0..3 {
            let w = residual.value() / d;
            if w == 0.0 {
                break;
            }
            quotient = quotient.add(&Self::from_f64(w));
            residual = residual.sub(&den.scale(w));
        }
        quotient
    }

    /// Two-pass renormalization: same value, fewer components. Uses the
    /// branchless exact sum throughout so the value is preserved even if
    /// the input ordering discipline has degraded.
    fn compressed(self) -> Self {
        let e = &self.0;
        let m = e.len();
        if m <= 2 {
            return self;
        }
        // Downward pass: absorb components into a running head, keeping
        // the roundoffs.
        let mut kept = alloc::vec![0.0f64; m];
        let mut bottom = m - 1;
        let mut q = e[m - 1];
        for i in (0..m - 1).rev() {
            let (big, small) = two_sum(q, e[i]);
            if small != 0.0 {
                kept[bottom] = big;
                bottom -= 1;
                q = small;
            } else {
                q = big;
            }
        }
        kept[bottom] = q;
        // Upward pass: emit definitive components, smallest first.
        let mut out = Vec::with_capacity(m - bottom);
        let mut q = kept[bottom];
        for &gi in &kept[bottom + 1..] {
            let (big, small) = two_sum(gi, q);
            if small != 0.0 {
                out.push(small);
            }
            q = big;
        }
        if q != 0.0 {
            out.push(q);
        }
        Self(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn two_sum_is_exact() {
        let (s, e) = two_sum(1e16, 1.0);
        assert_eq!(s, 1e16);
        assert_eq!(e, 1.0);
    }

    #[test]
    fn u128_round_trips() {
        let v = 100891344545564193334812497256u128; // C(100, 50)
        let e = Expansion::from_u128(v);
        assert_eq!(e.value(), v as f64);
        let back = e.sub(&e);
        assert!(back.is_zero() || back.value() == 0.0);
    }

    #[test]
    fn scale_and_mul_are_exact() {
        let tiny = 2f64.powi(-100);
        let a = Expansion::from_f64(1.0).add(&Expansion::from_f64(tiny));
        let b = a.scale(3.0);
        let direct = Expansion::from_f64(3.0).add(&Expansion::from_f64(3.0 * tiny));
        assert_eq!(b.sub(&direct).value(), 0.0);

        // q^4 for the f64 nearest 0.1 must equal the exact 4th power of its
        // dyadic value m * 2^-56.
        let q = Expansion::from_f64(0.1);
        let q4 = q.powi(4);
        let m = (0.1f64.to_bits() & ((1 << 52) - 1)) | (1 << 52);
        let exact = Expansion::from_u128(m as u128)
            .powi(4)
            .scale(2f64.powi(-56 * 4));
        assert_eq!(q4.sub(&exact).value(), 0.0);
    }

    #[test]
    fn division_is_accurate() {
        let num = Expansion::from_f64(1.0);
        let den = Expansion::from_f64(3.0);
        let q = num.div_approx(&den);
        let r = num.sub(&den.mul(&q));
        assert!(r.value().abs() < 1e-46);
    }

    #[test]
    fn powi_with_underflow_keeps_relative_accuracy() {
        // (1 - 2^-60)^(2^20): expansion arithmetic with flushing must agree
        // with the expm1/log1p route to ~1e-14 relative.
        let x = Expansion::from_f64(1.0).add(&Expansion::from_f64(-(2f64.powi(-60))));
        let p = x.powi(1 << 20).value();
        let reference = ((1u64 << 20) as f64 * (-(2f64.powi(-60))).ln_1p()).exp();
        assert!((p - reference).abs() / reference < 1e-14);
    }
}
