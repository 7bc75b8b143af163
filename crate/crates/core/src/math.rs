//! Thin dispatch layer over the float intrinsics so the crate builds both
//! with `std` and with `libm` under `no_std`.

#![allow(dead_code)]

macro_rules! dispatch1 {
    ($name:ident) => {
        #[inline]
        pub(crate) fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            {
                x.$name()
            }
            #[cfg(not(feature = "std"))]
            {
                libm::$name(x)
            }
        }
    };
}

dispatch1!(exp);
dispatch1!(sqrt);
dispatch1!(floor);

#[inline]
pub(crate) fn log1p(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.ln_1p()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::log1p(x)
    }
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.ln()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::log(x)
    }
}

#[inline]
pub(crate) fn expm1(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.exp_m1()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::expm1(x)
    }
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !(1u64 << 63))
}

/// Fused multiply-add; a single rounding, required by the error-free
/// transformations in [`crate::compensated`].
#[inline]
pub(crate) fn fma(a: f64, b: f64, c: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::fma(a, b, c)
    }
}

/// `x^n` by binary exponentiation, for the small integer exponents the
/// closed forms use directly.
#[inline]
pub(crate) fn powi(x: f64, mut n: u64) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}
