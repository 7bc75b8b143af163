//! Numerically careful evaluation paths and truncation checks.
//!
//! * [`stable_power_term`] / [`stable_one_minus_pow`] — the power
//!   primitives every closed form routes through: binary exponentiation
//!   for small integer exponents, `exp(e ln q)` past 64, and
//!   `exp(n log1p(-q^j))` for `(1 - q^j)^n` so that huge `n` neither
//!   underflows to 0 nor rounds to 1 prematurely.
//! * [`perfect_direct_sum`] — the alternating binomial sum for the
//!   infinite-window expectation, evaluated term-exactly in expansion
//!   arithmetic. The plain f64 sum is meaningless well before n = 60
//!   (the terms grow to ~1e17 while the result stays below 50), so
//!   "compensated" here means full error-free transformations.
//! * [`perfect_via_finite_tau`] — approximates the same quantity from the
//!   finite-window expectation by doubling the window until it stops
//!   moving; the preferred route for large `n`.
//! * [`verify_series_identities`] — truncation checks of the geometric
//!   series identities the derivations rest on, with analytic tail bounds.

use crate::analytic::AnalyticError;
use crate::combinatorics::{binomial_row, MAX_BINOMIAL_N};
use crate::compensated::{Expansion, NeumaierSum};
use crate::math;
use crate::params::GameParams;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Below this, `q^j` no longer changes `1 - q^j` in f64; loops over window
/// positions may close early and count the remaining factors as exactly 1.
pub(crate) const NEGLIGIBLE_Q_POW: f64 = f64::EPSILON / 2.0; // 2^-53

/// Window cap for the doubling search.
const MAX_DOUBLED_WINDOW: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityError {
    DomainError(&'static str),
    /// the doubling search passed the window cap without settling
    NoConvergence,
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::DomainError(what) => write!(f, "DomainError: {what}"),
            StabilityError::NoConvergence => write!(f, "NoConvergence: window cap exceeded"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StabilityError {}

impl From<StabilityError> for AnalyticError {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::DomainError(what) => AnalyticError::DomainError(what),
            StabilityError::NoConvergence => AnalyticError::NoConvergence,
        }
    }
}

/// `q^e` for `q` in [0, 1]: binary exponentiation for integer exponents up
/// to 64, `exp(e ln q)` beyond (and for fractional exponents).
pub fn stable_power_term(q: f64, exponent: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q), "q out of range");
    debug_assert!(exponent >= 0.0, "negative exponent");
    if exponent == 0.0 {
        return 1.0;
    }
    if q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return 1.0;
    }
    if exponent <= 64.0 && math::floor(exponent) == exponent {
        math::powi(q, exponent as u64)
    } else {
        math::exp(exponent * math::ln(q))
    }
}

/// `(1 - q^j)^n` via `exp(n log1p(-q^j))`: stays meaningful when `n q^j`
/// is tiny (no premature rounding to 1) and when it is huge (graceful
/// underflow to 0).
pub fn stable_one_minus_pow(q: f64, j: u32, n: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&q), "q out of range");
    if j == 0 {
        return 0.0;
    }
    let t = stable_power_term(q, j as f64);
    if t >= 1.0 {
        return 0.0;
    }
    math::exp(n as f64 * math::log1p(-t))
}

/// The alternating binomial sum `sum_{k=1}^{n} (-1)^{k+1} C(n,k)/(1-q^k)`
/// evaluated with exact terms: binomials exact in u128, `q^k` and `1-q^k`
/// exact f64 expansions, quotients refined to ~150 bits, summation exact.
/// Trustworthy over the whole supported range (`n <= 120`).
pub fn perfect_direct_sum(n: u32, q: f64) -> Result<f64, StabilityError> {
    if n < 1 {
        return Err(StabilityError::DomainError("need n >= 1"));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(StabilityError::DomainError("q must lie in [0, 1)"));
    }
    if n > MAX_BINOMIAL_N {
        return Err(StabilityError::DomainError(
            "n beyond exact binomial range; use the finite-window route",
        ));
    }
    if q == 0.0 {
        return Ok(1.0);
    }
    let row = binomial_row(n);
    let one = Expansion::from_f64(1.0);
    let q_exp = Expansion::from_f64(q);
    let mut q_pow = one.clone();
    let mut total = Expansion::zero();
    for (k, &coeff) in row.iter().enumerate().skip(1) {
        q_pow = q_pow.mul(&q_exp);
        let term = Expansion::from_u128(coeff).div_approx(&one.sub(&q_pow));
        total = if k % 2 == 1 {
            total.add(&term)
        } else {
            total.sub(&term)
        };
    }
    Ok(total.value())
}

/// Approximate the infinite-window expectation by evaluating the
/// finite-window formula at doubling windows until successive values agree
/// to `rel_err_target`. Returns the settled value and the window it used.
pub fn perfect_via_finite_tau(
    n: u32,
    q: f64,
    rel_err_target: f64,
) -> Result<(f64, u32), StabilityError> {
    if n < 1 {
        return Err(StabilityError::DomainError("need n >= 1"));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(StabilityError::DomainError("q must lie in [0, 1)"));
    }
    if rel_err_target.is_nan() || rel_err_target <= 0.0 {
        return Err(StabilityError::DomainError("rel_err_target must be > 0"));
    }
    let game = |tau: u32| {
        let params = GameParams::new(1.0 - q, n, tau).expect("q < 1 gives valid p");
        crate::analytic::game_expectation(&params)
    };
    let mut tau = 8u32;
    let mut prev = game(tau);
    while tau <= MAX_DOUBLED_WINDOW {
        tau *= 2;
        let cur = game(tau);
        if math::abs(cur - prev) <= rel_err_target * math::abs(cur) {
            return Ok((cur, tau));
        }
        prev = cur;
    }
    Err(StabilityError::NoConvergence)
}

/// One truncation check: a truncated sum against its closed form, with the
/// analytic tail bound (plus a small rounding allowance) it must sit under.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub label: String,
    pub truncated_sum: f64,
    pub closed_form: f64,
    pub abs_gap: f64,
    pub tail_bound: f64,
}

impl IdentityCheck {
    pub fn within_bound(&self) -> bool {
        self.abs_gap <= self.tail_bound
    }
}

#[derive(Clone, Debug)]
pub struct SeriesReport {
    pub checks: Vec<IdentityCheck>,
}

impl SeriesReport {
    pub fn all_within_bounds(&self) -> bool {
        self.checks.iter().all(IdentityCheck::within_bound)
    }
}

/// Truncation checks of the two series identities behind the closed forms:
///
/// 1. `sum_k (a + b k) q^k = a/(1-q) + b q/(1-q)^2`, truncated at `trunc`.
/// 2. The multi-index sum `sum_xi |xi| q^|xi|` over M-tuples, against both
///    its closed form `M q/(1-q)^{M+1}` and its factored form
///    `(M q/(1-q)) sum_xi q^|xi|`, for M in 1..=4 (per-axis truncation is
///    capped so the box stays ~2e6 points).
///
/// Each reported gap must sit below the analytic geometric tail of its
/// truncation plus a rounding allowance of a few ulps of the summed mass.
pub fn verify_series_identities(
    a: f64,
    b: f64,
    q: f64,
    trunc: u32,
) -> Result<SeriesReport, StabilityError> {
    if q.is_nan() || math::abs(q) >= 1.0 {
        return Err(StabilityError::DomainError("need |q| < 1"));
    }
    if trunc < 1 {
        return Err(StabilityError::DomainError("need trunc >= 1"));
    }
    let r = math::abs(q);
    let mut checks = Vec::new();

    // Identity 1: arithmetic-geometric series.
    {
        let mut sum = NeumaierSum::new();
        let mut abs_sum = NeumaierSum::new();
        let mut q_pow = 1.0f64;
        for k in 0..=trunc {
            let term = (a + b * k as f64) * q_pow;
            sum.add(term);
            abs_sum.add(math::abs(term));
            q_pow *= q;
        }
        let closed = a / (1.0 - q) + b * q / ((1.0 - q) * (1.0 - q));
        // Index-shifted tail: sum_{k>T} (|a|+|b|k) r^k.
        let t1 = trunc as f64 + 1.0;
        let tail = math::powi(r, trunc as u64 + 1)
            * ((math::abs(a) + math::abs(b) * t1) / (1.0 - r)
                + math::abs(b) * r / ((1.0 - r) * (1.0 - r)));
        let slack = 32.0 * f64::EPSILON * (abs_sum.value() + math::abs(closed));
        checks.push(IdentityCheck {
            label: alloc::format!("arithmetic-geometric series (trunc={trunc})"),
            truncated_sum: sum.value(),
            closed_form: closed,
            abs_gap: math::abs(sum.value() - closed),
            tail_bound: tail + slack,
        });
    }

    // Identity 2: multi-index sums over M-dimensional boxes.
    for m in 1u32..=4 {
        let per_axis_cap = match m {
            1 => 2_000_000,
            2 => 1413,
            3 => 125,
            _ => 37,
        };
        let t = trunc.min(per_axis_cap);
        let mut pow_table = Vec::with_capacity((m * t + 1) as usize);
        let mut acc = 1.0f64;
        for _ in 0..=m * t {
            pow_table.push(acc);
            acc *= q;
        }

        let mut lhs = NeumaierSum::new();
        let mut norm = NeumaierSum::new();
        let mut abs_mass = NeumaierSum::new();
        // Walk the box by dimension; `s` carries the running index sum.
        fn walk(
            dims_left: u32,
            s: u32,
            t: u32,
            pow_table: &[f64],
            lhs: &mut NeumaierSum,
            norm: &mut NeumaierSum,
            abs_mass: &mut NeumaierSum,
        ) {
            if dims_left == 0 {
                let w = pow_table[s as usize];
                lhs.add(s as f64 * w);
                norm.add(w);
                abs_mass.add((1.0 + s as f64) * math::abs(w));
                return;
            }
            for c in 0..=t {
                walk(dims_left - 1, s + c, t, pow_table, lhs, norm, abs_mass);
            }
        }
        walk(m, 0, t, &pow_table, &mut lhs, &mut norm, &mut abs_mass);

        let one_minus = 1.0 - q;
        let closed = m as f64 * q / math::powi(one_minus, m as u64 + 1);
        // Tail bounds: a point escapes the box when some coordinate
        // exceeds t; bound by M times the single-escaped-coordinate mass.
        let a_full = 1.0 / (1.0 - r);
        let b_full = r / ((1.0 - r) * (1.0 - r));
        let a_tail = math::powi(r, t as u64 + 1) / (1.0 - r);
        let b_tail = math::powi(r, t as u64 + 1) * ((t as f64 + 1.0) * (1.0 - r) + r)
            / ((1.0 - r) * (1.0 - r));
        let lhs_tail = m as f64
            * (b_tail * math::powi(a_full, m as u64 - 1)
                + (m as f64 - 1.0) * a_tail * b_full * math::powi(a_full, (m as u64).max(2) - 2));
        let norm_tail = m as f64 * a_tail * math::powi(a_full, m as u64 - 1);
        let slack = 64.0 * f64::EPSILON * (abs_mass.value() + math::abs(closed));

        checks.push(IdentityCheck {
            label: alloc::format!("multi-index sum M={m} vs closed form (per-axis trunc={t})"),
            truncated_sum: lhs.value(),
            closed_form: closed,
            abs_gap: math::abs(lhs.value() - closed),
            tail_bound: lhs_tail + slack,
        });
        let factored = m as f64 * q / one_minus * norm.value();
        checks.push(IdentityCheck {
            label: alloc::format!("multi-index sum M={m} vs factored form (per-axis trunc={t})"),
            truncated_sum: lhs.value(),
            closed_form: factored,
            abs_gap: math::abs(lhs.value() - factored),
            tail_bound: lhs_tail + math::abs(m as f64 * q / one_minus) * norm_tail + slack,
        });
    }

    Ok(SeriesReport { checks })
}
