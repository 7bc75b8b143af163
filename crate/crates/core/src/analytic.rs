//! Closed forms for the window game.
//!
//! Everything here is a pure function of the validated [`GameParams`]. The
//! central quantities, in the order they build on each other:
//!
//! * [`success_mass`] — the sp-numbers `(1-q^{v+1})^n - q^n (1-q^v)^n`:
//!   the unnormalized measure of the rounds that finish all `n` flips
//!   within window `v`.
//! * [`success_probability`] / [`failure_probability`] — a single round's
//!   outcome probabilities `P = sp(N,tau) / (1-q^N)` and `Q = 1 - P`.
//! * [`expected_sum_lambda_success`] / [`expected_sum_lambda_failure`] —
//!   the window-position sums over the success/failure parts of the
//!   trajectory space (these are measure-weighted sums, not means).
//! * [`expected_round_length`] and its success/failure split
//!   ([`expected_sum_round_length_success`] /
//!   [`expected_sum_round_length_failure`]) — mean steps of one round.
//! * [`game_expectation`] — mean total steps of the whole game,
//!   `<K> = <Lambda> / P`; [`game_expectation_alt`] is the independent
//!   binomial-expanded rearrangement used for cross-checking.
//! * [`perfect_expectation`] / [`perfect_limit`] — the infinite-window
//!   (perfect-memory) expectation, which the finite-window value converges
//!   to as `tau` grows.
//! * [`reset_expectation`] — adds `omega` steps per failed round:
//!   `<K_omega> = <K> + omega Q / P`.
//!
//! Numerical policy: all arithmetic is 64-bit floating point. Powers go
//! through the log1p/expm1 paths in [`crate::stability`], alternating sums
//! through [`crate::compensated`]. `p = 1` and `n = 1` are accepted
//! everywhere and fall out of the formulas (every round succeeds in one
//! step for `p = 1`; for `n = 1` the window never matters and
//! `<K> = 1/p` at any `tau`).

use crate::combinatorics::{binomial_row, pascal_triangle, MAX_BINOMIAL_N};
use crate::compensated::NeumaierSum;
use crate::math;
use crate::params::GameParams;
use crate::stability;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticError {
    /// argument outside the formula's domain
    DomainError(&'static str),
    /// a denominator vanishes at this argument; no finite value to return
    DegenerateCase(&'static str),
    /// the finite-window fallback did not converge
    NoConvergence,
}

impl fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticError::DomainError(what) => write!(f, "DomainError: {what}"),
            AnalyticError::DegenerateCase(what) => write!(f, "DegenerateCase: {what}"),
            AnalyticError::NoConvergence => write!(f, "NoConvergence"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AnalyticError {}

/// Direct alternating sums stay accurate (via expansion arithmetic) up to
/// this `n`; past it the finite-window route takes over.
pub(crate) const DIRECT_SUM_MAX_N: u32 = 60;

fn check_q(q: f64) -> Result<(), AnalyticError> {
    if !(0.0..1.0).contains(&q) {
        return Err(AnalyticError::DomainError("q must lie in [0, 1)"));
    }
    Ok(())
}

/// `1 - q^n`, kept accurate when `q` is close to 1.
#[inline]
pub(crate) fn one_minus_q_pow(q: f64, n: u32) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        -math::expm1(n as f64 * math::ln(q))
    }
}

/// `1 - (1 - q^j)^n`.
#[inline]
fn complement_pow(q: f64, j: u32, n: u32) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let qj = stability::stable_power_term(q, j as f64);
    -math::expm1(n as f64 * math::log1p(-qj))
}

/// `sum_{j=1}^{tau-1} (1 - (1 - q^j)^n)`, i.e. the complement form of
/// `tau - sum_{j=1}^{tau-1} (1 - q^j)^n` after absorbing the leading
/// `tau`: evaluated this way the long-window regime never subtracts two
/// numbers that both grow like `tau`. Once `q^j` drops below 2^-53 the
/// original factors round to 1, so the loop closes early and the dropped
/// complements count as exact zeros.
fn sum_complement_pow(q: f64, n: u32, tau: u32) -> f64 {
    let mut acc = NeumaierSum::new();
    for j in 1..tau {
        let qj = stability::stable_power_term(q, j as f64);
        if qj < stability::NEGLIGIBLE_Q_POW {
            break;
        }
        acc.add(-math::expm1(n as f64 * math::log1p(-qj)));
    }
    acc.value()
}

/// `sum_{j=0}^{tau-1} sp(n, j)`.
fn sum_success_mass(q: f64, n: u32, tau: u32) -> f64 {
    let mut acc = NeumaierSum::new();
    for j in 0..tau {
        acc.add(sp_unchecked(n, j as i64, q));
    }
    acc.value()
}

fn sp_unchecked(n: u32, window: i64, q: f64) -> f64 {
    if window < 0 {
        return 0.0;
    }
    let v = window as u32;
    let first = stability::stable_one_minus_pow(q, v + 1, n);
    if v == 0 {
        return first; // second term carries the factor (1 - q^0)^n = 0
    }
    let second = stability::stable_power_term(q, n as f64) * stability::stable_one_minus_pow(q, v, n);
    first - second
}

/// The sp-number `sp(n, window) = (1-q^{window+1})^n - q^n (1-q^window)^n`,
/// with the convention `sp(n, -1) = 0`: the g-mass of the successful
/// trajectories of an `n`-bit round under window `window`.
pub fn success_mass(n: u32, window: i64, q: f64) -> Result<f64, AnalyticError> {
    if n < 1 {
        return Err(AnalyticError::DomainError("need n >= 1"));
    }
    if window < -1 {
        return Err(AnalyticError::DomainError("window must be >= -1"));
    }
    check_q(q)?;
    Ok(sp_unchecked(n, window, q))
}

/// Expected steps to flip all `n` bits with no window at all: the
/// alternating binomial sum `sum_k C(n,k) (-1)^{k+1} / (1-q^k)`.
///
/// Up to `n = 60` this evaluates the sum directly in compensated expansion
/// arithmetic; past that the alternating terms outgrow any fixed-precision
/// headroom and the finite-window approximation route is used instead.
pub fn perfect_expectation(n: u32, q: f64) -> Result<f64, AnalyticError> {
    if n < 1 {
        return Err(AnalyticError::DomainError("need n >= 1"));
    }
    check_q(q)?;
    if q == 0.0 {
        return Ok(1.0);
    }
    if n <= DIRECT_SUM_MAX_N {
        stability::perfect_direct_sum(n, q).map_err(AnalyticError::from)
    } else {
        stability::perfect_via_finite_tau(n, q, 1e-12)
            .map(|(value, _)| value)
            .map_err(AnalyticError::from)
    }
}

/// The `tau -> infinity` limit of [`game_expectation`]. Identical to the
/// perfect-memory expectation, so this is literally the same code path as
/// [`perfect_expectation`] — the identity is the point.
pub fn perfect_limit(n: u32, q: f64) -> Result<f64, AnalyticError> {
    perfect_expectation(n, q)
}

/// Expected steps until at least `m` of `n` bits have flipped:
/// `sum_{k=0}^{m-1} (-1)^{m-1-k} C(n,k) C(n-k-1, m-1-k) / (1-q^{n-k})`.
///
/// Reduces to [`perfect_expectation`] at `m = n` and to the plain
/// geometric mean `1/(1-q^n)` at `m = 1`. `q = 0` returns the limit value
/// 1; `q = 1` has no finite value and is rejected. Evaluated as a
/// compensated alternating f64 sum; intended for moderate `n`.
pub fn at_least_m_expectation(m: u32, n: u32, q: f64) -> Result<f64, AnalyticError> {
    if m < 1 || m > n {
        return Err(AnalyticError::DomainError("need 1 <= m <= n"));
    }
    if n > MAX_BINOMIAL_N {
        return Err(AnalyticError::DomainError("n beyond exact binomial range"));
    }
    if q == 1.0 {
        return Err(AnalyticError::DegenerateCase(
            "q = 1: bits never flip, no finite expectation",
        ));
    }
    check_q(q)?;
    if q == 0.0 {
        return Ok(1.0); // every bit flips on the first step
    }
    let triangle = pascal_triangle(n);
    let mut acc = NeumaierSum::new();
    for k in 0..m {
        let c1 = triangle[n as usize][k as usize] as f64;
        let c2 = triangle[(n - k - 1) as usize][(m - 1 - k) as usize] as f64;
        let term = c1 * c2 / one_minus_q_pow(q, n - k);
        if (m - 1 - k) % 2 == 0 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    Ok(acc.value())
}

/// Probability that a single round succeeds: `P = sp(N, tau) / (1 - q^N)`.
pub fn success_probability(params: &GameParams) -> f64 {
    if params.p() == 1.0 {
        return 1.0;
    }
    sp_unchecked(params.n(), params.tau() as i64, params.q()) / one_minus_q_pow(params.q(), params.n())
}

/// `Q = 1 - P`.
pub fn failure_probability(params: &GameParams) -> f64 {
    1.0 - success_probability(params)
}

/// Measure-weighted sum of the last-flip position over successful
/// trajectories: `tau sp(N,tau) - sum_{j=0}^{tau-1} sp(N,j)`.
pub fn expected_sum_lambda_success(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    tau as f64 * sp_unchecked(n, tau as i64, q) - sum_success_mass(q, n, tau)
}

/// Measure-weighted sum of the window position over failed trajectories:
/// `tau (1 - q^N - sp(N,tau))`.
pub fn expected_sum_lambda_failure(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    tau as f64 * (one_minus_q_pow(q, n) - sp_unchecked(n, tau as i64, q))
}

/// Round-length sum over rounds that end in success:
/// `([1/(1-q^N) + tau] sp(N,tau) - sum_{j<tau} sp(N,j)) / (1-q^N)`.
pub fn expected_sum_round_length_success(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    let mass = one_minus_q_pow(q, n);
    ((1.0 / mass + tau as f64) * sp_unchecked(n, tau as i64, q) - sum_success_mass(q, n, tau)) / mass
}

/// Round-length sum over rounds that end in failure:
/// `[tau + 1/(1-q^N)] Q`.
pub fn expected_sum_round_length_failure(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    let mass = one_minus_q_pow(q, n);
    (tau as f64 + 1.0 / mass) * (1.0 - sp_unchecked(n, tau as i64, q) / mass)
}

/// Mean number of steps in a single round (success or failure):
/// `tau + (1 - (1-q^tau)^N)/(1-q^N) - sum_{j=1}^{tau-1} (1-q^j)^N`.
///
/// Evaluated as `complement/(1-q^N) + 1 + sum of complements` so that long
/// windows do not cancel: `tau - sum (1-q^j)^N` is a difference of two
/// numbers that both grow like `tau`.
pub fn expected_round_length(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    let head = complement_pow(q, tau, n) / one_minus_q_pow(q, n);
    if tau == 0 {
        head
    } else {
        head + 1.0 + sum_complement_pow(q, n, tau)
    }
}

/// Mean steps of the whole game until a round succeeds:
/// `<K> = [1 - (1-q^tau)^N + (1-q^N)(tau - sum_{j<tau} (1-q^j)^N)] / sp(N,tau)`,
/// which equals `expected_round_length / success_probability`.
pub fn game_expectation(params: &GameParams) -> f64 {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    let bracket = if tau == 0 {
        0.0
    } else {
        1.0 + sum_complement_pow(q, n, tau)
    };
    let numerator = complement_pow(q, tau, n) + one_minus_q_pow(q, n) * bracket;
    numerator / sp_unchecked(n, tau as i64, q)
}

/// The binomial-expanded rearrangement of [`game_expectation`], derived for
/// `N, tau >= 2`:
///
/// `[(1-q^N) - sum_{k=1}^{N} (-1)^k C(N,k) (q^{tau k} + (1-q^N)(q^k - q^{tau k})/(1-q^k))]`
/// `/ [(1-q^N) + sum_{k=1}^{N-1} (-1)^k C(N,k) q^{tau k} (q^k - q^N)]`.
///
/// An independent code path sharing nothing with [`game_expectation`]
/// except the power primitives; the two must agree to ~1e-10 over the
/// supported grid.
pub fn game_expectation_alt(params: &GameParams) -> Result<f64, AnalyticError> {
    let (n, tau, q) = (params.n(), params.tau(), params.q());
    if n < 2 || tau < 2 {
        return Err(AnalyticError::DomainError(
            "alternative form is derived for N >= 2 and tau >= 2",
        ));
    }
    if n > MAX_BINOMIAL_N {
        return Err(AnalyticError::DomainError("n beyond exact binomial range"));
    }
    let row = binomial_row(n);
    let mass = one_minus_q_pow(q, n);
    let qn = stability::stable_power_term(q, n as f64);

    let mut num = NeumaierSum::new();
    num.add(mass);
    let mut den = NeumaierSum::new();
    den.add(mass);
    for k in 1..=n {
        let c = row[k as usize] as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let qk = stability::stable_power_term(q, k as f64);
        let qtk = stability::stable_power_term(q, tau as f64 * k as f64);
        let bracket = qtk + mass * (qk - qtk) / (1.0 - qk);
        num.add(-sign * c * bracket);
        if k < n {
            den.add(sign * c * qtk * (qk - qn));
        }
    }
    Ok(num.value() / den.value())
}

/// `<K_omega> = <K> + omega Q / P`: the game expectation when every failed
/// round costs an extra `omega` steps to reset.
pub fn reset_expectation(params: &GameParams) -> f64 {
    let k = game_expectation(params);
    if params.omega() == 0 {
        return k;
    }
    let p_round = success_probability(params);
    k + params.omega() as f64 * (1.0 - p_round) / p_round
}

/// Everything the CLI reports for one parameter point.
#[derive(Clone, Copy, Debug)]
pub struct RateReport {
    /// round success probability P
    pub success_probability: f64,
    /// round failure probability Q = 1 - P
    pub failure_probability: f64,
    /// mean steps per round
    pub expected_round_length: f64,
    /// mean steps of the whole game
    pub expected_steps: f64,
    /// mean steps including the reset penalty
    pub expected_steps_with_reset: f64,
    /// infinite-window limit of the expectation
    pub perfect_limit: f64,
    /// (expected_steps - perfect_limit) / perfect_limit, floored at 0
    pub rel_gap_to_limit: f64,
}

/// Assemble the full [`RateReport`] for one parameter point.
pub fn full_report(params: &GameParams) -> Result<RateReport, AnalyticError> {
    let p_round = success_probability(params);
    let steps = game_expectation(params);
    let limit = perfect_limit(params.n(), params.q())?;
    Ok(RateReport {
        success_probability: p_round,
        failure_probability: 1.0 - p_round,
        expected_round_length: expected_round_length(params),
        expected_steps: steps,
        expected_steps_with_reset: reset_expectation(params),
        perfect_limit: limit,
        rel_gap_to_limit: ((steps - limit) / limit).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_params;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(p: f64, n: u32, tau: u32) -> GameParams {
        GameParams::new(p, n, tau).unwrap()
    }

    #[test]
    fn sp_examples() {
        // sp(n, -1) = 0 by convention.
        assert_eq!(success_mass(2, -1, 0.5).unwrap(), 0.0);
        // Hand evaluation of the definition.
        assert_abs_diff_eq!(success_mass(2, 1, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        // (1-q)^3 = p^3.
        assert_abs_diff_eq!(success_mass(3, 0, 0.5).unwrap(), 0.125, epsilon = 1e-15);
        assert!(success_mass(0, 1, 0.5).is_err());
        assert!(success_mass(2, 1, 1.0).is_err());
        assert!(success_mass(2, -2, 0.5).is_err());
    }

    #[test]
    fn sp_telescopes() {
        // sum_{s=0}^{tau} [sp(N,s) - sp(N,s-1)] = sp(N,tau), exactly in
        // exact arithmetic, to rounding here.
        for &q in &[0.1, 0.5, 0.9] {
            for n in 1..=5 {
                for tau in 0..=6i64 {
                    let mut acc = 0.0;
                    for s in 0..=tau {
                        acc += success_mass(n, s, q).unwrap() - success_mass(n, s - 1, q).unwrap();
                    }
                    assert_abs_diff_eq!(
                        acc,
                        success_mass(n, tau, q).unwrap(),
                        epsilon = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn perfect_expectation_anchors() {
        assert_relative_eq!(perfect_expectation(1, 0.5).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(
            perfect_expectation(2, 0.5).unwrap(),
            8.0 / 3.0,
            max_relative = 1e-14
        );
        assert_eq!(perfect_expectation(2, 0.0).unwrap(), 1.0);
        // single-term sum: 1/(1-q)
        for &q in &[0.1, 0.9] {
            assert_relative_eq!(
                perfect_limit(1, q).unwrap(),
                1.0 / (1.0 - q),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn at_least_m_matches_anchors() {
        assert_relative_eq!(at_least_m_expectation(1, 1, 0.5).unwrap(), 2.0, max_relative = 1e-15);
        // First of two bits: 1/(1-q^2).
        assert_relative_eq!(
            at_least_m_expectation(1, 2, 0.5).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-14
        );
        // Exact Markov-chain value computed by hand: 12/7.
        assert_relative_eq!(
            at_least_m_expectation(2, 3, 0.5).unwrap(),
            12.0 / 7.0,
            max_relative = 1e-14
        );
        // m = n reduces to the perfect-memory expectation.
        for n in 2..=4 {
            for &q in &[0.3, 0.5, 0.7] {
                assert_relative_eq!(
                    at_least_m_expectation(n, n, q).unwrap(),
                    perfect_expectation(n, q).unwrap(),
                    max_relative = 1e-10
                );
            }
        }
        assert_eq!(at_least_m_expectation(2, 3, 0.0).unwrap(), 1.0);
        assert!(matches!(
            at_least_m_expectation(2, 3, 1.0),
            Err(AnalyticError::DegenerateCase(_))
        ));
        assert!(at_least_m_expectation(3, 2, 0.5).is_err());
    }

    #[test]
    fn round_probabilities() {
        let g = params(0.5, 2, 1);
        assert_relative_eq!(success_probability(&g), 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(failure_probability(&g), 1.0 / 3.0, max_relative = 1e-13);
        assert_eq!(success_probability(&params(0.5, 1, 0)), 1.0);
        assert_eq!(success_probability(&params(1.0, 3, 0)), 1.0);
        assert_abs_diff_eq!(failure_probability(&params(0.5, 1, 5)), 0.0, epsilon = 1e-15);
        // tau = 0: 1 - p^2/(1-q^2) = 2/3 at p = 0.5.
        assert_relative_eq!(
            failure_probability(&params(0.5, 2, 0)),
            2.0 / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn lambda_sums_examples() {
        let g = params(0.5, 2, 1);
        assert_abs_diff_eq!(expected_sum_lambda_failure(&g), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(expected_sum_lambda_success(&g), 0.25, epsilon = 1e-15);
        for n in 1..=4 {
            for &p in &[0.3, 0.9] {
                let g = params(p, n, 0);
                assert_eq!(expected_sum_lambda_success(&g), 0.0);
                assert_eq!(expected_sum_lambda_failure(&g), 0.0);
            }
        }
    }

    #[test]
    fn round_length_examples() {
        assert_relative_eq!(
            expected_round_length(&params(0.5, 2, 0)),
            4.0 / 3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected_round_length(&params(0.5, 2, 1)), 2.0, max_relative = 1e-14);
        assert_relative_eq!(expected_round_length(&params(1.0, 5, 3)), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn round_length_splits_into_success_and_failure_parts() {
        for n in 1..=5 {
            for tau in 0..=6 {
                for &p in &[0.1, 0.3, 0.5, 0.7, 0.9, 1.0] {
                    let g = params(p, n, tau);
                    let total = expected_sum_round_length_success(&g)
                        + expected_sum_round_length_failure(&g);
                    assert_relative_eq!(total, expected_round_length(&g), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn game_expectation_examples() {
        assert_relative_eq!(game_expectation(&params(0.5, 2, 0)), 4.0, max_relative = 1e-13);
        assert_relative_eq!(game_expectation(&params(0.5, 2, 1)), 3.0, max_relative = 1e-13);
        assert_relative_eq!(game_expectation(&params(1.0, 4, 2)), 1.0, max_relative = 1e-15);
        // n = 1: the window is irrelevant, <K> = 1/p at every tau.
        for tau in 0..=20 {
            assert_relative_eq!(
                game_expectation(&params(0.25, 1, tau)),
                4.0,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn alt_form_agrees() {
        assert_relative_eq!(
            game_expectation_alt(&params(0.5, 2, 2)).unwrap(),
            game_expectation(&params(0.5, 2, 2)),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            game_expectation_alt(&params(0.3, 3, 4)).unwrap(),
            game_expectation(&params(0.3, 3, 4)),
            max_relative = 1e-10
        );
        assert!(game_expectation_alt(&params(0.5, 1, 2)).is_err());
        assert!(game_expectation_alt(&params(0.5, 2, 1)).is_err());
    }

    #[test]
    fn reset_examples() {
        let base = validate_params(0.5, 2, 1, 0).unwrap();
        assert_relative_eq!(reset_expectation(&base), 3.0, max_relative = 1e-13);
        let with_reset = validate_params(0.5, 2, 1, 2).unwrap();
        assert_relative_eq!(reset_expectation(&with_reset), 4.0, max_relative = 1e-13);
        let single = validate_params(0.5, 1, 0, 7).unwrap();
        assert_relative_eq!(reset_expectation(&single), 2.0, max_relative = 1e-13);
    }

    #[test]
    fn report_is_internally_consistent() {
        let g = validate_params(0.5, 2, 1, 0).unwrap();
        let r = full_report(&g).unwrap();
        assert_relative_eq!(r.success_probability, 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.expected_round_length, 2.0, max_relative = 1e-13);
        assert_relative_eq!(r.expected_steps, 3.0, max_relative = 1e-13);
        assert_relative_eq!(r.perfect_limit, 8.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(r.rel_gap_to_limit, 0.125, max_relative = 1e-12);

        let trivial = full_report(&validate_params(1.0, 3, 0, 0).unwrap()).unwrap();
        assert_eq!(trivial.success_probability, 1.0);
        assert_relative_eq!(trivial.expected_steps, 1.0, max_relative = 1e-15);
        assert_eq!(trivial.rel_gap_to_limit, 0.0);

        let single = full_report(&validate_params(0.5, 1, 0, 0).unwrap()).unwrap();
        assert_eq!(single.success_probability, 1.0);
        assert_relative_eq!(single.expected_round_length, 2.0, max_relative = 1e-14);
        assert_relative_eq!(single.expected_steps, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kavr_identity_on_grid() {
        for n in 1..=8 {
            for tau in 0..=8 {
                for step in 1..=9 {
                    let g = params(step as f64 / 10.0, n, tau);
                    let lhs = game_expectation(&g);
                    let rhs = expected_round_length(&g) / success_probability(&g);
                    assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn toy_model_decomposition() {
        // A + B Q/P = <K>, with A and B the per-outcome mean round lengths;
        // replacing B by B + omega gives the reset expectation.
        for n in 1..=5 {
            for tau in 0..=5 {
                for &p in &[0.2, 0.5, 0.8] {
                    let g = validate_params(p, n, tau, 3).unwrap();
                    let p_round = success_probability(&g);
                    let q_round = 1.0 - p_round;
                    let a = expected_sum_round_length_success(&g) / p_round;
                    let k = game_expectation(&g);
                    if q_round == 0.0 {
                        assert_relative_eq!(a, k, max_relative = 1e-12);
                        continue;
                    }
                    let b = expected_sum_round_length_failure(&g) / q_round;
                    assert_relative_eq!(a + b * q_round / p_round, k, max_relative = 1e-12);
                    assert_relative_eq!(
                        a + (b + 3.0) * q_round / p_round,
                        reset_expectation(&g),
                        max_relative = 1e-12
                    );
                }
            }
        }
    }
}
