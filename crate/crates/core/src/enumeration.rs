//! Exhaustive enumeration of the trajectory space and its measure.
//!
//! The space for `n` memories and window `tau` holds every map
//! `l -> counts[l]` (`l` in `0..=tau`) with `counts[0] >= 1` and total at
//! most `n`. Each trajectory carries the product measure
//! `g = prod_l C(remaining_l, counts[l]) p^counts[l] q^(remaining_l - counts[l])`,
//! whose total mass over the space is `1 - q^n` (the missing mass is the
//! all-zero first step, which by construction is not in the space).
//!
//! Everything here is the brute-force side of the cross-checks: the
//! aggregates must reproduce the closed forms of [`crate::analytic`]
//! without sharing any code with them beyond the power primitives.

use crate::combinatorics::pascal_triangle;
use crate::compensated::NeumaierSum;
use crate::math;
use crate::params::{GameParams, Trajectory};
use alloc::vec::Vec;
use core::fmt;

/// Default cap on the number of materialized trajectories.
pub const DEFAULT_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumError {
    /// predicted trajectory count exceeds the configured cap
    BudgetExceeded { predicted: u128, budget: u64 },
    DomainError(&'static str),
}

impl fmt::Display for EnumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumError::BudgetExceeded { predicted, budget } => write!(
                f,
                "BudgetExceeded: {predicted} trajectories predicted, cap is {budget}"
            ),
            EnumError::DomainError(what) => write!(f, "DomainError: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnumError {}

/// Exact trajectory count, by the recursive composition count (saturating;
/// anything near u128::MAX is far past any practical budget anyway).
///
/// This is the budget predictor and the independent check on the
/// enumerator; the only closed-form statement about the count used
/// anywhere is the loose bound `count <= n^(tau+1)`.
pub fn predicted_count(n: u32, tau: u32) -> u128 {
    // ways[r] = number of suffixes when r bits may still flip
    let mut ways = alloc::vec![1u128; n as usize + 1];
    for _ in 0..tau {
        // one more trailing step: suffix(r) = sum_{c=0}^{r} prev(r - c)
        let mut next = alloc::vec![0u128; n as usize + 1];
        for r in 0..=n as usize {
            let mut acc = 0u128;
            for c in 0..=r {
                acc = acc.saturating_add(ways[r - c]);
            }
            next[r] = acc;
        }
        ways = next;
    }
    let mut total = 0u128;
    for first in 1..=n as usize {
        total = total.saturating_add(ways[n as usize - first]);
    }
    total
}

/// Stream every trajectory in lexicographic order of its counts, without
/// materializing the space. Returns the number visited.
pub fn visit_trajectories(
    params: &GameParams,
    budget: u64,
    mut visit: impl FnMut(&[u32]),
) -> Result<u64, EnumError> {
    let (n, tau) = (params.n(), params.tau());
    let predicted = predicted_count(n, tau);
    if predicted > budget as u128 {
        return Err(EnumError::BudgetExceeded { predicted, budget });
    }
    let mut buf = alloc::vec![0u32; tau as usize + 1];
    let mut count = 0u64;
    fn rec(
        buf: &mut [u32],
        level: usize,
        remaining: u32,
        count: &mut u64,
        visit: &mut impl FnMut(&[u32]),
    ) {
        if level == buf.len() {
            *count += 1;
            visit(buf);
            return;
        }
        let lo = if level == 0 { 1 } else { 0 };
        for c in lo..=remaining {
            buf[level] = c;
            rec(buf, level + 1, remaining - c, count, visit);
        }
    }
    rec(&mut buf, 0, n, &mut count, &mut visit);
    Ok(count)
}

/// Materialize the whole space in lexicographic order.
pub fn enumerate_trajectories(
    params: &GameParams,
    budget: u64,
) -> Result<Vec<Trajectory>, EnumError> {
    let mut out = Vec::new();
    let n = params.n();
    visit_trajectories(params, budget, |counts| {
        out.push(Trajectory::new(counts.to_vec(), n).expect("enumerator emits valid counts"));
    })?;
    Ok(out)
}

fn measure_from_counts(counts: &[u32], n: u32, p: f64, q: f64, triangle: &[Vec<u128>]) -> f64 {
    let mut acc = 1.0f64;
    let mut remaining = n;
    for &c in counts {
        let stay = remaining - c;
        acc *= triangle[remaining as usize][c as usize] as f64
            * math::powi(p, c as u64)
            * math::powi(q, stay as u64);
        remaining = stay;
    }
    acc
}

/// The measure `g` of one trajectory under `params`.
pub fn measure_g(t: &Trajectory, params: &GameParams) -> f64 {
    debug_assert_eq!(t.n(), params.n(), "trajectory belongs to a different space");
    let triangle = pascal_triangle(params.n());
    measure_from_counts(t.counts(), params.n(), params.p(), params.q(), &triangle)
}

/// Per-subset masses of the trajectory space.
#[derive(Clone, Debug)]
pub struct MeasureBreakdown {
    /// mass of the whole space (equals `1 - q^n`)
    pub total_mass: f64,
    /// mass of the trajectories that flip every memory
    pub success_mass: f64,
    /// mass of the rest
    pub failure_mass: f64,
    /// success mass split by the last flip position, indexed by sigma
    pub per_sigma_success: Vec<f64>,
    /// full partition by (total flips, last flip position):
    /// `per_m_sigma[m - 1][sigma]` for `m` in `1..=n`
    pub per_m_sigma: Vec<Vec<f64>>,
    /// number of trajectories
    pub count: u64,
}

/// Enumerate the space and aggregate the measure over the partition by
/// (total flips, last flip position).
pub fn measure_breakdown(params: &GameParams, budget: u64) -> Result<MeasureBreakdown, EnumError> {
    let (n, tau) = (params.n(), params.tau());
    let (p, q) = (params.p(), params.q());
    let triangle = pascal_triangle(n);
    let mut cells =
        alloc::vec![alloc::vec![NeumaierSum::new(); tau as usize + 1]; n as usize];
    let count = visit_trajectories(params, budget, |counts| {
        let g = measure_from_counts(counts, n, p, q, &triangle);
        let m: u32 = counts.iter().sum();
        let sigma = counts
            .iter()
            .rposition(|&c| c > 0)
            .expect("first entry is positive");
        cells[m as usize - 1][sigma].add(g);
    })?;

    let per_m_sigma: Vec<Vec<f64>> = cells
        .iter()
        .map(|row| row.iter().map(NeumaierSum::value).collect())
        .collect();
    let per_sigma_success = per_m_sigma[n as usize - 1].clone();
    let mut success = NeumaierSum::new();
    for &v in &per_sigma_success {
        success.add(v);
    }
    let mut failure = NeumaierSum::new();
    for row in &per_m_sigma[..n as usize - 1] {
        for &v in row {
            failure.add(v);
        }
    }
    let success_mass = success.value();
    let failure_mass = if n == 1 { 0.0 } else { failure.value() };
    Ok(MeasureBreakdown {
        total_mass: success_mass + failure_mass,
        success_mass,
        failure_mass,
        per_sigma_success,
        per_m_sigma,
        count,
    })
}

/// Brute-force window-position sums: `(sum_sigma sigma g(success cell),
/// tau * g(failures))`. Must reproduce the closed forms.
pub fn lambda_sums(params: &GameParams, budget: u64) -> Result<(f64, f64), EnumError> {
    let (n, tau) = (params.n(), params.tau());
    let (p, q) = (params.p(), params.q());
    let triangle = pascal_triangle(n);
    let mut lambda_success = NeumaierSum::new();
    let mut failure_mass = NeumaierSum::new();
    visit_trajectories(params, budget, |counts| {
        let g = measure_from_counts(counts, n, p, q, &triangle);
        let m: u32 = counts.iter().sum();
        if m == n {
            let sigma = counts.iter().rposition(|&c| c > 0).expect("nonempty");
            lambda_success.add(sigma as f64 * g);
        } else {
            failure_mass.add(g);
        }
    })?;
    Ok((lambda_success.value(), tau as f64 * failure_mass.value()))
}

/// Truncated full-round masses: `sum_{k=0}^{k_max} q^(n k) g(S)` and the
/// same for the failures. As `k_max` grows these approach the round
/// probabilities P and Q; the remainder is exactly
/// `q^(n (k_max + 1)) / (1 - q^n)` times the respective g-mass.
pub fn beta_mass_truncated(
    params: &GameParams,
    k_max: u32,
    budget: u64,
) -> Result<(f64, f64), EnumError> {
    let breakdown = measure_breakdown(params, budget)?;
    let step = math::powi(params.q(), params.n() as u64);
    let mut success = NeumaierSum::new();
    let mut failure = NeumaierSum::new();
    let mut factor = 1.0f64;
    for _ in 0..=k_max {
        success.add(factor * breakdown.success_mass);
        failure.add(factor * breakdown.failure_mass);
        factor *= step;
    }
    Ok((success.value(), failure.value()))
}

/// Zero-pad a trajectory into a longer window (the natural embedding of
/// the smaller space into the larger one).
pub fn embed(t: &Trajectory, tau_to: u32) -> Result<Trajectory, EnumError> {
    if tau_to <= t.window() {
        return Err(EnumError::DomainError(
            "embedding target window must exceed the source window",
        ));
    }
    let mut counts = t.counts().to_vec();
    counts.resize(tau_to as usize + 1, 0);
    Ok(Trajectory::new(counts, t.n()).expect("padding preserves validity"))
}
