//! Step-faithful Monte Carlo play of the window game.
//!
//! A round: every remaining 0-bit flips with probability `p` each step;
//! the leading steps where nothing flips form the first part, and from the
//! first flip the system has `tau` further steps to finish. A game repeats
//! rounds until one succeeds; each failed round costs its own steps plus
//! `omega` reset steps.
//!
//! Reproducibility contract: every game draws from its own ChaCha8 stream
//! keyed by `(seed, game_index)`, and aggregation runs over integer tallies
//! only. Estimates are therefore bit-identical for a fixed
//! `(params, trials, seed, mode)` no matter how the game range is split
//! across workers.

use crate::math;
use crate::params::GameParams;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Hard per-game step cap; unreachable for any sane parameters, present so
/// that pathological inputs fail loudly instead of spinning.
pub const STEP_CAP: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimError {
    /// need at least one trial
    InvalidTrials,
    /// a single game passed [`STEP_CAP`] steps
    NonTermination,
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::InvalidTrials => write!(f, "InvalidTrials: need at least one trial"),
            SimError::NonTermination => {
                write!(f, "NonTermination: game exceeded {STEP_CAP} steps")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SimError {}

/// How the first part of each round is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimMode {
    /// draw every bit of every step (maximum fidelity to the game rules)
    Stepwise,
    /// sample the all-zero prefix length from its geometric law, then the
    /// first-flip count from the conditioned binomial; statistically
    /// indistinguishable from stepwise, validated against it
    FastForward,
}

/// The per-game random stream: ChaCha8 keyed by `(seed, game_index)` with
/// fixed domain-separation words, so any worker can reproduce any game.
pub fn game_rng(seed: u64, game_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&game_index.to_le_bytes());
    key[16..24].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    key[24..32].copy_from_slice(&0x2545_f491_4f6c_dd1du64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw on the 2^-53 grid of [0, 1).
#[inline]
fn u01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Count how many of `bits` independent flips succeed this step.
#[inline]
fn draw_flips(rng: &mut impl RngCore, bits: u32, p: f64) -> u32 {
    let mut flipped = 0;
    for _ in 0..bits {
        if u01(rng) < p {
            flipped += 1;
        }
    }
    flipped
}

/// Length of the all-zero prefix, drawn directly from its geometric law
/// (per-step escape probability `1 - q^n`).
pub fn fast_forward_first_part(params: &GameParams, rng: &mut impl RngCore) -> u64 {
    let q = params.q();
    if q == 0.0 {
        return 0;
    }
    let u = u01(rng);
    let stay_log = params.n() as f64 * math::ln(q);
    let k = math::floor(math::log1p(-u) / stay_log);
    if k >= STEP_CAP as f64 {
        STEP_CAP
    } else {
        k as u64
    }
}

/// First-flip count conditioned on being positive, by inverse CDF over the
/// binomial restricted to 1..=n.
fn draw_first_flips_conditioned(params: &GameParams, rng: &mut impl RngCore) -> u32 {
    let (n, p, q) = (params.n(), params.p(), params.q());
    if q == 0.0 {
        return n;
    }
    let total = 1.0 - math::powi(q, n as u64);
    let mut u = u01(rng) * total;
    let mut pmf = n as f64 * p * math::powi(q, n as u64 - 1); // C(n,1) p q^(n-1)
    for c in 1..n {
        if u < pmf {
            return c;
        }
        u -= pmf;
        // pmf(c+1) = pmf(c) * (n - c)/(c + 1) * p/q
        pmf *= (n - c) as f64 / (c + 1) as f64 * (p / q);
    }
    n
}

#[derive(Clone, Copy, Debug)]
pub struct RoundOutcome {
    pub success: bool,
    pub steps: u64,
}

/// Play one round. `step_budget` bounds the all-zero prefix so a game-level
/// cap can interrupt (only matters for absurd parameters).
pub fn simulate_round(
    params: &GameParams,
    rng: &mut impl RngCore,
    mode: SimMode,
    step_budget: u64,
) -> Result<RoundOutcome, SimError> {
    let (n, p, tau) = (params.n(), params.p(), params.tau());

    let (prefix, first) = match mode {
        SimMode::Stepwise => {
            let mut prefix = 0u64;
            loop {
                let flipped = draw_flips(rng, n, p);
                if flipped > 0 {
                    break (prefix, flipped);
                }
                prefix += 1;
                if prefix >= step_budget {
                    return Err(SimError::NonTermination);
                }
            }
        }
        SimMode::FastForward => {
            let prefix = fast_forward_first_part(params, rng);
            if prefix >= step_budget {
                return Err(SimError::NonTermination);
            }
            (prefix, draw_first_flips_conditioned(params, rng))
        }
    };

    let mut remaining = n - first;
    let mut steps = prefix + 1;
    if remaining == 0 {
        return Ok(RoundOutcome {
            success: true,
            steps,
        });
    }
    for _ in 0..tau {
        let flipped = draw_flips(rng, remaining, p);
        steps += 1;
        remaining -= flipped;
        if remaining == 0 {
            return Ok(RoundOutcome {
                success: true,
                steps,
            });
        }
    }
    Ok(RoundOutcome {
        success: false,
        steps: prefix + 1 + tau as u64,
    })
}

/// One whole game: rounds until success.
#[derive(Clone, Copy, Debug)]
pub struct GameOutcome {
    /// steps actually played (no reset penalty)
    pub raw_steps: u64,
    pub failed_rounds: u64,
    /// sum of squared round lengths, for round-length dispersion
    pub round_len_sq_sum: u128,
}

impl GameOutcome {
    /// Steps including the `omega` reset penalty per failed round.
    pub fn total_steps(&self, params: &GameParams) -> u64 {
        self.raw_steps + params.omega() as u64 * self.failed_rounds
    }
}

/// Repeat rounds until one succeeds. Termination is almost sure for
/// `p > 0`; the step cap is a safety valve only.
pub fn simulate_game(
    params: &GameParams,
    rng: &mut impl RngCore,
    mode: SimMode,
) -> Result<GameOutcome, SimError> {
    let mut raw_steps = 0u64;
    let mut failed = 0u64;
    let mut sq = 0u128;
    loop {
        if raw_steps >= STEP_CAP {
            return Err(SimError::NonTermination);
        }
        let round = simulate_round(params, rng, mode, STEP_CAP - raw_steps)?;
        raw_steps += round.steps;
        sq += (round.steps as u128) * (round.steps as u128);
        if round.success {
            return Ok(GameOutcome {
                raw_steps,
                failed_rounds: failed,
                round_len_sq_sum: sq,
            });
        }
        failed += 1;
    }
}

/// Order-independent integer tallies over a set of games. Merging partial
/// accumulators from any split of the game range reproduces the sequential
/// result bit for bit.
#[derive(Clone, Debug, Default)]
pub struct SimAccumulator {
    pub trials: u64,
    steps_sum: u128,
    steps_sq_sum: u128,
    failed_sum: u128,
    failed_sq_sum: u128,
    zero_failed: u64,
    raw_steps_sum: u128,
    round_len_sq_sum: u128,
    histogram: Vec<u64>,
}

impl SimAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, params: &GameParams, outcome: &GameOutcome) {
        let steps = outcome.total_steps(params);
        self.trials += 1;
        self.steps_sum += steps as u128;
        self.steps_sq_sum += (steps as u128) * (steps as u128);
        self.failed_sum += outcome.failed_rounds as u128;
        self.failed_sq_sum += (outcome.failed_rounds as u128) * (outcome.failed_rounds as u128);
        if outcome.failed_rounds == 0 {
            self.zero_failed += 1;
        }
        self.raw_steps_sum += outcome.raw_steps as u128;
        self.round_len_sq_sum += outcome.round_len_sq_sum;
        let idx = outcome.failed_rounds as usize;
        if self.histogram.len() <= idx {
            self.histogram.resize(idx + 1, 0);
        }
        self.histogram[idx] += 1;
    }

    pub fn merge(&mut self, other: &SimAccumulator) {
        self.trials += other.trials;
        self.steps_sum += other.steps_sum;
        self.steps_sq_sum += other.steps_sq_sum;
        self.failed_sum += other.failed_sum;
        self.failed_sq_sum += other.failed_sq_sum;
        self.zero_failed += other.zero_failed;
        self.raw_steps_sum += other.raw_steps_sum;
        self.round_len_sq_sum += other.round_len_sq_sum;
        if self.histogram.len() < other.histogram.len() {
            self.histogram.resize(other.histogram.len(), 0);
        }
        for (i, &v) in other.histogram.iter().enumerate() {
            self.histogram[i] += v;
        }
    }

    /// Sample mean and unbiased variance of the per-game step counts.
    pub fn steps_moments(&self) -> (f64, f64) {
        moments(self.steps_sum, self.steps_sq_sum, self.trials)
    }

    /// Sample mean and unbiased variance of the per-game failed-round
    /// counts.
    pub fn failed_moments(&self) -> (f64, f64) {
        moments(self.failed_sum, self.failed_sq_sum, self.trials)
    }

    /// Mean/variance of individual round lengths (all rounds of all games)
    /// plus the round count.
    pub fn round_length_moments(&self) -> (f64, f64, u64) {
        let rounds = self.trials as u128 + self.failed_sum;
        let (mean, var) = moments(self.raw_steps_sum, self.round_len_sq_sum, rounds as u64);
        (mean, var, rounds as u64)
    }

    pub fn finish(&self, seed: u64) -> SimStats {
        let (mean_steps, var_steps) = self.steps_moments();
        SimStats {
            trials: self.trials,
            mean_steps,
            var_steps,
            ci95_half_width: 1.96 * math::sqrt(var_steps / self.trials as f64),
            mean_failed_rounds: self.failed_sum as f64 / self.trials as f64,
            empirical_p: self.zero_failed as f64 / self.trials as f64,
            seed,
            failed_rounds_histogram: self.histogram.clone(),
        }
    }
}

fn moments(sum: u128, sq_sum: u128, count: u64) -> (f64, f64) {
    if count == 0 {
        return (0.0, 0.0);
    }
    let n = count as f64;
    let mean = sum as f64 / n;
    if count == 1 {
        return (mean, 0.0);
    }
    let var = (sq_sum as f64 - (sum as f64) * (sum as f64) / n) / (n - 1.0);
    (mean, var.max(0.0))
}

/// Aggregated statistics of a batch of simulated games.
#[derive(Clone, Debug, PartialEq)]
pub struct SimStats {
    pub trials: u64,
    /// mean per-game steps, reset penalty included
    pub mean_steps: f64,
    /// unbiased sample variance of the per-game steps
    pub var_steps: f64,
    /// `1.96 sqrt(var / trials)`
    pub ci95_half_width: f64,
    pub mean_failed_rounds: f64,
    /// fraction of games whose first round succeeded
    pub empirical_p: f64,
    pub seed: u64,
    /// games by failed-round count (index = failed rounds)
    pub failed_rounds_histogram: Vec<u64>,
}

/// Run games `range` of the stream keyed by `seed` and return the raw
/// tallies. Workers split the full range and merge.
pub fn estimate_range(
    params: &GameParams,
    seed: u64,
    range: Range<u64>,
    mode: SimMode,
) -> Result<SimAccumulator, SimError> {
    let mut acc = SimAccumulator::new();
    for game_index in range {
        let mut rng = game_rng(seed, game_index);
        let outcome = simulate_game(params, &mut rng, mode)?;
        acc.record(params, &outcome);
    }
    Ok(acc)
}

/// Simulate `trials` games and aggregate. Deterministic for a fixed
/// `(params, trials, seed, mode)`.
pub fn estimate_mode(
    params: &GameParams,
    trials: u64,
    seed: u64,
    mode: SimMode,
) -> Result<SimStats, SimError> {
    if trials < 1 {
        return Err(SimError::InvalidTrials);
    }
    Ok(estimate_range(params, seed, 0..trials, mode)?.finish(seed))
}

/// [`estimate_mode`] in the default stepwise mode.
pub fn estimate(params: &GameParams, trials: u64, seed: u64) -> Result<SimStats, SimError> {
    estimate_mode(params, trials, seed, SimMode::Stepwise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use approx::assert_relative_eq;

    fn params(p: f64, n: u32, tau: u32) -> GameParams {
        GameParams::new(p, n, tau).unwrap()
    }

    #[test]
    fn deterministic_rounds_for_p_one() {
        let g = params(1.0, 4, 3);
        let mut rng = game_rng(1, 0);
        let r = simulate_round(&g, &mut rng, SimMode::Stepwise, STEP_CAP).unwrap();
        assert!(r.success);
        assert_eq!(r.steps, 1);
        let out = simulate_game(&g, &mut rng, SimMode::Stepwise).unwrap();
        assert_eq!(out.raw_steps, 1);
        assert_eq!(out.failed_rounds, 0);
        let mut rng = game_rng(1, 0);
        assert_eq!(fast_forward_first_part(&g, &mut rng), 0);
    }

    #[test]
    fn estimate_is_deterministic_and_mergeable() {
        let g = params(0.5, 2, 1);
        let a = estimate(&g, 20_000, 42).unwrap();
        let b = estimate(&g, 20_000, 42).unwrap();
        assert_eq!(a, b);
        // Any split of the range merges to the same stats.
        let mut left = estimate_range(&g, 42, 0..7_919, SimMode::Stepwise).unwrap();
        let right = estimate_range(&g, 42, 7_919..20_000, SimMode::Stepwise).unwrap();
        left.merge(&right);
        assert_eq!(left.finish(42), a);
        // A different seed changes the draw.
        let c = estimate(&g, 20_000, 43).unwrap();
        assert_ne!(a.mean_steps, c.mean_steps);
    }

    #[test]
    fn invalid_trials_rejected() {
        let g = params(0.5, 2, 1);
        assert_eq!(estimate(&g, 0, 1), Err(SimError::InvalidTrials));
    }

    #[test]
    fn degenerate_p_one_statistics() {
        let s = estimate(&params(1.0, 3, 0), 1_000, 7).unwrap();
        assert_eq!(s.mean_steps, 1.0);
        assert_eq!(s.var_steps, 0.0);
        assert_eq!(s.empirical_p, 1.0);
        assert_eq!(s.mean_failed_rounds, 0.0);
    }

    #[test]
    fn single_memory_round_is_geometric() {
        // p = 0.5, n = 1, tau = 0: every round succeeds, steps geometric
        // with mean 2.
        let s = estimate(&params(0.5, 1, 0), 200_000, 11).unwrap();
        assert_eq!(s.empirical_p, 1.0);
        let se = math::sqrt(s.var_steps / s.trials as f64);
        assert!((s.mean_steps - 2.0).abs() < 3.0 * se, "mean {}", s.mean_steps);
    }

    #[test]
    fn matches_analytic_examples_within_three_sigma() {
        let g = params(0.5, 2, 1);
        let s = estimate(&g, 400_000, 42).unwrap();
        let se = math::sqrt(s.var_steps / s.trials as f64);
        assert!((s.mean_steps - 3.0).abs() < 3.0 * se);
        let p = analytic::success_probability(&g);
        let p_se = math::sqrt(p * (1.0 - p) / s.trials as f64);
        assert!((s.empirical_p - p).abs() < 3.0 * p_se);
    }

    #[test]
    fn reset_penalty_enters_means() {
        let with_reset = GameParams::with_reset(0.5, 2, 1, 2).unwrap();
        let s = estimate(&with_reset, 400_000, 43).unwrap();
        let se = math::sqrt(s.var_steps / s.trials as f64);
        assert!((s.mean_steps - 4.0).abs() < 3.0 * se, "mean {}", s.mean_steps);
    }

    #[test]
    fn fast_forward_prefix_matches_geometric_mean() {
        // mean of the all-zero prefix is q^n/(1 - q^n): 1/3 at p = 0.5, n = 2.
        let g = params(0.5, 2, 1);
        let trials = 400_000u64;
        let mut sum = 0u64;
        let mut sq = 0u128;
        for i in 0..trials {
            let mut rng = game_rng(5, i);
            let k = fast_forward_first_part(&g, &mut rng);
            sum += k;
            sq += (k as u128) * (k as u128);
        }
        let mean = sum as f64 / trials as f64;
        let var = (sq as f64 - (sum as f64).powi(2) / trials as f64) / (trials as f64 - 1.0);
        let se = math::sqrt(var / trials as f64);
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn fast_forward_agrees_with_stepwise() {
        // Two-sample mean test at 4 sigma, p = 0.3, n = 3.
        let g = params(0.3, 3, 2);
        let trials = 300_000;
        let a = estimate_mode(&g, trials, 90, SimMode::Stepwise).unwrap();
        let b = estimate_mode(&g, trials, 91, SimMode::FastForward).unwrap();
        let se = math::sqrt(a.var_steps / trials as f64 + b.var_steps / trials as f64);
        assert!(
            (a.mean_steps - b.mean_steps).abs() < 4.0 * se,
            "stepwise {} vs fast-forward {}",
            a.mean_steps,
            b.mean_steps
        );
    }

    #[test]
    fn histogram_counts_games() {
        let s = estimate(&params(0.4, 2, 1), 50_000, 3).unwrap();
        assert_eq!(s.failed_rounds_histogram.iter().sum::<u64>(), 50_000);
        assert_eq!(s.failed_rounds_histogram[0], (s.empirical_p * 50_000.0).round() as u64);
    }
}
