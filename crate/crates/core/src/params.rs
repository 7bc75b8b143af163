//! Game parameters and flip-count trajectories.

use alloc::vec::Vec;
use core::fmt;

/// Validated parameters of one game: per-step flip probability `p` (with
/// `q = 1 - p` stored alongside), `n` memories, validity window `tau`
/// (steps counted from the first successful flip) and reset cost `omega`
/// (extra steps paid after every failed round).
///
/// Immutable after construction; construct through [`GameParams::new`],
/// [`GameParams::with_reset`] or [`validate_params`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    p: f64,
    q: f64,
    n: u32,
    tau: u32,
    omega: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamError {
    /// `p` outside (0, 1] (or NaN).
    InvalidProbability,
    /// fewer than one memory
    InvalidCount,
    /// negative window
    InvalidWindow,
    /// negative reset time
    InvalidReset,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::InvalidProbability => {
                write!(f, "InvalidProbability: p must lie in (0, 1]")
            }
            ParamError::InvalidCount => write!(f, "InvalidCount: need at least one memory"),
            ParamError::InvalidWindow => write!(f, "InvalidWindow: tau must be >= 0"),
            ParamError::InvalidReset => write!(f, "InvalidReset: omega must be >= 0"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParamError {}

/// Validate raw parameters. Signed integers so that out-of-range CLI input
/// maps onto the dedicated error variants.
pub fn validate_params(p: f64, n: i64, tau: i64, omega: i64) -> Result<GameParams, ParamError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ParamError::InvalidProbability);
    }
    if n < 1 {
        return Err(ParamError::InvalidCount);
    }
    if tau < 0 {
        return Err(ParamError::InvalidWindow);
    }
    if omega < 0 {
        return Err(ParamError::InvalidReset);
    }
    if n > u32::MAX as i64 || tau > u32::MAX as i64 || omega > u32::MAX as i64 {
        return Err(ParamError::InvalidCount);
    }
    Ok(GameParams {
        p,
        q: 1.0 - p,
        n: n as u32,
        tau: tau as u32,
        omega: omega as u32,
    })
}

impl GameParams {
    pub fn new(p: f64, n: u32, tau: u32) -> Result<Self, ParamError> {
        validate_params(p, n as i64, tau as i64, 0)
    }

    pub fn with_reset(p: f64, n: u32, tau: u32, omega: u32) -> Result<Self, ParamError> {
        validate_params(p, n as i64, tau as i64, omega as i64)
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `1 - p`, stored at construction.
    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn tau(&self) -> u32 {
        self.tau
    }

    #[inline]
    pub fn omega(&self) -> u32 {
        self.omega
    }

    /// Same parameters with a different reset time.
    pub fn reset_time(mut self, omega: u32) -> Self {
        self.omega = omega;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryError {
    Empty,
    /// the first step of the second part must flip at least one bit
    FirstStepZero,
    /// flip counts exceed the number of memories
    TooManyFlips,
}

impl fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrajectoryError::Empty => write!(f, "trajectory has no steps"),
            TrajectoryError::FirstStepZero => write!(f, "first step must flip at least one bit"),
            TrajectoryError::TooManyFlips => write!(f, "flip counts sum beyond the memory count"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrajectoryError {}

/// A flip-count trajectory: entry `l` is the number of bits that flipped at
/// step `l` of a round's second part (`l = 0` is the first-flip step, so
/// `counts[0] >= 1`; the window is `counts.len() - 1`). The total never
/// exceeds the `n` memories of the space it belongs to.
///
/// Stored densely; at enumeration scale windows are small.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Trajectory {
    counts: Vec<u32>,
    n: u32,
}

impl Trajectory {
    pub fn new(counts: Vec<u32>, n: u32) -> Result<Self, TrajectoryError> {
        if counts.is_empty() {
            return Err(TrajectoryError::Empty);
        }
        if counts[0] == 0 {
            return Err(TrajectoryError::FirstStepZero);
        }
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total > n as u64 {
            return Err(TrajectoryError::TooManyFlips);
        }
        Ok(Trajectory { counts, n })
    }

    #[inline]
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of memories of the space this trajectory lives in.
    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Window length: one less than the number of recorded steps.
    #[inline]
    pub fn window(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    /// Total number of bits flipped over the round.
    pub fn total_flips(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Index of the last step that flipped a bit. Well defined because the
    /// first entry is positive.
    pub fn sigma(&self) -> u32 {
        let mut last = 0;
        for (l, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                last = l;
            }
        }
        last as u32
    }

    /// True iff every memory flipped within the window.
    pub fn is_success(&self) -> bool {
        self.total_flips() == self.n
    }

    /// Bits still unset when step `l` begins.
    pub fn remaining_before(&self, l: usize) -> u32 {
        let used: u32 = self.counts[..l].iter().sum();
        self.n - used
    }

    /// Bits still unset once step `l` finished.
    pub fn remaining_after(&self, l: usize) -> u32 {
        self.remaining_before(l) - self.counts[l]
    }
}
