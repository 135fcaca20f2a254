//! Batch boundaries for a logged run.
//!
//! A schedule splits rounds `1..=T` into `M` contiguous batches at
//! boundaries `0 = t_0 < t_1 < ... < t_M = T`. Batch `tau` (1-based)
//! covers rounds `t_{tau-1}+1 ..= t_tau`; its fraction is
//! `r_tau = (t_tau - t_{tau-1}) / T`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSchedule {
    /// Full boundary list `[0, t_1, ..., t_M]`.
    boundaries: Vec<usize>,
}

impl BatchSchedule {
    /// Builds a schedule from the full boundary list `[0, t_1, ..., t_M]`.
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(CoreError::InvalidSchedule(
                "need at least [0, T]".to_string(),
            ));
        }
        if boundaries[0] != 0 {
            return Err(CoreError::InvalidSchedule(format!(
                "first boundary must be 0, got {}",
                boundaries[0]
            )));
        }
        for w in boundaries.windows(2) {
            if w[1] <= w[0] {
                return Err(CoreError::InvalidSchedule(format!(
                    "boundaries must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { boundaries })
    }

    /// Splits `total` rounds into `num_batches` near-equal batches.
    /// When `total` is not divisible, the first `total % num_batches`
    /// batches get one extra round.
    pub fn even(total: usize, num_batches: usize) -> Result<Self> {
        if num_batches == 0 {
            return Err(CoreError::InvalidSchedule(
                "need at least one batch".to_string(),
            ));
        }
        if total < num_batches {
            return Err(CoreError::InvalidSchedule(format!(
                "cannot split {total} rounds into {num_batches} non-empty batches"
            )));
        }
        let base = total / num_batches;
        let extra = total % num_batches;
        let mut boundaries = Vec::with_capacity(num_batches + 1);
        boundaries.push(0);
        let mut acc = 0;
        for tau in 0..num_batches {
            acc += base + usize::from(tau < extra);
            boundaries.push(acc);
        }
        Ok(Self { boundaries })
    }

    pub fn total_rounds(&self) -> usize {
        *self.boundaries.last().expect("validated: non-empty")
    }

    pub fn num_batches(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// 1-based batch index of round `t` (1-based).
    pub fn batch_of(&self, t: usize) -> Result<usize> {
        if t == 0 || t > self.total_rounds() {
            return Err(CoreError::InvalidArgument(format!(
                "round {} outside 1..={}",
                t,
                self.total_rounds()
            )));
        }
        Ok(self.boundaries.partition_point(|&b| b < t))
    }

    /// Number of rounds in batch `tau` (1-based).
    pub fn batch_size(&self, tau: usize) -> Result<usize> {
        self.check_batch(tau)?;
        Ok(self.boundaries[tau] - self.boundaries[tau - 1])
    }

    /// Fraction `r_tau` of rounds that land in batch `tau`.
    pub fn fraction(&self, tau: usize) -> Result<f64> {
        Ok(self.batch_size(tau)? as f64 / self.total_rounds() as f64)
    }

    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total_rounds() as f64;
        self.boundaries
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / total)
            .collect()
    }

    /// Last round before batch `tau` starts (`t_{tau-1}`).
    pub fn batch_start(&self, tau: usize) -> Result<usize> {
        self.check_batch(tau)?;
        Ok(self.boundaries[tau - 1])
    }

    /// Last round of batch `tau` (`t_tau`).
    pub fn batch_end(&self, tau: usize) -> Result<usize> {
        self.check_batch(tau)?;
        Ok(self.boundaries[tau])
    }

    fn check_batch(&self, tau: usize) -> Result<()> {
        if tau == 0 || tau > self.num_batches() {
            return Err(CoreError::InvalidArgument(format!(
                "batch {} outside 1..={}",
                tau,
                self.num_batches()
            )));
        }
        Ok(())
    }
}
