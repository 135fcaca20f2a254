//! Action-probability tables.
//!
//! A [`PolicyTable`] maps a covariate vector to a probability row over
//! actions. Actions are numbered `1..=K`; row position `a - 1` holds the
//! probability of action `a`. Rows must be non-negative and sum to one
//! (tolerance `1e-9`); individual entries may be exactly zero, which is how
//! deficient-support logs arise.

use serde::{Deserialize, Serialize};

use crate::classifier::SoftmaxClassifier;
use crate::error::{CoreError, Result};

/// Tolerance for validating that a probability row sums to one.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PolicyTable {
    /// One row shared by every covariate.
    Global(Vec<f64>),
    /// Rows indexed by `x[0]` interpreted as an integer code; used with
    /// finite covariate spaces.
    Indexed(Vec<Vec<f64>>),
    /// Rows selected by nearest centroid (squared Euclidean distance,
    /// ties to the lowest index).
    Bucketed {
        centroids: Vec<Vec<f64>>,
        rows: Vec<Vec<f64>>,
    },
    /// Deterministic: all mass on the classifier's predicted class.
    Classifier(SoftmaxClassifier),
    /// Pointwise convex combination `weight * first + (1 - weight) * second`.
    Mixture {
        first: Box<PolicyTable>,
        second: Box<PolicyTable>,
        weight: f64,
    },
}

/// Checks that `row` is a probability vector over `k` actions.
pub fn validate_prob_row(row: &[f64], k: usize) -> Result<()> {
    if row.len() != k {
        return Err(CoreError::InvalidPolicy(format!(
            "row has {} entries, expected {}",
            row.len(),
            k
        )));
    }
    let mut sum = 0.0;
    for &p in row {
        if !p.is_finite() || p < 0.0 {
            return Err(CoreError::InvalidPolicy(format!(
                "probability {p} is negative or non-finite"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(CoreError::InvalidPolicy(format!(
            "row sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

impl PolicyTable {
    /// Uniform row over `k` actions.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::InvalidPolicy("need at least one action".into()));
        }
        Ok(PolicyTable::Global(vec![1.0 / k as f64; k]))
    }

    pub fn global(row: Vec<f64>) -> Result<Self> {
        if row.is_empty() {
            return Err(CoreError::InvalidPolicy("empty probability row".into()));
        }
        validate_prob_row(&row, row.len())?;
        Ok(PolicyTable::Global(row))
    }

    pub fn indexed(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(CoreError::InvalidPolicy("no rows".into()));
        }
        let k = rows[0].len();
        for row in &rows {
            validate_prob_row(row, k)?;
        }
        Ok(PolicyTable::Indexed(rows))
    }

    pub fn bucketed(centroids: Vec<Vec<f64>>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if centroids.is_empty() || centroids.len() != rows.len() {
            return Err(CoreError::InvalidPolicy(format!(
                "{} centroids for {} rows",
                centroids.len(),
                rows.len()
            )));
        }
        let k = rows[0].len();
        for row in &rows {
            validate_prob_row(row, k)?;
        }
        let dim = centroids[0].len();
        if centroids.iter().any(|c| c.len() != dim) {
            return Err(CoreError::InvalidPolicy(
                "centroids have mixed dimensions".into(),
            ));
        }
        Ok(PolicyTable::Bucketed { centroids, rows })
    }

    /// Number of actions the table covers.
    pub fn num_actions(&self) -> usize {
        match self {
            PolicyTable::Global(row) => row.len(),
            PolicyTable::Indexed(rows) => rows[0].len(),
            PolicyTable::Bucketed { rows, .. } => rows[0].len(),
            PolicyTable::Classifier(model) => model.num_classes(),
            PolicyTable::Mixture { first, .. } => first.num_actions(),
        }
    }

    /// Probability row at covariate `x`.
    pub fn probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            PolicyTable::Global(row) => Ok(row.clone()),
            PolicyTable::Indexed(rows) => {
                let idx = index_code(x, rows.len())?;
                Ok(rows[idx].clone())
            }
            PolicyTable::Bucketed { centroids, rows } => {
                let b = nearest_index(centroids, x)?;
                Ok(rows[b].clone())
            }
            PolicyTable::Classifier(model) => {
                let class = model.class_of(x)?;
                let mut row = vec![0.0; model.num_classes()];
                row[class - 1] = 1.0;
                Ok(row)
            }
            PolicyTable::Mixture {
                first,
                second,
                weight,
            } => {
                let a = first.probs(x)?;
                let b = second.probs(x)?;
                Ok(a.iter()
                    .zip(&b)
                    .map(|(&pa, &pb)| weight * pa + (1.0 - weight) * pb)
                    .collect())
            }
        }
    }

    /// Probability of action `a` (1-based) at covariate `x`.
    pub fn prob(&self, x: &[f64], action: usize) -> Result<f64> {
        let row = self.probs(x)?;
        row.get(action.wrapping_sub(1)).copied().ok_or_else(|| {
            CoreError::InvalidArgument(format!("action {} outside 1..={}", action, row.len()))
        })
    }
}

/// Convex combination `weight * first + (1 - weight) * second`, validated
/// to act on the same action set.
pub fn mix_policies(first: PolicyTable, second: PolicyTable, weight: f64) -> Result<PolicyTable> {
    if !(0.0..=1.0).contains(&weight) || !weight.is_finite() {
        return Err(CoreError::InvalidPolicy(format!(
            "mixture weight {weight} outside [0, 1]"
        )));
    }
    if first.num_actions() != second.num_actions() {
        return Err(CoreError::InvalidPolicy(format!(
            "mixing policies over {} and {} actions",
            first.num_actions(),
            second.num_actions()
        )));
    }
    Ok(PolicyTable::Mixture {
        first: Box::new(first),
        second: Box::new(second),
        weight,
    })
}

/// Interprets `x[0]` as an integer code in `0..len`.
pub(crate) fn index_code(x: &[f64], len: usize) -> Result<usize> {
    let raw = *x
        .first()
        .ok_or_else(|| CoreError::DimensionMismatch { expected: 1, actual: 0 })?;
    let idx = raw.round();
    if !raw.is_finite() || (raw - idx).abs() > 1e-9 || idx < 0.0 || (idx as usize) >= len {
        return Err(CoreError::InvalidArgument(format!(
            "covariate code {raw} outside 0..{len}"
        )));
    }
    Ok(idx as usize)
}

/// Index of the centroid nearest to `x`; ties go to the lowest index.
pub(crate) fn nearest_index(centroids: &[Vec<f64>], x: &[f64]) -> Result<usize> {
    let dim = centroids[0].len();
    if x.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d: f64 = c.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_of_point_mass_and_uniform() {
        let mut det = vec![0.0; 5];
        det[2] = 1.0; // action 3
        let mixed = mix_policies(
            PolicyTable::global(det).unwrap(),
            PolicyTable::uniform(5).unwrap(),
            0.9,
        )
        .unwrap();
        let row = mixed.probs(&[0.0]).unwrap();
        let expect = [0.02, 0.02, 0.92, 0.02, 0.02];
        for (got, want) in row.iter().zip(expect) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_weight_must_be_in_unit_interval() {
        let u = PolicyTable::uniform(3).unwrap();
        assert!(mix_policies(u.clone(), u.clone(), 1.5).is_err());
        assert!(mix_policies(u.clone(), u, -0.1).is_err());
    }

    #[test]
    fn rows_must_be_probabilities() {
        assert!(PolicyTable::global(vec![0.5, 0.6]).is_err());
        assert!(PolicyTable::global(vec![-0.1, 1.1]).is_err());
        assert!(PolicyTable::global(vec![f64::NAN, 1.0]).is_err());
        assert!(PolicyTable::indexed(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
    }

    #[test]
    fn zero_entries_are_allowed() {
        let p = PolicyTable::global(vec![1.0, 0.0]).unwrap();
        assert_eq!(p.prob(&[0.0], 2).unwrap(), 0.0);
    }

    #[test]
    fn indexed_rows_follow_the_covariate_code() {
        let p = PolicyTable::indexed(vec![vec![0.2, 0.8], vec![0.7, 0.3]]).unwrap();
        assert_eq!(p.probs(&[1.0]).unwrap(), vec![0.7, 0.3]);
        assert!(p.probs(&[2.0]).is_err());
        assert!(p.probs(&[0.5]).is_err());
    }

    #[test]
    fn bucketed_rows_pick_nearest_centroid_with_low_index_ties() {
        let p = PolicyTable::bucketed(
            vec![vec![0.0, 0.0], vec![2.0, 0.0]],
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
        )
        .unwrap();
        assert_eq!(p.probs(&[0.4, 0.0]).unwrap(), vec![0.9, 0.1]);
        // Equidistant from both centroids: the first wins.
        assert_eq!(p.probs(&[1.0, 0.0]).unwrap(), vec![0.9, 0.1]);
        assert_eq!(p.probs(&[1.9, 0.0]).unwrap(), vec![0.1, 0.9]);
    }
}
