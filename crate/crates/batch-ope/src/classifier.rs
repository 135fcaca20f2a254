//! Deterministic multinomial logistic regression.
//!
//! Used to turn a labeled dataset into a deterministic "play the predicted
//! class" policy. Training is full-batch gradient descent on the
//! L2-regularized cross-entropy with zero initialization and internally
//! standardized features, so a given training set always yields the same
//! classifier.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxClassifier {
    /// Per-class weight rows over standardized features.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    feature_means: Vec<f64>,
    feature_scales: Vec<f64>,
}

/// Training knobs; the defaults are deliberately conservative so the fit is
/// stable across feature dimensions.
#[derive(Debug, Clone, Copy)]
pub struct SoftmaxOptions {
    pub steps: usize,
    pub l2: f64,
}

impl Default for SoftmaxOptions {
    fn default() -> Self {
        Self { steps: 300, l2: 1e-4 }
    }
}

impl SoftmaxClassifier {
    /// Fits a `num_classes`-way classifier. Labels are 1-based.
    pub fn fit(
        features: &[Vec<f64>],
        labels: &[usize],
        num_classes: usize,
        options: SoftmaxOptions,
    ) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(CoreError::InvalidArgument(format!(
                "{} feature rows for {} labels",
                features.len(),
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(CoreError::InvalidArgument("need at least one class".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > num_classes) {
            return Err(CoreError::InvalidArgument(format!(
                "label {bad} outside 1..={num_classes}"
            )));
        }
        let dim = features[0].len();
        if features.iter().any(|row| row.len() != dim) {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                actual: features.iter().map(Vec::len).find(|&l| l != dim).unwrap(),
            });
        }

        let n = features.len();
        let (means, scales) = standardization(features, dim);
        let std_rows: Vec<Vec<f64>> = features
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(d, &v)| (v - means[d]) / scales[d])
                    .collect()
            })
            .collect();

        let mut weights = vec![vec![0.0; dim]; num_classes];
        let mut bias = vec![0.0; num_classes];
        // Gradient-descent step bounded by the softmax Hessian norm on
        // standardized features (at most ~dim/2 plus the ridge term).
        let lr = 2.0 / (2.0 + dim as f64);

        let mut probs = vec![0.0; num_classes];
        for _ in 0..options.steps {
            let mut grad_w = vec![vec![0.0; dim]; num_classes];
            let mut grad_b = vec![0.0; num_classes];
            for (row, &label) in std_rows.iter().zip(labels) {
                class_probs(&weights, &bias, row, &mut probs);
                for c in 0..num_classes {
                    let err = probs[c] - f64::from(u8::from(c + 1 == label));
                    grad_b[c] += err;
                    for d in 0..dim {
                        grad_w[c][d] += err * row[d];
                    }
                }
            }
            let inv_n = 1.0 / n as f64;
            for c in 0..num_classes {
                bias[c] -= lr * grad_b[c] * inv_n;
                for d in 0..dim {
                    weights[c][d] -= lr * (grad_w[c][d] * inv_n + options.l2 * weights[c][d]);
                }
            }
        }

        Ok(Self {
            weights,
            bias,
            feature_means: means,
            feature_scales: scales,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_means.len()
    }

    /// Predicted class (1-based); score ties go to the lowest class.
    pub fn class_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let std_row: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(d, &v)| (v - self.feature_means[d]) / self.feature_scales[d])
            .collect();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.num_classes() {
            let score: f64 = self.bias[c]
                + self.weights[c]
                    .iter()
                    .zip(&std_row)
                    .map(|(&w, &v)| w * v)
                    .sum::<f64>();
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        Ok(best + 1)
    }
}

fn standardization(features: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = features.len() as f64;
    let mut means = vec![0.0; dim];
    for row in features {
        for (d, &v) in row.iter().enumerate() {
            means[d] += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut scales = vec![0.0; dim];
    for row in features {
        for (d, &v) in row.iter().enumerate() {
            scales[d] += (v - means[d]) * (v - means[d]);
        }
    }
    for s in &mut scales {
        *s = (*s / n).sqrt();
        // Constant features carry no signal; any positive scale works.
        if *s <= 0.0 {
            *s = 1.0;
        }
    }
    (means, scales)
}

fn class_probs(weights: &[Vec<f64>], bias: &[f64], row: &[f64], out: &mut [f64]) {
    let mut max_score = f64::NEG_INFINITY;
    for c in 0..out.len() {
        let score: f64 =
            bias[c] + weights[c].iter().zip(row).map(|(&w, &v)| w * v).sum::<f64>();
        out[c] = score;
        if score > max_score {
            max_score = score;
        }
    }
    let mut total = 0.0;
    for p in out.iter_mut() {
        *p = (*p - max_score).exp();
        total += *p;
    }
    for p in out.iter_mut() {
        *p /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_data() -> (Vec<Vec<f64>>, Vec<usize>) {
        // Three well-separated clusters in 2-D, 30 points each.
        let centers = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for i in 0..30 {
                let dx = (i % 5) as f64 * 0.2 - 0.4;
                let dy = (i / 5) as f64 * 0.2 - 0.5;
                xs.push(vec![cx + dx, cy + dy]);
                ys.push(c + 1);
            }
        }
        (xs, ys)
    }

    #[test]
    fn separable_clusters_are_classified_correctly() {
        let (xs, ys) = blob_data();
        let model = SoftmaxClassifier::fit(&xs, &ys, 3, SoftmaxOptions::default()).unwrap();
        let correct = xs
            .iter()
            .zip(&ys)
            .filter(|(x, &y)| model.class_of(x).unwrap() == y)
            .count();
        assert!(correct >= 88, "only {correct}/90 correct");
    }

    #[test]
    fn fitting_is_deterministic() {
        let (xs, ys) = blob_data();
        let a = SoftmaxClassifier::fit(&xs, &ys, 3, SoftmaxOptions::default()).unwrap();
        let b = SoftmaxClassifier::fit(&xs, &ys, 3, SoftmaxOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_labels_and_shapes() {
        let xs = vec![vec![0.0], vec![1.0]];
        assert!(SoftmaxClassifier::fit(&xs, &[1, 3], 2, SoftmaxOptions::default()).is_err());
        assert!(SoftmaxClassifier::fit(&xs, &[1], 2, SoftmaxOptions::default()).is_err());
        let model = SoftmaxClassifier::fit(&xs, &[1, 2], 2, SoftmaxOptions::default()).unwrap();
        assert!(model.class_of(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn constant_features_do_not_break_the_fit() {
        let xs = vec![vec![1.0, 0.0], vec![1.0, 2.0], vec![1.0, 4.0]];
        let model = SoftmaxClassifier::fit(&xs, &[1, 1, 2], 2, SoftmaxOptions::default()).unwrap();
        assert_eq!(model.class_of(&[1.0, 0.0]).unwrap(), 1);
        assert_eq!(model.class_of(&[1.0, 4.0]).unwrap(), 2);
    }
}
