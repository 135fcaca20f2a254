//! Reader for the LIBSVM text format: one `<label> <idx>:<val> ...` sample
//! per line with 1-based, strictly ascending feature indices. Blank lines
//! are skipped. Distinct labels are remapped to `1..=K` in sorted order of
//! the original values.

use std::io::BufRead;

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmDataset {
    /// Remapped class labels in `1..=K`.
    labels: Vec<usize>,
    /// Original label values, aligned with `labels`.
    original_labels: Vec<i64>,
    /// Sparse rows of `(0-based index, value)` pairs.
    rows: Vec<Vec<(usize, f64)>>,
    dim: usize,
    num_classes: usize,
}

impl LibsvmDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn original_labels(&self) -> &[i64] {
        &self.original_labels
    }

    pub fn sparse_row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(idx, val) in &self.rows[i] {
            out[idx] = val;
        }
        out
    }

    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.dense_row(i)).collect()
    }

    /// Sub-dataset holding `rows` in order. Class remapping is preserved
    /// from the parent, so labels stay comparable across subsets.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        for &r in rows {
            if r >= self.len() {
                return Err(CoreError::InvalidArgument(format!(
                    "row {} outside 0..{}",
                    r,
                    self.len()
                )));
            }
        }
        Ok(Self {
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            original_labels: rows.iter().map(|&r| self.original_labels[r]).collect(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            dim: self.dim,
            num_classes: self.num_classes,
        })
    }
}

pub fn parse_libsvm<R: BufRead>(input: R) -> Result<LibsvmDataset> {
    let mut original_labels = Vec::new();
    let mut rows = Vec::new();
    let mut dim = 0usize;

    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(CoreError::Io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: i64 = label_tok.parse().map_err(|_| CoreError::Parse {
            line: lineno,
            message: format!("bad label {label_tok:?}"),
        })?;

        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut prev_idx = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok.split_once(':').ok_or_else(|| CoreError::Parse {
                line: lineno,
                message: format!("feature {tok:?} is not idx:val"),
            })?;
            let idx: usize = idx_str.parse().map_err(|_| CoreError::Parse {
                line: lineno,
                message: format!("bad feature index {idx_str:?}"),
            })?;
            if idx == 0 {
                return Err(CoreError::Parse {
                    line: lineno,
                    message: "feature indices are 1-based".into(),
                });
            }
            if idx <= prev_idx {
                return Err(CoreError::Parse {
                    line: lineno,
                    message: format!("feature index {idx} not ascending after {prev_idx}"),
                });
            }
            let val: f64 = val_str.parse().map_err(|_| CoreError::Parse {
                line: lineno,
                message: format!("bad feature value {val_str:?}"),
            })?;
            if !val.is_finite() {
                return Err(CoreError::Parse {
                    line: lineno,
                    message: format!("non-finite feature value {val}"),
                });
            }
            prev_idx = idx;
            row.push((idx - 1, val));
        }
        dim = dim.max(prev_idx);
        original_labels.push(label);
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(CoreError::Parse {
            line: 1,
            message: "no samples".into(),
        });
    }

    let mut distinct: Vec<i64> = original_labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let labels = original_labels
        .iter()
        .map(|l| distinct.binary_search(l).expect("label is present") + 1)
        .collect();

    Ok(LibsvmDataset {
        labels,
        original_labels,
        rows,
        dim,
        num_classes: distinct.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sparse_rows_and_remaps_labels() {
        let text = "3 1:0.5 4:1.0\n7 2:2.0\n\n3 1:-1.5\n";
        let ds = parse_libsvm(text.as_bytes()).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.num_classes(), 2);
        // Sorted originals [3, 7] map to [1, 2].
        assert_eq!(ds.labels(), &[1, 2, 1]);
        assert_eq!(ds.original_labels(), &[3, 7, 3]);
        assert_eq!(ds.dense_row(0), vec![0.5, 0.0, 0.0, 1.0]);
        assert_eq!(ds.dense_row(1), vec![0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn negative_and_signed_labels_are_accepted() {
        let ds = parse_libsvm("-1 1:1.0\n+1 1:2.0\n".as_bytes()).unwrap();
        assert_eq!(ds.labels(), &[1, 2]);
        assert_eq!(ds.original_labels(), &[-1, 1]);
    }

    #[test]
    fn malformed_lines_are_rejected_with_their_number() {
        let cases = [
            ("1 1:0.5\nbad 1:2\n", 2),
            ("1 1:0.5\n2 0:1.0\n", 2),
            ("1 3:0.5 2:1.0\n", 1),
            ("1 1:x\n", 1),
            ("1 1\n", 1),
        ];
        for (text, want_line) in cases {
            match parse_libsvm(text.as_bytes()) {
                Err(CoreError::Parse { line, .. }) => assert_eq!(line, want_line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_libsvm("".as_bytes()).is_err());
        assert!(parse_libsvm("\n  \n".as_bytes()).is_err());
    }

    #[test]
    fn select_keeps_the_class_mapping() {
        let ds = parse_libsvm("5 1:1.0\n9 1:2.0\n5 1:3.0\n".as_bytes()).unwrap();
        let sub = ds.select(&[2, 1]).unwrap();
        assert_eq!(sub.labels(), &[1, 2]);
        assert_eq!(sub.num_classes(), 2);
        assert_eq!(sub.dense_row(0), vec![3.0]);
        assert!(ds.select(&[3]).is_err());
    }

    #[test]
    fn rows_with_no_features_are_allowed() {
        let ds = parse_libsvm("1\n2 1:1.0\n".as_bytes()).unwrap();
        assert_eq!(ds.dense_row(0), vec![0.0]);
    }
}
