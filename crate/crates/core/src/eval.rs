//! Categorization criteria: error rate, rate of true association and rate of
//! false association, all as percentages.
//!
//! All three are computed from the learned × true contingency table, so the
//! pair counts never require an O(n²) loop.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub r_e: f64,
    pub r_t: f64,
    pub r_f: f64,
    pub n: usize,
    pub k_learned: usize,
    pub k_true: usize,
    /// Learned cluster id → majority true category.
    pub label_map: BTreeMap<usize, usize>,
}

struct Contingency {
    learned_ids: Vec<usize>,
    true_ids: Vec<usize>,
    /// `counts[l][c]`: points in learned cluster `l` with true category `c`.
    counts: Vec<Vec<u64>>,
    n: u64,
}

fn dense_ids(values: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let map: BTreeMap<usize, usize> = values
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(dense, id)| (id, dense))
        .collect();
    let ids = map.keys().copied().collect();
    (ids, values.iter().map(|v| map[v]).collect())
}

fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

impl Contingency {
    fn new(assignments: &[usize], truth: &[usize]) -> Result<Self> {
        if assignments.len() != truth.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} assignments vs {} true labels",
                assignments.len(),
                truth.len()
            )));
        }
        if assignments.is_empty() {
            return Err(Error::invalid("no points to evaluate"));
        }
        let (learned_ids, a) = dense_ids(assignments);
        let (true_ids, t) = dense_ids(truth);
        let mut counts = vec![vec![0u64; true_ids.len()]; learned_ids.len()];
        for (&l, &c) in a.iter().zip(&t) {
            counts[l][c] += 1;
        }
        Ok(Self {
            learned_ids,
            true_ids,
            counts,
            n: assignments.len() as u64,
        })
    }

    /// Majority true category (dense index) per learned cluster; ties go to
    /// the smaller category id.
    fn majority(&self) -> Vec<usize> {
        self.counts
            .iter()
            .map(|row| {
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    fn misassigned(&self) -> u64 {
        let correct: u64 = self
            .counts
            .iter()
            .zip(self.majority())
            .map(|(row, m)| row[m])
            .sum();
        self.n - correct
    }

    /// (pairs sharing a true category, of which also sharing a learned cluster)
    fn same_true_pairs(&self) -> (u64, u64) {
        let total = (0..self.true_ids.len())
            .map(|c| pairs(self.counts.iter().map(|row| row[c]).sum()))
            .sum();
        let together = self.counts.iter().flatten().map(|&v| pairs(v)).sum();
        (total, together)
    }

    /// (pairs from different true categories, of which sharing a learned cluster)
    fn cross_true_pairs(&self) -> (u64, u64) {
        let (same_total, same_together) = self.same_true_pairs();
        let learned_together: u64 = self.counts.iter().map(|row| pairs(row.iter().sum())).sum();
        (pairs(self.n) - same_total, learned_together - same_together)
    }
}

fn percent(num: u64, den: u64) -> f64 {
    100.0 * num as f64 / den as f64
}

pub fn error_rate(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    let t = Contingency::new(assignments, truth)?;
    Ok(percent(t.misassigned(), t.n))
}

pub fn true_association_rate(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    let t = Contingency::new(assignments, truth)?;
    let (total, together) = t.same_true_pairs();
    if total == 0 {
        return Err(Error::invalid("no pair of points shares a true category"));
    }
    Ok(percent(together, total))
}

pub fn false_association_rate(assignments: &[usize], truth: &[usize]) -> Result<f64> {
    let t = Contingency::new(assignments, truth)?;
    let (total, together) = t.cross_true_pairs();
    if total == 0 {
        return Err(Error::invalid("no pair of points comes from different true categories"));
    }
    Ok(percent(together, total))
}

/// All three criteria at once.
pub fn evaluate(assignments: &[usize], truth: &[usize]) -> Result<EvalReport> {
    let t = Contingency::new(assignments, truth)?;
    let (same_total, same_together) = t.same_true_pairs();
    let (cross_total, cross_together) = t.cross_true_pairs();
    if same_total == 0 || cross_total == 0 {
        return Err(Error::invalid(
            "evaluation needs at least one same-category and one cross-category pair",
        ));
    }
    let label_map = t
        .majority()
        .into_iter()
        .enumerate()
        .map(|(l, c)| (t.learned_ids[l], t.true_ids[c]))
        .collect();
    Ok(EvalReport {
        r_e: percent(t.misassigned(), t.n),
        r_t: percent(same_together, same_total),
        r_f: percent(cross_together, cross_total),
        n: assignments.len(),
        k_learned: t.learned_ids.len(),
        k_true: t.true_ids.len(),
        label_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRUTH: [usize; 4] = [0, 0, 1, 1];
    const LEARNED: [usize; 4] = [0, 0, 0, 1];

    #[test]
    fn worked_example() {
        assert_eq!(error_rate(&LEARNED, &TRUTH).unwrap(), 25.0);
        assert_eq!(true_association_rate(&LEARNED, &TRUTH).unwrap(), 50.0);
        assert_eq!(false_association_rate(&LEARNED, &TRUTH).unwrap(), 50.0);
        let r = evaluate(&LEARNED, &TRUTH).unwrap();
        assert_eq!((r.r_e, r.r_t, r.r_f), (25.0, 50.0, 50.0));
        assert_eq!(r.label_map[&0], 0);
        assert_eq!(r.label_map[&1], 1);
    }

    #[test]
    fn perfect_partition() {
        let r = evaluate(&[5, 5, 2, 2, 9], &[0, 0, 1, 1, 2]).unwrap();
        assert_eq!((r.r_e, r.r_t, r.r_f), (0.0, 100.0, 0.0));
        assert_eq!(r.k_learned, 3);
    }

    #[test]
    fn one_big_cluster() {
        let all = [0; 6];
        let truth = [0, 0, 0, 1, 1, 1];
        assert_eq!(error_rate(&all, &truth).unwrap(), 50.0);
        assert_eq!(false_association_rate(&all, &truth).unwrap(), 100.0);
        assert_eq!(true_association_rate(&all, &truth).unwrap(), 100.0);
    }

    #[test]
    fn singletons_have_no_true_association() {
        assert_eq!(true_association_rate(&[0, 1, 2, 3], &TRUTH).unwrap(), 0.0);
        assert_eq!(error_rate(&[0, 1, 2, 3], &TRUTH).unwrap(), 0.0);
    }

    #[test]
    fn majority_tie_goes_to_smaller_category() {
        let r = evaluate(&[0, 0, 1, 1], &[3, 1, 1, 3]).unwrap();
        assert_eq!(r.label_map[&0], 1);
        assert_eq!(r.r_e, 50.0);
    }

    #[test]
    fn error_paths() {
        assert!(error_rate(&[0, 1], &[0]).is_err());
        assert!(error_rate(&[], &[]).is_err());
        assert!(true_association_rate(&[0, 1], &[0, 1]).is_err());
        assert!(false_association_rate(&[0, 1], &[4, 4]).is_err());
    }
}
