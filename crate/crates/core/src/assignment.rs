//! User-to-channel assignment as maximum-weight perfect bipartite matching.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::power::PairSolution;
use crate::rng::Rng;

/// Largest size the exhaustive oracle accepts (8! = 40320 permutations).
pub const MAX_EXHAUSTIVE_SIZE: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum AssignmentError {
    #[error("weight matrix is empty")]
    Empty,
    #[error("weight matrix must be square, row {row} has {len} entries for size {size}")]
    NotSquare { row: usize, len: usize, size: usize },
    #[error("weight at ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("exhaustive search supports at most {MAX_EXHAUSTIVE_SIZE} users, got {0}")]
    TooLarge(usize),
}

/// Solved rates `R[i][j]` of user `i` on channel `j` with the power vectors
/// that achieve them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    rates: Vec<Vec<f64>>,
    solutions: Vec<Vec<PairSolution>>,
}

impl RateTable {
    pub fn from_solutions(solutions: Vec<Vec<PairSolution>>) -> Self {
        let rates = solutions.iter().map(|row| row.iter().map(|s| s.rate).collect()).collect();
        Self { rates, solutions }
    }

    pub fn rates(&self) -> &[Vec<f64>] {
        &self.rates
    }

    pub fn solution(&self, user: usize, channel: usize) -> &PairSolution {
        &self.solutions[user][channel]
    }

    pub fn size(&self) -> usize {
        self.rates.len()
    }
}

/// `channel_of[i]` is the channel given to user `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    pub channel_of: Vec<usize>,
}

impl Assignment {
    pub fn identity(k: usize) -> Self {
        Self { channel_of: (0..k).collect() }
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.channel_of.len()];
        self.channel_of.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
    }

    /// `user_on[j]`: the user served on channel `j`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.channel_of.len()];
        for (i, &j) in self.channel_of.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    /// `Σ_i w[i][channel_of[i]]`, summed in user order.
    pub fn total(&self, weights: &[Vec<f64>]) -> f64 {
        self.channel_of.iter().enumerate().map(|(i, &j)| weights[i][j]).sum()
    }
}

fn check_square(weights: &[Vec<f64>]) -> Result<usize, AssignmentError> {
    let k = weights.len();
    if k == 0 {
        return Err(AssignmentError::Empty);
    }
    for (row, r) in weights.iter().enumerate() {
        if r.len() != k {
            return Err(AssignmentError::NotSquare { row, len: r.len(), size: k });
        }
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(AssignmentError::NonFinite(row, col));
        }
    }
    Ok(k)
}

/// Maximum-weight perfect matching by the Hungarian method, O(K³).
///
/// Shortest augmenting paths with real-valued row and column potentials on
/// the cost `-w`. Returns the assignment and its total weight.
pub fn kuhn_munkres(weights: &[Vec<f64>]) -> Result<(Assignment, f64), AssignmentError> {
    let k = check_square(weights)?;
    let cost = |i: usize, j: usize| -weights[i][j];
    // 1-based with a virtual column 0, as in the classic formulation
    let mut u = vec![0.0f64; k + 1];
    let mut v = vec![0.0f64; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];

    for i in 1..=k {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut channel_of = vec![0; k];
    for j in 1..=k {
        channel_of[row_of[j] - 1] = j - 1;
    }
    let assignment = Assignment { channel_of };
    let total = assignment.total(weights);
    Ok((assignment, total))
}

/// Global optimum by enumerating all `K!` permutations in lexicographic
/// order; ties keep the lexicographically smallest permutation.
pub fn exhaustive_oracle(weights: &[Vec<f64>]) -> Result<(Assignment, f64), AssignmentError> {
    let k = check_square(weights)?;
    if k > MAX_EXHAUSTIVE_SIZE {
        return Err(AssignmentError::TooLarge(k));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = Assignment { channel_of: perm.clone() };
    let mut best_total = best.total(weights);
    while next_permutation(&mut perm) {
        let candidate = Assignment { channel_of: perm.clone() };
        let total = candidate.total(weights);
        if total > best_total {
            best = candidate;
            best_total = total;
        }
    }
    Ok((best, best_total))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("a larger element exists past i");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Uniformly random permutation.
pub fn random_assignment(k: usize, rng: &mut Rng) -> Assignment {
    let mut channel_of: Vec<usize> = (0..k).collect();
    channel_of.shuffle(rng);
    Assignment { channel_of }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn diagonal_table_gives_identity() {
        let w = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let (a, total) = kuhn_munkres(&w).unwrap();
        assert_eq!(a, Assignment::identity(3));
        assert_eq!(total, 3.0);
    }

    #[test]
    fn two_by_two_example() {
        let w = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let (a, total) = kuhn_munkres(&w).unwrap();
        assert_eq!(a, Assignment::identity(2));
        assert_eq!(total, 5.0);
        let (b, t) = exhaustive_oracle(&w).unwrap();
        assert_eq!(b, Assignment::identity(2));
        assert_eq!(t, 5.0);
    }

    #[test]
    fn single_user() {
        let w = vec![vec![0.7]];
        assert_eq!(kuhn_munkres(&w).unwrap(), (Assignment::identity(1), 0.7));
        assert_eq!(exhaustive_oracle(&w).unwrap(), (Assignment::identity(1), 0.7));
    }

    #[test]
    fn next_permutation_enumerates_in_order() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(seen.len(), 6);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exhaustive_ties_pick_smallest_permutation() {
        let w = vec![vec![1.0; 3]; 3];
        assert_eq!(exhaustive_oracle(&w).unwrap().0, Assignment::identity(3));
    }

    #[test]
    fn errors() {
        assert_eq!(kuhn_munkres(&[]), Err(AssignmentError::Empty));
        assert!(matches!(
            kuhn_munkres(&[vec![1.0, 2.0], vec![1.0]]),
            Err(AssignmentError::NotSquare { row: 1, len: 1, size: 2 })
        ));
        assert_eq!(kuhn_munkres(&[vec![f64::NAN]]), Err(AssignmentError::NonFinite(0, 0)));
        let big = vec![vec![0.0; 9]; 9];
        assert_eq!(exhaustive_oracle(&big), Err(AssignmentError::TooLarge(9)));
    }

    #[test]
    fn random_assignment_is_seeded_and_uniform() {
        assert_eq!(random_assignment(1, &mut stream(0, 0)), Assignment::identity(1));
        assert_eq!(random_assignment(5, &mut stream(9, 0)), random_assignment(5, &mut stream(9, 0)));

        let mut rng = stream(1234, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            *counts.entry(random_assignment(3, &mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            assert!(perm.is_permutation());
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "{perm:?}: {freq}");
        }
    }
}
