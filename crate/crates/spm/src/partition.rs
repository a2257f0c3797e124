//! Pile states and the single-grain evolution rule.
//!
//! A pile is a partition: column heights in weakly decreasing order. Grains
//! fall one at a time from the top of a cliff (height difference >= 2) onto
//! the next column. Everything else in the crate is built on the handful of
//! primitives defined here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("parts must be positive and weakly decreasing, got {0:?}")]
    NotAPartition(Vec<u32>),
    #[error("column index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no cliff at column {index}: grain cannot fall")]
    RuleNotApplicable { index: usize },
    #[error("invalid partition literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

/// Height difference classification at a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeightClass {
    /// Difference exactly 1.
    Step,
    /// Difference 0.
    Plateau,
    /// Difference at least 2.
    Cliff,
}

/// A pile of grains: weakly decreasing positive column heights.
///
/// The empty sequence is the pile with zero grains. No zero parts are ever
/// stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Validates and wraps a list of column heights.
    pub fn new(parts: Vec<u32>) -> Result<Self, PartitionError> {
        let ok = parts.windows(2).all(|w| w[0] >= w[1]) && parts.iter().all(|&p| p > 0);
        if ok {
            Ok(Partition(parts))
        } else {
            Err(PartitionError::NotAPartition(parts))
        }
    }

    /// The zero-grain pile.
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// A single column of `n` grains (the empty pile for `n = 0`).
    pub fn column(n: u64) -> Self {
        if n == 0 {
            Partition::empty()
        } else {
            Partition(vec![n as u32])
        }
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total grain count.
    pub fn grains(&self) -> u64 {
        self.0.iter().map(|&p| p as u64).sum()
    }

    /// Energy grading: sum of `j * s_j` over 1-based columns. Every grain
    /// fall increases this by exactly 1, which makes the transition graph
    /// acyclic and graded.
    pub fn rank(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(j, &p)| (j as u64 + 1) * p as u64)
            .sum()
    }

    /// Height difference with the implicit zero column past the end.
    /// Total in `i`; callers must pass `i >= 1`.
    pub(crate) fn diff_at(&self, i: usize) -> u32 {
        debug_assert!(i >= 1);
        if i > self.0.len() {
            0
        } else if i == self.0.len() {
            self.0[i - 1]
        } else {
            self.0[i - 1] - self.0[i]
        }
    }

    /// `s_i - s_{i+1}`, with `s_{k+1} = 0` past the last column.
    pub fn height_diff(&self, i: usize) -> Result<u32, PartitionError> {
        if i < 1 || i > self.0.len() {
            return Err(PartitionError::IndexOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        Ok(self.diff_at(i))
    }

    /// Step, plateau or cliff at column `i`.
    pub fn classify(&self, i: usize) -> Result<HeightClass, PartitionError> {
        Ok(Self::class_of(self.height_diff(i)?))
    }

    pub(crate) fn class_at(&self, i: usize) -> HeightClass {
        Self::class_of(self.diff_at(i))
    }

    fn class_of(diff: u32) -> HeightClass {
        match diff {
            0 => HeightClass::Plateau,
            1 => HeightClass::Step,
            _ => HeightClass::Cliff,
        }
    }

    /// Length of the initial run of steps: the largest `e` such that every
    /// column in `[1, e]` is a step. Zero for the empty pile.
    pub fn stair_length(&self) -> usize {
        let mut e = 0;
        while self.diff_at(e + 1) == 1 {
            e += 1;
        }
        e
    }

    /// Lets one grain fall from column `i` onto column `i + 1`.
    ///
    /// Fails with `RuleNotApplicable` unless there is a cliff at `i`; the
    /// grain count is preserved.
    pub fn fall(&self, i: usize) -> Result<Partition, PartitionError> {
        if i < 1 || i > self.0.len() {
            return Err(PartitionError::IndexOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        if self.diff_at(i) < 2 {
            return Err(PartitionError::RuleNotApplicable { index: i });
        }
        let mut parts = self.0.clone();
        parts[i - 1] -= 1;
        if i == parts.len() {
            parts.push(1);
        } else {
            parts[i] += 1;
        }
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Ok(Partition(parts))
    }

    /// Adds one grain on column `i`, appending a fresh column of height 1
    /// when `i = len + 1`. Fails when the increment breaks monotonicity.
    pub fn add_grain(&self, i: usize) -> Result<Partition, PartitionError> {
        if i < 1 || i > self.0.len() + 1 {
            return Err(PartitionError::IndexOutOfRange {
                index: i,
                len: self.0.len(),
            });
        }
        let mut parts = self.0.clone();
        if i == parts.len() + 1 {
            parts.push(1);
            return Ok(Partition(parts));
        }
        parts[i - 1] += 1;
        if i >= 2 && parts[i - 2] < parts[i - 1] {
            return Err(PartitionError::NotAPartition(parts));
        }
        Ok(Partition(parts))
    }

    /// All transitions out of this pile: `(i, fall(s, i))` for every cliff
    /// column `i`, in ascending column order.
    pub fn successors(&self) -> Vec<(usize, Partition)> {
        (1..=self.0.len())
            .filter(|&i| self.diff_at(i) >= 2)
            .map(|i| (i, self.fall(i).expect("cliff column")))
            .collect()
    }

    /// Closed-form membership test for the reachable set: no `p,p,p` factor,
    /// no `p,p,(p-1),(p-1)` factor, and at least one cliff strictly between
    /// any two consecutive plateaus.
    pub fn is_spm(&self) -> bool {
        let p = &self.0;
        for w in p.windows(3) {
            if w[0] == w[1] && w[1] == w[2] {
                return false;
            }
        }
        for w in p.windows(4) {
            if w[0] == w[1] && w[2] == w[3] && w[1] == w[2] + 1 {
                return false;
            }
        }
        let mut last_plateau: Option<usize> = None;
        for i in 1..=p.len() {
            if self.diff_at(i) == 0 {
                if let Some(j) = last_plateau {
                    if !((j + 1)..i).any(|m| self.diff_at(m) >= 2) {
                        return false;
                    }
                }
                last_plateau = Some(i);
            }
        }
        true
    }

    /// The unique pile of `n` grains with no cliff: a staircase with at most
    /// one doubled part. Computed in closed form; the simulation is the
    /// test oracle for it.
    pub fn fixed_point(n: u64) -> Partition {
        let mut k: u64 = 0;
        while (k + 1) * (k + 2) / 2 <= n {
            k += 1;
        }
        let doubled = n - k * (k + 1) / 2;
        let mut parts = Vec::with_capacity(k as usize + 1);
        for v in (1..=k).rev() {
            parts.push(v as u32);
            if v == doubled {
                parts.push(v as u32);
            }
        }
        Partition(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    /// Parses a comma-separated list of positive integers; the empty string
    /// denotes the zero-grain pile.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(Partition::empty());
        }
        let mut parts = Vec::new();
        for tok in t.split(',') {
            let v: u32 = tok.trim().parse().map_err(|e| PartitionError::Parse {
                literal: s.to_string(),
                reason: format!("{e}"),
            })?;
            parts.push(v);
        }
        Partition::new(parts).map_err(|_| PartitionError::Parse {
            literal: s.to_string(),
            reason: "parts must be positive and weakly decreasing".to_string(),
        })
    }
}

/// All partitions of `n` in descending lexicographic order. Enumeration
/// utility for brute-force checks; not restricted to reachable piles.
pub fn all_partitions(n: u64) -> Vec<Partition> {
    fn rec(remaining: u64, max_part: u64, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(prefix.clone()));
            return;
        }
        let hi = remaining.min(max_part);
        for v in (1..=hi).rev() {
            prefix.push(v as u32);
            rec(remaining - v, v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn height_diff_examples() {
        assert_eq!(p("3,1").height_diff(1).unwrap(), 2);
        assert_eq!(p("2,2").height_diff(1).unwrap(), 0);
        assert_eq!(p("2,2").height_diff(2).unwrap(), 2);
        assert!(matches!(
            p("2,2").height_diff(3),
            Err(PartitionError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            p("2,2").height_diff(0),
            Err(PartitionError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(p("3,2,1").classify(2).unwrap(), HeightClass::Step);
        assert_eq!(p("2,2").classify(1).unwrap(), HeightClass::Plateau);
        assert_eq!(p("3,1").classify(1).unwrap(), HeightClass::Cliff);
    }

    #[test]
    fn stair_length_examples() {
        assert_eq!(p("2,1").stair_length(), 2);
        assert_eq!(p("2,2").stair_length(), 0);
        assert_eq!(p("4,3,1").stair_length(), 1);
        assert_eq!(Partition::empty().stair_length(), 0);
    }

    #[test]
    fn stair_length_matches_classify() {
        for n in 0..=12u64 {
            for s in all_partitions(n) {
                let e = s.stair_length();
                for i in 1..=s.len() {
                    let all_steps = (1..=i).all(|j| s.class_at(j) == HeightClass::Step);
                    assert_eq!(e >= i, all_steps, "{s} at {i}");
                }
            }
        }
    }

    #[test]
    fn fall_examples() {
        assert_eq!(p("3,1").fall(1).unwrap(), p("2,2"));
        assert_eq!(p("2,2").fall(2).unwrap(), p("2,1,1"));
        assert!(matches!(
            p("2,2").fall(1),
            Err(PartitionError::RuleNotApplicable { index: 1 })
        ));
    }

    #[test]
    fn fall_conserves_grains_and_ranks_up() {
        for n in 0..=14u64 {
            for s in all_partitions(n) {
                for (i, t) in s.successors() {
                    assert_eq!(t.grains(), s.grains(), "fall at {i} from {s}");
                    assert_eq!(t.rank(), s.rank() + 1, "fall at {i} from {s}");
                }
            }
        }
    }

    #[test]
    fn successors_examples() {
        assert_eq!(p("4,2,1").successors(), vec![(1, p("3,3,1"))]);
        assert!(p("3,2,1").successors().is_empty());
        assert_eq!(p("4,2").successors(), vec![(1, p("3,3")), (2, p("4,1,1"))]);
    }

    #[test]
    fn add_grain_examples() {
        assert_eq!(p("2,1").add_grain(2).unwrap(), p("2,2"));
        assert_eq!(p("2,1").add_grain(3).unwrap(), p("2,1,1"));
        assert!(matches!(
            p("2,2").add_grain(2),
            Err(PartitionError::NotAPartition(_))
        ));
        assert_eq!(Partition::empty().add_grain(1).unwrap(), p("1"));
    }

    #[test]
    fn is_spm_examples() {
        assert!(!p("3,3,2,2").is_spm());
        assert!(p("4,4,2,2").is_spm());
        assert!(p("3,2,1").is_spm());
        assert!(!p("2,2,2").is_spm());
        assert!(Partition::empty().is_spm());
    }

    #[test]
    fn fixed_point_examples() {
        assert_eq!(Partition::fixed_point(10), p("4,3,2,1"));
        assert_eq!(Partition::fixed_point(11), p("4,3,2,1,1"));
        assert_eq!(Partition::fixed_point(0), Partition::empty());
        assert_eq!(Partition::fixed_point(5), p("2,2,1"));
        for n in 0..=60 {
            let fp = Partition::fixed_point(n);
            assert_eq!(fp.grains(), n);
            assert!(fp.successors().is_empty(), "fixed point of {n} has a cliff");
            assert!(fp.is_spm());
        }
    }

    #[test]
    fn parse_round_trip() {
        for lit in ["", "1", "4,2,1", "10,10,9"] {
            let part: Partition = lit.parse().unwrap();
            assert_eq!(part.to_string(), lit);
        }
        assert!("2,3".parse::<Partition>().is_err());
        assert!("0".parse::<Partition>().is_err());
        assert!("a,b".parse::<Partition>().is_err());
    }

    #[test]
    fn all_partitions_counts() {
        // p(0)..p(10) = 1,1,2,3,5,7,11,15,22,30,42
        let expected = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for (n, &c) in expected.iter().enumerate() {
            assert_eq!(all_partitions(n as u64).len(), c);
        }
    }
}
