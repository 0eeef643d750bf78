use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Occupation numbers of the two Schwinger modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockState {
    pub n1: usize,
    pub n2: usize,
}

impl FockState {
    pub fn new(n1: usize, n2: usize) -> Self {
        FockState { n1, n2 }
    }

    /// Total quanta `n = n1 + n2`, i.e. `2j`.
    pub fn total(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Truncated two-mode Fock space with `n1 + n2 <= n_max`.
///
/// States are ordered by total number `n` ascending and, inside each `n`
/// block, by `n1` descending. The index of `(n1, n2)` is therefore
/// `n(n+1)/2 + (n - n1)`, which keeps exported matrices comparable across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    states: Vec<FockState>,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::NMaxTooSmall(n_max));
        }
        let states = (0..=n_max)
            .flat_map(|n| (0..=n).rev().map(move |n1| FockState::new(n1, n - n1)))
            .collect();
        Ok(FockBasis { n_max, states })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> FockState {
        self.states[index]
    }

    pub fn index_of(&self, n1: usize, n2: usize) -> Option<usize> {
        let n = n1 + n2;
        (n <= self.n_max).then(|| block_start(n) + (n - n1))
    }

    /// Index range occupied by the states of total number `n`.
    pub fn block_range(&self, n: usize) -> Range<usize> {
        let start = block_start(n);
        start..start + n + 1
    }

    /// Position of `(n1, n2)` inside its own `n` block.
    pub fn offset_in_block(_n1: usize, n2: usize) -> usize {
        n2
    }

    /// Shifted angular momentum `S = (n + 1)/2` on the block of total number `n`.
    pub fn s_value(n: usize) -> f64 {
        (n as f64 + 1.0) / 2.0
    }
}

fn block_start(n: usize) -> usize {
    n * (n + 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula() {
        assert_eq!(FockBasis::new(2).unwrap().dim(), 6);
        assert_eq!(FockBasis::new(40).unwrap().dim(), 861);
        for n_max in 2..=60 {
            let b = FockBasis::new(n_max).unwrap();
            assert_eq!(b.dim(), (n_max + 1) * (n_max + 2) / 2);
        }
    }

    #[test]
    fn rejects_tiny_truncation() {
        assert_eq!(FockBasis::new(0), Err(Error::NMaxTooSmall(0)));
        assert_eq!(FockBasis::new(1), Err(Error::NMaxTooSmall(1)));
    }

    #[test]
    fn ordering_is_grouped_and_bijective() {
        let b = FockBasis::new(7).unwrap();
        let mut last_n = 0;
        for (i, s) in b.states().iter().enumerate() {
            assert!(s.total() >= last_n);
            last_n = s.total();
            assert_eq!(b.index_of(s.n1, s.n2), Some(i));
            assert!(b.block_range(s.total()).contains(&i));
            assert_eq!(
                i - b.block_range(s.total()).start,
                FockBasis::offset_in_block(s.n1, s.n2)
            );
        }
        assert_eq!(b.state(0), FockState::new(0, 0));
        assert_eq!(b.state(1), FockState::new(1, 0));
        assert_eq!(b.state(2), FockState::new(0, 1));
        assert_eq!(b.index_of(5, 3), None);
    }
}
