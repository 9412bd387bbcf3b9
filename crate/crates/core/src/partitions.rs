//! Integer partitions: the partition function `p(n)` and explicit enumeration.
//!
//! `p(n)` comes from Euler's pentagonal-number recurrence
//!
//! ```text
//! p(n) = Σ_{k≥1} (-1)^{k+1} [ p(n - k(3k-1)/2) + p(n - k(3k+1)/2) ]
//! ```
//!
//! and is memoized process-wide.

use std::sync::{Mutex, OnceLock};

/// Values `p(0)..=p(N)` of the partition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTable {
    values: Vec<u128>,
}

impl PartitionTable {
    /// Builds the table up to and including `max_n`.
    pub fn new(max_n: usize) -> Self {
        let mut table = PartitionTable { values: vec![1] };
        table.extend_to(max_n);
        table
    }

    pub fn max_n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<u128> {
        self.values.get(n).copied()
    }

    pub fn values(&self) -> &[u128] {
        &self.values
    }

    fn extend_to(&mut self, max_n: usize) {
        for n in self.values.len()..=max_n {
            // Signed accumulation: terms alternate in pairs.
            let mut acc: i128 = 0;
            for k in 1usize.. {
                let g1 = k * (3 * k - 1) / 2;
                if g1 > n {
                    break;
                }
                let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
                acc = acc
                    .checked_add(sign * self.values[n - g1] as i128)
                    .expect("partition count overflow");
                let g2 = k * (3 * k + 1) / 2;
                if g2 <= n {
                    acc = acc
                        .checked_add(sign * self.values[n - g2] as i128)
                        .expect("partition count overflow");
                }
            }
            debug_assert!(acc > 0);
            self.values.push(acc as u128);
        }
    }
}

fn cache() -> &'static Mutex<PartitionTable> {
    static CACHE: OnceLock<Mutex<PartitionTable>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(PartitionTable::new(64)))
}

/// Number of unordered partitions of `n`.
pub fn partition_count(n: usize) -> u128 {
    let mut table = cache().lock().unwrap_or_else(|e| e.into_inner());
    if n > table.max_n() {
        table.extend_to(n);
    }
    table.values[n]
}

/// All partitions of `n` as non-increasing part lists, ordered
/// lexicographically descending: `3 → [3], [2,1], [1,1,1]`.
///
/// `n = 0` yields the single empty partition.
pub fn enumerate_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(n, n, &mut current, &mut out);
    out
}

fn fill(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        fill(remaining - part, part, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts partitions of n into parts ≤ m by the textbook two-branch
    /// recursion; shares nothing with the pentagonal recurrence.
    fn brute_count(n: usize, m: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        if m == 0 {
            return 0;
        }
        let without = brute_count(n, m - 1);
        if m <= n {
            without + brute_count(n - m, m)
        } else {
            without
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(partition_count(0), 1);
        assert_eq!(partition_count(4), 5);
        assert_eq!(partition_count(7), 15);
        assert_eq!(partition_count(100), 190_569_292);
    }

    #[test]
    fn recurrence_matches_brute_enumeration() {
        for n in 0..=20 {
            assert_eq!(partition_count(n), brute_count(n, n), "n = {n}");
        }
    }

    #[test]
    fn enumeration_order_and_length() {
        assert_eq!(enumerate_partitions(0), vec![Vec::<usize>::new()]);
        assert_eq!(
            enumerate_partitions(3),
            vec![vec![3], vec![2, 1], vec![1, 1, 1]]
        );
        assert_eq!(enumerate_partitions(5).len(), 7);
        for n in 0..=30 {
            let parts = enumerate_partitions(n);
            assert_eq!(parts.len() as u128, partition_count(n));
            for p in &parts {
                assert_eq!(p.iter().sum::<usize>(), n);
                assert!(p.windows(2).all(|w| w[0] >= w[1]));
            }
            assert!(parts.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn table_is_positive_and_monotone() {
        let t = PartitionTable::new(60);
        assert_eq!(t.get(0), Some(1));
        assert!(t.values()[1..].windows(2).all(|w| w[0] <= w[1]));
        assert!(t.values().iter().all(|&v| v > 0));
    }
}
