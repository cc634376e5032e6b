use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(clap::ValueEnum)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

/// Split percentages, train/validation/test.
pub const SPLIT_PERCENT: [u64; 3] = [70, 15, 15];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Largest-remainder apportionment of `n` samples to 70/15/15. Ties in the
/// remainder go to the earlier split (train, then val, then test).
pub fn split_counts(n: usize) -> SplitCounts {
    let n = n as u64;
    let mut quota: Vec<u64> = SPLIT_PERCENT.iter().map(|p| n * p / 100).collect();
    let mut rem: Vec<(u64, usize)> = SPLIT_PERCENT
        .iter()
        .enumerate()
        .map(|(i, p)| (n * p % 100, i))
        .collect();
    // larger remainder first, then lower index
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let leftover = n - quota.iter().sum::<u64>();
    for &(_, i) in rem.iter().take(leftover as usize) {
        quota[i] += 1;
    }
    SplitCounts {
        train: quota[0] as usize,
        val: quota[1] as usize,
        test: quota[2] as usize,
    }
}

/// Ordering key of a seed: the first 8 bytes (big-endian) of
/// SHA-256 over its little-endian encoding.
pub fn split_key(seed: u64) -> u64 {
    let digest = Sha256::digest(seed.to_le_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Assigns each seed a split. Seeds are ranked by `(split_key, seed)`; the
/// first `train` ranks go to train, the next `val` to validation and the rest
/// to test, so the counts follow [`split_counts`] exactly and the assignment
/// depends only on the set of seeds.
pub fn assign_splits(seeds: &[u64]) -> Vec<Split> {
    let counts = split_counts(seeds.len());
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by_key(|&i| (split_key(seeds[i]), seeds[i]));
    let mut out = vec![Split::Test; seeds.len()];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < counts.train {
            Split::Train
        } else if rank < counts.train + counts.val {
            Split::Val
        } else {
            Split::Test
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn production_ratios() {
        assert_eq!(
            split_counts(20),
            SplitCounts {
                train: 14,
                val: 3,
                test: 3
            }
        );
        assert_eq!(
            split_counts(50),
            SplitCounts {
                train: 35,
                val: 8,
                test: 7
            }
        );
        assert_eq!(
            split_counts(20_000),
            SplitCounts {
                train: 14_000,
                val: 3000,
                test: 3000
            }
        );
        assert_eq!(
            split_counts(200),
            SplitCounts {
                train: 140,
                val: 30,
                test: 30
            }
        );
        assert_eq!(split_counts(0), SplitCounts::default());
        assert_eq!(
            split_counts(1),
            SplitCounts {
                train: 1,
                val: 0,
                test: 0
            }
        );
        assert_eq!(
            split_counts(3),
            SplitCounts {
                train: 2,
                val: 1,
                test: 0
            }
        );
    }

    #[test]
    fn assignment_depends_on_seed_not_position() {
        let seeds: Vec<u64> = (100..120).collect();
        let a = assign_splits(&seeds);
        let mut rev = seeds.clone();
        rev.reverse();
        let mut b = assign_splits(&rev);
        b.reverse();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn splits_partition_with_exact_counts(base in any::<u32>(), n in 0usize..300) {
            let seeds: Vec<u64> = (0..n as u64).map(|i| base as u64 + i).collect();
            let s = assign_splits(&seeds);
            let c = split_counts(n);
            prop_assert_eq!(c.train + c.val + c.test, n);
            prop_assert_eq!(s.iter().filter(|&&x| x == Split::Train).count(), c.train);
            prop_assert_eq!(s.iter().filter(|&&x| x == Split::Val).count(), c.val);
            prop_assert_eq!(s.iter().filter(|&&x| x == Split::Test).count(), c.test);
        }
    }
}
