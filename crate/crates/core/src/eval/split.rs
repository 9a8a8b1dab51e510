use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::synth::stream_rng;

/// Smallest stratum that can be split three ways.
pub const MIN_STRATUM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Row indices of each part, ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified three-way split of rows `0..strata.len()`. Each stratum is
/// shuffled with its own stream derived from the seed and the stratum's rank.
pub fn split_dataset<K: Ord + Copy>(strata: &[K], spec: &SplitSpec) -> Result<Split, EvalError> {
    let parts = [spec.train, spec.validation, spec.test];
    if parts.iter().any(|&f| !(0.0..=1.0).contains(&f))
        || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(EvalError::Config(format!(
            "split fractions {parts:?} must be in [0, 1] and sum to 1"
        )));
    }
    let mut groups: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for (i, &k) in strata.iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    let mut out = Split::default();
    for (rank, members) in groups.values_mut().enumerate() {
        if members.len() < MIN_STRATUM {
            return Err(EvalError::Config(format!(
                "stratum {rank} has {} members, need at least {MIN_STRATUM}",
                members.len()
            )));
        }
        members.shuffle(&mut stream_rng(spec.seed, rank as u64));
        let n = members.len();
        let n_train = (n as f64 * spec.train).round() as usize;
        let n_val = ((n as f64 * spec.validation).round() as usize).min(n - n_train);
        out.train.extend(&members[..n_train]);
        out.validation.extend(&members[n_train..n_train + n_val]);
        out.test.extend(&members[n_train + n_val..]);
    }
    out.train.sort_unstable();
    out.validation.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_per_class() {
        let strata: Vec<u8> = (0..3000).map(|i| (i % 3) as u8).collect();
        let s = split_dataset(&strata, &SplitSpec::with_seed(4)).unwrap();
        for c in 0..3u8 {
            let count = |v: &[usize]| v.iter().filter(|&&i| strata[i] == c).count();
            assert_eq!(
                (count(&s.train), count(&s.validation), count(&s.test)),
                (600, 200, 200)
            );
        }
        assert_eq!(s, split_dataset(&strata, &SplitSpec::with_seed(4)).unwrap());
        assert_ne!(s, split_dataset(&strata, &SplitSpec::with_seed(5)).unwrap());
    }

    #[test]
    fn undersized_stratum_rejected() {
        let strata = [0, 0, 0, 0, 0, 1, 1];
        assert!(matches!(
            split_dataset(&strata, &SplitSpec::default()),
            Err(EvalError::Config(_))
        ));
    }
}
