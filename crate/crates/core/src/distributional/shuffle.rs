//! Pro-KWo with permuted MCDIp values: the chance baseline.

use alloc::vec::Vec;

use super::{pro_kwo, CooccurrenceMatrix, DistributionalError};
use crate::rng::ShuffleRng;
use crate::stats::pearson_pairwise;

/// One permutation's correlation with the unshuffled MCDIp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuffleDraw {
    pub iteration: u64,
    pub r: f64,
    /// Pairwise-complete words in the correlation.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuffleOutcome {
    pub draws: Vec<ShuffleDraw>,
    pub mean_r: f64,
}

impl ShuffleOutcome {
    /// Average the draws in iteration order.
    pub fn from_draws(mut draws: Vec<ShuffleDraw>) -> Result<Self, DistributionalError> {
        if draws.is_empty() {
            return Err(DistributionalError::NoShuffles);
        }
        draws.sort_by_key(|d| d.iteration);
        let sum: f64 = draws.iter().map(|d| d.r).sum();
        let mean_r = sum / draws.len() as f64;
        Ok(Self { draws, mean_r })
    }
}

/// The permutation of `mcdip_row` used by iteration `iteration` of a run seeded with `seed`.
pub fn shuffled_mcdip(mcdip_row: &[f64], seed: u64, iteration: u64) -> Vec<f64> {
    let mut shuffled = mcdip_row.to_vec();
    ShuffleRng::new(seed, iteration).shuffle(&mut shuffled);
    shuffled
}

/// Permute MCDIp, recompute Pro-KWo, correlate with `mcdip_true`.
pub fn shuffle_iteration(
    matrix: &CooccurrenceMatrix,
    mcdip_row: &[f64],
    mcdip_true: &[f64],
    seed: u64,
    iteration: u64,
) -> Result<ShuffleDraw, DistributionalError> {
    if mcdip_true.len() != matrix.size() {
        return Err(DistributionalError::McdipLength {
            expected: matrix.size(),
            got: mcdip_true.len(),
        });
    }
    let shuffled = pro_kwo(matrix, &shuffled_mcdip(mcdip_row, seed, iteration))?;
    let truth: Vec<Option<f64>> = mcdip_true.iter().copied().map(Some).collect();
    let c = pearson_pairwise(&shuffled, &truth)
        .map_err(|source| DistributionalError::ShuffleCorrelation { iteration, source })?;
    Ok(ShuffleDraw {
        iteration,
        r: c.r,
        n: c.n,
    })
}

/// Mean correlation over `n_shuffles` permutations, run sequentially.
pub fn pro_kwo_shuffle(
    matrix: &CooccurrenceMatrix,
    mcdip_row: &[f64],
    mcdip_true: &[f64],
    n_shuffles: u64,
    seed: u64,
) -> Result<ShuffleOutcome, DistributionalError> {
    if n_shuffles == 0 {
        return Err(DistributionalError::NoShuffles);
    }
    let draws = (0..n_shuffles)
        .map(|i| shuffle_iteration(matrix, mcdip_row, mcdip_true, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    ShuffleOutcome::from_draws(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::StatsError;

    fn toy() -> (CooccurrenceMatrix, Vec<f64>) {
        let triples: Vec<(usize, usize, u64)> = (0..6)
            .flat_map(|r| (0..6).map(move |c| (r, c, ((r * 7 + c * 3) % 5) as u64)))
            .collect();
        (
            CooccurrenceMatrix::from_triples(6, 24, &triples),
            alloc::vec![0.1, 0.9, 0.4, 0.3, 0.75, 0.5],
        )
    }

    #[test]
    fn same_seed_same_result() {
        let (m, mcdip) = toy();
        let a = pro_kwo_shuffle(&m, &mcdip, &mcdip, 20, 5).unwrap();
        let b = pro_kwo_shuffle(&m, &mcdip, &mcdip, 20, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.mean_r.to_bits(), b.mean_r.to_bits());
        let c = pro_kwo_shuffle(&m, &mcdip, &mcdip, 20, 6).unwrap();
        assert_ne!(a.mean_r, c.mean_r);
    }

    #[test]
    fn order_of_draws_does_not_matter() {
        let (m, mcdip) = toy();
        let mut draws: Vec<_> = (0..10)
            .rev()
            .map(|i| shuffle_iteration(&m, &mcdip, &mcdip, 1, i).unwrap())
            .collect();
        draws.swap(2, 7);
        let outcome = ShuffleOutcome::from_draws(draws).unwrap();
        assert_eq!(outcome, pro_kwo_shuffle(&m, &mcdip, &mcdip, 10, 1).unwrap());
    }

    #[test]
    fn shuffles_preserve_the_multiset() {
        let (_, mcdip) = toy();
        for i in 0..50 {
            let mut s = shuffled_mcdip(&mcdip, 3, i);
            let mut orig = mcdip.clone();
            s.sort_by(f64::total_cmp);
            orig.sort_by(f64::total_cmp);
            assert_eq!(s, orig);
        }
    }

    #[test]
    fn too_few_words_is_an_error() {
        let m = CooccurrenceMatrix::from_triples(4, 20, &[(0, 1, 1), (1, 0, 1)]);
        let mcdip = [0.2, 0.4, 0.6, 0.8];
        let err = pro_kwo_shuffle(&m, &mcdip, &mcdip, 3, 0).unwrap_err();
        assert!(matches!(
            err,
            DistributionalError::ShuffleCorrelation {
                source: StatsError::InsufficientData { .. },
                ..
            }
        ));
        assert_eq!(pro_kwo_shuffle(&m, &mcdip, &mcdip, 0, 0).unwrap_err(), DistributionalError::NoShuffles);
    }
}
