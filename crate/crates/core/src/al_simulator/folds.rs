use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::SimError;

/// `(train, test)` indices of one fold.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Seeded shuffle of `0..n` cut into `folds` contiguous parts; fold `i`
/// tests on part `i` and trains on the rest. The first `n % folds` parts
/// get one extra item.
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Fold>, SimError> {
    if folds < 2 {
        return Err(SimError::ConfigInvalid(format!("folds must be at least 2, got {folds}")));
    }
    if n < folds {
        return Err(SimError::TooFewDocuments { docs: n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let (base, extra) = (n / folds, n % folds);
    let mut bounds = Vec::with_capacity(folds + 1);
    bounds.push(0);
    for i in 0..folds {
        bounds.push(bounds[i] + base + usize::from(i < extra));
    }
    Ok((0..folds)
        .map(|i| {
            let test = order[bounds[i]..bounds[i + 1]].to_vec();
            let train = order[..bounds[i]]
                .iter()
                .chain(&order[bounds[i + 1]..])
                .copied()
                .collect();
            (train, test)
        })
        .collect())
}
