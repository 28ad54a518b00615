use rand::Rng;

use super::SimError;
use crate::learners::{decision_value, FeatureVector, LinearModel};

/// Draws `k` distinct items uniformly without replacement, in draw order.
pub fn select_random<I: Clone, R: Rng + ?Sized>(
    unlabeled: &[I],
    k: usize,
    rng: &mut R,
) -> Result<Vec<I>, SimError> {
    if k > unlabeled.len() {
        return Err(SimError::KTooLarge {
            k,
            available: unlabeled.len(),
        });
    }
    Ok(rand::seq::index::sample(rng, unlabeled.len(), k)
        .into_iter()
        .map(|i| unlabeled[i].clone())
        .collect())
}

/// The `k` candidates with the smallest `|decision value|`, nearest first;
/// equal margins are ordered by ascending id.
pub fn select_closest_to_hyperplane<I: Ord + Clone>(
    model: &LinearModel,
    unlabeled: &[(I, &FeatureVector)],
    k: usize,
) -> Result<Vec<I>, SimError> {
    if k > unlabeled.len() {
        return Err(SimError::KTooLarge {
            k,
            available: unlabeled.len(),
        });
    }
    let mut scored: Vec<(f64, &I)> = unlabeled
        .iter()
        .map(|(id, v)| (decision_value(model, v).abs(), id))
        .collect();
    let by_margin = |a: &(f64, &I), b: &(f64, &I)| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1));
    if k < scored.len() && k > 0 {
        scored.select_nth_unstable_by(k - 1, by_margin);
        scored.truncate(k);
    }
    scored.sort_by(by_margin);
    Ok(scored.into_iter().take(k).map(|(_, id)| id.clone()).collect())
}
