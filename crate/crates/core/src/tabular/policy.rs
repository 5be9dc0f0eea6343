use rand::Rng;

use super::QTable;

/// Epsilon-greedy action: uniform with probability `epsilon`, otherwise the
/// greedy action with ties broken toward the lowest index.
///
/// Always consumes one uniform draw, plus one more when exploring.
pub fn epsilon_greedy<R: Rng + ?Sized>(q: &QTable, s: usize, epsilon: f64, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    if u < epsilon {
        rng.gen_range(0..q.n_actions())
    } else {
        q.greedy_action(s)
    }
}
