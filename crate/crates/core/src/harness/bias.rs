//! Normalized estimation bias of a critic against Monte Carlo returns.

use rand::Rng;

use crate::envs::Episodic;
use crate::error::{Error, Result};
use crate::tabular::mean_std;

const MIN_NORMALIZER: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasReport {
    pub step: u64,
    pub mean_normalized_bias: f64,
    pub std_normalized_bias: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasSettings {
    pub n_rollouts: usize,
    pub gamma: f64,
    /// Discounted returns are summed over this many steps.
    pub truncation_horizon: usize,
    /// Each sampled pair is taken after a uniform number of policy steps in
    /// `0..burn_in` from reset.
    pub burn_in: usize,
}

impl BiasSettings {
    pub fn new(n_rollouts: usize, gamma: f64, burn_in: usize) -> Result<Self> {
        Ok(BiasSettings {
            n_rollouts,
            gamma,
            truncation_horizon: truncation_horizon(gamma)?,
            burn_in,
        })
    }
}

/// Smallest `H` with `gamma^H < 1e-4`.
pub fn truncation_horizon(gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let h = (1e-4f64.ln() / gamma.ln()).ceil() as usize;
    // Guard the boundary where the ratio lands on an integer.
    Ok(if gamma.powi(h as i32) < 1e-4 { h } else { h + 1 })
}

/// Samples `(s, a)` pairs from fresh on-policy rollouts, compares
/// `critic(s, a)` with the discounted return of following `policy` from
/// `(s, a)`, and reports mean and std of `(estimate - return) / |mean return|`.
///
/// Returns are summed for `truncation_horizon` steps or until a terminal
/// state; time-limit truncation is ignored, so the return estimates the
/// infinite-horizon value a bootstrapped critic learns.
pub fn estimate_normalized_bias<E, P, C, R>(
    env: &E,
    mut policy: P,
    mut critic: C,
    settings: &BiasSettings,
    rng: &mut R,
) -> Result<BiasReport>
where
    E: Episodic + Clone,
    P: FnMut(&E::Obs, &mut R) -> Result<E::Action>,
    C: FnMut(&E::Obs, &E::Action) -> Result<f64>,
    R: Rng,
{
    if settings.n_rollouts < 2 {
        return Err(Error::invalid("bias estimation needs at least 2 rollouts"));
    }
    if settings.truncation_horizon == 0 || !(0.0..1.0).contains(&settings.gamma) {
        return Err(Error::invalid(
            "truncation horizon must be positive and gamma in [0, 1)",
        ));
    }
    let mut estimates = Vec::with_capacity(settings.n_rollouts);
    let mut returns = Vec::with_capacity(settings.n_rollouts);
    for _ in 0..settings.n_rollouts {
        let mut env = env.clone();
        let mut obs = env.reset(rng);
        let skip = if settings.burn_in > 0 {
            rng.gen_range(0..settings.burn_in)
        } else {
            0
        };
        for _ in 0..skip {
            let a = policy(&obs, rng)?;
            let res = env.step(&a, rng)?;
            if res.done {
                // Terminal states carry no information; restart the walk.
                obs = env.reset(rng);
            } else {
                obs = res.next_state;
            }
        }
        let action = policy(&obs, rng)?;
        estimates.push(critic(&obs, &action)?);

        let mut g = 0.0;
        let mut discount = 1.0;
        let mut a = action;
        for k in 0..settings.truncation_horizon {
            let res = env.step(&a, rng)?;
            g += discount * res.reward;
            discount *= settings.gamma;
            if res.done || k + 1 == settings.truncation_horizon {
                break;
            }
            a = policy(&res.next_state, rng)?;
        }
        returns.push(g);
    }
    let normalizer = (returns.iter().sum::<f64>() / returns.len() as f64).abs();
    if normalizer < MIN_NORMALIZER {
        return Err(Error::DegenerateNormalizer(normalizer));
    }
    let biases: Vec<f64> = estimates
        .iter()
        .zip(&returns)
        .map(|(q, g)| (q - g) / normalizer)
        .collect();
    let (mean, std) = mean_std(&biases);
    if !(mean.is_finite() && std.is_finite()) {
        return Err(Error::invalid("non-finite bias estimate"));
    }
    Ok(BiasReport {
        step: 0,
        mean_normalized_bias: mean,
        std_normalized_bias: std,
        n_samples: biases.len(),
    })
}
