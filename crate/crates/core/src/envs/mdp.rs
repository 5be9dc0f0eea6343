use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};
use crate::tabular::QTable;

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<S> {
    pub next_state: S,
    pub reward: f64,
    /// The successor is terminal.
    pub done: bool,
    /// The episode hit its step cap; the successor is not terminal.
    pub truncated: bool,
}

/// Finite MDP with dense transition tensor `[state][action][next_state]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    gamma: f64,
    r_max: f64,
    terminal: Vec<bool>,
}

const ROW_SUM_TOL: f64 = 1e-12;

impl TabularMdp {
    /// Builds and validates an MDP.
    ///
    /// Terminal states are forced to self-loop with reward 0.
    pub fn new(
        transition: Vec<Vec<Vec<f64>>>,
        reward: Vec<Vec<f64>>,
        gamma: f64,
        r_max: f64,
        terminal: Vec<bool>,
    ) -> Result<Self> {
        let n_states = transition.len();
        if n_states == 0 {
            return Err(Error::invalid("MDP needs at least one state"));
        }
        let n_actions = transition[0].len();
        if n_actions == 0 {
            return Err(Error::invalid("MDP needs at least one action"));
        }
        if reward.len() != n_states || terminal.len() != n_states {
            return Err(Error::shape(
                n_states,
                format!("{} rewards / {} terminal flags", reward.len(), terminal.len()),
            ));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }

        let mut flat_p = Vec::with_capacity(n_states * n_actions * n_states);
        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for (s, (rows, rewards)) in transition.into_iter().zip(reward).enumerate() {
            if rows.len() != n_actions || rewards.len() != n_actions {
                return Err(Error::shape(
                    n_actions,
                    format!("state {s}: {} rows, {} rewards", rows.len(), rewards.len()),
                ));
            }
            for (a, (row, r)) in rows.into_iter().zip(rewards).enumerate() {
                if terminal[s] {
                    flat_p.extend((0..n_states).map(|j| if j == s { 1.0 } else { 0.0 }));
                    flat_r.push(0.0);
                    continue;
                }
                if row.len() != n_states {
                    return Err(Error::shape(n_states, format!("row ({s},{a}) of length {}", row.len())));
                }
                if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                    return Err(Error::invalid(format!(
                        "row ({s},{a}) has a negative or non-finite entry"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::invalid(format!("row ({s},{a}) sums to {sum}")));
                }
                if !r.is_finite() || r.abs() > r_max {
                    return Err(Error::invalid(format!("reward ({s},{a}) = {r} exceeds r_max {r_max}")));
                }
                flat_p.extend(row);
                flat_r.push(r);
            }
        }

        Ok(TabularMdp {
            n_states,
            n_actions,
            transition: flat_p,
            reward: flat_r,
            gamma,
            r_max,
            terminal,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1), got {gamma}")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    /// Transition row `P(. | s, a)`.
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.transition[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    fn check(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                size: self.n_states,
            });
        }
        if a >= self.n_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                size: self.n_actions,
            });
        }
        Ok(())
    }
}

/// Random MDP with normalized positive random transition rows and rewards
/// uniform in `[-r_max, r_max]`.
///
/// With `nonreturnable`, every transition leaves its origin state
/// (`P(s | s, a) = 0`).
pub fn random_mdp(
    seed: u64,
    n_states: usize,
    n_actions: usize,
    r_max: f64,
    gamma: f64,
    nonreturnable: bool,
) -> Result<TabularMdp> {
    if n_states == 0 || n_actions == 0 {
        return Err(Error::invalid("random MDP needs at least one state and one action"));
    }
    if nonreturnable && n_states < 2 {
        return Err(Error::invalid("a nonreturnable MDP needs at least two states"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
    }
    let mut rng = stream_rng(seed, Stream::Generate);
    let mut transition = Vec::with_capacity(n_states);
    let mut reward = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let mut rows = Vec::with_capacity(n_actions);
        let mut rewards = Vec::with_capacity(n_actions);
        for _ in 0..n_actions {
            // Open interval keeps every entry strictly positive.
            let mut row: Vec<f64> = (0..n_states).map(|_| rng.gen_range(f64::EPSILON..1.0)).collect();
            if nonreturnable {
                row[s] = 0.0;
            }
            normalize_row(&mut row);
            rows.push(row);
            rewards.push(rng.gen_range(-r_max..=r_max));
        }
        transition.push(rows);
        reward.push(rewards);
    }
    TabularMdp::new(transition, reward, gamma, r_max, vec![false; n_states])
}

/// Scales a nonnegative row to sum to one, pushing the residual rounding
/// error into the largest entry.
fn normalize_row(row: &mut [f64]) {
    let total: f64 = row.iter().sum();
    for p in row.iter_mut() {
        *p /= total;
    }
    let residual = 1.0 - row.iter().sum::<f64>();
    let largest = crate::tabular::argmax_lowest(row);
    row[largest] += residual;
}

/// Samples a successor from `P(. | state, action)`.
pub fn step_discrete<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    state: usize,
    action: usize,
    rng: &mut R,
) -> Result<StepResult<usize>> {
    mdp.check(state, action)?;
    if mdp.is_terminal(state) {
        return Ok(StepResult {
            next_state: state,
            reward: 0.0,
            done: true,
            truncated: false,
        });
    }
    let row = mdp.transition_row(state, action);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut next = None;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            next = Some(j);
            if u < acc {
                break;
            }
        }
    }
    // Rows always hold a positive entry, so `next` is set; falling off the
    // end through rounding lands on the last supported successor.
    let next_state = next.expect("transition row has positive mass");
    Ok(StepResult {
        next_state,
        reward: mdp.reward(state, action),
        done: mdp.is_terminal(next_state),
        truncated: false,
    })
}

/// Expected one-step backup `r(s,a) + gamma * sum_j P(j|s,a) max_b Q[j,b]`.
pub fn bellman_backup(mdp: &TabularMdp, q: &QTable, s: usize, a: usize) -> f64 {
    let row = mdp.transition_row(s, a);
    let future: f64 = row
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(j, &p)| p * q.max_value(j))
        .sum();
    mdp.reward(s, a) + mdp.gamma() * future
}

/// Value iteration on Q.
///
/// Stops when the sup-norm change between successive iterates drops below
/// `tol`. The returned table then satisfies `||Q - TQ||_inf <= gamma * tol`
/// and `||Q - Q*||_inf <= gamma * tol / (1 - gamma)`.
pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<QTable> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut q = QTable::zeros(ns, na);
    loop {
        let mut next = QTable::zeros(ns, na);
        let mut delta = 0.0f64;
        for s in 0..ns {
            for a in 0..na {
                let v = bellman_backup(mdp, &q, s, a);
                delta = delta.max((v - q.get(s, a)).abs());
                next.set(s, a, v);
            }
        }
        q = next;
        if delta < tol {
            return Ok(q);
        }
    }
}

/// `||Q - TQ||_inf` under the expected Bellman optimality operator.
pub fn bellman_residual(mdp: &TabularMdp, q: &QTable) -> f64 {
    let mut worst = 0.0f64;
    for s in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            worst = worst.max((bellman_backup(mdp, q, s, a) - q.get(s, a)).abs());
        }
    }
    worst
}

/// Exact `Q^pi` of a deterministic policy, by iterating the policy
/// evaluation operator to within `tol`.
pub fn evaluate_policy(mdp: &TabularMdp, policy: &[usize], tol: f64) -> Result<QTable> {
    if policy.len() != mdp.n_states() {
        return Err(Error::shape(mdp.n_states(), policy.len()));
    }
    if let Some((s, &a)) = policy.iter().enumerate().find(|(_, &a)| a >= mdp.n_actions()) {
        return Err(Error::invalid(format!("policy picks action {a} in state {s}")));
    }
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut q = QTable::zeros(ns, na);
    loop {
        let mut next = QTable::zeros(ns, na);
        let mut delta = 0.0f64;
        for s in 0..ns {
            for a in 0..na {
                let future: f64 = mdp
                    .transition_row(s, a)
                    .iter()
                    .enumerate()
                    .map(|(j, &p)| p * q.get(j, policy[j]))
                    .sum();
                let v = mdp.reward(s, a) + mdp.gamma() * future;
                delta = delta.max((v - q.get(s, a)).abs());
                next.set(s, a, v);
            }
        }
        q = next;
        if delta < tol {
            return Ok(q);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::SmrRng;
    use rand::SeedableRng;

    fn single_state_two_actions() -> TabularMdp {
        TabularMdp::new(
            vec![vec![vec![1.0], vec![1.0]]],
            vec![vec![0.0, 1.0]],
            0.5,
            1.0,
            vec![false],
        )
        .unwrap()
    }

    #[test]
    fn value_iteration_single_state_fixed_point() {
        // V* = 1 + 0.5 V*  =>  V* = 2, Q* = (0 + 0.5*2, 1 + 0.5*2).
        let q = value_iteration(&single_state_two_actions(), 1e-13).unwrap();
        assert!((q.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((q.get(0, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn value_iteration_zero_rewards_is_zero() {
        let mdp = random_mdp(4, 5, 3, 1.0, 0.9, false).unwrap();
        let zeroed = TabularMdp {
            reward: vec![0.0; 15],
            ..mdp
        };
        let q = value_iteration(&zeroed, 1e-10).unwrap();
        assert!(q.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn value_iteration_respects_bounds_and_residual() {
        for seed in 0..10 {
            let mdp = random_mdp(seed, 6, 3, 2.0, 0.9, seed % 2 == 0).unwrap();
            let tol = 1e-9;
            let q = value_iteration(&mdp, tol).unwrap();
            assert!(q.max_abs() <= mdp.r_max() / (1.0 - mdp.gamma()));
            assert!(bellman_residual(&mdp, &q) <= tol);
        }
    }

    #[test]
    fn random_mdp_rows_are_stochastic() {
        let mdp = random_mdp(11, 7, 4, 1.0, 0.9, false).unwrap();
        for s in 0..7 {
            for a in 0..4 {
                let sum: f64 = mdp.transition_row(s, a).iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert!(mdp.reward(s, a).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn nonreturnable_has_zero_diagonal() {
        let mdp = random_mdp(2, 5, 3, 1.0, 0.9, true).unwrap();
        for s in 0..5 {
            for a in 0..3 {
                assert_eq!(mdp.transition_row(s, a)[s], 0.0);
            }
        }
        assert!(random_mdp(2, 1, 3, 1.0, 0.9, true).is_err());
    }

    #[test]
    fn random_mdp_is_deterministic_in_seed() {
        let a = random_mdp(99, 4, 2, 1.0, 0.95, false).unwrap();
        let b = random_mdp(99, 4, 2, 1.0, 0.95, false).unwrap();
        assert_eq!(a, b);
        assert!(a
            .transition
            .iter()
            .zip(&b.transition)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, random_mdp(100, 4, 2, 1.0, 0.95, false).unwrap());
    }

    #[test]
    fn deterministic_row_always_hits_its_successor() {
        let mdp = TabularMdp::new(
            vec![
                vec![vec![0.0, 1.0, 0.0]],
                vec![vec![0.0, 0.0, 1.0]],
                vec![vec![1.0, 0.0, 0.0]],
            ],
            vec![vec![0.5], vec![0.0], vec![-0.5]],
            0.9,
            1.0,
            vec![false, false, false],
        )
        .unwrap();
        let mut rng = SmrRng::seed_from_u64(0);
        for _ in 0..100 {
            let r = step_discrete(&mdp, 0, 0, &mut rng).unwrap();
            assert_eq!(r.next_state, 1);
            assert_eq!(r.reward, 0.5);
        }
    }

    #[test]
    fn terminal_state_self_loops() {
        let mdp = TabularMdp::new(
            vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
            vec![vec![1.0], vec![1.0]],
            0.9,
            1.0,
            vec![false, true],
        )
        .unwrap();
        assert_eq!(mdp.transition_row(1, 0), &[0.0, 1.0]);
        let mut rng = SmrRng::seed_from_u64(0);
        let r = step_discrete(&mdp, 1, 0, &mut rng).unwrap();
        assert_eq!((r.next_state, r.reward, r.done), (1, 0.0, true));
        let r = step_discrete(&mdp, 0, 0, &mut rng).unwrap();
        assert!(r.done);
    }

    #[test]
    fn empirical_successors_match_row() {
        let mdp = random_mdp(5, 6, 2, 1.0, 0.9, false).unwrap();
        let mut rng = SmrRng::seed_from_u64(123);
        let n = 100_000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            counts[step_discrete(&mdp, 3, 1, &mut rng).unwrap().next_state] += 1;
        }
        for (j, &p) in mdp.transition_row(3, 1).iter().enumerate() {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((counts[j] as f64 - n as f64 * p).abs() <= 3.0 * sigma, "successor {j}");
        }
    }

    #[test]
    fn step_rejects_out_of_range() {
        let mdp = single_state_two_actions();
        let mut rng = SmrRng::seed_from_u64(0);
        assert!(step_discrete(&mdp, 1, 0, &mut rng).is_err());
        assert!(step_discrete(&mdp, 0, 2, &mut rng).is_err());
    }

    #[test]
    fn constructor_rejects_bad_rows_and_rewards() {
        let bad_sum = TabularMdp::new(
            vec![vec![vec![0.5, 0.4]], vec![vec![0.0, 1.0]]],
            vec![vec![0.0], vec![0.0]],
            0.9,
            1.0,
            vec![false; 2],
        );
        assert!(bad_sum.is_err());
        let bad_reward = TabularMdp::new(vec![vec![vec![1.0]]], vec![vec![2.0]], 0.9, 1.0, vec![false]);
        assert!(bad_reward.is_err());
        let bad_gamma = TabularMdp::new(vec![vec![vec![1.0]]], vec![vec![0.0]], 1.0, 1.0, vec![false]);
        assert!(bad_gamma.is_err());
    }

    #[test]
    fn policy_evaluation_matches_closed_form() {
        // Always picking action 1: Q(0,1) = 1/(1-0.5) = 2, Q(0,0) = 0 + 0.5*2.
        let q = evaluate_policy(&single_state_two_actions(), &[1], 1e-13).unwrap();
        assert!((q.get(0, 1) - 2.0).abs() < 1e-12);
        assert!((q.get(0, 0) - 1.0).abs() < 1e-12);
    }
}
