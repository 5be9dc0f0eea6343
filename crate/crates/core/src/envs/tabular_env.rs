use rand::Rng;

use super::mdp::{step_discrete, StepResult, TabularMdp};
use super::Episodic;
use crate::error::{Error, Result};

/// A finite MDP run episodically from a fixed start state.
///
/// `horizon = None` gives a continuing task that never truncates.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    pub mdp: TabularMdp,
    pub start_state: usize,
    pub horizon: Option<usize>,
    state: usize,
    t: usize,
}

impl TabularEnv {
    pub fn new(mdp: TabularMdp, start_state: usize, horizon: Option<usize>) -> Result<Self> {
        if start_state >= mdp.n_states() {
            return Err(Error::IndexOutOfRange {
                what: "start state",
                index: start_state,
                size: mdp.n_states(),
            });
        }
        if horizon == Some(0) {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        Ok(TabularEnv {
            mdp,
            start_state,
            horizon,
            state: start_state,
            t: 0,
        })
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn reset_state(&mut self) -> usize {
        self.state = self.start_state;
        self.t = 0;
        self.state
    }

    pub fn step_action<R: Rng + ?Sized>(&mut self, action: usize, rng: &mut R) -> Result<StepResult<usize>> {
        let mut res = step_discrete(&self.mdp, self.state, action, rng)?;
        self.state = res.next_state;
        self.t += 1;
        res.truncated = !res.done && self.horizon.is_some_and(|h| self.t >= h);
        Ok(res)
    }
}

impl Episodic for TabularEnv {
    type Obs = usize;
    type Action = usize;

    fn reset<R: Rng + ?Sized>(&mut self, _rng: &mut R) -> usize {
        self.reset_state()
    }

    fn step<R: Rng + ?Sized>(&mut self, action: &usize, rng: &mut R) -> Result<StepResult<usize>> {
        self.step_action(*action, rng)
    }
}
