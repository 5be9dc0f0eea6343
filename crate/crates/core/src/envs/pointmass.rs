use super::mdp::StepResult;
use super::Episodic;
use crate::error::{Error, Result};

pub const POINT_MASS_DT: f64 = 0.05;
pub const POINT_MASS_ACTION_BOUND: f64 = 1.0;
pub const POINT_MASS_POSITION_BOUND: f64 = 5.0;
pub const POINT_MASS_VELOCITY_BOUND: f64 = 2.0;
pub const POINT_MASS_HORIZON: usize = 200;
pub const POINT_MASS_GOAL: [f64; 2] = [2.0, 2.0];
const ACTION_COST: f64 = 0.01;

/// Double integrator on the plane: the action is an acceleration.
///
/// Observation is `[x, y, vx, vy]`; reward is the negative distance to the
/// goal minus a small quadratic action cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMassEnv {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub goal: [f64; 2],
    pub dt: f64,
    pub action_bound: f64,
    pub position_bound: f64,
    pub velocity_bound: f64,
    pub horizon: usize,
    pub t: usize,
}

impl Default for PointMassEnv {
    fn default() -> Self {
        PointMassEnv {
            position: [0.0; 2],
            velocity: [0.0; 2],
            goal: POINT_MASS_GOAL,
            dt: POINT_MASS_DT,
            action_bound: POINT_MASS_ACTION_BOUND,
            position_bound: POINT_MASS_POSITION_BOUND,
            velocity_bound: POINT_MASS_VELOCITY_BOUND,
            horizon: POINT_MASS_HORIZON,
            t: 0,
        }
    }
}

impl PointMassEnv {
    pub const OBS_DIM: usize = 4;
    pub const ACTION_DIM: usize = 2;

    /// Back to rest at the origin.
    pub fn reset(&mut self) -> Vec<f64> {
        self.position = [0.0; 2];
        self.velocity = [0.0; 2];
        self.t = 0;
        self.observation()
    }

    pub fn observation(&self) -> Vec<f64> {
        vec![self.position[0], self.position[1], self.velocity[0], self.velocity[1]]
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult<Vec<f64>>> {
        if action.len() != Self::ACTION_DIM {
            return Err(Error::shape(Self::ACTION_DIM, action.len()));
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("non-finite action {action:?}")));
        }
        let mut cost = 0.0;
        for (i, &a) in action.iter().enumerate() {
            let a = a.clamp(-self.action_bound, self.action_bound);
            cost += a * a;
            self.velocity[i] = (self.velocity[i] + a * self.dt).clamp(-self.velocity_bound, self.velocity_bound);
            self.position[i] =
                (self.position[i] + self.velocity[i] * self.dt).clamp(-self.position_bound, self.position_bound);
        }
        self.t += 1;
        let dx = self.position[0] - self.goal[0];
        let dy = self.position[1] - self.goal[1];
        Ok(StepResult {
            next_state: self.observation(),
            reward: -(dx * dx + dy * dy).sqrt() - ACTION_COST * cost,
            done: false,
            truncated: self.t >= self.horizon,
        })
    }
}

impl Episodic for PointMassEnv {
    type Obs = Vec<f64>;
    type Action = Vec<f64>;

    fn reset<R: rand::Rng + ?Sized>(&mut self, _rng: &mut R) -> Vec<f64> {
        PointMassEnv::reset(self)
    }

    fn step<R: rand::Rng + ?Sized>(&mut self, action: &Vec<f64>, _rng: &mut R) -> Result<StepResult<Vec<f64>>> {
        PointMassEnv::step(self, action)
    }
}
