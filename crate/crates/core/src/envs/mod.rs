//! Environments: finite MDPs, gridworlds and a toy continuous-control task.

mod grid;
mod mdp;
mod pointmass;
mod tabular_env;

pub use grid::{
    cliff_walking_env, random_maze_env, random_maze_env_with_horizon, Cell, GridWorldSpec, Move, WallEdge,
    CLIFF_HORIZON, DEFAULT_GAMMA, MAZE_HORIZON,
};
pub use mdp::{
    bellman_backup, bellman_residual, evaluate_policy, random_mdp, step_discrete, value_iteration, StepResult,
    TabularMdp,
};
pub use pointmass::{
    PointMassEnv, POINT_MASS_ACTION_BOUND, POINT_MASS_DT, POINT_MASS_GOAL, POINT_MASS_HORIZON,
    POINT_MASS_POSITION_BOUND, POINT_MASS_VELOCITY_BOUND,
};
pub use tabular_env::TabularEnv;

use rand::Rng;

use crate::error::Result;

/// An environment that can be reset and stepped episode by episode.
pub trait Episodic {
    type Obs: Clone;
    type Action: Clone;

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Self::Obs;

    fn step<R: Rng + ?Sized>(&mut self, action: &Self::Action, rng: &mut R) -> Result<StepResult<Self::Obs>>;
}
