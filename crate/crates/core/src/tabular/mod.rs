//! Tabular Q-learning and Q-SMR.

mod policy;
mod qtable;
mod schedule;
mod train;
mod update;

pub use policy::epsilon_greedy;
pub use qtable::{argmax_lowest, sup_error, QTable};
pub use schedule::LearningRateSchedule;
pub(crate) use train::mean_std;
pub use train::{
    evaluate_greedy, steps_to_threshold, train_q_smr, train_q_smr_with_hooks, Budget, EvalHook, EvalPoint, SmrConfig,
    StepHook, TabularRun, TrainHooks,
};
pub use update::{
    effective_rate, empirical_target, q_smr_expansion, q_smr_loop_update, q_smr_nonreturnable_update, q_update,
    SmrTrace, TabularTransition,
};
