//! Dense networks, replay and a TD3-lite actor-critic with the SMR loop.

mod agent;
mod buffer;
mod net;
mod optim;
mod separation;
mod train;

pub use agent::{
    actor_gradient, bootstrap_targets, critic_loss, critic_regression, sample_target_noise, smr_train_step,
    ActorCriticParams, CriticLoss, InnerRecord, SmrTrainConfig, StepDiagnostics, Td3Agent,
};
pub use buffer::{ReplayBuffer, Transition};
pub use net::{Activation, DenseNet, ForwardCache, Gradients, Layer};
pub use optim::{Adam, Optimizer, OptimizerKind};
pub use separation::{mean_output_grad, smr_vs_scaled_lr, Separation};
pub use train::{evaluate_actor, train_td3_smr, train_td3_smr_with_eval_hook, Td3EvalHook, Td3Run, Td3RunConfig};
