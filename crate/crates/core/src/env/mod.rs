//! Goal-conditioned RL environment: observation construction with sensor
//! noise, the reward terms, episode lifecycle, task modes, and success
//! evaluation.

mod episode;
mod observation;
mod rewards;
mod trace;

pub use episode::{
    check_success, CrashKind, Env, EnvConfig, EnvError, StepInfo, TaskMode, SUCCESS_RADIUS,
};
pub use observation::{
    compute_observation, position_command, Command, CommandBlock, NoiseScales, ObsConfig,
    ObsScales,
};
pub use rewards::{
    exploration_bias, penalties, stall_penalty, task_reward_continuous, task_reward_final,
    tracking_reward_velocity, RewardTerms, RewardWeights, BIAS_DIST_GUARD, BIAS_SPEED_GUARD,
    STALL_DISTANCE, STALL_SPEED, TRACKING_SIGMA,
};
pub use trace::{RewardTraceWriter, TRACE_HEADER};
