//! Actor and critic networks: MLPs with analytic backpropagation, a
//! diagonal-Gaussian action head, finite-difference gradient verification,
//! and the Adam optimizer.

mod grad_check;
mod matrix;
mod mlp;
mod opt;
mod policy;

pub use grad_check::{grad_check, GradCheckReport, FD_STEP};
pub use matrix::Mat;
pub use mlp::{gaussian, ForwardCache, Linear, LinearGrad, Mlp, MlpGrads, NetError};
pub use opt::Adam;
pub use policy::{gaussian_kl, GaussianPolicy, LOG_STD_MAX, LOG_STD_MIN};
