//! Masked and uniform discrete diffusion over small vocabularies: noise
//! schedules, corruption kernels, the reverse step and Monte Carlo estimates
//! of the training losses.

mod corrupt;
mod curriculum;
mod kernel;
mod loss;
mod predictor;
mod reverse;
mod schedule;

pub use corrupt::{forward_corrupt, CorruptedBatch, NoiseLevel};
pub use curriculum::CurriculumSampler;
pub use kernel::{rate_matrix, rate_matrix_entry, Kernel};
pub use loss::{
    elbo_loss, maskgit_loss, uniform_kernel_loss, CleanAveraging, LossEstimate, McOptions, TimeSampling,
    UniformKernelLoss, LOG_FLOOR, T_EPSILON,
};
pub use predictor::{
    CopyPredictor, ExactPosterior, NgramPredictor, NoiseContext, Predictor, Source, UniformPredictor,
};
pub use reverse::{reverse_transition, PositionState, ReverseDistribution};
pub use schedule::{Schedule, Tabulated};
