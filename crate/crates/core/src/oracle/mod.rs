//! Full-statistics designs: constrained MMSE receive filters, group-based
//! power allocation, MMSE channel estimation and the alternating solution of
//! the coupled filter/allocation problem.

pub mod alternate;
pub mod channel_est;
pub mod power;
pub mod receiver;
pub mod stats;

pub use alternate::{alternate_oracle, AlternatingOutcome, AlternatingProblem};
pub use channel_est::{channel_estimate_mmse, channel_model_matrix, ChannelEstimatorStats};
pub use power::{
    combine_member_blocks, estimate_group_stats, group_input, power_allocation_lagrangian, power_allocation_mmse, BudgetScaling, GroupAllocation, GroupPowerStats, GroupSelection,
    DEFAULT_LAMBDA,
};
pub use receiver::{mmse_receive_filter, mse, ReceiverDesign};
pub use stats::{isi_covariance, received_covariance, SymbolCorrelation, UserSignal};
