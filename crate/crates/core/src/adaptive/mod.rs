//! Adaptive estimation: RAKE-based group formation, RLS channel estimation
//! and the recursive alternating least squares (RALS) receiver.

pub mod channel;
pub mod power;
pub mod rake;
pub mod rals;
pub mod rls;

pub use channel::{rls_channel_update, LsChannelEstimator, RlsChannelEstimator};
pub use power::{rals_power_update, RlsPowerAllocator};
pub use rake::{rake_group_select, rake_statistic, RakeAccumulator, RakeStatistic};
pub use rals::{ChannelEstimation, ChannelStart, PowerSnapshot, RalsOptions, RalsReceiver, RalsSnapshot, Reference, RelayReference, StepOutput};
pub use rls::{rls_filter_update, rls_gain_and_inverse_update, InverseCovariance, RlsDetector, DEFAULT_INIT};
