//! Monte-Carlo experiments comparing non-cooperative, cooperative and
//! jointly power-allocated cooperative DS-CDMA receivers.

pub mod checks;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod packet;
pub mod scheme;
pub mod spec;
pub mod stats;

pub use error::{HarnessError, Result};
pub use experiment::{ordering_summary, packet_seed, run_experiment, run_packets, run_point, ResultRecord};
pub use packet::{run_packet, PacketOutcome, SimSettings, Tally};
pub use scheme::{ReceiverKind, Scheme, Variant};
pub use spec::{Axis, ExperimentSpec, NetworkSection, Sweep};
pub use stats::wilson;
