//! Physical layer: spreading, multipath, QPSK, chip-level synthesis of every
//! hop and decode-and-forward regeneration at the relays.

pub mod channel;
pub mod codes;
pub mod power;
pub mod qpsk;
pub mod relay;
pub mod signature;
pub mod synth;

pub use channel::{generate_channels, ChannelState, Link};
pub use codes::{parse_codes, random_codes, SpreadingCode};
pub use power::PowerAllocation;
pub use qpsk::{qpsk_modulate, qpsk_slice};
pub use relay::{relay_decode, RelayInput, RelayReceiverKind};
pub use signature::{build_signature_matrix, effective_signature, EffectiveSignature, SignatureMatrix};
pub use synth::{stack_received, synthesize_phase, Phase, PhaseStream, SymbolFrame};
