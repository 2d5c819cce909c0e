//! Adversary strategies, their taps, and exact views of what they learn.

mod strategy;
mod swap;
mod tap;
mod view;

pub use strategy::{
    AdversarySpec, AdversaryStrategy, ChannelSpec, Directionality, MemoryPolicy, NamedState, PreMeasurement, StrategyKind,
};
pub use swap::swap_attack_run;
pub use tap::{apply_tap, round_trip_mixed, AdversaryMemory, TapDirection, TapRecord};
pub use view::{adversary_view_state, parity_prior, response_register_state, retained_view, CqState, QueryProtocol};
