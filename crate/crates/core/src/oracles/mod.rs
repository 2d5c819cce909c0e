//! Query-counted oracles and the tapped quantum channel.

mod channel;
mod classical;
mod policy;
mod qmeasex;
mod qsq;
mod sq;
mod transcript;

pub use channel::{quantum_query, ChannelKind, QuantumChannelOracle, RegisterMap, TapChannel};
pub use classical::{ex_sample, mem_query, ExOracle, MemOracle};
pub use policy::{AnswerPolicy, AuditEntry};
pub use qmeasex::{qmeasex_query, MeasurementSpec, QMeasExOracle, QMeasOutcome, QState};
pub use qsq::{qsq_query, Observable, QsqOracle, QsqSource, EXPLICIT_QUBIT_CAP};
pub use sq::{sq_query, SqOracle, SqQuery};
pub use transcript::{adversary_view, digest, Counters, Direction, OracleKind, Transcript, TranscriptEvent, Visibility};

