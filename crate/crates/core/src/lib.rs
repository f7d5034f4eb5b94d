//! Separability analysis for parallel single-hop Gaussian networks.
//!
//! * [`network`]: topologies, channel instances and sub-networks.
//! * [`classifier`]: MAC-Z-BC recognition and forbidden sub-network witnesses.
//! * [`capacity`]: sum capacity and optimal power allocation for MAC-Z-BC channels.
//! * [`alignment`]: beamforming schemes, alignment checks, zero-forcing rates and
//!   degrees-of-freedom fits for the X, Σ and reverse-Σ channels.
//! * [`cli`]: file formats, reports and the `sepnet` command line.

pub mod alignment;
pub mod capacity;
pub mod classifier;
pub mod cli;
pub mod fixtures;
pub mod network;

pub use classifier::{classify, ForbiddenKind, Verdict};
pub use network::{ChannelInstance, Link, MessageId, NetworkTopology, Node};
