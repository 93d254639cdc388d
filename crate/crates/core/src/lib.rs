//! Synthesis and evaluation of listening schedules for passive
//! multi-channel neighbor discovery.
//!
//! A discoverer with a single transceiver wants to overhear periodic
//! beacons of neighbors that each sit on one channel and transmit with
//! one beacon period (BP) out of a known set. The crate provides:
//!
//! - domain types and the ideal-model metric suite ([`model`], [`metrics`]),
//! - BP-set family classification and randomized samplers ([`families`]),
//! - low-complexity schedule constructors: the GREEDY family, CHAN TRAIN,
//!   OPT_B2 for two-element BP sets, and the IEEE 802.15.4 passive scan
//!   ([`schedulers`]),
//! - an exact branch-and-bound solver for mean-discovery-time-optimal
//!   schedules plus an exhaustive cross-validation oracle ([`mdtopt`]),
//! - a sub-slot simulator with beacon collisions and channel-switch deaf
//!   periods ([`sim`]).

pub mod families;
pub mod mdtopt;
pub mod metrics;
pub mod model;
pub mod schedulers;
pub mod sim;

/// Exact probability / MDT arithmetic. All probabilities in this crate are
/// rationals by construction.
pub type Rational = num_rational::Ratio<u128>;
