pub mod adversary;
pub mod analysis;
pub mod arrivals;
pub mod blocktree;
pub mod cli;
pub mod error;
pub mod rng;
