//! Estimators and checkers built on top of arrival traces and block trees.

mod attack;
mod classify;
mod counterexample;
mod decay;
mod interval;
pub mod montecarlo;
mod nakamoto;
mod persistence;
mod rate;
pub mod stats;
mod walk;

pub use attack::{estimate_attack_success, nondecreasing_within_ci, phase_diagram, AttackStats, PhasePoint};
pub use classify::{classify_block, longest_overtake, overtake_sup, SecurityClass};
pub use counterexample::{
    dependence_stats, race_sequence, race_sequence_from_trace, run_counterexample, CounterexampleStats,
};
pub use decay::{estimate_no_nakamoto_decay, estimate_overtake_decay, fit_decay, DecayFit, DecayOptions};
pub use interval::{
    check_interval, first_nakamoto_window, nakamoto_block, scan_windows, IntervalVerdict, NakamotoIntervalQuery,
    TrialData, WindowTiling,
};
pub use nakamoto::{
    estimate_nakamoto_probability, estimate_nakamoto_probability_at, full_tiling, run_persistence_check,
    NakamotoEstimate, PersistenceReport,
};
pub use persistence::{persists_from, verify_persistence};
pub use rate::{estimate_from_renewals, estimate_lambda_h, pilot_lambda_h, single_type_lambda_h, RateSummary};
pub use stats::{LinearFit, Proportion};
pub use walk::{
    default_segment_length, estimate_adversary_stay_below_probability, estimate_stay_above_probability, stays_positive,
    WalkEstimate,
};
