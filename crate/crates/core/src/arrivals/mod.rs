//! Typed Poisson arrival processes for honest miners and the adversary.

mod puncture;
mod text;

pub use puncture::{puncture_trace, PuncturedTrace};
pub use text::{read_trace, write_trace};

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::{derive_seed, rng_from, stream};

pub type TypeId = u16;

/// Miner index carried by adversary arrivals.
pub const ADVERSARY_MINER: u32 = u32::MAX;

/// Default number of honest miners the honest rate is split across.
pub const DEFAULT_MINERS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Honest,
    Adversary,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Honest => "honest",
            Origin::Adversary => "adversary",
        }
    }
}

impl std::str::FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "honest" | "H" | "h" => Ok(Origin::Honest),
            "adversary" | "A" | "a" => Ok(Origin::Adversary),
            other => Err(format!("unknown origin `{other}`")),
        }
    }
}

/// One block type: its score and the honest/adversary block rates (blocks/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockTypeSpec {
    #[serde(default)]
    pub type_id: TypeId,
    pub score: f64,
    #[serde(default)]
    pub honest_rate: f64,
    #[serde(default)]
    pub adversary_rate: f64,
}

impl BlockTypeSpec {
    pub fn new(type_id: TypeId, score: f64, honest_rate: f64, adversary_rate: f64) -> Result<Self> {
        let spec = BlockTypeSpec {
            type_id,
            score,
            honest_rate,
            adversary_rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-type spec with unit score, the classic Bitcoin setting.
    pub fn unit(honest_rate: f64, adversary_rate: f64) -> Self {
        BlockTypeSpec {
            type_id: 0,
            score: 1.0,
            honest_rate,
            adversary_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.score.is_finite() && self.score > 0.0) {
            return Err(SimError::param("score", format!("must be finite and > 0, got {}", self.score)));
        }
        if !(self.honest_rate.is_finite() && self.honest_rate >= 0.0) {
            return Err(SimError::param(
                "honest_rate",
                format!("must be finite and >= 0, got {}", self.honest_rate),
            ));
        }
        if !(self.adversary_rate.is_finite() && self.adversary_rate >= 0.0) {
            return Err(SimError::param(
                "adversary_rate",
                format!("must be finite and >= 0, got {}", self.adversary_rate),
            ));
        }
        Ok(())
    }
}

/// Validates a whole type table: nonempty, unique ids, and at least one positive rate.
pub fn validate_specs(specs: &[BlockTypeSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(SimError::param("block_types", "at least one block type is required"));
    }
    for spec in specs {
        spec.validate()?;
    }
    let mut ids: Vec<TypeId> = specs.iter().map(|s| s.type_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(SimError::param("type_id", "block type ids must be unique"));
    }
    if specs.iter().all(|s| s.honest_rate == 0.0 && s.adversary_rate == 0.0) {
        return Err(SimError::param("block_types", "at least one rate must be positive"));
    }
    Ok(())
}

/// Score lookup indexed by type id.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(specs: &[BlockTypeSpec]) -> Self {
        let len = specs.iter().map(|s| s.type_id as usize + 1).max().unwrap_or(0);
        let mut scores = vec![f64::NAN; len];
        for s in specs {
            scores[s.type_id as usize] = s.score;
        }
        ScoreTable { scores }
    }

    /// Every type id scores 1.
    pub fn unit(n_types: usize) -> Self {
        ScoreTable {
            scores: vec![1.0; n_types.max(1)],
        }
    }

    #[inline]
    pub fn score(&self, type_id: TypeId) -> f64 {
        self.scores.get(type_id as usize).copied().unwrap_or(f64::NAN)
    }

    pub fn covers(&self, trace: &ArrivalTrace) -> bool {
        trace.arrivals().iter().all(|a| self.score(a.type_id).is_finite())
    }
}

/// Total honest score rate with no delays, `Σ c_i h_i`.
pub fn honest_score_rate(specs: &[BlockTypeSpec]) -> f64 {
    specs.iter().map(|s| s.score * s.honest_rate).sum()
}

/// Adversary score rate `λ_a = Σ c_i b_i`.
pub fn adversary_score_rate(specs: &[BlockTypeSpec]) -> f64 {
    specs.iter().map(|s| s.score * s.adversary_rate).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: f64,
    pub type_id: TypeId,
    pub origin: Origin,
    pub miner_id: u32,
}

impl Arrival {
    fn order_key(&self) -> (Origin, TypeId, u32) {
        (self.origin, self.type_id, self.miner_id)
    }
}

/// Time-sorted arrivals on `[0, horizon]` with strictly increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalTrace {
    arrivals: Vec<Arrival>,
    horizon: f64,
    seed: u64,
}

impl ArrivalTrace {
    /// Builds a trace from arbitrary arrivals: sorts them, breaks exact ties by
    /// `(origin, type_id, miner_id)` and nudges the later one up by one ulp.
    pub fn from_arrivals(mut arrivals: Vec<Arrival>, horizon: f64, seed: u64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SimError::param("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        if let Some(bad) = arrivals.iter().find(|a| !(a.time.is_finite() && a.time >= 0.0)) {
            return Err(SimError::param("time", format!("arrival time must be finite and >= 0, got {}", bad.time)));
        }
        arrivals.sort_by(|a, b| a.time.total_cmp(&b.time).then_with(|| a.order_key().cmp(&b.order_key())));
        for i in 1..arrivals.len() {
            if arrivals[i].time <= arrivals[i - 1].time {
                arrivals[i].time = arrivals[i - 1].time.next_up();
            }
        }
        arrivals.retain(|a| a.time <= horizon);
        Ok(ArrivalTrace {
            arrivals,
            horizon,
            seed,
        })
    }

    pub fn empty(horizon: f64, seed: u64) -> Result<Self> {
        Self::from_arrivals(Vec::new(), horizon, seed)
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn times(&self) -> Vec<f64> {
        self.arrivals.iter().map(|a| a.time).collect()
    }

    pub fn scores(&self, table: &ScoreTable) -> Vec<f64> {
        self.arrivals.iter().map(|a| table.score(a.type_id)).collect()
    }

    /// Same trace with the arrival at `index` deleted.
    pub fn without(&self, index: usize) -> ArrivalTrace {
        let mut arrivals = self.arrivals.clone();
        arrivals.remove(index);
        ArrivalTrace {
            arrivals,
            horizon: self.horizon,
            seed: self.seed,
        }
    }

    /// Arrivals with `time <= t`, keeping the horizon at `t`.
    pub fn truncated(&self, t: f64) -> ArrivalTrace {
        let end = self.arrivals.partition_point(|a| a.time <= t);
        ArrivalTrace {
            arrivals: self.arrivals[..end].to_vec(),
            horizon: t.min(self.horizon),
            seed: self.seed,
        }
    }

    /// Superposition of two traces over the shorter horizon.
    pub fn merged(&self, other: &ArrivalTrace) -> Result<ArrivalTrace> {
        let mut all = self.arrivals.clone();
        all.extend_from_slice(&other.arrivals);
        ArrivalTrace::from_arrivals(all, self.horizon.min(other.horizon), self.seed)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SimError::param("horizon", format!("must be finite and > 0, got {horizon}")));
    }
    Ok(())
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(SimError::param("rate", format!("must be finite and >= 0, got {rate}")));
    }
    Ok(())
}

/// Arrival times of a homogeneous Poisson process on `[0, horizon]`.
pub(crate) fn poisson_times(rate: f64, horizon: f64, seed: u64) -> Vec<f64> {
    if rate == 0.0 {
        return Vec::new();
    }
    let mut rng = rng_from(seed);
    let exp = Exp::new(rate).expect("rate checked positive");
    let mut times = Vec::with_capacity((rate * horizon * 1.05) as usize + 8);
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t > horizon {
            break;
        }
        times.push(t);
    }
    times
}

/// Single Poisson stream of honest type-0 arrivals by miner 0.
pub fn generate_poisson_trace(rate: f64, horizon: f64, seed: u64) -> Result<ArrivalTrace> {
    check_rate(rate)?;
    check_horizon(horizon)?;
    let arrivals = poisson_times(rate, horizon, seed)
        .into_iter()
        .map(|time| Arrival {
            time,
            type_id: 0,
            origin: Origin::Honest,
            miner_id: 0,
        })
        .collect();
    ArrivalTrace::from_arrivals(arrivals, horizon, seed)
}

/// Superposition of independent Poisson streams: one per `(type, miner)` for
/// honest traces, with `h_i` split evenly across miners, or one per type at
/// rate `b_i` for the adversary.
pub fn generate_typed_trace(
    specs: &[BlockTypeSpec],
    origin: Origin,
    n_miners: u32,
    horizon: f64,
    seed: u64,
) -> Result<ArrivalTrace> {
    if specs.is_empty() {
        return Err(SimError::param("specs", "at least one block type is required"));
    }
    for s in specs {
        s.validate()?;
    }
    check_horizon(horizon)?;
    if origin == Origin::Honest && n_miners == 0 {
        return Err(SimError::param("n_miners", "honest traces need at least one miner"));
    }

    let origin_label = match origin {
        Origin::Honest => stream::HONEST,
        Origin::Adversary => stream::ADVERSARY,
    };
    let mut arrivals = Vec::new();
    for spec in specs {
        match origin {
            Origin::Honest => {
                let per_miner = spec.honest_rate / n_miners as f64;
                for miner in 0..n_miners {
                    let s = derive_seed(seed, &[origin_label, spec.type_id as u64, miner as u64]);
                    arrivals.extend(poisson_times(per_miner, horizon, s).into_iter().map(|time| Arrival {
                        time,
                        type_id: spec.type_id,
                        origin,
                        miner_id: miner,
                    }));
                }
            }
            Origin::Adversary => {
                let s = derive_seed(seed, &[origin_label, spec.type_id as u64]);
                arrivals.extend(poisson_times(spec.adversary_rate, horizon, s).into_iter().map(|time| Arrival {
                    time,
                    type_id: spec.type_id,
                    origin,
                    miner_id: ADVERSARY_MINER,
                }));
            }
        }
    }
    ArrivalTrace::from_arrivals(arrivals, horizon, seed)
}

/// Honest and adversary traces for one trial, drawn from independent streams of `seed`.
pub fn generate_trial_traces(
    specs: &[BlockTypeSpec],
    n_miners: u32,
    horizon: f64,
    seed: u64,
) -> Result<(ArrivalTrace, ArrivalTrace)> {
    let honest = generate_typed_trace(specs, Origin::Honest, n_miners, horizon, derive_seed(seed, &[stream::HONEST]))?;
    let adversary =
        generate_typed_trace(specs, Origin::Adversary, n_miners, horizon, derive_seed(seed, &[stream::ADVERSARY]))?;
    Ok((honest, adversary))
}

/// Prefix sums of arrival scores for `O(log n)` window queries.
#[derive(Clone, Debug)]
pub struct CumulativeScore {
    times: Vec<f64>,
    prefix: Vec<f64>,
}

impl CumulativeScore {
    pub fn new(trace: &ArrivalTrace, table: &ScoreTable) -> Self {
        let times = trace.times();
        let mut prefix = Vec::with_capacity(times.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for a in trace.arrivals() {
            acc += table.score(a.type_id);
            prefix.push(acc);
        }
        CumulativeScore { times, prefix }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Total score of arrivals with `time <= t`.
    #[inline]
    pub fn up_to(&self, t: f64) -> f64 {
        self.prefix[self.times.partition_point(|&x| x <= t)]
    }

    /// Total score of arrivals in `(a, b]`.
    #[inline]
    pub fn between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.up_to(b) - self.up_to(a)
    }

    /// Number of arrivals in the closed window `[a, b]`.
    pub fn count_closed(&self, a: f64, b: f64) -> usize {
        if b < a {
            return 0;
        }
        let lo = self.times.partition_point(|&x| x < a);
        let hi = self.times.partition_point(|&x| x <= b);
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_gives_empty_trace() {
        let trace = generate_poisson_trace(0.0, 100.0, 7).unwrap();
        assert!(trace.is_empty());
        assert_eq!(trace.horizon(), 100.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            generate_poisson_trace(-1.0, 10.0, 1),
            Err(SimError::InvalidParameter { name: "rate", .. })
        ));
        assert!(matches!(
            generate_poisson_trace(1.0, 0.0, 1),
            Err(SimError::InvalidParameter { name: "horizon", .. })
        ));
        assert!(generate_typed_trace(&[], Origin::Honest, 1, 10.0, 1).is_err());
        assert!(generate_typed_trace(&[BlockTypeSpec::unit(1.0, 0.0)], Origin::Honest, 0, 10.0, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BlockTypeSpec::new(0, 0.0, 1.0, 0.0).is_err());
        assert!(BlockTypeSpec::new(0, 1.0, -1.0, 0.0).is_err());
        assert!(validate_specs(&[BlockTypeSpec::unit(0.0, 0.0)]).is_err());
        let dup = [BlockTypeSpec::unit(1.0, 0.0), BlockTypeSpec::unit(1.0, 0.0)];
        assert!(validate_specs(&dup).is_err());
    }

    #[test]
    fn poisson_count_within_three_sigma() {
        let trace = generate_poisson_trace(1.0, 1e5, 11).unwrap();
        let n = trace.len() as f64;
        assert!((n - 1e5).abs() < 3.0 * 1e5_f64.sqrt(), "count {n}");
    }

    #[test]
    fn poisson_mean_gap() {
        let trace = generate_poisson_trace(2.0, 1e5, 12).unwrap();
        let t = trace.times();
        let mean = t.last().unwrap() / t.len() as f64;
        assert!((mean - 0.5).abs() / 0.5 < 0.01, "mean gap {mean}");
    }

    #[test]
    fn deterministic_given_seed() {
        let specs = [BlockTypeSpec::unit(1.0, 0.3), BlockTypeSpec::new(1, 2.0, 0.5, 0.1).unwrap()];
        let a = generate_typed_trace(&specs, Origin::Honest, 10, 500.0, 99).unwrap();
        let b = generate_typed_trace(&specs, Origin::Honest, 10, 500.0, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_typed_trace(&specs, Origin::Honest, 10, 500.0, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn per_miner_rates_are_split_evenly() {
        let specs = [BlockTypeSpec::unit(1.0, 0.0)];
        let trace = generate_typed_trace(&specs, Origin::Honest, 4, 4e4, 3).unwrap();
        let total = trace.len() as f64 / 4e4;
        assert!((total - 1.0).abs() < 0.03, "merged rate {total}");
        for m in 0..4 {
            let n = trace.arrivals().iter().filter(|a| a.miner_id == m).count() as f64 / 4e4;
            assert!((n - 0.25).abs() < 0.02, "miner {m} rate {n}");
        }
    }

    #[test]
    fn type_fraction_follows_rates() {
        let specs = [BlockTypeSpec::unit(1.0, 0.0), BlockTypeSpec::new(1, 1.0, 3.0, 0.0).unwrap()];
        let trace = generate_typed_trace(&specs, Origin::Honest, 10, 2.5e4, 5).unwrap();
        assert!(trace.len() > 90_000);
        let frac = trace.arrivals().iter().filter(|a| a.type_id == 1).count() as f64 / trace.len() as f64;
        assert!((frac - 0.75).abs() < 0.01, "type-2 fraction {frac}");
    }

    #[test]
    fn adversary_with_zero_rates_is_empty() {
        let specs = [BlockTypeSpec::unit(1.0, 0.0), BlockTypeSpec::new(1, 2.0, 1.0, 0.0).unwrap()];
        let trace = generate_typed_trace(&specs, Origin::Adversary, 10, 1000.0, 1).unwrap();
        assert!(trace.is_empty());
    }

    #[test]
    fn ties_are_broken_and_perturbed() {
        let mk = |origin, type_id, miner_id| Arrival {
            time: 1.0,
            type_id,
            origin,
            miner_id,
        };
        let trace = ArrivalTrace::from_arrivals(
            vec![mk(Origin::Adversary, 0, ADVERSARY_MINER), mk(Origin::Honest, 1, 0), mk(Origin::Honest, 0, 3)],
            10.0,
            0,
        )
        .unwrap();
        let a = trace.arrivals();
        assert_eq!((a[0].origin, a[0].type_id), (Origin::Honest, 0));
        assert_eq!((a[1].origin, a[1].type_id), (Origin::Honest, 1));
        assert_eq!(a[2].origin, Origin::Adversary);
        assert_eq!(a[0].time, 1.0);
        assert_eq!(a[1].time, 1.0f64.next_up());
        assert!(a[2].time > a[1].time);
    }

    #[test]
    fn cumulative_score_windows() {
        let table = ScoreTable::new(&[BlockTypeSpec::new(0, 2.0, 0.0, 1.0).unwrap()]);
        let arrivals = [1.0, 2.0, 3.0]
            .iter()
            .map(|&time| Arrival {
                time,
                type_id: 0,
                origin: Origin::Adversary,
                miner_id: ADVERSARY_MINER,
            })
            .collect();
        let trace = ArrivalTrace::from_arrivals(arrivals, 10.0, 0).unwrap();
        let cum = CumulativeScore::new(&trace, &table);
        assert_eq!(cum.between(0.5, 3.0), 6.0);
        assert_eq!(cum.between(1.0, 3.0), 4.0);
        assert_eq!(cum.between(3.0, 3.0), 0.0);
        assert_eq!(cum.count_closed(1.0, 3.0), 3);
    }
}
