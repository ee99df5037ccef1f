//! The race sequence between fully-delayed honest chain extensions and
//! adversary arrivals, and its one-step dependence.
//!
//! `X_n = +1` when the n-th event is an extension of the fully-delayed chain
//! and `−1` when it is an adversary arrival. After an extension the next one
//! is at least `Δ` away, so an adversary arrival inside that gap always comes
//! first and `P(X_n = −1 | X_{n−1} = +1)` exceeds the marginal frequency.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::stats::Proportion;
use crate::arrivals::{generate_poisson_trace, poisson_times, ScoreTable};
use crate::blocktree::build_fully_delayed_chain_with;
use crate::error::{Result, SimError};
use crate::rng::{derive_seed, rng_from, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleStats {
    /// `P̂(X_n = −1 | X_{n−1} = +1)`.
    pub p_cond: Proportion,
    /// `P̂(X_n = −1)`.
    pub p_marg: Proportion,
    pub n_steps: u64,
    /// Larger of the two interval half-widths.
    pub ci_halfwidth: f64,
}

impl CounterexampleStats {
    /// Conservative lower confidence bound on `p_cond − p_marg`.
    pub fn dependence_lower_bound(&self) -> f64 {
        (self.p_cond.estimate - self.p_marg.estimate) - (self.p_cond.half_width() + self.p_marg.half_width())
    }
}

/// Conditional and marginal frequencies of `−1` in `xs`.
pub fn dependence_stats(xs: &[i8], conf: f64) -> Result<CounterexampleStats> {
    if xs.len() < 2 {
        return Err(SimError::InsufficientData("race sequence needs at least 2 steps".into()));
    }
    if xs.iter().any(|&x| x != 1 && x != -1) {
        return Err(SimError::InvalidInput("race sequence entries must be +1 or -1".into()));
    }
    let minus = xs.iter().filter(|&&x| x == -1).count() as u64;
    let (mut after_plus, mut minus_after_plus) = (0u64, 0u64);
    for w in xs.windows(2) {
        if w[0] == 1 {
            after_plus += 1;
            minus_after_plus += (w[1] == -1) as u64;
        }
    }
    let p_cond = Proportion::wilson(minus_after_plus, after_plus, conf);
    let p_marg = Proportion::wilson(minus, xs.len() as u64, conf);
    Ok(CounterexampleStats {
        ci_halfwidth: p_cond.half_width().max(p_marg.half_width()),
        p_cond,
        p_marg,
        n_steps: xs.len() as u64,
    })
}

fn check_rates(h: f64, b: f64, delta: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SimError::param("h", format!("must be finite and > 0, got {h}")));
    }
    if !(b.is_finite() && b >= 0.0) {
        return Err(SimError::param("b", format!("must be finite and >= 0, got {b}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SimError::param("delta", format!("must be finite and > 0, got {delta}")));
    }
    Ok(())
}

/// First `n_steps` race events. Chain extensions of a unit-score fully-delayed
/// chain form a renewal process with gaps `Δ + Exp(h)` after the first `Exp(h)`.
pub fn race_sequence(h: f64, b: f64, delta: f64, n_steps: u64, seed: u64) -> Result<Vec<i8>> {
    check_rates(h, b, delta)?;
    let mut h_rng = rng_from(derive_seed(seed, &[stream::HONEST]));
    let mut a_rng = rng_from(derive_seed(seed, &[stream::ADVERSARY]));
    let h_exp = Exp::new(h).expect("h > 0");
    let a_exp = (b > 0.0).then(|| Exp::new(b).expect("b > 0"));
    let mut next_h = h_exp.sample(&mut h_rng);
    let mut next_a = a_exp.map_or(f64::INFINITY, |e| e.sample(&mut a_rng));
    let mut xs = Vec::with_capacity(n_steps as usize);
    while (xs.len() as u64) < n_steps {
        if next_a < next_h {
            xs.push(-1);
            next_a += a_exp.expect("finite arrival implies b > 0").sample(&mut a_rng);
        } else {
            xs.push(1);
            next_h += delta + h_exp.sample(&mut h_rng);
        }
    }
    Ok(xs)
}

pub fn run_counterexample(h: f64, b: f64, delta: f64, n_steps: u64, seed: u64, conf: f64) -> Result<CounterexampleStats> {
    dependence_stats(&race_sequence(h, b, delta, n_steps, seed)?, conf)
}

/// The race sequence read off a full honest trace: chain extensions are the
/// score steps of the fully-delayed chain built from every honest arrival.
pub fn race_sequence_from_trace(h: f64, b: f64, delta: f64, horizon: f64, seed: u64) -> Result<Vec<i8>> {
    check_rates(h, b, delta)?;
    let honest = generate_poisson_trace(h, horizon, derive_seed(seed, &[stream::HONEST]))?;
    let chain = build_fully_delayed_chain_with(&honest, delta, &ScoreTable::unit(1))?;
    let (ext, _) = chain.steps();
    let adv = if b > 0.0 {
        poisson_times(b, horizon, derive_seed(seed, &[stream::ADVERSARY]))
    } else {
        Vec::new()
    };
    let (mut i, mut k) = (0, 0);
    let mut xs = Vec::with_capacity(ext.len() + adv.len());
    while i < ext.len() || k < adv.len() {
        if k < adv.len() && (i == ext.len() || adv[k] < ext[i]) {
            xs.push(-1);
            k += 1;
        } else {
            xs.push(1);
            i += 1;
        }
    }
    Ok(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_adversary_gives_zero() {
        let s = run_counterexample(1.0, 0.0, 1.0, 1000, 1, 0.99).unwrap();
        assert_eq!(s.p_cond.estimate, 0.0);
        assert_eq!(s.p_marg.estimate, 0.0);
    }

    #[test]
    fn counts_on_a_fixed_sequence() {
        let s = dependence_stats(&[1, -1, 1, 1, -1, -1], 0.95).unwrap();
        assert_eq!((s.p_cond.successes, s.p_cond.n), (2, 3));
        assert_eq!((s.p_marg.successes, s.p_marg.n), (3, 6));
        assert!(dependence_stats(&[1], 0.95).is_err());
        assert!(dependence_stats(&[1, 0], 0.95).is_err());
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(race_sequence(0.0, 1.0, 1.0, 10, 0).is_err());
        assert!(race_sequence(1.0, -1.0, 1.0, 10, 0).is_err());
        assert!(race_sequence(1.0, 1.0, 0.0, 10, 0).is_err());
    }
}
