//! Dispatch from a configuration to the estimators.

use super::config::{Experiment, ExperimentConfig};
use super::output::{fmt_g9, ResultRow};
use crate::adversary::StrategyKind;
use crate::analysis::{
    estimate_attack_success, estimate_from_renewals, estimate_nakamoto_probability_at, estimate_no_nakamoto_decay,
    estimate_overtake_decay, montecarlo::run_trials, phase_diagram, run_counterexample, run_persistence_check,
    stats::z_value, DecayFit, DecayOptions,
};
use crate::arrivals::{generate_typed_trace, Origin};
use crate::blocktree::build_fully_delayed_chain;
use crate::error::{Result, SimError};

/// Runs the configured experiment. Rows come out in a fixed order and carry
/// the config hash and root seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = match cfg.experiment {
        Experiment::LambdaH => lambda_h(cfg),
        Experiment::NakamotoProb => nakamoto_prob(cfg),
        Experiment::Persistence => persistence(cfg),
        Experiment::PrivateAttack => private_attack(cfg),
        Experiment::Counterexample => counterexample(cfg),
        Experiment::DecayNoNakamoto => decay_no_nakamoto(cfg),
        Experiment::DecayOvertake => decay_overtake(cfg),
        Experiment::PhaseDiagram => phase(cfg),
    }
    .map_err(|e| SimError::InvalidInput(format!("{}: {e}", cfg.experiment.as_str())))?;
    let hash = cfg.hash();
    for r in &mut rows {
        r.config_hash = hash.clone();
        r.seed = cfg.root_seed;
    }
    Ok(rows)
}

fn kv(pairs: &[(&str, f64)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={}", fmt_g9(*v))).collect::<Vec<_>>().join(";")
}

/// Pools renewal segments `1..n` of every trial into one ratio estimate.
fn lambda_h(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let per_trial = run_trials(cfg.n_trials, cfg.root_seed, |_, s| {
        let honest = generate_typed_trace(&cfg.block_types, Origin::Honest, cfg.n_miners, cfg.horizon, s)?;
        let chain = build_fully_delayed_chain(&honest, cfg.delta, &cfg.block_types)?;
        Ok((chain.renewal_times, chain.renewal_scores))
    })?;
    let (mut times, mut scores) = (vec![0.0], vec![0.0]);
    for (t, s) in per_trial {
        times.extend(t.into_iter().skip(1));
        scores.extend(s.into_iter().skip(1));
    }
    let r = estimate_from_renewals(&times, &scores)?;
    let hw = z_value(cfg.confidence) * r.lambda_h_stderr;
    Ok(vec![ResultRow::point(kv(&[("delta", cfg.delta)]), "lambda_h", r.lambda_h, r.n_renewals as u64)
        .with_ci(r.lambda_h - hw, r.lambda_h + hw)])
}

fn nakamoto_prob(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let tau_q = cfg.params.tau_q.unwrap_or(cfg.horizon / 3.0);
    let e = estimate_nakamoto_probability_at(
        &cfg.block_types,
        cfg.delta,
        cfg.q(),
        tau_q,
        cfg.n_trials,
        cfg.horizon,
        cfg.root_seed,
        cfg.n_miners,
        cfg.confidence,
    )?;
    let pt = kv(&[("q", cfg.q()), ("tau_q", tau_q)]);
    Ok(vec![
        ResultRow::proportion(&pt, "p_joint", &e.joint),
        ResultRow::proportion(&pt, "p_l", &e.l_q),
        ResultRow::proportion(&pt, "p_e1", &e.e1),
        ResultRow::proportion(&pt, "p_e2", &e.e2),
        ResultRow::point(&pt, "p_product", e.product, cfg.n_trials)
            .with_ci(e.product - e.product_half_width, e.product + e.product_half_width),
    ])
}

fn strategies(cfg: &ExperimentConfig) -> Vec<StrategyKind> {
    cfg.params
        .strategies
        .clone()
        .unwrap_or_else(|| vec![StrategyKind::PrivateMining, StrategyKind::FullDelay])
}

fn restart(cfg: &ExperimentConfig) -> bool {
    cfg.params.restart_at_reveal.unwrap_or(false)
}

fn persistence(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for kind in strategies(cfg) {
        let r = run_persistence_check(
            &cfg.block_types,
            cfg.delta,
            cfg.q(),
            kind,
            cfg.n_trials,
            cfg.horizon,
            cfg.root_seed,
            cfg.n_miners,
            restart(cfg),
        )?;
        let pt = format!("strategy={}", kind.as_str());
        rows.push(ResultRow::point(&pt, "nakamoto_intervals", r.flagged_intervals as f64, r.n_trials));
        rows.push(ResultRow::point(&pt, "persistence_violations", r.violations as f64, r.flagged_intervals));
    }
    Ok(rows)
}

fn private_attack(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let s = estimate_attack_success(
        &cfg.block_types,
        cfg.delta,
        cfg.horizon,
        cfg.n_trials,
        cfg.root_seed,
        cfg.n_miners,
        restart(cfg),
        cfg.confidence,
    )?;
    let pt = kv(&[("horizon", cfg.horizon)]);
    Ok(vec![
        ResultRow::proportion(&pt, "attack_success", &s.success),
        ResultRow::proportion(&pt, "dominated", &s.dominated),
        ResultRow::proportion(&pt, "zero_survivors", &s.zero_survivors),
    ])
}

fn counterexample(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let spec = &cfg.block_types[0];
    let n_steps = cfg.params.n_steps.unwrap_or(100_000);
    let s = run_counterexample(spec.honest_rate, spec.adversary_rate, cfg.delta, n_steps, cfg.root_seed, cfg.confidence)?;
    let pt = kv(&[("h", spec.honest_rate), ("b", spec.adversary_rate), ("delta", cfg.delta)]);
    Ok(vec![ResultRow::proportion(&pt, "p_cond", &s.p_cond), ResultRow::proportion(&pt, "p_marg", &s.p_marg)])
}

fn decay_rows(fit: &DecayFit, key: &str) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = fit.points.iter().map(|(t, p)| ResultRow::proportion(kv(&[(key, *t)]), "probability", p)).collect();
    let n = fit.tprimes.len() as u64;
    rows.push(ResultRow::point("fit", "slope", fit.slope, n).with_ci(fit.slope_ci.0, fit.slope_ci.1));
    rows.push(ResultRow::point("fit", "intercept", fit.intercept, n));
    rows.push(ResultRow::point("fit", "r_squared", fit.r_squared, n));
    rows.push(ResultRow::point("fit", "dropped_points", fit.dropped.len() as f64, fit.points.len() as u64));
    rows
}

fn decay_no_nakamoto(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let lengths = cfg.params.interval_lengths.as_deref().expect("validated");
    let mut opts = DecayOptions::no_nakamoto();
    opts.n_miners = cfg.n_miners;
    opts.conf = cfg.confidence;
    opts.lead_in = cfg.params.lead_in.unwrap_or(opts.lead_in);
    opts.tail = cfg.params.tail.unwrap_or(opts.tail);
    let fit = estimate_no_nakamoto_decay(&cfg.block_types, cfg.delta, cfg.q(), lengths, cfg.n_trials, cfg.root_seed, &opts)?;
    Ok(decay_rows(&fit, "t"))
}

fn decay_overtake(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let tprimes = cfg.params.tprimes.as_deref().expect("validated");
    let window = cfg.params.window.expect("validated");
    let mut opts = DecayOptions::overtake(tprimes);
    opts.n_miners = cfg.n_miners;
    opts.conf = cfg.confidence;
    opts.lead_in = cfg.params.lead_in.unwrap_or(opts.lead_in);
    opts.tail = cfg.params.tail.unwrap_or(opts.tail);
    let fit = estimate_overtake_decay(&cfg.block_types, cfg.delta, window, tprimes, cfg.n_trials, cfg.root_seed, &opts)?;
    Ok(decay_rows(&fit, "tprime"))
}

fn phase(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let ratios = cfg.params.ratios.as_deref().expect("validated");
    let h = cfg.block_types[0].honest_rate;
    let pts = phase_diagram(
        h,
        cfg.delta,
        ratios,
        cfg.horizon,
        cfg.n_trials,
        cfg.root_seed,
        cfg.n_miners,
        restart(cfg),
        cfg.confidence,
    )?;
    Ok(pts
        .iter()
        .map(|p| ResultRow::proportion(kv(&[("ratio", p.ratio)]), "attack_success", &p.stats.success))
        .collect())
}
