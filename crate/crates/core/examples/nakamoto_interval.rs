//! Scans one trial for Nakamoto intervals, then estimates how often a window
//! is one and whether the three events factorize.

use nakamoto_sim::analysis::{
    check_interval, estimate_nakamoto_probability, full_tiling, NakamotoIntervalQuery, TrialData,
};
use nakamoto_sim::arrivals::{generate_trial_traces, BlockTypeSpec, ScoreTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (delta, q, horizon) = (0.5, 0.5, 300.0);
    let specs = [BlockTypeSpec::unit(1.0, 0.2)];
    let (honest, adversary) = generate_trial_traces(&specs, 10, horizon, 99)?;
    let data = TrialData::new(&honest, &adversary, &ScoreTable::new(&specs), delta)?;

    let tiling = full_tiling(q, delta, horizon);
    let mut shown = 0;
    let mut flagged = 0;
    for w in 0..tiling.count {
        let v = check_interval(&tiling.query(w), &data)?;
        if let Some(j) = v.nakamoto_arrival {
            flagged += 1;
            if shown < 5 {
                println!("window centred at {:>7.2}: block of arrival {j} at t={:.3}", tiling.query(w).tau_q, honest.arrivals()[j].time);
                shown += 1;
            }
        }
    }
    println!("{flagged} of {} windows are Nakamoto intervals", tiling.count);

    let v = check_interval(&NakamotoIntervalQuery::new(100.0, q, delta)?, &data)?;
    println!("window at 100: L={} E1={} E2={} -> {}", v.l_q, v.e1, v.e2_up_to_horizon, v.is_nakamoto_at_horizon);

    let e = estimate_nakamoto_probability(&specs, delta, q, 4000, horizon, 7, 10, 0.95)?;
    println!(
        "P(L)={:.4} P(E1)={:.4} P(E2)={:.4}  joint {:.4} [{:.4}, {:.4}]  product {:.4} +- {:.4}  factorizes: {}",
        e.l_q.estimate,
        e.e1.estimate,
        e.e2.estimate,
        e.joint.estimate,
        e.joint.ci_low,
        e.joint.ci_high,
        e.product,
        e.product_half_width,
        e.factorizes()
    );
    Ok(())
}
