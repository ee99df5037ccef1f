//! Probability that the punctured honest walk stays above `(λ_h − ε)t`, and
//! the adversary mirror staying below `(λ_a + ε)t`.

use nakamoto_sim::analysis::{
    default_segment_length, estimate_adversary_stay_below_probability, estimate_stay_above_probability,
    single_type_lambda_h,
};
use nakamoto_sim::arrivals::BlockTypeSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (h, b, delta) = (1.0, 0.3, 1.0);
    let specs = [BlockTypeSpec::unit(h, b)];
    let lambda_h = single_type_lambda_h(1.0, h, delta);
    let eps = 0.1 * lambda_h;
    for seg in [default_segment_length(lambda_h), 50.0] {
        let w = estimate_stay_above_probability(&specs, delta, seg, eps, 2000, 2000.0, 5, 0.95)?;
        println!(
            "honest  B={seg:>5.1}: p={:.4} [{:.4}, {:.4}], {} segments/trial, mean segment score {:.2} vs threshold {:.2}",
            w.probability.estimate,
            w.probability.ci_low,
            w.probability.ci_high,
            w.segments_per_trial,
            w.mean_segment_score,
            w.threshold
        );
    }
    let w = estimate_adversary_stay_below_probability(&specs, 20.0, 0.1 * b, 2000, 2000.0, 6, 0.95)?;
    println!(
        "adversary B=20.0: p={:.4} [{:.4}, {:.4}]",
        w.probability.estimate, w.probability.ci_low, w.probability.ci_high
    );
    Ok(())
}
