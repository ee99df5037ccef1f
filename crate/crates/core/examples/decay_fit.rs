//! Log-linear fits showing exponential decay of the probability of no
//! Nakamoto interval, and of long overtaking adversary chains.

use nakamoto_sim::analysis::{estimate_no_nakamoto_decay, estimate_overtake_decay, DecayFit, DecayOptions};
use nakamoto_sim::arrivals::BlockTypeSpec;

fn show(name: &str, fit: &DecayFit) {
    println!("{name}");
    for (t, p) in &fit.points {
        println!("  {t:>6.1}  {:.5} [{:.5}, {:.5}]", p.estimate, p.ci_low, p.ci_high);
    }
    println!(
        "  slope {:.4} (95% CI {:.4} .. {:.4})  r2 {:.3}  dropped {:?}  decays: {}",
        fit.slope, fit.slope_ci.0, fit.slope_ci.1, fit.r_squared, fit.dropped, fit.decays()
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [BlockTypeSpec::unit(1.0, 0.3)];
    let lengths = [40.0, 80.0, 120.0, 160.0];
    let fit = estimate_no_nakamoto_decay(&specs, 0.5, 0.5, &lengths, 1000, 1, &DecayOptions::no_nakamoto())?;
    show("P(no Nakamoto interval in [s, s+t])", &fit);

    let tprimes = [10.0, 15.0, 20.0, 30.0];
    let fit = estimate_overtake_decay(&specs, 0.5, 100.0, &tprimes, 1000, 2, &DecayOptions::overtake(&tprimes))?;
    show("P(some block in a 100s window overtaken by a chain spanning >= t')", &fit);
    Ok(())
}
