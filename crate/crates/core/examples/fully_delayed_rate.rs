//! Growth rate of the fully-delayed honest chain against the closed form
//! `h / (1 + Δh)`, plus a two-type mix where no closed form exists.

use nakamoto_sim::analysis::{estimate_lambda_h, single_type_lambda_h};
use nakamoto_sim::arrivals::{generate_typed_trace, BlockTypeSpec, Origin};
use nakamoto_sim::blocktree::build_fully_delayed_chain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon = 2e5;
    println!("{:>5} {:>5} {:>10} {:>10} {:>9}", "h", "delta", "estimate", "exact", "stderr");
    for h in [0.5, 1.0, 2.0] {
        for delta in [0.0, 1.0, 2.0] {
            let specs = [BlockTypeSpec::unit(h, 0.0)];
            let honest = generate_typed_trace(&specs, Origin::Honest, 10, horizon, 17)?;
            let r = estimate_lambda_h(&build_fully_delayed_chain(&honest, delta, &specs)?, &specs)?;
            println!(
                "{h:>5} {delta:>5} {:>10.5} {:>10.5} {:>9.5}",
                r.lambda_h,
                single_type_lambda_h(1.0, h, delta),
                r.lambda_h_stderr
            );
        }
    }

    let specs = [BlockTypeSpec::new(0, 1.0, 0.9, 0.2)?, BlockTypeSpec::new(1, 5.0, 0.1, 0.05)?];
    let honest = generate_typed_trace(&specs, Origin::Honest, 10, horizon, 18)?;
    let r = estimate_lambda_h(&build_fully_delayed_chain(&honest, 1.0, &specs)?, &specs)?;
    println!(
        "two types, delta=1: lambda_h {:.4} +- {:.4}, lambda_a {:.4} over {} renewals",
        r.lambda_h, r.lambda_h_stderr, r.lambda_a, r.n_renewals
    );
    Ok(())
}
