// Slope multiplicities of operators congruent mod p^{n'} agree below the
// slope bound of the coarsened quotient.

use padic_slopes::family::{
    run_experiment, ExperimentConfig, ExperimentReport, Mode, ProfileSource,
};
use padic_slopes::Result;

pub fn run_example() -> Result<ExperimentReport> {
    let config = ExperimentConfig {
        profile: ProfileSource::Hilbert {
            d: 1,
            h: 1,
            n: 12,
            max_rank: Some(8),
        },
        alpha: 0,
        trials: 20,
        congruence_level: Some(6),
        ..ExperimentConfig::default_proposition()
    };
    let report = run_experiment(&config, Mode::Constancy, 1)?;
    let above: usize = report.trials.iter().map(|t| t.informational.len()).sum();
    println!(
        "slope bound {}: {} violations below it, {} multiplicity changes above it",
        report.trials[0]
            .slope_bound
            .expect("constancy trials carry the bound"),
        report.summary.violations,
        above
    );
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
