// A short randomized run of the eigenvalue-congruence check, with both
// instance generators.

use padic_slopes::family::{run_experiment, ExperimentConfig, ExperimentReport, Generator, Mode};
use padic_slopes::Result;

pub fn run_example() -> Result<Vec<ExperimentReport>> {
    let mut reports = Vec::new();
    for generator in [Generator::PolynomialPsi, Generator::Planted] {
        let config = ExperimentConfig {
            trials: 10,
            generator,
            ..ExperimentConfig::default_proposition()
        };
        let report = run_experiment(&config, Mode::Proposition, 1)?;
        let s = &report.summary;
        println!(
            "{generator:?}: kappa = {:?}, {} accepted, {} violations, smallest margin {:?}",
            report.kappa, s.accepted, s.violations, s.min_margin
        );
        reports.push(report);
    }
    Ok(reports)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
