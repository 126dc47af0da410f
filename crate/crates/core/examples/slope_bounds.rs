// Exact slope bound and closed-form κ estimates for tensor profiles.

use padic_slopes::bounds::{bounds_report, compare_c, BoundsReport, KappaChoice};
use padic_slopes::Result;

pub fn run_example() -> Result<BoundsReport> {
    let report = bounds_report(1, 1, 100, 0, KappaChoice::Auto)?;
    println!("c_exact = {}, c1 = {:.4}", report.c_exact.value, report.c1);
    println!("closed-form kappa = {}", report.kappa_closed.kappa);
    for row in compare_c(&[1, 2], &[2], 6)? {
        println!(
            "d={} h={} n={}: exact {} closed {:.3}{}",
            row.d,
            row.h,
            row.n,
            row.exact,
            row.closed,
            if row.closed_exceeds_exact {
                " (closed form too large)"
            } else {
                ""
            }
        );
    }
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
