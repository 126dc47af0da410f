// Characteristic polynomial and Newton polygon of a companion matrix.

use padic_slopes::newton::PolygonReport;
use padic_slopes::{IntMatrix, Prime, Result};

pub fn run_example() -> Result<PolygonReport> {
    // companion matrix of X^2 - 4X - 32 = (X - 8)(X + 4)
    let a = IntMatrix::from_i64_rows(&[[0, 1], [32, 4]])?;
    let report = PolygonReport::for_matrix(&a, Prime::new(2)?);
    for seg in &report.segments {
        println!("slope {} with multiplicity {}", seg.slope, seg.length);
    }
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
