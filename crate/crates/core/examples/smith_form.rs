// Smith normal form of an integer matrix, with the transforms checked.

use padic_slopes::lattice::{smith_normal_form, SmithDecomposition};
use padic_slopes::{IntMatrix, Result};

pub fn run_example() -> Result<SmithDecomposition> {
    let a = IntMatrix::from_i64_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]])?;
    let snf = smith_normal_form(&a);
    assert_eq!(&(&snf.u * &snf.d) * &snf.v, a);
    let divisors: Vec<String> = snf.divisors().iter().map(ToString::to_string).collect();
    println!("A =\n{a}");
    println!("elementary divisors: {}", divisors.join(", "));
    Ok(snf)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
