// Lifting the unique root of valuation 1 of a cubic to precision p^20.

use num_bigint::BigInt;
use padic_slopes::newton::{hensel_slope_root, CharPoly, HenselRoot};
use padic_slopes::padic::congruent_mod_power;
use padic_slopes::{Prime, Result};

pub fn run_example() -> Result<HenselRoot> {
    let p = Prime::new(7)?;
    // (X - 14)(X^2 + X + 3): the quadratic factor only has unit roots
    let f = CharPoly::from_i64(&[1, -13, -11, -42])?;
    let root = hensel_slope_root(&f, p, 1, 20)?;
    assert!(congruent_mod_power(
        &root.lambda,
        &BigInt::from(14),
        p,
        root.reliable_precision()
    ));
    println!("lambda = {} (mod 7^{})", root.lambda, root.precision);
    Ok(root)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
