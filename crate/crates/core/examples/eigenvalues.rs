// An eigenvector of a slope-simple eigenvalue mod p^N and the eigenvalue
// of a commuting operator on it.

use num_bigint::BigInt;
use padic_slopes::newton::{char_poly, commuting_eigenvalue, eigenvector_mod, hensel_slope_root};
use padic_slopes::{IntMatrix, Prime, Result};

pub fn run_example() -> Result<(BigInt, BigInt)> {
    let p = Prime::new(3)?;
    let xi = IntMatrix::from_i64_rows(&[[3, 1, 0], [0, 1, 9], [0, 2, 27]])?;
    // ψ = ξ² - 2ξ + 5 commutes with ξ
    // characteristic polynomial (X - 3)(X^2 - 28X + 9): slopes 0, 1 and 2
    let psi = xi.eval_poly(&[BigInt::from(5), BigInt::from(-2), BigInt::from(1)]);
    let root = hensel_slope_root(&char_poly(&xi), p, 1, 12)?;
    let precision = root.reliable_precision();
    let f = eigenvector_mod(&xi, &root.lambda, p, precision)?;
    let a = commuting_eigenvalue(&psi, &f, p, precision)?;
    println!("lambda = {}, a = {} (mod 3^{precision})", root.lambda, a);
    Ok((root.lambda, a))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
