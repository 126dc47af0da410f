// Divisor profile of L/(K + p^n L) from generators of K, and its
// coarsening to a lower level.

use padic_slopes::bounds::c_exact;
use padic_slopes::lattice::{profile_mod, quotient_profile, DivisorProfile};
use padic_slopes::{IntMatrix, Prime, Result};

pub fn run_example() -> Result<(DivisorProfile, DivisorProfile)> {
    let p = Prime::new(5)?;
    // columns generate K inside Z^3
    let kgen = IntMatrix::from_i64_rows(&[[125, 5, 0], [0, 25, 0], [0, 0, 1]])?;
    let profile = quotient_profile(&kgen, p, 4)?;
    let coarse = profile_mod(&profile, 2)?;
    println!("profile at level 4: {:?}", profile.exponents());
    println!("profile at level 2: {:?}", coarse.exponents());
    println!("slope bound c = {}", c_exact(&profile).value);
    Ok((profile, coarse))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
