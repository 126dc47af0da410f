// p-adic valuations, unit parts and congruences of integers.

use num_bigint::BigInt;
use padic_slopes::padic::{congruence_margin, padic_valuation, unit_part};
use padic_slopes::{Prime, Result, Valuation};

pub fn run_example() -> Result<Vec<(i64, Valuation)>> {
    let p = Prime::new(3)?;
    let mut rows = Vec::new();
    for x in [0i64, 1, 18, -162, 729] {
        let v = padic_valuation(&BigInt::from(x), p);
        match unit_part(&BigInt::from(x), p) {
            Ok(u) => println!("v_3({x}) = {v}, unit part {u}"),
            Err(_) => println!("v_3({x}) = {v}"),
        }
        rows.push((x, v));
    }
    let margin = congruence_margin(&BigInt::from(100), &BigInt::from(19), p, 10);
    println!("100 and 19 agree mod 3^{margin}");
    Ok(rows)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
