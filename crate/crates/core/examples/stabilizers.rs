// Read edge stabilisers off the squares at height zero and compare them
// with `⟨σ_{j-1} σ_j⟩`.

use std::error::Error;

use special_cube::group::{GroupParams, Subgroup};
use special_cube::verifier::derive_stabilizer_from_loops;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for (m, k) in [(4, 2), (5, 3), (6, 5)] {
        let params = GroupParams::new(m, k)?;
        for j in 1..=m {
            let derived = derive_stabilizer_from_loops(&params, j)?;
            let expected = Subgroup::cyclic(&(&params.sigma(params.cyc(j, -1)) * &params.sigma(j)));
            assert_eq!(derived, expected);
            println!(
                "{params} j={j}: <{}> of order {}",
                derived.generator(),
                derived.len()
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
