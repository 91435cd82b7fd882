// Smith normal form, abelianisation and crossing-orbit growth.

use std::error::Error;

use special_cube::algebra::{
    abelianization_invariants, crossing_orbit_growth, smith_normal_form, IntMatrix,
};
use special_cube::group::GroupParams;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let m = IntMatrix::parse("[[2, 4], [6, 8]]")?;
    let snf = smith_normal_form(&m);
    assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d);
    print!("D =\n{}", snf.d);

    for (m, k) in [(4, 2), (5, 3), (6, 2)] {
        let params = GroupParams::new(m, k)?;
        println!(
            "{params}: abelianisation {}",
            abelianization_invariants(&params)
        );
    }

    let params = GroupParams::new(4, 2)?;
    for r in [0, 1, 5, 20] {
        println!(
            "radius {r:>2}: {} crossing classes (lower bound)",
            crossing_orbit_growth(&params, r)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
