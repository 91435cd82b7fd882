// Ascending and descending links of built vertices, and the link check.

use std::error::Error;

use special_cube::complex::{build_quotient_complex, check_npc, vertex_link, DEFAULT_SIZE_CAP};
use special_cube::group::GroupParams;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GroupParams::new(4, 3)?;
    let x = build_quotient_complex(&params, -4, 4, DEFAULT_SIZE_CAP)?;
    for h in [0, 1] {
        let v = x
            .vertices()
            .iter()
            .position(|v| v.height == Some(h))
            .expect("vertex at height");
        let link = vertex_link(&x, v)?;
        let up = link.ascending(&x)?.single_cycle_length();
        let down = link.descending(&x)?.single_cycle_length();
        println!(
            "{} (branching {}): ascending cycle {up:?}, descending cycle {down:?}",
            x.vertices()[v].id,
            params.is_branching(h)
        );
    }
    let npc = check_npc(&x);
    println!(
        "links checked at {} vertices: {}",
        npc.vertices_checked,
        if npc.pass { "pass" } else { "fail" }
    );
    assert!(npc.pass);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
