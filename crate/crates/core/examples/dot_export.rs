// Export the hyperplane interaction graph of a fixture as DOT.

use std::error::Error;

use special_cube::fixtures;
use special_cube::hyperplane::interaction_report;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let x = fixtures::osculating_wedge();
    let dot = interaction_report(&x).to_dot(&x);
    print!("{dot}");
    assert!(dot.starts_with("graph hyperplanes {"));
    assert!(dot.contains("style=dashed"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
