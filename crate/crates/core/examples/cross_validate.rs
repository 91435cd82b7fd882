// Compare the engine's hyperplanes on a built truncation with the closed
// form and the certificates.

use std::error::Error;

use special_cube::complex::DEFAULT_SIZE_CAP;
use special_cube::group::GroupParams;
use special_cube::verifier::cross_validate;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GroupParams::new(4, 2)?;
    let report = cross_validate(&params, -4, 4, 2, DEFAULT_SIZE_CAP)?;
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    assert!(report.partition_agrees);
    assert!(report.agreement);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
