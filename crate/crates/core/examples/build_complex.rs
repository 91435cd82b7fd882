// Build a truncation of the quotient complex and round-trip it through JSON.

use std::error::Error;

use special_cube::complex::{build_quotient_complex, SquareComplex, DEFAULT_SIZE_CAP};
use special_cube::group::GroupParams;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GroupParams::new(4, 2)?;
    let x = build_quotient_complex(&params, -2, 2, DEFAULT_SIZE_CAP)?;
    println!("{params}: {x}");
    assert_eq!(
        (x.vertices().len(), x.edges().len(), x.squares().len()),
        (64, 256, 192)
    );

    let text = x.save_json();
    let back = SquareComplex::load_json(&text)?;
    assert_eq!(back.save_json(), text);
    println!("round trip: {} bytes", text.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
