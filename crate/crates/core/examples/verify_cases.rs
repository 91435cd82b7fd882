// Certify every osculation case for one parameter pair.

use std::error::Error;

use special_cube::complex::DEFAULT_SIZE_CAP;
use special_cube::group::GroupParams;
use special_cube::verifier::{all_empty, verify};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GroupParams::new(4, 3)?;
    let certs = verify(&params, DEFAULT_SIZE_CAP)?;
    for c in &certs {
        let sep = c
            .named_character
            .as_ref()
            .filter(|n| n.valid)
            .map(|n| format!("{} = {}", n.name, n.character))
            .or_else(|| c.separating_character.as_ref().map(|ch| ch.to_string()))
            .unwrap_or_else(|| "-".into());
        let j = c.j.map_or("all".into(), |j| j.to_string());
        println!("{:<22} j={j:<3} empty={:<5} {sep}", c.case_id, c.empty);
    }
    assert!(all_empty(&certs));

    // Outside the proven range some intersections are inhabited.
    let small = GroupParams::new(3, 2)?;
    let certs = verify(&small, DEFAULT_SIZE_CAP)?;
    let open = certs.iter().filter(|c| !c.empty).count();
    println!("{small}: {open} non-empty cases");
    assert!(open > 0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
