// Run the hyperplane engine and the link check on the bundled fixtures.

use std::error::Error;

use special_cube::complex::check_npc;
use special_cube::fixtures;
use special_cube::hyperplane::interaction_report;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for (name, x) in fixtures::all() {
        let report = interaction_report(&x);
        let npc = check_npc(&x);
        let v = &report.violations;
        println!(
            "{name:<18} classes {:>2}  self_cross {}  one_sided {}  self_osc {}  inter_osc {}  npc {}",
            report.partition.class_count(),
            v.self_cross.len(),
            v.one_sided.len(),
            v.self_osc.len(),
            v.inter_osc.len(),
            if npc.pass { "ok" } else { "fail" },
        );
    }
    let torus = fixtures::torus();
    assert!(interaction_report(&torus).violations.is_empty());
    assert!(!interaction_report(&fixtures::klein_bottle())
        .violations
        .one_sided
        .is_empty());
    assert!(!check_npc(&fixtures::link_triangle()).pass);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
