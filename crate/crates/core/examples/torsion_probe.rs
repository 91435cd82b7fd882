// Orders of `φ(a_1)^i ⋯ φ(a_m)^i` under finite images are periodic.

use std::error::Error;

use special_cube::algebra::{
    canonical_images, is_periodic, order_sequence, FiniteGroupElement, Perm,
};
use special_cube::group::GroupParams;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GroupParams::new(5, 3)?;
    let seq = order_sequence(&canonical_images(&params), -9..=9)?;
    println!("{params}: {:?}", seq.values);
    assert_eq!(is_periodic(&seq, 6)?, Some(3));

    // Images in S_4: a 3-cycle and a transposition.
    let images = vec![
        Perm::new(vec![1, 2, 0, 3]).unwrap(),
        Perm::new(vec![0, 1, 3, 2]).unwrap(),
    ];
    let seq = order_sequence(&images, -12..=12)?;
    let period = is_periodic(&seq, 8)?;
    println!(
        "S4 images of orders {:?}: {:?}, period {period:?}",
        images.iter().map(|p| p.element_order()).collect::<Vec<_>>(),
        seq.values
    );
    assert_eq!(period, Some(6));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
