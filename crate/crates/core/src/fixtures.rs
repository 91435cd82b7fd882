//! Small hand-made complexes used as positive and negative controls.
//!
//! The same complexes ship as JSON under `fixtures/`, each next to an
//! `*.expected.json` report.

use crate::complex::{ComplexBuilder, SquareComplex};

/// One vertex, two loops, boundary `a b a⁻¹ b⁻¹`.
pub fn torus() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let v = b.vertex("v", None);
    let a = b.edge("a", v, v, None);
    let e = b.edge("b", v, v, None);
    b.square("s", [(a, true), (e, true), (a, false), (e, false)]);
    b.finish().expect("torus is well formed")
}

/// One vertex, two loops, boundary `a b a b⁻¹`.
pub fn klein_bottle() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let v = b.vertex("v", None);
    let a = b.edge("a", v, v, None);
    let e = b.edge("b", v, v, None);
    b.square("s", [(a, true), (e, true), (a, true), (e, false)]);
    b.finish().expect("klein bottle is well formed")
}

/// Two squares sharing the edge `c`, with their far corners pinched into
/// the single vertex `w`. The hyperplane through `c` meets itself at `w`.
pub fn osculating_wedge() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let p = b.vertex("p", None);
    let q = b.vertex("q", None);
    let w = b.vertex("w", None);
    let b1 = b.vertex("b1", None);
    let b2 = b.vertex("b2", None);
    let c = b.edge("c", p, q, None);
    let g1 = b.edge("g1", q, b1, None);
    let e1 = b.edge("e1", w, b1, None);
    let f1 = b.edge("f1", p, w, None);
    let g2 = b.edge("g2", q, b2, None);
    let e2 = b.edge("e2", w, b2, None);
    let f2 = b.edge("f2", p, w, None);
    b.square("s1", [(c, true), (g1, true), (e1, false), (f1, false)]);
    b.square("s2", [(c, true), (g2, true), (e2, false), (f2, false)]);
    b.finish().expect("wedge is well formed")
}

/// Three squares around a corner vertex `o`, as at the corner of a cube.
pub fn link_triangle() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let names = ["o", "X", "Y", "Z", "XY", "YZ", "XZ"];
    let v: Vec<usize> = names.iter().map(|n| b.vertex(n, None)).collect();
    let (o, vx, vy, vz, xy, yz, xz) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let x = b.edge("x", o, vx, None);
    let y = b.edge("y", o, vy, None);
    let z = b.edge("z", o, vz, None);
    let x_y = b.edge("x-xy", vx, xy, None);
    let y_x = b.edge("y-xy", vy, xy, None);
    let y_z = b.edge("y-yz", vy, yz, None);
    let z_y = b.edge("z-yz", vz, yz, None);
    let z_x = b.edge("z-xz", vz, xz, None);
    let x_z = b.edge("x-xz", vx, xz, None);
    b.square("sxy", [(x, true), (x_y, true), (y_x, false), (y, false)]);
    b.square("syz", [(y, true), (y_z, true), (z_y, false), (z, false)]);
    b.square("szx", [(z, true), (z_x, true), (x_z, false), (x, false)]);
    b.finish().expect("corner is well formed")
}

/// Two distinct squares glued along the adjacent edges `a` and `b`.
pub fn double_adjacency() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let v: Vec<usize> = (0..5).map(|i| b.vertex(&format!("v{i}"), None)).collect();
    let a = b.edge("a", v[0], v[1], None);
    let e = b.edge("b", v[1], v[2], None);
    let c1 = b.edge("c1", v[2], v[3], None);
    let d1 = b.edge("d1", v[3], v[0], None);
    let c2 = b.edge("c2", v[2], v[4], None);
    let d2 = b.edge("d2", v[4], v[0], None);
    b.square("s1", [(a, true), (e, true), (c1, true), (d1, true)]);
    b.square("s2", [(a, true), (e, true), (c2, true), (d2, true)]);
    b.finish().expect("glued pair is well formed")
}

/// A single square on four distinct vertices.
pub fn single_square() -> SquareComplex {
    let mut b = ComplexBuilder::new();
    let v: Vec<usize> = [0, 1, 2, 1]
        .iter()
        .enumerate()
        .map(|(i, &h)| b.vertex(&format!("v{i}"), Some(h)))
        .collect();
    let e0 = b.edge("e0", v[0], v[1], None);
    let e1 = b.edge("e1", v[1], v[2], None);
    let e2 = b.edge("e2", v[3], v[2], None);
    let e3 = b.edge("e3", v[0], v[3], None);
    b.square("s", [(e0, true), (e1, true), (e2, false), (e3, false)]);
    b.finish().expect("square is well formed")
}

/// Every named fixture, in a fixed order.
pub fn all() -> Vec<(&'static str, SquareComplex)> {
    vec![
        ("torus", torus()),
        ("klein_bottle", klein_bottle()),
        ("osculating_wedge", osculating_wedge()),
        ("link_triangle", link_triangle()),
        ("double_adjacency", double_adjacency()),
    ]
}
