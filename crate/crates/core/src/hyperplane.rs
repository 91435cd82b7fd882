//! Hyperplanes of a square complex and the relations between them.
//!
//! Opposite sides of every square are identified; the resulting edge
//! classes are the hyperplanes. Orientation is tracked with a parity
//! union-find so that a class glued to itself with a flip is detected as
//! one-sided. [`interaction_report`] then collects crossings (two classes
//! meeting in a square) and osculations (two edges at a vertex that are
//! not consecutive sides of any square) and derives the four specialness
//! conditions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde_json::{json, Value};
use thiserror::Error;

use crate::complex::{NpcReport, SquareComplex};

#[derive(Debug, Error)]
pub enum HyperplaneError {
    #[error("core restriction needs height metadata; vertex {0} has none")]
    MissingHeight(String),
}

struct ParityUnionFind {
    parent: Vec<usize>,
    parity: Vec<u8>,
    rank: Vec<u8>,
}

impl ParityUnionFind {
    fn new(n: usize) -> Self {
        ParityUnionFind {
            parent: (0..n).collect(),
            parity: vec![0; n],
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        // Walk back from the node nearest the root, accumulating parity.
        let mut acc = 0u8;
        for &node in path.iter().rev() {
            acc ^= self.parity[node];
            self.parity[node] = acc;
            self.parent[node] = root;
        }
        (root, if path.is_empty() { 0 } else { self.parity[x] })
    }

    /// Fails when the union contradicts existing parity.
    fn union(&mut self, a: usize, b: usize, p: u8) -> Result<(), ()> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return if pa ^ pb == p { Ok(()) } else { Err(()) };
        }
        let (child, root) = if self.rank[ra] < self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[child] = root;
        self.parity[child] = pa ^ pb ^ p;
        if self.rank[ra] == self.rank[rb] {
            self.rank[root] += 1;
        }
        Ok(())
    }
}

/// A one-sidedness certificate: gluing `square` forced `edge` to be
/// identified with itself reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OneSidedWitness {
    pub class: usize,
    pub edge: usize,
    pub square: usize,
}

#[derive(Debug, Clone)]
pub struct HyperplanePartition {
    class_of: Vec<usize>,
    orientation: Vec<u8>,
    members: Vec<Vec<usize>>,
    one_sided: Vec<Option<OneSidedWitness>>,
}

impl HyperplanePartition {
    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    pub fn class_of(&self, edge: usize) -> usize {
        self.class_of[edge]
    }

    /// Orientation of `edge` relative to its class representative.
    pub fn orientation(&self, edge: usize) -> u8 {
        self.orientation[edge]
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn is_one_sided(&self, class: usize) -> bool {
        self.one_sided[class].is_some()
    }

    pub fn one_sided_witnesses(&self) -> Vec<OneSidedWitness> {
        self.one_sided.iter().flatten().copied().collect()
    }

    /// Display label of a class.
    pub fn label(&self, class: usize) -> String {
        format!("H{class}")
    }
}

/// Classes are numbered by their smallest edge index.
pub fn partition(x: &SquareComplex) -> HyperplanePartition {
    let n = x.edges().len();
    let mut uf = ParityUnionFind::new(n);
    let mut conflicts: Vec<(usize, usize)> = Vec::new();
    for (si, sq) in x.squares().iter().enumerate() {
        for (a, b) in [(0, 2), (1, 3)] {
            let (sa, sb) = (sq.boundary[a], sq.boundary[b]);
            let p = (sa.dir == sb.dir) as u8;
            if uf.union(sa.edge, sb.edge, p).is_err() {
                conflicts.push((sa.edge, si));
            }
        }
    }
    let mut class_of = vec![usize::MAX; n];
    let mut orientation = vec![0u8; n];
    let mut root_class = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for e in 0..n {
        let (root, par) = uf.find(e);
        if root_class[root] == usize::MAX {
            root_class[root] = members.len();
            members.push(Vec::new());
        }
        class_of[e] = root_class[root];
        orientation[e] = par;
        members[root_class[root]].push(e);
    }
    let mut one_sided = vec![None; members.len()];
    for (edge, square) in conflicts {
        let class = class_of[edge];
        one_sided[class].get_or_insert(OneSidedWitness {
            class,
            edge,
            square,
        });
    }
    HyperplanePartition {
        class_of,
        orientation,
        members,
        one_sided,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CrossingWitness {
    /// Sorted class pair.
    pub classes: (usize, usize),
    pub square: usize,
    /// Representative edges of the two opposite-side pairs.
    pub edges: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OsculationWitness {
    /// Sorted class pair.
    pub classes: (usize, usize),
    pub vertex: usize,
    /// Sorted edge pair.
    pub edges: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct InterOsculation {
    pub classes: (usize, usize),
    pub crossing: CrossingWitness,
    pub osculation: OsculationWitness,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Violations {
    pub self_cross: Vec<CrossingWitness>,
    pub one_sided: Vec<OneSidedWitness>,
    pub self_osc: Vec<OsculationWitness>,
    pub inter_osc: Vec<InterOsculation>,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.self_cross.len() + self.one_sided.len() + self.self_osc.len() + self.inter_osc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

#[derive(Debug, Clone)]
pub struct InteractionReport {
    pub partition: HyperplanePartition,
    pub crossings: BTreeMap<(usize, usize), Vec<CrossingWitness>>,
    pub osculations: BTreeMap<(usize, usize), Vec<OsculationWitness>>,
    pub violations: Violations,
    /// Height window the witnesses were restricted to, if any.
    pub core: Option<(i64, i64)>,
}

fn sorted(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Unordered edge pairs that are consecutive sides of some square.
fn adjacent_pairs(x: &SquareComplex) -> HashSet<(usize, usize)> {
    let mut out = HashSet::new();
    for sq in x.squares() {
        for t in 0..4 {
            let (a, b) = (sq.boundary[t].edge, sq.boundary[(t + 1) % 4].edge);
            out.insert(sorted(a, b));
        }
    }
    out
}

pub fn crossing_witness(
    x: &SquareComplex,
    part: &HyperplanePartition,
    square: usize,
) -> CrossingWitness {
    let b = &x.squares()[square].boundary;
    let (c1, c2) = (part.class_of(b[0].edge), part.class_of(b[1].edge));
    let edges = if c1 <= c2 {
        (b[0].edge, b[1].edge)
    } else {
        (b[1].edge, b[0].edge)
    };
    CrossingWitness {
        classes: sorted(c1, c2),
        square,
        edges,
    }
}

pub fn interaction_report(x: &SquareComplex) -> InteractionReport {
    let part = partition(x);
    let mut crossings: BTreeMap<(usize, usize), Vec<CrossingWitness>> = BTreeMap::new();
    for s in 0..x.squares().len() {
        let w = crossing_witness(x, &part, s);
        crossings.entry(w.classes).or_default().push(w);
    }
    let adjacent = adjacent_pairs(x);
    let mut osculations: BTreeMap<(usize, usize), Vec<OsculationWitness>> = BTreeMap::new();
    for v in 0..x.vertices().len() {
        let inc = x.incident_edges(v);
        for (i, &e) in inc.iter().enumerate() {
            for &f in &inc[i + 1..] {
                if adjacent.contains(&sorted(e, f)) {
                    continue;
                }
                let classes = sorted(part.class_of(e), part.class_of(f));
                osculations
                    .entry(classes)
                    .or_default()
                    .push(OsculationWitness {
                        classes,
                        vertex: v,
                        edges: sorted(e, f),
                    });
            }
        }
    }
    let violations = derive_violations(&part, &crossings, &osculations, None);
    InteractionReport {
        partition: part,
        crossings,
        osculations,
        violations,
        core: None,
    }
}

fn derive_violations(
    part: &HyperplanePartition,
    crossings: &BTreeMap<(usize, usize), Vec<CrossingWitness>>,
    osculations: &BTreeMap<(usize, usize), Vec<OsculationWitness>>,
    one_sided_filter: Option<&dyn Fn(&OneSidedWitness) -> bool>,
) -> Violations {
    let mut v = Violations::default();
    for (&(a, b), ws) in crossings {
        if a == b {
            v.self_cross.extend(ws.iter().copied());
        }
    }
    v.one_sided = part
        .one_sided_witnesses()
        .into_iter()
        .filter(|w| one_sided_filter.is_none_or(|f| f(w)))
        .collect();
    for (&(a, b), ws) in osculations {
        if a == b {
            v.self_osc.extend(ws.iter().copied());
        } else if let Some(cs) = crossings.get(&(a, b)) {
            v.inter_osc.push(InterOsculation {
                classes: (a, b),
                crossing: cs[0],
                osculation: ws[0],
            });
        }
    }
    v
}

impl InteractionReport {
    /// Keep only witnesses whose edges all have top height in `[lo, hi]`,
    /// then recompute the violations. Classes are unchanged.
    pub fn core_restrict(
        &self,
        x: &SquareComplex,
        lo: i64,
        hi: i64,
    ) -> Result<InteractionReport, HyperplaneError> {
        if let Some(v) = x.vertices().iter().find(|v| v.height.is_none()) {
            return Err(HyperplaneError::MissingHeight(v.id.clone()));
        }
        let inside = |e: usize| {
            let h = x.edge_top_height(e).expect("heights checked");
            lo <= h && h <= hi
        };
        let crossings: BTreeMap<_, Vec<_>> = self
            .crossings
            .iter()
            .map(|(k, ws)| {
                let kept = ws
                    .iter()
                    .filter(|w| {
                        x.squares()[w.square]
                            .boundary
                            .iter()
                            .all(|s| inside(s.edge))
                    })
                    .copied()
                    .collect::<Vec<_>>();
                (*k, kept)
            })
            .filter(|(_, ws)| !ws.is_empty())
            .collect();
        let osculations: BTreeMap<_, Vec<_>> = self
            .osculations
            .iter()
            .map(|(k, ws)| {
                let kept = ws
                    .iter()
                    .filter(|w| inside(w.edges.0) && inside(w.edges.1))
                    .copied()
                    .collect::<Vec<_>>();
                (*k, kept)
            })
            .filter(|(_, ws)| !ws.is_empty())
            .collect();
        let keep_one_sided = |w: &OneSidedWitness| inside(w.edge);
        let violations = derive_violations(
            &self.partition,
            &crossings,
            &osculations,
            Some(&keep_one_sided),
        );
        Ok(InteractionReport {
            partition: self.partition.clone(),
            crossings,
            osculations,
            violations,
            core: Some((lo, hi)),
        })
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn osculation_count(&self) -> usize {
        self.osculations.len()
    }

    /// Interaction graph: classes as nodes, solid edges for crossings,
    /// dashed edges for osculations.
    pub fn to_dot(&self, x: &SquareComplex) -> String {
        let part = &self.partition;
        let mut out = String::from("graph hyperplanes {\n");
        for c in 0..part.class_count() {
            let rep = &x.edges()[part.members(c)[0]].id;
            let shape = if part.is_one_sided(c) {
                ", shape=box"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  \"{}\" [label=\"{} {}\"{}];",
                part.label(c),
                part.label(c),
                rep,
                shape
            );
        }
        for &(a, b) in self.crossings.keys() {
            let _ = writeln!(out, "  \"{}\" -- \"{}\";", part.label(a), part.label(b));
        }
        for &(a, b) in self.osculations.keys() {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [style=dashed];",
                part.label(a),
                part.label(b)
            );
        }
        out.push_str("}\n");
        out
    }

    /// Report document with witness cell ids.
    pub fn to_json(&self, x: &SquareComplex, npc: Option<&NpcReport>) -> Value {
        let part = &self.partition;
        let label = |c: usize| part.label(c);
        let eid = |e: usize| x.edges()[e].id.clone();
        let sid = |s: usize| x.squares()[s].id.clone();
        let vid = |v: usize| x.vertices()[v].id.clone();
        let osc = |w: &OsculationWitness| {
            json!({
                "vertex": vid(w.vertex),
                "edges": [eid(w.edges.0), eid(w.edges.1)],
                "bigon": shares_both_ends(x, w.edges.0, w.edges.1),
            })
        };
        let cross = |w: &CrossingWitness| json!({"square": sid(w.square), "edges": [eid(w.edges.0), eid(w.edges.1)]});
        let mut one_sided_classes: Vec<String> = (0..part.class_count())
            .filter(|&c| part.is_one_sided(c))
            .map(label)
            .collect();
        one_sided_classes.dedup();
        let v = &self.violations;
        let mut doc = json!({
            "classes": part.class_count(),
            "one_sided": one_sided_classes,
            "crossing_pairs": self.crossing_count(),
            "osculating_pairs": self.osculation_count(),
            "violations": {
                "self_cross": v.self_cross.iter().map(|w| {
                    let mut e = cross(w);
                    e["class"] = json!(label(w.classes.0));
                    e
                }).collect::<Vec<_>>(),
                "one_sided": v.one_sided.iter().map(|w| json!({
                    "class": label(w.class), "edge": eid(w.edge), "square": sid(w.square),
                })).collect::<Vec<_>>(),
                "self_osc": v.self_osc.iter().map(|w| {
                    let mut e = osc(w);
                    e["class"] = json!(label(w.classes.0));
                    e
                }).collect::<Vec<_>>(),
                "inter_osc": v.inter_osc.iter().map(|w| json!({
                    "classes": [label(w.classes.0), label(w.classes.1)],
                    "crossing": cross(&w.crossing),
                    "osculation": osc(&w.osculation),
                })).collect::<Vec<_>>(),
            },
            "core": self.core.map(|(lo, hi)| json!({"lo": lo, "hi": hi})),
        });
        if let Some(npc) = npc {
            doc["npc"] = serde_json::to_value(npc).expect("npc report serialises");
        }
        doc
    }
}

fn shares_both_ends(x: &SquareComplex, e: usize, f: usize) -> bool {
    let (a, b) = (&x.edges()[e], &x.edges()[f]);
    let ea: BTreeSet<usize> = [a.tail, a.head].into();
    let eb: BTreeSet<usize> = [b.tail, b.head].into();
    ea == eb && ea.len() == 2
}

/// Re-check a crossing witness by reading the square directly.
pub fn revalidate_crossing(
    x: &SquareComplex,
    part: &HyperplanePartition,
    w: &CrossingWitness,
) -> bool {
    let Some(sq) = x.squares().get(w.square) else {
        return false;
    };
    let b = &sq.boundary;
    let pairs_ok = part.class_of(b[0].edge) == part.class_of(b[2].edge)
        && part.class_of(b[1].edge) == part.class_of(b[3].edge);
    let got = sorted(part.class_of(b[0].edge), part.class_of(b[1].edge));
    let edges_ok =
        [b[0].edge, b[1].edge].contains(&w.edges.0) && [b[0].edge, b[1].edge].contains(&w.edges.1);
    pairs_ok && got == w.classes && edges_ok
}

/// Re-check an osculation witness by scanning every square for a corner
/// made of the two edges.
pub fn revalidate_osculation(
    x: &SquareComplex,
    part: &HyperplanePartition,
    w: &OsculationWitness,
) -> bool {
    let (e, f) = w.edges;
    if e == f || e >= x.edges().len() || f >= x.edges().len() {
        return false;
    }
    let touches = |edge: usize| {
        let ed = &x.edges()[edge];
        ed.tail == w.vertex || ed.head == w.vertex
    };
    if !touches(e) || !touches(f) {
        return false;
    }
    let consecutive = x.squares().iter().any(|sq| {
        (0..4).any(|t| {
            let (a, b) = (sq.boundary[t].edge, sq.boundary[(t + 1) % 4].edge);
            (a == e && b == f) || (a == f && b == e)
        })
    });
    !consecutive && sorted(part.class_of(e), part.class_of(f)) == w.classes
}

/// Re-check a one-sidedness witness: walking the chain of opposite-side
/// identifications from `edge` must return to it reversed.
pub fn revalidate_one_sided(x: &SquareComplex, w: &OneSidedWitness) -> bool {
    // Breadth-first search over (edge, orientation) states.
    let n = x.edges().len();
    if w.edge >= n {
        return false;
    }
    let mut seen = vec![[false; 2]; n];
    let mut queue = std::collections::VecDeque::from([(w.edge, 0u8)]);
    seen[w.edge][0] = true;
    while let Some((e, o)) = queue.pop_front() {
        for &s in x.squares_of_edge(e) {
            let b = &x.squares()[s].boundary;
            for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
                if b[i].edge != e {
                    continue;
                }
                let next = (b[j].edge, o ^ (b[i].dir == b[j].dir) as u8);
                if !seen[next.0][next.1 as usize] {
                    seen[next.0][next.1 as usize] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    seen[w.edge][1]
}
