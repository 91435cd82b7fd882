//! Combinatorial square complexes.
//!
//! A [`SquareComplex`] is a list of vertices, oriented edges and squares,
//! each square being a closed walk of four edges with traversal directions.
//! Cells are addressed by dense indices internally and by stable string ids
//! externally.
//!
//! [`build_quotient_complex`] materialises a height-truncation of the
//! quotient complex for parameters `(m, k)`: vertices are `(height, coeff)`
//! modulo the vertex stabiliser `⟨d_height⟩`, edges are `(height, type,
//! coeff)` in free orbits, and each square `(height, type, coeff)` is glued
//! along the four edges given by [`square_boundary`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::group::{Elem, GroupError, GroupParams};

pub const DEFAULT_SIZE_CAP: u64 = 65536;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("height span [{h_min}, {h_max}] too small: need h_max >= h_min + 2")]
    SpanTooSmall { h_min: i64, h_max: i64 },
    #[error("group order {order} exceeds size cap {cap}")]
    SizeCap { order: String, cap: u64 },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("missing height metadata on vertex {0}")]
    MissingHeight(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> ComplexError {
    ComplexError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Traversal direction of an edge along a square boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dir {
    #[serde(rename = "+")]
    Forward,
    #[serde(rename = "-")]
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Side {
    pub edge: usize,
    pub dir: Dir,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub height: Option<i64>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub ty: Option<usize>,
    pub extra: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Square {
    pub id: String,
    pub boundary: [Side; 4],
    pub extra: Map<String, Value>,
}

/// Which end of an edge sits at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum End {
    Tail,
    Head,
}

/// Vertex of the quotient complex: height and canonical coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexRef {
    pub height: i64,
    pub coeff: Elem,
}

/// Edge `coeff · u_type^height`, joining height `height - 1` to `height`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRef {
    pub height: i64,
    pub ty: usize,
    pub coeff: Elem,
}

/// Square `coeff · s_type^height` with mid height `height`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareRef {
    pub height: i64,
    pub ty: usize,
    pub coeff: Elem,
}

/// Canonical representative of `g · X^i`.
///
/// The stabiliser `⟨d_i⟩` is the set of constant vectors whose value is a
/// multiple of `gcd(i, k)`, so reducing the first coordinate modulo that gcd
/// picks one element per orbit. For prime `k` this zeroes the first
/// coordinate at branching heights and leaves `g` alone otherwise.
pub fn canonical_vertex(params: &GroupParams, g: &Elem, i: i64) -> VertexRef {
    let k = params.k();
    let s = num_integer::gcd(params.residue(i), k);
    let first = g.exps()[0];
    let shift = first - first % s;
    let coeff = g * &params.diagonal(-(shift as i64));
    VertexRef { height: i, coeff }
}

impl EdgeRef {
    pub fn tail(&self, params: &GroupParams) -> VertexRef {
        let c = &self.coeff * &params.prefix(self.ty - 1);
        canonical_vertex(params, &c, self.height - 1)
    }

    pub fn head(&self, params: &GroupParams) -> VertexRef {
        canonical_vertex(params, &self.coeff, self.height)
    }
}

/// The four boundary edges of a square, walked from the bottom vertex:
/// bottom-right and top-right upwards, then top-left and bottom-left
/// downwards. Opposite pairs are (BR, TL) and (TR, BL).
pub fn square_boundary(
    params: &GroupParams,
    s: &SquareRef,
) -> Result<[(EdgeRef, Dir); 4], GroupError> {
    params.check_type(s.ty)?;
    let (g, j, i, m) = (&s.coeff, s.ty, s.height, params.m());
    let e = |coeff: Elem, ty: usize, height: i64| EdgeRef { height, ty, coeff };
    let br = e(g * &params.prefix(j), j, i);
    let tl = e(g.clone(), j, i + 1);
    let (tr, bl) = if j < m {
        (
            e(g.clone(), j + 1, i + 1),
            e(g * &params.prefix(j - 1), j + 1, i),
        )
    } else {
        let d = params.diagonal(i + 1);
        let bl = &(g * &d) * &params.sigma(m).inverse();
        (e(g * &d, 1, i + 1), e(bl, 1, i))
    };
    Ok([
        (br, Dir::Forward),
        (tr, Dir::Forward),
        (tl, Dir::Backward),
        (bl, Dir::Backward),
    ])
}

/// Typed cell data for complexes produced by the builder.
#[derive(Debug, Clone)]
pub struct BuiltCells {
    pub params: GroupParams,
    pub h_min: i64,
    pub h_max: i64,
    pub vertices: Vec<VertexRef>,
    pub edges: Vec<EdgeRef>,
    pub squares: Vec<SquareRef>,
    vertex_index: HashMap<VertexRef, usize>,
    edge_index: HashMap<EdgeRef, usize>,
}

impl BuiltCells {
    pub fn vertex_index(&self, v: &VertexRef) -> Option<usize> {
        self.vertex_index.get(v).copied()
    }

    pub fn edge_index(&self, e: &EdgeRef) -> Option<usize> {
        self.edge_index.get(e).copied()
    }
}

#[derive(Debug, Clone)]
pub struct SquareComplex {
    params: Option<GroupParams>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    squares: Vec<Square>,
    extra: Map<String, Value>,
    vertex_ids: HashMap<String, usize>,
    edge_ids: HashMap<String, usize>,
    incident: Vec<Vec<usize>>,
    edge_squares: Vec<Vec<usize>>,
    built: Option<BuiltCells>,
}

fn side_start(edges: &[Edge], s: Side) -> usize {
    let e = &edges[s.edge];
    match s.dir {
        Dir::Forward => e.tail,
        Dir::Backward => e.head,
    }
}

fn side_end(edges: &[Edge], s: Side) -> usize {
    let e = &edges[s.edge];
    match s.dir {
        Dir::Forward => e.head,
        Dir::Backward => e.tail,
    }
}

impl SquareComplex {
    /// Assemble a complex from raw cells, validating references and the
    /// closure of every square boundary.
    pub fn from_cells(
        params: Option<GroupParams>,
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        squares: Vec<Square>,
    ) -> Result<SquareComplex, ComplexError> {
        let mut vertex_ids = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if vertex_ids.insert(v.id.clone(), i).is_some() {
                return Err(schema(
                    format!("vertices[{i}].id"),
                    format!("duplicate id {}", v.id),
                ));
            }
        }
        let mut edge_ids = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(schema(format!("edges[{i}]"), "dangling vertex reference"));
            }
            if edge_ids.insert(e.id.clone(), i).is_some() {
                return Err(schema(
                    format!("edges[{i}].id"),
                    format!("duplicate id {}", e.id),
                ));
            }
        }
        let mut square_ids = BTreeSet::new();
        for (i, s) in squares.iter().enumerate() {
            if !square_ids.insert(s.id.as_str()) {
                return Err(schema(
                    format!("squares[{i}].id"),
                    format!("duplicate id {}", s.id),
                ));
            }
            for (t, side) in s.boundary.iter().enumerate() {
                if side.edge >= edges.len() {
                    return Err(schema(
                        format!("squares[{i}].boundary[{t}]"),
                        "dangling edge reference",
                    ));
                }
            }
            for t in 0..4 {
                let next = s.boundary[(t + 1) % 4];
                if side_end(&edges, s.boundary[t]) != side_start(&edges, next) {
                    return Err(schema(
                        format!("squares[{i}].boundary"),
                        format!("boundary walk of {} does not close at side {t}", s.id),
                    ));
                }
            }
        }
        let mut incident = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incident[e.tail].push(i);
            if e.head != e.tail {
                incident[e.head].push(i);
            }
        }
        let mut edge_squares = vec![Vec::new(); edges.len()];
        for (i, s) in squares.iter().enumerate() {
            for side in &s.boundary {
                if edge_squares[side.edge].last() != Some(&i) {
                    edge_squares[side.edge].push(i);
                }
            }
        }
        Ok(SquareComplex {
            params,
            vertices,
            edges,
            squares,
            extra: Map::new(),
            vertex_ids,
            edge_ids,
            incident,
            edge_squares,
            built: None,
        })
    }

    pub fn params(&self) -> Option<&GroupParams> {
        self.params.as_ref()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn built(&self) -> Option<&BuiltCells> {
        self.built.as_ref()
    }

    pub fn vertex_by_id(&self, id: &str) -> Option<usize> {
        self.vertex_ids.get(id).copied()
    }

    pub fn edge_by_id(&self, id: &str) -> Option<usize> {
        self.edge_ids.get(id).copied()
    }

    /// Distinct edges with at least one end at `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Squares whose boundary uses edge `e`, ascending.
    pub fn squares_of_edge(&self, e: usize) -> &[usize] {
        &self.edge_squares[e]
    }

    pub fn side_start(&self, s: Side) -> usize {
        side_start(&self.edges, s)
    }

    pub fn side_end(&self, s: Side) -> usize {
        side_end(&self.edges, s)
    }

    /// Height of the higher endpoint of an edge, if heights are known.
    pub fn edge_top_height(&self, e: usize) -> Option<i64> {
        let edge = &self.edges[e];
        let a = self.vertices[edge.tail].height?;
        let b = self.vertices[edge.head].height?;
        Some(a.max(b))
    }

    pub fn has_heights(&self) -> bool {
        self.vertices.iter().all(|v| v.height.is_some())
    }

    /// Corners of every square as `(vertex, side, next side)`.
    pub fn corners(&self, sq: usize) -> [(usize, Side, Side); 4] {
        let b = &self.squares[sq].boundary;
        std::array::from_fn(|t| {
            let (s, n) = (b[t], b[(t + 1) % 4]);
            (self.side_end(s), s, n)
        })
    }
}

/// Build the truncation of the quotient complex on heights `[h_min, h_max]`.
pub fn build_quotient_complex(
    params: &GroupParams,
    h_min: i64,
    h_max: i64,
    size_cap: u64,
) -> Result<SquareComplex, ComplexError> {
    if h_max < h_min + 2 {
        return Err(ComplexError::SpanTooSmall { h_min, h_max });
    }
    match params.order() {
        Some(n) if n <= size_cap => {}
        other => {
            return Err(ComplexError::SizeCap {
                order: other.map_or_else(
                    || format!("{}^{}", params.k(), params.m()),
                    |n| n.to_string(),
                ),
                cap: size_cap,
            })
        }
    }
    let elements: Vec<Elem> = params.elements().collect();

    let mut vrefs = Vec::new();
    for h in h_min..=h_max {
        let layer: BTreeSet<VertexRef> = elements
            .iter()
            .map(|g| canonical_vertex(params, g, h))
            .collect();
        vrefs.extend(layer);
    }
    let mut erefs = Vec::new();
    for h in h_min + 1..=h_max {
        for ty in 1..=params.m() {
            erefs.extend(elements.iter().map(|g| EdgeRef {
                height: h,
                ty,
                coeff: g.clone(),
            }));
        }
    }
    let mut srefs = Vec::new();
    for h in h_min + 1..h_max {
        for ty in 1..=params.m() {
            srefs.extend(elements.iter().map(|g| SquareRef {
                height: h,
                ty,
                coeff: g.clone(),
            }));
        }
    }

    let vertex_index: HashMap<VertexRef, usize> = vrefs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let edge_index: HashMap<EdgeRef, usize> = erefs
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect();

    let vertices = vrefs
        .iter()
        .map(|v| Vertex {
            id: vertex_id(v),
            height: Some(v.height),
            extra: Map::new(),
        })
        .collect();
    let edges = erefs
        .iter()
        .map(|e| Edge {
            id: edge_id(e),
            tail: vertex_index[&e.tail(params)],
            head: vertex_index[&e.head(params)],
            ty: Some(e.ty),
            extra: Map::new(),
        })
        .collect();
    let mut squares = Vec::with_capacity(srefs.len());
    for s in &srefs {
        let bd = square_boundary(params, s)?;
        squares.push(Square {
            id: square_id(s),
            boundary: bd.map(|(e, dir)| Side {
                edge: edge_index[&e],
                dir,
            }),
            extra: Map::new(),
        });
    }

    let mut complex = SquareComplex::from_cells(Some(*params), vertices, edges, squares)?;
    complex.built = Some(BuiltCells {
        params: *params,
        h_min,
        h_max,
        vertices: vrefs,
        edges: erefs,
        squares: srefs,
        vertex_index,
        edge_index,
    });
    Ok(complex)
}

fn join_exps(e: &Elem) -> String {
    e.exps()
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn vertex_id(v: &VertexRef) -> String {
    format!("v/{}/{}", v.height, join_exps(&v.coeff))
}

pub fn edge_id(e: &EdgeRef) -> String {
    format!("e/{}/{}/{}", e.height, e.ty, join_exps(&e.coeff))
}

pub fn square_id(s: &SquareRef) -> String {
    format!("s/{}/{}/{}", s.height, s.ty, join_exps(&s.coeff))
}

/// Parse a built-complex cell id into `(kind, height, type, coeff)`.
fn parse_cell_id(params: &GroupParams, id: &str) -> Option<(char, i64, usize, Elem)> {
    let mut parts = id.split('/');
    let kind = parts.next()?.chars().next()?;
    let height: i64 = parts.next()?.parse().ok()?;
    let ty = if kind == 'v' {
        0
    } else {
        parts.next()?.parse().ok()?
    };
    let exps: Vec<i64> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
    let coeff = params.elem(&exps).ok()?;
    if coeff.exps().iter().zip(&exps).any(|(&a, &b)| a as i64 != b) {
        return None;
    }
    Some((kind, height, ty, coeff))
}

impl SquareComplex {
    /// Recover typed cell data from ids when they match the builder's
    /// incidence exactly.
    fn recover_built(&mut self) {
        let Some(params) = self.params else { return };
        let mut vrefs = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            match parse_cell_id(&params, &v.id) {
                Some(('v', h, _, c)) if Some(h) == v.height => {
                    let r = VertexRef {
                        height: h,
                        coeff: c,
                    };
                    if canonical_vertex(&params, &r.coeff, h) != r {
                        return;
                    }
                    vrefs.push(r);
                }
                _ => return,
            }
        }
        let mut erefs = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            match parse_cell_id(&params, &e.id) {
                Some(('e', h, ty, c)) if (1..=params.m()).contains(&ty) && e.ty == Some(ty) => {
                    let r = EdgeRef {
                        height: h,
                        ty,
                        coeff: c,
                    };
                    if vrefs[e.tail] != r.tail(&params) || vrefs[e.head] != r.head(&params) {
                        return;
                    }
                    erefs.push(r);
                }
                _ => return,
            }
        }
        let edge_index: HashMap<EdgeRef, usize> = erefs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, e)| (e, i))
            .collect();
        let mut srefs = Vec::with_capacity(self.squares.len());
        for s in &self.squares {
            let r = match parse_cell_id(&params, &s.id) {
                Some(('s', h, ty, c)) if (1..=params.m()).contains(&ty) => SquareRef {
                    height: h,
                    ty,
                    coeff: c,
                },
                _ => return,
            };
            let Ok(bd) = square_boundary(&params, &r) else {
                return;
            };
            for (side, (e, dir)) in s.boundary.iter().zip(bd.iter()) {
                if edge_index.get(e) != Some(&side.edge) || side.dir != *dir {
                    return;
                }
            }
            srefs.push(r);
        }
        let heights = vrefs.iter().map(|v| v.height);
        let (Some(h_min), Some(h_max)) = (heights.clone().min(), heights.max()) else {
            return;
        };
        let vertex_index = vrefs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        self.built = Some(BuiltCells {
            params,
            h_min,
            h_max,
            vertices: vrefs,
            edges: erefs,
            squares: srefs,
            vertex_index,
            edge_index,
        });
    }
}

// ---------------------------------------------------------------------------
// Links

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LinkNode {
    pub edge: usize,
    pub end: End,
}

/// Link of a vertex: one node per incident edge-end, one adjacency per
/// square corner at the vertex.
#[derive(Debug, Clone)]
pub struct LinkGraph {
    pub vertex: usize,
    pub nodes: Vec<LinkNode>,
    /// `(node, node, square)` with node indices into `nodes`.
    pub adjacencies: Vec<(usize, usize, usize)>,
}

pub fn vertex_link(x: &SquareComplex, v: usize) -> Result<LinkGraph, ComplexError> {
    if v >= x.vertices.len() {
        return Err(ComplexError::UnknownVertex(v.to_string()));
    }
    let mut nodes = Vec::new();
    for &e in x.incident_edges(v) {
        let edge = &x.edges[e];
        if edge.tail == v {
            nodes.push(LinkNode {
                edge: e,
                end: End::Tail,
            });
        }
        if edge.head == v {
            nodes.push(LinkNode {
                edge: e,
                end: End::Head,
            });
        }
    }
    nodes.sort();
    let index: HashMap<LinkNode, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut adjacencies = Vec::new();
    let mut seen_squares = BTreeSet::new();
    for &e in x.incident_edges(v) {
        seen_squares.extend(x.squares_of_edge(e).iter().copied());
    }
    for sq in seen_squares {
        for (w, s, n) in x.corners(sq) {
            if w != v {
                continue;
            }
            let a = LinkNode {
                edge: s.edge,
                end: if s.dir == Dir::Forward {
                    End::Head
                } else {
                    End::Tail
                },
            };
            let b = LinkNode {
                edge: n.edge,
                end: if n.dir == Dir::Forward {
                    End::Tail
                } else {
                    End::Head
                },
            };
            adjacencies.push((index[&a], index[&b], sq));
        }
    }
    Ok(LinkGraph {
        vertex: v,
        nodes,
        adjacencies,
    })
}

impl LinkGraph {
    fn neighbours(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.nodes.len()];
        for &(a, b, _) in &self.adjacencies {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    /// Subgraph induced on the nodes selected by `keep`.
    pub fn induced(&self, keep: impl Fn(&LinkNode) -> bool) -> LinkGraph {
        let mut remap = vec![None; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if keep(n) {
                remap[i] = Some(nodes.len());
                nodes.push(*n);
            }
        }
        let adjacencies = self
            .adjacencies
            .iter()
            .filter_map(|&(a, b, s)| Some((remap[a]?, remap[b]?, s)))
            .collect();
        LinkGraph {
            vertex: self.vertex,
            nodes,
            adjacencies,
        }
    }

    /// Nodes whose edge leaves the vertex upwards.
    pub fn ascending(&self, x: &SquareComplex) -> Result<LinkGraph, ComplexError> {
        self.by_direction(x, true)
    }

    /// Nodes whose edge leaves the vertex downwards.
    pub fn descending(&self, x: &SquareComplex) -> Result<LinkGraph, ComplexError> {
        self.by_direction(x, false)
    }

    fn by_direction(&self, x: &SquareComplex, up: bool) -> Result<LinkGraph, ComplexError> {
        let here = x.vertices[self.vertex]
            .height
            .ok_or_else(|| ComplexError::MissingHeight(x.vertices[self.vertex].id.clone()))?;
        let mut other_heights = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let e = &x.edges[n.edge];
            let other = if n.end == End::Tail { e.head } else { e.tail };
            let h = x.vertices[other]
                .height
                .ok_or_else(|| ComplexError::MissingHeight(x.vertices[other].id.clone()))?;
            other_heights.push((*n, h));
        }
        let lookup: HashMap<LinkNode, i64> = other_heights.into_iter().collect();
        Ok(self.induced(|n| {
            if up {
                lookup[n] > here
            } else {
                lookup[n] < here
            }
        }))
    }

    /// Length of the cycle if the graph is a single simple cycle.
    pub fn single_cycle_length(&self) -> Option<usize> {
        let n = self.nodes.len();
        if n < 3 || self.adjacencies.len() != n {
            return None;
        }
        let adj = self.neighbours();
        if adj.iter().any(|a| a.len() != 2) {
            return None;
        }
        let (mut prev, mut cur, mut steps) = (0usize, *adj[0].iter().next()?, 1usize);
        while cur != 0 {
            let next = *adj[cur].iter().find(|&&w| w != prev)?;
            prev = cur;
            cur = next;
            steps += 1;
            if steps > n {
                return None;
            }
        }
        (steps == n).then_some(n)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacencies
            .iter()
            .map(|&(a, b, _)| (a == node) as usize + (b == node) as usize)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NpcFailureKind {
    SelfAdjacency,
    DoubleAdjacency,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NpcFailure {
    pub vertex: String,
    pub kind: NpcFailureKind,
    /// Edge ids of the link nodes involved.
    pub edges: Vec<String>,
    pub squares: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NpcReport {
    pub vertices_checked: usize,
    pub pass: bool,
    pub failures: Vec<NpcFailure>,
}

/// Every link must be a simple triangle-free graph.
pub fn check_npc(x: &SquareComplex) -> NpcReport {
    let mut failures = Vec::new();
    for v in 0..x.vertices.len() {
        let link = vertex_link(x, v).expect("vertex in range");
        failures.extend(link_failures(x, &link));
    }
    NpcReport {
        vertices_checked: x.vertices.len(),
        pass: failures.is_empty(),
        failures,
    }
}

fn link_failures(x: &SquareComplex, link: &LinkGraph) -> Vec<NpcFailure> {
    let vid = &x.vertices[link.vertex].id;
    let node_edge = |i: usize| x.edges[link.nodes[i].edge].id.clone();
    let sq = |s: usize| x.squares[s].id.clone();
    let mut out = Vec::new();
    let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
    for &(a, b, s) in &link.adjacencies {
        if a == b {
            out.push(NpcFailure {
                vertex: vid.clone(),
                kind: NpcFailureKind::SelfAdjacency,
                edges: vec![node_edge(a)],
                squares: vec![sq(s)],
            });
            continue;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&first) = pairs.get(&key) {
            out.push(NpcFailure {
                vertex: vid.clone(),
                kind: NpcFailureKind::DoubleAdjacency,
                edges: vec![node_edge(key.0), node_edge(key.1)],
                squares: vec![sq(first), sq(s)],
            });
        } else {
            pairs.insert(key, s);
        }
    }
    let adj = link.neighbours();
    let mut keys: Vec<_> = pairs.into_iter().collect();
    keys.sort();
    for ((a, b), _) in &keys {
        for &c in adj[*a].intersection(&adj[*b]) {
            if c > *b && c != *a {
                let find = |p: usize, q: usize| {
                    let key = (p.min(q), p.max(q));
                    keys.iter().find(|(k, _)| *k == key).map(|(_, s)| sq(*s))
                };
                out.push(NpcFailure {
                    vertex: vid.clone(),
                    kind: NpcFailureKind::Triangle,
                    edges: vec![node_edge(*a), node_edge(*b), node_edge(c)],
                    squares: [find(*a, *b), find(*b, c), find(*a, c)]
                        .into_iter()
                        .flatten()
                        .collect(),
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct ComplexDoc {
    #[serde(default)]
    params: Option<GroupParams>,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
    squares: Vec<SquareDoc>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: String,
    #[serde(default)]
    height: Option<i64>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: String,
    tail: String,
    head: String,
    #[serde(rename = "type", default)]
    ty: Option<usize>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct SquareDoc {
    id: String,
    boundary: Vec<SideDoc>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct SideDoc {
    edge: String,
    dir: Dir,
}

impl SquareComplex {
    pub fn to_json_value(&self) -> Value {
        let doc = ComplexDoc {
            params: self.params,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDoc {
                    id: v.id.clone(),
                    height: v.height,
                    extra: v.extra.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    tail: self.vertices[e.tail].id.clone(),
                    head: self.vertices[e.head].id.clone(),
                    ty: e.ty,
                    extra: e.extra.clone(),
                })
                .collect(),
            squares: self
                .squares
                .iter()
                .map(|s| SquareDoc {
                    id: s.id.clone(),
                    boundary: s
                        .boundary
                        .iter()
                        .map(|side| SideDoc {
                            edge: self.edges[side.edge].id.clone(),
                            dir: side.dir,
                        })
                        .collect(),
                    extra: s.extra.clone(),
                })
                .collect(),
            extra: self.extra.clone(),
        };
        serde_json::to_value(doc).expect("complex serialises")
    }

    pub fn save_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("complex serialises")
    }

    pub fn load_json(text: &str) -> Result<SquareComplex, ComplexError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: ComplexDoc = serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            schema(path, err.into_inner().to_string())
        })?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ComplexDoc) -> Result<SquareComplex, ComplexError> {
        let vertex_ids: HashMap<&str, usize> = doc
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (i, e) in doc.edges.iter().enumerate() {
            let lookup = |id: &str, field: &str| {
                vertex_ids.get(id).copied().ok_or_else(|| {
                    schema(
                        format!("edges[{i}].{field}"),
                        format!("unknown vertex {id}"),
                    )
                })
            };
            edges.push(Edge {
                id: e.id.clone(),
                tail: lookup(&e.tail, "tail")?,
                head: lookup(&e.head, "head")?,
                ty: e.ty,
                extra: e.extra.clone(),
            });
        }
        let edge_ids: HashMap<&str, usize> = doc
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let mut squares = Vec::with_capacity(doc.squares.len());
        for (i, s) in doc.squares.iter().enumerate() {
            if s.boundary.len() != 4 {
                return Err(schema(
                    format!("squares[{i}].boundary"),
                    format!("expected 4 sides, found {}", s.boundary.len()),
                ));
            }
            let mut sides = [Side {
                edge: 0,
                dir: Dir::Forward,
            }; 4];
            for (t, side) in s.boundary.iter().enumerate() {
                let edge = edge_ids.get(side.edge.as_str()).copied().ok_or_else(|| {
                    schema(
                        format!("squares[{i}].boundary[{t}].edge"),
                        format!("unknown edge {}", side.edge),
                    )
                })?;
                sides[t] = Side {
                    edge,
                    dir: side.dir,
                };
            }
            squares.push(Square {
                id: s.id.clone(),
                boundary: sides,
                extra: s.extra.clone(),
            });
        }
        let vertices = doc
            .vertices
            .into_iter()
            .map(|v| Vertex {
                id: v.id,
                height: v.height,
                extra: v.extra,
            })
            .collect();
        let mut x = SquareComplex::from_cells(doc.params, vertices, edges, squares)?;
        x.extra = doc.extra;
        x.recover_built();
        Ok(x)
    }
}

impl fmt::Display for SquareComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vertices, {} edges, {} squares",
            self.vertices.len(),
            self.edges.len(),
            self.squares.len()
        )
    }
}

/// Incremental construction of small hand-made complexes.
#[derive(Debug, Default)]
pub struct ComplexBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    squares: Vec<Square>,
}

impl ComplexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: &str, height: Option<i64>) -> usize {
        self.vertices.push(Vertex {
            id: id.to_string(),
            height,
            extra: Map::new(),
        });
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, id: &str, tail: usize, head: usize, ty: Option<usize>) -> usize {
        self.edges.push(Edge {
            id: id.to_string(),
            tail,
            head,
            ty,
            extra: Map::new(),
        });
        self.edges.len() - 1
    }

    /// `sides` are `(edge, forward?)` pairs.
    pub fn square(&mut self, id: &str, sides: [(usize, bool); 4]) -> usize {
        self.squares.push(Square {
            id: id.to_string(),
            boundary: sides.map(|(edge, fwd)| Side {
                edge,
                dir: if fwd { Dir::Forward } else { Dir::Backward },
            }),
            extra: Map::new(),
        });
        self.squares.len() - 1
    }

    pub fn finish(self) -> Result<SquareComplex, ComplexError> {
        SquareComplex::from_cells(None, self.vertices, self.edges, self.squares)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: usize, k: u32) -> GroupParams {
        GroupParams::new(m, k).unwrap()
    }

    #[test]
    fn canonical_vertices() {
        let g = p(4, 3);
        let v = canonical_vertex(&g, &g.elem(&[2, 1, 0, 1]).unwrap(), 1);
        assert_eq!(v.coeff, g.elem(&[0, 2, 1, 2]).unwrap());
        let c = g.elem(&[2, 1, 0, 1]).unwrap();
        assert_eq!(canonical_vertex(&g, &c, 0).coeff, c);
        assert!(canonical_vertex(&g, &g.diagonal(2), 2).coeff.is_identity());
        assert!(canonical_vertex(&g, &g.diagonal(4), -2).coeff.is_identity());
    }

    #[test]
    fn boundary_examples() {
        let g = p(4, 2);
        let s = SquareRef {
            height: 0,
            ty: 1,
            coeff: g.identity(),
        };
        let [br, tr, tl, bl] = square_boundary(&g, &s).unwrap();
        assert_eq!(
            br.0,
            EdgeRef {
                height: 0,
                ty: 1,
                coeff: g.sigma(1)
            }
        );
        assert_eq!(
            tr.0,
            EdgeRef {
                height: 1,
                ty: 2,
                coeff: g.identity()
            }
        );
        assert_eq!(
            tl.0,
            EdgeRef {
                height: 1,
                ty: 1,
                coeff: g.identity()
            }
        );
        assert_eq!(
            bl.0,
            EdgeRef {
                height: 0,
                ty: 2,
                coeff: g.identity()
            }
        );
        assert_eq!(
            [br.1, tr.1, tl.1, bl.1],
            [Dir::Forward, Dir::Forward, Dir::Backward, Dir::Backward]
        );

        let s = SquareRef {
            height: 0,
            ty: 4,
            coeff: g.identity(),
        };
        let [_, tr, _, _] = square_boundary(&g, &s).unwrap();
        assert_eq!(tr.0.coeff, g.diagonal(1));
        assert!(square_boundary(
            &g,
            &SquareRef {
                height: 0,
                ty: 5,
                coeff: g.identity()
            }
        )
        .is_err());
    }

    #[test]
    fn bottom_corner_is_beta() {
        for (m, k) in [(4, 2), (4, 3), (5, 3)] {
            let g = p(m, k);
            for j in 1..m {
                for i in -3..3 {
                    let h = g.elem(&(0..m as i64).collect::<Vec<_>>()).unwrap();
                    let s = SquareRef {
                        height: i,
                        ty: j,
                        coeff: h.clone(),
                    };
                    let [br, _, _, bl] = square_boundary(&g, &s).unwrap();
                    let expected = canonical_vertex(&g, &(&h * &g.beta(j)), i - 1);
                    assert_eq!(br.0.tail(&g), expected);
                    assert_eq!(bl.0.tail(&g), expected);
                }
            }
        }
    }

    #[test]
    fn build_counts() {
        let g = p(4, 2);
        let x = build_quotient_complex(&g, -2, 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(
            (x.vertices().len(), x.edges().len(), x.squares().len()),
            (64, 256, 192)
        );
        let per_height = |h: i64| x.vertices().iter().filter(|v| v.height == Some(h)).count();
        assert_eq!(
            [
                per_height(-2),
                per_height(-1),
                per_height(0),
                per_height(1),
                per_height(2)
            ],
            [16, 8, 16, 8, 16]
        );
        let x = build_quotient_complex(&g, 0, 2, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(x.squares().len(), 64);
        assert!(x.built().unwrap().squares.iter().all(|s| s.height == 1));
    }

    #[test]
    fn build_errors() {
        let g = p(4, 2);
        assert!(matches!(
            build_quotient_complex(&g, 0, 1, DEFAULT_SIZE_CAP),
            Err(ComplexError::SpanTooSmall { .. })
        ));
        assert!(matches!(
            build_quotient_complex(&p(10, 5), 0, 2, DEFAULT_SIZE_CAP),
            Err(ComplexError::SizeCap { .. })
        ));
        assert!(build_quotient_complex(&p(4, 3), 0, 2, 80).is_err());
    }

    #[test]
    fn built_edges_climb_one_height() {
        let x = build_quotient_complex(&p(4, 3), -3, 3, DEFAULT_SIZE_CAP).unwrap();
        for e in x.edges() {
            let (t, h) = (
                x.vertices()[e.tail].height.unwrap(),
                x.vertices()[e.head].height.unwrap(),
            );
            assert_eq!(h, t + 1);
        }
    }

    #[test]
    fn descending_links() {
        for (m, k) in [(4, 2), (4, 3), (5, 2)] {
            let g = p(m, k);
            let x = build_quotient_complex(&g, -3, 3, DEFAULT_SIZE_CAP).unwrap();
            for (v, vert) in x.vertices().iter().enumerate() {
                let h = vert.height.unwrap();
                if h.abs() >= 2 {
                    continue;
                }
                let link = vertex_link(&x, v).unwrap();
                let expected = if g.is_branching(h) { m * k as usize } else { m };
                assert_eq!(
                    link.descending(&x).unwrap().single_cycle_length(),
                    Some(expected)
                );
                assert_eq!(
                    link.ascending(&x).unwrap().single_cycle_length(),
                    Some(expected)
                );
                assert_eq!(link.nodes.len(), x.incident_edges(v).len());
                assert!((0..link.nodes.len()).all(|n| link.degree(n) == 4));
            }
        }
    }

    #[test]
    fn non_branching_full_link_is_spherical_double() {
        let g = p(5, 3);
        let x = build_quotient_complex(&g, -2, 2, DEFAULT_SIZE_CAP).unwrap();
        let built = x.built().unwrap();
        let v = built
            .vertex_index(&canonical_vertex(&g, &g.identity(), 0))
            .unwrap();
        let link = vertex_link(&x, v).unwrap();
        assert_eq!(link.nodes.len(), 2 * g.m());
        let label = |n: &LinkNode| (built.edges[n.edge].ty, n.end);
        let mut got: BTreeSet<_> = BTreeSet::new();
        for &(a, b, _) in &link.adjacencies {
            let (la, lb) = (label(&link.nodes[a]), label(&link.nodes[b]));
            got.insert((la.min(lb), la.max(lb)));
        }
        let mut want = BTreeSet::new();
        for j in 1..=g.m() {
            let j2 = g.cyc(j, 1);
            for ea in [End::Tail, End::Head] {
                for eb in [End::Tail, End::Head] {
                    let (la, lb) = ((j, ea), (j2, eb));
                    want.insert((la.min(lb), la.max(lb)));
                }
            }
        }
        assert_eq!(got, want);
        assert_eq!(link.adjacencies.len(), 4 * g.m());
    }

    #[test]
    fn npc_on_built() {
        let x = build_quotient_complex(&p(4, 2), -2, 2, DEFAULT_SIZE_CAP).unwrap();
        let r = check_npc(&x);
        assert!(r.pass, "{:?}", r.failures.first());
    }

    #[test]
    fn npc_double_adjacency() {
        let mut b = ComplexBuilder::new();
        let v: Vec<usize> = (0..6).map(|i| b.vertex(&format!("v{i}"), None)).collect();
        let a = b.edge("a", v[0], v[1], None);
        let bb = b.edge("b", v[1], v[2], None);
        let c = b.edge("c", v[2], v[3], None);
        let d = b.edge("d", v[3], v[0], None);
        let c2 = b.edge("c2", v[2], v[4], None);
        let d2 = b.edge("d2", v[4], v[0], None);
        b.square("s1", [(a, true), (bb, true), (c, true), (d, true)]);
        b.square("s2", [(a, true), (bb, true), (c2, true), (d2, true)]);
        let x = b.finish().unwrap();
        let r = check_npc(&x);
        assert!(!r.pass);
        assert!(r
            .failures
            .iter()
            .any(|f| f.kind == NpcFailureKind::DoubleAdjacency && f.vertex == "v1"));
    }

    #[test]
    fn npc_triangle() {
        let x = crate::fixtures::link_triangle();
        let r = check_npc(&x);
        let tri: Vec<_> = r
            .failures
            .iter()
            .filter(|f| f.kind == NpcFailureKind::Triangle)
            .collect();
        assert_eq!(tri.len(), 1);
        assert_eq!(tri[0].vertex, "o");
        assert_eq!(tri[0].squares.len(), 3);
    }

    #[test]
    fn json_round_trip() {
        let x = build_quotient_complex(&p(4, 2), -2, 2, DEFAULT_SIZE_CAP).unwrap();
        let y = SquareComplex::load_json(&x.save_json()).unwrap();
        assert_eq!(y.vertices(), x.vertices());
        assert_eq!(y.edges(), x.edges());
        assert_eq!(y.squares(), x.squares());
        let (bx, by) = (x.built().unwrap(), y.built().expect("typed data recovered"));
        assert_eq!(bx.edges, by.edges);
        assert_eq!((bx.h_min, bx.h_max), (by.h_min, by.h_max));
    }

    #[test]
    fn json_rejects_short_boundary() {
        let doc = r#"{"params":null,"vertices":[{"id":"a","height":null}],
            "edges":[{"id":"e","tail":"a","head":"a","type":null}],
            "squares":[{"id":"s","boundary":[{"edge":"e","dir":"+"},{"edge":"e","dir":"+"},{"edge":"e","dir":"-"}]}]}"#;
        match SquareComplex::load_json(doc) {
            Err(ComplexError::Schema { path, .. }) => assert_eq!(path, "squares[0].boundary"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_schema_paths() {
        let doc = r#"{"vertices":[{"id":"a","height":"high"}],"edges":[],"squares":[]}"#;
        let err = SquareComplex::load_json(doc).unwrap_err();
        assert!(
            matches!(err, ComplexError::Schema { ref path, .. } if path.starts_with("vertices[0]")),
            "{err}"
        );
        let doc =
            r#"{"vertices":[{"id":"a"}],"edges":[{"id":"e","tail":"a","head":"b"}],"squares":[]}"#;
        let err = SquareComplex::load_json(doc).unwrap_err();
        assert!(
            matches!(err, ComplexError::Schema { ref path, .. } if path == "edges[0].head"),
            "{err}"
        );
        let doc = r#"{"vertices":[{"id":"a"},{"id":"b"}],"edges":[{"id":"e","tail":"a","head":"b"}],
            "squares":[{"id":"s","boundary":[{"edge":"e","dir":"+"},{"edge":"e","dir":"+"},{"edge":"e","dir":"-"},{"edge":"e","dir":"-"}]}]}"#;
        assert!(matches!(
            SquareComplex::load_json(doc),
            Err(ComplexError::Schema { .. })
        ));
    }

    #[test]
    fn json_preserves_unknown_fields() {
        let doc = r#"{"params":null,"note":"hi","vertices":[{"id":"a","height":0,"colour":"red"}],
            "edges":[{"id":"e","tail":"a","head":"a","type":null,"weight":3}],
            "squares":[{"id":"s","boundary":[{"edge":"e","dir":"+"},{"edge":"e","dir":"+"},{"edge":"e","dir":"-"},{"edge":"e","dir":"-"}],"tag":[1]}]}"#;
        let x = SquareComplex::load_json(doc).unwrap();
        let v = x.to_json_value();
        assert_eq!(v["note"], "hi");
        assert_eq!(v["vertices"][0]["colour"], "red");
        assert_eq!(v["edges"][0]["weight"], 3);
        assert_eq!(v["squares"][0]["tag"][0], 1);
    }
}
