//! Symbolic certificates that the quotient complex is special, and a
//! cross-check of those certificates against the geometric engine.
//!
//! Every way two edges could self- or inter-osculate reduces to a family of
//! coset membership or intersection problems in `C_k^m`, indexed by a few
//! residues. Each family is decided by exhaustive enumeration and, where
//! possible, certified by a single linear character that is constant on
//! both sides with different values.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use crate::complex::square_boundary;
use crate::complex::{build_quotient_complex, ComplexError, EdgeRef, SquareComplex, SquareRef};
use crate::group::{Character, Coset, Elem, GroupError, GroupParams, Subgroup};
use crate::hyperplane::{interaction_report, partition, OsculationWitness};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Quantifier {
    pub name: &'static str,
    pub lo: i64,
    pub hi: i64,
    pub nonzero_mod_k: bool,
}

/// Residues for one instance of a case family. `b` is absent for the
/// self-osculation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Tuple {
    pub a: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    pub c: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseWitness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Tuple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element: Option<Elem>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedCharacter {
    pub name: String,
    pub character: Character,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseCertificate {
    pub case_id: String,
    /// `None` for certificates covering every type.
    pub j: Option<usize>,
    pub quantifiers: Vec<Quantifier>,
    pub left: String,
    pub right: String,
    pub empty: bool,
    pub separating_character: Option<Character>,
    pub named_character: Option<NamedCharacter>,
    pub enumerated: u64,
    pub witnesses: Vec<CaseWitness>,
    pub notes: Vec<String>,
}

const MAX_WITNESSES: usize = 5;

impl Serialize for CaseCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let j = match self.j {
            Some(j) => json!(j),
            None => json!("all"),
        };
        json!({
            "case_id": self.case_id,
            "j": j,
            "quantifiers": self.quantifiers,
            "left": self.left,
            "right": self.right,
            "empty": self.empty,
            "separating_character": self.separating_character,
            "named_character": self.named_character,
            "enumerated": self.enumerated,
            "witnesses": self.witnesses,
            "notes": self.notes,
        })
        .serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SelfOscCase {
    BEqAMinus1,
    BEqAPlus1,
    AtA,
    AtAMinus1,
}

impl SelfOscCase {
    pub const ALL: [SelfOscCase; 4] = [
        SelfOscCase::BEqAMinus1,
        SelfOscCase::BEqAPlus1,
        SelfOscCase::AtA,
        SelfOscCase::AtAMinus1,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SelfOscCase::BEqAMinus1 => "selfosc_b_eq_a_minus_1",
            SelfOscCase::BEqAPlus1 => "selfosc_b_eq_a_plus_1",
            SelfOscCase::AtA => "selfosc_b_eq_a_at_a",
            SelfOscCase::AtAMinus1 => "selfosc_b_eq_a_at_a_minus_1",
        }
    }
}

/// Inter-osculation sub-cases `1.1 ..= 1.4` (for `j < m`) and `2.1 ..= 2.4`
/// (for `j = m`), numbered by their position within the case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterOscCase {
    pub wraps: bool,
    pub sub: u8,
}

impl InterOscCase {
    pub fn for_type(params: &GroupParams, j: usize) -> [InterOscCase; 4] {
        let wraps = j == params.m();
        [1, 2, 3, 4].map(|sub| InterOscCase { wraps, sub })
    }

    pub fn id(self) -> String {
        format!("interosc_{}_{}", if self.wraps { 2 } else { 1 }, self.sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    SelfOsc(SelfOscCase),
    InterOsc(InterOscCase),
}

/// One enumerable family of coset problems for a fixed edge type.
#[derive(Debug, Clone)]
pub struct CaseFamily {
    pub params: GroupParams,
    pub family: Family,
    pub j: usize,
}

fn trivial(params: &GroupParams) -> Subgroup {
    Subgroup::cyclic(&params.identity())
}

fn point(params: &GroupParams, g: Elem) -> Coset {
    Coset::new(g, trivial(params))
}

impl CaseFamily {
    pub fn case_id(&self) -> String {
        match self.family {
            Family::SelfOsc(c) => c.id().to_string(),
            Family::InterOsc(c) => c.id(),
        }
    }

    pub fn quantifiers(&self) -> Vec<Quantifier> {
        let k = self.params.k() as i64;
        let q = |name, nonzero: bool| Quantifier {
            name,
            lo: nonzero as i64,
            hi: k - 1,
            nonzero_mod_k: nonzero,
        };
        match self.family {
            Family::SelfOsc(SelfOscCase::BEqAMinus1 | SelfOscCase::BEqAPlus1) => {
                vec![q("a", false), q("c", false)]
            }
            Family::SelfOsc(SelfOscCase::AtA) => vec![q("a", true), q("c", true)],
            Family::SelfOsc(SelfOscCase::AtAMinus1) => vec![q("a-1", true), q("c", true)],
            Family::InterOsc(_) => vec![q("a", false), q("b", true), q("c", true)],
        }
    }

    /// Every admissible residue tuple, lexicographically.
    pub fn tuples(&self) -> Vec<Tuple> {
        let k = self.params.k() as i64;
        let mut out = Vec::new();
        match self.family {
            Family::SelfOsc(case) => {
                for a in 0..k {
                    for c in 0..k {
                        let ok = match case {
                            SelfOscCase::BEqAMinus1 | SelfOscCase::BEqAPlus1 => true,
                            SelfOscCase::AtA => a != 0 && c != 0,
                            SelfOscCase::AtAMinus1 => (a - 1).rem_euclid(k) != 0 && c != 0,
                        };
                        if ok {
                            out.push(Tuple { a, b: None, c });
                        }
                    }
                }
            }
            Family::InterOsc(_) => {
                for a in 0..k {
                    for b in 1..k {
                        for c in 1..k {
                            out.push(Tuple { a, b: Some(b), c });
                        }
                    }
                }
            }
        }
        out
    }

    /// The two sets whose intersection must be empty for this instance.
    pub fn sets(&self, t: &Tuple) -> (Coset, Coset) {
        let p = &self.params;
        let (j, m) = (self.j, p.m());
        let stab = |t: usize| p.edge_type_stabilizer(t).expect("type in range");
        let dc = |h: i64, c: i64| p.diagonal(h).pow(c);
        match self.family {
            Family::SelfOsc(case) => {
                let a = t.a;
                let (left, right) = match case {
                    SelfOscCase::BEqAMinus1 => (
                        &dc(a - 1, t.c) * &p.prefix(j - 1),
                        Coset::new(p.prefix(j), stab(j)),
                    ),
                    SelfOscCase::BEqAPlus1 => (
                        &dc(a, t.c) * &p.prefix(j - 1).inverse(),
                        Coset::new(p.prefix(j).inverse(), stab(j)),
                    ),
                    SelfOscCase::AtA => (dc(a, t.c), Coset::new(p.identity(), stab(j))),
                    SelfOscCase::AtAMinus1 => (dc(a - 1, t.c), Coset::new(p.identity(), stab(j))),
                };
                (point(p, left), right)
            }
            Family::InterOsc(case) => {
                let (a, b, c) = (t.a, t.b.expect("inter-osculation tuples carry b"), t.c);
                let dbc = dc(b, c);
                if !case.wraps {
                    let (sj, sj1) = (p.sigma(j), p.sigma(j + 1));
                    match case.sub {
                        1 => (
                            Coset::new(p.identity(), stab(j)),
                            Coset::new(&dbc * &sj1.pow(b - a), stab(j + 1)),
                        ),
                        2 => (
                            Coset::new(sj, stab(j)),
                            Coset::new(&dbc * &sj1.pow(b - a + 1), stab(j + 1)),
                        ),
                        3 => (
                            Coset::new(&dbc * &sj, stab(j)),
                            Coset::new(sj1.pow(b - a), stab(j + 1)),
                        ),
                        _ => (
                            Coset::new(&dbc * &sj1.pow(b - a + 1), stab(j + 1)),
                            Coset::new(p.identity(), stab(j)),
                        ),
                    }
                } else {
                    let (s1, sm) = (p.sigma(1), p.sigma(m));
                    match case.sub {
                        1 => (Coset::new(s1.pow(b - a), stab(1)), Coset::new(dbc, stab(m))),
                        2 => (
                            Coset::new(&dbc * &sm, stab(m)),
                            Coset::new(s1.pow(b - a + 1), stab(1)),
                        ),
                        3 => (
                            Coset::new(s1.pow(b - a + 1), stab(1)),
                            Coset::new(dbc, stab(m)),
                        ),
                        _ => (
                            Coset::new(&dbc * &sm, stab(m)),
                            Coset::new(s1.pow(b - a), stab(1)),
                        ),
                    }
                }
            }
        }
    }

    /// Human-readable descriptions of the two sides. `A_t` is `σ_1⋯σ_t`
    /// and `d_h` is the constant vector `(h, …, h)`.
    pub fn formulas(&self) -> (String, String) {
        let p = &self.params;
        let (j, m) = (self.j, p.m());
        let st = |t: usize| format!("<σ{}σ{}>", p.cyc(t, -1), t);
        match self.family {
            Family::SelfOsc(SelfOscCase::BEqAMinus1) => {
                (format!("d_(a-1)^c A_{}", j - 1), format!("A_{j} {}", st(j)))
            }
            Family::SelfOsc(SelfOscCase::BEqAPlus1) => (
                format!("d_a^c A_{}^-1", j - 1),
                format!("A_{j}^-1 {}", st(j)),
            ),
            Family::SelfOsc(SelfOscCase::AtA) => ("d_a^c".into(), st(j)),
            Family::SelfOsc(SelfOscCase::AtAMinus1) => ("d_(a-1)^c".into(), st(j)),
            Family::InterOsc(c) if !c.wraps => {
                let (sj1, s) = (j + 1, (st(j), st(j + 1)));
                match c.sub {
                    1 => (s.0, format!("d_b^c σ{sj1}^(b-a) {}", s.1)),
                    2 => (
                        format!("σ{j} {}", s.0),
                        format!("d_b^c σ{sj1}^(b-a+1) {}", s.1),
                    ),
                    3 => (
                        format!("d_b^c σ{j} {}", s.0),
                        format!("σ{sj1}^(b-a) {}", s.1),
                    ),
                    _ => (format!("d_b^c σ{sj1}^(b-a+1) {}", s.1), s.0),
                }
            }
            Family::InterOsc(c) => {
                let (s1, sm) = (st(1), st(m));
                match c.sub {
                    1 => (format!("σ1^(b-a) {s1}"), format!("d_b^c {sm}")),
                    2 => (format!("d_b^c σ{m} {sm}"), format!("σ1^(b-a+1) {s1}")),
                    3 => (format!("σ1^(b-a+1) {s1}"), format!("d_b^c {sm}")),
                    _ => (format!("d_b^c σ{m} {sm}"), format!("σ1^(b-a) {s1}")),
                }
            }
        }
    }

    /// The character expected to separate the family.
    pub fn named_character(&self) -> (String, Character) {
        let p = &self.params;
        let d = |t: usize| p.basis_character(t);
        let j = self.j;
        match self.family {
            Family::SelfOsc(SelfOscCase::BEqAMinus1 | SelfOscCase::BEqAPlus1) => {
                let jm = p.cyc(j, -1);
                (format!("D({jm})D({j})^-1"), d(jm).product(&d(j).inverse()))
            }
            Family::SelfOsc(_) => {
                let t = p.cyc(j, 1);
                (format!("D({t})"), d(t))
            }
            Family::InterOsc(c) if !c.wraps => {
                let t = p.cyc(j, 2);
                (format!("D({t})"), d(t))
            }
            Family::InterOsc(_) => ("D(2)".into(), d(2)),
        }
    }

    fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        match self.family {
            Family::SelfOsc(SelfOscCase::BEqAMinus1 | SelfOscCase::BEqAPlus1) => {
                notes.push("c unconstrained: any element of the shared vertex stabiliser".into())
            }
            Family::SelfOsc(_) => notes.push(
                "shared vertex must be branching and the edges distinct: height and c nonzero mod k"
                    .into(),
            ),
            Family::InterOsc(c) => {
                notes.push(
                    "b, c nonzero mod k: branching vertex, edges not at a common square corner"
                        .into(),
                );
                if c.wraps && matches!(c.sub, 1 | 3) {
                    notes.push("type-m climb factor taken as (σ1⋯σm)^(b-a)".into());
                }
            }
        }
        if !self.params.k_is_prime() {
            notes.push("k composite: nonzero residues need not be units".into());
        }
        notes
    }

    /// Decide the family by enumeration and attach a character certificate.
    pub fn certify(&self) -> CaseCertificate {
        let tuples = self.tuples();
        let instances: Vec<(Tuple, Coset, Coset)> = tuples
            .iter()
            .map(|t| {
                let (l, r) = self.sets(t);
                (*t, l, r)
            })
            .collect();
        let mut witnesses = Vec::new();
        let mut empty = true;
        for (t, l, r) in &instances {
            let hit = crate::group::coset_intersection(l, r).expect("same group");
            if let Some(g) = hit.into_iter().next() {
                empty = false;
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(CaseWitness {
                        tuple: Some(*t),
                        element: Some(g),
                        cells: Vec::new(),
                    });
                }
            }
        }
        let separates_all = |chi: &Character| instances.iter().all(|(_, l, r)| chi.separates(l, r));
        let (name, chi) = self.named_character();
        let named_valid = !instances.is_empty() && separates_all(&chi);
        let separating_character = if named_valid {
            Some(chi.clone())
        } else if empty && !instances.is_empty() {
            self.params.characters().find(|c| separates_all(c))
        } else {
            None
        };
        let (left, right) = self.formulas();
        CaseCertificate {
            case_id: self.case_id(),
            j: Some(self.j),
            quantifiers: self.quantifiers(),
            left,
            right,
            empty,
            separating_character,
            named_character: Some(NamedCharacter {
                name,
                character: chi,
                valid: named_valid,
            }),
            enumerated: tuples.len() as u64,
            witnesses,
            notes: self.notes(),
        }
    }
}

pub fn self_osculation_families(params: &GroupParams) -> Vec<CaseFamily> {
    let mut out = Vec::new();
    for j in 1..=params.m() {
        for case in SelfOscCase::ALL {
            out.push(CaseFamily {
                params: *params,
                family: Family::SelfOsc(case),
                j,
            });
        }
    }
    out
}

pub fn inter_osculation_families(params: &GroupParams) -> Vec<CaseFamily> {
    let mut out = Vec::new();
    for j in 1..=params.m() {
        for case in InterOscCase::for_type(params, j) {
            out.push(CaseFamily {
                params: *params,
                family: Family::InterOsc(case),
                j,
            });
        }
    }
    out
}

pub fn check_self_osculation_cases(params: &GroupParams) -> Vec<CaseCertificate> {
    self_osculation_families(params)
        .iter()
        .map(CaseFamily::certify)
        .collect()
}

pub fn check_inter_osculation_cases(params: &GroupParams) -> Vec<CaseCertificate> {
    inter_osculation_families(params)
        .iter()
        .map(CaseFamily::certify)
        .collect()
}

/// The intersection problem for an inter-osculation instance written
/// directly in terms of the edges meeting at the shared vertex, before any
/// simplification: `r1 · A_j^(b1-a) Stab_j` against
/// `r2 · t⁻¹ · A_(j+1)^(b2-a) Stab_(j+1)`, where the crossing square's top
/// corner is `g·u_j^a, g·t·u_(j+1)^a`.
pub fn interosc_edge_form(family: &CaseFamily, t: &Tuple) -> Option<(Coset, Coset)> {
    let Family::InterOsc(case) = family.family else {
        return None;
    };
    let p = &family.params;
    let (j, m) = (family.j, p.m());
    let (a, b, c) = (t.a, t.b?, t.c);
    let dbc = p.diagonal(b).pow(c);
    let jn = p.cyc(j, 1);
    let (r1, b1, r2, b2, shift) = if !case.wraps {
        match case.sub {
            1 => (p.identity(), b, dbc, b, p.identity()),
            2 => (p.sigma(j), b + 1, dbc, b + 1, p.identity()),
            3 => (dbc, b + 1, p.prefix(j - 1), b, p.identity()),
            _ => (p.prefix(j), b, dbc, b + 1, p.identity()),
        }
    } else {
        let low = &p.diagonal(b + 1) * &p.sigma(m).inverse();
        let shift = p.diagonal(a);
        match case.sub {
            1 => (dbc, b, p.diagonal(b), b, shift),
            2 => (dbc, b + 1, low, b + 1, shift),
            3 => (&dbc * &p.prefix(m), b, p.diagonal(b + 1), b + 1, shift),
            _ => (dbc, b + 1, low, b, shift),
        }
    };
    let c1 = p.climb_coset(j, b1, a).ok()?.translate(&r1);
    let c2 = p
        .climb_coset(jn, b2, a)
        .ok()?
        .translate(&r2)
        .translate(&shift.inverse());
    Some((c1, c2))
}

/// Stabiliser of the type-`j` hyperplane read off the squares: travel down
/// one side of a type-`j` square and back up the far side of the adjacent
/// type-`(j-1)` square, and take the coefficient change.
pub fn derive_stabilizer_from_loops(
    params: &GroupParams,
    j: usize,
) -> Result<Subgroup, GroupError> {
    params.check_type(j)?;
    let jm = params.cyc(j, -1);
    let sq = |ty: usize| SquareRef {
        height: 0,
        ty,
        coeff: params.identity(),
    };
    let [br, _, tl, _] = square_boundary(params, &sq(j))?;
    let [_, tr, _, bl] = square_boundary(params, &sq(jm))?;
    let down = &br.0.coeff * &tl.0.coeff.inverse();
    let up = &bl.0.coeff * &tr.0.coeff.inverse();
    Ok(Subgroup::cyclic(&(&down * &up.inverse())))
}

/// Conditions 1 and 2 on a built complex: no square corner joins two edges
/// of one type, and all edges can be oriented upwards consistently.
pub fn check_structural_conditions(x: &SquareComplex) -> [CaseCertificate; 2] {
    let mut same_type = Vec::new();
    let mut untyped = 0usize;
    let mut corners = 0u64;
    for s in 0..x.squares().len() {
        for (_, a, b) in x.corners(s) {
            corners += 1;
            match (x.edges()[a.edge].ty, x.edges()[b.edge].ty) {
                (Some(p), Some(q)) if p == q => same_type.push(CaseWitness {
                    tuple: None,
                    element: None,
                    cells: vec![
                        x.squares()[s].id.clone(),
                        x.edges()[a.edge].id.clone(),
                        x.edges()[b.edge].id.clone(),
                    ],
                }),
                (Some(_), Some(_)) => {}
                _ => untyped += 1,
            }
        }
    }
    let mut notes = Vec::new();
    if untyped > 0 {
        notes.push(format!(
            "{untyped} corners involve untyped edges and were not checked"
        ));
    }
    let cond1_empty = same_type.is_empty();
    same_type.truncate(MAX_WITNESSES);
    let cond1 = CaseCertificate {
        case_id: "cond1_corner_types".into(),
        j: None,
        quantifiers: Vec::new(),
        left: "square corners".into(),
        right: "corners whose two edges share a type".into(),
        empty: cond1_empty,
        separating_character: None,
        named_character: None,
        enumerated: corners,
        witnesses: same_type,
        notes,
    };

    let part = partition(x);
    let mut bad = Vec::new();
    for w in part.one_sided_witnesses() {
        bad.push(vec![
            x.edges()[w.edge].id.clone(),
            x.squares()[w.square].id.clone(),
        ]);
    }
    for (e, edge) in x.edges().iter().enumerate() {
        let down = match (
            x.vertices()[edge.tail].height,
            x.vertices()[edge.head].height,
        ) {
            (Some(t), Some(h)) => h <= t,
            _ => false,
        };
        if part.orientation(e) != 0 || down {
            bad.push(vec![edge.id.clone()]);
        }
    }
    let cond2_empty = bad.is_empty();
    let witnesses = bad
        .into_iter()
        .take(MAX_WITNESSES)
        .map(|cells| CaseWitness {
            tuple: None,
            element: None,
            cells,
        })
        .collect();
    let cond2 = CaseCertificate {
        case_id: "cond2_orientation".into(),
        j: None,
        quantifiers: Vec::new(),
        left: "edges oriented upwards".into(),
        right: "edges identified with a reversed parallel copy".into(),
        empty: cond2_empty,
        separating_character: None,
        named_character: None,
        enumerated: x.edges().len() as u64,
        witnesses,
        notes: Vec::new(),
    };
    [cond1, cond2]
}

/// All certificates for `params`: structural ones on a one-period build,
/// then self-osculation and inter-osculation families.
pub fn verify(params: &GroupParams, size_cap: u64) -> Result<Vec<CaseCertificate>, ComplexError> {
    let k = params.k() as i64;
    let x = build_quotient_complex(params, -1, k + 1, size_cap)?;
    let mut out: Vec<CaseCertificate> = check_structural_conditions(&x).into();
    out.extend(check_self_osculation_cases(params));
    out.extend(check_inter_osculation_cases(params));
    Ok(out)
}

pub fn all_empty(certs: &[CaseCertificate]) -> bool {
    certs.iter().all(|c| c.empty)
}

// ---------------------------------------------------------------------------
// Cross-validation

/// Closed-form key of an edge's hyperplane: type and the coset
/// of `g·A_j^a` modulo `Stab_j`.
pub fn closed_form_key(params: &GroupParams, e: &EdgeRef) -> (usize, Elem) {
    let sub = params.edge_type_stabilizer(e.ty).expect("type in range");
    let c = Coset::new(&e.coeff * &params.prefix(e.ty).pow(e.height), sub);
    (e.ty, c.rep().clone())
}

/// Signature of a core osculation between same-type or adjacent-type edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Signature {
    pub case_id: String,
    pub j: usize,
    /// Residue of the height parameter the case is indexed by.
    pub residue: i64,
    /// Stabiliser exponent relating the two coefficients.
    pub c: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossValidation {
    pub m: usize,
    pub k: u32,
    pub h_min: i64,
    pub h_max: i64,
    pub margin: i64,
    pub core: (i64, i64),
    pub classes_checked: usize,
    pub partition_agrees: bool,
    pub signatures: BTreeMap<String, usize>,
    pub unrelated_osculations: usize,
    pub inconclusive_crossings: usize,
    pub inconclusive_osculations: usize,
    pub core_violations: usize,
    pub certificates_empty: bool,
    pub violations_match_certificates: bool,
    pub findings: Vec<String>,
    pub agreement: bool,
}

impl CrossValidation {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serialises")
    }
}

fn find_c(params: &GroupParams, ratio: &Elem, base: &Elem, h: i64) -> Option<i64> {
    (0..params.k() as i64).find(|&c| &(&params.diagonal(h).pow(c) * base) == ratio)
}

/// Classify an osculation between two built edges into a certificate case.
pub fn classify_osculation(
    params: &GroupParams,
    e: &EdgeRef,
    f: &EdgeRef,
    vertex_height: i64,
) -> Option<Signature> {
    let k = params.k() as i64;
    let m = params.m();
    let res = |h: i64| h.rem_euclid(k);
    let sig = |case: &str, j: usize, h: i64, c: i64| Signature {
        case_id: case.to_string(),
        j,
        residue: res(h),
        c,
    };
    if e.ty == f.ty {
        let j = e.ty;
        let (hi, lo) = if e.height >= f.height { (e, f) } else { (f, e) };
        if hi.height == lo.height + 1 {
            let r = &lo.coeff * &hi.coeff.inverse();
            let c = find_c(params, &r, &params.prefix(j - 1), hi.height - 1)?;
            return Some(sig(SelfOscCase::BEqAMinus1.id(), j, hi.height, c));
        }
        if hi.height != lo.height {
            return None;
        }
        let a = e.height;
        let r = &f.coeff * &e.coeff.inverse();
        return if vertex_height == a {
            find_c(params, &r, &params.identity(), a).map(|c| sig(SelfOscCase::AtA.id(), j, a, c))
        } else {
            find_c(params, &r, &params.identity(), a - 1)
                .map(|c| sig(SelfOscCase::AtAMinus1.id(), j, a, c))
        };
    }
    // Put the type-j edge first, where the other has type j+1.
    let (ej, ej1) = if params.cyc(e.ty, 1) == f.ty {
        (e, f)
    } else if params.cyc(f.ty, 1) == e.ty {
        (f, e)
    } else {
        return None;
    };
    let j = ej.ty;
    let wraps = j == m;
    let id = |sub: u8| InterOscCase { wraps, sub }.id();
    let r = &ej1.coeff * &ej.coeff.inverse();
    let p = params;
    if ej.height == ej1.height {
        let top = vertex_height == ej.height;
        let (sub, b) = if top {
            (1, ej.height)
        } else {
            (2, ej.height - 1)
        };
        let base = match (wraps, top) {
            (false, true) => p.identity(),
            (false, false) => p.sigma(j).inverse(),
            (true, true) => p.diagonal(b),
            (true, false) => &p.diagonal(b + 1) * &p.sigma(m).inverse(),
        };
        // ratio = base · d_b^(±c)
        let c = if wraps {
            find_c(p, &r, &base, b).map(|c| (-c).rem_euclid(k))
        } else {
            find_c(p, &r, &base, b)
        }?;
        return Some(sig(&id(sub), j, b, c));
    }
    if ej.height == ej1.height + 1 {
        // type j above type j+1
        let b = ej1.height;
        let (sub, base) = if wraps {
            (4, &p.diagonal(b + 1) * &p.sigma(m).inverse())
        } else {
            (3, p.prefix(j - 1))
        };
        let c = find_c(p, &r, &base, b).map(|c| (-c).rem_euclid(k))?;
        return Some(sig(&id(sub), j, b, c));
    }
    if ej1.height == ej.height + 1 {
        // type j below type j+1
        let b = ej.height;
        let (sub, base) = if wraps {
            (3, &p.diagonal(b + 1) * &p.prefix(m).inverse())
        } else {
            (4, p.prefix(j).inverse())
        };
        let c = if wraps {
            find_c(p, &r, &base, b).map(|c| (-c).rem_euclid(k))
        } else {
            find_c(p, &r, &base, b)
        }?;
        return Some(sig(&id(sub), j, b, c));
    }
    None
}

fn signature_admissible(params: &GroupParams, s: &Signature) -> bool {
    let k = params.k() as i64;
    if s.case_id.starts_with("interosc") {
        return s.residue != 0 && s.c != 0;
    }
    match s.case_id.as_str() {
        "selfosc_b_eq_a_at_a" => s.residue != 0 && s.c != 0,
        "selfosc_b_eq_a_at_a_minus_1" => (s.residue - 1).rem_euclid(k) != 0 && s.c != 0,
        _ => true,
    }
}

/// Compare the engine's view of a truncation with the certificates.
pub fn cross_validate(
    params: &GroupParams,
    h_min: i64,
    h_max: i64,
    margin: i64,
    size_cap: u64,
) -> Result<CrossValidation, ComplexError> {
    let x = build_quotient_complex(params, h_min, h_max, size_cap)?;
    let built = x.built().expect("builder attaches typed cells");
    let report = interaction_report(&x);
    let core = (h_min + margin, h_max - margin);
    // Heights within one step of the truncation lack squares on one side.
    let trusted = (core.0.max(h_min + 2), core.1.min(h_max - 2));
    let in_window = |w: (i64, i64), e: usize| {
        let h = built.edges[e].height;
        w.0 <= h && h <= w.1
    };
    let mut findings = Vec::new();

    // (i) partition against closed form, as a bijection on core edges.
    let part = &report.partition;
    let mut class_to_key: BTreeMap<usize, (usize, Elem)> = BTreeMap::new();
    let mut key_to_class: BTreeMap<(usize, Elem), usize> = BTreeMap::new();
    for (e, eref) in built.edges.iter().enumerate() {
        if !in_window(core, e) {
            continue;
        }
        let key = closed_form_key(params, eref);
        let class = part.class_of(e);
        if let Some(prev) = class_to_key.insert(class, key.clone()) {
            if prev != key {
                findings.push(format!(
                    "class {} spans closed-form keys ({})",
                    part.label(class),
                    x.edges()[e].id
                ));
            }
        }
        if let Some(prev) = key_to_class.insert(key, class) {
            if prev != class {
                findings.push(format!(
                    "closed-form key split across classes at {}",
                    x.edges()[e].id
                ));
            }
        }
    }
    let partition_agrees = findings.is_empty();

    // (ii) crossing types and osculation signatures.
    let mut inconclusive_crossings = 0;
    for ws in report.crossings.values() {
        for w in ws {
            let b = &x.squares()[w.square].boundary;
            let inside = b.iter().all(|s| in_window(core, s.edge));
            if !inside {
                continue;
            }
            if !b.iter().all(|s| in_window(trusted, s.edge)) {
                inconclusive_crossings += 1;
                continue;
            }
            let (t1, t2) = (built.edges[w.edges.0].ty, built.edges[w.edges.1].ty);
            if params.cyc(t1, 1) != t2 && params.cyc(t2, 1) != t1 {
                findings.push(format!(
                    "crossing between types {t1} and {t2} at {}",
                    x.squares()[w.square].id
                ));
            }
        }
    }
    let mut signatures: BTreeMap<String, usize> = BTreeMap::new();
    let mut unrelated = 0;
    let mut inconclusive_osculations = 0;
    let osc_in = |w: &OsculationWitness, win: (i64, i64)| {
        in_window(win, w.edges.0) && in_window(win, w.edges.1)
    };
    for ws in report.osculations.values() {
        for w in ws {
            if !osc_in(w, core) {
                continue;
            }
            if !osc_in(w, trusted) {
                inconclusive_osculations += 1;
                continue;
            }
            let (e, f) = (&built.edges[w.edges.0], &built.edges[w.edges.1]);
            let related =
                e.ty == f.ty || params.cyc(e.ty, 1) == f.ty || params.cyc(f.ty, 1) == e.ty;
            if !related {
                unrelated += 1;
                continue;
            }
            let vh = built.vertices[w.vertex].height;
            match classify_osculation(params, e, f, vh) {
                Some(s) if signature_admissible(params, &s) => {
                    *signatures.entry(s.case_id.clone()).or_default() += 1;
                }
                Some(s) => findings.push(format!(
                    "osculation {} / {} has signature {:?} outside the enumerated residues",
                    x.edges()[w.edges.0].id,
                    x.edges()[w.edges.1].id,
                    s
                )),
                None => findings.push(format!(
                    "osculation {} / {} at {} matches no case",
                    x.edges()[w.edges.0].id,
                    x.edges()[w.edges.1].id,
                    x.vertices()[w.vertex].id
                )),
            }
        }
    }

    // (iii) violations among trusted core witnesses against certificates.
    let restricted = report
        .core_restrict(&x, trusted.0, trusted.1)
        .expect("built complexes carry heights");
    let core_violations = restricted.violations.total();
    let certs_empty = all_empty(&check_self_osculation_cases(params))
        && all_empty(&check_inter_osculation_cases(params))
        && all_empty(&check_structural_conditions(&x));
    let violations_match = (core_violations == 0) == certs_empty;
    if !violations_match {
        findings.push(format!(
            "{core_violations} core violations but certificates {} empty",
            if certs_empty { "all" } else { "not all" }
        ));
    }
    let agreement = findings.is_empty();
    Ok(CrossValidation {
        m: params.m(),
        k: params.k(),
        h_min,
        h_max,
        margin,
        core,
        classes_checked: class_to_key.len(),
        partition_agrees,
        signatures,
        unrelated_osculations: unrelated,
        inconclusive_crossings,
        inconclusive_osculations,
        core_violations,
        certificates_empty: certs_empty,
        violations_match_certificates: violations_match,
        findings,
        agreement,
    })
}

/// Certificate list as a JSON array.
pub fn certificates_json(certs: &[CaseCertificate]) -> Value {
    serde_json::to_value(certs).expect("certificates serialise")
}

/// Distinct case ids in a certificate list, in order of first appearance.
pub fn case_ids(certs: &[CaseCertificate]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    certs
        .iter()
        .filter(|c| seen.insert(c.case_id.clone()))
        .map(|c| c.case_id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ComplexBuilder, DEFAULT_SIZE_CAP};

    fn p(m: usize, k: u32) -> GroupParams {
        GroupParams::new(m, k).unwrap()
    }

    #[test]
    fn loops_give_stabilisers() {
        let g = p(5, 3);
        let s = derive_stabilizer_from_loops(&g, 3).unwrap();
        assert_eq!(s.generator(), &(&g.sigma(2) * &g.sigma(3)));
        let s = derive_stabilizer_from_loops(&g, 1).unwrap();
        assert_eq!(s.generator(), &(&g.sigma(5) * &g.sigma(1)));
        assert!(derive_stabilizer_from_loops(&g, 6).is_err());
    }

    #[test]
    fn self_osculation_certificates() {
        for (m, k) in [(4, 3), (4, 2)] {
            let certs = check_self_osculation_cases(&p(m, k));
            assert_eq!(certs.len(), 4 * m);
            for c in &certs {
                assert!(c.empty, "{}", c.case_id);
                assert!(
                    c.named_character.as_ref().unwrap().valid,
                    "{} j={:?}",
                    c.case_id,
                    c.j
                );
                assert!(c.separating_character.is_some());
            }
        }
    }

    #[test]
    fn inter_osculation_certificates() {
        for (m, k) in [(4, 2), (5, 3)] {
            let certs = check_inter_osculation_cases(&p(m, k));
            assert_eq!(certs.len(), 4 * m);
            assert!(certs
                .iter()
                .all(|c| c.empty && c.named_character.as_ref().unwrap().valid));
        }
    }

    #[test]
    fn single_instance_sub_case() {
        let g = p(4, 3);
        let fam = CaseFamily {
            params: g,
            family: Family::InterOsc(InterOscCase {
                wraps: false,
                sub: 1,
            }),
            j: 1,
        };
        let t = Tuple {
            a: 1,
            b: Some(1),
            c: 1,
        };
        let (l, r) = fam.sets(&t);
        assert!(crate::group::coset_intersection(&l, &r).unwrap().is_empty());
        assert!(g.basis_character(3).separates(&l, &r));
    }

    #[test]
    fn edge_form_matches_simplified_form() {
        for (m, k) in [(4, 2), (4, 3), (5, 3)] {
            let g = p(m, k);
            for fam in inter_osculation_families(&g) {
                for t in fam.tuples() {
                    let (mut l, mut r) = fam.sets(&t);
                    let (le, re) = interosc_edge_form(&fam, &t).unwrap();
                    if l.subgroup() != le.subgroup() {
                        std::mem::swap(&mut l, &mut r);
                    }
                    // Translations taking l onto le form a coset of l's subgroup.
                    let base = le.rep() * &l.rep().inverse();
                    let found = l.subgroup().elements().iter().any(|s| {
                        let shift = &base * s;
                        l.translate(&shift) == le && r.translate(&shift) == re
                    });
                    assert!(found, "{} {:?}", fam.case_id(), t);
                }
            }
        }
    }

    #[test]
    fn m3_is_computed_honestly() {
        let g = p(3, 2);
        let certs = check_inter_osculation_cases(&g);
        assert_eq!(certs.len(), 12);
        assert!(
            certs.iter().any(|c| !c.empty),
            "inter-osculation appears when m = 3"
        );
        for c in certs.iter().filter(|c| !c.empty) {
            assert!(c.separating_character.is_none());
            assert!(!c.witnesses.is_empty());
        }
        let self_certs = check_self_osculation_cases(&g);
        assert!(self_certs.iter().all(|c| c.empty));
    }

    #[test]
    fn structural_conditions() {
        let g = p(4, 2);
        let x = build_quotient_complex(&g, -2, 3, DEFAULT_SIZE_CAP).unwrap();
        let [c1, c2] = check_structural_conditions(&x);
        assert!(c1.empty && c2.empty);
        assert_eq!(c1.j, None);

        let mut b = ComplexBuilder::new();
        let v: Vec<usize> = (0..4).map(|i| b.vertex(&format!("v{i}"), None)).collect();
        let e0 = b.edge("e0", v[0], v[1], Some(1));
        let e1 = b.edge("e1", v[1], v[2], Some(1));
        let e2 = b.edge("e2", v[3], v[2], Some(1));
        let e3 = b.edge("e3", v[0], v[3], Some(1));
        b.square("s", [(e0, true), (e1, true), (e2, false), (e3, false)]);
        let [c1, _] = check_structural_conditions(&b.finish().unwrap());
        assert!(!c1.empty);
        assert_eq!(c1.witnesses[0].cells[0], "s");
    }

    #[test]
    fn cross_validation_agrees() {
        let r = cross_validate(&p(4, 2), -4, 4, 2, DEFAULT_SIZE_CAP).unwrap();
        assert!(r.agreement, "{:?}", r.findings);
        assert_eq!(r.core_violations, 0);
        assert!(r.signatures.len() >= 2);
    }

    #[test]
    fn cross_validation_margin_zero() {
        let r = cross_validate(&p(4, 2), -3, 3, 0, DEFAULT_SIZE_CAP).unwrap();
        assert!(r.agreement, "{:?}", r.findings);
        assert!(r.inconclusive_osculations > 0);
    }

    #[test]
    fn certificate_json_shape() {
        let certs = verify(&p(4, 2), DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(certs.len(), 2 + 8 * 4);
        let v = certificates_json(&certs);
        assert_eq!(v[0]["j"], "all");
        assert_eq!(v[2]["j"], 1);
        assert_eq!(v[2]["case_id"], "selfosc_b_eq_a_minus_1");
        assert_eq!(case_ids(&certs).len(), 2 + 4 + 8);
    }
}
