//! Exact integer linear algebra and small group-theoretic probes.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::group::{Elem, GroupParams};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("matrix must be non-empty and rectangular")]
    Shape,
    #[error("matrix entry {0:?} is not an integer")]
    Entry(String),
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("crossing orbit growth needs m >= 4, got {0}")]
    TooFewGenerators(usize),
    #[error("images live in different groups")]
    Mismatch,
    #[error("no images given")]
    NoImages,
    #[error("window of {len} values is shorter than 3 x max period {max_period}")]
    WindowTooShort { len: usize, max_period: usize },
}

/// Dense matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn new(entries: Vec<Vec<BigInt>>) -> Result<IntMatrix, AlgebraError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(AlgebraError::Shape);
        }
        Ok(IntMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<IntMatrix, AlgebraError> {
        IntMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> IntMatrix {
        let entries = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect())
            .collect();
        IntMatrix {
            rows: n,
            cols: n,
            entries,
        }
    }

    /// Parse a JSON 2-D array. Entries may be integers or decimal strings.
    pub fn from_json(text: &str) -> Result<IntMatrix, AlgebraError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| AlgebraError::Malformed(e.to_string()))?;
        let rows = v
            .as_array()
            .ok_or_else(|| AlgebraError::Malformed("expected an array of rows".into()))?;
        let mut entries = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| {
                AlgebraError::Malformed("expected each row to be an array".into())
            })?;
            let parsed = row
                .iter()
                .map(|x| match x {
                    Value::Number(n) if n.is_i64() || n.is_u64() => n
                        .to_string()
                        .parse::<BigInt>()
                        .map_err(|_| AlgebraError::Entry(n.to_string())),
                    Value::String(s) => s
                        .trim()
                        .parse::<BigInt>()
                        .map_err(|_| AlgebraError::Entry(s.clone())),
                    other => Err(AlgebraError::Entry(other.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            entries.push(parsed);
        }
        IntMatrix::new(entries)
    }

    /// Parse whitespace-separated integers, one row per non-blank line.
    pub fn from_grid(text: &str) -> Result<IntMatrix, AlgebraError> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| {
                        t.parse::<BigInt>()
                            .map_err(|_| AlgebraError::Entry(t.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        IntMatrix::new(entries)
    }

    /// JSON if the text starts with `[`, whitespace grid otherwise.
    pub fn parse(text: &str) -> Result<IntMatrix, AlgebraError> {
        if text.trim_start().starts_with('[') {
            IntMatrix::from_json(text)
        } else {
            IntMatrix::from_grid(text)
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<BigInt>] {
        &self.entries
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let entries = (0..self.rows)
            .map(|i| {
                (0..other.cols)
                    .map(|j| {
                        (0..self.cols)
                            .map(|t| &self.entries[i][t] * &other.entries[t][j])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        }
    }

    /// Determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for t in 0..n {
            if a[t][t].is_zero() {
                match (t + 1..n).find(|&i| !a[i][t].is_zero()) {
                    Some(i) => {
                        a.swap(t, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in t + 1..n {
                for j in t + 1..n {
                    let v = &a[i][j] * &a[t][t] - &a[i][t] * &a[t][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[t][t].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|r| Value::Array(r.iter().map(bigint_json).collect()))
                .collect(),
        )
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.entries.swap(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for row in &mut self.entries {
            row.swap(a, b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.entries[src][j] * q;
            self.entries[dst][j] += v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for row in &mut self.entries {
            let v = &row[src] * q;
            row[dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.entries[i] {
            *x = -&*x;
        }
    }
}

/// Integers that fit in `i64` serialise as numbers, others as strings.
pub fn bigint_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Non-zero diagonal entries of `d`, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

/// Smith normal form `U · M · V = D` with unimodular `U`, `V`.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows);
    let mut v = IntMatrix::identity(m.cols);
    let n = m.rows.min(m.cols);
    for t in 0..n {
        // Pivot on the least absolute non-zero entry of the trailing block.
        let pivot = (t..d.rows)
            .flat_map(|i| (t..d.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !d.entries[i][j].is_zero())
            .min_by(|&(a, b), &(c, e)| d.entries[a][b].abs().cmp(&d.entries[c][e].abs()));
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..d.rows {
                if d.entries[i][t].is_zero() {
                    continue;
                }
                let q = -d.entries[i][t].div_floor(&d.entries[t][t]);
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                if !d.entries[i][t].is_zero() {
                    d.swap_rows(t, i);
                    u.swap_rows(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..d.cols {
                if d.entries[t][j].is_zero() {
                    continue;
                }
                let q = -d.entries[t][j].div_floor(&d.entries[t][t]);
                d.add_col(j, t, &q);
                v.add_col(j, t, &q);
                if !d.entries[t][j].is_zero() {
                    d.swap_cols(t, j);
                    v.swap_cols(t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Row and column are clear; enforce divisibility of the block.
            let bad = (t + 1..d.rows).find(|&i| {
                (t + 1..d.cols).any(|j| !d.entries[i][j].is_multiple_of(&d.entries[t][t]))
            });
            match bad {
                Some(i) => {
                    let one = BigInt::one();
                    d.add_row(t, i, &one);
                    u.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d.entries[t][t].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    let invariant_factors = (0..n)
        .map(|t| d.entries[t][t].clone())
        .filter(|x| !x.is_zero())
        .collect();
    SnfResult {
        d,
        u,
        v,
        invariant_factors,
    }
}

/// Relation matrix of the abelianised presentation: the relator for each
/// `i` in `[-2k, 2k]` is `x_1^i ⋯ x_m^i` when `k | i` and its `k`-th power
/// otherwise, which abelianise to multiples of `(1, …, 1)`.
pub fn abelianized_relations(params: &GroupParams) -> IntMatrix {
    let k = params.k() as i64;
    let rows: Vec<Vec<i64>> = (-2 * k..=2 * k)
        .map(|i| {
            let e = if i % k == 0 { i } else { k * i };
            vec![e; params.m()]
        })
        .collect();
    IntMatrix::from_i64(&rows).expect("non-empty relation matrix")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abelianization {
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl fmt::Display for Abelianization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|t| format!("C{t}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(f, "{}", parts.join(" x "))
    }
}

pub fn abelianization_of(relations: &IntMatrix) -> Abelianization {
    let snf = smith_normal_form(relations);
    Abelianization {
        torsion: snf
            .invariant_factors
            .iter()
            .filter(|x| !x.is_one())
            .cloned()
            .collect(),
        free_rank: relations.cols() - snf.rank(),
    }
}

pub fn abelianization_invariants(params: &GroupParams) -> Abelianization {
    abelianization_of(&abelianized_relations(params))
}

/// Membership test for the row lattice of a matrix, via its Smith form.
pub struct Lattice {
    snf: SnfResult,
}

impl Lattice {
    pub fn from_generators(gens: &IntMatrix) -> Lattice {
        Lattice {
            snf: smith_normal_form(gens),
        }
    }

    /// `x` is an integer combination of the generator rows iff every
    /// coordinate of `x · V` is divisible by the matching diagonal entry and
    /// vanishes past the rank.
    pub fn contains(&self, x: &[BigInt]) -> bool {
        let v = &self.snf.v;
        assert_eq!(x.len(), v.rows(), "dimension mismatch");
        (0..v.cols()).all(|t| {
            let w: BigInt = (0..v.rows()).map(|s| &x[s] * v.get(s, t)).sum();
            match self.snf.invariant_factors.get(t) {
                Some(d) => w.is_multiple_of(d),
                None => w.is_zero(),
            }
        })
    }
}

/// Generators of the lattice identifying crossing hyperplanes in the
/// abelianisation: `e1+e2`, `e2+e3` and the relation `k·(1, …, 1)`.
pub fn crossing_lattice(params: &GroupParams) -> Result<IntMatrix, AlgebraError> {
    let m = params.m();
    if m < 4 {
        return Err(AlgebraError::TooFewGenerators(m));
    }
    let unit_pair = |a: usize| {
        (0..m)
            .map(|t| (t == a || t == a + 1) as i64)
            .collect::<Vec<_>>()
    };
    IntMatrix::from_i64(&[unit_pair(0), unit_pair(1), vec![params.k() as i64; m]])
}

/// Number of classes of `x_1^i`, `|i| <= r`, modulo the crossing lattice.
/// Computed in the abelianisation, so it bounds the orbit count from below.
pub fn crossing_orbit_growth(params: &GroupParams, r: u64) -> Result<u64, AlgebraError> {
    let lattice = Lattice::from_generators(&crossing_lattice(params)?);
    let m = params.m();
    let r = r as i64;
    let mut reps: Vec<i64> = Vec::new();
    for i in -r..=r {
        let fresh = reps.iter().all(|&j| {
            let mut x = vec![BigInt::zero(); m];
            x[0] = BigInt::from(i - j);
            !lattice.contains(&x)
        });
        if fresh {
            reps.push(i);
        }
    }
    Ok(reps.len() as u64)
}

/// Elements of a finite group, enough to compute orders of words.
pub trait FiniteGroupElement: Clone {
    fn compatible(&self, other: &Self) -> bool;
    fn compose(&self, other: &Self) -> Self;
    fn power(&self, n: i64) -> Self;
    fn element_order(&self) -> u64;
}

impl FiniteGroupElement for Elem {
    fn compatible(&self, other: &Self) -> bool {
        self.m() == other.m() && self.k() == other.k()
    }

    fn compose(&self, other: &Self) -> Self {
        self * other
    }

    fn power(&self, n: i64) -> Self {
        self.pow(n)
    }

    fn element_order(&self) -> u64 {
        self.order()
    }
}

/// Permutation of `0..n`, stored as the image of each point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn new(images: Vec<usize>) -> Option<Perm> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Perm { images })
    }

    pub fn identity(n: usize) -> Perm {
        Perm {
            images: (0..n).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Perm { images: inv }
    }

    /// All permutations of `0..n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm {
                images: cur.clone(),
            });
            // Next lexicographic permutation.
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n)
                .rev()
                .find(|&j| cur[j] > cur[i - 1])
                .expect("successor exists");
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl FiniteGroupElement for Perm {
    fn compatible(&self, other: &Self) -> bool {
        self.degree() == other.degree()
    }

    /// `self` after `other`.
    fn compose(&self, other: &Self) -> Self {
        Perm {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    fn power(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Perm::identity(self.degree());
        for _ in 0..n.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    fn element_order(&self) -> u64 {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            order = order.lcm(&len);
        }
        order
    }
}

/// Orders of `g_1^i ⋯ g_m^i` over a range of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderSeq {
    pub start: i64,
    pub values: Vec<u64>,
}

impl OrderSeq {
    pub fn get(&self, i: i64) -> Option<u64> {
        let idx = usize::try_from(i - self.start).ok()?;
        self.values.get(idx).copied()
    }

    /// Indices in the window where the word is trivial.
    pub fn trivial_positions(&self) -> Vec<i64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(t, _)| self.start + t as i64)
            .collect()
    }
}

pub fn order_sequence<T: FiniteGroupElement>(
    images: &[T],
    range: RangeInclusive<i64>,
) -> Result<OrderSeq, AlgebraError> {
    let first = images.first().ok_or(AlgebraError::NoImages)?;
    if images.iter().any(|g| !first.compatible(g)) {
        return Err(AlgebraError::Mismatch);
    }
    let start = *range.start();
    let values = range
        .map(|i| {
            let word = images
                .iter()
                .skip(1)
                .fold(first.power(i), |acc, g| acc.compose(&g.power(i)));
            word.element_order()
        })
        .collect();
    Ok(OrderSeq { start, values })
}

/// Smallest period `p <= max_period` holding across the sampled window.
pub fn is_periodic(seq: &OrderSeq, max_period: usize) -> Result<Option<usize>, AlgebraError> {
    let len = seq.values.len();
    if max_period == 0 || len < 3 * max_period {
        return Err(AlgebraError::WindowTooShort { len, max_period });
    }
    Ok((1..=max_period).find(|&p| (0..len - p).all(|i| seq.values[i] == seq.values[i + p])))
}

/// Images `σ_1, …, σ_m` of the generators in `C_k^m`.
pub fn canonical_images(params: &GroupParams) -> Vec<Elem> {
    (1..=params.m()).map(|j| params.sigma(j)).collect()
}
