//! Bivariate bicycle codes on an `l x m` torus.
//!
//! A code is fixed by two displacement sets `S_A`, `S_B` (the monomials of
//! `A(x, y)` and `B(x, y)`). Every unit cell hosts two data qubits (`L`, `R`)
//! and two ancillas (`X`, `Z`).
//!
//! Check convention: the X check at cell `i` touches `L` data at `A_k(i)` and
//! `R` data at `B_k(i)`; the Z check at `i` touches `R` data at `A_k^T(i)` and
//! `L` data at `B_k^T(i)`. In matrix form `h_x = [A | B]`, `h_z = [B^T | A^T]`.
//! This is the orientation implied by the seven-phase CNOT schedule (X
//! ancillas control onto `A_k(i)` / `B_k(i)`, Z ancillas receive from the
//! transposed offsets); the Tanner-graph picture alone does not pin it down.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec, IncrementalBasis};

/// Exponent pair of a monomial `x^dx y^dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Displacement {
    pub dx: i64,
    pub dy: i64,
}

impl Displacement {
    pub const fn new(dx: i64, dy: i64) -> Self {
        Self { dx, dy }
    }

    pub fn reduce(self, l: usize, m: usize) -> Self {
        Self {
            dx: self.dx.rem_euclid(l as i64),
            dy: self.dy.rem_euclid(m as i64),
        }
    }

    pub fn neg(self) -> Self {
        Self {
            dx: -self.dx,
            dy: -self.dy,
        }
    }

    pub fn add(self, other: Self) -> Self {
        Self {
            dx: self.dx + other.dx,
            dy: self.dy + other.dy,
        }
    }

    /// Parses a monomial such as `x^3`, `y`, `x^2y`, `x y^2` or `1`.
    pub fn parse_monomial(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        if text == "1" {
            return Ok(Self::new(0, 0));
        }
        let bad = || Error::InvalidSpec(format!("cannot parse monomial `{s}`"));
        let mut d = Self::new(0, 0);
        let mut chars = text.chars().peekable();
        let mut seen_any = false;
        while let Some(var) = chars.next() {
            let mut exp = 1i64;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(c) = chars.peek().copied().filter(char::is_ascii_digit) {
                    digits.push(c);
                    chars.next();
                }
                exp = digits.parse().map_err(|_| bad())?;
            }
            match var {
                'x' => d.dx += exp,
                'y' => d.dy += exp,
                _ => return Err(bad()),
            }
            seen_any = true;
        }
        if !seen_any {
            return Err(bad());
        }
        Ok(d)
    }
}

impl fmt::Display for Displacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.dx, self.dy) {
            (0, 0) => write!(f, "1"),
            (x, 0) => write!(f, "x^{x}"),
            (0, y) => write!(f, "y^{y}"),
            (x, y) => write!(f, "x^{x}y^{y}"),
        }
    }
}

/// Unit cell `(u, v)` with `0 <= u < l`, `0 <= v < m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub u: usize,
    pub v: usize,
}

impl CellIndex {
    pub const fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }
}

/// `i ⊕ delta` on the `l x m` torus.
pub fn cell_add(i: CellIndex, delta: Displacement, l: usize, m: usize) -> CellIndex {
    let d = delta.reduce(l, m);
    CellIndex {
        u: (i.u + d.dx as usize) % l,
        v: (i.v + d.dy as usize) % m,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckType {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBCodeSpec {
    pub name: String,
    pub l: usize,
    pub m: usize,
    pub a: Vec<Displacement>,
    pub b: Vec<Displacement>,
    pub claimed_n: usize,
    pub claimed_k: usize,
    pub claimed_d: usize,
}

/// Plain-text spec file layout (TOML).
#[derive(Debug, Deserialize)]
struct SpecFile {
    name: Option<String>,
    l: usize,
    m: usize,
    a_poly: Vec<String>,
    b_poly: Vec<String>,
    n: usize,
    k: usize,
    d: usize,
}

impl BBCodeSpec {
    fn family(name: &str, l: usize, m: usize, k: usize, d: usize) -> Self {
        // A = x^3 + y + y^2, B = y^3 + x + x^2
        Self {
            name: name.to_string(),
            l,
            m,
            a: vec![
                Displacement::new(3, 0),
                Displacement::new(0, 1),
                Displacement::new(0, 2),
            ],
            b: vec![
                Displacement::new(0, 3),
                Displacement::new(1, 0),
                Displacement::new(2, 0),
            ],
            claimed_n: 2 * l * m,
            claimed_k: k,
            claimed_d: d,
        }
    }

    pub fn bb72() -> Self {
        Self::family("bb72", 6, 6, 12, 6)
    }

    pub fn bb108() -> Self {
        Self::family("bb108", 9, 6, 8, 10)
    }

    pub fn bb144() -> Self {
        Self::family("bb144", 12, 6, 12, 12)
    }

    pub fn family_table() -> Vec<Self> {
        vec![Self::bb72(), Self::bb108(), Self::bb144()]
    }

    /// Looks up a built-in code by id: `bb72`, `72`, or `[[72,12,6]]`.
    pub fn by_id(id: &str) -> Option<Self> {
        let key: String = id
            .chars()
            .filter(|c| c.is_ascii_alphanumeric() || *c == ',')
            .collect::<String>()
            .to_ascii_lowercase();
        Self::family_table().into_iter().find(|s| {
            key == s.name
                || key == s.claimed_n.to_string()
                || key == format!("{},{},{}", s.claimed_n, s.claimed_k, s.claimed_d)
        })
    }

    /// Loads a spec from the plain-text config format: keys `l`, `m`,
    /// `a_poly`, `b_poly` (monomial lists) and claimed `n`, `k`, `d`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let f: SpecFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let parse = |v: &[String]| -> Result<Vec<Displacement>> {
            v.iter().map(|s| Displacement::parse_monomial(s)).collect()
        };
        let spec = Self {
            name: f.name.unwrap_or_else(|| format!("bb{}", f.n)),
            l: f.l,
            m: f.m,
            a: parse(&f.a_poly)?,
            b: parse(&f.b_poly)?,
            claimed_n: f.n,
            claimed_k: f.k,
            claimed_d: f.d,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_config_string(&self) -> String {
        let list = |v: &[Displacement]| {
            v.iter()
                .map(|d| format!("\"{d}\""))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "name = \"{}\"\nl = {}\nm = {}\na_poly = [{}]\nb_poly = [{}]\nn = {}\nk = {}\nd = {}\n",
            self.name,
            self.l,
            self.m,
            list(&self.a),
            list(&self.b),
            self.claimed_n,
            self.claimed_k,
            self.claimed_d
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.m == 0 {
            return Err(Error::InvalidSpec("lattice periods must be positive".into()));
        }
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::InvalidSpec("displacement sets must be non-empty".into()));
        }
        if self.a.len() != self.b.len() {
            return Err(Error::InvalidSpec(format!(
                "|S_A| = {} differs from |S_B| = {}",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.claimed_n != 2 * self.l * self.m {
            return Err(Error::InvalidSpec(format!(
                "claimed n = {} but 2lm = {}",
                self.claimed_n,
                2 * self.l * self.m
            )));
        }
        for (name, set) in [("S_A", &self.a), ("S_B", &self.b)] {
            let reduced: Vec<_> = set.iter().map(|d| d.reduce(self.l, self.m)).collect();
            for i in 0..reduced.len() {
                if reduced[i + 1..].contains(&reduced[i]) {
                    return Err(Error::InvalidSpec(format!(
                        "{name} has coinciding displacements mod ({}, {})",
                        self.l, self.m
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.l * self.m
    }

    pub fn n(&self) -> usize {
        2 * self.cells()
    }

    pub fn check_weight(&self) -> usize {
        self.a.len() + self.b.len()
    }

    #[inline]
    pub fn cell_id(&self, c: CellIndex) -> usize {
        c.u * self.m + c.v
    }

    #[inline]
    pub fn cell_at(&self, id: usize) -> CellIndex {
        CellIndex::new(id / self.m, id % self.m)
    }

    pub fn a_of(&self, k: usize, i: CellIndex) -> CellIndex {
        cell_add(i, self.a[k], self.l, self.m)
    }

    pub fn b_of(&self, k: usize, i: CellIndex) -> CellIndex {
        cell_add(i, self.b[k], self.l, self.m)
    }

    pub fn a_t_of(&self, k: usize, i: CellIndex) -> CellIndex {
        cell_add(i, self.a[k].neg(), self.l, self.m)
    }

    pub fn b_t_of(&self, k: usize, i: CellIndex) -> CellIndex {
        cell_add(i, self.b[k].neg(), self.l, self.m)
    }

    /// Data-qubit column: `L` block first, then `R`.
    pub fn data_column(&self, sub: Sublattice, c: CellIndex) -> usize {
        match sub {
            Sublattice::L => self.cell_id(c),
            Sublattice::R => self.cells() + self.cell_id(c),
        }
    }

    pub fn column_data(&self, col: usize) -> (Sublattice, CellIndex) {
        if col < self.cells() {
            (Sublattice::L, self.cell_at(col))
        } else {
            (Sublattice::R, self.cell_at(col - self.cells()))
        }
    }
}

/// Data neighbours of the check of `check_type` at cell `i`, ordered
/// `(A_1, A_2, A_3, B_1, B_2, B_3)` (transposed offsets for Z checks).
pub fn tanner_neighbors(
    spec: &BBCodeSpec,
    check_type: CheckType,
    i: CellIndex,
) -> Vec<(Sublattice, CellIndex)> {
    let w = spec.a.len();
    match check_type {
        CheckType::X => (0..w)
            .map(|k| (Sublattice::L, spec.a_of(k, i)))
            .chain((0..w).map(|k| (Sublattice::R, spec.b_of(k, i))))
            .collect(),
        CheckType::Z => (0..w)
            .map(|k| (Sublattice::R, spec.a_t_of(k, i)))
            .chain((0..w).map(|k| (Sublattice::L, spec.b_t_of(k, i))))
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub struct ParityChecks {
    pub spec: BBCodeSpec,
    pub h_x: BitMatrix,
    pub h_z: BitMatrix,
}

impl ParityChecks {
    pub fn n(&self) -> usize {
        self.h_x.cols()
    }

    /// Sparse coordinate text: a `rows cols nnz` header then one `row col`
    /// pair per line.
    pub fn to_coordinate_text(&self, which: CheckType) -> String {
        let h = match which {
            CheckType::X => &self.h_x,
            CheckType::Z => &self.h_z,
        };
        let mut entries = Vec::new();
        for r in 0..h.rows() {
            for c in h.row_support(r) {
                entries.push((r, c));
            }
        }
        let mut out = format!("{} {} {}\n", h.rows(), h.cols(), entries.len());
        for (r, c) in entries {
            out.push_str(&format!("{r} {c}\n"));
        }
        out
    }
}

pub fn build_check_matrices(spec: &BBCodeSpec) -> Result<ParityChecks> {
    spec.validate()?;
    let cells = spec.cells();
    let mut h_x = BitMatrix::zeros(cells, spec.n());
    let mut h_z = BitMatrix::zeros(cells, spec.n());
    for id in 0..cells {
        let i = spec.cell_at(id);
        for (sub, c) in tanner_neighbors(spec, CheckType::X, i) {
            h_x.toggle(id, spec.data_column(sub, c));
        }
        for (sub, c) in tanner_neighbors(spec, CheckType::Z, i) {
            h_z.toggle(id, spec.data_column(sub, c));
        }
    }
    let w = spec.check_weight();
    for r in 0..cells {
        if h_x.row_weight(r) != w || h_z.row_weight(r) != w {
            return Err(Error::InvalidSpec(format!(
                "check {r} lost weight to colliding edges"
            )));
        }
    }
    if !h_x.mul_transpose(&h_z).is_zero() {
        return Err(Error::NotCss);
    }
    Ok(ParityChecks {
        spec: spec.clone(),
        h_x,
        h_z,
    })
}

/// `k = n - rank(h_x) - rank(h_z)`.
pub fn compute_k(checks: &ParityChecks) -> usize {
    checks.n() - checks.h_x.rank() - checks.h_z.rank()
}

#[derive(Clone, Debug)]
pub struct LogicalOperators {
    pub x_logicals: Vec<BitVec>,
    pub z_logicals: Vec<BitVec>,
}

impl LogicalOperators {
    pub fn k(&self) -> usize {
        self.x_logicals.len()
    }

    /// `P[i][j] = <x_i, z_j>`.
    pub fn pairing(&self) -> Vec<Vec<bool>> {
        self.x_logicals
            .iter()
            .map(|x| self.z_logicals.iter().map(|z| x.dot(z)).collect())
            .collect()
    }
}

/// Representatives of `ker(h_other) / rowspace(h_same)`, in kernel-basis order.
fn quotient_representatives(h_same: &BitMatrix, h_other: &BitMatrix) -> Vec<BitVec> {
    let n = h_same.cols();
    let mut basis = IncrementalBasis::new(n, n);
    for r in 0..h_same.rows() {
        basis.insert(h_same.row_words(r));
    }
    h_other
        .kernel()
        .into_iter()
        .filter(|v| basis.insert(v.words()).is_some())
        .collect()
}

pub fn extract_logicals(checks: &ParityChecks) -> Result<LogicalOperators> {
    let k = compute_k(checks);
    if k == 0 {
        return Err(Error::Logicals("code encodes no logical qubits".into()));
    }
    let mut xs = quotient_representatives(&checks.h_x, &checks.h_z);
    let mut zs = quotient_representatives(&checks.h_z, &checks.h_x);
    if xs.len() != k || zs.len() != k {
        return Err(Error::Logicals(format!(
            "found {} X and {} Z representatives, expected {k}",
            xs.len(),
            zs.len()
        )));
    }
    // Symplectic Gram-Schmidt over the overlap form.
    let mut out_x = Vec::with_capacity(k);
    let mut out_z = Vec::with_capacity(k);
    while !xs.is_empty() {
        let x = xs.remove(0);
        let Some(pos) = zs.iter().position(|z| x.dot(z)) else {
            return Err(Error::Logicals(
                "an X representative has no Z partner".into(),
            ));
        };
        let z = zs.remove(pos);
        for other in xs.iter_mut() {
            if other.dot(&z) {
                other.xor_assign(&x);
            }
        }
        for other in zs.iter_mut() {
            if x.dot(other) {
                other.xor_assign(&z);
            }
        }
        out_x.push(x);
        out_z.push(z);
    }
    Ok(LogicalOperators {
        x_logicals: out_x,
        z_logicals: out_z,
    })
}
