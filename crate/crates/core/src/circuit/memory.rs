use std::collections::HashSet;
use std::fmt;

use super::{Basis, Circuit, CircuitMeta, Instruction};
use crate::bbcode::{build_check_matrices, extract_logicals, BBCodeSpec, CellIndex, CheckType, Sublattice};
use crate::error::{Error, Result};

pub const LAYER_COUNT: usize = 7;

/// One CNOT family of the round: `X1..X6` or `Z1..Z6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family {
    pub side: CheckType,
    pub index: u8,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.side {
            CheckType::X => 'X',
            CheckType::Z => 'Z',
        };
        write!(f, "{s}{}", self.index)
    }
}

#[derive(Clone, Copy)]
enum Poly {
    A,
    B,
}

#[derive(Clone, Copy)]
struct FamilyGate {
    family: Family,
    sub: Sublattice,
    poly: Poly,
    term: usize,
}

const fn fam(side: CheckType, index: u8, sub: Sublattice, poly: Poly, term: usize) -> FamilyGate {
    FamilyGate { family: Family { side, index }, sub, poly, term }
}

use CheckType::{X as XS, Z as ZS};
use Sublattice::{L, R};

/// X families target data at `A_k(i)` / `B_k(i)` from the X ancilla at `i`;
/// Z families bring data at `A_k^T(i)` / `B_k^T(i)` onto the Z ancilla at `i`.
const SCHEDULE: [[Option<FamilyGate>; 2]; LAYER_COUNT] = [
    [None, Some(fam(ZS, 1, R, Poly::A, 0))],
    [Some(fam(XS, 1, L, Poly::A, 1)), Some(fam(ZS, 2, R, Poly::A, 2))],
    [Some(fam(XS, 2, R, Poly::B, 1)), Some(fam(ZS, 3, L, Poly::B, 0))],
    [Some(fam(XS, 3, R, Poly::B, 0)), Some(fam(ZS, 4, L, Poly::B, 1))],
    [Some(fam(XS, 4, R, Poly::B, 2)), Some(fam(ZS, 5, L, Poly::B, 2))],
    [Some(fam(XS, 5, L, Poly::A, 0)), Some(fam(ZS, 6, R, Poly::A, 1))],
    [Some(fam(XS, 6, L, Poly::A, 2)), None],
];

/// Boundary label of a CNOT layer (1-based), e.g. `X1+Z2`.
pub fn family_label(layer: usize) -> String {
    SCHEDULE[layer - 1]
        .iter()
        .flatten()
        .map(|g| g.family.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

/// Inverse of [`family_label`]; `None` for non-CNOT boundaries.
pub fn parse_layer_label(label: &str) -> Option<Vec<Family>> {
    let mut out = Vec::new();
    for tok in label.split('+') {
        let mut chars = tok.chars();
        let side = match chars.next()? {
            'X' => CheckType::X,
            'Z' => CheckType::Z,
            _ => return None,
        };
        let index: u8 = chars.as_str().parse().ok()?;
        if !(1..=6).contains(&index) {
            return None;
        }
        out.push(Family { side, index });
    }
    Some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitRole {
    Data(Sublattice),
    XAncilla,
    ZAncilla,
}

/// Qubit numbering: `L` data, `R` data, X ancillas, Z ancillas, each block
/// indexed by cell id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitLayout {
    pub cells: usize,
}

impl QubitLayout {
    pub fn new(spec: &BBCodeSpec) -> Self {
        Self { cells: spec.cells() }
    }

    pub fn from_meta(meta: &CircuitMeta) -> Self {
        Self { cells: meta.l * meta.m }
    }

    pub fn n_qubits(&self) -> usize {
        4 * self.cells
    }

    pub fn n_data(&self) -> usize {
        2 * self.cells
    }

    pub fn data(&self, sub: Sublattice, cell: usize) -> usize {
        match sub {
            Sublattice::L => cell,
            Sublattice::R => self.cells + cell,
        }
    }

    pub fn x_ancilla(&self, cell: usize) -> usize {
        2 * self.cells + cell
    }

    pub fn z_ancilla(&self, cell: usize) -> usize {
        3 * self.cells + cell
    }

    pub fn role(&self, q: usize) -> QubitRole {
        match q / self.cells {
            0 => QubitRole::Data(Sublattice::L),
            1 => QubitRole::Data(Sublattice::R),
            2 => QubitRole::XAncilla,
            _ => QubitRole::ZAncilla,
        }
    }
}

/// The seven CNOT layers of one syndrome round, each preceded by its
/// boundary marker.
pub fn build_seven_phase_round(spec: &BBCodeSpec, layout: &QubitLayout) -> Result<Vec<Instruction>> {
    if spec.a.len() != 3 || spec.b.len() != 3 {
        return Err(Error::InvalidSpec(
            "the seven-layer round needs three terms in each polynomial".into(),
        ));
    }
    let mut out = Vec::new();
    for (li, layer) in SCHEDULE.iter().enumerate() {
        out.push(Instruction::PhaseBoundary { label: family_label(li + 1) });
        let mut used = HashSet::new();
        for gate in layer.iter().flatten() {
            for cell in 0..spec.cells() {
                let i = spec.cell_at(cell);
                let (control, target) = match gate.family.side {
                    CheckType::X => {
                        let d: CellIndex = match gate.poly {
                            Poly::A => spec.a_of(gate.term, i),
                            Poly::B => spec.b_of(gate.term, i),
                        };
                        (layout.x_ancilla(cell), layout.data(gate.sub, spec.cell_id(d)))
                    }
                    CheckType::Z => {
                        let d = match gate.poly {
                            Poly::A => spec.a_t_of(gate.term, i),
                            Poly::B => spec.b_t_of(gate.term, i),
                        };
                        (layout.data(gate.sub, spec.cell_id(d)), layout.z_ancilla(cell))
                    }
                };
                for q in [control, target] {
                    if !used.insert(q) {
                        return Err(Error::LayerCollision { layer: li + 1, qubit: q });
                    }
                }
                out.push(Instruction::Cnot { control, target });
            }
        }
    }
    Ok(out)
}

/// Noiseless memory experiment: data prepared in `basis`, `rounds` syndrome
/// rounds, final transversal data measurement, one observable per logical of
/// the memory basis.
pub fn build_memory_circuit(spec: &BBCodeSpec, rounds: usize, basis: Basis) -> Result<Circuit> {
    if rounds == 0 {
        return Err(Error::InvalidSpec("at least one round is required".into()));
    }
    let checks = build_check_matrices(spec)?;
    let logicals = extract_logicals(&checks)?;
    let layout = QubitLayout::new(spec);
    let cells = layout.cells;
    let round_body = build_seven_phase_round(spec, &layout)?;

    let mut ins = Vec::new();
    ins.push(Instruction::PhaseBoundary { label: "init".into() });
    for q in 0..layout.n_data() {
        ins.push(Instruction::Reset { basis, qubit: q });
    }
    let x_rec = |r: usize, cell: usize| r * 2 * cells + cell;
    let z_rec = |r: usize, cell: usize| r * 2 * cells + cells + cell;
    let (basis_rec, other_rec): (&dyn Fn(usize, usize) -> usize, &dyn Fn(usize, usize) -> usize) =
        match basis {
            Basis::X => (&x_rec, &z_rec),
            Basis::Z => (&z_rec, &x_rec),
        };

    for r in 0..rounds {
        ins.push(Instruction::PhaseBoundary { label: "prep".into() });
        for cell in 0..cells {
            ins.push(Instruction::Reset { basis: Basis::X, qubit: layout.x_ancilla(cell) });
        }
        for cell in 0..cells {
            ins.push(Instruction::Reset { basis: Basis::Z, qubit: layout.z_ancilla(cell) });
        }
        ins.extend(round_body.iter().cloned());
        ins.push(Instruction::PhaseBoundary { label: "meas".into() });
        for cell in 0..cells {
            ins.push(Instruction::Measure {
                basis: Basis::X,
                qubit: layout.x_ancilla(cell),
                record: x_rec(r, cell),
            });
        }
        for cell in 0..cells {
            ins.push(Instruction::Measure {
                basis: Basis::Z,
                qubit: layout.z_ancilla(cell),
                record: z_rec(r, cell),
            });
        }
        for cell in 0..cells {
            let records = if r == 0 {
                vec![basis_rec(r, cell)]
            } else {
                vec![basis_rec(r - 1, cell), basis_rec(r, cell)]
            };
            ins.push(Instruction::Detector { records });
        }
        if r > 0 {
            for cell in 0..cells {
                ins.push(Instruction::Detector { records: vec![other_rec(r - 1, cell), other_rec(r, cell)] });
            }
        }
    }

    ins.push(Instruction::PhaseBoundary { label: "final".into() });
    let final_base = rounds * 2 * cells;
    for q in 0..layout.n_data() {
        ins.push(Instruction::Measure { basis, qubit: q, record: final_base + q });
    }
    let (h, ops) = match basis {
        Basis::X => (&checks.h_x, &logicals.x_logicals),
        Basis::Z => (&checks.h_z, &logicals.z_logicals),
    };
    for cell in 0..cells {
        let mut records = vec![basis_rec(rounds - 1, cell)];
        records.extend(h.row_support(cell).into_iter().map(|c| final_base + c));
        ins.push(Instruction::Detector { records });
    }
    for (index, op) in ops.iter().enumerate() {
        ins.push(Instruction::Observable {
            index,
            records: op.iter_ones().map(|c| final_base + c).collect(),
        });
    }

    let meta = CircuitMeta {
        code: spec.name.clone(),
        l: spec.l,
        m: spec.m,
        rounds,
        basis,
        schedule: "none".into(),
    };
    Ok(Circuit::from_instructions(layout.n_qubits(), ins, Some(meta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::validate_circuit;

    #[test]
    fn labels_round_trip() {
        let labels: Vec<String> = (1..=LAYER_COUNT).map(family_label).collect();
        assert_eq!(labels, ["Z1", "X1+Z2", "X2+Z3", "X3+Z4", "X4+Z5", "X5+Z6", "X6"]);
        for l in &labels {
            let fams = parse_layer_label(l).unwrap();
            let back = fams.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("+");
            assert_eq!(&back, l);
        }
        assert!(parse_layer_label("prep").is_none());
        assert!(parse_layer_label("X7").is_none());
    }

    #[test]
    fn bb72_memory_counts() {
        let spec = BBCodeSpec::bb72();
        let c = build_memory_circuit(&spec, 6, Basis::X).unwrap();
        assert!(validate_circuit(&c).is_empty());
        assert_eq!(c.n_qubits, 144);
        let cnots = c.count(|i| matches!(i, Instruction::Cnot { .. }));
        assert_eq!(cnots, 6 * 36 * 12);
        assert_eq!(c.n_records, 6 * 72 + 72);
        assert_eq!(c.n_detectors, 36 * 6 + 36 * 5 + 36);
        assert_eq!(c.n_observables, 12);
    }

    #[test]
    fn every_qubit_has_one_cnot_per_family() {
        let spec = BBCodeSpec::bb108();
        let layout = QubitLayout::new(&spec);
        let body = build_seven_phase_round(&spec, &layout).unwrap();
        let mut per_qubit = vec![0usize; layout.n_qubits()];
        for i in &body {
            if let Instruction::Cnot { control, target } = i {
                per_qubit[*control] += 1;
                per_qubit[*target] += 1;
            }
        }
        assert!(per_qubit.iter().all(|&c| c == 6), "{per_qubit:?}");
    }
}
