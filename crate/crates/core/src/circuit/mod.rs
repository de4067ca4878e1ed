//! Circuit instruction set shared by the noiseless memory circuit, the
//! erasure-annotated circuit and the converted stabilizer circuit.

mod memory;
mod text;

pub use memory::{
    build_memory_circuit, build_seven_phase_round, family_label, parse_layer_label, Family,
    QubitLayout, QubitRole, LAYER_COUNT,
};
pub use text::{parse_circuit, to_stim};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Self {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

/// Erasure checkpoint label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Checkpoint {
    A,
    B,
    C,
    D,
}

impl Checkpoint {
    pub const ALL: [Checkpoint; 4] = [Checkpoint::A, Checkpoint::B, Checkpoint::C, Checkpoint::D];

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Checkpoint::A),
            'B' => Some(Checkpoint::B),
            'C' => Some(Checkpoint::C),
            'D' => Some(Checkpoint::D),
            _ => None,
        }
    }
}

impl fmt::Display for Checkpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A Pauli on the (one or two) qubits of a channel instruction, as x/z bit
/// masks: bit 0 is the first qubit, bit 1 the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliTerm {
    pub x: u8,
    pub z: u8,
}

impl PauliTerm {
    pub const fn new(x: u8, z: u8) -> Self {
        Self { x, z }
    }

    pub fn is_identity(self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// The three (arity 1) or fifteen (arity 2) non-identity terms, in the
    /// order `X, Y, Z` per qubit with the first qubit varying slowest.
    pub fn nontrivial(arity: usize) -> Vec<PauliTerm> {
        let single = |code: u8| -> (u8, u8) {
            match code {
                0 => (0, 0),
                1 => (1, 0),
                2 => (1, 1),
                _ => (0, 1),
            }
        };
        let mut out = Vec::new();
        match arity {
            1 => {
                for a in 1..4 {
                    let (x, z) = single(a);
                    out.push(PauliTerm::new(x, z));
                }
            }
            2 => {
                for a in 0..4 {
                    for b in 0..4 {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        let (xa, za) = single(a);
                        let (xb, zb) = single(b);
                        out.push(PauliTerm::new(xa | (xb << 1), za | (zb << 1)));
                    }
                }
            }
            _ => panic!("unsupported arity {arity}"),
        }
        out
    }

    pub fn label(self, arity: usize) -> String {
        (0..arity)
            .map(|i| match ((self.x >> i) & 1, (self.z >> i) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }

    pub fn parse(label: &str) -> Option<(Self, usize)> {
        let mut t = PauliTerm::new(0, 0);
        let mut n = 0;
        for (i, c) in label.chars().enumerate() {
            let (x, z) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                _ => return None,
            };
            t.x |= x << i;
            t.z |= z << i;
            n += 1;
        }
        (n == 1 || n == 2).then_some((t, n))
    }
}

/// Independent error mechanisms of a Pauli channel. `Uniform(p)` puts
/// probability `p` on every non-identity term.
#[derive(Clone, Debug, PartialEq)]
pub enum Noise {
    Uniform(f64),
    List(Vec<(PauliTerm, f64)>),
}

impl Noise {
    pub fn mechanisms(&self, arity: usize) -> Vec<(PauliTerm, f64)> {
        match self {
            Noise::Uniform(p) => PauliTerm::nontrivial(arity)
                .into_iter()
                .map(|t| (t, *p))
                .collect(),
            Noise::List(v) => v.clone(),
        }
    }

    pub fn is_silent(&self) -> bool {
        match self {
            Noise::Uniform(p) => *p == 0.0,
            Noise::List(v) => v.iter().all(|(_, p)| *p == 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Reset {
        basis: Basis,
        qubit: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Measure {
        basis: Basis,
        qubit: usize,
        record: usize,
    },
    Channel1 {
        qubit: usize,
        noise: Noise,
    },
    Channel2 {
        a: usize,
        b: usize,
        noise: Noise,
    },
    /// Classical flip of an already written measurement record.
    MeasFlip {
        record: usize,
        p: f64,
    },
    /// Canonical erasure location of a segment; `partner` is set for the
    /// post-gate sites and absent for the terminal site.
    ErasureSite {
        site: usize,
        qubit: usize,
        partner: Option<usize>,
    },
    EcCheck {
        qubit: usize,
        checkpoint: Checkpoint,
        flag: usize,
    },
    /// Classical flip of an erasure-check flag.
    FlagFlip {
        flag: usize,
        p: f64,
    },
    /// Reset applied only when `flag` is raised, followed by a one-qubit
    /// depolarizing channel of strength `p`.
    CondReset {
        basis: Basis,
        qubit: usize,
        flag: usize,
        p: f64,
    },
    Detector {
        records: Vec<usize>,
    },
    Observable {
        index: usize,
        records: Vec<usize>,
    },
    PhaseBoundary {
        label: String,
    },
}

impl Instruction {
    /// Qubits the instruction acts on (empty for purely classical ones).
    pub fn qubits(&self) -> Vec<usize> {
        use Instruction::*;
        match self {
            Reset { qubit, .. }
            | Measure { qubit, .. }
            | Channel1 { qubit, .. }
            | EcCheck { qubit, .. }
            | CondReset { qubit, .. } => vec![*qubit],
            ErasureSite { qubit, partner, .. } => {
                let mut v = vec![*qubit];
                v.extend(partner);
                v
            }
            Cnot { control, target } => vec![*control, *target],
            Channel2 { a, b, .. } => vec![*a, *b],
            MeasFlip { .. }
            | FlagFlip { .. }
            | Detector { .. }
            | Observable { .. }
            | PhaseBoundary { .. } => vec![],
        }
    }

    pub fn is_erasure_annotation(&self) -> bool {
        matches!(
            self,
            Instruction::ErasureSite { .. }
                | Instruction::EcCheck { .. }
                | Instruction::FlagFlip { .. }
                | Instruction::CondReset { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub code: String,
    pub l: usize,
    pub m: usize,
    pub rounds: usize,
    pub basis: Basis,
    pub schedule: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub instructions: Vec<Instruction>,
    pub n_records: usize,
    pub n_flags: usize,
    pub n_detectors: usize,
    pub n_observables: usize,
    pub meta: Option<CircuitMeta>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "instruction {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl Circuit {
    /// Builds a circuit from instructions, deriving the counters.
    pub fn from_instructions(
        n_qubits: usize,
        instructions: Vec<Instruction>,
        meta: Option<CircuitMeta>,
    ) -> Self {
        let mut c = Circuit {
            n_qubits,
            instructions,
            n_records: 0,
            n_flags: 0,
            n_detectors: 0,
            n_observables: 0,
            meta,
        };
        c.recount();
        c
    }

    pub fn recount(&mut self) {
        let mut records = 0;
        let mut flags = 0;
        let mut detectors = 0;
        let mut observables = 0;
        for ins in &self.instructions {
            match ins {
                Instruction::Measure { record, .. } => records = records.max(record + 1),
                Instruction::EcCheck { flag, .. } => flags = flags.max(flag + 1),
                Instruction::Detector { .. } => detectors += 1,
                Instruction::Observable { index, .. } => observables = observables.max(index + 1),
                _ => {}
            }
        }
        self.n_records = records;
        self.n_flags = flags;
        self.n_detectors = detectors;
        self.n_observables = observables;
    }

    pub fn count(&self, pred: impl Fn(&Instruction) -> bool) -> usize {
        self.instructions.iter().filter(|i| pred(i)).count()
    }

    pub fn to_text(&self) -> String {
        text::print_circuit(self)
    }
}

/// Checks every structural invariant; an empty result means the circuit is
/// well formed.
pub fn validate_circuit(c: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |index: Option<usize>, message: String| out.push(Violation { index, message });
    let mut written_records = 0usize;
    let mut last_record: Option<usize> = None;
    let mut last_flag: Option<usize> = None;
    let mut written_flags = 0usize;
    let mut layer_cnot_qubits: HashSet<usize> = HashSet::new();
    let prob_ok = |p: f64| (0.0..=1.0).contains(&p);

    for (idx, ins) in c.instructions.iter().enumerate() {
        let at = Some(idx);
        for q in ins.qubits() {
            if q >= c.n_qubits {
                push(at, format!("qubit {q} out of range (n_qubits = {})", c.n_qubits));
            }
        }
        match ins {
            Instruction::Cnot { control, target } => {
                if control == target {
                    push(at, format!("CNOT endpoints coincide on qubit {control}"));
                }
                for q in [*control, *target] {
                    if !layer_cnot_qubits.insert(q) {
                        push(at, format!("qubit {q} appears in two CNOTs of one layer"));
                    }
                }
            }
            Instruction::Measure { record, .. } => {
                if let Some(prev) = last_record {
                    if *record <= prev {
                        push(at, format!("record slot {record} not increasing"));
                    }
                }
                if *record >= c.n_records {
                    push(at, format!("record slot {record} beyond n_records"));
                }
                last_record = Some(*record);
                written_records = written_records.max(record + 1);
            }
            Instruction::MeasFlip { record, p } => {
                if *record >= written_records {
                    push(at, format!("MEAS_FLIP references unwritten record {record}"));
                }
                if !prob_ok(*p) {
                    push(at, format!("probability {p} outside [0, 1]"));
                }
            }
            Instruction::Channel1 { noise, .. } | Instruction::Channel2 { noise, .. } => {
                let arity = if matches!(ins, Instruction::Channel1 { .. }) { 1 } else { 2 };
                if let Instruction::Channel2 { a, b, .. } = ins {
                    if a == b {
                        push(at, "two-qubit channel on a single qubit".into());
                    }
                }
                for (t, p) in noise.mechanisms(arity) {
                    if t.is_identity() {
                        push(at, "identity mechanism in channel".into());
                    }
                    if u32::from(t.x | t.z) >> arity != 0 {
                        push(at, "mechanism acts outside channel qubits".into());
                    }
                    if !prob_ok(p) {
                        push(at, format!("probability {p} outside [0, 1]"));
                    }
                }
            }
            Instruction::EcCheck { flag, .. } => {
                if let Some(prev) = last_flag {
                    if *flag <= prev {
                        push(at, format!("flag slot {flag} not increasing"));
                    }
                }
                last_flag = Some(*flag);
                written_flags = written_flags.max(flag + 1);
            }
            Instruction::FlagFlip { flag, p } | Instruction::CondReset { flag, p, .. } => {
                if *flag >= written_flags {
                    push(at, format!("reference to unwritten flag {flag}"));
                }
                if !prob_ok(*p) {
                    push(at, format!("probability {p} outside [0, 1]"));
                }
            }
            Instruction::Detector { records } | Instruction::Observable { records, .. } => {
                for r in records {
                    if *r >= written_records {
                        push(at, format!("reference to unwritten record {r}"));
                    }
                }
                if let Instruction::Observable { index, .. } = ins {
                    if *index >= c.n_observables {
                        push(at, format!("observable index {index} out of range"));
                    }
                }
            }
            Instruction::PhaseBoundary { .. } => layer_cnot_qubits.clear(),
            Instruction::Reset { .. } | Instruction::ErasureSite { .. } => {}
        }
    }
    let detectors = c.count(|i| matches!(i, Instruction::Detector { .. }));
    if detectors != c.n_detectors {
        push(None, format!("n_detectors = {} but {detectors} DETECTOR lines", c.n_detectors));
    }
    if written_records != c.n_records {
        push(None, format!("n_records = {} but {written_records} written", c.n_records));
    }
    out
}
