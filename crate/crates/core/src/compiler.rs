//! Lowering of the noiseless memory circuit into the erasure-annotated
//! circuit: noise channels, erasure checks at the schedule's checkpoints,
//! canonical erasure sites, and the per-wire segment partition.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bbcode::CheckType;
use crate::circuit::{
    parse_layer_label, Basis, Checkpoint, Circuit, Family, Instruction, Noise, QubitLayout, QubitRole,
};
use crate::error::{Error, Result};
use crate::seeds;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLaw {
    pub e: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl NoiseLaw {
    pub const DEFAULT_BETA: f64 = 0.1;
    pub const DEFAULT_GAMMA: f64 = 1.0;

    pub fn new(e: f64) -> Result<Self> {
        Self::with_scales(e, Self::DEFAULT_BETA, Self::DEFAULT_GAMMA)
    }

    pub fn with_scales(e: f64, beta: f64, gamma: f64) -> Result<Self> {
        let law = Self { e, beta, gamma };
        for (name, v) in [("e", e), ("p", law.p()), ("q", law.q())] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(law)
    }

    /// Pauli strength attached to gates and resets.
    pub fn p(&self) -> f64 {
        self.beta * self.e
    }

    /// Measurement and flag flip probability.
    pub fn q(&self) -> f64 {
        self.gamma * self.e
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EcSchedule {
    pub checkpoints: Vec<Checkpoint>,
}

impl EcSchedule {
    pub fn four_ec() -> Self {
        Self { checkpoints: Checkpoint::ALL.to_vec() }
    }

    pub fn two_ec() -> Self {
        Self { checkpoints: vec![Checkpoint::B, Checkpoint::D] }
    }

    pub fn from_checkpoints(mut cps: Vec<Checkpoint>) -> Result<Self> {
        cps.sort();
        cps.dedup();
        if cps.last() != Some(&Checkpoint::D) {
            return Err(Error::Config("checkpoint D is always required".into()));
        }
        Ok(Self { checkpoints: cps })
    }

    /// Accepts `4ec`, `2ec`, or a checkpoint string such as `AD` or `BCD`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "4ec" => Ok(Self::four_ec()),
            "2ec" => Ok(Self::two_ec()),
            other => {
                let cps = other
                    .chars()
                    .map(|c| Checkpoint::from_char(c).ok_or_else(|| Error::Config(format!("bad schedule {s:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                Self::from_checkpoints(cps)
            }
        }
    }

    pub fn tag(&self) -> String {
        if *self == Self::four_ec() {
            "4EC".into()
        } else if *self == Self::two_ec() {
            "2EC".into()
        } else {
            self.checkpoints.iter().map(|c| c.to_string()).collect()
        }
    }

    pub fn contains(&self, cp: Checkpoint) -> bool {
        self.checkpoints.contains(&cp)
    }

    /// Bundle each CNOT family belongs to.
    pub fn bundle_of(f: Family) -> Checkpoint {
        use CheckType::{X, Z};
        match (f.side, f.index) {
            (Z, 1) | (X, 1) | (Z, 2) => Checkpoint::A,
            (X, 2) | (Z, 3) | (X, 3) | (Z, 4) => Checkpoint::B,
            (X, 4) | (Z, 5) | (X, 5) => Checkpoint::C,
            _ => Checkpoint::D,
        }
    }

    pub fn phase_partition() -> Vec<(Checkpoint, Vec<Family>)> {
        let mut fams = Vec::new();
        for side in [CheckType::X, CheckType::Z] {
            for index in 1..=6 {
                fams.push(Family { side, index });
            }
        }
        Checkpoint::ALL
            .iter()
            .map(|&cp| (cp, fams.iter().copied().filter(|&f| Self::bundle_of(f) == cp).collect()))
            .collect()
    }
}

impl fmt::Display for EcSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Place erasure checks on data qubits only.
    pub data_only: bool,
    /// Attach a one-qubit channel of strength p to qubits idle in a CNOT layer.
    pub idle_noise: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentEnd {
    Check { flag: usize, checkpoint: Checkpoint },
    Reset,
    CircuitEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interaction {
    pub position: usize,
    pub partner: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub id: usize,
    pub position: usize,
    pub partner: Option<usize>,
}

/// Instructions of one wire between two closing events, with the gates
/// `G_1..G_r` and sites `F_1..F_{r+1}` for checked segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub qubit: usize,
    pub start: usize,
    pub end: usize,
    pub interactions: Vec<Interaction>,
    pub sites: Vec<Site>,
    pub end_kind: SegmentEnd,
}

impl Segment {
    pub fn r(&self) -> usize {
        self.interactions.len()
    }

    pub fn flag(&self) -> Option<usize> {
        match self.end_kind {
            SegmentEnd::Check { flag, .. } => Some(flag),
            _ => None,
        }
    }

    pub fn checkpoint(&self) -> Option<Checkpoint> {
        match self.end_kind {
            SegmentEnd::Check { checkpoint, .. } => Some(checkpoint),
            _ => None,
        }
    }

    pub fn is_checked(&self) -> bool {
        self.flag().is_some()
    }
}

#[derive(Clone, Debug)]
pub struct ErasureCircuit {
    pub circuit: Circuit,
    pub segments: Vec<Segment>,
    pub schedule: EcSchedule,
    pub noise: NoiseLaw,
    pub options: CompileOptions,
}

impl ErasureCircuit {
    pub fn checked_segments(&self) -> impl Iterator<Item = (usize, &Segment)> {
        self.segments.iter().enumerate().filter(|(_, s)| s.is_checked())
    }

    pub fn n_sites(&self) -> usize {
        self.circuit.count(|i| matches!(i, Instruction::ErasureSite { .. }))
    }
}

pub fn compile(c0: &Circuit, noise: &NoiseLaw, schedule: &EcSchedule) -> Result<ErasureCircuit> {
    compile_with(c0, noise, schedule, &CompileOptions::default())
}

struct Event {
    round: usize,
    index: usize,
    bundle: Checkpoint,
    block_end: usize,
}

struct PendingCheck {
    qubit: usize,
    checkpoint: Checkpoint,
    cond_reset: bool,
}

pub fn compile_with(
    c0: &Circuit,
    noise: &NoiseLaw,
    schedule: &EcSchedule,
    options: &CompileOptions,
) -> Result<ErasureCircuit> {
    let meta = c0
        .meta
        .as_ref()
        .ok_or_else(|| Error::InvalidCircuit("memory-circuit metadata missing".into()))?;
    let violations = crate::circuit::validate_circuit(c0);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidCircuit(v.to_string()));
    }
    let layout = QubitLayout::from_meta(meta);
    if layout.n_qubits() != c0.n_qubits {
        return Err(Error::InvalidCircuit("qubit count does not match layout".into()));
    }
    let ins = &c0.instructions;
    let n = ins.len();

    let mut next_boundary = vec![n; n];
    let mut nb = n;
    for i in (0..n).rev() {
        next_boundary[i] = nb;
        if matches!(ins[i], Instruction::PhaseBoundary { .. }) {
            nb = i;
        }
    }

    let mut events: Vec<Vec<Event>> = (0..c0.n_qubits).map(|_| Vec::new()).collect();
    let mut ancilla_measure: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut round_meas: Vec<usize> = Vec::new();
    let mut round_first_layer: Vec<Option<usize>> = Vec::new();
    let mut round: Option<usize> = None;
    let mut layer: Option<Vec<Family>> = None;
    for (i, instr) in ins.iter().enumerate() {
        match instr {
            Instruction::PhaseBoundary { label } => {
                layer = parse_layer_label(label);
                if label == "prep" {
                    round = Some(round.map_or(0, |r| r + 1));
                    round_first_layer.push(None);
                } else if label == "meas" {
                    round_meas.push(i);
                }
                if let (Some(r), Some(_)) = (round, &layer) {
                    round_first_layer[r].get_or_insert(i);
                }
            }
            Instruction::Cnot { control, target } => {
                let fams = layer.as_ref().ok_or_else(|| {
                    Error::ScheduleMismatch(format!("CNOT at instruction {i} outside a labelled layer"))
                })?;
                let side = match layout.role(*control) {
                    QubitRole::XAncilla => CheckType::X,
                    _ => CheckType::Z,
                };
                let fam = fams.iter().find(|f| f.side == side).ok_or_else(|| {
                    Error::ScheduleMismatch(format!("layer at instruction {i} has no {side:?}-side family"))
                })?;
                let r = round.ok_or_else(|| Error::ScheduleMismatch("CNOT before the first round".into()))?;
                for q in [*control, *target] {
                    events[q].push(Event {
                        round: r,
                        index: i,
                        bundle: EcSchedule::bundle_of(*fam),
                        block_end: next_boundary[i],
                    });
                }
            }
            Instruction::Measure { qubit, .. } => {
                if let (Some(r), false) = (round, matches!(layout.role(*qubit), QubitRole::Data(_))) {
                    ancilla_measure.insert((*qubit, r), i);
                }
            }
            _ => {}
        }
    }
    let rounds = round.map_or(0, |r| r + 1);
    if round_meas.len() != rounds {
        return Err(Error::ScheduleMismatch("every round needs a measurement boundary".into()));
    }

    let mut pending: BTreeMap<usize, Vec<PendingCheck>> = BTreeMap::new();
    for q in 0..c0.n_qubits {
        let role = layout.role(q);
        let is_data = matches!(role, QubitRole::Data(_));
        if options.data_only && !is_data {
            continue;
        }
        for r in 0..rounds {
            let evs: Vec<&Event> = events[q].iter().filter(|e| e.round == r).collect();
            if evs.is_empty() && !is_data {
                continue;
            }
            for &cp in schedule.checkpoints.iter().filter(|&&c| c != Checkpoint::D) {
                let last_le = evs.iter().filter(|e| e.bundle <= cp).max_by_key(|e| e.index);
                let first_gt = evs.iter().filter(|e| e.bundle > cp).min_by_key(|e| e.index);
                let pos = match last_le {
                    Some(a) => {
                        if let Some(b) = first_gt {
                            if b.block_end <= a.block_end {
                                return Err(Error::ScheduleMismatch(format!(
                                    "qubit {q} round {r}: checkpoint {cp} splits a layer"
                                )));
                            }
                        }
                        a.block_end
                    }
                    None => round_first_layer[r].ok_or_else(|| {
                        Error::ScheduleMismatch(format!("round {r} has no CNOT layers"))
                    })?,
                };
                pending.entry(pos).or_default().push(PendingCheck { qubit: q, checkpoint: cp, cond_reset: true });
            }
            let pos = if is_data {
                round_meas[r]
            } else {
                *ancilla_measure.get(&(q, r)).ok_or_else(|| {
                    Error::ScheduleMismatch(format!("ancilla {q} not measured in round {r}"))
                })?
            };
            pending.entry(pos).or_default().push(PendingCheck {
                qubit: q,
                checkpoint: Checkpoint::D,
                cond_reset: is_data && r + 1 < rounds,
            });
        }
    }
    for v in pending.values_mut() {
        v.sort_by_key(|p| (p.qubit, p.checkpoint));
    }

    let p = noise.p();
    let q_flip = noise.q();
    let reset_basis = |q: usize| match layout.role(q) {
        QubitRole::Data(_) => meta.basis,
        QubitRole::XAncilla => Basis::X,
        QubitRole::ZAncilla => Basis::Z,
    };
    let mut out: Vec<Instruction> = Vec::with_capacity(n * 3);
    let mut next_flag = 0usize;
    let mut layer_touched: Option<HashSet<usize>> = None;
    let mut live: HashSet<usize> = HashSet::new();
    let flush_idle = |out: &mut Vec<Instruction>, touched: &mut Option<HashSet<usize>>, live: &HashSet<usize>| {
        if let Some(t) = touched.take() {
            let mut idle: Vec<usize> = live.difference(&t).copied().collect();
            idle.sort_unstable();
            for qubit in idle {
                out.push(Instruction::Channel1 { qubit, noise: Noise::Uniform(p / 3.0) });
            }
        }
    };
    for i in 0..=n {
        let boundary_here = i == n || matches!(ins[i], Instruction::PhaseBoundary { .. });
        if boundary_here && options.idle_noise {
            flush_idle(&mut out, &mut layer_touched, &live);
        }
        if let Some(list) = pending.get(&i) {
            for pc in list {
                out.push(Instruction::ErasureSite { site: 0, qubit: pc.qubit, partner: None });
                let flag = next_flag;
                next_flag += 1;
                out.push(Instruction::EcCheck { qubit: pc.qubit, checkpoint: pc.checkpoint, flag });
                out.push(Instruction::FlagFlip { flag, p: q_flip });
                if pc.cond_reset {
                    out.push(Instruction::CondReset { basis: reset_basis(pc.qubit), qubit: pc.qubit, flag, p });
                }
            }
        }
        if i == n {
            break;
        }
        let instr = &ins[i];
        out.push(instr.clone());
        match instr {
            Instruction::Reset { qubit, .. } => {
                live.insert(*qubit);
                out.push(Instruction::Channel1 { qubit: *qubit, noise: Noise::Uniform(p / 3.0) });
            }
            Instruction::Cnot { control, target } => {
                out.push(Instruction::Channel2 { a: *control, b: *target, noise: Noise::Uniform(p / 15.0) });
                out.push(Instruction::ErasureSite { site: 0, qubit: *control, partner: Some(*target) });
                out.push(Instruction::ErasureSite { site: 0, qubit: *target, partner: Some(*control) });
                if let Some(t) = layer_touched.as_mut() {
                    t.insert(*control);
                    t.insert(*target);
                }
            }
            Instruction::Measure { qubit, record, .. } => {
                live.remove(qubit);
                out.push(Instruction::MeasFlip { record: *record, p: q_flip });
            }
            Instruction::PhaseBoundary { label } if options.idle_noise => {
                if parse_layer_label(label).is_some() {
                    layer_touched = Some(HashSet::new());
                }
            }
            _ => {}
        }
    }

    let mut site_order: Vec<(usize, usize)> = out
        .iter()
        .enumerate()
        .filter_map(|(pos, i)| match i {
            Instruction::ErasureSite { qubit, .. } => Some((*qubit, pos)),
            _ => None,
        })
        .collect();
    site_order.sort_unstable();
    for (id, &(_, pos)) in site_order.iter().enumerate() {
        if let Instruction::ErasureSite { site, .. } = &mut out[pos] {
            *site = id;
        }
    }

    let mut meta = meta.clone();
    meta.schedule = schedule.tag();
    let circuit = Circuit::from_instructions(c0.n_qubits, out, Some(meta));
    let segments = enumerate_segments(&circuit, schedule)?;
    Ok(ErasureCircuit { circuit, segments, schedule: schedule.clone(), noise: *noise, options: options.clone() })
}

struct OpenSegment {
    start: usize,
    interactions: Vec<Interaction>,
    sites: Vec<Site>,
}

impl OpenSegment {
    fn new(start: usize) -> Self {
        Self { start, interactions: Vec::new(), sites: Vec::new() }
    }

    fn close(self, qubit: usize, end: usize, end_kind: SegmentEnd) -> Segment {
        Segment { qubit, start: self.start, end, interactions: self.interactions, sites: self.sites, end_kind }
    }
}

/// Partitions every wire of an annotated circuit into segments. A segment
/// closes at an `EC_CHECK`, just before an unconditional reset, or at the
/// end of the circuit.
pub fn enumerate_segments(c: &Circuit, schedule: &EcSchedule) -> Result<Vec<Segment>> {
    let mut open: Vec<Option<OpenSegment>> = (0..c.n_qubits).map(|_| None).collect();
    let mut segs = Vec::new();
    for (pos, instr) in c.instructions.iter().enumerate() {
        match instr {
            Instruction::Reset { qubit, .. } => {
                if let Some(s) = open[*qubit].take() {
                    segs.push(s.close(*qubit, pos - 1, SegmentEnd::Reset));
                }
                open[*qubit] = Some(OpenSegment::new(pos));
            }
            Instruction::EcCheck { qubit, checkpoint, flag } => {
                if !schedule.contains(*checkpoint) {
                    return Err(Error::ScheduleMismatch(format!(
                        "checkpoint {checkpoint} is not part of schedule {schedule}"
                    )));
                }
                let s = open[*qubit].take().unwrap_or_else(|| OpenSegment::new(pos));
                segs.push(s.close(*qubit, pos, SegmentEnd::Check { flag: *flag, checkpoint: *checkpoint }));
            }
            _ => {
                for q in instr.qubits() {
                    open[q].get_or_insert_with(|| OpenSegment::new(pos));
                }
                match instr {
                    Instruction::Cnot { control, target } => {
                        for (a, b) in [(*control, *target), (*target, *control)] {
                            if let Some(s) = open[a].as_mut() {
                                s.interactions.push(Interaction { position: pos, partner: b });
                            }
                        }
                    }
                    Instruction::ErasureSite { site, qubit, partner } => {
                        if let Some(s) = open[*qubit].as_mut() {
                            s.sites.push(Site { id: *site, position: pos, partner: *partner });
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    let last = c.instructions.len().saturating_sub(1);
    for (q, s) in open.into_iter().enumerate() {
        if let Some(s) = s {
            segs.push(s.close(q, last, SegmentEnd::CircuitEnd));
        }
    }
    segs.sort_by_key(|s| (s.qubit, s.start));
    for s in segs.iter().filter(|s| s.is_checked()) {
        let ok = s.sites.len() == s.r() + 1
            && s.sites.last().is_some_and(|t| t.partner.is_none())
            && s.interactions.iter().zip(&s.sites).all(|(g, f)| f.partner == Some(g.partner) && f.position > g.position);
        if !ok {
            return Err(Error::ScheduleMismatch(format!(
                "segment of qubit {} at {} has inconsistent erasure sites",
                s.qubit, s.start
            )));
        }
    }
    Ok(segs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub qubit: usize,
    pub segment: usize,
    pub checkpoint: Checkpoint,
}

/// One sampled erasure pattern: per-segment physical first hit (1-based
/// site number) and observed flag, plus the list of flagged checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureLog {
    pub first_hit: Vec<Option<usize>>,
    pub flags: Vec<bool>,
    pub entries: Vec<LogEntry>,
}

impl ErasureLog {
    pub fn n_flagged(&self) -> usize {
        self.entries.len()
    }
}

pub fn sample_erasure_pattern(ce: &ErasureCircuit, seed: u64) -> ErasureLog {
    let mut rng = seeds::rng(seed);
    let e = ce.noise.e;
    let q = ce.noise.q();
    let n = ce.segments.len();
    let mut first_hit = vec![None; n];
    let mut flags = vec![false; n];
    let mut entries = Vec::new();
    for (idx, seg) in ce.checked_segments() {
        let hit = (1..=seg.sites.len()).find(|_| e > 0.0 && rng.gen_bool(e));
        let flip = q > 0.0 && rng.gen_bool(q);
        let flag = hit.is_some() ^ flip;
        first_hit[idx] = hit;
        flags[idx] = flag;
        if flag {
            entries.push(LogEntry { qubit: seg.qubit, segment: idx, checkpoint: seg.checkpoint().unwrap() });
        }
    }
    ErasureLog { first_hit, flags, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bbcode::BBCodeSpec;
    use crate::circuit::{build_memory_circuit, validate_circuit};

    fn ce(schedule: EcSchedule, rounds: usize) -> ErasureCircuit {
        let c0 = build_memory_circuit(&BBCodeSpec::bb72(), rounds, Basis::X).unwrap();
        compile(&c0, &NoiseLaw::new(0.01).unwrap(), &schedule).unwrap()
    }

    #[test]
    fn partition_sizes() {
        let sizes: Vec<usize> = EcSchedule::phase_partition().iter().map(|(_, f)| f.len()).collect();
        assert_eq!(sizes, [3, 4, 3, 2]);
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!(EcSchedule::parse("4ec").unwrap(), EcSchedule::four_ec());
        assert_eq!(EcSchedule::parse("2EC").unwrap().tag(), "2EC");
        assert_eq!(EcSchedule::parse("ad").unwrap().tag(), "AD");
        assert!(EcSchedule::parse("AB").is_err());
        assert!(EcSchedule::parse("xyz").is_err());
    }

    #[test]
    fn compiled_circuit_is_valid_and_counts_match() {
        let c = ce(EcSchedule::four_ec(), 2);
        assert!(validate_circuit(&c.circuit).is_empty(), "{:?}", validate_circuit(&c.circuit));
        let checks = c.circuit.count(|i| matches!(i, Instruction::EcCheck { .. }));
        assert_eq!(checks, 144 * 4 * 2);
        let max_r = c.segments.iter().filter(|s| s.is_checked()).map(|s| s.r()).max().unwrap();
        assert_eq!(max_r, 2);
        let c2 = ce(EcSchedule::two_ec(), 2);
        let max_r = c2.segments.iter().filter(|s| s.is_checked()).map(|s| s.r()).max().unwrap();
        assert_eq!(max_r, 4);
    }

    #[test]
    fn segments_partition_every_wire() {
        let c = ce(EcSchedule::two_ec(), 2);
        let mut covered = vec![vec![0u8; c.circuit.instructions.len()]; c.circuit.n_qubits];
        for s in &c.segments {
            for pos in s.start..=s.end {
                covered[s.qubit][pos] += 1;
            }
        }
        for (pos, ins) in c.circuit.instructions.iter().enumerate() {
            for q in ins.qubits() {
                assert_eq!(covered[q][pos], 1, "qubit {q} at {pos}");
            }
        }
        for wire in &covered {
            assert!(wire.iter().all(|&x| x <= 1));
        }
    }

    #[test]
    fn compile_is_deterministic() {
        let a = ce(EcSchedule::four_ec(), 2);
        let b = ce(EcSchedule::four_ec(), 2);
        assert_eq!(a.circuit.to_text(), b.circuit.to_text());
    }

    #[test]
    fn zero_rate_log_is_empty() {
        let c0 = build_memory_circuit(&BBCodeSpec::bb72(), 2, Basis::X).unwrap();
        let c = compile(&c0, &NoiseLaw::new(0.0).unwrap(), &EcSchedule::four_ec()).unwrap();
        for seed in 0..5 {
            assert!(sample_erasure_pattern(&c, seed).entries.is_empty());
        }
    }

    #[test]
    fn certain_erasure_hits_first_site() {
        let c0 = build_memory_circuit(&BBCodeSpec::bb72(), 1, Basis::X).unwrap();
        let c = compile(&c0, &NoiseLaw::with_scales(1.0, 0.1, 0.0).unwrap(), &EcSchedule::two_ec()).unwrap();
        let log = sample_erasure_pattern(&c, 3);
        for (idx, _) in c.checked_segments() {
            assert_eq!(log.first_hit[idx], Some(1));
            assert!(log.flags[idx]);
        }
    }

    #[test]
    fn noise_law_rejects_out_of_range() {
        assert!(NoiseLaw::with_scales(0.5, 0.1, 3.0).is_err());
        assert!(NoiseLaw::new(-0.1).is_err());
        let law = NoiseLaw::new(0.01).unwrap();
        assert!((law.p() - 0.001).abs() < 1e-15 && (law.q() - 0.01).abs() < 1e-15);
    }
}
