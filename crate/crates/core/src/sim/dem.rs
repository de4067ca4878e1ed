use std::collections::HashMap;
use std::fmt::Write as _;

use super::frame::for_each_hit;
use super::ShotBatch;
use crate::circuit::{Basis, Circuit, Instruction, PauliTerm};
use crate::error::{Error, Result};
use crate::gf2::{iter_ones, words_for, xor_words};
use crate::seeds;

#[derive(Clone, Debug, PartialEq)]
pub struct DemMechanism {
    pub p: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorErrorModel {
    pub n_detectors: usize,
    pub n_observables: usize,
    pub mechanisms: Vec<DemMechanism>,
}

/// XOR-combination of two independent flip probabilities.
pub fn xor_prob(p: f64, q: f64) -> f64 {
    p + q - 2.0 * p * q
}

/// Accumulates mechanisms keyed by their packed flip set (detectors first,
/// then observables), merging duplicates.
#[derive(Clone, Debug)]
pub struct DemAccumulator {
    n_detectors: usize,
    n_observables: usize,
    index: HashMap<Vec<u64>, usize>,
    entries: Vec<(Vec<u64>, f64)>,
}

impl DemAccumulator {
    pub fn new(n_detectors: usize, n_observables: usize) -> Self {
        Self { n_detectors, n_observables, index: HashMap::new(), entries: Vec::new() }
    }

    pub fn width(&self) -> usize {
        self.n_detectors + self.n_observables
    }

    pub fn add(&mut self, flips: &[u64], p: f64) {
        if p <= 0.0 || flips.iter().all(|&w| w == 0) {
            return;
        }
        match self.index.get(flips) {
            Some(&i) => self.entries[i].1 = xor_prob(self.entries[i].1, p),
            None => {
                self.index.insert(flips.to_vec(), self.entries.len());
                self.entries.push((flips.to_vec(), p));
            }
        }
    }

    pub fn finish(self) -> DetectorErrorModel {
        let nd = self.n_detectors;
        let mechanisms = self
            .entries
            .into_iter()
            .map(|(flips, p)| {
                let mut detectors = Vec::new();
                let mut observables = Vec::new();
                for i in iter_ones(&flips) {
                    if i < nd {
                        detectors.push(i);
                    } else {
                        observables.push(i - nd);
                    }
                }
                DemMechanism { p, detectors, observables }
            })
            .collect();
        DetectorErrorModel { n_detectors: nd, n_observables: self.n_observables, mechanisms }
    }
}

/// Flip sets of X and Z errors on every qubit at one point of the circuit,
/// obtained by one backward pass.
pub struct Sensitivity {
    pub words: usize,
    sx: Vec<u64>,
    sz: Vec<u64>,
}

impl Sensitivity {
    pub fn flips(&self, qubits: &[usize], t: PauliTerm, out: &mut [u64]) {
        out.fill(0);
        for (i, &q) in qubits.iter().enumerate() {
            if (t.x >> i) & 1 == 1 {
                xor_words(out, &self.sx[q * self.words..(q + 1) * self.words]);
            }
            if (t.z >> i) & 1 == 1 {
                xor_words(out, &self.sz[q * self.words..(q + 1) * self.words]);
            }
        }
    }
}

/// For each record slot, the detectors and observables it feeds.
fn record_sensitivity(c: &Circuit, words: usize) -> Vec<u64> {
    let mut rec_sens = vec![0u64; c.n_records * words];
    let mut det = 0usize;
    for ins in &c.instructions {
        let (records, bit) = match ins {
            Instruction::Detector { records } => {
                det += 1;
                (records, det - 1)
            }
            Instruction::Observable { index, records } => (records, c.n_detectors + index),
            _ => continue,
        };
        for &r in records {
            rec_sens[r * words + bit / 64] ^= 1 << (bit % 64);
        }
    }
    rec_sens
}

/// Runs the backward sensitivity pass, calling `visit(position, &sens)` just
/// after each instruction (i.e. with the sensitivities an error inserted
/// right after it would see), in reverse program order.
pub fn backward_pass(c: &Circuit, mut visit: impl FnMut(usize, &Sensitivity)) {
    let width = c.n_detectors + c.n_observables;
    let words = words_for(width).max(1);
    let rec_sens = record_sensitivity(c, words);
    let mut s = Sensitivity { words, sx: vec![0; c.n_qubits * words], sz: vec![0; c.n_qubits * words] };
    for (pos, ins) in c.instructions.iter().enumerate().rev() {
        visit(pos, &s);
        match ins {
            Instruction::Reset { qubit, .. } => {
                s.sx[qubit * words..(qubit + 1) * words].fill(0);
                s.sz[qubit * words..(qubit + 1) * words].fill(0);
            }
            Instruction::Cnot { control, target } => {
                for k in 0..words {
                    s.sx[control * words + k] ^= s.sx[target * words + k];
                    s.sz[target * words + k] ^= s.sz[control * words + k];
                }
            }
            Instruction::Measure { basis, qubit, record } => {
                let v = match basis {
                    Basis::Z => &mut s.sx,
                    Basis::X => &mut s.sz,
                };
                for k in 0..words {
                    v[qubit * words + k] ^= rec_sens[record * words + k];
                }
            }
            _ => {}
        }
    }
}

/// Mechanisms of `c` in program order, before merging.
fn mechanisms_of(c: &Circuit) -> Vec<(Vec<u64>, f64)> {
    let width = c.n_detectors + c.n_observables;
    let words = words_for(width).max(1);
    let terms1 = PauliTerm::nontrivial(1);
    let terms2 = PauliTerm::nontrivial(2);
    let rec_sens = record_sensitivity(c, words);
    let mut per_pos: Vec<Vec<(Vec<u64>, f64)>> = Vec::new();
    let mut buf = vec![0u64; words];
    backward_pass(c, |pos, sens| {
        let mut here = Vec::new();
        match &c.instructions[pos] {
            Instruction::Channel1 { qubit, noise } => {
                let mech = match noise {
                    crate::circuit::Noise::Uniform(p) => terms1.iter().map(|&t| (t, *p)).collect(),
                    crate::circuit::Noise::List(v) => v.clone(),
                };
                for (t, p) in mech {
                    sens.flips(&[*qubit], t, &mut buf);
                    here.push((buf.clone(), p));
                }
            }
            Instruction::Channel2 { a, b, noise } => {
                let mech = match noise {
                    crate::circuit::Noise::Uniform(p) => terms2.iter().map(|&t| (t, *p)).collect(),
                    crate::circuit::Noise::List(v) => v.clone(),
                };
                for (t, p) in mech {
                    sens.flips(&[*a, *b], t, &mut buf);
                    here.push((buf.clone(), p));
                }
            }
            Instruction::MeasFlip { record, p } => {
                here.push((rec_sens[record * words..(record + 1) * words].to_vec(), *p));
            }
            _ => {}
        }
        if !here.is_empty() {
            per_pos.push(here);
        }
    });
    per_pos.into_iter().rev().flatten().collect()
}

/// Detector error model of a Pauli-noise circuit: every mechanism is mapped
/// to the detectors and observables it flips; identical flip sets are merged
/// and mechanisms flipping nothing are dropped.
pub fn extract_dem(c: &Circuit) -> DetectorErrorModel {
    let mut acc = DemAccumulator::new(c.n_detectors, c.n_observables);
    for (flips, p) in mechanisms_of(c) {
        acc.add(&flips, p);
    }
    acc.finish()
}

impl DetectorErrorModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "detectors {}", self.n_detectors);
        let _ = writeln!(out, "observables {}", self.n_observables);
        for m in &self.mechanisms {
            let _ = write!(out, "error({})", m.p);
            for d in &m.detectors {
                let _ = write!(out, " D{d}");
            }
            for o in &m.observables {
                let _ = write!(out, " L{o}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dem = DetectorErrorModel { n_detectors: 0, n_observables: 0, mechanisms: Vec::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let mut toks = line.split_whitespace();
            let head = toks.next().unwrap();
            if head == "detectors" || head == "observables" {
                let n: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(format!("{head} needs a count")))?;
                if head == "detectors" {
                    dem.n_detectors = n;
                } else {
                    dem.n_observables = n;
                }
                continue;
            }
            let p: f64 = head
                .strip_prefix("error(")
                .and_then(|s| s.strip_suffix(')'))
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(format!("bad mechanism head {head:?}")))?;
            let mut m = DemMechanism { p, detectors: Vec::new(), observables: Vec::new() };
            for t in toks {
                let (kind, idx) = t.split_at(1);
                let idx: usize = idx.parse().map_err(|_| err(format!("bad target {t:?}")))?;
                match kind {
                    "D" => {
                        m.detectors.push(idx);
                        dem.n_detectors = dem.n_detectors.max(idx + 1);
                    }
                    "L" => {
                        m.observables.push(idx);
                        dem.n_observables = dem.n_observables.max(idx + 1);
                    }
                    _ => return Err(err(format!("bad target {t:?}"))),
                }
            }
            dem.mechanisms.push(m);
        }
        Ok(dem)
    }

    /// Samples shots directly from the mechanisms.
    pub fn sample(&self, n_shots: usize, seed: u64) -> ShotBatch {
        let mut rng = seeds::rng(seed);
        let mut batch = ShotBatch::zeros(n_shots, self.n_detectors, self.n_observables, seed);
        for m in &self.mechanisms {
            for_each_hit(&mut rng, m.p, n_shots, |s| {
                for &d in &m.detectors {
                    batch.detectors.toggle(s, d);
                }
                for &o in &m.observables {
                    batch.observables.toggle(s, o);
                }
            });
        }
        batch
    }
}
