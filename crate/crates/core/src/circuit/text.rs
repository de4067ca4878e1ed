//! Line-oriented text form of [`Circuit`] and a lossy Stim export.
//!
//! Header lines start with `#@` and carry `key=value` pairs; other `#` lines
//! are comments. Printing followed by parsing reproduces the circuit exactly.

use std::fmt::Write as _;

use super::{Basis, Checkpoint, Circuit, CircuitMeta, Instruction, Noise, PauliTerm};
use crate::error::{Error, Result};

fn basis_char(b: Basis) -> &'static str {
    match b {
        Basis::X => "X",
        Basis::Z => "Z",
    }
}

fn write_noise(out: &mut String, noise: &Noise, arity: usize) {
    match noise {
        Noise::Uniform(p) => {
            let _ = write!(out, " ALL {p}");
        }
        Noise::List(v) => {
            for (t, p) in v {
                let _ = write!(out, " {}:{p}", t.label(arity));
            }
        }
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn print_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#@ qubits={}", c.n_qubits);
    if let Some(m) = &c.meta {
        let _ = writeln!(
            out,
            "#@ code={} l={} m={} rounds={} basis={} schedule={}",
            m.code.replace(char::is_whitespace, "_"),
            m.l,
            m.m,
            m.rounds,
            m.basis,
            m.schedule
        );
    }
    for ins in &c.instructions {
        use Instruction::*;
        match ins {
            Reset { basis, qubit } => {
                let _ = write!(out, "RESET {} {qubit}", basis_char(*basis));
            }
            Cnot { control, target } => {
                let _ = write!(out, "CNOT {control} {target}");
            }
            Measure { basis, qubit, record } => {
                let _ = write!(out, "MEASURE {} {qubit} {record}", basis_char(*basis));
            }
            Channel1 { qubit, noise } => {
                let _ = write!(out, "PAULI_CHANNEL_1 {qubit}");
                write_noise(&mut out, noise, 1);
            }
            Channel2 { a, b, noise } => {
                let _ = write!(out, "PAULI_CHANNEL_2 {a} {b}");
                write_noise(&mut out, noise, 2);
            }
            MeasFlip { record, p } => {
                let _ = write!(out, "MEAS_FLIP {record} {p}");
            }
            ErasureSite { site, qubit, partner } => {
                let _ = write!(out, "ERASURE_SITE {site} {qubit}");
                if let Some(p) = partner {
                    let _ = write!(out, " {p}");
                }
            }
            EcCheck { qubit, checkpoint, flag } => {
                let _ = write!(out, "EC_CHECK {qubit} {checkpoint} {flag}");
            }
            FlagFlip { flag, p } => {
                let _ = write!(out, "FLAG_FLIP {flag} {p}");
            }
            CondReset { basis, qubit, flag, p } => {
                let _ = write!(out, "COND_RESET {} {qubit} {flag} {p}", basis_char(*basis));
            }
            Detector { records } => {
                let _ = write!(out, "DETECTOR {}", join(records));
            }
            Observable { index, records } => {
                let _ = write!(out, "OBSERVABLE {index} {}", join(records));
            }
            PhaseBoundary { label } => {
                let _ = write!(out, "PHASE_BOUNDARY {label}");
            }
        }
        out.push('\n');
    }
    out
}

struct Line<'a> {
    no: usize,
    toks: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.no, msg: msg.into() }
    }

    fn arity(&self, n: usize) -> Result<()> {
        if self.toks.len() != n + 1 {
            return Err(self.err(format!("{} expects {n} arguments", self.toks[0])));
        }
        Ok(())
    }

    fn usize(&self, i: usize) -> Result<usize> {
        self.toks
            .get(i)
            .ok_or_else(|| self.err("missing argument"))?
            .parse()
            .map_err(|_| self.err(format!("expected integer, got {:?}", self.toks[i])))
    }

    fn prob(&self, s: &str) -> Result<f64> {
        let p: f64 = s.parse().map_err(|_| self.err(format!("expected number, got {s:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(self.err(format!("probability {p} outside [0, 1]")));
        }
        Ok(p)
    }

    fn basis(&self, i: usize) -> Result<Basis> {
        match self.toks.get(i).copied() {
            Some("X") => Ok(Basis::X),
            Some("Z") => Ok(Basis::Z),
            other => Err(self.err(format!("expected basis X or Z, got {other:?}"))),
        }
    }

    fn usizes(&self, from: usize) -> Result<Vec<usize>> {
        (from..self.toks.len()).map(|i| self.usize(i)).collect()
    }

    fn noise(&self, from: usize, arity: usize) -> Result<Noise> {
        let rest = &self.toks[from..];
        if rest.is_empty() {
            return Err(self.err("channel without mechanisms"));
        }
        if rest[0] == "ALL" {
            if rest.len() != 2 {
                return Err(self.err("ALL takes one probability"));
            }
            return Ok(Noise::Uniform(self.prob(rest[1])?));
        }
        let mut v = Vec::with_capacity(rest.len());
        for tok in rest {
            let (label, p) = tok
                .split_once(':')
                .ok_or_else(|| self.err(format!("expected PAULI:p, got {tok:?}")))?;
            let (term, n) =
                PauliTerm::parse(label).ok_or_else(|| self.err(format!("bad Pauli {label:?}")))?;
            if n != arity || term.is_identity() {
                return Err(self.err(format!("bad mechanism {label:?} for arity {arity}")));
            }
            v.push((term, self.prob(p)?));
        }
        Ok(Noise::List(v))
    }
}

fn parse_header(no: usize, body: &str, n_qubits: &mut Option<usize>, meta: &mut Option<CircuitMeta>) -> Result<()> {
    let err = |msg: String| Error::Parse { line: no, msg };
    let mut fields = std::collections::HashMap::new();
    for tok in body.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| err(format!("bad header field {tok:?}")))?;
        fields.insert(k, v);
    }
    let num = |k: &str| -> Result<usize> {
        fields
            .get(k)
            .ok_or_else(|| err(format!("header missing {k}")))?
            .parse()
            .map_err(|_| err(format!("header field {k} is not an integer")))
    };
    if fields.contains_key("qubits") {
        *n_qubits = Some(num("qubits")?);
    }
    if let Some(code) = fields.get("code") {
        let basis = match fields.get("basis").copied() {
            Some("X") => Basis::X,
            Some("Z") => Basis::Z,
            other => return Err(err(format!("bad basis {other:?}"))),
        };
        *meta = Some(CircuitMeta {
            code: code.to_string(),
            l: num("l")?,
            m: num("m")?,
            rounds: num("rounds")?,
            basis,
            schedule: fields.get("schedule").unwrap_or(&"none").to_string(),
        });
    }
    Ok(())
}

/// Parses the text form produced by [`Circuit::to_text`].
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_qubits = None;
    let mut meta = None;
    let mut ins = Vec::new();
    let mut max_qubit = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let trimmed = raw.trim();
        if let Some(h) = trimmed.strip_prefix("#@") {
            parse_header(no, h, &mut n_qubits, &mut meta)?;
            continue;
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let line = Line { no, toks: content.split_whitespace().collect() };
        let parsed = match line.toks[0] {
            "RESET" => {
                line.arity(2)?;
                Instruction::Reset { basis: line.basis(1)?, qubit: line.usize(2)? }
            }
            "CNOT" => {
                line.arity(2)?;
                Instruction::Cnot { control: line.usize(1)?, target: line.usize(2)? }
            }
            "MEASURE" => {
                line.arity(3)?;
                Instruction::Measure { basis: line.basis(1)?, qubit: line.usize(2)?, record: line.usize(3)? }
            }
            "PAULI_CHANNEL_1" => Instruction::Channel1 { qubit: line.usize(1)?, noise: line.noise(2, 1)? },
            "PAULI_CHANNEL_2" => Instruction::Channel2 {
                a: line.usize(1)?,
                b: line.usize(2)?,
                noise: line.noise(3, 2)?,
            },
            "MEAS_FLIP" => {
                line.arity(2)?;
                Instruction::MeasFlip { record: line.usize(1)?, p: line.prob(line.toks[2])? }
            }
            "ERASURE_SITE" => {
                if !(3..=4).contains(&line.toks.len()) {
                    return Err(line.err("ERASURE_SITE expects 2 or 3 arguments"));
                }
                let partner = if line.toks.len() == 4 { Some(line.usize(3)?) } else { None };
                Instruction::ErasureSite { site: line.usize(1)?, qubit: line.usize(2)?, partner }
            }
            "EC_CHECK" => {
                line.arity(3)?;
                let cp = line.toks[2];
                let checkpoint = (cp.len() == 1)
                    .then(|| cp.chars().next().and_then(Checkpoint::from_char))
                    .flatten()
                    .ok_or_else(|| line.err(format!("bad checkpoint {cp:?}")))?;
                Instruction::EcCheck { qubit: line.usize(1)?, checkpoint, flag: line.usize(3)? }
            }
            "FLAG_FLIP" => {
                line.arity(2)?;
                Instruction::FlagFlip { flag: line.usize(1)?, p: line.prob(line.toks[2])? }
            }
            "COND_RESET" => {
                line.arity(4)?;
                Instruction::CondReset {
                    basis: line.basis(1)?,
                    qubit: line.usize(2)?,
                    flag: line.usize(3)?,
                    p: line.prob(line.toks[4])?,
                }
            }
            "DETECTOR" => Instruction::Detector { records: line.usizes(1)? },
            "OBSERVABLE" => Instruction::Observable { index: line.usize(1)?, records: line.usizes(2)? },
            "PHASE_BOUNDARY" => {
                line.arity(1)?;
                Instruction::PhaseBoundary { label: line.toks[1].to_string() }
            }
            other => return Err(line.err(format!("unknown instruction {other:?}"))),
        };
        if let Some(q) = parsed.qubits().into_iter().max() {
            max_qubit = max_qubit.max(q + 1);
        }
        ins.push(parsed);
    }
    let n_qubits = n_qubits.unwrap_or(max_qubit);
    Ok(Circuit::from_instructions(n_qubits, ins, meta))
}

fn stim_pauli(t: PauliTerm, qubits: &[usize]) -> String {
    let mut parts = Vec::new();
    for (i, q) in qubits.iter().enumerate() {
        match ((t.x >> i) & 1, (t.z >> i) & 1) {
            (1, 0) => parts.push(format!("X{q}")),
            (1, 1) => parts.push(format!("Y{q}")),
            (0, 1) => parts.push(format!("Z{q}")),
            _ => {}
        }
    }
    parts.join(" ")
}

/// Stim rendering. Channels become independent `E` mechanisms, a measurement
/// flip directly after its measurement becomes `M(q)`, and erasure
/// annotations are emitted as comments.
pub fn to_stim(c: &Circuit) -> String {
    let mut out = String::new();
    let mut written = 0usize;
    let ins = &c.instructions;
    let mut i = 0;
    while i < ins.len() {
        use Instruction::*;
        match &ins[i] {
            Reset { basis, qubit } => {
                let g = if *basis == Basis::X { "RX" } else { "R" };
                let _ = writeln!(out, "{g} {qubit}");
            }
            Cnot { control, target } => {
                let _ = writeln!(out, "CX {control} {target}");
            }
            Measure { basis, qubit, record } => {
                let g = if *basis == Basis::X { "MX" } else { "M" };
                let flip = match ins.get(i + 1) {
                    Some(MeasFlip { record: r, p }) if r == record => {
                        i += 1;
                        Some(*p)
                    }
                    _ => None,
                };
                match flip {
                    Some(p) => {
                        let _ = writeln!(out, "{g}({p}) {qubit}");
                    }
                    None => {
                        let _ = writeln!(out, "{g} {qubit}");
                    }
                }
                written = written.max(record + 1);
            }
            Channel1 { qubit, noise } => {
                for (t, p) in noise.mechanisms(1) {
                    if p > 0.0 {
                        let _ = writeln!(out, "E({p}) {}", stim_pauli(t, &[*qubit]));
                    }
                }
            }
            Channel2 { a, b, noise } => {
                for (t, p) in noise.mechanisms(2) {
                    if p > 0.0 {
                        let _ = writeln!(out, "E({p}) {}", stim_pauli(t, &[*a, *b]));
                    }
                }
            }
            MeasFlip { record, p } => {
                let _ = writeln!(out, "# MEAS_FLIP {record} {p}");
            }
            Detector { records } | Observable { records, .. } => {
                let targets: Vec<String> =
                    records.iter().map(|r| format!("rec[-{}]", written - r)).collect();
                let head = match &ins[i] {
                    Observable { index, .. } => format!("OBSERVABLE_INCLUDE({index})"),
                    _ => "DETECTOR".to_string(),
                };
                let _ = writeln!(out, "{head} {}", targets.join(" "));
            }
            PhaseBoundary { label } => {
                let _ = writeln!(out, "TICK # {label}");
            }
            other => {
                let mut tmp = Circuit::from_instructions(c.n_qubits, vec![other.clone()], None);
                tmp.meta = None;
                let line = print_circuit(&tmp);
                let body = line.lines().nth(1).unwrap_or("");
                let _ = writeln!(out, "# {body}");
            }
        }
        i += 1;
    }
    out
}
