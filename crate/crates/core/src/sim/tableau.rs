//! Stabilizer tableau (destabilizers + stabilizers with sign bits) used for
//! the noiseless reference run.

use rand::Rng;

use crate::circuit::{Basis, Circuit, Instruction};
use crate::error::{Error, Result};
use crate::seeds;

struct Tableau {
    n: usize,
    words: usize,
    /// Rows `0..n` destabilizers, `n..2n` stabilizers, `2n` scratch.
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for i in 0..n {
            t.x[i * words + i / 64] |= 1 << (i % 64);
            t.z[(n + i) * words + i / 64] |= 1 << (i % 64);
        }
        t
    }

    #[inline]
    fn bit(v: &[u64], words: usize, row: usize, q: usize) -> bool {
        (v[row * words + q / 64] >> (q % 64)) & 1 == 1
    }

    fn hadamard(&mut self, q: usize) {
        let (w, m) = (q / 64, 1u64 << (q % 64));
        for row in 0..2 * self.n {
            let i = row * self.words + w;
            let (xb, zb) = (self.x[i] & m, self.z[i] & m);
            if xb != 0 && zb != 0 {
                self.r[row] ^= true;
            }
            self.x[i] = (self.x[i] & !m) | zb;
            self.z[i] = (self.z[i] & !m) | xb;
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (wc, mc) = (c / 64, c % 64);
        let (wt, mt) = (t / 64, t % 64);
        for row in 0..2 * self.n {
            let base = row * self.words;
            let xc = (self.x[base + wc] >> mc) & 1;
            let zc = (self.z[base + wc] >> mc) & 1;
            let xt = (self.x[base + wt] >> mt) & 1;
            let zt = (self.z[base + wt] >> mt) & 1;
            if xc & zt & (xt ^ zc ^ 1) == 1 {
                self.r[row] ^= true;
            }
            self.x[base + wt] ^= xc << mt;
            self.z[base + wc] ^= zt << mc;
        }
    }

    fn pauli_x(&mut self, q: usize) {
        for row in 0..2 * self.n {
            if Self::bit(&self.z, self.words, row, q) {
                self.r[row] ^= true;
            }
        }
    }

    /// Row `h` <- row `h` * row `i`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut pos = 0u32;
        let mut neg = 0u32;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let y1 = x1 & z1;
            let xo = x1 & !z1;
            let zo = !x1 & z1;
            pos += (y1 & z2 & !x2 | xo & z2 & x2 | zo & x2 & !z2).count_ones();
            neg += (y1 & x2 & !z2 | xo & z2 & !x2 | zo & x2 & z2).count_ones();
        }
        let total = 2 * (self.r[h] as i64) + 2 * (self.r[i] as i64) + pos as i64 - neg as i64;
        self.r[h] = total.rem_euclid(4) == 2;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    /// Z-basis measurement; random outcomes are taken from `choose`.
    fn measure_z(&mut self, q: usize, choose: &mut impl FnMut() -> bool) -> bool {
        let n = self.n;
        let w = self.words;
        let p = (n..2 * n).find(|&row| Self::bit(&self.x, w, row, q));
        if let Some(p) = p {
            for row in 0..2 * n {
                if row != p && Self::bit(&self.x, w, row, q) {
                    self.rowsum(row, p);
                }
            }
            let d = p - n;
            let (src, dst) = (p * w, d * w);
            self.x.copy_within(src..src + w, dst);
            self.z.copy_within(src..src + w, dst);
            self.r[d] = self.r[p];
            self.x[src..src + w].fill(0);
            self.z[src..src + w].fill(0);
            self.z[src + q / 64] |= 1 << (q % 64);
            let outcome = choose();
            self.r[p] = outcome;
            outcome
        } else {
            let s = 2 * n;
            self.x[s * w..(s + 1) * w].fill(0);
            self.z[s * w..(s + 1) * w].fill(0);
            self.r[s] = false;
            for i in 0..n {
                if Self::bit(&self.x, w, i, q) {
                    self.rowsum(s, i + n);
                }
            }
            self.r[s]
        }
    }

    fn measure(&mut self, basis: Basis, q: usize, choose: &mut impl FnMut() -> bool) -> bool {
        match basis {
            Basis::Z => self.measure_z(q, choose),
            Basis::X => {
                self.hadamard(q);
                let m = self.measure_z(q, choose);
                self.hadamard(q);
                m
            }
        }
    }

    fn reset(&mut self, basis: Basis, q: usize) {
        if self.measure_z(q, &mut || false) {
            self.pauli_x(q);
        }
        if basis == Basis::X {
            self.hadamard(q);
        }
    }
}

fn run(c: &Circuit, choose: &mut impl FnMut() -> bool) -> Vec<bool> {
    let mut t = Tableau::new(c.n_qubits);
    let mut record = vec![false; c.n_records];
    for ins in &c.instructions {
        match ins {
            Instruction::Reset { basis, qubit } => t.reset(*basis, *qubit),
            Instruction::Cnot { control, target } => t.cnot(*control, *target),
            Instruction::Measure { basis, qubit, record: slot } => record[*slot] = t.measure(*basis, *qubit, choose),
            _ => {}
        }
    }
    record
}

fn parity(record: &[bool], slots: &[usize]) -> bool {
    slots.iter().fold(false, |acc, &s| acc ^ record[s])
}

/// Noiseless measurement record with random outcomes resolved to 0. Every
/// detector and observable is checked for determinism by replaying the
/// circuit with randomly resolved outcomes; any that changes value, or is
/// nonzero on the reference, is reported.
pub fn reference_run(c: &Circuit) -> Result<Vec<bool>> {
    let reference = run(c, &mut || false);
    let mut replays = Vec::new();
    for s in 0..2u64 {
        let mut rng = seeds::rng(seeds::derive_seed(0x7ab1_ea00, &[s]));
        replays.push(run(c, &mut || rng.gen_bool(0.5)));
    }
    let mut det = 0usize;
    for ins in &c.instructions {
        let (slots, name) = match ins {
            Instruction::Detector { records } => {
                det += 1;
                (records, format!("detector {}", det - 1))
            }
            Instruction::Observable { index, records } => (records, format!("observable {index}")),
            _ => continue,
        };
        if parity(&reference, slots) || replays.iter().any(|r| parity(r, slots)) {
            return Err(Error::NonDeterministic(name));
        }
    }
    Ok(reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn bell_pair_parity_is_deterministic() {
        let c = parse_circuit(
            "RESET X 0\nRESET Z 1\nCNOT 0 1\nMEASURE Z 0 0\nMEASURE Z 1 1\nDETECTOR 0 1\n",
        )
        .unwrap();
        let rec = reference_run(&c).unwrap();
        assert_eq!(rec, vec![false, false]);
    }

    #[test]
    fn random_detector_is_rejected() {
        let c = parse_circuit("RESET X 0\nMEASURE Z 0 0\nDETECTOR 0\n").unwrap();
        assert!(matches!(reference_run(&c), Err(Error::NonDeterministic(_))));
    }

    #[test]
    fn reset_prepares_basis_states() {
        let c = parse_circuit("RESET X 0\nMEASURE X 0 0\nRESET Z 0\nMEASURE Z 0 1\nDETECTOR 0\nDETECTOR 1\n").unwrap();
        assert_eq!(reference_run(&c).unwrap(), vec![false, false]);
    }

    #[test]
    fn ghz_x_parity() {
        let c = parse_circuit(
            "RESET X 0\nRESET Z 1\nRESET Z 2\nCNOT 0 1\nCNOT 1 2\nMEASURE X 0 0\nMEASURE X 1 1\nMEASURE X 2 2\nDETECTOR 0 1 2\n",
        )
        .unwrap();
        reference_run(&c).unwrap();
    }
}
