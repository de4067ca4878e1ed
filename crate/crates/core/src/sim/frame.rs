//! Bit-packed Pauli-frame sampler. Frames hold the deviation of each shot
//! from the noiseless reference; shots are packed 64 per word.

use rand::Rng;
use rayon::prelude::*;

use super::ShotBatch;
use crate::circuit::{Circuit, Instruction, Noise, PauliTerm};
use crate::gf2::BitMatrix;
use crate::seeds;

pub(crate) const CHUNK_SHOTS: usize = 1024;

/// Calls `f` for every index in `0..n` selected independently with
/// probability `p`, jumping between hits with geometric gaps.
pub(crate) fn for_each_hit<R: Rng>(rng: &mut R, p: f64, n: usize, mut f: impl FnMut(usize)) {
    if p <= 0.0 || n == 0 {
        return;
    }
    if p >= 1.0 {
        (0..n).for_each(f);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut i = 0usize;
    loop {
        let u: f64 = rng.gen();
        let gap = (-u).ln_1p() / log_q;
        if gap >= (n - i) as f64 {
            return;
        }
        i += gap as usize;
        if i >= n {
            return;
        }
        f(i);
        i += 1;
    }
}

/// Fires the mechanisms of a uniform channel for every shot. Shots where at
/// least one mechanism fires are found first; within such a shot the first
/// firing mechanism is drawn from its conditional law and the rest
/// independently.
fn uniform_channel<R: Rng>(rng: &mut R, p: f64, terms: &[PauliTerm], n: usize, mut apply: impl FnMut(usize, PauliTerm)) {
    if p <= 0.0 {
        return;
    }
    let m = terms.len();
    let none = (1.0 - p).powi(m as i32);
    let any = 1.0 - none;
    let mut hits = Vec::new();
    for_each_hit(rng, any, n, |s| hits.push(s));
    for s in hits {
        let mut u: f64 = rng.gen::<f64>() * any;
        let mut first = m - 1;
        let mut alive = 1.0;
        for i in 0..m {
            let w = alive * p;
            if u < w {
                first = i;
                break;
            }
            u -= w;
            alive *= 1.0 - p;
        }
        apply(s, terms[first]);
        for &t in &terms[first + 1..] {
            if rng.gen_bool(p.min(1.0)) {
                apply(s, t);
            }
        }
    }
}

struct Frames {
    w: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl Frames {
    #[inline]
    fn apply(&mut self, qubits: &[usize], t: PauliTerm, shot: usize) {
        let (word, mask) = (shot / 64, 1u64 << (shot % 64));
        for (i, &q) in qubits.iter().enumerate() {
            if (t.x >> i) & 1 == 1 {
                self.x[q * self.w + word] ^= mask;
            }
            if (t.z >> i) & 1 == 1 {
                self.z[q * self.w + word] ^= mask;
            }
        }
    }
}

fn sample_chunk(c: &Circuit, shots: usize, seed: u64, terms1: &[PauliTerm], terms2: &[PauliTerm]) -> (BitMatrix, BitMatrix) {
    let w = shots.div_ceil(64);
    let mut rng = seeds::rng(seed);
    let mut fr = Frames { w, x: vec![0; c.n_qubits * w], z: vec![0; c.n_qubits * w] };
    let mut rec = vec![0u64; c.n_records * w];
    let mut det = BitMatrix::zeros(c.n_detectors, shots);
    let mut obs = BitMatrix::zeros(c.n_observables, shots);
    let mut det_idx = 0usize;
    let mut scratch = vec![0u64; w];
    for ins in &c.instructions {
        match ins {
            Instruction::Reset { qubit, .. } => {
                fr.x[qubit * w..(qubit + 1) * w].fill(0);
                fr.z[qubit * w..(qubit + 1) * w].fill(0);
            }
            Instruction::Cnot { control, target } => {
                let (c0, t0) = (control * w, target * w);
                for k in 0..w {
                    fr.x[t0 + k] ^= fr.x[c0 + k];
                    fr.z[c0 + k] ^= fr.z[t0 + k];
                }
            }
            Instruction::Measure { basis, qubit, record } => {
                let src = match basis {
                    crate::circuit::Basis::Z => &fr.x,
                    crate::circuit::Basis::X => &fr.z,
                };
                rec[record * w..(record + 1) * w].copy_from_slice(&src[qubit * w..(qubit + 1) * w]);
            }
            Instruction::MeasFlip { record, p } => {
                for_each_hit(&mut rng, *p, shots, |s| rec[record * w + s / 64] ^= 1 << (s % 64));
            }
            Instruction::Channel1 { qubit, noise } => {
                let qs = [*qubit];
                match noise {
                    Noise::Uniform(p) => uniform_channel(&mut rng, *p, terms1, shots, |s, t| fr.apply(&qs, t, s)),
                    Noise::List(v) => {
                        for &(t, p) in v {
                            for_each_hit(&mut rng, p, shots, |s| fr.apply(&qs, t, s));
                        }
                    }
                }
            }
            Instruction::Channel2 { a, b, noise } => {
                let qs = [*a, *b];
                match noise {
                    Noise::Uniform(p) => uniform_channel(&mut rng, *p, terms2, shots, |s, t| fr.apply(&qs, t, s)),
                    Noise::List(v) => {
                        for &(t, p) in v {
                            for_each_hit(&mut rng, p, shots, |s| fr.apply(&qs, t, s));
                        }
                    }
                }
            }
            Instruction::Detector { records } | Instruction::Observable { records, .. } => {
                scratch.fill(0);
                for r in records {
                    for k in 0..w {
                        scratch[k] ^= rec[r * w + k];
                    }
                }
                let (target, row) = match ins {
                    Instruction::Observable { index, .. } => (&mut obs, *index),
                    _ => {
                        det_idx += 1;
                        (&mut det, det_idx - 1)
                    }
                };
                for (k, v) in scratch.iter().enumerate() {
                    let mut bits = *v;
                    while bits != 0 {
                        let s = k * 64 + bits.trailing_zeros() as usize;
                        target.toggle(row, s);
                        bits &= bits - 1;
                    }
                }
            }
            _ => {}
        }
    }
    (det, obs)
}

/// Samples `n_shots` noisy shots. Shots are split into fixed-size chunks with
/// seeds derived from `(seed, chunk index)`, so the batch does not depend on
/// the number of worker threads.
pub fn sample_shots(c: &Circuit, n_shots: usize, seed: u64) -> ShotBatch {
    let terms1 = PauliTerm::nontrivial(1);
    let terms2 = PauliTerm::nontrivial(2);
    let chunks: Vec<(usize, usize)> = (0..n_shots.div_ceil(CHUNK_SHOTS))
        .map(|i| (i, CHUNK_SHOTS.min(n_shots - i * CHUNK_SHOTS)))
        .collect();
    let parts: Vec<(BitMatrix, BitMatrix)> = chunks
        .par_iter()
        .map(|&(i, len)| sample_chunk(c, len, seeds::derive_seed(seed, &[i as u64]), &terms1, &terms2))
        .collect();
    let mut batch = ShotBatch::zeros(n_shots, c.n_detectors, c.n_observables, seed);
    for (ci, (det, obs)) in parts.into_iter().enumerate() {
        let base = ci * CHUNK_SHOTS;
        for d in 0..det.rows() {
            for s in det.row(d).iter_ones() {
                batch.detectors.set(base + s, d, true);
            }
        }
        for o in 0..obs.rows() {
            for s in obs.row(o).iter_ones() {
                batch.observables.set(base + s, o, true);
            }
        }
    }
    batch
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hit_rate_matches_probability() {
        let mut rng = seeds::rng(5);
        let mut count = 0usize;
        for_each_hit(&mut rng, 0.3, 100_000, |_| count += 1);
        let sd = (100_000.0 * 0.3 * 0.7f64).sqrt();
        assert!((count as f64 - 30_000.0).abs() < 4.0 * sd, "{count}");
        let mut all = 0;
        for_each_hit(&mut rng, 1.0, 10, |_| all += 1);
        assert_eq!(all, 10);
    }

    #[test]
    fn uniform_channel_marginals() {
        let mut rng = seeds::rng(9);
        let terms = PauliTerm::nontrivial(2);
        let n = 200_000;
        let p = 0.05;
        let mut counts = vec![0usize; terms.len()];
        uniform_channel(&mut rng, p, &terms, n, |_, t| {
            counts[terms.iter().position(|&u| u == t).unwrap()] += 1;
        });
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 4.5 * sd, "{c}");
        }
    }
}
