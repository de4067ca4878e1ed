//! Sum-product belief propagation with ordered-statistics post-processing
//! over a detector error model (mechanisms are variables, detectors checks).

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{words_for, xor_words, BitMatrix, BitVec, IncrementalBasis};
use crate::sim::{DetectorErrorModel, ShotBatch};

const LLR_CLAMP: f64 = 30.0;
const P_MIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub bp_max_iters: usize,
    pub osd_order: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { bp_max_iters: 30, osd_order: 0 }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bp_max_iters == 0 {
            return Err(Error::Config("bp_max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub predicted_observables: Vec<bool>,
    pub converged: bool,
    pub fallback_used: bool,
    pub discard: bool,
    /// Selected mechanisms, ascending; empty on discard.
    pub solution: Vec<usize>,
}

/// Tanner structure and priors of one detector error model.
pub struct Decoder {
    cfg: DecoderConfig,
    n_det: usize,
    n_obs: usize,
    prior_llr: Vec<f64>,
    weight: Vec<f64>,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    det_words: usize,
    columns: Vec<u64>,
    observables: Vec<Vec<usize>>,
    rank: OnceLock<usize>,
}

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_MIN, 0.5)
}

impl Decoder {
    pub fn new(dem: &DetectorErrorModel, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let n_det = dem.n_detectors;
        let n_var = dem.mechanisms.len();
        let mut per_check: Vec<Vec<usize>> = vec![Vec::new(); n_det];
        let det_words = words_for(n_det).max(1);
        let mut columns = vec![0u64; n_var * det_words];
        for (v, m) in dem.mechanisms.iter().enumerate() {
            for &d in &m.detectors {
                if d >= n_det {
                    return Err(Error::Dimension(format!("mechanism {v} flips detector {d} of {n_det}")));
                }
                per_check[d].push(v);
                columns[v * det_words + d / 64] ^= 1 << (d % 64);
            }
            if let Some(&o) = m.observables.iter().find(|&&o| o >= dem.n_observables) {
                return Err(Error::Dimension(format!("mechanism {v} flips observable {o}")));
            }
        }
        let mut check_ptr = vec![0];
        let mut edge_var = Vec::new();
        let mut var_lists: Vec<Vec<usize>> = vec![Vec::new(); n_var];
        for vars in &per_check {
            for &v in vars {
                var_lists[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0];
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for l in &var_lists {
            var_edges.extend_from_slice(l);
            var_ptr.push(var_edges.len());
        }
        let prior_llr: Vec<f64> = dem
            .mechanisms
            .iter()
            .map(|m| {
                let p = clamp_p(m.p);
                ((1.0 - p) / p).ln()
            })
            .collect();
        Ok(Self {
            cfg,
            n_det,
            n_obs: dem.n_observables,
            weight: prior_llr.clone(),
            prior_llr,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            det_words,
            columns,
            observables: dem.mechanisms.iter().map(|m| m.observables.clone()).collect(),
            rank: OnceLock::new(),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.prior_llr.len()
    }

    fn column(&self, v: usize) -> &[u64] {
        &self.columns[v * self.det_words..(v + 1) * self.det_words]
    }

    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| {
            let mut basis = IncrementalBasis::new(self.n_det, self.n_det.min(self.n_vars()));
            for v in 0..self.n_vars() {
                if basis.len() == self.n_det {
                    break;
                }
                basis.insert(self.column(v));
            }
            basis.len()
        })
    }

    /// Runs sum-product BP. Returns the total posterior LLRs and whether the
    /// hard decision met the syndrome (checked only when `early_exit`).
    fn bp(&self, syndrome: &[bool], iters: usize, early_exit: bool) -> (Vec<f64>, bool) {
        let n_edges = self.edge_var.len();
        let mut vc: Vec<f64> = self.edge_var.iter().map(|&v| self.prior_llr[v]).collect();
        let mut cv = vec![0.0f64; n_edges];
        let mut total = self.prior_llr.clone();
        let mut tanhs: Vec<f64> = Vec::new();
        for _ in 0..iters {
            for c in 0..self.n_det {
                let (lo, hi) = (self.check_ptr[c], self.check_ptr[c + 1]);
                if lo == hi {
                    continue;
                }
                tanhs.clear();
                let mut prod = 1.0f64;
                let mut zeros = 0usize;
                for e in lo..hi {
                    let t = (vc[e] * 0.5).tanh();
                    tanhs.push(t);
                    if t == 0.0 {
                        zeros += 1;
                    } else {
                        prod *= t;
                    }
                }
                let sign = if syndrome[c] { -1.0 } else { 1.0 };
                for (k, e) in (lo..hi).enumerate() {
                    let t = tanhs[k];
                    let other = if t == 0.0 {
                        if zeros == 1 { prod } else { 0.0 }
                    } else if zeros > 0 {
                        0.0
                    } else {
                        prod / t
                    };
                    let m = 2.0 * other.clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh();
                    cv[e] = (sign * m).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            for v in 0..self.n_vars() {
                let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
                let t = self.prior_llr[v] + edges.iter().map(|&e| cv[e]).sum::<f64>();
                total[v] = t;
                for &e in edges {
                    vc[e] = (t - cv[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            if early_exit && self.satisfies(syndrome, |v| total[v] < 0.0) {
                return (total, true);
            }
        }
        (total, false)
    }

    fn satisfies(&self, syndrome: &[bool], chosen: impl Fn(usize) -> bool) -> bool {
        (0..self.n_det).all(|c| {
            let parity = self.edge_var[self.check_ptr[c]..self.check_ptr[c + 1]]
                .iter()
                .filter(|&&v| chosen(v))
                .count()
                % 2
                == 1;
            parity == syndrome[c]
        })
    }

    /// Posterior error probabilities after exactly `iters` BP iterations.
    pub fn bp_marginals(&self, syndrome: &[bool], iters: usize) -> Vec<f64> {
        let (total, _) = self.bp(syndrome, iters, false);
        total.iter().map(|l| 1.0 / (1.0 + l.exp())).collect()
    }

    pub fn soft_weight(&self, solution: &[usize]) -> f64 {
        solution.iter().map(|&v| self.weight[v]).sum()
    }

    /// Ordered-statistics decoding given per-variable error probabilities.
    /// `None` when the syndrome lies outside the column space.
    pub fn osd(&self, syndrome: &[bool], error_prob: &[f64], order: usize) -> Option<Vec<usize>> {
        let mut idx: Vec<usize> = (0..self.n_vars()).collect();
        idx.sort_by(|&a, &b| error_prob[b].partial_cmp(&error_prob[a]).unwrap_or(std::cmp::Ordering::Equal));
        let rank = self.rank();
        let mut basis = IncrementalBasis::new(self.n_det, rank.max(1));
        let mut pivots = Vec::with_capacity(rank);
        let mut rest = Vec::new();
        for &v in &idx {
            if basis.len() < rank && basis.insert(self.column(v)).is_some() {
                pivots.push(v);
            } else {
                rest.push(v);
            }
        }
        let mut target = vec![0u64; self.det_words];
        for (c, &s) in syndrome.iter().enumerate() {
            if s {
                target[c / 64] |= 1 << (c % 64);
            }
        }
        let solve = |flips: &[usize]| -> Option<Vec<usize>> {
            let mut t = target.clone();
            for &v in flips {
                xor_words(&mut t, self.column(v));
            }
            let combo = basis.express(&t)?;
            let mut sol: Vec<usize> = flips.to_vec();
            sol.extend(crate::gf2::iter_ones(&combo).map(|slot| pivots[slot]));
            sol.sort_unstable();
            Some(sol)
        };
        let mut best = solve(&[])?;
        if order == 0 {
            return Some(best);
        }
        let mut best_w = self.soft_weight(&best);
        let mut consider = |cand: Option<Vec<usize>>| {
            if let Some(c) = cand {
                let w = self.soft_weight(&c);
                if w < best_w {
                    best_w = w;
                    best = c;
                }
            }
        };
        for &v in &rest {
            consider(solve(&[v]));
        }
        let head = &rest[..order.min(rest.len())];
        for i in 0..head.len() {
            for j in i + 1..head.len() {
                consider(solve(&[head[i], head[j]]));
            }
        }
        Some(best)
    }

    fn observables_of(&self, solution: &[usize]) -> Vec<bool> {
        let mut out = vec![false; self.n_obs];
        for &v in solution {
            for &o in &self.observables[v] {
                out[o] ^= true;
            }
        }
        out
    }

    pub fn decode(&self, syndrome: &[bool]) -> Result<DecodeResult> {
        if syndrome.len() != self.n_det {
            return Err(Error::Dimension(format!(
                "syndrome has {} bits, model has {} detectors",
                syndrome.len(),
                self.n_det
            )));
        }
        if syndrome.iter().all(|&s| !s) {
            return Ok(DecodeResult {
                predicted_observables: vec![false; self.n_obs],
                converged: true,
                fallback_used: false,
                discard: false,
                solution: Vec::new(),
            });
        }
        let (total, converged) = self.bp(syndrome, self.cfg.bp_max_iters, true);
        if converged {
            let solution: Vec<usize> = (0..self.n_vars()).filter(|&v| total[v] < 0.0).collect();
            return Ok(DecodeResult {
                predicted_observables: self.observables_of(&solution),
                converged,
                fallback_used: false,
                discard: false,
                solution,
            });
        }
        let probs: Vec<f64> = total.iter().map(|l| 1.0 / (1.0 + l.exp())).collect();
        Ok(match self.osd(syndrome, &probs, self.cfg.osd_order) {
            Some(solution) => DecodeResult {
                predicted_observables: self.observables_of(&solution),
                converged: false,
                fallback_used: true,
                discard: false,
                solution,
            },
            None => DecodeResult {
                predicted_observables: vec![false; self.n_obs],
                converged: false,
                fallback_used: true,
                discard: true,
                solution: Vec::new(),
            },
        })
    }
}

pub fn decode(dem: &DetectorErrorModel, syndrome: &[bool], cfg: &DecoderConfig) -> Result<DecodeResult> {
    Decoder::new(dem, *cfg)?.decode(syndrome)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchOutcome {
    pub shots: usize,
    pub errors: usize,
    pub discards: usize,
    pub per_observable: Vec<usize>,
}

impl BatchOutcome {
    pub fn merge(&mut self, other: &BatchOutcome) {
        self.shots += other.shots;
        self.errors += other.errors;
        self.discards += other.discards;
        if self.per_observable.len() < other.per_observable.len() {
            self.per_observable.resize(other.per_observable.len(), 0);
        }
        for (a, b) in self.per_observable.iter_mut().zip(&other.per_observable) {
            *a += b;
        }
    }
}

fn row_bools(m: &BitMatrix, r: usize) -> Vec<bool> {
    let row: BitVec = m.row(r);
    row.to_bools()
}

/// Decodes every shot; a shot is an error when any predicted observable
/// differs from the sampled one. Discarded shots count toward `discards`
/// only.
pub fn decode_batch(dem: &DetectorErrorModel, shots: &ShotBatch, cfg: &DecoderConfig) -> Result<BatchOutcome> {
    if shots.n_detectors() != dem.n_detectors || shots.n_observables() != dem.n_observables {
        return Err(Error::Dimension("shot batch does not match the error model".into()));
    }
    let dec = Decoder::new(dem, *cfg)?;
    let results: Vec<Result<(bool, bool, Vec<bool>)>> = (0..shots.shots())
        .into_par_iter()
        .map(|s| {
            let syn = row_bools(&shots.detectors, s);
            let actual = row_bools(&shots.observables, s);
            let r = dec.decode(&syn)?;
            let diff: Vec<bool> = r.predicted_observables.iter().zip(&actual).map(|(a, b)| a != b).collect();
            Ok((r.discard, diff.iter().any(|&d| d), diff))
        })
        .collect();
    let mut out = BatchOutcome { shots: shots.shots(), per_observable: vec![0; dem.n_observables], ..Default::default() };
    for r in results {
        let (discard, err, diff) = r?;
        if discard {
            out.discards += 1;
            continue;
        }
        if err {
            out.errors += 1;
        }
        for (c, d) in out.per_observable.iter_mut().zip(diff) {
            *c += d as usize;
        }
    }
    Ok(out)
}
