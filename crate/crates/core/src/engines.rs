//! Conversion of an erasure-annotated circuit plus sampled check outcomes
//! into a Pauli-only stabilizer circuit.
//!
//! Both engines start from the first-hit posteriors of each checked segment.
//! `Approx` places independent one-qubit depolarizing channels carrying the
//! cumulative posterior at every site. `Exact` samples the first hit `k` once
//! per instance and fully randomizes every site of the suffix `F_k..F_{r+1}`,
//! which keeps both the single-site marginals and the suffix correlation.
//! `ExactLiteral` instead inserts suffix channels at `exact_rate(b_j, ..)`
//! after sampling `k`; it is kept for sensitivity runs and does not preserve
//! the marginals.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction, Noise};
use crate::compiler::{ErasureCircuit, ErasureLog};
use crate::error::{Error, Result};
use crate::seeds;

const LOG_SPACE_BELOW: f64 = 1e-6;

/// `(1 - e)^n`
fn survive(e: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else if e < LOG_SPACE_BELOW {
        (n as f64 * (-e).ln_1p()).exp()
    } else {
        (1.0 - e).powi(n as i32)
    }
}

/// `1 - (1 - e)^n`
fn hit(e: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else if e < LOG_SPACE_BELOW {
        -(n as f64 * (-e).ln_1p()).exp_m1()
    } else {
        1.0 - (1.0 - e).powi(n as i32)
    }
}

/// Probability that the check closing an `r`-gate segment raises its flag.
pub fn ec_outcome_prob(e: f64, q: f64, r: usize) -> f64 {
    let h = hit(e, r + 1);
    h * (1.0 - q) + (1.0 - h) * q
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorVector {
    pub a: Vec<f64>,
    pub d_s: bool,
    pub r: usize,
    pub residual: f64,
}

pub fn posteriors(d_s: bool, e: f64, q: f64, r: usize) -> Result<PosteriorVector> {
    let n = r + 1;
    let h = hit(e, n);
    let s = survive(e, n);
    let (site_w, none_w) = if d_s { (1.0 - q, q) } else { (q, 1.0 - q) };
    let denom = h * site_w + s * none_w;
    if denom <= 0.0 {
        return Err(Error::ImpossibleEvidence { flag: d_s, e, q });
    }
    let a = (1..=n).map(|i| e * survive(e, i - 1) * site_w / denom).collect();
    Ok(PosteriorVector { a, d_s, r, residual: s * none_w / denom })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernoulliChain {
    pub b: Vec<f64>,
}

impl BernoulliChain {
    /// First index (1-based) whose independent draw fires, or `len + 1`.
    pub fn first_hit<R: Rng>(&self, rng: &mut R) -> usize {
        for (i, &b) in self.b.iter().enumerate() {
            if b > 0.0 && (b >= 1.0 || rng.gen_bool(b)) {
                return i + 1;
            }
        }
        self.b.len() + 1
    }

    /// Law of [`Self::first_hit`]: per-index probabilities and the no-fire mass.
    pub fn first_hit_law(&self) -> (Vec<f64>, f64) {
        let mut alive = 1.0;
        let mut law = Vec::with_capacity(self.b.len());
        for &b in &self.b {
            law.push(alive * b);
            alive *= 1.0 - b;
        }
        (law, alive)
    }
}

pub fn bernoulli_chain(pv: &PosteriorVector) -> Result<BernoulliChain> {
    // b_i = a_i / (a_i + ... + a_n + residual), using tail sums rather than a
    // running product so that a zero residual gives b_n = 1 exactly.
    let mut tail = pv.residual;
    let mut b = vec![0.0; pv.a.len()];
    for (i, &a) in pv.a.iter().enumerate().rev() {
        if !(a >= 0.0) || !(tail >= 0.0) {
            return Err(Error::InconsistentPosterior(format!("negative posterior mass at site {}", i + 1)));
        }
        tail += a;
        if a > 0.0 {
            b[i] = (a / tail).min(1.0);
        }
    }
    if (tail - 1.0).abs() > 1e-9 {
        return Err(Error::InconsistentPosterior(format!("posterior mass sums to {tail}")));
    }
    Ok(BernoulliChain { b })
}

/// Per-mechanism rate of a uniform channel over `suffix_len` locations that
/// fully depolarizes them with probability `b`: every fixed non-identity
/// Pauli anticommutes with `2^(2 suffix_len - 1)` of the mechanisms, so
/// `(1 - 2p)^(2^(2 suffix_len - 1)) = 1 - b`.
pub fn exact_rate(b: f64, suffix_len: usize) -> f64 {
    let exponent = 2f64.powi(1 - 2 * suffix_len as i32);
    0.5 - 0.5 * (1.0 - b).max(0.0).powf(exponent)
}

pub fn cumulative(pv: &PosteriorVector) -> Vec<f64> {
    let mut acc = 0.0;
    pv.a.iter()
        .map(|a| {
            acc += a;
            acc.min(1.0)
        })
        .collect()
}

/// Rate of each of three independent X/Y/Z mechanisms giving a one-qubit
/// depolarizing channel with total error `3 abar / 4`.
pub fn approx_rate(abar: f64) -> f64 {
    0.5 * (1.0 - (1.0 - abar).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Engine {
    Exact,
    ExactLiteral,
    Approx,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::ExactLiteral => "exact-literal",
            Engine::Approx => "approx",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Engine::Exact),
            "exact-literal" | "exact_literal" => Ok(Engine::ExactLiteral),
            "approx" => Ok(Engine::Approx),
            other => Err(Error::Config(format!("unknown engine {other:?}"))),
        }
    }
}

/// One channel placed by an engine at site `F_site` of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteChannel {
    pub site: usize,
    pub target: ChannelTarget,
    pub rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelTarget {
    /// Two-qubit channel on the segment qubit and the partner of `G_site`.
    Pair,
    Partner,
    Own,
}

/// Channels one segment receives; `k` is the sampled first hit for the exact
/// engines (`r + 2` when nothing fires).
pub fn realize_segment<R: Rng>(
    engine: Engine,
    pv: &PosteriorVector,
    rng: &mut R,
) -> Result<(Option<usize>, Vec<SiteChannel>)> {
    let r = pv.r;
    let mut out = Vec::new();
    match engine {
        Engine::Approx => {
            for (j, abar) in cumulative(pv).into_iter().enumerate() {
                let site = j + 1;
                if abar > 0.0 {
                    let target = if site <= r { ChannelTarget::Partner } else { ChannelTarget::Own };
                    out.push(SiteChannel { site, target, rate: approx_rate(abar) });
                }
            }
            Ok((None, out))
        }
        Engine::Exact | Engine::ExactLiteral => {
            let chain = bernoulli_chain(pv)?;
            let k = chain.first_hit(rng);
            for site in k..=r + 1 {
                let b = if engine == Engine::Exact { 1.0 } else { chain.b[site - 1] };
                let rate = exact_rate(b, r + 2 - site);
                if rate > 0.0 {
                    let target = if site <= r { ChannelTarget::Pair } else { ChannelTarget::Own };
                    out.push(SiteChannel { site, target, rate });
                }
            }
            Ok((Some(k), out))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub segment: usize,
    pub qubit: usize,
    pub r: usize,
    pub d_s: bool,
    pub k: Option<usize>,
    pub channels: Vec<InsertedChannel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertedChannel {
    pub site: usize,
    pub position: usize,
    pub qubits: Vec<usize>,
    pub rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub engine: Option<Engine>,
    pub segments: Vec<SegmentReport>,
    pub channels_inserted: usize,
    pub segments_processed: usize,
}

impl ConversionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Realizes the posteriors of every checked segment and strips the erasure
/// annotations, keeping unconditional resets and baseline channels.
pub fn convert(ce: &ErasureCircuit, log: &ErasureLog, engine: Engine, seed: u64) -> Result<(Circuit, ConversionReport)> {
    if log.flags.len() != ce.segments.len() {
        return Err(Error::Dimension(format!(
            "log covers {} segments, circuit has {}",
            log.flags.len(),
            ce.segments.len()
        )));
    }
    let mut rng = seeds::rng(seed);
    let e = ce.noise.e;
    let q = ce.noise.q();
    let ins = &ce.circuit.instructions;
    let mut at_site: Vec<Vec<Instruction>> = vec![Vec::new(); ins.len()];
    let mut report = ConversionReport { engine: Some(engine), ..Default::default() };
    for (idx, seg) in ce.checked_segments() {
        let d_s = log.flags[idx];
        let pv = posteriors(d_s, e, q, seg.r())?;
        let (k, channels) = realize_segment(engine, &pv, &mut rng)?;
        let mut inserted = Vec::with_capacity(channels.len());
        for ch in channels {
            let site = &seg.sites[ch.site - 1];
            let (instr, qubits) = match ch.target {
                ChannelTarget::Pair => {
                    let partner = site.partner.expect("post-gate site has a partner");
                    (
                        Instruction::Channel2 { a: seg.qubit, b: partner, noise: Noise::Uniform(ch.rate) },
                        vec![seg.qubit, partner],
                    )
                }
                ChannelTarget::Partner => {
                    let partner = site.partner.expect("post-gate site has a partner");
                    (Instruction::Channel1 { qubit: partner, noise: Noise::Uniform(ch.rate) }, vec![partner])
                }
                ChannelTarget::Own => {
                    (Instruction::Channel1 { qubit: seg.qubit, noise: Noise::Uniform(ch.rate) }, vec![seg.qubit])
                }
            };
            at_site[site.position].push(instr);
            inserted.push(InsertedChannel { site: ch.site, position: site.position, qubits, rate: ch.rate });
        }
        report.channels_inserted += inserted.len();
        report.segments_processed += 1;
        report.segments.push(SegmentReport { segment: idx, qubit: seg.qubit, r: seg.r(), d_s, k, channels: inserted });
    }

    let mut out = Vec::with_capacity(ins.len());
    for (pos, instr) in ins.iter().enumerate() {
        if instr.is_erasure_annotation() {
            out.append(&mut at_site[pos]);
        } else {
            out.push(instr.clone());
        }
    }
    let mut meta = ce.circuit.meta.clone();
    if let Some(m) = meta.as_mut() {
        m.schedule = format!("{}-{}", ce.schedule.tag(), engine.name());
    }
    Ok((Circuit::from_instructions(ce.circuit.n_qubits, out, meta), report))
}
