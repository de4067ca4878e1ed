//! Noiseless reference run, Pauli-frame shot sampling and detector error
//! model extraction.

mod dem;
mod frame;
mod tableau;

pub use dem::{backward_pass, extract_dem, xor_prob, DemAccumulator, DemMechanism, DetectorErrorModel, Sensitivity};
pub use frame::sample_shots;
pub use tableau::reference_run;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Detector and observable bits, one row per shot.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotBatch {
    pub seed: u64,
    pub detectors: BitMatrix,
    pub observables: BitMatrix,
}

impl ShotBatch {
    pub fn zeros(shots: usize, n_detectors: usize, n_observables: usize, seed: u64) -> Self {
        Self {
            seed,
            detectors: BitMatrix::zeros(shots, n_detectors),
            observables: BitMatrix::zeros(shots, n_observables),
        }
    }

    pub fn shots(&self) -> usize {
        self.detectors.rows()
    }

    pub fn n_detectors(&self) -> usize {
        self.detectors.cols()
    }

    pub fn n_observables(&self) -> usize {
        self.observables.cols()
    }

    /// Packed export: one header line `shots detectors observables seed`,
    /// then per shot the detector bits followed by the observable bits,
    /// little-endian within each byte, each shot padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!(
            "BBQSHOTS {} {} {} {}\n",
            self.shots(),
            self.n_detectors(),
            self.n_observables(),
            self.seed
        )
        .into_bytes();
        let width = self.n_detectors() + self.n_observables();
        for s in 0..self.shots() {
            let mut row = vec![0u8; width.div_ceil(8)];
            for i in 0..width {
                let bit = if i < self.n_detectors() {
                    self.detectors.get(s, i)
                } else {
                    self.observables.get(s, i - self.n_detectors())
                };
                if bit {
                    row[i / 8] |= 1 << (i % 8);
                }
            }
            out.extend_from_slice(&row);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Parse { line: 1, msg: "header is not UTF-8".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 || toks[0] != "BBQSHOTS" {
            return Err(Error::Parse { line: 1, msg: format!("bad header {header:?}") });
        }
        let num = |i: usize| -> Result<u64> {
            toks[i].parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad number {:?}", toks[i]) })
        };
        let (shots, nd, no, seed) = (num(1)? as usize, num(2)? as usize, num(3)? as usize, num(4)?);
        let width = nd + no;
        let stride = width.div_ceil(8);
        let body = &bytes[nl + 1..];
        if body.len() != shots * stride {
            return Err(Error::Dimension(format!("expected {} payload bytes, found {}", shots * stride, body.len())));
        }
        let mut batch = ShotBatch::zeros(shots, nd, no, seed);
        for s in 0..shots {
            for i in 0..width {
                if (body[s * stride + i / 8] >> (i % 8)) & 1 == 1 {
                    if i < nd {
                        batch.detectors.set(s, i, true);
                    } else {
                        batch.observables.set(s, i - nd, true);
                    }
                }
            }
        }
        Ok(batch)
    }
}
