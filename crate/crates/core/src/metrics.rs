//! Aggregate statistics over sweep results: block and per-round logical
//! error rates, engine gap and its log-log slope, geometric-mean separation,
//! pseudo-threshold and weighted least-squares scaling fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// One aggregated configuration (code, schedule, engine, e).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub code: String,
    pub schedule: String,
    pub engine: String,
    pub e_index: usize,
    pub e: f64,
    pub p: f64,
    pub q: f64,
    pub rounds: usize,
    pub instances: usize,
    pub shots: usize,
    pub errors: usize,
    pub discards: usize,
    /// Per-observable error counts joined with `;`.
    pub per_observable: String,
    pub seed: u64,
    pub status: String,
}

impl SweepRecord {
    pub fn n_eff(&self) -> usize {
        self.shots - self.discards
    }

    pub fn validate(&self) -> Result<()> {
        if self.discards > self.shots || self.errors > self.shots - self.discards {
            return Err(Error::Metrics(format!(
                "inconsistent counts for {}/{}/{} e={}: shots={} errors={} discards={}",
                self.code, self.schedule, self.engine, self.e, self.shots, self.errors, self.discards
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Rate {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0
    }

    pub fn overlaps(&self, other: &Rate) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Wilson score interval at normal quantile `z`. With zero errors the
/// lower end is exactly 0.
pub fn wilson(errors: usize, n: usize, z: f64) -> Result<Rate> {
    if n == 0 {
        return Err(Error::Metrics("no effective shots".into()));
    }
    if errors > n {
        return Err(Error::Metrics(format!("{errors} errors out of {n} shots")));
    }
    let nf = n as f64;
    let ph = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == n { 1.0 } else { (centre + half).min(1.0) };
    Ok(Rate { value: ph, lo, hi })
}

pub fn block_ler(rec: &SweepRecord) -> Result<Rate> {
    rec.validate()?;
    wilson(rec.errors, rec.n_eff(), Z95)
}

/// 1 - (1 - p_block)^(1/d).
pub fn per_round_ler(p_block: f64, d: usize) -> f64 {
    if p_block >= 1.0 {
        return 1.0;
    }
    -((-p_block).ln_1p() / d as f64).exp_m1()
}

pub fn per_round_rate(r: &Rate, d: usize) -> Rate {
    Rate { value: per_round_ler(r.value, d), lo: per_round_ler(r.lo, d), hi: per_round_ler(r.hi, d) }
}

/// A curve over the erasure rate: `(e, value)` with ascending e.
pub type Curve = Vec<(f64, f64)>;

fn same_grid(a: &Curve, b: &Curve) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return Err(Error::Metrics("curves do not share an e-grid".into()));
    }
    Ok(())
}

/// Pointwise ratio approx/exact; points with a zero exact value are dropped.
pub fn engine_gap(approx: &Curve, exact: &Curve) -> Result<Curve> {
    same_grid(approx, exact)?;
    let mut out = Vec::new();
    for (a, x) in approx.iter().zip(exact) {
        if x.1 <= 0.0 {
            log::warn!("engine gap undefined at e={}: exact rate is zero", x.0);
            continue;
        }
        out.push((a.0, a.1 / x.1));
    }
    Ok(out)
}

/// d log rho / d log e by central differences, one-sided at the ends.
pub fn gap_growth(rho: &Curve) -> Result<Curve> {
    if rho.len() < 2 {
        return Err(Error::Metrics("gap growth needs at least two points".into()));
    }
    if rho.iter().any(|&(e, r)| e <= 0.0 || r <= 0.0) {
        return Err(Error::Metrics("gap growth needs positive values".into()));
    }
    let lx: Vec<f64> = rho.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = rho.iter().map(|p| p.1.ln()).collect();
    let n = rho.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (rho[i].0, (ly[b] - ly[a]) / (lx[b] - lx[a]))
        })
        .collect())
}

/// exp(mean log(a/b)).
pub fn gmean_separation(a: &Curve, b: &Curve) -> Result<f64> {
    same_grid(a, b)?;
    if a.is_empty() {
        return Err(Error::Metrics("empty curves".into()));
    }
    if a.iter().chain(b).any(|p| p.1 <= 0.0) {
        return Err(Error::Metrics("gmean separation needs positive values".into()));
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x.1 / y.1).ln()).sum();
    Ok((s / a.len() as f64).exp())
}

/// Crossing of the curve with the identity line, interpolating
/// log(pL) - log(e) linearly in log(e) between the bracketing points.
pub fn pseudo_threshold(curve: &Curve) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|p| p.0 > 0.0 && p.1 > 0.0)
        .map(|&(e, pl)| (e.ln(), pl.ln() - e.ln()))
        .collect();
    for (i, &(x, f)) in pts.iter().enumerate() {
        if f == 0.0 {
            return Ok(x.exp());
        }
        if let Some(&(x1, f1)) = pts.get(i + 1) {
            if f.signum() != f1.signum() && f1 != 0.0 {
                return Ok((x - f * (x1 - x) / (f1 - f)).exp());
            }
        }
    }
    Err(Error::Metrics("pseudo-threshold not bracketed by the grid".into()))
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub e: f64,
    pub d: usize,
    pub pl: f64,
    pub n_eff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerEFit {
    pub e: f64,
    pub alpha: f64,
    /// `None` when the fit has no residual degrees of freedom.
    pub alpha_se: Option<f64>,
    pub log_a: f64,
    pub a: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub e_hat: f64,
    pub alpha_per_e: Vec<PerEFit>,
    pub pooled_alpha: f64,
    pub pooled_se: Option<f64>,
    pub points_used: Vec<(f64, usize)>,
    /// Subthreshold points left out because no errors were observed.
    pub censored: Vec<(f64, usize)>,
}

struct Wls {
    slope: f64,
    intercept: f64,
    slope_se: Option<f64>,
}

fn wls_line(pts: &[(f64, f64, f64)]) -> Result<Wls> {
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Metrics("degenerate design matrix".into()));
    }
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let dof = pts.len() as f64 - 2.0;
    let slope_se = (dof > 0.0).then(|| {
        let rss: f64 = pts.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / dof / sxx).sqrt()
    });
    Ok(Wls { slope, intercept, slope_se })
}

/// Fits log pL = log A(e) + alpha * d * log(e/e_hat) on subthreshold points,
/// weighted by effective shot counts. Per e the slope in d gives alpha(e);
/// the pooled exponent shares one slope across all e with a separate
/// intercept per e. Values of e observed at a single distance carry no
/// slope information and are left out of both.
pub fn wls_alpha_fit(points: &[FitPoint], e_hat: f64) -> Result<FitResult> {
    if !(e_hat > 0.0) {
        return Err(Error::Metrics("e_hat must be positive".into()));
    }
    let mut groups: BTreeMap<u64, Vec<(f64, f64, f64)>> = BTreeMap::new();
    let mut censored = Vec::new();
    for p in points {
        if !(p.e < e_hat) {
            continue;
        }
        if p.n_eff <= 0.0 {
            return Err(Error::Metrics("fit weights must be positive".into()));
        }
        if p.pl <= 0.0 {
            censored.push((p.e, p.d));
            continue;
        }
        groups.entry(p.e.to_bits()).or_default().push((p.d as f64, p.pl.ln(), p.n_eff));
    }
    let mut alpha_per_e = Vec::new();
    let mut used = Vec::new();
    let (mut sxy, mut sxx, mut n_pts, mut n_groups) = (0.0, 0.0, 0usize, 0usize);
    let mut pooled_terms: Vec<(f64, f64, f64)> = Vec::new();
    for (bits, pts) in &groups {
        let e = f64::from_bits(*bits);
        let g = (e / e_hat).ln();
        let mut ds: Vec<u64> = pts.iter().map(|p| p.0 as u64).collect();
        ds.sort_unstable();
        ds.dedup();
        if ds.len() < 2 {
            continue;
        }
        used.extend(pts.iter().map(|p| (e, p.0 as usize)));
        let fit = wls_line(pts)?;
        alpha_per_e.push(PerEFit {
            e,
            alpha: fit.slope / g,
            alpha_se: fit.slope_se.map(|s| s / g.abs()),
            log_a: fit.intercept,
            a: fit.intercept.exp(),
        });
        let sw: f64 = pts.iter().map(|p| p.2).sum();
        let xm = pts.iter().map(|p| p.2 * p.0 * g).sum::<f64>() / sw;
        let ym = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
        for p in pts {
            let (xt, yt) = (p.0 * g - xm, p.1 - ym);
            sxx += p.2 * xt * xt;
            sxy += p.2 * xt * yt;
            pooled_terms.push((xt, yt, p.2));
        }
        n_pts += pts.len();
        n_groups += 1;
    }
    if groups.is_empty() {
        return Err(Error::Metrics("no subthreshold points with observed errors".into()));
    }
    if n_pts == 0 || sxx <= 0.0 {
        return Err(Error::Metrics("insufficient points: no variation in d within any e".into()));
    }
    let pooled_alpha = sxy / sxx;
    let dof = n_pts as f64 - n_groups as f64 - 1.0;
    let pooled_se = (dof > 0.0).then(|| {
        let rss: f64 = pooled_terms.iter().map(|&(x, y, w)| w * (y - pooled_alpha * x).powi(2)).sum();
        (rss / dof / sxx).sqrt()
    });
    Ok(FitResult { e_hat, alpha_per_e, pooled_alpha, pooled_se, points_used: used, censored })
}
