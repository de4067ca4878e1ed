//! Tables and SVG figures from sweep records: per-round LER curves, engine
//! gaps, distance separations, pseudo-thresholds and subthreshold fits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{
    block_ler, engine_gap, gap_growth, gmean_separation, median, per_round_rate, pseudo_threshold, wls_alpha_fit,
    Curve, FitPoint, FitResult, SweepRecord,
};
use crate::sweep::{read_records, RECORDS_FILE};

/// Pseudo-thresholds reported for the four (schedule, engine) settings,
/// used when fits are asked to plug in fixed values.
pub fn reference_e_hat(schedule: &str, engine: &str) -> Option<f64> {
    match (schedule, engine) {
        ("2EC", "exact") => Some(1.05e-2),
        ("4EC", "exact") => Some(8.5e-3),
        ("2EC", "approx") => Some(7.9e-3),
        ("4EC", "approx") => Some(8.4e-3),
        _ => None,
    }
}

#[derive(Clone, Debug, Default)]
pub struct ReportOptions {
    /// Fixed ê per (schedule tag, engine name); otherwise ê is taken from
    /// the measured curves.
    pub e_hat: BTreeMap<(String, String), f64>,
}

impl ReportOptions {
    pub fn with_reference_e_hat() -> Self {
        let mut e_hat = BTreeMap::new();
        for s in ["2EC", "4EC"] {
            for e in ["exact", "approx"] {
                e_hat.insert((s.to_string(), e.to_string()), reference_e_hat(s, e).unwrap());
            }
        }
        Self { e_hat }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub code: String,
    pub schedule: String,
    pub engine: String,
    pub rounds: usize,
    pub e: f64,
    pub n_eff: usize,
    pub errors: usize,
    pub p_block: f64,
    pub block_lo: f64,
    pub block_hi: f64,
    pub p_round: f64,
    pub round_lo: f64,
    pub round_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdEntry {
    pub code: String,
    pub schedule: String,
    pub engine: String,
    pub e_hat: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapEntry {
    pub code: String,
    pub schedule: String,
    pub rho: Curve,
    pub growth: Option<Curve>,
    pub median_rho: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationEntry {
    pub schedule: String,
    pub engine: String,
    pub from: String,
    pub to: String,
    pub gamma: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitEntry {
    pub schedule: String,
    pub engine: String,
    pub e_hat: f64,
    pub fit: FitResult,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub curves: Vec<CurvePoint>,
    pub thresholds: Vec<ThresholdEntry>,
    pub gaps: Vec<GapEntry>,
    pub separations: Vec<SeparationEntry>,
    pub fits: Vec<FitEntry>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

type Key = (String, String, String);

fn curves_of(records: &[SweepRecord], warnings: &mut Vec<String>) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for r in records {
        if r.status != "ok" {
            warnings.push(format!("{} {} {} e={}: {}", r.code, r.schedule, r.engine, r.e, r.status));
            continue;
        }
        match block_ler(r) {
            Ok(b) => {
                let pr = per_round_rate(&b, r.rounds);
                out.push(CurvePoint {
                    code: r.code.clone(),
                    schedule: r.schedule.clone(),
                    engine: r.engine.clone(),
                    rounds: r.rounds,
                    e: r.e,
                    n_eff: r.n_eff(),
                    errors: r.errors,
                    p_block: b.value,
                    block_lo: b.lo,
                    block_hi: b.hi,
                    p_round: pr.value,
                    round_lo: pr.lo,
                    round_hi: pr.hi,
                });
            }
            Err(e) => warnings.push(format!("{} {} {} e={}: {e}", r.code, r.schedule, r.engine, r.e)),
        }
    }
    out.sort_by(|a, b| (&a.code, &a.schedule, &a.engine).cmp(&(&b.code, &b.schedule, &b.engine)).then(a.e.total_cmp(&b.e)));
    out
}

fn group(curves: &[CurvePoint]) -> BTreeMap<Key, Vec<&CurvePoint>> {
    let mut g: BTreeMap<Key, Vec<&CurvePoint>> = BTreeMap::new();
    for c in curves {
        g.entry((c.code.clone(), c.schedule.clone(), c.engine.clone())).or_default().push(c);
    }
    g
}

fn curve(points: &[&CurvePoint]) -> Curve {
    points.iter().map(|p| (p.e, p.p_round)).collect()
}

/// Restricts two curves to their common e values.
fn aligned(a: &Curve, b: &Curve) -> (Curve, Curve) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in a {
        if let Some(q) = b.iter().find(|q| q.0 == p.0) {
            x.push(*p);
            y.push(*q);
        }
    }
    (x, y)
}

pub fn build_summary(records: &[SweepRecord], opts: &ReportOptions) -> Result<ReportSummary> {
    if records.is_empty() {
        return Err(Error::Metrics("no sweep records".into()));
    }
    let mut warnings = Vec::new();
    let curves = curves_of(records, &mut warnings);
    let groups = group(&curves);
    let mut thresholds = Vec::new();
    for ((code, schedule, engine), pts) in &groups {
        let e_hat = pseudo_threshold(&curve(pts)).ok();
        thresholds.push(ThresholdEntry { code: code.clone(), schedule: schedule.clone(), engine: engine.clone(), e_hat });
    }
    let mut gaps = Vec::new();
    let codes: BTreeSet<&String> = groups.keys().map(|k| &k.0).collect();
    let schedules: BTreeSet<&String> = groups.keys().map(|k| &k.1).collect();
    let engines: BTreeSet<&String> = groups.keys().map(|k| &k.2).collect();
    for code in &codes {
        for sched in &schedules {
            let ex = groups.get(&((*code).clone(), (*sched).clone(), "exact".into()));
            let ap = groups.get(&((*code).clone(), (*sched).clone(), "approx".into()));
            if let (Some(ex), Some(ap)) = (ex, ap) {
                let (a, x) = aligned(&curve(ap), &curve(ex));
                let rho: Curve = engine_gap(&a, &x)?.into_iter().filter(|p| p.1 > 0.0).collect();
                if rho.len() < a.len() {
                    warnings.push(format!("{code} {sched}: engine gap undefined at {} point(s)", a.len() - rho.len()));
                }
                let growth = gap_growth(&rho).ok();
                let median_rho = median(&rho.iter().map(|p| p.1).collect::<Vec<_>>());
                gaps.push(GapEntry { code: (*code).clone(), schedule: (*sched).clone(), rho, growth, median_rho });
            }
        }
    }
    let rounds_of: BTreeMap<&String, usize> = curves.iter().map(|c| (&c.code, c.rounds)).collect();
    let mut by_distance: Vec<&String> = codes.iter().copied().collect();
    by_distance.sort_by_key(|c| rounds_of[c]);
    let mut separations = Vec::new();
    let mut fits = Vec::new();
    for sched in &schedules {
        for eng in &engines {
            for w in by_distance.windows(2) {
                let ka = (w[0].clone(), (*sched).clone(), (*eng).clone());
                let kb = (w[1].clone(), (*sched).clone(), (*eng).clone());
                if let (Some(a), Some(b)) = (groups.get(&ka), groups.get(&kb)) {
                    let (x, y) = aligned(&curve(a), &curve(b));
                    let (x, y): (Curve, Curve) = x.into_iter().zip(y).filter(|(p, q)| p.1 > 0.0 && q.1 > 0.0).unzip();
                    if let Ok(gamma) = gmean_separation(&x, &y) {
                        separations.push(SeparationEntry {
                            schedule: (*sched).clone(),
                            engine: (*eng).clone(),
                            from: w[0].clone(),
                            to: w[1].clone(),
                            gamma,
                            points: x.len(),
                        });
                    }
                }
            }
            let members: Vec<&&String> = by_distance
                .iter()
                .filter(|c| groups.contains_key(&((**c).clone(), (*sched).clone(), (*eng).clone())))
                .collect();
            if members.len() < 2 {
                continue;
            }
            let e_hat = opts.e_hat.get(&((*sched).clone(), (*eng).clone())).copied().or_else(|| {
                members.iter().rev().find_map(|c| {
                    thresholds
                        .iter()
                        .find(|t| &t.code == **c && &t.schedule == *sched && &t.engine == *eng)
                        .and_then(|t| t.e_hat)
                })
            });
            let Some(e_hat) = e_hat else {
                warnings.push(format!("{sched} {eng}: no pseudo-threshold available, fit skipped"));
                continue;
            };
            let points: Vec<FitPoint> = members
                .iter()
                .flat_map(|c| &groups[&((**c).clone(), (*sched).clone(), (*eng).clone())])
                .map(|p| FitPoint { e: p.e, d: p.rounds, pl: p.p_round, n_eff: p.n_eff as f64 })
                .collect();
            match wls_alpha_fit(&points, e_hat) {
                Ok(fit) => fits.push(FitEntry { schedule: (*sched).clone(), engine: (*eng).clone(), e_hat, fit }),
                Err(e) => warnings.push(format!("{sched} {eng}: fit skipped: {e}")),
            }
        }
    }
    Ok(ReportSummary { curves, thresholds, gaps, separations, fits, warnings, files: Vec::new() })
}

/// Reads `records.csv` from `dir` and writes the report files into
/// `dir/report`.
pub fn report(dir: &Path, opts: &ReportOptions) -> Result<ReportSummary> {
    let path = dir.join(RECORDS_FILE);
    if !path.exists() {
        return Err(Error::Config(format!("no {RECORDS_FILE} in {}", dir.display())));
    }
    let records = read_records(&path)?;
    let mut summary = build_summary(&records, opts)?;
    let out = dir.join("report");
    fs::create_dir_all(&out)?;
    let mut files = Vec::new();

    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &summary.curves {
        w.serialize(c)?;
    }
    let p = out.join("curves.csv");
    fs::write(&p, w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    files.push(p);

    let p = out.join("fits.json");
    fs::write(&p, serde_json::to_string_pretty(&summary)?)?;
    files.push(p);

    let p = out.join("summary.txt");
    fs::write(&p, summary_table(&summary))?;
    files.push(p);

    let groups = group(&summary.curves);
    let schedules: BTreeSet<&String> = groups.keys().map(|k| &k.1).collect();
    for s in schedules {
        let p = out.join(format!("ler_{}.svg", s.to_lowercase()));
        fs::write(&p, ler_plot(&summary, s))?;
        files.push(p);
    }
    if !summary.fits.is_empty() {
        let p = out.join("scaling.svg");
        fs::write(&p, scaling_panels(&summary))?;
        files.push(p);
    }
    summary.files = files;
    Ok(summary)
}

pub fn summary_table(s: &ReportSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "pseudo-thresholds (per-round pL = e)");
    for th in &s.thresholds {
        let v = th.e_hat.map_or("not bracketed".into(), |v| format!("{v:.4e}"));
        let _ = writeln!(t, "  {:<8} {:<4} {:<7} {v}", th.code, th.schedule, th.engine);
    }
    let _ = writeln!(t, "engine gap (approx / exact)");
    for g in &s.gaps {
        let m = g.median_rho.map_or("n/a".into(), |v| format!("{v:.3}"));
        let sr = g.growth.as_ref().map_or("n/a".into(), |c| {
            let v: Vec<f64> = c.iter().map(|p| p.1).collect();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("{lo:.3}..{hi:.3}")
        });
        let _ = writeln!(t, "  {:<8} {:<4} median rho {m}  s range {sr}", g.code, g.schedule);
    }
    let _ = writeln!(t, "distance separation (gmean pL ratio)");
    for x in &s.separations {
        let _ = writeln!(t, "  {:<4} {:<7} {} -> {}: {:.3} over {} points", x.schedule, x.engine, x.from, x.to, x.gamma, x.points);
    }
    let _ = writeln!(t, "subthreshold fits");
    for f in &s.fits {
        let se = f.fit.pooled_se.map_or("n/a".into(), |v| format!("{v:.3}"));
        let _ = writeln!(t, "  {:<4} {:<7} e_hat {:.3e}  pooled alpha {:.4} (se {se})", f.schedule, f.engine, f.e_hat, f.fit.pooled_alpha);
        for a in &f.fit.alpha_per_e {
            let _ = writeln!(t, "      e {:.3e}: alpha {:.4}, A {:.3e}", a.e, a.alpha, a.a);
        }
    }
    for w in &s.warnings {
        let _ = writeln!(t, "warning: {w}");
    }
    t
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
    xlog: bool,
}

impl Frame {
    fn tx(&self, v: f64) -> f64 {
        let (a, b, v) = if self.xlog { (self.xr.0.log10(), self.xr.1.log10(), v.log10()) } else { (self.xr.0, self.xr.1, v) };
        self.x0 + (v - a) / (b - a) * self.w
    }

    fn ty(&self, v: f64) -> f64 {
        let (a, b) = (self.yr.0.log10(), self.yr.1.log10());
        self.y0 + self.h - (v.log10() - a) / (b - a) * self.h
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            self.x0, self.y0, self.w, self.h
        );
        let (lo, hi) = (self.yr.0.log10().floor() as i32, self.yr.1.log10().ceil() as i32);
        for k in lo..=hi {
            let v = 10f64.powi(k);
            if v < self.yr.0 * 0.999 || v > self.yr.1 * 1.001 {
                continue;
            }
            let y = self.ty(v);
            let _ = writeln!(out, r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, self.x0, self.x0 + self.w);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">1e{k}</text>"#, self.x0 - 4.0, y + 3.0);
        }
        let ticks: Vec<f64> = if self.xlog {
            let (lo, hi) = (self.xr.0.log10().floor() as i32, self.xr.1.log10().ceil() as i32);
            (lo..=hi)
                .flat_map(|k| [1.0, 2.0, 5.0].map(|m| m * 10f64.powi(k)))
                .filter(|v| *v >= self.xr.0 * 0.999 && *v <= self.xr.1 * 1.001)
                .collect()
        } else {
            let step = ((self.xr.1 - self.xr.0) / 6.0).ceil().max(1.0);
            let mut v = self.xr.0.ceil();
            let mut t = Vec::new();
            while v <= self.xr.1 {
                t.push(v);
                v += step;
            }
            t
        };
        for v in ticks {
            let x = self.tx(v);
            let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, self.y0 + self.h, self.y0 + self.h + 4.0);
            let label = if self.xlog { format!("{v:.0e}") } else { format!("{v}") };
            let _ = writeln!(out, r#"<text x="{x:.1}" y="{:.1}" font-size="10" text-anchor="middle">{label}</text>"#, self.y0 + self.h + 15.0);
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{xlabel}</text>"#, self.x0 + self.w / 2.0, self.y0 + self.h + 32.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0,
            self.x0 - 42.0,
            self.y0 + self.h / 2.0
        );
    }
}

fn positive_range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let v: Vec<f64> = vals.filter(|v| *v > 0.0 && v.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some((10f64.powf(lo.log10().floor()), 10f64.powf(hi.log10().ceil()).max(lo * 10.0)))
}

fn svg_open(w: f64, h: f64) -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n")
}

/// Per-round pL against e for one schedule; one colour per code, solid for
/// the exact engine and dashed for the approximate one.
pub fn ler_plot(s: &ReportSummary, schedule: &str) -> String {
    let pts: Vec<&CurvePoint> = s.curves.iter().filter(|c| c.schedule == schedule).collect();
    let mut out = svg_open(640.0, 440.0);
    let xr = positive_range(pts.iter().map(|p| p.e)).unwrap_or((1e-3, 1e-1));
    let yr = positive_range(pts.iter().flat_map(|p| [p.p_round, p.round_hi]).chain(pts.iter().map(|p| p.e))).unwrap_or((1e-6, 1.0));
    let f = Frame { x0: 70.0, y0: 40.0, w: 420.0, h: 330.0, xr, yr, xlog: true };
    let _ = writeln!(out, r#"<text x="280" y="24" font-size="14" text-anchor="middle">per-round logical error rate, {schedule}</text>"#);
    f.axes(&mut out, "erasure rate e", "per-round pL");
    let _ = writeln!(
        out,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="2,3"/>"##,
        f.tx(xr.0.max(yr.0)),
        f.ty(xr.0.max(yr.0)),
        f.tx(xr.1.min(yr.1)),
        f.ty(xr.1.min(yr.1))
    );
    let codes: Vec<String> = pts.iter().map(|p| p.code.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut legend_y = 50.0;
    for (ci, code) in codes.iter().enumerate() {
        let colour = PALETTE[ci % PALETTE.len()];
        for engine in ["exact", "approx"] {
            let series: Vec<&&CurvePoint> = pts.iter().filter(|p| &p.code == code && p.engine == engine && p.p_round > 0.0).collect();
            if series.is_empty() {
                continue;
            }
            let dash = if engine == "approx" { r#" stroke-dasharray="6,4""# } else { "" };
            let path: Vec<String> = series.iter().map(|p| format!("{:.1},{:.1}", f.tx(p.e), f.ty(p.p_round))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.6"{dash}/>"#, path.join(" "));
            for p in &series {
                let (x, y) = (f.tx(p.e), f.ty(p.p_round));
                let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.1}" r="2.6" fill="{colour}"/>"#);
                if p.round_lo > 0.0 {
                    let _ = writeln!(out, r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="{colour}"/>"#, f.ty(p.round_lo), f.ty(p.round_hi));
                }
            }
            let _ = writeln!(out, r#"<line x1="505" y1="{legend_y:.1}" x2="535" y2="{legend_y:.1}" stroke="{colour}" stroke-width="1.6"{dash}/>"#);
            let _ = writeln!(out, r#"<text x="540" y="{:.1}" font-size="11">{code} {engine}</text>"#, legend_y + 4.0);
            legend_y += 18.0;
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Four panels (2EC/4EC by exact/approx) of per-round pL against distance,
/// with the fitted lines dashed.
pub fn scaling_panels(s: &ReportSummary) -> String {
    let mut out = svg_open(900.0, 720.0);
    let d_all: Vec<f64> = s.curves.iter().map(|c| c.rounds as f64).collect();
    let dmin = d_all.iter().copied().fold(f64::INFINITY, f64::min);
    let dmax = d_all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xr = (dmin - 1.0, dmax + 1.0);
    for (row, sched) in ["2EC", "4EC"].iter().enumerate() {
        for (col, eng) in ["exact", "approx"].iter().enumerate() {
            let f_x0 = 80.0 + col as f64 * 430.0;
            let f_y0 = 50.0 + row as f64 * 340.0;
            let fit = s.fits.iter().find(|f| f.schedule == *sched && f.engine == *eng);
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{sched}, {eng}</text>"#, f_x0 + 160.0, f_y0 - 12.0);
            let Some(fit) = fit else {
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">no fit</text>"#, f_x0 + 160.0, f_y0 + 130.0);
                continue;
            };
            let used: Vec<&CurvePoint> = s
                .curves
                .iter()
                .filter(|c| c.schedule == *sched && c.engine == *eng && c.e < fit.e_hat && c.p_round > 0.0)
                .collect();
            let yr = positive_range(used.iter().map(|c| c.p_round)).unwrap_or((1e-6, 1.0));
            let f = Frame { x0: f_x0, y0: f_y0, w: 320.0, h: 250.0, xr, yr, xlog: false };
            f.axes(&mut out, "distance d", "per-round pL");
            let es: Vec<f64> = used.iter().map(|c| c.e).fold(Vec::new(), |mut v, e| {
                if !v.contains(&e) {
                    v.push(e);
                }
                v
            });
            for (k, e) in es.iter().enumerate() {
                let colour = PALETTE[k % PALETTE.len()];
                for c in used.iter().filter(|c| c.e == *e) {
                    let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{colour}"/>"#, f.tx(c.rounds as f64), f.ty(c.p_round));
                }
                let label = match fit.fit.alpha_per_e.iter().find(|a| a.e == *e) {
                    Some(a) => {
                        let g = (e / fit.e_hat).ln();
                        let (d0, d1) = (xr.0 + 0.5, xr.1 - 0.5);
                        let y0 = (a.log_a + a.alpha * d0 * g).exp();
                        let y1 = (a.log_a + a.alpha * d1 * g).exp();
                        let clamp = |v: f64| v.clamp(yr.0, yr.1);
                        let _ = writeln!(
                            out,
                            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-dasharray="5,4"/>"#,
                            f.tx(d0),
                            f.ty(clamp(y0)),
                            f.tx(d1),
                            f.ty(clamp(y1))
                        );
                        format!("e={e:.2e}, alpha={:.3}", a.alpha)
                    }
                    None => format!("e={e:.2e}"),
                };
                let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" fill="{colour}">{label}</text>"#, f_x0 + 8.0, f_y0 + 14.0 + 12.0 * k as f64);
            }
            let se = fit.fit.pooled_se.map_or("n/a".into(), |v| format!("{v:.3}"));
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11">pooled alpha = {:.3} (se {se}), e_hat = {:.2e}</text>"#,
                f_x0,
                f_y0 + 292.0,
                fit.fit.pooled_alpha,
                fit.e_hat
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
