//! Experiment sweeps over (code, schedule, engine, e): configuration,
//! seed splitting, resumable execution and CSV/JSON persistence.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bbcode::BBCodeSpec;
use crate::circuit::{build_memory_circuit, Basis, Circuit};
use crate::compiler::{compile_with, sample_erasure_pattern, CompileOptions, EcSchedule, ErasureCircuit, NoiseLaw};
use crate::decoder::{decode_batch, BatchOutcome, DecoderConfig};
use crate::engines::{convert, Engine};
use crate::error::{Error, Result};
use crate::metrics::SweepRecord;
use crate::seeds::{derive_seed, label_of};
use crate::sim::{extract_dem, reference_run, sample_shots};

pub const RECORDS_FILE: &str = "records.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";
const UNITS_DIR: &str = "units";

/// Either an explicit list of erasure rates or `count` log-uniform points
/// between `lo` and `hi` inclusive.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EGrid {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl EGrid {
    pub fn log_uniform(lo: f64, hi: f64, count: usize) -> Self {
        Self { values: Vec::new(), lo: Some(lo), hi: Some(hi), count: Some(count) }
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        Self { values, ..Default::default() }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match (self.values.is_empty(), self.lo, self.hi, self.count) {
            (false, None, None, None) => self.values.clone(),
            (true, Some(lo), Some(hi), Some(count)) => {
                if !(lo > 0.0 && hi >= lo) || count == 0 {
                    return Err(Error::Config(format!("bad log-uniform grid lo={lo} hi={hi} count={count}")));
                }
                if count == 1 {
                    vec![lo]
                } else {
                    let (a, b) = (lo.ln(), hi.ln());
                    (0..count)
                        .map(|i| match i {
                            0 => lo,
                            i if i == count - 1 => hi,
                            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
                        })
                        .collect()
                }
            }
            _ => return Err(Error::Config("e_grid needs either `values` or all of `lo`, `hi`, `count`".into())),
        };
        if pts.is_empty() {
            return Err(Error::Config("empty e_grid".into()));
        }
        if let Some(bad) = pts.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(Error::Config(format!("erasure rate {bad} outside [0, 1)")));
        }
        Ok(pts)
    }
}

fn default_basis() -> Basis {
    Basis::X
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub codes: Vec<String>,
    pub schedules: Vec<String>,
    pub engines: Vec<String>,
    pub e_grid: EGrid,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub instances: usize,
    pub shots: usize,
    /// Syndrome rounds; defaults to each code's distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    #[serde(default)]
    pub idle_noise: bool,
    #[serde(default)]
    pub decoder: DecoderConfig,
    pub seed: u64,
    pub output: PathBuf,
}

fn default_beta() -> f64 {
    NoiseLaw::DEFAULT_BETA
}

fn default_gamma() -> f64 {
    NoiseLaw::DEFAULT_GAMMA
}

impl ExperimentConfig {
    /// Desk-scale defaults: [[72,12,6]], both schedules and engines, eight
    /// log-spaced e in [3e-3, 2e-2], 200 instances of 200 shots, OSD-0.
    pub fn desk() -> Self {
        Self {
            codes: vec!["bb72".into()],
            schedules: vec!["2ec".into(), "4ec".into()],
            engines: vec!["exact".into(), "approx".into()],
            e_grid: EGrid::log_uniform(3e-3, 2e-2, 8),
            beta: NoiseLaw::DEFAULT_BETA,
            gamma: NoiseLaw::DEFAULT_GAMMA,
            instances: 200,
            shots: 200,
            rounds: None,
            basis: Basis::X,
            idle_noise: false,
            decoder: DecoderConfig::default(),
            seed: 20_251_017,
            output: PathBuf::from("results"),
        }
    }

    /// Full-scale settings. Expensive: thousands of core-hours.
    pub fn full() -> Self {
        Self {
            codes: vec!["bb72".into(), "bb108".into(), "bb144".into()],
            e_grid: EGrid::log_uniform(3e-3, 2e-2, 12),
            instances: 2000,
            shots: 500,
            decoder: DecoderConfig { bp_max_iters: 30, osd_order: 60 },
            ..Self::desk()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            other => Err(Error::Config(format!("unknown profile {other:?} (desk|full)"))),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn specs(&self) -> Result<Vec<BBCodeSpec>> {
        self.codes
            .iter()
            .map(|c| BBCodeSpec::by_id(c).ok_or_else(|| Error::Config(format!("unknown code {c:?}"))))
            .collect()
    }

    pub fn parsed_schedules(&self) -> Result<Vec<EcSchedule>> {
        self.schedules.iter().map(|s| EcSchedule::parse(s)).collect()
    }

    pub fn parsed_engines(&self) -> Result<Vec<Engine>> {
        self.engines.iter().map(|s| s.parse()).collect()
    }

    pub fn rounds_for(&self, spec: &BBCodeSpec) -> usize {
        self.rounds.unwrap_or(spec.claimed_d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 || self.shots == 0 {
            return Err(Error::Config("instances and shots must be at least 1".into()));
        }
        if self.codes.is_empty() || self.schedules.is_empty() || self.engines.is_empty() {
            return Err(Error::Config("codes, schedules and engines must be non-empty".into()));
        }
        if self.rounds == Some(0) {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        self.specs()?;
        self.parsed_schedules()?;
        self.parsed_engines()?;
        self.decoder.validate()?;
        for e in self.e_grid.points()? {
            NoiseLaw::with_scales(e, self.beta, self.gamma)?;
        }
        Ok(())
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex_digest(serde_json::to_string(self)?.as_bytes()))
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One (code, schedule, engine, e) configuration of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepUnit {
    pub code: String,
    pub schedule: String,
    pub engine: Engine,
    pub e_index: usize,
    pub e: f64,
}

#[derive(Serialize)]
struct UnitKey<'a> {
    unit: &'a SweepUnit,
    rounds: usize,
    beta: f64,
    gamma: f64,
    instances: usize,
    shots: usize,
    basis: Basis,
    idle_noise: bool,
    decoder: DecoderConfig,
    seed: u64,
    version: &'static str,
}

pub fn unit_hash(cfg: &ExperimentConfig, unit: &SweepUnit, rounds: usize) -> Result<String> {
    let key = UnitKey {
        unit,
        rounds,
        beta: cfg.beta,
        gamma: cfg.gamma,
        instances: cfg.instances,
        shots: cfg.shots,
        basis: cfg.basis,
        idle_noise: cfg.idle_noise,
        decoder: cfg.decoder,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
    };
    Ok(hex_digest(serde_json::to_string(&key)?.as_bytes()))
}

/// Seeds of one instance. The erasure pattern does not depend on the engine,
/// so engines are compared on identical patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceSeeds {
    pub erasure: u64,
    pub conversion: u64,
    pub shots: u64,
}

pub fn instance_seeds(master: u64, code: &str, schedule: &str, engine: Engine, e_index: usize, instance: usize) -> InstanceSeeds {
    let base = derive_seed(master, &[label_of(code), label_of(schedule), e_index as u64, instance as u64]);
    let eng = derive_seed(base, &[label_of(engine.name())]);
    InstanceSeeds {
        erasure: derive_seed(base, &[label_of("erasure")]),
        conversion: derive_seed(eng, &[1]),
        shots: derive_seed(eng, &[2]),
    }
}

/// Everything needed to run the instances of one unit.
pub struct UnitContext<'a> {
    pub ce: &'a ErasureCircuit,
    pub unit: &'a SweepUnit,
    pub instances: usize,
    pub shots: usize,
    pub decoder: DecoderConfig,
    pub seed: u64,
}

/// Runs one instance: sample an erasure pattern, convert, extract the
/// DEM, sample shots and decode them.
pub fn run_instance(ctx: &UnitContext<'_>, instance: usize) -> Result<BatchOutcome> {
    let u = ctx.unit;
    let s = instance_seeds(ctx.seed, &u.code, &u.schedule, u.engine, u.e_index, instance);
    let log = sample_erasure_pattern(ctx.ce, s.erasure);
    let (c, _) = convert(ctx.ce, &log, u.engine, s.conversion)?;
    let dem = extract_dem(&c);
    let batch = sample_shots(&c, ctx.shots, s.shots);
    decode_batch(&dem, &batch, &ctx.decoder)
}

pub fn run_unit(ctx: &UnitContext<'_>) -> Result<BatchOutcome> {
    let parts: Vec<Result<BatchOutcome>> = (0..ctx.instances).into_par_iter().map(|i| run_instance(ctx, i)).collect();
    let mut total = BatchOutcome::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

fn record_for(cfg: &ExperimentConfig, unit: &SweepUnit, rounds: usize, out: Result<BatchOutcome>) -> SweepRecord {
    let law = NoiseLaw::with_scales(unit.e, cfg.beta, cfg.gamma).unwrap_or(NoiseLaw { e: unit.e, beta: cfg.beta, gamma: cfg.gamma });
    let mut rec = SweepRecord {
        code: unit.code.clone(),
        schedule: unit.schedule.clone(),
        engine: unit.engine.name().to_string(),
        e_index: unit.e_index,
        e: unit.e,
        p: law.p(),
        q: law.q(),
        rounds,
        instances: cfg.instances,
        shots: 0,
        errors: 0,
        discards: 0,
        per_observable: String::new(),
        seed: cfg.seed,
        status: "ok".into(),
    };
    match out {
        Ok(o) => {
            rec.shots = o.shots;
            rec.errors = o.errors;
            rec.discards = o.discards;
            rec.per_observable = o.per_observable.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
        }
        Err(e) => rec.status = format!("error: {e}"),
    }
    rec
}

/// Runs `f` on a pool sized by `BIBIEQ_WORKERS` when set.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var("BIBIEQ_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    config: &'a ExperimentConfig,
    config_hash: String,
    master_seed: u64,
    package: &'static str,
    version: &'static str,
    units: Vec<ProvenanceUnit>,
}

#[derive(Serialize)]
struct ProvenanceUnit {
    hash: String,
    code: String,
    schedule: String,
    engine: String,
    e: f64,
    status: String,
}

pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub records_path: PathBuf,
    pub provenance_path: PathBuf,
    /// Units loaded from a previous run rather than computed.
    pub resumed: usize,
}

fn canonical_sort(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| {
        (&a.code, &a.schedule, &a.engine, a.e_index).cmp(&(&b.code, &b.schedule, &b.engine, b.e_index))
    });
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Noiseless memory circuit of a code, checked for deterministic detectors
/// and observables.
pub fn reference_circuit(spec: &BBCodeSpec, rounds: usize, basis: Basis) -> Result<Circuit> {
    let c0 = build_memory_circuit(spec, rounds, basis)?;
    reference_run(&c0)?;
    Ok(c0)
}

/// Runs every configuration of `cfg`, skipping units whose result file
/// already exists in the output directory, and writes the sorted records
/// CSV plus a provenance JSON.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let units_dir = cfg.output.join(UNITS_DIR);
    fs::create_dir_all(&units_dir)?;
    let grid = cfg.e_grid.points()?;
    let schedules = cfg.parsed_schedules()?;
    let engines = cfg.parsed_engines()?;
    let opts = CompileOptions { idle_noise: cfg.idle_noise, ..Default::default() };
    let mut records = Vec::new();
    let mut prov_units = Vec::new();
    let mut resumed = 0;
    for spec in cfg.specs()? {
        let rounds = cfg.rounds_for(&spec);
        let mut c0: Option<Result<Circuit>> = None;
        for sched in &schedules {
            for (ei, &e) in grid.iter().enumerate() {
                let mut ce: Option<Result<ErasureCircuit>> = None;
                for &engine in &engines {
                    let unit = SweepUnit { code: spec.name.clone(), schedule: sched.tag(), engine, e_index: ei, e };
                    let hash = unit_hash(cfg, &unit, rounds)?;
                    let path = units_dir.join(format!("{hash}.json"));
                    let rec = if path.exists() {
                        resumed += 1;
                        serde_json::from_slice(&fs::read(&path)?)?
                    } else {
                        let c0 = c0.get_or_insert_with(|| reference_circuit(&spec, rounds, cfg.basis));
                        let ce = ce.get_or_insert_with(|| {
                            let c0 = c0.as_ref().map_err(|e| Error::InvalidCircuit(e.to_string()))?;
                            compile_with(c0, &NoiseLaw::with_scales(e, cfg.beta, cfg.gamma)?, sched, &opts)
                        });
                        log::info!("running {} {} {} e={e:.3e}", unit.code, unit.schedule, engine);
                        let out = match ce {
                            Ok(ce) => with_workers(|| {
                                run_unit(&UnitContext {
                                    ce,
                                    unit: &unit,
                                    instances: cfg.instances,
                                    shots: cfg.shots,
                                    decoder: cfg.decoder,
                                    seed: cfg.seed,
                                })
                            })
                            .and_then(|r| r),
                            Err(err) => Err(Error::InvalidCircuit(err.to_string())),
                        };
                        let rec = record_for(cfg, &unit, rounds, out);
                        if rec.status != "ok" {
                            log::warn!("{} {} {} e={e}: {}", unit.code, unit.schedule, engine, rec.status);
                        }
                        write_atomic(&path, serde_json::to_string_pretty(&rec)?.as_bytes())?;
                        rec
                    };
                    prov_units.push(ProvenanceUnit {
                        hash,
                        code: unit.code.clone(),
                        schedule: unit.schedule.clone(),
                        engine: engine.name().into(),
                        e,
                        status: rec.status.clone(),
                    });
                    records.push(rec);
                }
            }
        }
    }
    canonical_sort(&mut records);
    let records_path = cfg.output.join(RECORDS_FILE);
    write_atomic(&records_path, &records_to_csv(&records)?)?;
    let provenance_path = cfg.output.join(PROVENANCE_FILE);
    let prov = Provenance {
        config: cfg,
        config_hash: cfg.hash()?,
        master_seed: cfg.seed,
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        units: prov_units,
    };
    write_atomic(&provenance_path, serde_json::to_string_pretty(&prov)?.as_bytes())?;
    Ok(SweepOutput { records, records_path, provenance_path, resumed })
}

pub fn records_to_csv(records: &[SweepRecord]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for r in rd.deserialize() {
        let rec: SweepRecord = r?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_uniform_grid() {
        let g = EGrid::log_uniform(3e-3, 2e-2, 8).points().unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!((g[0], g[7]), (3e-3, 2e-2));
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
        assert!(EGrid::explicit(vec![1.5]).points().is_err());
        assert!(EGrid::default().points().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::desk();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::full().decoder.osd_order, 60);
    }

    #[test]
    fn erasure_seed_is_shared_across_engines() {
        let a = instance_seeds(1, "bb72", "2EC", Engine::Exact, 3, 4);
        let b = instance_seeds(1, "bb72", "2EC", Engine::Approx, 3, 4);
        assert_eq!(a.erasure, b.erasure);
        assert_ne!(a.conversion, b.conversion);
        assert_ne!(a.shots, b.shots);
        assert_ne!(a.erasure, instance_seeds(1, "bb72", "2EC", Engine::Exact, 3, 5).erasure);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ExperimentConfig::desk();
        cfg.instances = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::desk();
        cfg.codes = vec!["nope".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::desk();
        cfg.engines = vec!["fast".into()];
        assert!(cfg.validate().is_err());
    }
}
