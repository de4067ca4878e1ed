use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bibieq::bbcode::{build_check_matrices, BBCodeSpec, CheckType};
use bibieq::circuit::{build_memory_circuit, to_stim, Basis};
use bibieq::compiler::{compile_with, sample_erasure_pattern, CompileOptions, EcSchedule, ErasureCircuit, NoiseLaw};
use bibieq::decoder::{decode_batch, DecoderConfig};
use bibieq::engines::{convert, Engine};
use bibieq::report::{report, ReportOptions};
use bibieq::sim::{extract_dem, reference_run, sample_shots};
use bibieq::sweep::{instance_seeds, run_sweep, with_workers, EGrid, ExperimentConfig};

#[derive(Parser)]
#[command(name = "bibieq", version, about = "Erasure-aware memory experiments on bivariate bicycle codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the noiseless memory circuit of a code.
    Build(BuildArgs),
    /// Lower the memory circuit into the erasure-annotated circuit.
    Compile(CompileArgs),
    /// Sample one erasure pattern and convert it to a Pauli-noise circuit.
    Convert(ConvertArgs),
    /// Run a sweep over codes, schedules, engines and erasure rates.
    Sweep(SweepArgs),
    /// Write tables and plots for a results directory.
    Report(ReportArgs),
}

#[derive(Args)]
struct CodeArgs {
    /// Code id: bb72, bb108, bb144 (also 72 or [[72,12,6]]), or a TOML code file.
    #[arg(long, default_value = "bb72")]
    code: String,
    /// Syndrome rounds (default: the code distance).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value = "X", value_parser = parse_basis)]
    basis: Basis,
}

impl CodeArgs {
    fn spec(&self) -> Result<BBCodeSpec> {
        if let Some(s) = BBCodeSpec::by_id(&self.code) {
            return Ok(s);
        }
        let text = fs::read_to_string(&self.code).with_context(|| format!("unknown code {:?}", self.code))?;
        Ok(BBCodeSpec::from_config_str(&text)?)
    }

    fn rounds(&self, spec: &BBCodeSpec) -> usize {
        self.rounds.unwrap_or(spec.claimed_d)
    }
}

fn parse_basis(s: &str) -> std::result::Result<Basis, String> {
    match s {
        "X" | "x" => Ok(Basis::X),
        "Z" | "z" => Ok(Basis::Z),
        _ => Err(format!("basis must be X or Z, got {s:?}")),
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Emit Stim syntax instead of the native text format.
    #[arg(long)]
    stim: bool,
    /// Print the parity-check supports instead of the circuit.
    #[arg(long)]
    checks: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Erasure-check schedule: 4ec, 2ec, or checkpoint letters such as AD.
    #[arg(long, default_value = "4ec")]
    schedule: String,
    /// Erasure rate e.
    #[arg(long, short)]
    e: f64,
    #[arg(long, default_value_t = NoiseLaw::DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = NoiseLaw::DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long)]
    idle_noise: bool,
    /// Check data qubits only.
    #[arg(long)]
    data_only: bool,
}

impl NoiseArgs {
    fn erasure_circuit(&self) -> Result<ErasureCircuit> {
        let spec = self.code.spec()?;
        let c0 = build_memory_circuit(&spec, self.code.rounds(&spec), self.code.basis)?;
        let law = NoiseLaw::with_scales(self.e, self.beta, self.gamma)?;
        let opts = CompileOptions { data_only: self.data_only, idle_noise: self.idle_noise };
        Ok(compile_with(&c0, &law, &EcSchedule::parse(&self.schedule)?, &opts)?)
    }
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value = "exact")]
    engine: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instance index used for seed splitting.
    #[arg(long, default_value_t = 0)]
    instance: usize,
    /// Write the Pauli-noise circuit here (stdout otherwise).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write the conversion report (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the detector error model.
    #[arg(long)]
    dem: Option<PathBuf>,
    /// Also sample and decode this many shots and print the outcome.
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, default_value_t = 30)]
    bp_iters: usize,
    #[arg(long, default_value_t = 0)]
    osd_order: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "desk")]
    profile: String,
    /// TOML configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    codes: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    schedules: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    e_values: Option<Vec<f64>>,
    #[arg(long, requires_all = ["e_hi", "e_count"])]
    e_lo: Option<f64>,
    #[arg(long)]
    e_hi: Option<f64>,
    #[arg(long)]
    e_count: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    bp_iters: Option<usize>,
    #[arg(long)]
    osd_order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_toml_str(&fs::read_to_string(p)?)?,
            None => ExperimentConfig::profile(&self.profile)?,
        };
        if let Some(v) = &self.codes {
            cfg.codes = v.clone();
        }
        if let Some(v) = &self.schedules {
            cfg.schedules = v.clone();
        }
        if let Some(v) = &self.engines {
            cfg.engines = v.clone();
        }
        if let Some(v) = &self.e_values {
            cfg.e_grid = EGrid::explicit(v.clone());
        }
        if let (Some(lo), Some(hi), Some(n)) = (self.e_lo, self.e_hi, self.e_count) {
            cfg.e_grid = EGrid::log_uniform(lo, hi, n);
        }
        macro_rules! set {
            ($($f:ident => $t:expr),*) => {$(if let Some(v) = self.$f { $t = v; })*};
        }
        set!(beta => cfg.beta, gamma => cfg.gamma, instances => cfg.instances, shots => cfg.shots,
             bp_iters => cfg.decoder.bp_max_iters, osd_order => cfg.decoder.osd_order, seed => cfg.seed);
        if self.rounds.is_some() {
            cfg.rounds = self.rounds;
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Results directory containing records.csv.
    dir: PathBuf,
    /// Fit with the reference pseudo-thresholds instead of measured ones.
    #[arg(long)]
    reference_e_hat: bool,
    /// Fixed pseudo-threshold, e.g. 4EC:exact=8.5e-3 (repeatable).
    #[arg(long = "e-hat")]
    e_hat: Vec<String>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Build(a) => {
            let spec = a.code.spec()?;
            if a.checks {
                let pc = build_check_matrices(&spec)?;
                let mut text = pc.to_coordinate_text(CheckType::X);
                text.push_str(&pc.to_coordinate_text(CheckType::Z));
                return emit(&a.out, &text);
            }
            let c0 = build_memory_circuit(&spec, a.code.rounds(&spec), a.code.basis)?;
            reference_run(&c0)?;
            emit(&a.out, &if a.stim { to_stim(&c0) } else { c0.to_text() })
        }
        Command::Compile(a) => {
            let ce = a.noise.erasure_circuit()?;
            log::info!(
                "{} sites in {} checked segments",
                ce.n_sites(),
                ce.checked_segments().count()
            );
            emit(&a.out, &ce.circuit.to_text())
        }
        Command::Convert(a) => {
            let ce = a.noise.erasure_circuit()?;
            let engine: Engine = a.engine.parse()?;
            let spec = a.noise.code.spec()?;
            let s = instance_seeds(a.seed, &spec.name, &ce.schedule.tag(), engine, 0, a.instance);
            let pattern = sample_erasure_pattern(&ce, s.erasure);
            log::info!("{} flagged checks", pattern.n_flagged());
            let (c, rep) = convert(&ce, &pattern, engine, s.conversion)?;
            if let Some(p) = &a.report {
                fs::write(p, rep.to_json()?)?;
            }
            let dem = extract_dem(&c);
            if let Some(p) = &a.dem {
                fs::write(p, dem.to_text())?;
            }
            if let Some(n) = a.shots {
                let cfg = DecoderConfig { bp_max_iters: a.bp_iters, osd_order: a.osd_order };
                let batch = sample_shots(&c, n, s.shots);
                let out = with_workers(|| decode_batch(&dem, &batch, &cfg))??;
                eprintln!("{}", serde_json::to_string(&out)?);
            }
            emit(&a.out, &c.to_text())
        }
        Command::Sweep(a) => {
            let cfg = a.config()?;
            if a.dump_config {
                print!("{}", cfg.to_toml_string()?);
                return Ok(());
            }
            let out = run_sweep(&cfg)?;
            let failed = out.records.iter().filter(|r| r.status != "ok").count();
            println!(
                "{} records ({} resumed, {} failed) -> {}",
                out.records.len(),
                out.resumed,
                failed,
                out.records_path.display()
            );
            Ok(())
        }
        Command::Report(a) => {
            let mut opts = if a.reference_e_hat { ReportOptions::with_reference_e_hat() } else { ReportOptions::default() };
            for spec in &a.e_hat {
                let (key, val) = spec.split_once('=').ok_or_else(|| anyhow!("--e-hat expects SCHEDULE:ENGINE=VALUE"))?;
                let (s, e) = key.split_once(':').ok_or_else(|| anyhow!("--e-hat expects SCHEDULE:ENGINE=VALUE"))?;
                let v: f64 = val.parse().with_context(|| format!("bad value in {spec:?}"))?;
                if !(v > 0.0) {
                    bail!("pseudo-threshold must be positive");
                }
                opts.e_hat.insert((s.to_uppercase(), e.to_lowercase()), v);
            }
            let summary = report(&a.dir, &opts)?;
            for w in &summary.warnings {
                log::warn!("{w}");
            }
            for f in &summary.files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}
