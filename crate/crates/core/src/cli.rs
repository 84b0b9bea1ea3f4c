//! Command-line front end: `run`, `compare`, `scan` and `presets`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rayon::prelude::*;

use crate::diagnostics::{compare_fields, fit_velocity, measure_series, transparency_scan, CompareMode};
use crate::error::{Error, Result};
use crate::io::{read_run, write_run, RunManifest};
use crate::model::{
    CondensateProfile, ControlSchedule, Grid1D, PhysicalParams, PotentialFrame, PotentialSpec, PulseSpec,
    SimulationConfig, SolverTier,
};

#[derive(Debug, Parser)]
#[command(name = "eit-bec", version, about = "Probe-pulse propagation through a Lambda-type condensate under EIT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write snapshots, diagnostics and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.tier` from the config.
        #[arg(long)]
        tier: Option<SolverTier>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the envelope snapshots of two run directories.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// absolute_L2, relative_L2 or modulus_only.
        #[arg(long, default_value = "relative_L2")]
        mode: CompareMode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the probe detuning (transmission) or the control amplitude
    /// (group velocity).
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: ScanParam,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the shipped presets, or write one (or all, with `--out DIR`).
    Presets {
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanParam {
    #[value(name = "Delta", alias = "delta")]
    Delta,
    #[value(name = "G0", alias = "g0")]
    G0,
}

/// Runs a parsed command, writing human-readable output to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    match cli.command {
        Command::Run { config, tier, out } => {
            let manifest = cmd_run(&config, tier, &out)?;
            writeln!(
                stdout,
                "{} tier: {} steps, {} files in {}",
                manifest.tier.name(),
                manifest.steps,
                manifest.files.len(),
                out.display()
            )?;
        }
        Command::Compare { run_a, run_b, mode, out } => {
            let report = cmd_compare(&run_a, &run_b, mode)?;
            emit(&report, out.as_deref(), stdout)?;
        }
        Command::Scan { config, param, values, out } => {
            let table = cmd_scan(&config, param, &values)?;
            emit(&table, out.as_deref(), stdout)?;
        }
        Command::Presets { name, out } => match (name, out) {
            (None, None) => {
                for n in PRESETS {
                    writeln!(stdout, "{n}")?;
                }
            }
            (None, Some(dir)) => {
                fs::create_dir_all(&dir)?;
                for n in PRESETS {
                    fs::write(dir.join(format!("{n}.cfg")), preset(n)?.to_text())?;
                }
                writeln!(stdout, "wrote {} presets to {}", PRESETS.len(), dir.display())?;
            }
            (Some(n), out) => emit(&preset(&n)?.to_text(), out.as_deref(), stdout)?,
        },
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn std::io::Write) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_run(config_path: &Path, tier: Option<SolverTier>, out: &Path) -> Result<RunManifest> {
    let mut config = SimulationConfig::from_file(config_path)?;
    if let Some(t) = tier {
        config.solver_tier = t;
    }
    info!("running {} tier, {} steps", config.solver_tier.name(), config.n_steps());
    let start = Instant::now();
    let output = crate::run(&config)?;
    let elapsed = start.elapsed().as_secs_f64();
    info!("finished in {elapsed:.3} s");
    write_run(out, &config, &output, elapsed)
}

/// Per-snapshot comparison table followed by max/mean summary lines.
pub fn cmd_compare(run_a: &Path, run_b: &Path, mode: CompareMode) -> Result<String> {
    let a = read_run(run_a)?;
    let b = read_run(run_b)?;
    if a.manifest.config.grid != b.manifest.config.grid {
        return Err(Error::GridMismatch(format!(
            "{} has {:?}, {} has {:?}",
            run_a.display(),
            a.manifest.config.grid,
            run_b.display(),
            b.manifest.config.grid
        )));
    }
    if a.envelopes.len() != b.envelopes.len() {
        return Err(Error::invalid(format!(
            "runs hold {} and {} snapshots; they are not co-registered",
            a.envelopes.len(),
            b.envelopes.len()
        )));
    }
    let mut s = format!("index,time,{}\n", mode_name(mode));
    let mut values = Vec::with_capacity(a.envelopes.len());
    for (i, ((ta, fa), (tb, fb))) in a.envelopes.iter().zip(&b.envelopes).enumerate() {
        if (ta - tb).abs() > 1e-9 * ta.abs().max(1.0) {
            return Err(Error::invalid(format!("snapshot {i} times differ: {ta} vs {tb}")));
        }
        let v = compare_fields(fa, fb, mode)?;
        values.push(v);
        let _ = writeln!(s, "{i},{ta:?},{v:e}");
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
    let _ = writeln!(s, "# max = {max:e}\n# mean = {mean:e}");
    Ok(s)
}

fn mode_name(mode: CompareMode) -> &'static str {
    match mode {
        CompareMode::AbsoluteL2 => "absolute_L2",
        CompareMode::RelativeL2 => "relative_L2",
        CompareMode::ModulusOnly => "modulus_only",
    }
}

/// One CSV row per value: transmitted fraction for `Delta` (full tier),
/// fitted group velocity for `G0` (constant control, config tier).
pub fn cmd_scan(config_path: &Path, param: ScanParam, values: &[f64]) -> Result<String> {
    if values.is_empty() {
        return Err(Error::validation("scan needs at least one value"));
    }
    let base = SimulationConfig::from_file(config_path)?;
    match param {
        ScanParam::Delta => {
            let mut s = String::from("Delta,transmitted_fraction\n");
            for (d, t) in transparency_scan(&base, values)? {
                let _ = writeln!(s, "{d:?},{t:?}");
            }
            Ok(s)
        }
        ScanParam::G0 => {
            let rows: Vec<Result<(f64, f64, f64)>> = values
                .par_iter()
                .map(|&g0| {
                    let mut cfg = base.clone();
                    cfg.control = ControlSchedule::constant(g0);
                    let out = crate::run(&cfg)?;
                    let fit = fit_velocity(&measure_series(out.snapshots.iter().map(|s| (s.time, &s.envelope))))?;
                    let p = &cfg.params;
                    Ok((g0, fit.slope, crate::analytic::group_velocity(g0, p.g(), p.alpha_mag(), p.c())))
                })
                .collect();
            let mut s = String::from("G0,velocity,expected_velocity\n");
            for r in rows {
                let (g0, v, e) = r?;
                let _ = writeln!(s, "{g0:?},{v:?},{e:?}");
            }
            Ok(s)
        }
    }
}

pub const PRESETS: [&str; 5] = ["transport", "stop_and_release", "harmonic_steering", "free_expansion", "transparency_scan"];

fn params(g: f64, gamma: f64, c: f64, mass: f64) -> Result<PhysicalParams> {
    PhysicalParams::builder().g(g).alpha_mag(1.0).gamma(gamma).c(c).mass(mass).build()
}

fn gaussian(center: f64, width: f64) -> PulseSpec {
    PulseSpec::Gaussian { center, width, amplitude: 1.0 }
}

/// Shipped scenario configs, one per physical claim.
pub fn preset(name: &str) -> Result<SimulationConfig> {
    let cfg = match name {
        "transport" => {
            let mut c = SimulationConfig::uniform(
                Grid1D::new(1024, 100.0)?,
                params(1.0, 0.0, 10.0, f64::INFINITY)?,
                ControlSchedule::constant(1.0),
                gaussian(-30.0, 2.0),
            );
            c.dt = 0.005;
            c.t_final = 4.0;
            c.snapshot_stride = 40;
            c
        }
        "stop_and_release" => {
            let mut c = SimulationConfig::uniform(
                Grid1D::new(1024, 160.0)?,
                params(3.0, 1.0, 1.0, 1.0)?,
                ControlSchedule::StopAndRelease { g0: 4.5, t_off: 10.0, t_on: 35.0, t_width: 4.0 },
                gaussian(-40.0, 6.0),
            );
            c.solver_tier = SolverTier::Analytic;
            c.dt = 0.02;
            c.t_final = 50.0;
            c.snapshot_stride = 50;
            c
        }
        "harmonic_steering" => {
            let mut c = SimulationConfig::uniform(
                Grid1D::new(1024, 100.0)?,
                params(1.0, 0.0, 0.5, 1.0)?,
                ControlSchedule::constant(1.0),
                gaussian(2.0, 0.75),
            );
            c.potentials[1] = PotentialSpec::harmonic(1.0, 0.0).in_frame(PotentialFrame::Comoving);
            c.solver_tier = SolverTier::Analytic;
            c.dt = 0.05;
            c.t_final = 25.0;
            c.snapshot_stride = 2;
            c
        }
        "free_expansion" => {
            let mut c = SimulationConfig::uniform(
                Grid1D::new(1024, 100.0)?,
                params(1.0, 0.0, 1.0, 1.0)?,
                ControlSchedule::constant(1.0),
                gaussian(-20.0, 1.0),
            );
            c.solver_tier = SolverTier::Analytic;
            c.dt = 0.01;
            c.t_final = 10.0;
            c.snapshot_stride = 100;
            c
        }
        "transparency_scan" => {
            let mut c = SimulationConfig::uniform(
                Grid1D::new(1024, 128.0)?,
                params(1.0, 1.0, 2.0, f64::INFINITY)?,
                ControlSchedule::constant(2.0),
                gaussian(-35.0, 4.0),
            );
            c.condensate = CondensateProfile::Slab { left: -5.0, right: 5.0, edge: 1.0 };
            c.solver_tier = SolverTier::Full;
            c.detector = Some(9.0);
            c.dt = 0.02;
            c.t_final = 45.0;
            c.snapshot_stride = 250;
            c
        }
        other => {
            return Err(Error::invalid(format!("unknown preset '{other}' (available: {})", PRESETS.join(", "))));
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
