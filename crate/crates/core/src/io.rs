//! Run artifacts on disk: binary snapshots, CSV tables and the manifest.
//!
//! A snapshot file is a 64-byte ASCII header followed by `n` little-endian
//! `(re, im)` pairs of `f64`:
//!
//! ```text
//! EITBEC1\n
//! n=<points> t=<time> tag=<field>      (space padded to 55 bytes, then \n)
//! ```
//!
//! The manifest is the resolved config text preceded by `#`-comment metadata,
//! so it parses back as a config on its own.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::analytic::ComovingFrame;
use crate::diagnostics::{measure_series, PulseDiagnostics};
use crate::error::{Error, Result};
use crate::model::{ComplexField1D, CondensateProfile, ControlSchedule, Grid1D, SimulationConfig, SolverTier};
use crate::propagation::RunOutput;

pub const MAGIC: &[u8; 8] = b"EITBEC1\n";
pub const HEADER_LEN: usize = 64;
pub const MANIFEST: &str = "manifest.txt";
pub const INDEX: &str = "index.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const PHASE_REPORT: &str = "phase_report.csv";
pub const STORED_PHASE: &str = "stored_phase.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub time: f64,
    pub tag: String,
    pub values: Vec<Complex64>,
}

pub fn encode_snapshot(values: &[Complex64], time: f64, tag: &str) -> Result<Vec<u8>> {
    if tag.is_empty() || tag.contains(char::is_whitespace) {
        return Err(Error::invalid(format!("snapshot tag '{tag}' must be a non-empty word")));
    }
    let line = format!("n={} t={time:e} tag={tag}", values.len());
    let room = HEADER_LEN - MAGIC.len() - 1;
    if line.len() > room {
        return Err(Error::invalid(format!("snapshot header too long: '{line}'")));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * values.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(format!("{line:<room$}\n").as_bytes());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SnapshotFile> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Format("not an EITBEC1 snapshot".into()));
    }
    let header = std::str::from_utf8(&bytes[8..HEADER_LEN]).map_err(|_| Error::Format("header is not ASCII".into()))?;
    let (mut n, mut time, mut tag) = (None, None, None);
    for item in header.split_whitespace() {
        match item.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("t", v)) => time = v.parse::<f64>().ok(),
            Some(("tag", v)) => tag = Some(v.to_string()),
            _ => return Err(Error::Format(format!("unexpected header item '{item}'"))),
        }
    }
    let (Some(n), Some(time), Some(tag)) = (n, time, tag) else {
        return Err(Error::Format("header must carry n, t and tag".into()));
    };
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * n {
        return Err(Error::Format(format!("expected {} payload bytes, found {}", 16 * n, body.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().unwrap());
    let values = body.chunks_exact(16).map(|c| Complex64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok(SnapshotFile { time, tag, values })
}

pub fn write_snapshot(path: &Path, values: &[Complex64], time: f64, tag: &str) -> Result<()> {
    fs::write(path, encode_snapshot(values, time, tag)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotFile> {
    decode_snapshot(&fs::read(path)?)
}

/// Metadata block of a manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: SimulationConfig,
    pub version: String,
    pub tier: SolverTier,
    pub steps: usize,
    pub wall_clock_seconds: f64,
    pub transmitted_fraction: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# eit-bec run manifest");
        let _ = writeln!(s, "# version {}", self.version);
        let _ = writeln!(s, "# tier {}", self.tier.name());
        let _ = writeln!(s, "# steps {}", self.steps);
        let _ = writeln!(s, "# wall_clock_seconds {:.6}", self.wall_clock_seconds);
        if let Some(f) = self.transmitted_fraction {
            let _ = writeln!(s, "# transmitted_fraction {f:?}");
        }
        for f in &self.files {
            let _ = writeln!(s, "# file {}", f.display());
        }
        s.push('\n');
        s.push_str(&self.config.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let config = SimulationConfig::from_text(text)?;
        let mut m = RunManifest {
            tier: config.solver_tier,
            config,
            version: String::new(),
            steps: 0,
            wall_clock_seconds: 0.0,
            transmitted_fraction: None,
            files: Vec::new(),
        };
        let bad = |l: &str| Error::Format(format!("bad manifest line '{l}'"));
        for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
            let Some((key, value)) = line.split_once(' ') else { continue };
            match key {
                "version" => m.version = value.to_string(),
                "tier" => m.tier = value.parse()?,
                "steps" => m.steps = value.parse().map_err(|_| bad(line))?,
                "wall_clock_seconds" => m.wall_clock_seconds = value.parse().map_err(|_| bad(line))?,
                "transmitted_fraction" => m.transmitted_fraction = Some(value.parse().map_err(|_| bad(line))?),
                "file" => m.files.push(PathBuf::from(value)),
                _ => {}
            }
        }
        Ok(m)
    }
}

fn snapshot_name(index: usize, tag: &str) -> PathBuf {
    Path::new("snapshots").join(format!("{index:05}_{tag}.bin"))
}

/// Writes every artifact of `output` under `dir` and returns the manifest.
pub fn write_run(dir: &Path, config: &SimulationConfig, output: &RunOutput, wall_clock_seconds: f64) -> Result<RunManifest> {
    fs::create_dir_all(dir.join("snapshots"))?;
    let mut index = String::from("index,time,tag,file\n");
    let mut files = Vec::new();
    for (i, snap) in output.snapshots.iter().enumerate() {
        let mut fields: Vec<(&str, &ComplexField1D)> = vec![("envelope", &snap.envelope)];
        if let Some(a) = &snap.atoms {
            fields.extend([("psi0", &a.psi0_1), ("psi1", &a.psi1_1), ("psi2", &a.psi2_0)]);
        }
        for (tag, field) in fields {
            let rel = snapshot_name(i, tag);
            write_snapshot(&dir.join(&rel), field.values(), snap.time, tag)?;
            let _ = writeln!(index, "{i},{:?},{tag},{}", snap.time, rel.display());
            files.push(rel);
        }
    }
    fs::write(dir.join(INDEX), index)?;
    files.push(PathBuf::from(INDEX));

    let diags = measure_series(output.snapshots.iter().map(|s| (s.time, &s.envelope)));
    fs::write(dir.join(DIAGNOSTICS), diagnostics_csv(&diags, &config.control))?;
    files.push(PathBuf::from(DIAGNOSTICS));

    if config.condensate == CondensateProfile::Uniform {
        fs::write(dir.join(PHASE_REPORT), phase_report(config, &diags)?)?;
        files.push(PathBuf::from(PHASE_REPORT));
        if let ControlSchedule::StopAndRelease { .. } = config.control {
            fs::write(dir.join(STORED_PHASE), stored_phase_report(config, &diags)?)?;
            files.push(PathBuf::from(STORED_PHASE));
        }
    }

    let manifest = RunManifest {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        tier: output.tier,
        steps: output.steps,
        wall_clock_seconds,
        transmitted_fraction: output.transmitted_fraction,
        files,
    };
    let mut f = fs::File::create(dir.join(MANIFEST))?;
    f.write_all(manifest.to_text().as_bytes())?;
    Ok(manifest)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:?}"))
}

pub fn diagnostics_csv(series: &[PulseDiagnostics], control: &ControlSchedule) -> String {
    let mut s = String::from("t,center,width,energy,peak_phase,G\n");
    for d in series {
        let _ = writeln!(
            s,
            "{:?},{},{},{:?},{},{:?}",
            d.time,
            opt(d.center),
            opt(d.width),
            d.energy,
            opt(d.peak_phase),
            control.at(d.time)
        );
    }
    s
}

/// Measured peak phase against the closed-form global phase.
fn phase_report(config: &SimulationConfig, series: &[PulseDiagnostics]) -> Result<String> {
    let frame = ComovingFrame::from_config(config);
    let mut s = String::from("t,G,W,measured_peak_phase,global_phase\n");
    for d in series {
        let _ = writeln!(
            s,
            "{:?},{:?},{:?},{},{:?}",
            d.time,
            config.control.at(d.time),
            frame.weight_integral(d.time)?,
            opt(d.peak_phase),
            frame.phase(d.time)?
        );
    }
    Ok(s)
}

/// Phase accumulated while the pulse is stored, between the switch-off and
/// switch-on midpoints.
fn stored_phase_report(config: &SimulationConfig, series: &[PulseDiagnostics]) -> Result<String> {
    let ControlSchedule::StopAndRelease { t_off, t_on, .. } = config.control else {
        return Err(Error::invalid("stored-phase report needs a stop-and-release schedule"));
    };
    let frame = ComovingFrame::from_config(config);
    let nearest = |t: f64| series.iter().min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()));
    let (a, b) = (nearest(t_off), nearest(t_on));
    let mut s = String::new();
    let _ = writeln!(s, "t_off = {t_off:?}\nt_on = {t_on:?}");
    let _ = writeln!(s, "bare_storage_phase = {:?}", -frame.phase_rate * (t_on - t_off));
    let _ = writeln!(s, "closed_form_phase_change = {:?}", frame.phase(t_on)? - frame.phase(t_off)?);
    if let (Some(a), Some(b)) = (a, b) {
        if let (Some(pa), Some(pb)) = (a.peak_phase, b.peak_phase) {
            let _ = writeln!(s, "measured_phase_change = {:?}\nmeasured_between = {:?}, {:?}", pb - pa, a.time, b.time);
        }
    }
    Ok(s)
}

/// Envelope snapshots of a run directory, in index order.
#[derive(Debug, Clone)]
pub struct RunData {
    pub manifest: RunManifest,
    pub envelopes: Vec<(f64, ComplexField1D)>,
}

pub fn read_run(dir: &Path) -> Result<RunData> {
    let manifest = RunManifest::from_text(&fs::read_to_string(dir.join(MANIFEST))?)?;
    let grid: Grid1D = manifest.config.grid;
    let index = fs::read_to_string(dir.join(INDEX))?;
    let mut envelopes = Vec::new();
    for (lineno, line) in index.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Format(format!("{INDEX} line {}: expected 4 columns", lineno + 1)));
        }
        if cols[2] != "envelope" {
            continue;
        }
        let snap = read_snapshot(&dir.join(cols[3]))?;
        envelopes.push((snap.time, ComplexField1D::new(grid, snap.values)?));
    }
    Ok(RunData { manifest, envelopes })
}
