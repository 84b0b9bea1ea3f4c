//! Simulation configuration and its flat `key = value` text format.
//!
//! ```text
//! # comment
//! [grid]
//! n = 1024
//! length = 100
//! [params]
//! g = 1
//! alpha = 10
//! ...
//! ```
//!
//! Keys may also be written fully qualified (`grid.n = 1024`) outside any
//! section. Every key is documented in the README.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use super::control::ControlSchedule;
use super::field::ComplexField1D;
use super::grid::Grid1D;
use super::params::{chemical_phase_rate, PhysicalParams};
use super::potential::{PotentialFrame, PotentialKind, PotentialSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTier {
    Full,
    Reduced,
    Analytic,
}

impl SolverTier {
    pub fn name(&self) -> &'static str {
        match self {
            SolverTier::Full => "full",
            SolverTier::Reduced => "reduced",
            SolverTier::Analytic => "analytic",
        }
    }
}

impl std::str::FromStr for SolverTier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SolverTier::Full),
            "reduced" => Ok(SolverTier::Reduced),
            "analytic" => Ok(SolverTier::Analytic),
            other => Err(Error::validation(format!("unknown tier '{other}' (expected full, reduced or analytic)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PulseSpec {
    /// `amplitude * exp(-(x - center)^2 / (4 width^2))`, so `|E|^2` has
    /// standard deviation `width`.
    Gaussian { center: f64, width: f64, amplitude: f64 },
    Tabulated(Vec<Complex64>),
}

impl PulseSpec {
    pub fn sample(&self, grid: &Grid1D) -> ComplexField1D {
        match self {
            PulseSpec::Gaussian { center, width, amplitude } => ComplexField1D::from_fn(*grid, |x| {
                Complex64::new(amplitude * (-(x - center).powi(2) / (4.0 * width * width)).exp(), 0.0)
            }),
            PulseSpec::Tabulated(v) => ComplexField1D::new(*grid, v.clone()).expect("validated length"),
        }
    }
}

/// Spatial profile of the level-2 condensate `alpha(x)` at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CondensateProfile {
    /// `|alpha|` everywhere (the closed-form regime).
    Uniform,
    /// `|alpha|` inside `[left, right]` with tanh edges of width `edge`,
    /// zero outside. Used for transmission through a finite medium.
    Slab { left: f64, right: f64, edge: f64 },
}

impl CondensateProfile {
    pub fn sample(&self, grid: &Grid1D, alpha_mag: f64) -> ComplexField1D {
        match self {
            CondensateProfile::Uniform => ComplexField1D::constant(*grid, Complex64::new(alpha_mag, 0.0)),
            CondensateProfile::Slab { left, right, edge } => ComplexField1D::from_fn(*grid, |x| {
                let s = 0.5 * (((x - left) / edge).tanh() - ((x - right) / edge).tanh());
                Complex64::new(alpha_mag * s, 0.0)
            }),
        }
    }
}

/// Splitting used for `exp(-i theta H0)` when the level-1 potential is not
/// flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptions {
    /// Largest effective-time increment per split step.
    pub max_theta_step: f64,
    /// 2 (Strang) or 4 (triple-jump composition of Strang steps).
    pub order: u8,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self { max_theta_step: 1e-2, order: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: Grid1D,
    pub params: PhysicalParams,
    /// Trapping potentials `V_0, V_1, V_2`.
    pub potentials: [PotentialSpec; 3],
    pub control: ControlSchedule,
    pub condensate: CondensateProfile,
    pub initial_pulse: PulseSpec,
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub solver_tier: SolverTier,
    /// Detection plane for time-integrated transmitted energy (full tier).
    pub detector: Option<f64>,
    pub analytic: AnalyticOptions,
}

/// RK4 stability radius used for the reduced tier (the imaginary-axis limit
/// is `2 sqrt 2`).
pub const RK4_STABILITY_LIMIT: f64 = 2.5;
/// `dt * rate` ceiling for the explicit couplings of the full tier.
pub const FULL_TIER_RATE_LIMIT: f64 = 0.1;
/// Ceiling on the per-step nonlinear phase of the zeroth-order GPE.
pub const GPE_NONLINEAR_LIMIT: f64 = 0.1;

impl SimulationConfig {
    /// Uniform-condensate config with Gaussian pulse; handy for tests.
    pub fn uniform(grid: Grid1D, params: PhysicalParams, control: ControlSchedule, pulse: PulseSpec) -> Self {
        Self {
            grid,
            params,
            potentials: [
                PotentialSpec::zero(),
                PotentialSpec::zero().in_frame(PotentialFrame::Comoving),
                PotentialSpec::zero(),
            ],
            control,
            condensate: CondensateProfile::Uniform,
            initial_pulse: pulse,
            dt: 0.01,
            t_final: 1.0,
            snapshot_stride: 1,
            solver_tier: SolverTier::Reduced,
            detector: None,
            analytic: AnalyticOptions::default(),
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn v1(&self) -> &PotentialSpec {
        &self.potentials[1]
    }

    /// Condensate wave function `alpha(x)` at `t = 0`.
    pub fn alpha_field(&self) -> ComplexField1D {
        self.condensate.sample(&self.grid, self.params.alpha_mag())
    }

    /// `G(t) / sqrt(G(t)^2 + g^2|alpha|^2)`, the amplitude prefactor of the
    /// co-moving solution.
    pub fn amplitude_factor(&self, t: f64) -> f64 {
        amplitude_factor(self.control.at(t), self.params.coupling_sqr())
    }

    /// Envelope at `t = 0`. For a uniform condensate the pulse profile is
    /// the co-moving initial condition `E(u, 0)`, so the lab envelope carries
    /// the amplitude prefactor at `t = 0`; slab runs start in vacuum and use
    /// the profile as is.
    pub fn initial_envelope(&self) -> ComplexField1D {
        let profile = self.initial_pulse.sample(&self.grid);
        match self.condensate {
            CondensateProfile::Uniform => profile.scaled(Complex64::new(self.amplitude_factor(0.0), 0.0)),
            CondensateProfile::Slab { .. } => profile,
        }
    }

    /// Checks every structural invariant plus the stability bound of the
    /// selected tier.
    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        let mass = self.params.mass();
        for p in &self.potentials {
            p.validate(&self.grid, mass)?;
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation(format!("run.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::validation(format!("run.t_final must be positive, got {}", self.t_final)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::validation("run.stride must be a positive integer"));
        }
        match &self.initial_pulse {
            PulseSpec::Gaussian { center, width, amplitude } => {
                let dx = self.grid.spacing();
                if !(*width >= 4.0 * dx) {
                    return Err(Error::validation(format!(
                        "pulse.width = {width} must be at least 4 grid spacings ({})",
                        4.0 * dx
                    )));
                }
                let half = 0.5 * self.grid.length();
                if center - 5.0 * width < -half || center + 5.0 * width > half {
                    return Err(Error::validation(format!(
                        "pulse must sit at least 5 widths from the boundary (center {center}, width {width}, half-length {half})"
                    )));
                }
                if !amplitude.is_finite() {
                    return Err(Error::validation("pulse.amplitude must be finite"));
                }
            }
            PulseSpec::Tabulated(v) => {
                if v.len() != self.grid.n_points() {
                    return Err(Error::validation(format!(
                        "tabulated pulse has {} samples, grid has {}",
                        v.len(),
                        self.grid.n_points()
                    )));
                }
            }
        }
        if let CondensateProfile::Slab { left, right, edge } = self.condensate {
            if !(right > left) || !(edge > 0.0) {
                return Err(Error::validation("condensate slab needs right > left and edge > 0"));
            }
        }
        if self.condensate == CondensateProfile::Uniform {
            if let Some(v2) = self.potentials[2].uniform_value() {
                let derived = chemical_phase_rate(v2, self.params.u2(), self.params.alpha_mag(), self.params.hbar());
                if (derived - self.params.mu()).abs() > 1e-9 * (1.0 + derived.abs()) {
                    return Err(Error::validation(format!(
                        "params.mu = {} is inconsistent with V2, u2 and alpha (uniform solution needs mu = {derived})",
                        self.params.mu()
                    )));
                }
            }
        }
        if self.solver_tier != SolverTier::Full {
            if self.condensate != CondensateProfile::Uniform || !self.potentials[2].is_uniform() {
                return Err(Error::validation(format!(
                    "the {} tier needs a uniform condensate (condensate.kind = uniform, uniform potential2)",
                    self.solver_tier.name()
                )));
            }
        }
        if self.solver_tier == SolverTier::Analytic
            && self.v1().frame == PotentialFrame::Lab
            && !self.v1().is_uniform()
        {
            return Err(Error::Unsupported(
                "a lab-frame potential1 is time dependent in the co-moving frame; the analytic tier needs potential1.frame = comoving".into(),
            ));
        }
        let phase_rate = (self.params.mu() + self.params.u12() * self.params.alpha_mag().powi(2)).abs();
        let per_snapshot = phase_rate * self.dt * self.snapshot_stride as f64;
        if per_snapshot >= std::f64::consts::PI {
            return Err(Error::validation(format!(
                "phase advance per snapshot {per_snapshot:.3} rad exceeds pi; lower run.stride or run.dt"
            )));
        }
        self.check_stability()
    }

    fn check_stability(&self) -> Result<()> {
        let p = &self.params;
        match self.solver_tier {
            SolverTier::Analytic => Ok(()),
            SolverTier::Reduced => {
                let limit = RK4_STABILITY_LIMIT / self.reduced_rate_bound();
                if self.dt > limit {
                    return Err(Error::Stability {
                        bound: format!("reduced tier RK4: dt * max|lambda| <= {RK4_STABILITY_LIMIT}"),
                        dt: self.dt,
                        limit,
                    });
                }
                Ok(())
            }
            SolverTier::Full => {
                let alpha_max = self.alpha_field().max_abs();
                let env_max = self.initial_envelope().max_abs();
                let rate = (0.5 * p.gamma())
                    .max(self.control.max_on(self.t_final))
                    .max(p.g() * alpha_max)
                    .max(p.g() * env_max);
                if rate > 0.0 && self.dt * rate >= FULL_TIER_RATE_LIMIT {
                    return Err(Error::Stability {
                        bound: format!("full tier: dt * max(gamma/2, G_max, g|alpha|, g|E|) < {FULL_TIER_RATE_LIMIT}"),
                        dt: self.dt,
                        limit: FULL_TIER_RATE_LIMIT / rate,
                    });
                }
                let nl = 2.0 * p.u2().abs() * alpha_max * alpha_max;
                if nl > 0.0 && self.dt * nl >= GPE_NONLINEAR_LIMIT {
                    return Err(Error::Stability {
                        bound: format!("zeroth-order GPE: |2 u2 |alpha|^2 dt| < {GPE_NONLINEAR_LIMIT}"),
                        dt: self.dt,
                        limit: GPE_NONLINEAR_LIMIT / nl,
                    });
                }
                Ok(())
            }
        }
    }

    /// Upper bound on the spectral radius of the reduced-tier right-hand side
    /// over `[0, t_final]`.
    pub fn reduced_rate_bound(&self) -> f64 {
        let p = &self.params;
        let k = p.coupling_sqr();
        let kmax = self.grid.k_max();
        let kin = p.kinetic_coeff();
        let vmax = self.v1().max_abs(&self.grid, p.mass()) / p.hbar();
        let phase = (p.mu() + p.u12() * p.alpha_mag().powi(2)).abs();
        let n = 2000;
        (0..=n)
            .map(|i| {
                let t = self.t_final * i as f64 / n as f64;
                let g = self.control.at(t);
                let w = self.control.weight_at(t, k);
                let f = 1.0 - w;
                let drive = if g > 0.0 { (f * self.control.derivative(t) / g).abs() } else { 0.0 };
                w * p.c() * kmax + f * (kin * (kmax + p.k_t().abs()).powi(2) + vmax + phase) + drive
            })
            .fold(0.0, f64::max)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let raw = RawConfig::parse(text)?;
        raw.build()
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    /// Fully resolved config text; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "[grid]\nn = {}\nlength = {:?}", self.grid.n_points(), self.grid.length());
        let _ = writeln!(s, "\n[params]");
        for (k, v) in [
            ("mass", p.mass()),
            ("hbar", p.hbar()),
            ("g", p.g()),
            ("gamma", p.gamma()),
            ("Delta", p.delta()),
            ("c", p.c()),
            ("kG", p.k_g()),
            ("kF", p.k_f()),
            ("mu", p.mu()),
            ("alpha", p.alpha_mag()),
            ("u0", p.u(0)),
            ("u1", p.u(1)),
            ("u2", p.u(2)),
            ("u01", p.u_pair(0, 1)),
            ("u02", p.u_pair(0, 2)),
            ("u12", p.u_pair(1, 2)),
        ] {
            let _ = writeln!(s, "{k} = {}", fmt_f64(v));
        }
        let _ = writeln!(s, "\n[control]");
        match &self.control {
            ControlSchedule::Constant { g0 } => {
                let _ = writeln!(s, "kind = constant\nG0 = {g0:?}");
            }
            ControlSchedule::TanhRamp { g_initial, g_final, t_center, t_width } => {
                let _ = writeln!(
                    s,
                    "kind = tanh_ramp\nG_initial = {g_initial:?}\nG_final = {g_final:?}\nt_center = {t_center:?}\nt_width = {t_width:?}"
                );
            }
            ControlSchedule::PiecewiseLinear { knots } => {
                let list: Vec<String> = knots.iter().map(|(t, g)| format!("{t:?}:{g:?}")).collect();
                let _ = writeln!(s, "kind = piecewise_linear\nknots = {}", list.join(", "));
            }
            ControlSchedule::StopAndRelease { g0, t_off, t_on, t_width } => {
                let _ = writeln!(
                    s,
                    "kind = stop_and_release\nG0 = {g0:?}\nt_off = {t_off:?}\nt_on = {t_on:?}\nt_width = {t_width:?}"
                );
            }
        }
        for (j, pot) in self.potentials.iter().enumerate() {
            let _ = writeln!(s, "\n[potential{j}]");
            let frame = match pot.frame {
                PotentialFrame::Lab => "lab",
                PotentialFrame::Comoving => "comoving",
            };
            match &pot.kind {
                PotentialKind::Zero => {
                    let _ = writeln!(s, "kind = zero");
                }
                PotentialKind::Constant(v) => {
                    let _ = writeln!(s, "kind = constant\nvalue = {v:?}");
                }
                PotentialKind::Harmonic { omega, center } => {
                    let _ = writeln!(s, "kind = harmonic\nomega = {omega:?}\ncenter = {center:?}");
                }
                PotentialKind::SquareWell { depth, half_width } => {
                    let _ = writeln!(s, "kind = square_well\ndepth = {depth:?}\nhalf_width = {half_width:?}");
                }
                PotentialKind::Tabulated(v) => {
                    let list: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                    let _ = writeln!(s, "kind = tabulated\nsamples = {}", list.join(", "));
                }
            }
            let _ = writeln!(s, "frame = {frame}");
        }
        let _ = writeln!(s, "\n[condensate]");
        match self.condensate {
            CondensateProfile::Uniform => {
                let _ = writeln!(s, "kind = uniform");
            }
            CondensateProfile::Slab { left, right, edge } => {
                let _ = writeln!(s, "kind = slab\nleft = {left:?}\nright = {right:?}\nedge = {edge:?}");
            }
        }
        let _ = writeln!(s, "\n[pulse]");
        match &self.initial_pulse {
            PulseSpec::Gaussian { center, width, amplitude } => {
                let _ = writeln!(s, "kind = gaussian\ncenter = {center:?}\nwidth = {width:?}\namplitude = {amplitude:?}");
            }
            PulseSpec::Tabulated(v) => {
                let re: Vec<String> = v.iter().map(|z| format!("{:?}", z.re)).collect();
                let im: Vec<String> = v.iter().map(|z| format!("{:?}", z.im)).collect();
                let _ = writeln!(s, "kind = tabulated\nsamples = {}\nsamples_im = {}", re.join(", "), im.join(", "));
            }
        }
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(
            s,
            "dt = {:?}\nt_final = {:?}\nstride = {}\ntier = {}\nanalytic_step = {:?}\nanalytic_order = {}",
            self.dt,
            self.t_final,
            self.snapshot_stride,
            self.solver_tier.name(),
            self.analytic.max_theta_step,
            self.analytic.order
        );
        if let Some(x) = self.detector {
            let _ = writeln!(s, "detector = {x:?}");
        }
        s
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

pub fn amplitude_factor(g: f64, coupling_sqr: f64) -> f64 {
    if g == 0.0 && coupling_sqr == 0.0 {
        1.0
    } else {
        g / (g * g + coupling_sqr).sqrt()
    }
}

const KNOWN_KEYS: &[&str] = &[
    "grid.n", "grid.length",
    "params.mass", "params.hbar", "params.g", "params.gamma", "params.Delta", "params.c", "params.kG",
    "params.kF", "params.mu", "params.alpha", "params.u0", "params.u1", "params.u2", "params.u01",
    "params.u02", "params.u12", "params.u10", "params.u20", "params.u21",
    "control.kind", "control.G0", "control.G_initial", "control.G_final", "control.t_center",
    "control.t_width", "control.knots", "control.t_off", "control.t_on",
    "condensate.kind", "condensate.left", "condensate.right", "condensate.edge",
    "pulse.kind", "pulse.center", "pulse.width", "pulse.amplitude", "pulse.samples", "pulse.samples_im",
    "run.dt", "run.t_final", "run.stride", "run.tier", "run.detector", "run.analytic_step", "run.analytic_order",
];

const POTENTIAL_KEYS: &[&str] = &["kind", "value", "omega", "center", "depth", "half_width", "samples", "frame"];

/// Parsed `key -> (value, line)` map prior to typing.
struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(Error::Validation { line: Some(line_no), message: format!("malformed section header '{line}'") });
                }
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Validation { line: Some(line_no), message: format!("expected 'key = value', got '{line}'") });
            };
            let key = k.trim();
            let full = if section.is_empty() || key.contains('.') && key.starts_with(&format!("{section}.")) {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            let known = KNOWN_KEYS.contains(&full.as_str())
                || ["potential0.", "potential1.", "potential2."].iter().any(|p| {
                    full.strip_prefix(p).is_some_and(|rest| POTENTIAL_KEYS.contains(&rest))
                });
            if !known {
                return Err(Error::Validation { line: Some(line_no), message: format!("unknown key '{full}'") });
            }
            if entries.insert(full.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(Error::Validation { line: Some(line_no), message: format!("duplicate key '{full}'") });
            }
        }
        Ok(Self { entries })
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.1)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Validation { line: self.line(key), message: format!("{key}: {}", message.into()) }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.0.as_str())
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, _)) => v.parse::<f64>().map(Some).map_err(|_| self.err(key, format!("'{v}' is not a number"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| Error::validation(format!("missing required key '{key}'")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, _)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| self.err(key, format!("'{}' is not a number", s.trim()))))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn with_line<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Validation { line: None, message } => Error::Validation { line: self.line(key), message },
            Error::InvalidArgument(message) => Error::Validation { line: self.line(key), message },
            other => other,
        })
    }

    fn build(&self) -> Result<SimulationConfig> {
        let n = self.f64_req("grid.n")?;
        if n.fract() != 0.0 || n < 0.0 {
            return Err(self.err("grid.n", "must be a positive integer"));
        }
        let grid = self.with_line("grid.n", Grid1D::new(n as usize, self.f64_req("grid.length")?))?;

        let mut b = PhysicalParams::builder()
            .mass(self.f64_or("params.mass", 1.0)?)
            .hbar(self.f64_or("params.hbar", 1.0)?)
            .g(self.f64_or("params.g", 1.0)?)
            .gamma(self.f64_or("params.gamma", 0.0)?)
            .delta(self.f64_or("params.Delta", 0.0)?)
            .c(self.f64_or("params.c", 1.0)?)
            .k_g(self.f64_or("params.kG", 0.0)?)
            .k_f(self.f64_or("params.kF", 0.0)?)
            .alpha_mag(self.f64_or("params.alpha", 1.0)?);
        for (j, key) in ["params.u0", "params.u1", "params.u2"].iter().enumerate() {
            b = b.u(j, self.f64_or(key, 0.0)?);
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)] {
            let key = format!("params.u{i}{j}");
            if let Some(v) = self.f64_opt(&key)? {
                b = b.u_pair(i, j, v);
            }
        }
        let params = self.with_line("params.u21", b.build())?;

        let control = match self.str("control.kind").unwrap_or("constant") {
            "constant" => ControlSchedule::Constant { g0: self.f64_req("control.G0")? },
            "tanh_ramp" => ControlSchedule::TanhRamp {
                g_initial: self.f64_req("control.G_initial")?,
                g_final: self.f64_req("control.G_final")?,
                t_center: self.f64_req("control.t_center")?,
                t_width: self.f64_req("control.t_width")?,
            },
            "piecewise_linear" => {
                let raw = self.str("control.knots").ok_or_else(|| Error::validation("missing required key 'control.knots'"))?;
                let knots = raw
                    .split(',')
                    .map(|pair| {
                        let (t, g) = pair.trim().split_once(':').ok_or_else(|| self.err("control.knots", "knots are 't:G' pairs"))?;
                        let t = t.trim().parse::<f64>().map_err(|_| self.err("control.knots", "bad knot time"))?;
                        let g = g.trim().parse::<f64>().map_err(|_| self.err("control.knots", "bad knot value"))?;
                        Ok((t, g))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ControlSchedule::PiecewiseLinear { knots }
            }
            "stop_and_release" => ControlSchedule::StopAndRelease {
                g0: self.f64_req("control.G0")?,
                t_off: self.f64_req("control.t_off")?,
                t_on: self.f64_req("control.t_on")?,
                t_width: self.f64_req("control.t_width")?,
            },
            other => return Err(self.err("control.kind", format!("unknown control kind '{other}'"))),
        };
        self.with_line("control.kind", control.validate())?;

        let mut potentials = [PotentialSpec::zero(), PotentialSpec::zero().in_frame(PotentialFrame::Comoving), PotentialSpec::zero()];
        for (j, pot) in potentials.iter_mut().enumerate() {
            let key = |k: &str| format!("potential{j}.{k}");
            let kind = match self.str(&key("kind")).unwrap_or("zero") {
                "zero" => PotentialKind::Zero,
                "constant" => PotentialKind::Constant(self.f64_req(&key("value"))?),
                "harmonic" => PotentialKind::Harmonic {
                    omega: self.f64_req(&key("omega"))?,
                    center: self.f64_or(&key("center"), 0.0)?,
                },
                "square_well" => PotentialKind::SquareWell {
                    depth: self.f64_req(&key("depth"))?,
                    half_width: self.f64_req(&key("half_width"))?,
                },
                "tabulated" => PotentialKind::Tabulated(
                    self.list(&key("samples"))?.ok_or_else(|| Error::validation(format!("missing '{}'", key("samples"))))?,
                ),
                other => return Err(self.err(&key("kind"), format!("unknown potential kind '{other}'"))),
            };
            let frame = match self.str(&key("frame")) {
                None => pot.frame,
                Some("lab") => PotentialFrame::Lab,
                Some("comoving") => PotentialFrame::Comoving,
                Some(other) => return Err(self.err(&key("frame"), format!("unknown frame '{other}' (lab or comoving)"))),
            };
            *pot = PotentialSpec { kind, frame };
            self.with_line(&key("kind"), pot.validate(&grid, params.mass()))?;
        }

        let condensate = match self.str("condensate.kind").unwrap_or("uniform") {
            "uniform" => CondensateProfile::Uniform,
            "slab" => CondensateProfile::Slab {
                left: self.f64_req("condensate.left")?,
                right: self.f64_req("condensate.right")?,
                edge: self.f64_or("condensate.edge", 1.0)?,
            },
            other => return Err(self.err("condensate.kind", format!("unknown condensate kind '{other}'"))),
        };

        let initial_pulse = match self.str("pulse.kind").unwrap_or("gaussian") {
            "gaussian" => PulseSpec::Gaussian {
                center: self.f64_or("pulse.center", 0.0)?,
                width: self.f64_req("pulse.width")?,
                amplitude: self.f64_or("pulse.amplitude", 1.0)?,
            },
            "tabulated" => {
                let re = self.list("pulse.samples")?.ok_or_else(|| Error::validation("missing 'pulse.samples'"))?;
                let im = self.list("pulse.samples_im")?.unwrap_or_else(|| vec![0.0; re.len()]);
                if im.len() != re.len() {
                    return Err(self.err("pulse.samples_im", "length differs from pulse.samples"));
                }
                PulseSpec::Tabulated(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
            }
            other => return Err(self.err("pulse.kind", format!("unknown pulse kind '{other}'"))),
        };

        // mu defaults to the rate that makes alpha e^{i mu t} a solution
        let derived_mu = chemical_phase_rate(
            potentials[2].uniform_value().unwrap_or_else(|| potentials[2].eval(&grid, params.mass(), 0.0)),
            params.u2(),
            params.alpha_mag(),
            params.hbar(),
        );
        let params = params.with_mu(self.f64_opt("params.mu")?.unwrap_or(derived_mu));

        let stride = self.f64_or("run.stride", 1.0)?;
        if stride.fract() != 0.0 || stride < 1.0 {
            return Err(self.err("run.stride", "must be a positive integer"));
        }
        let tier: SolverTier = match self.str("run.tier") {
            None => SolverTier::Reduced,
            Some(t) => self.with_line("run.tier", t.parse())?,
        };
        let order = self.f64_or("run.analytic_order", 4.0)?;
        if order != 2.0 && order != 4.0 {
            return Err(self.err("run.analytic_order", "must be 2 or 4"));
        }
        let analytic = AnalyticOptions {
            max_theta_step: self.f64_or("run.analytic_step", AnalyticOptions::default().max_theta_step)?,
            order: order as u8,
        };
        if !(analytic.max_theta_step > 0.0) {
            return Err(self.err("run.analytic_step", "must be positive"));
        }

        let config = SimulationConfig {
            grid,
            params,
            potentials,
            control,
            condensate,
            initial_pulse,
            dt: self.f64_req("run.dt")?,
            t_final: self.f64_req("run.t_final")?,
            snapshot_stride: stride as usize,
            solver_tier: tier,
            detector: self.f64_opt("run.detector")?,
            analytic,
        };
        config.validate().map_err(|e| match e {
            Error::Validation { line: None, message } => {
                let line = ["params.mu", "run.dt", "run.stride", "pulse.width", "run.tier"]
                    .iter()
                    .find(|k| message.contains(&k[k.find('.').unwrap() + 1..]))
                    .and_then(|k| self.line(k));
                Error::Validation { line, message }
            }
            Error::Stability { bound, dt, limit } => Error::Validation {
                line: self.line("run.dt"),
                message: format!("run.dt = {dt} violates the stability bound {bound} (max dt = {limit:e})"),
            },
            other => other,
        })?;
        Ok(config)
    }
}
