//! Closed-form solution for a uniform condensate.
//!
//! In the co-moving coordinate `s = x - c W(t)` (equivalently
//! `u = -x/c + W(t) = -s/c`) the envelope is
//!
//! ```text
//! E(x, t) = A(t) e^{i phi(t)} [exp(-i theta(t) H0 / hbar) F0](x - c W(t))
//! A = G / sqrt(G^2 + g^2|alpha|^2)
//! phi = (mu + u12|alpha|^2)(W - t)
//! theta = int_0^t g^2|alpha|^2 / (G^2 + g^2|alpha|^2) = t - W
//! H0 = (hbar^2/2M)(-i d_s - k_t)^2 + V1(s)
//! ```
//!
//! `F0` is the pulse profile. Because `H0` is time independent the ordered
//! exponential collapses onto the effective time `theta`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    amplitude_factor, AnalyticOptions, ComplexField1D, ControlSchedule, PhysicalParams, PotentialFrame, PotentialSpec,
    SimulationConfig, SolverTier,
};
use crate::propagation::{RunOutput, Snapshot};
use crate::spectral::Spectral;

#[derive(Debug, Clone, PartialEq)]
pub struct ComovingFrame {
    pub schedule: ControlSchedule,
    pub g: f64,
    pub alpha_mag: f64,
    pub c: f64,
    /// `mu + u12 |alpha|^2`, the rate entering the global phase.
    pub phase_rate: f64,
}

impl ComovingFrame {
    pub fn from_config(config: &SimulationConfig) -> Self {
        let p = &config.params;
        Self {
            schedule: config.control.clone(),
            g: p.g(),
            alpha_mag: p.alpha_mag(),
            c: p.c(),
            phase_rate: p.mu() + p.u12() * p.alpha_mag().powi(2),
        }
    }

    fn coupling_sqr(&self) -> f64 {
        (self.g * self.alpha_mag).powi(2)
    }

    /// `W(t)`.
    pub fn weight_integral(&self, t: f64) -> Result<f64> {
        self.schedule.integral_weight(t, self.g, self.alpha_mag)
    }

    /// `theta(t) = t - W(t)`.
    pub fn effective_time(&self, t: f64) -> Result<f64> {
        Ok(t - self.weight_integral(t)?)
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        amplitude_factor(self.schedule.at(t), self.coupling_sqr())
    }

    pub fn phase(&self, t: f64) -> Result<f64> {
        Ok(self.phase_rate * (self.weight_integral(t)? - t))
    }
}

/// `u = -x/c + W(t)`.
pub fn u_of_xt(frame: &ComovingFrame, x: f64, t: f64) -> Result<f64> {
    Ok(-x / frame.c + frame.weight_integral(t)?)
}

/// `v_g = c G^2 / (g^2|alpha|^2 + G^2)`.
pub fn group_velocity(g_control: f64, g: f64, alpha_mag: f64, c: f64) -> f64 {
    let k = (g * alpha_mag).powi(2);
    if g_control == 0.0 && k == 0.0 {
        c
    } else {
        c * g_control * g_control / (k + g_control * g_control)
    }
}

/// `1 / (1 + G^2 / g^2|alpha|^2)`; 1 at `G = 0`.
pub fn coupling_factor(g_control: f64, g: f64, alpha_mag: f64) -> f64 {
    let k = (g * alpha_mag).powi(2);
    if g_control == 0.0 {
        1.0
    } else {
        k / (k + g_control * g_control)
    }
}

/// `phi(t) = (mu + u12|alpha|^2)(W(t) - t)`.
pub fn global_phase(schedule: &ControlSchedule, t: f64, mu: f64, u12: f64, alpha_mag: f64, g: f64) -> Result<f64> {
    Ok((mu + u12 * alpha_mag * alpha_mag) * (schedule.integral_weight(t, g, alpha_mag)? - t))
}

/// `H0 = (hbar^2/2M)(-i d_s - k_t)^2 + V1(s)`, the bare level-1 atom
/// Hamiltonian with momentum displaced by `k_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub k_t: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Must be static in the co-moving frame.
    pub v1: PotentialSpec,
}

impl EffectiveHamiltonian {
    pub fn from_params(params: &PhysicalParams, v1: PotentialSpec) -> Self {
        Self { k_t: params.k_t(), mass: params.mass(), hbar: params.hbar(), v1 }
    }

    /// Kinetic energy of the plane wave `e^{i k s}`, divided by hbar.
    pub fn kinetic_rate(&self, k: f64) -> f64 {
        if self.mass.is_infinite() {
            0.0
        } else {
            self.hbar / (2.0 * self.mass) * (k - self.k_t).powi(2)
        }
    }

    fn check(&self) -> Result<()> {
        if self.v1.frame == PotentialFrame::Lab && !self.v1.is_uniform() {
            return Err(Error::Unsupported(
                "a lab-frame potential is time dependent in the co-moving frame; the closed form needs a co-moving V1".into(),
            ));
        }
        Ok(())
    }
}

/// Applies `exp(-i theta H0 / hbar)` on a grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    spectral: Spectral,
    heff: EffectiveHamiltonian,
    /// `V1(s_j) / hbar`, or `None` when flat (the constant is folded into
    /// the kinetic multiplier).
    potential: Option<Vec<f64>>,
    offset: f64,
    order: u8,
}

impl Propagator {
    pub fn new(spectral: Spectral, heff: EffectiveHamiltonian, order: u8) -> Result<Self> {
        heff.check()?;
        if order != 2 && order != 4 {
            return Err(Error::invalid(format!("splitting order must be 2 or 4, got {order}")));
        }
        let grid = *spectral.grid();
        let (potential, offset) = match heff.v1.uniform_value() {
            Some(v) => (None, v / heff.hbar),
            None => {
                heff.v1.validate(&grid, heff.mass)?;
                let v = (0..grid.n_points()).map(|j| heff.v1.eval(&grid, heff.mass, grid.x(j)) / heff.hbar).collect();
                (Some(v), 0.0)
            }
        };
        Ok(Self { spectral, heff, potential, offset, order })
    }

    pub fn is_exact(&self) -> bool {
        self.potential.is_none()
    }

    fn kinetic(&self, data: &mut [Complex64], h: f64) {
        let heff = &self.heff;
        let off = self.offset;
        self.spectral.apply_multiplier(data, |k| Complex64::from_polar(1.0, -h * (heff.kinetic_rate(k) + off)));
    }

    fn strang(&self, data: &mut [Complex64], h: f64, v: &[f64]) {
        let half = |d: &mut [Complex64]| {
            for (x, vj) in d.iter_mut().zip(v) {
                *x *= Complex64::from_polar(1.0, -0.5 * h * vj);
            }
        };
        half(data);
        self.kinetic(data, h);
        half(data);
    }

    /// Propagates by effective time `theta` in `n_substeps` split steps (a
    /// single exact multiplier when the potential is flat).
    pub fn apply(&self, data: &mut [Complex64], theta: f64, n_substeps: usize) {
        if theta == 0.0 {
            return;
        }
        let Some(v) = &self.potential else {
            self.kinetic(data, theta);
            return;
        };
        let n = n_substeps.max(1);
        let h = theta / n as f64;
        for _ in 0..n {
            if self.order == 2 {
                self.strang(data, h, v);
            } else {
                let cbrt2 = 2f64.powf(1.0 / 3.0);
                let w1 = 1.0 / (2.0 - cbrt2);
                let w0 = -cbrt2 / (2.0 - cbrt2);
                self.strang(data, w1 * h, v);
                self.strang(data, w0 * h, v);
                self.strang(data, w1 * h, v);
            }
        }
    }
}

fn substeps_for(theta: f64, options: &AnalyticOptions) -> usize {
    ((theta.abs() / options.max_theta_step).ceil() as usize).max(1)
}

/// `A(t) e^{i phi(t)} exp(-i theta(t) H0 / hbar) E0`, in the co-moving
/// coordinate.
pub fn evolve_analytic(
    e0: &ComplexField1D,
    frame: &ComovingFrame,
    heff: &EffectiveHamiltonian,
    t: f64,
    n_substeps: usize,
) -> Result<ComplexField1D> {
    evolve_with_order(e0, frame, heff, t, n_substeps, 2)
}

pub fn evolve_with_order(
    e0: &ComplexField1D,
    frame: &ComovingFrame,
    heff: &EffectiveHamiltonian,
    t: f64,
    n_substeps: usize,
    order: u8,
) -> Result<ComplexField1D> {
    if n_substeps == 0 {
        return Err(Error::invalid("n_substeps must be at least 1"));
    }
    let prop = Propagator::new(Spectral::new(*e0.grid()), heff.clone(), order)?;
    let theta = frame.effective_time(t)?;
    let mut out = e0.clone();
    prop.apply(out.values_mut(), theta, n_substeps);
    out.scale(Complex64::from_polar(frame.amplitude(t), frame.phase(t)?));
    Ok(out)
}

fn require_uniform(config: &SimulationConfig) -> Result<()> {
    let mut c = config.clone();
    c.solver_tier = SolverTier::Analytic;
    c.validate()
}

/// Lab-frame envelope at time `t`.
pub fn analytic_field_snapshot(config: &SimulationConfig, t: f64) -> Result<ComplexField1D> {
    require_uniform(config)?;
    let frame = ComovingFrame::from_config(config);
    let heff = EffectiveHamiltonian::from_params(&config.params, config.v1().clone());
    let spectral = Spectral::new(config.grid);
    let prop = Propagator::new(spectral.clone(), heff, config.analytic.order)?;
    let theta = frame.effective_time(t)?;
    let mut profile = config.initial_pulse.sample(&config.grid);
    prop.apply(profile.values_mut(), theta, substeps_for(theta, &config.analytic));
    assemble(&spectral, &frame, profile, t)
}

fn assemble(spectral: &Spectral, frame: &ComovingFrame, profile: ComplexField1D, t: f64) -> Result<ComplexField1D> {
    let shift = frame.c * frame.weight_integral(t)?;
    let mut out = spectral.translate(&profile, shift);
    out.scale(Complex64::from_polar(frame.amplitude(t), frame.phase(t)?));
    out.check_finite("envelope", t)?;
    Ok(out)
}

/// Snapshot series at the configured stride. The co-moving profile is
/// propagated incrementally between snapshot times, so the series is a
/// single trajectory of the split map.
pub fn run_analytic_tier(config: &SimulationConfig) -> Result<RunOutput> {
    config.validate()?;
    let frame = ComovingFrame::from_config(config);
    let heff = EffectiveHamiltonian::from_params(&config.params, config.v1().clone());
    let spectral = Spectral::new(config.grid);
    let prop = Propagator::new(spectral.clone(), heff, config.analytic.order)?;
    let steps = config.n_steps();
    let mut times: Vec<usize> = (0..=steps).step_by(config.snapshot_stride).collect();
    if *times.last().unwrap() != steps {
        times.push(steps);
    }
    let mut profile = config.initial_pulse.sample(&config.grid);
    let mut theta_prev = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    for n in times {
        let t = n as f64 * config.dt;
        let theta = frame.effective_time(t)?;
        let d = theta - theta_prev;
        prop.apply(profile.values_mut(), d, substeps_for(d, &config.analytic));
        theta_prev = theta;
        snapshots.push(Snapshot { time: t, envelope: assemble(&spectral, &frame, profile.clone(), t)?, atoms: None });
    }
    Ok(RunOutput { tier: SolverTier::Analytic, snapshots, steps, transmitted_fraction: None })
}
