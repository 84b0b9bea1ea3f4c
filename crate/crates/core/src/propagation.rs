//! Probe envelope propagation: the Maxwell equation with the atomic dipole
//! source (full tier) and the adiabatically eliminated envelope equation for
//! a uniform condensate (reduced tier).
//!
//! Reduced equation, with `K = g^2|alpha|^2`, `w = G^2/(G^2+K)`, `f = 1 - w`
//! and `kappa = hbar/2M`:
//!
//! ```text
//! d_t E = -w c d_x E + f (G'/G) E - i f (mu + u12|alpha|^2 + V1/hbar) E
//!         + i f kappa (d_x - i k_t)^2 E
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gpe::{dark_state_psi1, AtomSolver, CondensateState};
use crate::model::{ComplexField1D, ControlSchedule, PhysicalParams, PotentialSpec, SimulationConfig, SolverTier};
use crate::spectral::Spectral;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `G` below this multiple of `g|alpha|` (with `G' != 0`) is treated as
/// stopped light by the reduced tier.
pub const STOPPED_LIGHT_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub envelope: ComplexField1D,
    pub time: f64,
}

/// One stored time slice of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub envelope: ComplexField1D,
    /// Condensate fields; full tier only.
    pub atoms: Option<CondensateState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub tier: SolverTier,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    /// Energy that crossed the detector plane divided by the input energy.
    pub transmitted_fraction: Option<f64>,
}

/// Maxwell source `-i g e^{-i kF x} conj(psi2) psi0`.
pub fn dipole_source(psi2_0: &ComplexField1D, psi0_1: &ComplexField1D, k_f: f64, g: f64) -> Result<ComplexField1D> {
    psi2_0.same_grid(psi0_1)?;
    let grid = *psi2_0.grid();
    let vals = psi2_0
        .values()
        .iter()
        .zip(psi0_1.values())
        .enumerate()
        .map(|(j, (p2, p0))| -I * g * Complex64::from_polar(1.0, -k_f * grid.x(j)) * p2.conj() * p0)
        .collect();
    ComplexField1D::new(grid, vals)
}

/// `(e^z - 1) / z` for purely imaginary `z = i y`.
fn phi1_imag(y: f64) -> Complex64 {
    if y.abs() < 1e-4 {
        Complex64::new(1.0 - y * y / 6.0, y / 2.0 - y * y * y / 24.0)
    } else {
        let s = (0.5 * y).sin();
        Complex64::new(-2.0 * s * s, y.sin()) / Complex64::new(0.0, y)
    }
}

/// Exact integrator for `(d_t + c d_x) E = S` with `S` frozen over the step:
/// `E^ <- e^{-ikc dt} E^ + dt phi1(-ikc dt) S^`.
#[derive(Debug, Clone)]
pub struct Advection {
    spectral: Spectral,
    cache: Option<(f64, f64, Vec<Complex64>, Vec<Complex64>)>,
}

impl Advection {
    pub fn new(spectral: Spectral) -> Self {
        Self { spectral, cache: None }
    }

    pub fn step(&mut self, envelope: &mut [Complex64], source: &[Complex64], dt: f64, c: f64) {
        let stale = !matches!(&self.cache, Some((h, v, _, _)) if *h == dt && *v == c);
        if stale {
            let shift = self.spectral.table(|k| Complex64::from_polar(1.0, -k * c * dt));
            let accum = self.spectral.table(|k| dt * phi1_imag(-k * c * dt));
            self.cache = Some((dt, c, shift, accum));
        }
        let (_, _, shift, accum) = self.cache.as_ref().unwrap();
        let mut s = source.to_vec();
        self.spectral.forward(envelope);
        self.spectral.forward(&mut s);
        for ((e, s), (a, b)) in envelope.iter_mut().zip(&s).zip(shift.iter().zip(accum)) {
            *e = a * *e + b * s;
        }
        self.spectral.inverse(envelope);
    }
}

pub fn advect_step(field: &FieldState, source: &ComplexField1D, dt: f64, c: f64) -> Result<FieldState> {
    field.envelope.same_grid(source)?;
    let mut adv = Advection::new(Spectral::new(*field.envelope.grid()));
    let mut env = field.envelope.clone();
    adv.step(env.values_mut(), source.values(), dt, c);
    let time = field.time + dt;
    env.check_finite("envelope", time)?;
    Ok(FieldState { envelope: env, time })
}

/// RK4 integrator for the reduced envelope equation.
#[derive(Debug, Clone)]
pub struct ReducedSolver {
    spectral: Spectral,
    params: PhysicalParams,
    schedule: ControlSchedule,
    v1: PotentialSpec,
    v1_lab: Option<Vec<f64>>,
}

impl ReducedSolver {
    pub fn new(spectral: Spectral, params: PhysicalParams, schedule: ControlSchedule, v1: PotentialSpec) -> Self {
        let grid = *spectral.grid();
        let v1_lab = (v1.frame == crate::model::PotentialFrame::Lab || v1.is_uniform())
            .then(|| v1.sample(&grid, params.mass(), 0.0));
        Self { spectral, params, schedule, v1, v1_lab }
    }

    /// Co-moving offset `c W(t)`.
    pub fn frame_shift(&self, t: f64) -> f64 {
        self.params.c() * self.schedule.integral_weight_between(0.0, t, self.params.g(), self.params.alpha_mag())
    }

    fn rhs(&self, e: &[Complex64], t: f64, shift: f64) -> Result<Vec<Complex64>> {
        let p = &self.params;
        let k = p.coupling_sqr();
        let g = self.schedule.at(t);
        let gdot = self.schedule.derivative(t);
        let threshold = STOPPED_LIGHT_RATIO * k.sqrt();
        if g < threshold && gdot != 0.0 {
            return Err(Error::StoppedLight { g, threshold, time: t });
        }
        let w = self.schedule.weight_at(t, k);
        let f = 1.0 - w;
        let drive = if g > 0.0 { f * gdot / g } else { 0.0 };
        let kappa = p.kinetic_coeff();
        let (c, kt) = (p.c(), p.k_t());
        let mut out = e.to_vec();
        self.spectral.apply_multiplier(&mut out, |kk| {
            Complex64::new(0.0, -w * c * kk - f * kappa * (kk - kt) * (kk - kt))
        });
        let phase = p.mu() + p.u12() * p.alpha_mag().powi(2);
        let v1 = match &self.v1_lab {
            Some(v) => v.clone(),
            None => self.v1.sample(self.spectral.grid(), p.mass(), shift),
        };
        let hbar = p.hbar();
        for ((o, ej), vj) in out.iter_mut().zip(e).zip(&v1) {
            *o += (drive - I * f * (phase + vj / hbar)) * ej;
        }
        Ok(out)
    }

    /// Classical RK4 step. `shifts` are `c W` at `t`, `t + dt/2`, `t + dt`.
    pub fn step(&self, e: &mut [Complex64], t: f64, dt: f64, shifts: [f64; 3]) -> Result<()> {
        let axpy = |a: &[Complex64], h: f64, b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x + h * y).collect::<Vec<_>>();
        let k1 = self.rhs(e, t, shifts[0])?;
        let k2 = self.rhs(&axpy(e, 0.5 * dt, &k1), t + 0.5 * dt, shifts[1])?;
        let k3 = self.rhs(&axpy(e, 0.5 * dt, &k2), t + 0.5 * dt, shifts[1])?;
        let k4 = self.rhs(&axpy(e, dt, &k3), t + dt, shifts[2])?;
        for j in 0..e.len() {
            e[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        Ok(())
    }
}

/// One reduced-tier step for a uniform condensate `alpha e^{i mu t}`.
#[allow(clippy::too_many_arguments)]
pub fn step_reduced(
    field: &FieldState,
    dt: f64,
    params: &PhysicalParams,
    schedule: &ControlSchedule,
    v1: &PotentialSpec,
    alpha_mag: f64,
    mu: f64,
) -> Result<FieldState> {
    let params = params.to_builder().alpha_mag(alpha_mag).mu(mu).build()?;
    let solver = ReducedSolver::new(Spectral::new(*field.envelope.grid()), params, schedule.clone(), v1.clone());
    let t = field.time;
    let shifts = [solver.frame_shift(t), solver.frame_shift(t + 0.5 * dt), solver.frame_shift(t + dt)];
    let mut env = field.envelope.clone();
    solver.step(env.values_mut(), t, dt, shifts)?;
    env.check_finite("envelope", t + dt)?;
    Ok(FieldState { envelope: env, time: t + dt })
}

fn snapshot_due(n: usize, stride: usize, total: usize) -> bool {
    n % stride == 0 || n == total
}

pub fn run_reduced_tier(config: &SimulationConfig) -> Result<RunOutput> {
    config.validate()?;
    let grid = config.grid;
    let solver = ReducedSolver::new(Spectral::new(grid), config.params.clone(), config.control.clone(), config.v1().clone());
    let (g, a) = (config.params.g(), config.params.alpha_mag());
    let c = config.params.c();
    let steps = config.n_steps();
    let dt = config.dt;
    let mut env = config.initial_envelope();
    let mut snapshots = vec![Snapshot { time: 0.0, envelope: env.clone(), atoms: None }];
    let mut w_acc = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let w_mid = w_acc + config.control.integral_weight_between(t, t + 0.5 * dt, g, a);
        let w_end = w_mid + config.control.integral_weight_between(t + 0.5 * dt, t + dt, g, a);
        solver.step(env.values_mut(), t, dt, [c * w_acc, c * w_mid, c * w_end])?;
        w_acc = w_end;
        let t1 = (n + 1) as f64 * dt;
        env.check_finite("envelope", t1)?;
        if snapshot_due(n + 1, config.snapshot_stride, steps) {
            snapshots.push(Snapshot { time: t1, envelope: env.clone(), atoms: None });
        }
    }
    Ok(RunOutput { tier: SolverTier::Reduced, snapshots, steps, transmitted_fraction: None })
}

/// Terms of the general (nonuniform `alpha`) envelope equation written as
/// `coef * d_t E = rest`, with
///
/// ```text
/// (d_t + c d_x) E = -(g^2 conj(alpha)/G) [ d_t(E alpha/G) - (i kappa/G)(d_x - i k_t)^2 (E alpha)
///                    + (i/G)(V1/hbar + u12|alpha|^2) E alpha ]
/// ```
///
/// `alpha_t` is the time derivative of the condensate field. Returns
/// `(coef, rest)`.
#[allow(clippy::too_many_arguments)]
pub fn general_envelope_terms(
    spectral: &Spectral,
    envelope: &[Complex64],
    alpha: &[Complex64],
    alpha_t: &[Complex64],
    g_control: f64,
    g_dot: f64,
    params: &PhysicalParams,
    v1: &[f64],
) -> (Vec<f64>, Vec<Complex64>) {
    let (g, c, kt, kappa, hbar) = (params.g(), params.c(), params.k_t(), params.kinetic_coeff(), params.hbar());
    let gc = g_control;
    let mut e_x = envelope.to_vec();
    spectral.apply_multiplier(&mut e_x, |k| Complex64::new(0.0, k));
    let mut kin: Vec<Complex64> = envelope.iter().zip(alpha).map(|(e, a)| e * a).collect();
    spectral.apply_multiplier(&mut kin, |k| Complex64::new(-(k - kt) * (k - kt), 0.0));
    let mut coef = Vec::with_capacity(envelope.len());
    let mut rest = Vec::with_capacity(envelope.len());
    for j in 0..envelope.len() {
        let (e, a, at) = (envelope[j], alpha[j], alpha_t[j]);
        let pre = -g * g * a.conj() / gc;
        let inner = e * at / gc - g_dot * e * a / (gc * gc) - I * kappa / gc * kin[j]
            + I / gc * (v1[j] / hbar + params.u12() * a.norm_sqr()) * e * a;
        coef.push(1.0 + g * g * a.norm_sqr() / (gc * gc));
        rest.push(-c * e_x[j] + pre * inner);
    }
    (coef, rest)
}

/// Right-hand side of the zeroth-order GPE.
fn gpe_rhs(spectral: &Spectral, psi2: &[Complex64], v2: &[f64], params: &PhysicalParams) -> Vec<Complex64> {
    let kappa = params.kinetic_coeff();
    let mut lap = psi2.to_vec();
    spectral.apply_multiplier(&mut lap, |k| Complex64::new(-k * k, 0.0));
    psi2.iter()
        .zip(&lap)
        .zip(v2)
        .map(|((p, l), v)| I * kappa * l - I * (v / params.hbar() + 2.0 * params.u2() * p.norm_sqr()) * p)
        .collect()
}

/// Adiabatic (dark-state) initial condition for the first-order fields:
/// `psi1` from the dark-state relation and `psi0` from the `psi1` equation,
/// using the general envelope equation for `d_t E` at `t = 0`.
pub fn adiabatic_initial_state(config: &SimulationConfig, envelope: &ComplexField1D) -> Result<CondensateState> {
    let p = &config.params;
    let grid = config.grid;
    let psi2 = config.alpha_field();
    let g0 = config.control.at(0.0);
    if g0 <= 0.0 {
        return Ok(CondensateState::unexcited(psi2, 0.0));
    }
    let spectral = Spectral::new(grid);
    let mass = p.mass();
    let v1 = config.potentials[1].sample(&grid, mass, 0.0);
    let v2 = config.potentials[2].sample(&grid, mass, 0.0);
    let psi2_t = gpe_rhs(&spectral, psi2.values(), &v2, p);
    let gdot = config.control.derivative(0.0);
    let (coef, rest) = general_envelope_terms(&spectral, envelope.values(), psi2.values(), &psi2_t, g0, gdot, p, &v1);
    let e_t: Vec<Complex64> = rest.iter().zip(&coef).map(|(r, c)| r / c).collect();
    let psi1 = dark_state_psi1(envelope, &psi2, g0, p.k_f(), p.k_g(), p.g())?;

    let kt = p.k_t();
    let g = p.g();
    let psi1_t: Vec<Complex64> = (0..grid.n_points())
        .map(|j| {
            let e = envelope.values()[j];
            let ph = Complex64::from_polar(1.0, -kt * grid.x(j));
            -g * ph * ((e_t[j] / g0 - gdot * e / (g0 * g0)) * psi2.values()[j] + e / g0 * psi2_t[j])
        })
        .collect();
    let kappa = p.kinetic_coeff();
    let mut lap = psi1.values().to_vec();
    spectral.apply_multiplier(&mut lap, |k| Complex64::new(-k * k, 0.0));
    let psi0: Vec<Complex64> = (0..grid.n_points())
        .map(|j| {
            let eg = Complex64::from_polar(1.0, p.k_g() * grid.x(j));
            let l1 = psi1_t[j] - I * kappa * lap[j]
                + I * (v1[j] / p.hbar() + p.u12() * psi2.values()[j].norm_sqr()) * psi1.values()[j];
            I * eg / g0 * l1
        })
        .collect();
    CondensateState::new(psi2, ComplexField1D::new(grid, psi0)?, psi1, 0.0)
}

/// Couples the condensate solver and the Maxwell equation by Strang
/// splitting: half field step with the dipole source at `t`, full atom step
/// with the envelope frozen at mid-step, half field step with the source at
/// `t + dt`.
pub fn run_full_tier(config: &SimulationConfig) -> Result<RunOutput> {
    config.validate()?;
    let p = &config.params;
    let grid = config.grid;
    let spectral = Spectral::new(grid);
    let mut atoms = AtomSolver::new(spectral.clone(), p.clone(), config.potentials.clone());
    let mut adv = Advection::new(spectral.clone());
    let mut env = config.initial_envelope();
    let mut state = adiabatic_initial_state(config, &env)?;
    let (g, a, c, kf) = (p.g(), p.alpha_mag(), p.c(), p.k_f());
    let steps = config.n_steps();
    let dt = config.dt;

    let input_energy = env.norm_sqr();
    let detector = config.detector.map(|x| (x, 0.0f64));
    let mut detector = detector;
    let probe = |e: &ComplexField1D, x: f64| -> f64 {
        let mut coeffs = e.values().to_vec();
        spectral.forward(&mut coeffs);
        spectral.interpolate(&coeffs, x).norm_sqr()
    };
    let mut last_flux = detector.map(|(x, _)| c * probe(&env, x));

    let mut snapshots = vec![Snapshot { time: 0.0, envelope: env.clone(), atoms: Some(state.clone()) }];
    let mut w_acc = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let src = dipole_source(&state.psi2_0, &state.psi0_1, kf, g)?;
        adv.step(env.values_mut(), src.values(), 0.5 * dt, c);
        let w_mid = w_acc + config.control.integral_weight_between(t, t + 0.5 * dt, g, a);
        atoms.step_first_order(&mut state, &env, dt, &config.control, c * w_mid)?;
        w_acc = w_mid + config.control.integral_weight_between(t + 0.5 * dt, t + dt, g, a);
        let src = dipole_source(&state.psi2_0, &state.psi0_1, kf, g)?;
        adv.step(env.values_mut(), src.values(), 0.5 * dt, c);
        let t1 = (n + 1) as f64 * dt;
        state.time = t1;
        env.check_finite("envelope", t1)?;
        if let (Some((x, acc)), Some(prev)) = (detector.as_mut(), last_flux.as_mut()) {
            let flux = c * probe(&env, *x);
            *acc += 0.5 * dt * (*prev + flux);
            *prev = flux;
        }
        if snapshot_due(n + 1, config.snapshot_stride, steps) {
            snapshots.push(Snapshot { time: t1, envelope: env.clone(), atoms: Some(state.clone()) });
        }
    }
    let transmitted_fraction = detector.map(|(_, acc)| if input_energy > 0.0 { acc / input_energy } else { 0.0 });
    Ok(RunOutput { tier: SolverTier::Full, snapshots, steps, transmitted_fraction })
}
