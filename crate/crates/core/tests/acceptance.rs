//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false` so the report is always printed; the process
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use eit_bec::analytic::{global_phase, group_velocity, ComovingFrame, EffectiveHamiltonian, Propagator};
use eit_bec::diagnostics::{
    compare_fields, fit_expansion_mass, fit_oscillation_frequency, fit_velocity, measure, measure_series,
    reduced_pde_residual, transparency_fwhm, transparency_scan, CompareMode,
};
use eit_bec::gpe::{dark_state_psi1, step_gpe_zeroth};
use eit_bec::propagation::{RunOutput, Snapshot};
use eit_bec::spectral::Spectral;
use eit_bec::{
    chemical_phase_rate, run, ComplexField1D, CondensateProfile, ControlSchedule, Grid1D, PhysicalParams, PotentialFrame,
    PotentialSpec, PulseSpec, SimulationConfig, SolverTier,
};
use num_complex::Complex64;
use rayon::prelude::*;

type Outcome = Result<(bool, String), eit_bec::Error>;

struct P {
    g: f64,
    alpha: f64,
    gamma: f64,
    c: f64,
    mass: f64,
    k_g: f64,
    u2: f64,
    u12: f64,
}

impl Default for P {
    fn default() -> Self {
        P { g: 1.0, alpha: 1.0, gamma: 0.0, c: 1.0, mass: 1.0, k_g: 0.0, u2: 0.0, u12: 0.0 }
    }
}

impl P {
    fn build(&self) -> PhysicalParams {
        PhysicalParams::builder()
            .g(self.g)
            .alpha_mag(self.alpha)
            .gamma(self.gamma)
            .c(self.c)
            .mass(self.mass)
            .k_g(self.k_g)
            .u(2, self.u2)
            .u_pair(1, 2, self.u12)
            .mu(chemical_phase_rate(0.0, self.u2, self.alpha, 1.0))
            .build()
            .unwrap()
    }
}

fn config(grid: Grid1D, p: &P, control: ControlSchedule, center: f64, width: f64) -> SimulationConfig {
    let pulse = PulseSpec::Gaussian { center, width, amplitude: 1.0 };
    SimulationConfig::uniform(grid, p.build(), control, pulse)
}

fn with_tier(cfg: &SimulationConfig, tier: SolverTier, dt: f64, stride: usize) -> SimulationConfig {
    let mut c = cfg.clone();
    c.solver_tier = tier;
    c.dt = dt;
    c.snapshot_stride = stride;
    c
}

fn series(out: &RunOutput) -> Vec<eit_bec::diagnostics::PulseDiagnostics> {
    measure_series(out.snapshots.iter().map(|s| (s.time, &s.envelope)))
}

fn snapshot_at(out: &RunOutput, t: f64) -> &Snapshot {
    out.snapshots.iter().min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs())).unwrap()
}

/// Center velocity follows `c G^2 / (g^2|alpha|^2 + G^2)`.
fn velocity_law() -> Outcome {
    let grid = Grid1D::new(1024, 100.0)?;
    let p = P { c: 10.0, mass: f64::INFINITY, ..P::default() };
    let k = (p.g * p.alpha).powi(2);
    let mut worst = 0.0f64;
    for ratio in [0.25, 1.0, 3.0, 9.0, 25.0] {
        let g0 = (ratio * k).sqrt();
        let mut cfg = with_tier(&config(grid, &p, ControlSchedule::constant(g0), -30.0, 2.0), SolverTier::Reduced, 0.005, 40);
        cfg.t_final = 4.0;
        let fit = fit_velocity(&series(&run(&cfg)?))?;
        let expect = group_velocity(g0, p.g, p.alpha, p.c);
        worst = worst.max((fit.slope / expect - 1.0).abs());
    }
    Ok((worst < 0.01, format!("max relative velocity error {worst:.2e} (< 1e-2)")))
}

fn harmonic_v1(omega: f64) -> PotentialSpec {
    PotentialSpec::harmonic(omega, 0.0).in_frame(PotentialFrame::Comoving)
}

/// The closed form and the reduced PDE describe the same envelope.
fn analytic_reduced() -> Outcome {
    let grid = Grid1D::new(256, 40.0)?;
    let p = P { c: 2.0, k_g: 1.0, u2: 0.2, u12: 0.3, ..P::default() };
    let mut base = config(grid, &p, ControlSchedule::constant(1.0), -2.0, 1.0);
    base.potentials[1] = harmonic_v1(0.5);
    base.t_final = 4.0;
    let red = run(&with_tier(&base, SolverTier::Reduced, 0.002, 50))?;
    let ana = run(&with_tier(&base, SolverTier::Analytic, 0.002, 50))?;
    let mut max_l2 = 0.0f64;
    for (a, b) in red.snapshots.iter().zip(&ana.snapshots) {
        max_l2 = max_l2.max(compare_fields(&a.envelope, &b.envelope, CompareMode::RelativeL2)?);
    }
    let mut dense = with_tier(&base, SolverTier::Analytic, 0.002, 1);
    dense.t_final = 0.2;
    let out = run(&dense)?;
    let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
    let fields: Vec<ComplexField1D> = out.snapshots.iter().map(|s| s.envelope.clone()).collect();
    let residual = reduced_pde_residual(&dense, &times, &fields)?.iter().map(|r| r.relative).fold(0.0, f64::max);
    Ok((
        max_l2 < 1e-3 && residual < 1e-6,
        format!("max relative L2 {max_l2:.2e} (< 1e-3), PDE residual {residual:.2e} (< 1e-6)"),
    ))
}

/// Full mean-field dynamics reduce to the envelope PDE when the excited
/// state follows adiabatically.
fn full_reduced() -> Outcome {
    let grid = Grid1D::new(1024, 160.0)?;
    let p = P { gamma: 1.0, ..P::default() };
    let ramp = ControlSchedule::TanhRamp { g_initial: 2.0, g_final: 1.5, t_center: 10.0, t_width: 4.0 };
    let mut base = config(grid, &p, ramp.clone(), -25.0, 6.0);
    base.t_final = 20.0;
    let full = run(&with_tier(&base, SolverTier::Full, 0.02, 50))?;
    let red = run(&with_tier(&base, SolverTier::Reduced, 0.005, 200))?;
    let params = base.params.clone();
    let (mut modulus, mut dark) = (0.0f64, 0.0f64);
    for s in &full.snapshots {
        let r = snapshot_at(&red, s.time);
        modulus = modulus.max(compare_fields(&s.envelope, &r.envelope, CompareMode::ModulusOnly)?);
        let atoms = s.atoms.as_ref().unwrap();
        let expect = dark_state_psi1(&s.envelope, &atoms.psi2_0, ramp.at(s.time), params.k_f(), params.k_g(), params.g())?;
        dark = dark.max(compare_fields(&atoms.psi1_1, &expect, CompareMode::RelativeL2)?);
    }
    Ok((
        modulus < 0.05 && dark < 0.05,
        format!("modulus L2 {modulus:.2e} (< 5e-2), dark-state L2 {dark:.2e} (< 5e-2)"),
    ))
}

/// Free spreading with mass `M (1 + G^2 / g^2|alpha|^2)`.
fn effective_mass() -> Outcome {
    let grid = Grid1D::new(1024, 100.0)?;
    let p = P::default();
    let k = (p.g * p.alpha).powi(2);
    let (mut worst_a, mut worst_r) = (0.0f64, 0.0f64);
    let mut detail = Vec::new();
    for (ratio, expect) in [(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)] {
        let g0 = (ratio * k).sqrt();
        let base = config(grid, &p, ControlSchedule::constant(g0), -20.0, 1.0);

        // co-moving profile from the closed form
        let frame = ComovingFrame::from_config(&base);
        let heff = EffectiveHamiltonian::from_params(&base.params, PotentialSpec::zero());
        let prop = Propagator::new(Spectral::new(grid), heff, 4)?;
        let f0 = base.initial_pulse.sample(&grid);
        let mut snaps = Vec::new();
        for i in 0..=10 {
            let t = i as f64;
            let mut prof = f0.clone();
            prop.apply(prof.values_mut(), frame.effective_time(t)?, 1);
            snaps.push(measure(&prof, t));
        }
        let m_a = fit_expansion_mass(&snaps, 1.0, 1.0)?;

        // the reduced tier cannot carry a field at G = 0; a vanishing G stands in
        let g_red = if g0 == 0.0 { 1e-3 * k.sqrt() } else { g0 };
        let mut red = with_tier(&config(grid, &p, ControlSchedule::constant(g_red), -20.0, 1.0), SolverTier::Reduced, 0.004, 250);
        red.t_final = 10.0;
        let m_r = fit_expansion_mass(&series(&run(&red)?), 1.0, 1.0)?;
        worst_a = worst_a.max((m_a / expect - 1.0).abs());
        worst_r = worst_r.max((m_r / expect - 1.0).abs());
        detail.push(format!("{m_a:.4}/{m_r:.4}"));
    }
    Ok((
        worst_a < 5e-3 && worst_r < 2e-2,
        format!(
            "m_eff/M analytic/reduced = [{}], max error {worst_a:.1e} (< 5e-3) / {worst_r:.1e} (< 2e-2)",
            detail.join(", ")
        ),
    ))
}

/// Oscillation in a co-moving harmonic trap at `omega / (1 + G^2/g^2|alpha|^2)`.
fn harmonic_steering() -> Outcome {
    let grid = Grid1D::new(1024, 100.0)?;
    let p = P { c: 0.5, ..P::default() };
    let omega = 1.0;
    let k = (p.g * p.alpha).powi(2);
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for ratio in [1.0, 3.0] {
        let g0 = (ratio * k).sqrt();
        let expect = omega / (1.0 + ratio);
        let mut cfg = config(grid, &p, ControlSchedule::constant(g0), 2.0, 0.75);
        cfg.potentials[1] = harmonic_v1(omega);
        cfg.t_final = 2.0 * 2.0 * PI / expect;
        cfg.dt = cfg.t_final / 400.0;
        let cfg = with_tier(&cfg, SolverTier::Analytic, cfg.dt, 1);
        let out = run(&cfg)?;
        let frame = ComovingFrame::from_config(&cfg);
        let mut ts = Vec::new();
        let mut xs = Vec::new();
        for s in &out.snapshots {
            let lab = measure(&s.envelope, s.time).center.unwrap();
            ts.push(s.time);
            xs.push(grid.wrap(lab - p.c * frame.weight_integral(s.time)?));
        }
        let w = fit_oscillation_frequency(&ts, &xs, 0.5 * expect, 1.5 * expect)?;
        worst = worst.max((w / expect - 1.0).abs());
        detail.push(format!("{w:.5}/{expect:.5}"));
    }
    Ok((worst < 5e-3, format!("fitted/expected = [{}], max error {worst:.1e} (< 5e-3)", detail.join(", "))))
}

/// Peak phase follows `(mu + u12|alpha|^2)(W - t)`.
fn global_phase_law() -> Outcome {
    let grid = Grid1D::new(512, 60.0)?;
    let p = P { mass: f64::INFINITY, u2: 0.1, u12: 0.5, ..P::default() };
    let params = p.build();
    let k = (p.g * p.alpha).powi(2);
    let t_end = 5.0;
    let mut final_phase = Vec::new();
    let mut predicted = Vec::new();
    for ratio in [1.0, 3.0] {
        let sched = ControlSchedule::constant((ratio * k).sqrt());
        let mut cfg = with_tier(&config(grid, &p, sched.clone(), -10.0, 2.0), SolverTier::Reduced, 0.02, 5);
        cfg.t_final = t_end;
        let s = series(&run(&cfg)?);
        final_phase.push(s.last().unwrap().peak_phase.unwrap() - s[0].peak_phase.unwrap());
        predicted.push(global_phase(&sched, t_end, params.mu(), p.u12, p.alpha, p.g)?);
    }
    let pair_err = ((final_phase[0] - final_phase[1]) - (predicted[0] - predicted[1])).abs();

    // storage: G falls many decades, so W is frozen between t_a and t_b
    let sched = ControlSchedule::StopAndRelease { g0: 2.0, t_off: 3.0, t_on: 13.0, t_width: 1.0 };
    let mut cfg = with_tier(&config(grid, &p, sched, -10.0, 2.0), SolverTier::Reduced, 0.005, 20);
    cfg.t_final = 16.0;
    let s = series(&run(&cfg)?);
    let (ta, tb) = (6.0, 10.0);
    let at = |t: f64| s.iter().min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs())).unwrap();
    let measured = at(tb).peak_phase.unwrap() - at(ta).peak_phase.unwrap();
    let stored = -(params.mu() + p.u12 * p.alpha * p.alpha) * (at(tb).time - at(ta).time);
    let store_err = (measured - stored).abs();
    Ok((
        pair_err < 1e-3 && store_err < 1e-3,
        format!("pair phase difference error {pair_err:.1e} rad, storage phase error {store_err:.1e} rad (< 1e-3)"),
    ))
}

/// Free Gaussian evolved for effective time `theta` under `(hbar^2/2M) p^2`,
/// placed at `shift` with amplitude `amp` and phase `phase`.
fn free_gaussian(grid: Grid1D, x0: f64, w: f64, kappa: f64, theta: f64, shift: f64, amp: f64, phase: f64) -> ComplexField1D {
    let a = Complex64::new(w * w, kappa * theta);
    let pre = (Complex64::new(w * w, 0.0) / a).sqrt() * Complex64::from_polar(amp, phase);
    ComplexField1D::from_fn(grid, |x| {
        let s = grid.wrap(x - shift) - x0;
        pre * (-(s * s) / (4.0 * a)).exp()
    })
}

/// Stored pulse evolves under the bare atomic Hamiltonian and is released
/// with the prefactor `G / sqrt(G^2 + g^2|alpha|^2)`.
fn stop_and_release() -> Outcome {
    let grid = Grid1D::new(1024, 160.0)?;
    let p = P { g: 3.0, gamma: 1.0, ..P::default() };
    let sched = ControlSchedule::StopAndRelease { g0: 4.5, t_off: 10.0, t_on: 35.0, t_width: 4.0 };
    let (x0, w) = (-40.0, 6.0);
    let mut base = config(grid, &p, sched, x0, w);
    base.t_final = 50.0;
    let ana = run(&with_tier(&base, SolverTier::Analytic, 0.02, 125))?;
    let full = run(&with_tier(&base, SolverTier::Full, 0.02, 125))?;
    let frame = ComovingFrame::from_config(&base);
    let kappa = base.params.kinetic_coeff();
    let norm0 = base.initial_pulse.sample(&grid).norm();

    let (mut oracle_err, mut amp_err) = (0.0f64, 0.0f64);
    for s in &ana.snapshots {
        let t = s.time;
        let oracle = free_gaussian(
            grid,
            x0,
            w,
            kappa,
            frame.effective_time(t)?,
            p.c * frame.weight_integral(t)?,
            frame.amplitude(t),
            frame.phase(t)?,
        );
        oracle_err = oracle_err.max(compare_fields(&s.envelope, &oracle, CompareMode::ModulusOnly)?);
        amp_err = amp_err.max((s.envelope.norm() / norm0 - frame.amplitude(t)).abs());
    }
    let released = compare_fields(
        &full.snapshots.last().unwrap().envelope,
        &ana.snapshots.last().unwrap().envelope,
        CompareMode::ModulusOnly,
    )?;
    Ok((
        oracle_err < 0.01 && released < 0.05 && amp_err < 1e-9,
        format!(
            "analytic vs free-evolution oracle {oracle_err:.1e} (< 1e-2), full tier {released:.2e} (< 5e-2), \
             prefactor error {amp_err:.1e}"
        ),
    ))
}

/// Detuning scan through a condensate slab: peak at zero detuning and a
/// window that widens with G.
fn transparency_window() -> Outcome {
    let grid = Grid1D::new(1024, 128.0)?;
    let p = P { gamma: 1.0, c: 2.0, mass: f64::INFINITY, ..P::default() };
    let deltas: Vec<f64> = (0..11).map(|i| 0.4 * (i as f64 - 5.0)).collect();
    let mut fwhm = Vec::new();
    let mut peaked = true;
    for g0 in [1.0, 2.0] {
        let mut cfg = with_tier(&config(grid, &p, ControlSchedule::constant(g0), -35.0, 4.0), SolverTier::Full, 0.02, 10_000);
        cfg.condensate = CondensateProfile::Slab { left: -5.0, right: 5.0, edge: 1.0 };
        cfg.detector = Some(9.0);
        cfg.t_final = 45.0;
        let table = transparency_scan(&cfg, &deltas)?;
        let best = table.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        peaked &= best.0 == 0.0;
        let far = table[0].1.max(table[10].1);
        peaked &= far < 0.5 * best.1;
        fwhm.push(transparency_fwhm(&table));
    }
    let widening = matches!((fwhm[0], fwhm[1]), (Some(a), Some(b)) if b > a);
    let show = |w: Option<f64>| w.map_or("unbracketed".to_string(), |w| format!("{w:.3}"));
    Ok((
        peaked && widening,
        format!("peak at zero detuning: {peaked}, FWHM G=1 -> G=2: {} -> {}", show(fwhm[0]), show(fwhm[1])),
    ))
}

/// Norm conservation and temporal convergence orders.
fn solver_hygiene() -> Outcome {
    // zeroth-order GPE (unitary split)
    let grid = Grid1D::new(256, 20.0)?;
    let params = PhysicalParams::builder().u(2, 0.5).build()?;
    let v2 = PotentialSpec::harmonic(1.0, 0.0);
    let psi = ComplexField1D::from_fn(grid, |x| Complex64::new((-(x - 1.0).powi(2) / 2.0).exp(), 0.0));
    let mut q = psi.clone();
    for _ in 0..10_000 {
        q = step_gpe_zeroth(&q, 0.01, &params, &v2)?;
    }
    let gpe_drift = (q.norm_sqr() / psi.norm_sqr() - 1.0).abs();

    // coupled atoms and probe with gamma = 0 conserve |E|^2 + |psi0|^2 + |psi1|^2
    let fgrid = Grid1D::new(1024, 160.0)?;
    let mut full = with_tier(&config(fgrid, &P::default(), ControlSchedule::constant(2.0), -25.0, 4.0), SolverTier::Full, 0.001, 1000);
    full.t_final = 10.0;
    let out = run(&full)?;
    let total = |s: &Snapshot| {
        let a = s.atoms.as_ref().unwrap();
        s.envelope.norm_sqr() + a.psi0_1.norm_sqr() + a.psi1_1.norm_sqr()
    };
    let n0 = total(&out.snapshots[0]);
    let full_drift = out.snapshots.iter().map(|s| (total(s) / n0 - 1.0).abs()).fold(0.0, f64::max);

    // Strang: error against a dt/32 reference
    let evolve = |dt: f64| -> eit_bec::Result<ComplexField1D> {
        let mut q = psi.clone();
        for _ in 0..(1.0 / dt).round() as usize {
            q = step_gpe_zeroth(&q, dt, &params, &v2)?;
        }
        Ok(q)
    };
    let reference = evolve(0.02 / 32.0)?;
    let e1 = compare_fields(&evolve(0.02)?, &reference, CompareMode::AbsoluteL2)?;
    let e2 = compare_fields(&evolve(0.01)?, &reference, CompareMode::AbsoluteL2)?;
    let strang = e1 / e2;

    // RK4: reduced tier against the exact closed form (flat V1)
    let rgrid = Grid1D::new(256, 40.0)?;
    let p = P { c: 2.0, k_g: 1.0, u2: 0.2, u12: 0.3, ..P::default() };
    let mut base = config(rgrid, &p, ControlSchedule::constant(1.0), -2.0, 1.0);
    base.t_final = 1.0;
    let exact = run(&with_tier(&base, SolverTier::Analytic, 0.01, 100))?.snapshots.pop().unwrap().envelope;
    let err = |dt: f64| -> eit_bec::Result<f64> {
        let out = run(&with_tier(&base, SolverTier::Reduced, dt, (1.0 / dt).round() as usize))?;
        compare_fields(&out.snapshots.last().unwrap().envelope, &exact, CompareMode::AbsoluteL2)
    };
    let rk4 = err(0.01)? / err(0.005)?;

    Ok((
        gpe_drift < 1e-9 && full_drift < 1e-9 && (3.5..=4.5).contains(&strang) && (12.0..=20.0).contains(&rk4),
        format!(
            "norm drift GPE {gpe_drift:.1e}, coupled {full_drift:.1e} (< 1e-9); Strang ratio {strang:.2} [3.5, 4.5]; \
             RK4 ratio {rk4:.2} [12, 20]"
        ),
    ))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("velocity law", velocity_law),
        ("analytic-reduced equivalence", analytic_reduced),
        ("full-reduced adiabatic agreement", full_reduced),
        ("effective mass", effective_mass),
        ("harmonic steering", harmonic_steering),
        ("global phase", global_phase_law),
        ("stop and release", stop_and_release),
        ("transparency window", transparency_window),
        ("solver hygiene", solver_hygiene),
    ];
    let results: Vec<_> = criteria
        .par_iter()
        .map(|(_, f)| {
            let start = Instant::now();
            let r = f();
            (r, start.elapsed())
        })
        .collect();
    let mut failed = 0;
    for (i, ((name, _), (r, elapsed))) in criteria.iter().zip(results).enumerate() {
        let (ok, detail) = match r {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
