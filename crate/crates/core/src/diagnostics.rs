//! Pulse observables, field comparison, fits and the PDE residual check.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ComplexField1D, PulseSpec, SimulationConfig, SolverTier};
use crate::propagation::{general_envelope_terms, run_full_tier};
use crate::spectral::Spectral;

/// Moments of `|E|^2`. Center, width and phase are `None` for an empty
/// field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseDiagnostics {
    pub time: f64,
    pub energy: f64,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub peak_phase: Option<f64>,
}

pub fn measure(envelope: &ComplexField1D, time: f64) -> PulseDiagnostics {
    let grid = envelope.grid();
    let dx = grid.spacing();
    let dens: Vec<f64> = envelope.values().iter().map(|v| v.norm_sqr()).collect();
    let m0: f64 = dens.iter().sum::<f64>() * dx;
    if !(m0 > 0.0) {
        return PulseDiagnostics { time, energy: 0.0, center: None, width: None, peak_phase: None };
    }
    let m1: f64 = dens.iter().enumerate().map(|(j, d)| grid.x(j) * d).sum::<f64>() * dx / m0;
    let m2: f64 = dens.iter().enumerate().map(|(j, d)| (grid.x(j) - m1).powi(2) * d).sum::<f64>() * dx / m0;
    PulseDiagnostics {
        time,
        energy: m0,
        center: Some(m1),
        width: Some(m2.max(0.0).sqrt()),
        peak_phase: Some(peak_phase(envelope, &dens)),
    }
}

/// Argument of the field at the parabolic-refined maximum of `|E|^2`.
fn peak_phase(envelope: &ComplexField1D, dens: &[f64]) -> f64 {
    let n = dens.len();
    let j = (0..n).max_by(|&a, &b| dens[a].total_cmp(&dens[b])).unwrap();
    let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
    let (a, b, c) = (dens[jm], dens[j], dens[jp]);
    let denom = a - 2.0 * b + c;
    let off = if denom.abs() > 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let v = envelope.values();
    let p0 = v[j].arg();
    let pm = p0 + wrap_pi(v[jm].arg() - p0);
    let pp = p0 + wrap_pi(v[jp].arg() - p0);
    // quadratic through (-1, pm), (0, p0), (1, pp)
    p0 + 0.5 * (pp - pm) * off + 0.5 * (pp - 2.0 * p0 + pm) * off * off
}

fn wrap_pi(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    x - two_pi * (x / two_pi).round()
}

/// Nearest-branch continuation of `peak_phase` across a time series.
pub fn unwrap_phases(series: &mut [PulseDiagnostics]) {
    let mut prev: Option<f64> = None;
    for d in series.iter_mut() {
        if let (Some(p), Some(q)) = (d.peak_phase, prev) {
            let unwrapped = q + wrap_pi(p - q);
            d.peak_phase = Some(unwrapped);
        }
        if d.peak_phase.is_some() {
            prev = d.peak_phase;
        }
    }
}

pub fn measure_series<'a>(fields: impl IntoIterator<Item = (f64, &'a ComplexField1D)>) -> Vec<PulseDiagnostics> {
    let mut out: Vec<_> = fields.into_iter().map(|(t, e)| measure(e, t)).collect();
    unwrap_phases(&mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    AbsoluteL2,
    /// `||a - b|| / max(||a||, ||b||)`.
    RelativeL2,
    /// Relative L2 distance between `|a|` and `|b|`.
    ModulusOnly,
}

impl std::str::FromStr for CompareMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute_L2" | "absolute" => Ok(CompareMode::AbsoluteL2),
            "relative_L2" | "relative" => Ok(CompareMode::RelativeL2),
            "modulus_only" | "modulus" => Ok(CompareMode::ModulusOnly),
            other => Err(Error::invalid(format!("unknown comparison mode '{other}'"))),
        }
    }
}

pub fn compare_fields(a: &ComplexField1D, b: &ComplexField1D, mode: CompareMode) -> Result<f64> {
    a.same_grid(b)?;
    let dx = a.grid().spacing();
    let diff: f64 = match mode {
        CompareMode::ModulusOnly => a.values().iter().zip(b.values()).map(|(x, y)| (x.norm() - y.norm()).powi(2)).sum(),
        _ => a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum(),
    };
    let diff = (diff * dx).sqrt();
    if mode == CompareMode::AbsoluteL2 {
        return Ok(diff);
    }
    let scale = a.norm().max(b.norm());
    Ok(if scale > 0.0 { diff / scale } else { 0.0 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::invalid("linear fit needs at least two paired points"));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("degenerate abscissae"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LinearFit { slope, intercept, residual })
}

fn check_series(series: &[PulseDiagnostics], min: usize) -> Result<()> {
    if series.len() < min {
        return Err(Error::invalid(format!("need at least {min} snapshots, got {}", series.len())));
    }
    if series.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(Error::invalid("snapshot times must increase strictly"));
    }
    if series.iter().any(|d| d.center.is_none()) {
        return Err(Error::invalid("series contains empty snapshots"));
    }
    Ok(())
}

/// Least-squares slope of center against time.
pub fn fit_velocity(series: &[PulseDiagnostics]) -> Result<LinearFit> {
    check_series(series, 5)?;
    let t: Vec<f64> = series.iter().map(|d| d.time).collect();
    let x: Vec<f64> = series.iter().map(|d| d.center.unwrap()).collect();
    linear_fit(&t, &x)
}

/// Effective mass from free spreading `width^2 = w0^2 + (hbar t / (2 m w0))^2`.
/// `length_scale` converts the measured widths to the length unit of the
/// mass (1 for lab-frame widths, `c` for widths measured in `u`). Rejects
/// the fit if its rms residual exceeds 1% of the mean `width^2`.
pub fn fit_expansion_mass(series: &[PulseDiagnostics], hbar: f64, length_scale: f64) -> Result<f64> {
    check_series(series, 3)?;
    let t2: Vec<f64> = series.iter().map(|d| d.time * d.time).collect();
    let w2: Vec<f64> = series.iter().map(|d| (d.width.unwrap() * length_scale).powi(2)).collect();
    let fit = linear_fit(&t2, &w2)?;
    let mean = w2.iter().sum::<f64>() / w2.len() as f64;
    if fit.residual > 0.01 * mean {
        return Err(Error::invalid(format!(
            "width^2 is not quadratic in t (rms residual {:.3e} vs mean {:.3e}); not a free Gaussian",
            fit.residual, mean
        )));
    }
    if !(fit.slope > 0.0) || !(fit.intercept > 0.0) {
        return Err(Error::invalid("no measurable spreading"));
    }
    Ok(hbar / (2.0 * fit.intercept.sqrt() * fit.slope.sqrt()))
}

/// Angular frequency of `y(t) ~ a cos(W t) + b sin(W t) + c`, by scanning
/// `W` over `[w_min, w_max]` and refining the best least-squares fit.
pub fn fit_oscillation_frequency(times: &[f64], values: &[f64], w_min: f64, w_max: f64) -> Result<f64> {
    if times.len() < 5 || times.len() != values.len() || !(w_max > w_min) || !(w_min > 0.0) {
        return Err(Error::invalid("oscillation fit needs >= 5 samples and 0 < w_min < w_max"));
    }
    let cost = |w: f64| sinusoid_residual(times, values, w);
    let n = 2000;
    let (mut best, mut best_cost) = (w_min, f64::INFINITY);
    for i in 0..=n {
        let w = w_min + (w_max - w_min) * i as f64 / n as f64;
        let c = cost(w);
        if c < best_cost {
            best = w;
            best_cost = c;
        }
    }
    let step = (w_max - w_min) / n as f64;
    let (mut a, mut b) = ((best - step).max(w_min), (best + step).min(w_max));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let m1 = b - phi * (b - a);
        let m2 = a + phi * (b - a);
        if cost(m1) < cost(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    Ok(0.5 * (a + b))
}

fn sinusoid_residual(t: &[f64], y: &[f64], w: f64) -> f64 {
    // normal equations for [cos, sin, 1]
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let basis = [(w * ti).cos(), (w * ti).sin(), 1.0];
        for i in 0..3 {
            r[i] += basis[i] * yi;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let Some(coef) = solve3(m, r) else { return f64::INFINITY };
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| (yi - coef[0] * (w * ti).cos() - coef[1] * (w * ti).sin() - coef[2]).powi(2))
        .sum()
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = (r[i] - (i + 1..3).map(|k| m[i][k] * x[k]).sum::<f64>()) / m[i][i];
    }
    Some(x)
}

/// Full-tier transmission of the probe at each detuning `delta` from the
/// reference carrier, with the control held on resonance. The detuned probe
/// enters as the input pulse times `exp(i delta x / c)`. The base config must
/// set a detector plane. Rows follow the input order.
pub fn transparency_scan(base: &SimulationConfig, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if deltas.is_empty() {
        return Err(Error::invalid("transparency scan needs at least one detuning"));
    }
    if base.detector.is_none() {
        return Err(Error::validation("transparency scan needs run.detector"));
    }
    let pulse = base.initial_pulse.sample(&base.grid);
    let c = base.params.c();
    deltas
        .par_iter()
        .map(|&d| {
            let mut cfg = base.clone();
            cfg.solver_tier = SolverTier::Full;
            let detuned = pulse.map(|x, v| v * Complex64::from_polar(1.0, d * x / c));
            cfg.initial_pulse = PulseSpec::Tabulated(detuned.into_values());
            let out = run_full_tier(&cfg)?;
            Ok((d, out.transmitted_fraction.unwrap_or(0.0)))
        })
        .collect()
}

/// Full width at half maximum of the transmission peak, with crossings
/// linearly interpolated. `None` if the peak is not bracketed on both sides.
pub fn transparency_fwhm(table: &[(f64, f64)]) -> Option<f64> {
    let mut rows = table.to_vec();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (ip, &(_, peak)) = rows.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let half = 0.5 * peak;
    let cross = |a: (f64, f64), b: (f64, f64)| a.0 + (half - a.1) * (b.0 - a.0) / (b.1 - a.1);
    let left = (1..=ip).rev().find(|&i| rows[i - 1].1 <= half).map(|i| cross(rows[i - 1], rows[i]))?;
    let right = (ip..rows.len() - 1).find(|&i| rows[i + 1].1 <= half).map(|i| cross(rows[i], rows[i + 1]))?;
    Some(right - left)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPoint {
    pub time: f64,
    pub residual: ComplexField1D,
    /// `||residual|| / ||d_t E||`, falling back to `||E||` scaling.
    pub relative: f64,
}

/// Residual `coef * d_t E - rest` of the envelope equation for a uniform
/// condensate `alpha e^{i mu t}`, on equally spaced snapshots. `d_t E` is the
/// fourth-order five-point centered difference, so the first and last two
/// snapshots get no residual.
pub fn reduced_pde_residual(config: &SimulationConfig, times: &[f64], fields: &[ComplexField1D]) -> Result<Vec<ResidualPoint>> {
    if times.len() != fields.len() || times.len() < 5 {
        return Err(Error::invalid("residual needs at least 5 co-registered snapshots"));
    }
    let h = times[1] - times[0];
    if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::invalid("residual needs evenly spaced snapshot times"));
    }
    for f in fields {
        f.same_grid(&fields[0])?;
    }
    let p = &config.params;
    let grid = *fields[0].grid();
    let spectral = Spectral::new(grid);
    let (g, a, c) = (p.g(), p.alpha_mag(), p.c());
    let mut out = Vec::new();
    for i in 2..fields.len() - 2 {
        let t = times[i];
        let e_t: Vec<Complex64> = (0..grid.n_points())
            .map(|j| {
                let v = |k: usize| fields[k].values()[j];
                (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h)
            })
            .collect();
        let alpha_t0 = Complex64::from_polar(a, p.mu() * t);
        let alpha = vec![alpha_t0; grid.n_points()];
        let alpha_t = vec![Complex64::new(0.0, p.mu()) * alpha_t0; grid.n_points()];
        let shift = c * config.control.integral_weight(t, g, a)?;
        let v1 = config.v1().sample(&grid, p.mass(), shift);
        let gc = config.control.at(t);
        if !(gc > 0.0) {
            return Err(Error::StoppedLight { g: gc, threshold: 0.0, time: t });
        }
        let (coef, rest) = general_envelope_terms(&spectral, fields[i].values(), &alpha, &alpha_t, gc, config.control.derivative(t), p, &v1);
        let res: Vec<Complex64> = (0..grid.n_points()).map(|j| coef[j] * e_t[j] - rest[j]).collect();
        let residual = ComplexField1D::new(grid, res)?;
        let scale = ComplexField1D::new(grid, e_t.iter().zip(&coef).map(|(e, k)| e * k).collect())?.norm();
        let scale = if scale > 0.0 { scale } else { fields[i].norm() };
        let relative = if scale > 0.0 { residual.norm() / scale } else { 0.0 };
        out.push(ResidualPoint { time: t, residual, relative });
    }
    Ok(out)
}
