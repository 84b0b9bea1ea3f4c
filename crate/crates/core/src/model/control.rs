use crate::error::{Error, Result};
use crate::quadrature;

/// Relative tolerance of the adaptive quadrature behind
/// [`ControlSchedule::integral_weight`].
pub const WEIGHT_REL_TOL: f64 = 1e-10;

/// Control Rabi amplitude `G(t) >= 0` as a function of time.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSchedule {
    Constant { g0: f64 },
    /// `G_i + (G_f - G_i) (1 + tanh((t - t_c) / w)) / 2`
    TanhRamp { g_initial: f64, g_final: f64, t_center: f64, t_width: f64 },
    /// Linear between knots, held constant outside them.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `G0` switched off around `t_off` and back on around `t_on`, each edge a
    /// tanh of width `t_width`.
    StopAndRelease { g0: f64, t_off: f64, t_on: f64, t_width: f64 },
}

/// Logistic `1 / (1 + e^{-z})` = `(1 + tanh(z/2)) / 2`, accurate in both tails.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logistic_prime(z: f64) -> f64 {
    let s = logistic(z);
    s * logistic(-z)
}

impl ControlSchedule {
    pub fn constant(g0: f64) -> Self {
        ControlSchedule::Constant { g0 }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!("control {name} must be finite and >= 0, got {v}")))
            }
        };
        match self {
            ControlSchedule::Constant { g0 } => nonneg("G0", *g0),
            ControlSchedule::TanhRamp { g_initial, g_final, t_center, t_width } => {
                nonneg("G_initial", *g_initial)?;
                nonneg("G_final", *g_final)?;
                if !(*t_width > 0.0) || !t_center.is_finite() {
                    return Err(Error::validation("tanh ramp needs t_width > 0 and finite t_center"));
                }
                Ok(())
            }
            ControlSchedule::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::validation("piecewise-linear control needs at least one knot"));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::validation("piecewise-linear knots must have increasing times"));
                    }
                }
                for &(t, g) in knots {
                    if !t.is_finite() {
                        return Err(Error::validation("knot time must be finite"));
                    }
                    nonneg("knot value", g)?;
                }
                Ok(())
            }
            ControlSchedule::StopAndRelease { g0, t_off, t_on, t_width } => {
                nonneg("G0", *g0)?;
                if !(*t_width > 0.0) || !(t_on > t_off) {
                    return Err(Error::validation("stop-and-release needs t_width > 0 and t_on > t_off"));
                }
                Ok(())
            }
        }
    }

    /// `G(t)`. Errors for `t < 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("control evaluated at negative time {t}")));
        }
        Ok(self.at(t))
    }

    /// `G(t)` without the domain check (any finite `t`).
    pub fn at(&self, t: f64) -> f64 {
        match self {
            ControlSchedule::Constant { g0 } => *g0,
            ControlSchedule::TanhRamp { g_initial, g_final, t_center, t_width } => {
                g_initial + (g_final - g_initial) * logistic(2.0 * (t - t_center) / t_width)
            }
            ControlSchedule::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|k| k.0 <= t) - 1;
                let (t0, g0) = knots[i];
                let (t1, g1) = knots[i + 1];
                g0 + (g1 - g0) * (t - t0) / (t1 - t0)
            }
            ControlSchedule::StopAndRelease { g0, t_off, t_on, t_width } => {
                g0 * (logistic(-2.0 * (t - t_off) / t_width) + logistic(2.0 * (t - t_on) / t_width))
            }
        }
    }

    /// Exact `dG/dt` (right derivative at piecewise-linear knots).
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ControlSchedule::Constant { .. } => 0.0,
            ControlSchedule::TanhRamp { g_initial, g_final, t_center, t_width } => {
                (g_final - g_initial) * logistic_prime(2.0 * (t - t_center) / t_width) * 2.0 / t_width
            }
            ControlSchedule::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t < first.0 || t >= last.0 {
                    return 0.0;
                }
                let i = knots.partition_point(|k| k.0 <= t) - 1;
                (knots[i + 1].1 - knots[i].1) / (knots[i + 1].0 - knots[i].0)
            }
            ControlSchedule::StopAndRelease { g0, t_off, t_on, t_width } => {
                let s = 2.0 / t_width;
                g0 * s * (-logistic_prime(-s * (t - t_off)) + logistic_prime(s * (t - t_on)))
            }
        }
    }

    /// Times where the schedule changes character; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            ControlSchedule::Constant { .. } => vec![],
            ControlSchedule::TanhRamp { t_center, .. } => vec![*t_center],
            ControlSchedule::PiecewiseLinear { knots } => knots.iter().map(|k| k.0).collect(),
            ControlSchedule::StopAndRelease { t_off, t_on, .. } => vec![*t_off, *t_on],
        }
    }

    /// Largest `G` over `[0, t_end]` (sampled, plus breakpoints).
    pub fn max_on(&self, t_end: f64) -> f64 {
        let n = 2000;
        let mut m = (0..=n).map(|i| self.at(t_end * i as f64 / n as f64)).fold(0.0, f64::max);
        for b in self.breakpoints() {
            if (0.0..=t_end).contains(&b) {
                m = m.max(self.at(b));
            }
        }
        m
    }

    /// Transparency weight `G^2 / (g^2 |alpha|^2 + G^2)` at time `t`; this is
    /// `v_g / c`. Defined as 1 when both `G` and `g|alpha|` vanish.
    pub fn weight_at(&self, t: f64, coupling_sqr: f64) -> f64 {
        let g2 = self.at(t).powi(2);
        if g2 == 0.0 && coupling_sqr == 0.0 {
            1.0
        } else {
            g2 / (coupling_sqr + g2)
        }
    }

    /// `int_a^b G^2 / (g^2|alpha|^2 + G^2) dt`.
    pub fn integral_weight_between(&self, a: f64, b: f64, g: f64, alpha_mag: f64) -> f64 {
        let k = (g * alpha_mag).powi(2);
        if a == b {
            return 0.0;
        }
        if let ControlSchedule::Constant { .. } = self {
            return (b - a) * self.weight_at(0.0, k);
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let mut cuts = vec![lo];
        cuts.extend(self.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
        cuts.push(hi);
        let f = |t: f64| self.weight_at(t, k);
        sign * cuts.windows(2).map(|w| quadrature::integrate(f, w[0], w[1], WEIGHT_REL_TOL)).sum::<f64>()
    }

    /// `W(t) = int_0^t G^2 / (g^2|alpha|^2 + G^2) dxi`, exact for constant
    /// schedules and adaptive quadrature otherwise.
    pub fn integral_weight(&self, t: f64, g: f64, alpha_mag: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("integral_weight at negative time {t}")));
        }
        Ok(self.integral_weight_between(0.0, t, g, alpha_mag))
    }
}

/// Free-function form of [`ControlSchedule::evaluate`].
pub fn evaluate_control(schedule: &ControlSchedule, t: f64) -> Result<f64> {
    schedule.evaluate(t)
}

/// Free-function form of [`ControlSchedule::integral_weight`].
pub fn integral_weight(schedule: &ControlSchedule, t: f64, g: f64, alpha_mag: f64) -> Result<f64> {
    schedule.integral_weight(t, g, alpha_mag)
}
