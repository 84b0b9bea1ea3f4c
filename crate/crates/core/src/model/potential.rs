use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Coordinate a potential is written in.
///
/// `Lab` potentials are functions of the laboratory position `x`. `Comoving`
/// potentials are functions of `s = x - c * W(t)`, the position measured in
/// the frame that travels with the probe pulse (`s = -c u` in terms of the
/// co-moving time coordinate `u`). The closed-form solution needs the level-1
/// potential to be static in this frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PotentialFrame {
    #[default]
    Lab,
    Comoving,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    Constant(f64),
    /// `M omega^2 (x - center)^2 / 2`
    Harmonic { omega: f64, center: f64 },
    /// `0` for `|x| < half_width`, `depth` outside.
    SquareWell { depth: f64, half_width: f64 },
    /// Samples on the simulation grid; periodic linear interpolation off-grid.
    Tabulated(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub frame: PotentialFrame,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::zero()
    }
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self { kind: PotentialKind::Zero, frame: PotentialFrame::Lab }
    }

    pub fn constant(v: f64) -> Self {
        Self { kind: PotentialKind::Constant(v), frame: PotentialFrame::Lab }
    }

    pub fn harmonic(omega: f64, center: f64) -> Self {
        Self { kind: PotentialKind::Harmonic { omega, center }, frame: PotentialFrame::Lab }
    }

    pub fn in_frame(mut self, frame: PotentialFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn validate(&self, grid: &Grid1D, mass: f64) -> Result<()> {
        match &self.kind {
            PotentialKind::Tabulated(s) if s.len() != grid.n_points() => Err(Error::validation(format!(
                "tabulated potential has {} samples, grid has {}",
                s.len(),
                grid.n_points()
            ))),
            PotentialKind::Tabulated(s) if s.iter().any(|v| !v.is_finite()) => {
                Err(Error::validation("tabulated potential contains non-finite samples"))
            }
            PotentialKind::Harmonic { .. } if mass.is_infinite() => {
                Err(Error::validation("harmonic potential needs a finite mass"))
            }
            PotentialKind::SquareWell { half_width, .. } if !(*half_width > 0.0) => {
                Err(Error::validation("square well half_width must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Spatially uniform value, if the potential has one.
    pub fn uniform_value(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Zero => Some(0.0),
            PotentialKind::Constant(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform_value().is_some()
    }

    /// Value at coordinate `y` (lab `x` or co-moving `s`, depending on frame).
    pub fn eval(&self, grid: &Grid1D, mass: f64, y: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(v) => *v,
            PotentialKind::Harmonic { omega, center } => {
                0.5 * mass * omega * omega * (y - center).powi(2)
            }
            PotentialKind::SquareWell { depth, half_width } => {
                if y.abs() < *half_width {
                    0.0
                } else {
                    *depth
                }
            }
            PotentialKind::Tabulated(samples) => {
                let dx = grid.spacing();
                let n = samples.len();
                let r = (grid.wrap(y) - grid.x0()) / dx;
                let j = (r.floor() as usize).min(n - 1);
                let frac = r - j as f64;
                samples[j] * (1.0 - frac) + samples[(j + 1) % n] * frac
            }
        }
    }

    /// Samples on the grid at frame offset `shift` (the potential is read at
    /// `wrap(x_j - shift)` for co-moving potentials, at `x_j` otherwise).
    pub fn sample(&self, grid: &Grid1D, mass: f64, shift: f64) -> Vec<f64> {
        let offset = match self.frame {
            PotentialFrame::Lab => 0.0,
            PotentialFrame::Comoving => shift,
        };
        (0..grid.n_points())
            .map(|j| {
                let x = grid.x(j);
                let y = if offset == 0.0 { x } else { grid.wrap(x - offset) };
                self.eval(grid, mass, y)
            })
            .collect()
    }

    pub fn max_abs(&self, grid: &Grid1D, mass: f64) -> f64 {
        self.sample(grid, mass, 0.0).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
