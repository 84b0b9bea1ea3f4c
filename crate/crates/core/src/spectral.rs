//! FFT plumbing shared by every solver: forward/inverse transforms on a
//! [`Grid1D`], Fourier multipliers, spectral derivatives and translation.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::{ComplexField1D, Grid1D};

#[derive(Clone)]
pub struct Spectral {
    grid: Grid1D,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid1D) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.n_points();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k: grid.wavenumbers(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the `1/N` normalisation.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Applies the Fourier multiplier `symbol(k)` in place.
    pub fn apply_multiplier(&self, data: &mut [Complex64], symbol: impl Fn(f64) -> Complex64) {
        self.forward(data);
        for (v, &k) in data.iter_mut().zip(&self.k) {
            *v *= symbol(k);
        }
        self.inverse(data);
    }

    /// Applies a precomputed multiplier (FFT order).
    pub fn apply_table(&self, data: &mut [Complex64], table: &[Complex64]) {
        self.forward(data);
        for (v, m) in data.iter_mut().zip(table) {
            *v *= m;
        }
        self.inverse(data);
    }

    pub fn table(&self, symbol: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.k.iter().map(|&k| symbol(k)).collect()
    }

    /// First derivative. The Nyquist mode is zeroed so real data stays real.
    pub fn derivative(&self, data: &[Complex64]) -> Vec<Complex64> {
        let n = data.len();
        let mut out = data.to_vec();
        self.forward(&mut out);
        for (j, (v, &k)) in out.iter_mut().zip(&self.k).enumerate() {
            *v *= if j == n / 2 { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, k) };
        }
        self.inverse(&mut out);
        out
    }

    pub fn second_derivative(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut out = data.to_vec();
        self.apply_multiplier(&mut out, |k| Complex64::new(-k * k, 0.0));
        out
    }

    /// Band-limited translation: returns `f(x - shift)`.
    pub fn translate(&self, field: &ComplexField1D, shift: f64) -> ComplexField1D {
        let mut out = field.clone();
        if shift != 0.0 {
            self.apply_multiplier(out.values_mut(), |k| Complex64::from_polar(1.0, -k * shift));
        }
        out
    }

    /// Trigonometric interpolation of periodic samples at an arbitrary point.
    pub fn interpolate(&self, coeffs: &[Complex64], x: f64) -> Complex64 {
        // coeffs are forward-transformed samples; phases refer to x0
        let n = coeffs.len() as f64;
        let dx = x - self.grid.x0();
        coeffs
            .iter()
            .zip(&self.k)
            .map(|(c, &k)| c * Complex64::from_polar(1.0, k * dx))
            .sum::<Complex64>()
            / n
    }
}
