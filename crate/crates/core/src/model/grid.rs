use crate::error::{Error, Result};

/// Uniform periodic 1D grid with `x_j = -length/2 + j * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n_points: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if n_points < 2 || !n_points.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid size must be a power of two >= 2, got {n_points}"
            )));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { n_points, length })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn x0(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0() + j as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Always true; kept so callers can assert the boundary model.
    pub fn periodic(&self) -> bool {
        true
    }

    /// Maps `x` into the fundamental cell `[-L/2, L/2)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let l = self.length;
        let y = (x - self.x0()).rem_euclid(l);
        y + self.x0()
    }

    /// Angular wavenumbers in FFT order. The Nyquist entry carries `-pi/dx`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = 2.0 * std::f64::consts::PI / self.length;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j - n) as f64 * dk })
            .collect()
    }

    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }
}

/// Free-function form of [`Grid1D::new`].
pub fn build_grid(n_points: usize, length: f64) -> Result<Grid1D> {
    Grid1D::new(n_points, length)
}
