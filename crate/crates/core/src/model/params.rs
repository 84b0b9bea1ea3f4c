use crate::error::{Error, Result};

/// Physical constants of the three-level condensate and the probe field, in
/// nondimensional units (hbar = M = 1 by default).
///
/// Levels: 0 is the excited state, 1 and 2 the ground states. Inter-level
/// collision constants are stored once per unordered pair, so `u_ij = u_ji`
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    hbar: f64,
    g: f64,
    gamma: f64,
    delta: f64,
    c: f64,
    k_g: f64,
    k_f: f64,
    u_self: [f64; 3],
    u_pair: [f64; 3], // (0,1), (0,2), (1,2)
    mu: f64,
    alpha_mag: f64,
}

impl PhysicalParams {
    pub fn builder() -> ParamsBuilder {
        ParamsBuilder::default()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// One-photon detuning `Delta = omega_L - omega_2`.
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn k_g(&self) -> f64 {
        self.k_g
    }
    pub fn k_f(&self) -> f64 {
        self.k_f
    }
    /// Momentum handed to the atoms on the 2 -> 1 transfer, `k_G - k_F`.
    pub fn k_t(&self) -> f64 {
        self.k_g - self.k_f
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn alpha_mag(&self) -> f64 {
        self.alpha_mag
    }

    /// Same-level collision constant `u_j`.
    pub fn u(&self, level: usize) -> f64 {
        self.u_self[level]
    }

    /// Inter-level collision constant `u_ij` (symmetric).
    pub fn u_pair(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.u_pair[0],
            (0, 2) => self.u_pair[1],
            (1, 2) => self.u_pair[2],
            _ => panic!("no collision constant for pair ({i}, {j})"),
        }
    }

    pub fn u2(&self) -> f64 {
        self.u_self[2]
    }
    pub fn u12(&self) -> f64 {
        self.u_pair[2]
    }
    pub fn u02(&self) -> f64 {
        self.u_pair[1]
    }

    /// Kinetic coefficient `hbar / 2M`; zero for the infinite-mass proxy.
    pub fn kinetic_coeff(&self) -> f64 {
        if self.mass.is_infinite() {
            0.0
        } else {
            self.hbar / (2.0 * self.mass)
        }
    }

    /// `g^2 |alpha|^2`, the collective coupling that sets the slow-down.
    pub fn coupling_sqr(&self) -> f64 {
        (self.g * self.alpha_mag).powi(2)
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }

    pub fn to_builder(&self) -> ParamsBuilder {
        let mut b = ParamsBuilder {
            mass: self.mass,
            hbar: self.hbar,
            g: self.g,
            gamma: self.gamma,
            delta: self.delta,
            c: self.c,
            k_g: self.k_g,
            k_f: self.k_f,
            u_self: self.u_self,
            mu: self.mu,
            alpha_mag: self.alpha_mag,
            pairs: Vec::new(),
        };
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            b = b.u_pair(i, j, self.u_pair(i, j));
        }
        b
    }
}

#[derive(Debug, Clone)]
pub struct ParamsBuilder {
    mass: f64,
    hbar: f64,
    g: f64,
    gamma: f64,
    delta: f64,
    c: f64,
    k_g: f64,
    k_f: f64,
    u_self: [f64; 3],
    mu: f64,
    alpha_mag: f64,
    pairs: Vec<(usize, usize, f64)>,
}

impl Default for ParamsBuilder {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            g: 1.0,
            gamma: 0.0,
            delta: 0.0,
            c: 1.0,
            k_g: 0.0,
            k_f: 0.0,
            u_self: [0.0; 3],
            mu: 0.0,
            alpha_mag: 1.0,
            pairs: Vec::new(),
        }
    }
}

impl ParamsBuilder {
    pub fn mass(mut self, v: f64) -> Self {
        self.mass = v;
        self
    }
    pub fn hbar(mut self, v: f64) -> Self {
        self.hbar = v;
        self
    }
    pub fn g(mut self, v: f64) -> Self {
        self.g = v;
        self
    }
    pub fn gamma(mut self, v: f64) -> Self {
        self.gamma = v;
        self
    }
    pub fn delta(mut self, v: f64) -> Self {
        self.delta = v;
        self
    }
    pub fn c(mut self, v: f64) -> Self {
        self.c = v;
        self
    }
    pub fn k_g(mut self, v: f64) -> Self {
        self.k_g = v;
        self
    }
    pub fn k_f(mut self, v: f64) -> Self {
        self.k_f = v;
        self
    }
    pub fn mu(mut self, v: f64) -> Self {
        self.mu = v;
        self
    }
    pub fn alpha_mag(mut self, v: f64) -> Self {
        self.alpha_mag = v;
        self
    }
    pub fn u(mut self, level: usize, v: f64) -> Self {
        self.u_self[level] = v;
        self
    }
    /// Records `u_ij`. Setting both `u_ij` and `u_ji` to different values is
    /// rejected by [`ParamsBuilder::build`].
    pub fn u_pair(mut self, i: usize, j: usize, v: f64) -> Self {
        self.pairs.push((i, j, v));
        self
    }

    pub fn build(self) -> Result<PhysicalParams> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} must be positive, got {v}")))
            }
        };
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        positive("c", self.c)?;
        if !self.c.is_finite() || !self.hbar.is_finite() {
            return Err(Error::validation("c and hbar must be finite"));
        }
        for (name, v) in [("g", self.g), ("gamma", self.gamma), ("alpha", self.alpha_mag)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("Delta", self.delta), ("kG", self.k_g), ("kF", self.k_f), ("mu", self.mu)] {
            if !v.is_finite() {
                return Err(Error::validation(format!("{name} must be finite")));
            }
        }
        let mut pair = [None::<f64>; 3];
        for &(i, j, v) in &self.pairs {
            if i == j || i > 2 || j > 2 {
                return Err(Error::validation(format!("invalid collision pair u{i}{j}")));
            }
            let slot = match (i.min(j), i.max(j)) {
                (0, 1) => 0,
                (0, 2) => 1,
                _ => 2,
            };
            match pair[slot] {
                Some(prev) if prev != v => {
                    return Err(Error::validation(format!(
                        "collision constants must be symmetric: u{i}{j} = {v} conflicts with u{j}{i} = {prev}"
                    )))
                }
                _ => pair[slot] = Some(v),
            }
        }
        Ok(PhysicalParams {
            mass: self.mass,
            hbar: self.hbar,
            g: self.g,
            gamma: self.gamma,
            delta: self.delta,
            c: self.c,
            k_g: self.k_g,
            k_f: self.k_f,
            u_self: self.u_self,
            u_pair: pair.map(|p| p.unwrap_or(0.0)),
            mu: self.mu,
            alpha_mag: self.alpha_mag,
        })
    }
}

/// Rate `mu` for which `alpha * exp(i mu t)` solves the zeroth-order GPE with
/// uniform `V2` and uniform `|alpha|`.
pub fn chemical_phase_rate(v2_const: f64, u2: f64, alpha_mag: f64, hbar: f64) -> f64 {
    -(v2_const / hbar + 2.0 * u2 * alpha_mag * alpha_mag)
}
