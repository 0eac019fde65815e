//! Damped harmonic oscillator with unit mass and an equilibrium offset:
//! `ẍ + c ẋ + k (x − x₀) = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::autodiff::Jet2;
use crate::error::{Error, Result};

/// Physics parameters; the mass is fixed at one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    /// viscous damping, 1/year
    pub c: f64,
    /// stiffness, 1/year²
    pub k: f64,
    /// offset, millions/day
    pub x0: f64,
}

pub const MASS: f64 = 1.0;

const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    Overdamped,
    Critical,
    Underdamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub delta: f64,
    pub omega0: f64,
    pub zeta: f64,
    /// Damped frequency; only defined when underdamped.
    pub omega: Option<f64>,
    pub period: f64,
    /// Phase that makes ẋ(0) = 0; only defined when underdamped.
    pub phase: Option<f64>,
}

impl PhysParams {
    pub const fn new(c: f64, k: f64, x0: f64) -> Self {
        Self { c, k, x0 }
    }

    pub fn delta(&self) -> f64 {
        self.c / (2.0 * MASS)
    }

    pub fn omega0(&self) -> f64 {
        (self.k / MASS).sqrt()
    }

    pub fn zeta(&self) -> f64 {
        self.delta() / self.omega0()
    }

    /// `ω = √(ω₀² − δ²)`, `None` unless underdamped.
    pub fn damped_frequency(&self) -> Option<f64> {
        let d = self.delta();
        let w2 = self.k / MASS - d * d;
        (w2 > 0.0).then(|| w2.sqrt())
    }

    pub fn is_underdamped(&self) -> bool {
        self.classify() == Damping::Underdamped
    }

    pub fn classify(&self) -> Damping {
        let z = self.zeta();
        if (z - 1.0).abs() <= CRITICAL_TOL {
            Damping::Critical
        } else if z > 1.0 {
            Damping::Overdamped
        } else {
            Damping::Underdamped
        }
    }

    pub fn derived(&self) -> DerivedQuantities {
        let delta = self.delta();
        let omega0 = self.omega0();
        let omega = if self.is_underdamped() {
            self.damped_frequency()
        } else {
            None
        };
        DerivedQuantities {
            delta,
            omega0,
            zeta: delta / omega0,
            omega,
            period: 2.0 * std::f64::consts::PI / omega0,
            phase: omega.map(|w| (-delta / w).atan()),
        }
    }

    /// Both roots of `λ² + (c/m) λ + k/m = 0`.
    pub fn char_roots(&self) -> (Complex64, Complex64) {
        let d = self.delta();
        let disc = Complex64::new(d * d - self.k / MASS, 0.0).sqrt();
        (Complex64::new(-d, 0.0) + disc, Complex64::new(-d, 0.0) - disc)
    }

    /// `r = ẍ + (c/m) ẋ + (k/m)(x − x₀)`.
    pub fn residual(&self, j: Jet2) -> f64 {
        j.d2 + self.c / MASS * j.d1 + self.k / MASS * (j.v - self.x0)
    }

    /// `r / k = ẍ/k + (c/k) ẋ + (x − x₀)`.
    pub fn residual_scaled(&self, j: Jet2) -> Result<f64> {
        if !(self.k > 0.0) {
            return Err(Error::invalid(format!("scaled residual needs k > 0, got {}", self.k)));
        }
        Ok(self.residual_scaled_unchecked(j))
    }

    #[inline]
    pub(crate) fn residual_scaled_unchecked(&self, j: Jet2) -> f64 {
        j.d2 / self.k + self.c / self.k * j.d1 + (j.v - self.x0)
    }

    /// Residual in either form, with its partial derivatives with respect to
    /// `(x, ẋ, ẍ)` and to `(c, k, x₀)`.
    #[inline]
    pub(crate) fn residual_with_partials(&self, j: Jet2, scaled: bool) -> (f64, [f64; 3], [f64; 3]) {
        let PhysParams { c, k, x0 } = *self;
        if scaled {
            let r = j.d2 / k + c / k * j.d1 + (j.v - x0);
            (
                r,
                [1.0, c / k, 1.0 / k],
                [j.d1 / k, -(j.d2 + c * j.d1) / (k * k), -1.0],
            )
        } else {
            let r = j.d2 + c * j.d1 + k * (j.v - x0);
            (r, [k, c, 1.0], [j.d1, j.v - x0, -k])
        }
    }

    fn require_underdamped(&self) -> Result<(f64, f64, f64)> {
        if !self.is_underdamped() || !(self.k > 0.0) {
            return Err(Error::invalid(format!(
                "closed-form solution needs an underdamped oscillator, got zeta = {}",
                self.zeta()
            )));
        }
        let delta = self.delta();
        let omega = self.damped_frequency().expect("underdamped");
        Ok((delta, omega, (-delta / omega).atan()))
    }

    /// `x(t) = x₀ + A₀ cos(ωt + φ) e^{−δt}` with `φ = arctan(−δ/ω)`, so ẋ(0) = 0.
    pub fn analytic_solution(&self, amplitude: f64, t: f64) -> Result<f64> {
        let (delta, omega, phase) = self.require_underdamped()?;
        Ok(self.x0 + amplitude * (omega * t + phase).cos() * (-delta * t).exp())
    }

    /// Closed-form solution with an explicit phase instead of the ẋ(0) = 0 convention.
    pub fn analytic_solution_with_phase(&self, amplitude: f64, phase: f64, t: f64) -> Result<f64> {
        let (delta, omega, _) = self.require_underdamped()?;
        Ok(self.x0 + amplitude * (omega * t + phase).cos() * (-delta * t).exp())
    }

    /// The closed-form solution as a jet in time.
    pub fn analytic_jet(&self, amplitude: f64, t: f64) -> Result<Jet2> {
        let (delta, omega, phase) = self.require_underdamped()?;
        let tj = Jet2::variable(t);
        let osc = (tj.scale(omega) + phase).cos() * tj.scale(-delta).exp();
        Ok(osc.scale(amplitude) + self.x0)
    }

    /// Closed-form value together with its gradient with respect to `(c, k, x₀, A₀)`.
    pub fn analytic_with_grad(&self, amplitude: f64, t: f64) -> Result<(f64, [f64; 4])> {
        let (delta, omega, phase) = self.require_underdamped()?;
        Ok(analytic_with_grad_parts(self.x0, amplitude, delta, omega, phase, t))
    }
}

#[inline]
pub(crate) fn analytic_with_grad_parts(
    x0: f64,
    amplitude: f64,
    delta: f64,
    omega: f64,
    phase: f64,
    t: f64,
) -> (f64, [f64; 4]) {
    let arg = omega * t + phase;
    let (s, c) = arg.sin_cos();
    let e = (-delta * t).exp();
    let x = x0 + amplitude * c * e;

    let w2d2 = omega * omega + delta * delta;
    let dphase_ddelta = -omega / w2d2;
    let dphase_domega = delta / w2d2;
    // holding the other of (δ, ω) fixed
    let dx_domega = -amplitude * e * s * (t + dphase_domega);
    let dx_ddelta = -amplitude * e * (s * dphase_ddelta + c * t);
    // δ = c/2, ω = √(k − δ²)
    let domega_dc = -delta / (2.0 * omega);
    let domega_dk = 1.0 / (2.0 * omega);
    let dx_dc = 0.5 * dx_ddelta + domega_dc * dx_domega;
    let dx_dk = domega_dk * dx_domega;
    (x, [dx_dc, dx_dk, 1.0, c * e])
}
