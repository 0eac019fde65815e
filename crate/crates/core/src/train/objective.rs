//! Weighted data/residual objective with its exact gradient.
//!
//! The objective is `Σ wᵈᵢ (x(tᵢ) − x̂ᵢ)² + Σ wᵖⱼ r(τⱼ)²` over training
//! points `tᵢ` and collocation points `τⱼ`. Parameters are the network
//! vector followed, when physics is on, by `(ln c, ln k, ln x₀)`.
//!
//! When every training time is also a collocation point a single jet pass
//! serves both sums.

use crate::error::{Error, Result};
use crate::network::{Batch, NetShape, Order};
use crate::oscillator::PhysParams;
use crate::timeseries::NormalizedSeries;

use super::loss::grid_indices;

pub const N_PHYS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    /// Unweighted `Σ (x − x̂)²`.
    pub data_sse: f64,
    /// Unweighted `Σ r²`; zero without physics.
    pub phys_sse: f64,
}

#[derive(Debug, Clone)]
pub struct Collocation {
    shape: NetShape,
    n_net: usize,
    data_x: Vec<f64>,
    physics: bool,
    scaled: bool,
    n_grid: usize,
    /// Grid position of each training point when all of them are on the grid.
    data_idx: Option<Vec<usize>>,
    jet: Option<Batch>,
    val: Option<Batch>,
    pub data_weights: Vec<f64>,
    pub phys_weights: Vec<f64>,
    seed_jet: Vec<f64>,
    seed_val: Vec<f64>,
    residuals: Vec<f64>,
    errors: Vec<f64>,
}

/// Physics parameters from the log-space tail of a parameter vector.
pub fn phys_from_log(tail: &[f64]) -> PhysParams {
    PhysParams::new(tail[0].exp(), tail[1].exp(), tail[2].exp())
}

pub fn phys_to_log(p: &PhysParams) -> [f64; 3] {
    [p.c.ln(), p.k.ln(), p.x0.ln()]
}

impl Collocation {
    /// Data term only, every point weighted by `weight`.
    pub fn data_only(shape: &NetShape, train: &NormalizedSeries, weight: f64) -> Self {
        let n = train.len();
        Self {
            shape: shape.clone(),
            n_net: shape.n_params(),
            data_x: train.x.clone(),
            physics: false,
            scaled: false,
            n_grid: 0,
            data_idx: None,
            jet: None,
            val: (n > 0).then(|| Batch::new(shape, &train.t, Order::Value)),
            data_weights: vec![weight; n],
            phys_weights: Vec::new(),
            seed_jet: Vec::new(),
            seed_val: vec![0.0; n],
            residuals: Vec::new(),
            errors: vec![0.0; n],
        }
    }

    pub fn with_physics(
        shape: &NetShape,
        train: &NormalizedSeries,
        grid: &[f64],
        scaled: bool,
        data_weight: f64,
        phys_weight: f64,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::invalid("empty collocation grid"));
        }
        let n = train.len();
        let data_idx = grid_indices(&train.t, grid).ok();
        let val = match (&data_idx, n) {
            (None, n) if n > 0 => Some(Batch::new(shape, &train.t, Order::Value)),
            _ => None,
        };
        Ok(Self {
            shape: shape.clone(),
            n_net: shape.n_params(),
            data_x: train.x.clone(),
            physics: true,
            scaled,
            n_grid: grid.len(),
            data_idx,
            jet: Some(Batch::new(shape, grid, Order::Jet)),
            val,
            data_weights: vec![data_weight; n],
            phys_weights: vec![phys_weight; grid.len()],
            seed_jet: vec![0.0; 3 * grid.len()],
            seed_val: vec![0.0; n],
            residuals: vec![0.0; grid.len()],
            errors: vec![0.0; n],
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_net + if self.physics { N_PHYS } else { 0 }
    }

    pub fn n_net(&self) -> usize {
        self.n_net
    }

    pub fn has_physics(&self) -> bool {
        self.physics
    }

    pub fn n_data(&self) -> usize {
        self.data_x.len()
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn shape(&self) -> &NetShape {
        &self.shape
    }

    /// Grid position of each training point, if they all lie on the grid.
    pub fn data_indices(&self) -> Option<&[usize]> {
        self.data_idx.as_deref()
    }

    /// Residuals at the collocation points from the last evaluation.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `x(tᵢ) − x̂ᵢ` from the last evaluation.
    pub fn data_errors(&self) -> &[f64] {
        &self.errors
    }

    /// Evaluates the objective; when `grad` is given it is overwritten with the gradient.
    pub fn eval(&mut self, params: &[f64], mut grad: Option<&mut [f64]>) -> Result<ObjectiveValue> {
        if params.len() != self.n_params() {
            return Err(Error::Dimension {
                expected: self.n_params(),
                actual: params.len(),
            });
        }
        if let Some(g) = grad.as_deref_mut() {
            if g.len() != params.len() {
                return Err(Error::Dimension {
                    expected: params.len(),
                    actual: g.len(),
                });
            }
            g.fill(0.0);
        }
        let theta = &params[..self.n_net];
        let want_grad = grad.is_some();
        let mut value = 0.0;
        let mut data_sse = 0.0;
        let mut phys_sse = 0.0;

        if let Some(jet) = self.jet.as_mut() {
            jet.forward(theta);
        }
        if let Some(val) = self.val.as_mut() {
            val.forward(theta);
        }

        // data term
        let n_data = self.data_x.len();
        for i in 0..n_data {
            let x = match (&self.data_idx, &self.val) {
                (Some(idx), _) => self.jet.as_ref().unwrap().value(idx[i]),
                (None, Some(val)) => val.value(i),
                (None, None) => unreachable!("training points without a batch"),
            };
            let e = x - self.data_x[i];
            self.errors[i] = e;
            data_sse += e * e;
            value += self.data_weights[i] * e * e;
        }

        // physics term
        let mut dphys = [0.0; N_PHYS];
        if self.physics {
            let pp = phys_from_log(&params[self.n_net..]);
            let jet = self.jet.as_ref().unwrap();
            let n = self.n_grid;
            if want_grad {
                self.seed_jet.fill(0.0);
            }
            for j in 0..n {
                let (r, dj, dp) = pp.residual_with_partials(jet.jet(j), self.scaled);
                self.residuals[j] = r;
                phys_sse += r * r;
                let w = self.phys_weights[j];
                value += w * r * r;
                if want_grad {
                    let a = 2.0 * w * r;
                    self.seed_jet[j] += a * dj[0];
                    self.seed_jet[n + j] += a * dj[1];
                    self.seed_jet[2 * n + j] += a * dj[2];
                    for q in 0..N_PHYS {
                        dphys[q] += a * dp[q];
                    }
                }
            }
            // chain to log space
            dphys[0] *= pp.c;
            dphys[1] *= pp.k;
            dphys[2] *= pp.x0;
        }

        if let Some(g) = grad {
            match (&self.data_idx, self.jet.as_mut(), self.val.as_mut()) {
                (Some(idx), Some(jet), _) => {
                    for (i, &gi) in idx.iter().enumerate() {
                        self.seed_jet[gi] += 2.0 * self.data_weights[i] * self.errors[i];
                    }
                    jet.backward(theta, &self.seed_jet, g);
                }
                (None, jet, val) => {
                    if let Some(jet) = jet {
                        jet.backward(theta, &self.seed_jet, g);
                    }
                    if let Some(val) = val {
                        for i in 0..n_data {
                            self.seed_val[i] = 2.0 * self.data_weights[i] * self.errors[i];
                        }
                        val.backward(theta, &self.seed_val, g);
                    }
                }
                (Some(_), None, _) => unreachable!("grid indices without a jet batch"),
            }
            if self.physics {
                g[self.n_net..].copy_from_slice(&dphys);
            }
        }

        Ok(ObjectiveValue {
            value,
            data_sse,
            phys_sse,
        })
    }
}
