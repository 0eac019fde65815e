//! Reference loss evaluation through the scalar network pass.

use serde::{Deserialize, Serialize};

use crate::autodiff::Jet2;
use crate::error::{Error, Result};
use crate::network::NetParams;
use crate::oscillator::PhysParams;
use crate::timeseries::NormalizedSeries;

/// Data/physics blend of the composite loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LossWeights {
    /// `(1 − ε) L_data + ε L_phys`
    Fixed(f64),
    /// One free value per collocation point; the weight there is `sigmoid(raw)`.
    SelfAdaptive { raw: Vec<f64> },
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

impl LossWeights {
    pub fn fixed(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::invalid(format!("weight must lie in [0, 1], got {eps}")));
        }
        Ok(Self::Fixed(eps))
    }

    pub fn self_adaptive(n: usize, eps0: f64) -> Self {
        Self::SelfAdaptive {
            raw: vec![logit(eps0); n],
        }
    }

    /// Weight at collocation point `i`.
    pub fn eps(&self, i: usize) -> f64 {
        match self {
            Self::Fixed(e) => *e,
            Self::SelfAdaptive { raw } => sigmoid(raw[i]),
        }
    }

    pub fn eps_all(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eps(i)).collect()
    }
}

/// Mean squared data misfit of the network on `train`.
pub fn data_loss(p: &NetParams, train: &NormalizedSeries) -> Result<f64> {
    if train.is_empty() {
        return Err(Error::invalid("data loss of an empty series"));
    }
    let sse: f64 = train
        .t
        .iter()
        .zip(&train.x)
        .map(|(&t, &x)| (p.forward(t) - x).powi(2))
        .sum();
    Ok(sse / train.len() as f64)
}

fn residual(pp: &PhysParams, j: Jet2, scaled: bool) -> Result<f64> {
    if scaled {
        pp.residual_scaled(j)
    } else {
        Ok(pp.residual(j))
    }
}

/// Mean squared oscillator residual of the network over `grid`.
pub fn physics_loss(np: &NetParams, pp: &PhysParams, grid: &[f64], scaled: bool) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::invalid("physics loss on an empty grid"));
    }
    let mut sse = 0.0;
    for &t in grid {
        sse += residual(pp, np.forward_jet(t), scaled)?.powi(2);
    }
    Ok(sse / grid.len() as f64)
}

/// `(L, L_data, L_phys)`. In self-adaptive mode the training points must lie
/// on `grid`; each takes the weight of its own grid point.
pub fn composite_loss(
    np: &NetParams,
    pp: &PhysParams,
    w: &LossWeights,
    train: &NormalizedSeries,
    grid: &[f64],
    scaled: bool,
) -> Result<(f64, f64, f64)> {
    let l_data = data_loss(np, train)?;
    let l_phys = physics_loss(np, pp, grid, scaled)?;
    let total = match w {
        LossWeights::Fixed(e) => (1.0 - e) * l_data + e * l_phys,
        LossWeights::SelfAdaptive { raw } => {
            if raw.len() != grid.len() {
                return Err(Error::Dimension {
                    expected: grid.len(),
                    actual: raw.len(),
                });
            }
            let idx = grid_indices(&train.t, grid)?;
            let d: f64 = idx
                .iter()
                .zip(train.t.iter().zip(&train.x))
                .map(|(&i, (&t, &x))| (1.0 - w.eps(i)) * (np.forward(t) - x).powi(2))
                .sum::<f64>()
                / train.len() as f64;
            let mut p = 0.0;
            for (i, &t) in grid.iter().enumerate() {
                p += w.eps(i) * residual(pp, np.forward_jet(t), scaled)?.powi(2);
            }
            d + p / grid.len() as f64
        }
    };
    Ok((total, l_data, l_phys))
}

/// Position of every time in `t` on `grid`, matched exactly.
pub fn grid_indices(t: &[f64], grid: &[f64]) -> Result<Vec<usize>> {
    t.iter()
        .map(|ti| {
            grid.iter()
                .position(|g| g.to_bits() == ti.to_bits())
                .ok_or_else(|| Error::invalid(format!("time {ti} is not a collocation point")))
        })
        .collect()
}

/// Descriptive (training window) and predictive (remainder) losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub descriptive_data: f64,
    pub predictive_data: f64,
    /// Absent for models without physics parameters.
    pub descriptive_phys: Option<f64>,
    pub predictive_phys: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 { 0.0 } else { s / n as f64 }
}

/// Splits curve values and optional residuals at `n_trn`. Empty windows report 0.
pub fn report_from_curve(
    model: &[f64],
    residuals: Option<&[f64]>,
    series: &NormalizedSeries,
    n_trn: usize,
) -> Result<LossReport> {
    if n_trn == 0 || n_trn > series.len() || model.len() != series.len() {
        return Err(Error::invalid(format!(
            "cannot split {} model points against {} observations at {n_trn}",
            model.len(),
            series.len()
        )));
    }
    let sq = |i: usize| (model[i] - series.x[i]).powi(2);
    let phys = residuals.map(|r| {
        (
            mean(r[..n_trn].iter().map(|v| v * v)),
            mean(r[n_trn..].iter().map(|v| v * v)),
        )
    });
    Ok(LossReport {
        descriptive_data: mean((0..n_trn).map(sq)),
        predictive_data: mean((n_trn..series.len()).map(sq)),
        descriptive_phys: phys.map(|p| p.0),
        predictive_phys: phys.map(|p| p.1),
    })
}

pub fn evaluate(
    np: &NetParams,
    pp: Option<&PhysParams>,
    series: &NormalizedSeries,
    n_trn: usize,
    scaled: bool,
) -> Result<LossReport> {
    let jets: Vec<Jet2> = series.t.iter().map(|&t| np.forward_jet(t)).collect();
    let model: Vec<f64> = jets.iter().map(|j| j.v).collect();
    let residuals = match pp {
        Some(pp) => Some(jets.iter().map(|&j| residual(pp, j, scaled)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    report_from_curve(&model, residuals.as_deref(), series, n_trn)
}

/// Largest deviation of the network from its own mean over `grid`.
pub fn amplitude(np: &NetParams, grid: &[f64]) -> f64 {
    let x: Vec<f64> = grid.iter().map(|&t| np.forward(t)).collect();
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetShape;
    use crate::timeseries::time_grid;

    fn constant_net(c: f64) -> NetParams {
        let mut p = NetParams::zeros(NetShape::default());
        let last = p.len() - 1;
        p.theta[last] = c;
        p
    }

    #[test]
    fn data_loss_examples() {
        let z = NetParams::zeros(NetShape::default());
        let s = NormalizedSeries::on_grid(vec![1.0, 1.0]);
        assert_eq!(data_loss(&z, &s).unwrap(), 1.0);
        let s = NormalizedSeries::on_grid(vec![0.0; 5]);
        assert_eq!(data_loss(&z, &s).unwrap(), 0.0);
        assert!(data_loss(&z, &NormalizedSeries::default()).is_err());
    }

    #[test]
    fn equilibrium_network_has_zero_physics_loss() {
        let net = constant_net(0.558);
        let pp = PhysParams::new(1.251, 374.6, 0.558);
        let grid = time_grid(365);
        assert_eq!(physics_loss(&net, &pp, &grid, false).unwrap(), 0.0);
        assert!(physics_loss(&net, &pp, &[], false).is_err());
    }

    #[test]
    fn scaled_physics_loss_differs_by_k_squared() {
        let net = NetParams::init(NetShape::default(), 4);
        let pp = PhysParams::new(1.251, 374.6, 0.558);
        let grid = time_grid(50);
        let a = physics_loss(&net, &pp, &grid, false).unwrap();
        let b = physics_loss(&net, &pp, &grid, true).unwrap();
        assert!((a / b - pp.k * pp.k).abs() < 1e-8 * pp.k * pp.k);
    }

    #[test]
    fn composite_endpoints() {
        let net = NetParams::init(NetShape::default(), 1);
        let pp = PhysParams::new(2.2, 350.0, 0.56);
        let grid = time_grid(40);
        let train = NormalizedSeries::new(grid[..25].to_vec(), (0..25).map(|i| 0.5 + 0.01 * i as f64).collect()).unwrap();
        let (l, d, p) = composite_loss(&net, &pp, &LossWeights::Fixed(0.0), &train, &grid, false).unwrap();
        assert_eq!(l, d);
        assert_eq!(d, data_loss(&net, &train).unwrap());
        let (l, _, p1) = composite_loss(&net, &pp, &LossWeights::Fixed(1.0), &train, &grid, false).unwrap();
        assert_eq!(l, p1);
        assert_eq!(p, p1);
        // uniform self-adaptive weights reduce to the fixed blend
        let e = 1e-3;
        let (lf, ..) = composite_loss(&net, &pp, &LossWeights::Fixed(e), &train, &grid, false).unwrap();
        let sa = LossWeights::self_adaptive(grid.len(), e);
        let (ls, ..) = composite_loss(&net, &pp, &sa, &train, &grid, false).unwrap();
        assert!((lf - ls).abs() < 1e-12 * lf);
        assert!(LossWeights::fixed(1.5).is_err());
    }

    #[test]
    fn sigmoid_and_logit_invert() {
        for p in [1e-6, 1e-3, 0.3, 0.5, 0.99] {
            assert!((sigmoid(logit(p)) - p).abs() < 1e-15);
        }
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn perfect_model_reports_zero() {
        let net = constant_net(0.5);
        let pp = PhysParams::new(1.0, 300.0, 0.5);
        let s = NormalizedSeries::on_grid(vec![0.5; 365]);
        let r = evaluate(&net, Some(&pp), &s, 225, false).unwrap();
        assert_eq!(r.descriptive_data, 0.0);
        assert_eq!(r.predictive_data, 0.0);
        assert_eq!(r.descriptive_phys, Some(0.0));
        assert_eq!(r.predictive_phys, Some(0.0));
        assert!(evaluate(&net, None, &s, 0, false).is_err());
    }

    #[test]
    fn report_windows() {
        let s = NormalizedSeries::on_grid((0..365).map(|i| i as f64).collect());
        let model = vec![0.0; 365];
        let r = report_from_curve(&model, None, &s, 225).unwrap();
        let d: f64 = (0..225).map(|i| (i * i) as f64).sum::<f64>() / 225.0;
        let p: f64 = (225..365).map(|i| (i * i) as f64).sum::<f64>() / 140.0;
        assert!((r.descriptive_data - d).abs() < 1e-9 * d);
        assert!((r.predictive_data - p).abs() < 1e-9 * p);
        assert_eq!(r.descriptive_phys, None);
    }
}
