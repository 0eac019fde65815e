//! Log-posterior builders for the closed-form model, the Bayesian network
//! and the Bayesian physics-informed network.

use crate::error::{Error, Result};
use crate::network::{Batch, NetShape, Order};
use crate::oscillator::{analytic_with_grad_parts, PhysParams};
use crate::timeseries::NormalizedSeries;
use crate::train::{phys_from_log, phys_to_log, Adam, AdamConfig, Collocation, PHYS_INIT};

use super::density::{gaussian_norm, log_prior, Prior, PriorSpec, Transform};

/// Data and residual width of the network posteriors.
pub const NET_SIGMA: f64 = 0.05;
/// Prior sd of every network weight and bias.
pub const NET_PRIOR_SD: f64 = 2.0;
/// Prior sd of the log physics parameters.
pub const PHYS_PRIOR_SD: f64 = 0.5;
/// Prior median of the closed-form amplitude.
pub const AMPLITUDE_PRIOR: f64 = 0.3;

/// A differentiable log-density on an unconstrained vector.
pub trait LogDensity {
    fn dim(&self) -> usize;

    /// Returns `ln p(u)` up to a constant and, when asked, overwrites `grad`
    /// with its gradient. Outside the support the value is `−∞` and the
    /// gradient is left zeroed.
    fn log_density(&mut self, u: &[f64], grad: Option<&mut [f64]>) -> Result<f64>;

    fn transforms(&self) -> Vec<Transform>;

    fn names(&self) -> Vec<String>;

    /// Model curve at times `t` for one draw.
    fn curve(&self, u: &[f64], t: &[f64]) -> Result<Vec<f64>>;

    /// Physics parameters carried by a draw, if any.
    fn physics(&self, u: &[f64]) -> Option<PhysParams>;

    /// A reasonable starting point.
    fn initial(&self) -> Vec<f64>;
}

fn check_dims(expected: usize, u: &[f64], grad: &Option<&mut [f64]>) -> Result<()> {
    let bad = u.len() != expected || grad.as_ref().is_some_and(|g| g.len() != expected);
    if bad {
        let actual = if u.len() != expected { u.len() } else { grad.as_ref().unwrap().len() };
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}

/// Default log-normal priors centred on the initial physics guess.
pub fn physics_priors() -> [Prior; 3] {
    let [c, k, x0] = phys_to_log(&PHYS_INIT);
    [
        Prior::LogNormal { mu: c, sigma: PHYS_PRIOR_SD },
        Prior::LogNormal { mu: k, sigma: PHYS_PRIOR_SD },
        Prior::LogNormal { mu: x0, sigma: PHYS_PRIOR_SD },
    ]
}

/// Posterior over `(ln c, ln k, ln x₀, ln A₀, ln σ)` with the closed-form
/// solution as the model curve.
#[derive(Debug, Clone)]
pub struct BiPosterior {
    t: Vec<f64>,
    x: Vec<f64>,
    prior: PriorSpec,
}

impl BiPosterior {
    pub fn new(train: &NormalizedSeries) -> Self {
        let [c, k, x0] = physics_priors();
        let prior = PriorSpec::new(vec![
            c,
            k,
            x0,
            Prior::LogNormal { mu: AMPLITUDE_PRIOR.ln(), sigma: PHYS_PRIOR_SD },
            Prior::HalfCauchy { beta: 1.0 },
        ])
        .expect("valid default priors");
        Self::with_prior(train, prior).expect("five priors")
    }

    pub fn with_prior(train: &NormalizedSeries, prior: PriorSpec) -> Result<Self> {
        if prior.len() != 5 {
            return Err(Error::Dimension { expected: 5, actual: prior.len() });
        }
        Ok(Self { t: train.t.clone(), x: train.x.clone(), prior })
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// Log-likelihood alone, for the given draw.
    pub fn log_likelihood(&self, u: &[f64]) -> f64 {
        let p = phys_from_log(&u[..3]);
        let (a, sigma) = (u[3].exp(), u[4].exp());
        let Some(omega) = p.damped_frequency() else {
            return f64::NEG_INFINITY;
        };
        let delta = p.delta();
        let phase = (-delta / omega).atan();
        let sse: f64 = self
            .t
            .iter()
            .zip(&self.x)
            .map(|(&t, &x)| (analytic_with_grad_parts(p.x0, a, delta, omega, phase, t).0 - x).powi(2))
            .sum();
        gaussian_norm(self.t.len(), sigma) - sse / (2.0 * sigma * sigma)
    }
}

impl LogDensity for BiPosterior {
    fn dim(&self) -> usize {
        5
    }

    fn log_density(&mut self, u: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64> {
        check_dims(5, u, &grad)?;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let p = phys_from_log(&u[..3]);
        let (a, sigma) = (u[3].exp(), u[4].exp());
        let Some(omega) = p.damped_frequency() else {
            return Ok(f64::NEG_INFINITY);
        };
        let delta = p.delta();
        let phase = (-delta / omega).atan();
        let s2 = sigma * sigma;

        let mut sse = 0.0;
        // Σ e ∂x/∂(c, k, x₀, A₀)
        let mut acc = [0.0; 4];
        for (&t, &x) in self.t.iter().zip(&self.x) {
            let (m, d) = analytic_with_grad_parts(p.x0, a, delta, omega, phase, t);
            let e = m - x;
            sse += e * e;
            for (ac, di) in acc.iter_mut().zip(d) {
                *ac += e * di;
            }
        }
        let n = self.t.len();
        let ll = gaussian_norm(n, sigma) - sse / (2.0 * s2);
        let lp = log_prior(&self.prior, u, grad.as_deref_mut())?;
        if let Some(g) = grad {
            let vals = [p.c, p.k, p.x0, a];
            for j in 0..4 {
                g[j] -= acc[j] * vals[j] / s2;
            }
            g[4] += -(n as f64) + sse / s2;
        }
        Ok(ll + lp)
    }

    fn transforms(&self) -> Vec<Transform> {
        self.prior.transforms()
    }

    fn names(&self) -> Vec<String> {
        ["c", "k", "x0", "A0", "sigma"].iter().map(|s| s.to_string()).collect()
    }

    fn curve(&self, u: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        let p = phys_from_log(&u[..3]);
        let a = u[3].exp();
        t.iter().map(|&t| p.analytic_solution(a, t)).collect()
    }

    fn physics(&self, u: &[f64]) -> Option<PhysParams> {
        Some(phys_from_log(&u[..3]))
    }

    fn initial(&self) -> Vec<f64> {
        let [c, k, x0] = phys_to_log(&PHYS_INIT);
        vec![c, k, x0, AMPLITUDE_PRIOR.ln(), 0.1f64.ln()]
    }
}

/// Shared machinery of the two network posteriors: Gaussian priors on the
/// network and a weighted least-squares objective.
#[derive(Debug, Clone)]
struct NetPosterior {
    obj: Collocation,
    prior: PriorSpec,
    /// normalising constant of the likelihoods
    norm: f64,
    scratch: Vec<f64>,
    init_seed: u64,
}

impl NetPosterior {
    fn eval(&mut self, u: &[f64], mut grad: Option<&mut [f64]>) -> Result<f64> {
        let n = self.obj.n_params();
        check_dims(n, u, &grad)?;
        let ov = match grad.as_deref_mut() {
            Some(_) => self.obj.eval(u, Some(&mut self.scratch))?,
            None => self.obj.eval(u, None)?,
        };
        if let Some(g) = grad {
            for (gi, si) in g.iter_mut().zip(&self.scratch) {
                *gi = -si;
            }
            let lp = log_prior(&self.prior, u, Some(g))?;
            Ok(self.norm - ov.value + lp)
        } else {
            Ok(self.norm - ov.value + log_prior(&self.prior, u, None)?)
        }
    }

    fn curve(&self, u: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        let shape = self.obj.shape();
        if u.len() < shape.n_params() {
            return Err(Error::Dimension { expected: shape.n_params(), actual: u.len() });
        }
        if t.is_empty() {
            return Ok(Vec::new());
        }
        let mut b = Batch::new(shape, t, Order::Value);
        b.forward(&u[..shape.n_params()]);
        Ok(b.values().to_vec())
    }

    fn net_names(&self) -> Vec<String> {
        (0..self.obj.n_net()).map(|i| format!("theta{i}")).collect()
    }

    fn initial_net(&self) -> Vec<f64> {
        crate::network::NetParams::init(self.obj.shape().clone(), self.init_seed).theta
    }
}

/// Posterior over the network vector with a Gaussian data likelihood.
#[derive(Debug, Clone)]
pub struct BnnPosterior {
    inner: NetPosterior,
}

impl BnnPosterior {
    pub fn new(shape: &NetShape, train: &NormalizedSeries, sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("data width must be positive, got {sigma}")));
        }
        let obj = Collocation::data_only(shape, train, 1.0 / (2.0 * sigma * sigma));
        let n = shape.n_params();
        let prior = PriorSpec::new(vec![Prior::Normal { mu: 0.0, sigma: NET_PRIOR_SD }; n])?;
        Ok(Self {
            inner: NetPosterior {
                norm: gaussian_norm(train.len(), sigma),
                scratch: vec![0.0; n],
                obj,
                prior,
                init_seed: seed,
            },
        })
    }
}

impl LogDensity for BnnPosterior {
    fn dim(&self) -> usize {
        self.inner.obj.n_params()
    }

    fn log_density(&mut self, u: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        self.inner.eval(u, grad)
    }

    fn transforms(&self) -> Vec<Transform> {
        self.inner.prior.transforms()
    }

    fn names(&self) -> Vec<String> {
        self.inner.net_names()
    }

    fn curve(&self, u: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        self.inner.curve(u, t)
    }

    fn physics(&self, _u: &[f64]) -> Option<PhysParams> {
        None
    }

    fn initial(&self) -> Vec<f64> {
        self.inner.initial_net()
    }
}

/// Posterior over the network vector and `(ln c, ln k, ln x₀)` with data
/// and residual likelihoods.
#[derive(Debug, Clone)]
pub struct BpinnPosterior {
    inner: NetPosterior,
    scaled: bool,
}

impl BpinnPosterior {
    pub fn new(
        shape: &NetShape,
        train: &NormalizedSeries,
        grid: &[f64],
        scaled: bool,
        sigma: f64,
        sigma_r: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(sigma > 0.0 && sigma_r > 0.0) {
            return Err(Error::invalid(format!(
                "likelihood widths must be positive, got {sigma} and {sigma_r}"
            )));
        }
        let obj = Collocation::with_physics(
            shape,
            train,
            grid,
            scaled,
            1.0 / (2.0 * sigma * sigma),
            1.0 / (2.0 * sigma_r * sigma_r),
        )?;
        let mut priors = vec![Prior::Normal { mu: 0.0, sigma: NET_PRIOR_SD }; shape.n_params()];
        priors.extend(physics_priors());
        let n = obj.n_params();
        Ok(Self {
            inner: NetPosterior {
                norm: gaussian_norm(train.len(), sigma) + gaussian_norm(grid.len(), sigma_r),
                scratch: vec![0.0; n],
                obj,
                prior: PriorSpec::new(priors)?,
                init_seed: seed,
            },
            scaled,
        })
    }

    pub fn scaled(&self) -> bool {
        self.scaled
    }

    /// Residuals on the collocation grid for one draw.
    pub fn residuals(&mut self, u: &[f64]) -> Result<Vec<f64>> {
        self.inner.obj.eval(u, None)?;
        Ok(self.inner.obj.residuals().to_vec())
    }
}

impl LogDensity for BpinnPosterior {
    fn dim(&self) -> usize {
        self.inner.obj.n_params()
    }

    fn log_density(&mut self, u: &[f64], grad: Option<&mut [f64]>) -> Result<f64> {
        self.inner.eval(u, grad)
    }

    fn transforms(&self) -> Vec<Transform> {
        self.inner.prior.transforms()
    }

    fn names(&self) -> Vec<String> {
        let mut n = self.inner.net_names();
        n.extend(["c", "k", "x0"].iter().map(|s| s.to_string()));
        n
    }

    fn curve(&self, u: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        self.inner.curve(u, t)
    }

    fn physics(&self, u: &[f64]) -> Option<PhysParams> {
        Some(phys_from_log(&u[self.inner.obj.n_net()..]))
    }

    fn initial(&self) -> Vec<f64> {
        let mut u = self.inner.initial_net();
        u.extend(phys_to_log(&PHYS_INIT));
        u
    }
}

/// Maximises a log-density by Adam from `init`. A step that leaves the
/// support is undone and the learning rate halved.
pub fn find_map<D: LogDensity + ?Sized>(
    target: &mut D,
    init: &[f64],
    cfg: AdamConfig,
    iters: usize,
) -> Result<Vec<f64>> {
    let mut u = init.to_vec();
    let mut g = vec![0.0; u.len()];
    let lp0 = target.log_density(&u, Some(&mut g))?;
    if !lp0.is_finite() {
        return Err(Error::Diagnostic(format!("log-density at the starting point is {lp0}")));
    }
    let mut cfg = cfg;
    let mut adam = Adam::new(cfg, u.len());
    let mut prev = u.clone();
    for _ in 0..iters {
        prev.copy_from_slice(&u);
        for gi in g.iter_mut() {
            *gi = -*gi;
        }
        adam.step(&mut u, &g)?;
        let lp = target.log_density(&u, Some(&mut g))?;
        if !lp.is_finite() || g.iter().any(|x| !x.is_finite()) {
            u.copy_from_slice(&prev);
            cfg.lr *= 0.5;
            if cfg.lr < 1e-12 {
                break;
            }
            adam = Adam::new(cfg, u.len());
            target.log_density(&u, Some(&mut g))?;
        }
    }
    Ok(u)
}
