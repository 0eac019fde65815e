//! Fixed-length Hamiltonian Monte Carlo with dual-averaging step size
//! adaptation during burn-in and a ±10% per-iteration step jitter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::posterior::LogDensity;
use super::summary::PosteriorSamples;

/// Acceptance below this after burn-in marks the run as failed.
pub const MIN_ACCEPTANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HmcConfig {
    pub n_leapfrog: usize,
    pub step_size: f64,
    pub burn_in: usize,
    /// draws kept per chain
    pub samples: usize,
    pub seed: u64,
    pub target_accept: f64,
    pub chains: usize,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            n_leapfrog: 50,
            step_size: 5e-4,
            burn_in: 3000,
            samples: 3000,
            seed: 0,
            target_accept: 0.85,
            chains: 1,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_leapfrog == 0 {
            return Err(Error::Config("leapfrog steps must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config(format!(
                "target acceptance must lie in (0, 1), got {}",
                self.target_accept
            )));
        }
        if self.chains == 0 {
            return Err(Error::Config("chains must be at least 1".into()));
        }
        Ok(())
    }
}

/// Nesterov dual averaging of the log step size.
#[derive(Debug, Clone)]
struct DualAveraging {
    mu: f64,
    target: f64,
    h_bar: f64,
    log_eps_bar: f64,
    m: usize,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, target: f64) -> Self {
        Self {
            mu: (10.0 * eps0).ln(),
            target,
            h_bar: 0.0,
            log_eps_bar: eps0.ln(),
            m: 0,
        }
    }

    /// Feeds one acceptance probability and returns the next step size.
    fn update(&mut self, alpha: f64) -> f64 {
        self.m += 1;
        let m = self.m as f64;
        let w = 1.0 / (m + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - alpha);
        let log_eps = self.mu - m.sqrt() / Self::GAMMA * self.h_bar;
        let eta = m.powf(-Self::KAPPA);
        self.log_eps_bar = eta * log_eps + (1.0 - eta) * self.log_eps_bar;
        log_eps.exp()
    }

    fn final_step(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// `L` leapfrog steps from `(q, p)`; `g` enters as `∇ln p(q)` and leaves as
/// the gradient at the end point. Returns the final log-density, `−∞` if
/// the trajectory left the support or blew up.
pub(crate) fn leapfrog<D: LogDensity + ?Sized>(
    target: &mut D,
    q: &mut [f64],
    p: &mut [f64],
    g: &mut [f64],
    eps: f64,
    steps: usize,
) -> Result<f64> {
    let mut lp = f64::NEG_INFINITY;
    for _ in 0..steps {
        for (pi, gi) in p.iter_mut().zip(g.iter()) {
            *pi += 0.5 * eps * gi;
        }
        for (qi, pi) in q.iter_mut().zip(p.iter()) {
            *qi += eps * pi;
        }
        lp = target.log_density(q, Some(g))?;
        if !lp.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Ok(f64::NEG_INFINITY);
        }
        for (pi, gi) in p.iter_mut().zip(g.iter()) {
            *pi += 0.5 * eps * gi;
        }
    }
    Ok(lp)
}

fn kinetic(p: &[f64]) -> f64 {
    0.5 * p.iter().map(|x| x * x).sum::<f64>()
}

struct Chain {
    draws: Vec<f64>,
    accepted: usize,
    step: f64,
}

fn run_chain<D: LogDensity + ?Sized>(
    target: &mut D,
    cfg: &HmcConfig,
    init: &[f64],
    chain: usize,
) -> Result<Chain> {
    let dim = init.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);

    let mut q = init.to_vec();
    let mut g = vec![0.0; dim];
    let mut lp = target.log_density(&q, Some(&mut g))?;
    if !lp.is_finite() || g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Diagnostic(format!("log-density at the initial point is {lp}")));
    }

    let mut eps = cfg.step_size;
    let mut da = DualAveraging::new(eps, cfg.target_accept);
    let mut draws = Vec::with_capacity(cfg.samples * dim);
    let mut accepted = 0;
    let (mut q_new, mut p, mut g_new) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);

    for it in 0..cfg.burn_in + cfg.samples {
        for pi in p.iter_mut() {
            *pi = rng.sample(StandardNormal);
        }
        let h0 = -lp + kinetic(&p);
        q_new.copy_from_slice(&q);
        g_new.copy_from_slice(&g);
        // jitter breaks up periodic trajectories of fixed length
        let jitter: f64 = rng.random_range(0.9..1.1);
        let lp_new = leapfrog(target, &mut q_new, &mut p, &mut g_new, eps * jitter, cfg.n_leapfrog)?;
        let h1 = -lp_new + kinetic(&p);
        let alpha = if h1.is_finite() { (h0 - h1).exp().min(1.0) } else { 0.0 };
        let u: f64 = rng.random();
        let accept = u < alpha;
        if accept {
            std::mem::swap(&mut q, &mut q_new);
            std::mem::swap(&mut g, &mut g_new);
            lp = lp_new;
        }
        if it < cfg.burn_in {
            eps = da.update(alpha);
            if it + 1 == cfg.burn_in {
                eps = da.final_step();
            }
        } else {
            accepted += usize::from(accept);
            draws.extend_from_slice(&q);
        }
    }
    Ok(Chain { draws, accepted, step: eps })
}

/// Runs `cfg.chains` independent chains from `init` and pools them.
///
/// Chains share the seed but use separate random streams; they run on
/// their own threads with their own copy of the target.
pub fn hmc_sample<D>(target: &D, cfg: &HmcConfig, init: &[f64]) -> Result<PosteriorSamples>
where
    D: LogDensity + Clone + Send,
{
    cfg.validate()?;
    if init.len() != target.dim() {
        return Err(Error::Dimension { expected: target.dim(), actual: init.len() });
    }
    if init.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("initial point is not finite"));
    }
    let chains: Vec<Result<Chain>> = if cfg.chains == 1 {
        vec![run_chain(&mut target.clone(), cfg, init, 0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..cfg.chains)
                .map(|c| {
                    let mut t = target.clone();
                    s.spawn(move || run_chain(&mut t, cfg, init, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Diagnostic("sampler thread panicked".into()))))
                .collect()
        })
    };

    let dim = init.len();
    let mut draws = Vec::with_capacity(cfg.chains * cfg.samples * dim);
    let mut accepted = 0;
    let mut steps = Vec::with_capacity(cfg.chains);
    for c in chains {
        let c = c?;
        draws.extend(c.draws);
        accepted += c.accepted;
        steps.push(c.step);
    }
    let rate = accepted as f64 / (cfg.chains * cfg.samples) as f64;
    let diagnostic = (rate < MIN_ACCEPTANCE)
        .then(|| format!("acceptance rate {rate:.4} below {MIN_ACCEPTANCE} after burn-in"));
    PosteriorSamples::new(target.names(), target.transforms(), draws, rate, steps, diagnostic)
}
