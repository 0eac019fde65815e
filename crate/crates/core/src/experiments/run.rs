use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bayes::{
    find_map, hmc_sample, posterior_predictive, summarize, BiPosterior, BnnPosterior, BpinnPosterior,
    CredibleBand, LogDensity, ParamSummary, PosteriorSamples,
};
use crate::error::{Error, Result};
use crate::oscillator::PhysParams;
use crate::timeseries::{split, NormalizedSeries};
use crate::train::{
    amplitude, evaluate, report_from_curve, train_nn, train_pinn, train_sapinn, AdamConfig, EpsRecord,
    LossReport, TrainResult,
};

use super::config::{ExperimentConfig, Method};

/// Band quantiles of the posterior-predictive envelope.
pub const BAND_QUANTILES: (f64, f64) = (0.025, 0.975);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub method: Option<Method>,
    pub n_trn: usize,
    pub unknowns: usize,
    pub losses: Option<LossReport>,
    /// Point estimate, or posterior mean for sampled methods.
    pub phys: Option<PhysParams>,
    /// Posterior summaries of the named (non-network) parameters.
    pub posterior: Option<Vec<ParamSummary>>,
    pub band_width: Option<f64>,
    /// Largest deviation of the model curve from its mean.
    pub amplitude: f64,
    /// Final objective value of optimised methods.
    pub final_loss: Option<f64>,
    /// Final self-adaptive weight statistics.
    pub eps: Option<EpsRecord>,
    pub acceptance_rate: Option<f64>,
    pub diagnostic: Option<String>,
    pub config: Option<ExperimentConfig>,
    #[serde(skip)]
    pub wall_clock: f64,
    /// model curve on the full series grid; the median for sampled methods
    #[serde(skip)]
    pub curve: Vec<f64>,
    #[serde(skip)]
    pub band: Option<CredibleBand>,
    #[serde(skip)]
    pub train: Option<TrainResult>,
    #[serde(skip)]
    pub samples: Option<PosteriorSamples>,
}

impl ExperimentResult {
    pub fn losses(&self) -> LossReport {
        self.losses.expect("losses are set by run")
    }

    /// Posterior summary of one named parameter.
    pub fn summary(&self, name: &str) -> Option<&ParamSummary> {
        self.posterior.as_ref()?.iter().find(|p| p.name == name)
    }

    /// Writes `result.json`, `curve.csv` and the method's own artefacts.
    pub fn write_artifacts(&self, dir: &Path, series: &NormalizedSeries) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("result.json"), serde_json::to_string_pretty(self)?)?;
        let mut w = std::io::BufWriter::new(fs::File::create(dir.join("curve.csv"))?);
        writeln!(w, "t,x_data,x_model")?;
        for i in 0..series.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", series.t[i], series.x[i], self.curve[i])?;
        }
        w.flush()?;
        if let Some(tr) = &self.train {
            tr.write_history_csv(&dir.join("history.csv"))?;
            tr.net.save(&dir.join("model.json"), self.config.as_ref().map(|c| c.seed))?;
            if !tr.eps_history.is_empty() {
                let mut w = std::io::BufWriter::new(fs::File::create(dir.join("eps.csv"))?);
                writeln!(w, "epoch,mean,sd")?;
                for r in &tr.eps_history {
                    writeln!(w, "{},{:.16e},{:.16e}", r.epoch, r.mean, r.sd)?;
                }
                w.flush()?;
            }
        }
        if let Some(s) = &self.samples {
            let full = self.config.as_ref().is_some_and(|c| c.full_draws);
            let named = named_columns(s);
            let cols = if full || self.method == Some(Method::Bi) { None } else { Some(named.as_slice()) };
            if cols.is_none_or(|c| !c.is_empty()) {
                s.write_draws_csv(&dir.join("draws.csv"), cols)?;
            }
            s.write_summary_json(&dir.join("posterior.json"), Some(&named))?;
        }
        if let Some(b) = &self.band {
            b.write_csv(&dir.join("band.csv"))?;
        }
        Ok(())
    }
}

/// Columns of a posterior that are not network coordinates.
fn named_columns(s: &PosteriorSamples) -> Vec<usize> {
    (0..s.dim()).filter(|&j| !s.names()[j].starts_with("theta")).collect()
}

fn curve_amplitude(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).abs()).fold(0.0, f64::max)
}

/// Loads the data, dispatches to the trainer or sampler, evaluates, and
/// writes artefacts when an output directory is configured.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let series = cfg.data.load(cfg.smooth)?;
    if cfg.n_trn > series.len() {
        return Err(Error::Config(format!("n_trn {} exceeds the {} observations", cfg.n_trn, series.len())));
    }
    let start = Instant::now();
    let mut res = if cfg.method.is_bayesian() {
        run_sampler(cfg, &series)?
    } else {
        run_trainer(cfg, &series)?
    };
    res.method = Some(cfg.method);
    res.n_trn = cfg.n_trn;
    res.unknowns = cfg.method.unknowns(cfg.shape());
    res.config = Some(cfg.clone());
    res.wall_clock = start.elapsed().as_secs_f64();
    let l = res.losses();
    if ![Some(l.descriptive_data), Some(l.predictive_data), l.descriptive_phys, l.predictive_phys]
        .into_iter()
        .flatten()
        .all(f64::is_finite)
    {
        return Err(Error::Diagnostic(format!("{} produced non-finite losses", cfg.method)));
    }
    if let Some(dir) = &cfg.out_dir {
        res.write_artifacts(dir, &series)?;
    }
    Ok(res)
}

fn run_trainer(cfg: &ExperimentConfig, series: &NormalizedSeries) -> Result<ExperimentResult> {
    let train = split(series, cfg.n_trn)?.train;
    let tc = cfg.train_config();
    let grid = &series.t;
    let scaled = cfg.scaled();
    let tr = match cfg.method {
        Method::Nn => train_nn(&tc, &train)?,
        Method::Pinn => train_pinn(&tc, &train, grid, cfg.eps(), scaled)?,
        Method::Sapinn => train_sapinn(&tc, &train, grid, scaled)?,
        m => unreachable!("{m} is not trained"),
    };
    let losses = evaluate(&tr.net, tr.phys.as_ref(), series, cfg.n_trn, scaled)?;
    Ok(ExperimentResult {
        losses: Some(losses),
        phys: tr.phys,
        amplitude: amplitude(&tr.net, grid),
        final_loss: Some(tr.final_row().loss),
        eps: tr.eps_history.last().copied(),
        curve: grid.iter().map(|&t| tr.net.forward(t)).collect(),
        train: Some(tr),
        ..Default::default()
    })
}

fn run_sampler(cfg: &ExperimentConfig, series: &NormalizedSeries) -> Result<ExperimentResult> {
    let train = split(series, cfg.n_trn)?.train;
    let grid = &series.t;
    let scaled = cfg.scaled();
    let hmc = cfg.hmc_config();
    match cfg.method {
        Method::Bi => {
            let mut d = BiPosterior::new(&train);
            let u0 = d.initial();
            let adam = AdamConfig { lr: 1e-2, ..Default::default() };
            let u = find_map(&mut d, &u0, adam, cfg.map_iters())?;
            let s = hmc_sample(&d, &hmc, &u)?;
            let residuals = |u: &[f64]| -> Result<Vec<f64>> {
                let p = d.physics(u).expect("closed-form draws carry physics");
                let a = u[3].exp();
                grid.iter()
                    .map(|&t| {
                        let j = p.analytic_jet(a, t)?;
                        if scaled { p.residual_scaled(j) } else { Ok(p.residual(j)) }
                    })
                    .collect()
            };
            finish_sampler(&d, s, series, cfg.n_trn, residuals)
        }
        Method::Bnn => {
            let mut d = BnnPosterior::new(cfg.shape(), &train, cfg.sigma, cfg.seed)?;
            let u0 = d.initial();
            let u = find_map(&mut d, &u0, AdamConfig::default(), cfg.map_iters())?;
            let s = hmc_sample(&d, &hmc, &u)?;
            let mut res = finish_sampler(&d, s, series, cfg.n_trn, |_| Ok(Vec::new()))?;
            if let Some(l) = res.losses.as_mut() {
                l.descriptive_phys = None;
                l.predictive_phys = None;
            }
            Ok(res)
        }
        Method::Bpinn => {
            let mut d = BpinnPosterior::new(cfg.shape(), &train, grid, scaled, cfg.sigma, cfg.sigma_r, cfg.seed)?;
            let u0 = d.initial();
            let u = find_map(&mut d, &u0, AdamConfig::default(), cfg.map_iters())?;
            let s = hmc_sample(&d, &hmc, &u)?;
            let mut rd = d.clone();
            finish_sampler(&d, s, series, cfg.n_trn, move |u| rd.residuals(u))
        }
        m => unreachable!("{m} is not sampled"),
    }
}

/// Band, losses and summaries shared by all sampled methods. Data losses
/// use the median curve; physics losses average the squared residual over
/// draws.
fn finish_sampler<D, R>(
    d: &D,
    s: PosteriorSamples,
    series: &NormalizedSeries,
    n_trn: usize,
    mut residuals: R,
) -> Result<ExperimentResult>
where
    D: LogDensity,
    R: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let grid = &series.t;
    let band = posterior_predictive(&s, grid, BAND_QUANTILES, |u| d.curve(u, grid))?;

    let mut ms = vec![0.0; grid.len()];
    let mut any = false;
    for i in 0..s.n_draws() {
        let r = residuals(s.row(i))?;
        if r.is_empty() {
            break;
        }
        any = true;
        for (m, v) in ms.iter_mut().zip(&r) {
            *m += v * v;
        }
    }
    // root of the draw-averaged square, so the report's mean square is the average
    let rms: Vec<f64> = ms.iter().map(|m| (m / s.n_draws() as f64).sqrt()).collect();
    let losses = report_from_curve(&band.median, any.then_some(rms.as_slice()), series, n_trn)?;

    let all = summarize(&s)?;
    let named: Vec<ParamSummary> = all.into_iter().filter(|p| !p.name.starts_with("theta")).collect();
    let mean = |n: &str| named.iter().find(|p| p.name == n).map(|p| p.mean);
    let phys = match (mean("c"), mean("k"), mean("x0")) {
        (Some(c), Some(k), Some(x0)) => Some(PhysParams::new(c, k, x0)),
        _ => None,
    };
    Ok(ExperimentResult {
        losses: Some(losses),
        phys,
        posterior: Some(named),
        band_width: Some(band.mean_width()),
        amplitude: curve_amplitude(&band.median),
        acceptance_rate: Some(s.acceptance_rate),
        diagnostic: s.diagnostic.clone(),
        curve: band.median.clone(),
        band: Some(band),
        samples: Some(s),
        ..Default::default()
    })
}
