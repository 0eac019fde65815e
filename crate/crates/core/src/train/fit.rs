use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetParams, NetShape};
use crate::oscillator::PhysParams;
use crate::timeseries::NormalizedSeries;

use super::adam::{Adam, AdamConfig};
use super::loss::{logit, sigmoid};
use super::objective::{phys_from_log, phys_to_log, Collocation, ObjectiveValue};

/// Starting physics parameters: the centres of the log-normal priors.
pub const PHYS_INIT: PhysParams = PhysParams::new(2.2, 350.0, 0.56);

/// Initial self-adaptive weight at every collocation point.
pub const SA_EPS_INIT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    pub shape: NetShape,
    /// Stride between history rows; the first and last epoch are always kept.
    pub record_every: usize,
    pub phys_init: PhysParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 60_000,
            adam: AdamConfig::default(),
            seed: 0,
            shape: NetShape::default(),
            record_every: 100,
            phys_init: PHYS_INIT,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.adam.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.adam.lr)));
        }
        if !(0.0..1.0).contains(&self.adam.beta1) || !(0.0..1.0).contains(&self.adam.beta2) {
            return Err(Error::Config("ADAM betas must lie in [0, 1)".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        let p = &self.phys_init;
        if !(p.c > 0.0 && p.k > 0.0 && p.x0 > 0.0) {
            return Err(Error::Config("initial physics parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub loss: f64,
    /// mean squared data misfit
    pub data: f64,
    /// mean squared residual
    pub phys: Option<f64>,
    pub phys_params: Option<PhysParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub epoch: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub net: NetParams,
    pub phys: Option<PhysParams>,
    pub history: Vec<HistoryRow>,
    pub eps_history: Vec<EpsRecord>,
    /// Final self-adaptive weights over the collocation grid.
    pub eps: Option<Vec<f64>>,
}

impl TrainResult {
    pub fn final_row(&self) -> &HistoryRow {
        self.history.last().expect("history is never empty")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }

    /// `epoch,L,L_data,L_phys,c,k,x0`; cells without a value are left empty.
    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "epoch,L,L_data,L_phys,c,k,x0")?;
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
        for r in &self.history {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{},{},{},{}",
                r.epoch,
                r.loss,
                r.data,
                opt(r.phys),
                opt(r.phys_params.map(|p| p.c)),
                opt(r.phys_params.map(|p| p.k)),
                opt(r.phys_params.map(|p| p.x0)),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

struct SelfAdaptive {
    raw: Vec<f64>,
    opt: Adam,
    grad: Vec<f64>,
    eps: Vec<f64>,
}

impl SelfAdaptive {
    fn new(n: usize, adam: AdamConfig) -> Self {
        Self {
            raw: vec![logit(SA_EPS_INIT); n],
            opt: Adam::new(adam, n),
            grad: vec![0.0; n],
            eps: vec![SA_EPS_INIT; n],
        }
    }

    fn refresh(&mut self) {
        for (e, r) in self.eps.iter_mut().zip(&self.raw) {
            *e = sigmoid(*r);
        }
    }

    /// Data point `i` takes `1 − ε` of its grid point, collocation point `j` takes `ε_j`.
    fn apply(&self, obj: &mut Collocation, idx: &[usize]) {
        let n_data = idx.len() as f64;
        let n_grid = self.eps.len() as f64;
        for (w, &g) in obj.data_weights.iter_mut().zip(idx) {
            *w = (1.0 - self.eps[g]) / n_data;
        }
        for (w, e) in obj.phys_weights.iter_mut().zip(&self.eps) {
            *w = e / n_grid;
        }
    }

    /// Gradient of the composite loss with respect to the raw weights, from
    /// the errors and residuals of the last evaluation.
    fn raw_gradient(&mut self, idx: &[usize], errors: &[f64], residuals: &[f64]) {
        let n_grid = self.eps.len() as f64;
        let n_data = idx.len() as f64;
        for (g, r) in self.grad.iter_mut().zip(residuals) {
            *g = r * r / n_grid;
        }
        for (&j, e) in idx.iter().zip(errors) {
            self.grad[j] -= e * e / n_data;
        }
        for (g, e) in self.grad.iter_mut().zip(&self.eps) {
            *g *= e * (1.0 - e);
        }
    }

    /// One descent step on the composite loss, jointly with the network.
    fn step(&mut self, idx: &[usize], errors: &[f64], residuals: &[f64]) -> Result<()> {
        self.raw_gradient(idx, errors, residuals);
        self.opt.step(&mut self.raw, &self.grad)?;
        self.refresh();
        Ok(())
    }
}

fn record(
    epoch: usize,
    v: &ObjectiveValue,
    obj: &Collocation,
    params: &[f64],
) -> HistoryRow {
    let n_data = obj.n_data().max(1) as f64;
    let physics = obj.has_physics();
    HistoryRow {
        epoch,
        loss: v.value,
        data: v.data_sse / n_data,
        phys: physics.then(|| v.phys_sse / obj.n_grid() as f64),
        phys_params: physics.then(|| phys_from_log(&params[obj.n_net()..])),
    }
}

fn descend(
    cfg: &TrainConfig,
    mut obj: Collocation,
    mut params: Vec<f64>,
    mut sa: Option<SelfAdaptive>,
) -> Result<TrainResult> {
    cfg.validate()?;
    let idx: Vec<usize> = match (&sa, obj.data_indices()) {
        (Some(_), Some(idx)) => idx.to_vec(),
        (Some(_), None) => {
            return Err(Error::invalid("self-adaptive weights need training points on the collocation grid"))
        }
        _ => Vec::new(),
    };
    let mut opt = Adam::new(cfg.adam, params.len());
    let mut grad = vec![0.0; params.len()];
    let mut history = Vec::new();
    let mut eps_history = Vec::new();

    for epoch in 0..=cfg.epochs {
        if let Some(sa) = &sa {
            sa.apply(&mut obj, &idx);
        }
        let last = epoch == cfg.epochs;
        let v = obj.eval(&params, (!last).then_some(&mut grad[..]))?;
        if !v.value.is_finite() {
            return Err(Error::NonFinite { what: "loss", epoch });
        }
        if epoch % cfg.record_every == 0 || last {
            history.push(record(epoch, &v, &obj, &params));
            if let Some(sa) = &sa {
                let (mean, sd) = mean_sd(&sa.eps);
                eps_history.push(EpsRecord { epoch, mean, sd });
            }
        }
        if last {
            break;
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite { what: "gradient", epoch });
        }
        opt.step(&mut params, &grad)?;
        if let Some(sa) = sa.as_mut() {
            sa.step(&idx, obj.data_errors(), obj.residuals())?;
        }
    }

    let n_net = obj.n_net();
    let phys = obj.has_physics().then(|| phys_from_log(&params[n_net..]));
    params.truncate(n_net);
    Ok(TrainResult {
        net: NetParams::new(cfg.shape.clone(), params)?,
        phys,
        history,
        eps_history,
        eps: sa.map(|s| s.eps),
    })
}

fn require_data(train: &NormalizedSeries) -> Result<()> {
    if train.is_empty() {
        return Err(Error::invalid("empty training series"));
    }
    Ok(())
}

/// Full-batch ADAM on the mean squared data misfit alone.
pub fn train_nn(cfg: &TrainConfig, train: &NormalizedSeries) -> Result<TrainResult> {
    require_data(train)?;
    let obj = Collocation::data_only(&cfg.shape, train, 1.0 / train.len() as f64);
    let params = NetParams::init(cfg.shape.clone(), cfg.seed).theta;
    descend(cfg, obj, params, None)
}

fn pinn_start(cfg: &TrainConfig) -> Vec<f64> {
    let mut params = NetParams::init(cfg.shape.clone(), cfg.seed).theta;
    params.extend(phys_to_log(&cfg.phys_init));
    params
}

/// Network and log-space physics parameters trained jointly on
/// `(1 − ε) L_data + ε L_phys`, the residual taken over `grid`.
pub fn train_pinn(
    cfg: &TrainConfig,
    train: &NormalizedSeries,
    grid: &[f64],
    eps: f64,
    scaled: bool,
) -> Result<TrainResult> {
    require_data(train)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Config(format!("ε must lie in [0, 1], got {eps}")));
    }
    let obj = Collocation::with_physics(
        &cfg.shape,
        train,
        grid,
        scaled,
        (1.0 - eps) / train.len() as f64,
        eps / grid.len() as f64,
    )?;
    descend(cfg, obj, pinn_start(cfg), None)
}

/// PINN with one learned weight per collocation point. Training times must
/// be collocation points.
pub fn train_sapinn(
    cfg: &TrainConfig,
    train: &NormalizedSeries,
    grid: &[f64],
    scaled: bool,
) -> Result<TrainResult> {
    require_data(train)?;
    let obj = Collocation::with_physics(&cfg.shape, train, grid, scaled, 0.0, 0.0)?;
    let sa = SelfAdaptive::new(grid.len(), cfg.adam);
    descend(cfg, obj, pinn_start(cfg), Some(sa))
}
