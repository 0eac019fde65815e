use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::{HmcConfig, NET_SIGMA};
use crate::error::{Error, Result};
use crate::network::NetShape;
use crate::oscillator::PhysParams;
use crate::timeseries::{
    load_cumulative_csv, moving_average, normalize, synthesize, NormalizedSeries,
};
use crate::train::TrainConfig;

/// The cumulative-count snapshot shipped with the repository.
pub const BUNDLED_DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/world_cumulative_2021.csv");

/// Moving-average window of the smoothed series, in days.
pub const SMOOTHING_WINDOW: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nn,
    Pinn,
    Sapinn,
    Bi,
    Bnn,
    Bpinn,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Nn, Method::Pinn, Method::Sapinn, Method::Bi, Method::Bnn, Method::Bpinn];

    pub fn name(self) -> &'static str {
        match self {
            Method::Nn => "nn",
            Method::Pinn => "pinn",
            Method::Sapinn => "sapinn",
            Method::Bi => "bi",
            Method::Bnn => "bnn",
            Method::Bpinn => "bpinn",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Nn => "NN",
            Method::Pinn => "PINN",
            Method::Sapinn => "SA-PINN",
            Method::Bi => "BI",
            Method::Bnn => "BNN",
            Method::Bpinn => "B-PINN",
        }
    }

    pub fn is_bayesian(self) -> bool {
        matches!(self, Method::Bi | Method::Bnn | Method::Bpinn)
    }

    pub fn has_physics(self) -> bool {
        !matches!(self, Method::Nn | Method::Bnn)
    }

    /// Number of unknowns as counted in the method comparison: point
    /// estimates count once, distributions count a mean and an sd, and the
    /// self-adaptive weight counts as one.
    pub fn unknowns(self, shape: &NetShape) -> usize {
        let p = shape.n_params();
        match self {
            Method::Nn => p,
            Method::Pinn => p + 3,
            Method::Sapinn => p + 4,
            Method::Bi => 3 * 2,
            Method::Bnn => 2 * p,
            Method::Bpinn => 2 * (p + 3),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    /// Cumulative counts in the bundled layout; `None` uses the bundled file.
    Bundled { path: Option<PathBuf> },
    /// An already normalised `t,x` series.
    Series { path: PathBuf },
    /// Closed-form curve with optional noise.
    Synthetic {
        c: f64,
        k: f64,
        x0: f64,
        amplitude: f64,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Bundled { path: None }
    }
}

impl DataSource {
    pub fn load(&self, smooth: bool) -> Result<NormalizedSeries> {
        match self {
            DataSource::Bundled { path } => {
                let p = path.as_deref().unwrap_or(Path::new(BUNDLED_DATA));
                let daily = load_cumulative_csv(p)?;
                let daily = if smooth { moving_average(&daily, SMOOTHING_WINDOW)? } else { daily };
                Ok(normalize(&daily))
            }
            DataSource::Series { path } => NormalizedSeries::read_csv(path),
            DataSource::Synthetic { c, k, x0, amplitude, noise_sd, seed } => {
                synthesize(&PhysParams::new(*c, *k, *x0), *amplitude, None, *noise_sd, *seed, 365)
            }
        }
    }
}

/// One run of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub method: Method,
    pub data: DataSource,
    /// seven-day moving average of the bundled counts
    pub smooth: bool,
    pub n_trn: usize,
    /// Fixed data/physics weight, plain PINN only (default 10⁻³).
    pub eps: Option<f64>,
    /// Optimiser settings and network shape. The seed is taken from `seed`.
    pub train: TrainConfig,
    /// Sampler settings; method defaults when absent. The seed is taken from `seed`.
    pub hmc: Option<HmcConfig>,
    /// Residual divided by the stiffness; defaults to true for B-PINN only.
    pub scaled: Option<bool>,
    /// Data likelihood width of the network posteriors.
    pub sigma: f64,
    /// Residual likelihood width.
    pub sigma_r: f64,
    /// Adam iterations for the maximum a posteriori start of the sampler;
    /// the training epoch budget for network posteriors when absent.
    pub map_iters: Option<usize>,
    /// Write every coordinate of network posterior draws, not only the named ones.
    pub full_draws: bool,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Pinn,
            data: DataSource::default(),
            smooth: false,
            n_trn: 225,
            eps: None,
            train: TrainConfig::default(),
            hmc: None,
            scaled: None,
            sigma: NET_SIGMA,
            sigma_r: NET_SIGMA,
            map_iters: None,
            full_draws: false,
            out_dir: None,
            seed: 0,
        }
    }
}

pub const DEFAULT_EPS: f64 = 1e-3;

impl ExperimentConfig {
    pub fn new(method: Method) -> Self {
        Self { method, ..Default::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(DEFAULT_EPS)
    }

    pub fn scaled(&self) -> bool {
        self.scaled.unwrap_or(self.method == Method::Bpinn)
    }

    pub fn shape(&self) -> &NetShape {
        &self.train.shape
    }

    /// Sampler settings with the run seed applied.
    pub fn hmc_config(&self) -> HmcConfig {
        let mut h = self.hmc.clone().unwrap_or_else(|| match self.method {
            Method::Bi => HmcConfig { burn_in: 2000, samples: 4000, chains: 2, ..Default::default() },
            _ => HmcConfig::default(),
        });
        h.seed = self.seed;
        h
    }

    /// Training settings with the run seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn map_iters(&self) -> usize {
        self.map_iters.unwrap_or(match self.method {
            Method::Bi => 5_000,
            _ => self.train.epochs,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_some() && self.method != Method::Pinn {
            return Err(Error::Config(format!("eps only applies to pinn, not {}", self.method)));
        }
        if !(0.0..=1.0).contains(&self.eps()) {
            return Err(Error::Config(format!("eps must lie in [0, 1], got {}", self.eps())));
        }
        if self.n_trn == 0 {
            return Err(Error::Config("n_trn must be at least 1".into()));
        }
        if self.smooth && !matches!(self.data, DataSource::Bundled { .. }) {
            return Err(Error::Config("smoothing applies to daily counts only".into()));
        }
        if !(self.sigma > 0.0 && self.sigma_r > 0.0) {
            return Err(Error::Config("likelihood widths must be positive".into()));
        }
        if let DataSource::Synthetic { c, k, x0, amplitude, noise_sd, .. } = &self.data {
            let p = PhysParams::new(*c, *k, *x0);
            if !(p.k > 0.0 && p.is_underdamped() && *amplitude >= 0.0 && *noise_sd >= 0.0) {
                return Err(Error::Config("synthetic data needs an underdamped oscillator".into()));
            }
        }
        self.train_config().validate()?;
        if self.method.is_bayesian() {
            self.hmc_config().validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_counts() {
        let s = NetShape::default();
        let got: Vec<usize> = Method::ALL.iter().map(|m| m.unknowns(&s)).collect();
        assert_eq!(got, [1153, 1156, 1157, 6, 2306, 2312]);
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let c = ExperimentConfig::from_toml("method = \"bi\"\nn_trn = 150\n").unwrap();
        assert_eq!(c.method, Method::Bi);
        assert_eq!(c.n_trn, 150);
        assert_eq!(c.hmc_config().chains, 2);
        assert_eq!(c.hmc_config().samples, 4000);
        assert!(!c.scaled());
        let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);

        let s = ExperimentConfig::from_toml(
            "method = \"pinn\"\n[data]\nkind = \"synthetic\"\nc = 1.0\nk = 400.0\nx0 = 0.5\namplitude = 0.3\n",
        )
        .unwrap();
        assert!(matches!(s.data, DataSource::Synthetic { noise_sd, .. } if noise_sd == 0.0));
        assert!(ExperimentConfig::from_toml("method = \"svm\"").is_err());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig::new(Method::Nn);
        c.eps = Some(0.1);
        assert!(c.validate().is_err());
        c.method = Method::Pinn;
        assert!(c.validate().is_ok());
        c.eps = Some(1.5);
        assert!(c.validate().is_err());
        let c = ExperimentConfig { n_trn: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            smooth: true,
            data: DataSource::Series { path: "x.csv".into() },
            ..Default::default()
        };
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::new(Method::Bpinn).scaled());
    }

    #[test]
    fn bundled_data_loads() {
        let s = DataSource::default().load(false).unwrap();
        assert_eq!(s.len(), 365);
        assert!((s.x[0] - 0.572602).abs() < 1e-12);
        let m = DataSource::default().load(true).unwrap();
        assert_eq!(m.len(), 365);
    }
}
