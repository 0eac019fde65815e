//! Bayesian inference: priors, likelihoods, posteriors for the closed-form
//! model and the two network models, and a Hamiltonian Monte Carlo sampler.

mod density;
mod hmc;
mod posterior;
mod summary;

pub use density::{log_lik_data, log_lik_physics, log_prior, Prior, PriorSpec, Transform};
pub use hmc::{hmc_sample, HmcConfig, MIN_ACCEPTANCE};
pub use posterior::{
    find_map, physics_priors, BiPosterior, BnnPosterior, BpinnPosterior, LogDensity, AMPLITUDE_PRIOR,
    NET_PRIOR_SD, NET_SIGMA, PHYS_PRIOR_SD,
};
pub use summary::{posterior_predictive, summarize, CredibleBand, ParamSummary, PosteriorSamples};
