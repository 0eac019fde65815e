use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bpinn::bayes::HmcConfig;
use bpinn::experiments::{
    self, collect_results, comparison_table, emit_report, DataSource, ExperimentConfig, ExperimentResult,
    Method, EPS_VALUES, GRID_LAYERS, GRID_NODES, SWEEP_EPOCHS, TRAINSIZE_METHODS, TRAIN_SIZES,
};
use bpinn::network::NetShape;
use bpinn::oscillator::PhysParams;
use bpinn::timeseries::synthesize;
use bpinn::Error;

#[derive(Parser)]
#[command(name = "bpinn", version, about = "Oscillator fits of seasonal case counts with neural and Bayesian models")]
struct Cli {
    /// Root directory for all outputs.
    #[arg(long, global = true, env = "BPINN_OUT", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a normalised `t,x` series, synthetic or from the bundled counts.
    GenData(GenArgs),
    /// Train a network by gradient descent.
    Fit {
        #[arg(value_enum)]
        method: FitMethod,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample a posterior by Hamiltonian Monte Carlo.
    Infer {
        #[arg(value_enum)]
        method: InferMethod,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sweep the data/physics weight or the training-set size.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        /// Comma-separated values instead of the default list.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        /// Use the full epoch budget instead of the reduced sweep budget.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Plain PINN over one and two hidden layers and several widths.
    GridSearch {
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Paired B-PINN runs with unscaled and scaled residual.
    CompareScaling {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Collect every result below a directory into a summary and a table.
    Report {
        /// Directory to scan; defaults to the output root.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMethod {
    Nn,
    Pinn,
    Sapinn,
}

#[derive(Clone, Copy, ValueEnum)]
enum InferMethod {
    Bi,
    Bnn,
    Bpinn,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Epsilon,
    Trainsize,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Source {
    Synthetic,
    Bundled,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "synthetic")]
    source: Source,
    /// Seven-day moving average (bundled source only).
    #[arg(long)]
    smooth: bool,
    #[arg(long, default_value_t = 1.2)]
    c: f64,
    #[arg(long, default_value_t = 400.0)]
    k: f64,
    #[arg(long, default_value_t = 0.55)]
    x0: f64,
    #[arg(long, default_value_t = 0.3)]
    amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File name inside the output root.
    #[arg(short, long, default_value = "series.csv")]
    output: PathBuf,
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML experiment configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Subdirectory of the output root.
    #[arg(long)]
    name: Option<String>,
    /// Cumulative counts in the bundled layout.
    #[arg(long, conflicts_with = "series")]
    data: Option<PathBuf>,
    /// Normalised `t,x` series, e.g. from gen-data.
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long)]
    smooth: bool,
    #[arg(long)]
    n_trn: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Divide the residual by the stiffness.
    #[arg(long)]
    scaled: Option<bool>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    leapfrog: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    map_iters: Option<usize>,
    /// Write every network coordinate of posterior draws.
    #[arg(long)]
    full_draws: bool,
}

impl RunArgs {
    fn build(&self, method: Method, out: &Path, default_name: &str) -> bpinn::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_toml(&std::fs::read_to_string(p)?)?,
            None => ExperimentConfig::default(),
        };
        c.method = method;
        if let Some(p) = &self.data {
            c.data = DataSource::Bundled { path: Some(p.clone()) };
        }
        if let Some(p) = &self.series {
            c.data = DataSource::Series { path: p.clone() };
        }
        c.smooth |= self.smooth;
        c.full_draws |= self.full_draws;
        if let Some(v) = self.n_trn {
            c.n_trn = v;
        }
        if self.eps.is_some() {
            c.eps = self.eps;
        }
        if let Some(v) = self.epochs {
            c.train.epochs = v;
        }
        if let Some(v) = self.lr {
            c.train.adam.lr = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.hidden.is_some() || self.nodes.is_some() {
            let w = c.train.shape.widths();
            let hidden = self.hidden.unwrap_or(w.len() - 2);
            let nodes = self.nodes.unwrap_or(w[1]);
            c.train.shape = NetShape::uniform(hidden, nodes).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.scaled.is_some() {
            c.scaled = self.scaled;
        }
        if self.map_iters.is_some() {
            c.map_iters = self.map_iters;
        }
        if self.burn_in.is_some()
            || self.samples.is_some()
            || self.chains.is_some()
            || self.leapfrog.is_some()
            || self.step_size.is_some()
        {
            let mut h: HmcConfig = c.hmc_config();
            h.burn_in = self.burn_in.unwrap_or(h.burn_in);
            h.samples = self.samples.unwrap_or(h.samples);
            h.chains = self.chains.unwrap_or(h.chains);
            h.n_leapfrog = self.leapfrog.unwrap_or(h.n_leapfrog);
            h.step_size = self.step_size.unwrap_or(h.step_size);
            c.hmc = Some(h);
        }
        c.out_dir = Some(out.join(self.name.as_deref().unwrap_or(default_name)));
        Ok(c)
    }
}

fn describe(r: &ExperimentResult) {
    let l = r.losses();
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
    println!(
        "{:<7} n_trn={} data {:.4e}/{:.4e} phys {}/{} ({:.1}s)",
        r.method.map_or("?", |m| m.label()),
        r.n_trn,
        l.descriptive_data,
        l.predictive_data,
        opt(l.descriptive_phys),
        opt(l.predictive_phys),
        r.wall_clock
    );
    if let Some(ps) = &r.posterior {
        for p in ps {
            println!("  {:<6} {:.5} ± {:.5}  [{:.5}, {:.5}]", p.name, p.mean, p.sd, p.q025, p.q975);
        }
    } else if let Some(p) = r.phys {
        println!("  c {:.5}  k {:.5}  x0 {:.5}", p.c, p.k, p.x0);
    }
    if let Some(e) = r.eps {
        println!("  eps {:.4e} ± {:.4e}", e.mean, e.sd);
    }
    if let Some(d) = &r.diagnostic {
        eprintln!("diagnostic: {d}");
    }
}

fn parse_list<T: std::str::FromStr>(v: &[String]) -> bpinn::Result<Vec<T>> {
    v.iter()
        .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("cannot parse list value {s:?}"))))
        .collect()
}

/// Process outcome: diagnostics are reported after artefacts are written.
fn finish(results: &[ExperimentResult]) -> bpinn::Result<bool> {
    for r in results {
        describe(r);
    }
    Ok(results.iter().all(|r| r.diagnostic.is_none()))
}

fn execute(cli: Cli) -> bpinn::Result<bool> {
    let out = &cli.out;
    match cli.cmd {
        Cmd::GenData(g) => {
            let series = if g.source == Source::Bundled {
                DataSource::default().load(g.smooth)?
            } else {
                if g.smooth {
                    return Err(Error::Config("--smooth applies to the bundled source only".into()));
                }
                let p = PhysParams::new(g.c, g.k, g.x0);
                if !p.is_underdamped() {
                    return Err(Error::Config("synthetic parameters must be underdamped".into()));
                }
                synthesize(&p, g.amplitude, None, g.noise, g.seed, 365)?
            };
            std::fs::create_dir_all(out)?;
            let path = out.join(&g.output);
            series.write_csv(&path)?;
            println!("{}", path.display());
            Ok(true)
        }
        Cmd::Fit { method, run } => {
            let m = match method {
                FitMethod::Nn => Method::Nn,
                FitMethod::Pinn => Method::Pinn,
                FitMethod::Sapinn => Method::Sapinn,
            };
            let c = run.build(m, out, m.name())?;
            finish(&[experiments::run(&c)?])
        }
        Cmd::Infer { method, run } => {
            let m = match method {
                InferMethod::Bi => Method::Bi,
                InferMethod::Bnn => Method::Bnn,
                InferMethod::Bpinn => Method::Bpinn,
            };
            let c = run.build(m, out, m.name())?;
            finish(&[experiments::run(&c)?])
        }
        Cmd::Sweep { kind, values, full, run } => {
            let (method, name) = match kind {
                SweepKind::Epsilon => (Method::Pinn, "sweep_epsilon"),
                SweepKind::Trainsize => (Method::Pinn, "sweep_trainsize"),
            };
            let mut c = run.build(method, out, name)?;
            if !full && run.epochs.is_none() {
                c.train.epochs = SWEEP_EPOCHS;
            }
            let res = match kind {
                SweepKind::Epsilon => {
                    let eps = if values.is_empty() { EPS_VALUES.to_vec() } else { parse_list(&values)? };
                    c.eps = None;
                    experiments::sweep_epsilon(&c, &eps)?
                }
                SweepKind::Trainsize => {
                    let ns = if values.is_empty() { TRAIN_SIZES.to_vec() } else { parse_list(&values)? };
                    experiments::sweep_trainsize(&c, &ns, &TRAINSIZE_METHODS)?
                }
            };
            finish(&res)
        }
        Cmd::GridSearch { full, run } => {
            let mut c = run.build(Method::Pinn, out, "grid_search")?;
            if !full && run.epochs.is_none() {
                c.train.epochs = SWEEP_EPOCHS;
            }
            finish(&experiments::grid_search(&c, &GRID_LAYERS, &GRID_NODES)?)
        }
        Cmd::CompareScaling { run } => {
            let c = run.build(Method::Bpinn, out, "compare_scaling")?;
            let (u, s) = experiments::compare_scaling(&c)?;
            finish(&[u, s])
        }
        Cmd::Report { input } => {
            let root = input.unwrap_or_else(|| out.clone());
            let res = collect_results(&root)?;
            emit_report(&res, out)?;
            print!("{}", comparison_table(&res));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } | Error::Dimension { .. } => {
                    ExitCode::from(2)
                }
                Error::Diagnostic(_) | Error::NonFinite { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
