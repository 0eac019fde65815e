use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::Result;
use crate::network::NetShape;

use super::config::{ExperimentConfig, Method};
use super::run::{run, ExperimentResult};

pub const EPS_VALUES: [f64; 5] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
pub const TRAIN_SIZES: [usize; 7] = [150, 175, 200, 225, 250, 275, 300];
pub const TRAINSIZE_METHODS: [Method; 3] = [Method::Pinn, Method::Sapinn, Method::Bpinn];
pub const GRID_LAYERS: [usize; 2] = [1, 2];
pub const GRID_NODES: [usize; 5] = [2, 4, 8, 16, 32];
/// Reduced epoch budget of the sweeps.
pub const SWEEP_EPOCHS: usize = 20_000;

/// Runs every config on a pool of worker threads; results keep input order.
pub fn run_all(cfgs: Vec<ExperimentConfig>) -> Vec<Result<ExperimentResult>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(cfgs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ExperimentResult>>>> = cfgs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfgs.len() {
                    break;
                }
                let r = run(&cfgs[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every cell ran")).collect()
}

fn collect(results: Vec<Result<ExperimentResult>>) -> Result<Vec<ExperimentResult>> {
    results.into_iter().collect()
}

fn with_dir(base: &ExperimentConfig, sub: &str) -> Option<std::path::PathBuf> {
    base.out_dir.as_ref().map(|d| d.join(sub))
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

fn write_table(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

/// Plain PINN at each weight; writes `epsilon_sweep.csv`.
pub fn sweep_epsilon(base: &ExperimentConfig, eps: &[f64]) -> Result<Vec<ExperimentResult>> {
    let cfgs = eps
        .iter()
        .map(|&e| ExperimentConfig {
            method: Method::Pinn,
            eps: Some(e),
            out_dir: with_dir(base, &format!("eps_{e:e}")),
            ..base.clone()
        })
        .collect();
    let res = collect(run_all(cfgs))?;
    if let Some(dir) = &base.out_dir {
        let rows: Vec<String> = eps
            .iter()
            .zip(&res)
            .map(|(e, r)| {
                let l = r.losses();
                let p = r.phys;
                format!(
                    "{e:e},{:.16e},{:.16e},{},{},{:.16e},{},{},{}",
                    l.descriptive_data,
                    l.predictive_data,
                    opt(l.descriptive_phys),
                    opt(l.predictive_phys),
                    r.amplitude,
                    opt(p.map(|p| p.c)),
                    opt(p.map(|p| p.k)),
                    opt(p.map(|p| p.x0)),
                )
            })
            .collect();
        write_table(
            &dir.join("epsilon_sweep.csv"),
            "eps,descriptive_data,predictive_data,descriptive_phys,predictive_phys,amplitude,c,k,x0",
            &rows,
        )?;
    }
    Ok(res)
}

/// Each method at each training-set size; writes `trainsize_sweep.csv`.
pub fn sweep_trainsize(base: &ExperimentConfig, sizes: &[usize], methods: &[Method]) -> Result<Vec<ExperimentResult>> {
    let mut cfgs = Vec::new();
    for &m in methods {
        for &n in sizes {
            cfgs.push(ExperimentConfig {
                method: m,
                n_trn: n,
                eps: (m == Method::Pinn).then(|| base.eps()),
                out_dir: with_dir(base, &format!("{m}_n{n}")),
                ..base.clone()
            });
        }
    }
    let res = collect(run_all(cfgs))?;
    if let Some(dir) = &base.out_dir {
        let rows: Vec<String> = res
            .iter()
            .map(|r| {
                let l = r.losses();
                format!(
                    "{},{},{:.16e},{:.16e}",
                    r.method.map_or("", |m| m.name()),
                    r.n_trn,
                    l.descriptive_data,
                    l.predictive_data
                )
            })
            .collect();
        write_table(&dir.join("trainsize_sweep.csv"), "method,n_trn,descriptive_data,predictive_data", &rows)?;
    }
    Ok(res)
}

/// Plain PINN over network depths and widths; writes `grid_search.csv`.
pub fn grid_search(base: &ExperimentConfig, layers: &[usize], nodes: &[usize]) -> Result<Vec<ExperimentResult>> {
    let mut cfgs = Vec::new();
    for &l in layers {
        for &n in nodes {
            let mut c = ExperimentConfig {
                method: Method::Pinn,
                eps: Some(base.eps()),
                out_dir: with_dir(base, &format!("layers{l}_nodes{n}")),
                ..base.clone()
            };
            c.train.shape = NetShape::uniform(l, n)?;
            cfgs.push(c);
        }
    }
    let res = collect(run_all(cfgs))?;
    if let Some(dir) = &base.out_dir {
        let rows: Vec<String> = res
            .iter()
            .map(|r| {
                let c = r.config.as_ref().expect("run echoes its config");
                let w = c.shape().widths();
                let l = r.losses();
                format!(
                    "{},{},{},{},{:.16e},{:.16e}",
                    w.len() - 2,
                    w[1],
                    c.shape().n_params(),
                    opt(r.final_loss),
                    l.descriptive_data,
                    l.predictive_data
                )
            })
            .collect();
        write_table(
            &dir.join("grid_search.csv"),
            "hidden_layers,nodes,parameters,final_loss,descriptive_data,predictive_data",
            &rows,
        )?;
    }
    Ok(res)
}

/// Two B-PINN runs on identical data and seeds, unscaled then scaled
/// residual; writes `scaling.csv`.
pub fn compare_scaling(base: &ExperimentConfig) -> Result<(ExperimentResult, ExperimentResult)> {
    let cfgs = [false, true]
        .iter()
        .map(|&s| ExperimentConfig {
            method: Method::Bpinn,
            scaled: Some(s),
            eps: None,
            out_dir: with_dir(base, if s { "scaled" } else { "unscaled" }),
            ..base.clone()
        })
        .collect();
    let mut res = collect(run_all(cfgs))?;
    let scaled = res.pop().expect("two runs");
    let unscaled = res.pop().expect("two runs");
    if let Some(dir) = &base.out_dir {
        let rows: Vec<String> = [(&unscaled, false), (&scaled, true)]
            .iter()
            .map(|(r, s)| {
                let l = r.losses();
                let p = r.phys;
                format!(
                    "{s},{},{:.16e},{:.16e},{},{},{}",
                    opt(r.band_width),
                    l.descriptive_data,
                    l.predictive_data,
                    opt(p.map(|p| p.c)),
                    opt(p.map(|p| p.k)),
                    opt(p.map(|p| p.x0)),
                )
            })
            .collect();
        write_table(&dir.join("scaling.csv"), "scaled,band_width,descriptive_data,predictive_data,c,k,x0", &rows)?;
    }
    Ok((unscaled, scaled))
}
