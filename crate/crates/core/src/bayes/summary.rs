//! Posterior draws, their summaries and posterior-predictive bands.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::density::Transform;

/// Pooled draws in unconstrained space, one row per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    names: Vec<String>,
    transforms: Vec<Transform>,
    draws: Vec<f64>,
    /// fraction of post-burn-in proposals accepted
    pub acceptance_rate: f64,
    /// adapted step size of each chain
    pub step_sizes: Vec<f64>,
    /// set when the run should not be trusted
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

impl PosteriorSamples {
    pub fn new(
        names: Vec<String>,
        transforms: Vec<Transform>,
        draws: Vec<f64>,
        acceptance_rate: f64,
        step_sizes: Vec<f64>,
        diagnostic: Option<String>,
    ) -> Result<Self> {
        let dim = names.len();
        if transforms.len() != dim {
            return Err(Error::Dimension { expected: dim, actual: transforms.len() });
        }
        if dim == 0 || draws.len() % dim != 0 {
            return Err(Error::invalid(format!("{} values do not form rows of {dim}", draws.len())));
        }
        if !(0.0..=1.0).contains(&acceptance_rate) {
            return Err(Error::invalid(format!("acceptance rate {acceptance_rate} outside [0, 1]")));
        }
        Ok(Self { names, transforms, draws, acceptance_rate, step_sizes, diagnostic })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn n_draws(&self) -> usize {
        self.draws.len() / self.dim()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    /// Flat row-major unconstrained draws.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.draws[i * d..(i + 1) * d]
    }

    /// One unconstrained coordinate across all draws.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().skip(j).step_by(self.dim()).copied().collect()
    }

    /// One coordinate across all draws, mapped to its natural scale.
    pub fn constrained_column(&self, j: usize) -> Vec<f64> {
        let tr = self.transforms[j];
        self.column(j).into_iter().map(|u| tr.apply(u)).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Keeps every `stride`-th draw.
    pub fn thin(&self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::invalid("thinning stride must be positive"));
        }
        let draws = (0..self.n_draws()).step_by(stride).flat_map(|i| self.row(i).to_vec()).collect();
        Ok(Self { draws, ..self.clone() })
    }

    /// Constrained draws as CSV, restricted to `columns` when given.
    pub fn write_draws_csv(&self, path: &Path, columns: Option<&[usize]>) -> Result<()> {
        let all: Vec<usize> = (0..self.dim()).collect();
        let cols = columns.unwrap_or(&all);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header: Vec<&str> = cols.iter().map(|&j| self.names[j].as_str()).collect();
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for i in 0..self.n_draws() {
            line.clear();
            let row = self.row(i);
            for (k, &j) in cols.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&self.transforms[j].apply(row[j]).to_string());
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Summary statistics and run diagnostics as JSON.
    pub fn write_summary_json(&self, path: &Path, columns: Option<&[usize]>) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            draws: usize,
            acceptance_rate: f64,
            step_sizes: &'a [f64],
            diagnostic: &'a Option<String>,
            parameters: Vec<ParamSummary>,
        }
        let all = summarize(self)?;
        let parameters = match columns {
            Some(c) => c.iter().map(|&j| all[j].clone()).collect(),
            None => all,
        };
        let doc = Doc {
            draws: self.n_draws(),
            acceptance_rate: self.acceptance_rate,
            step_sizes: &self.step_sizes,
            diagnostic: &self.diagnostic,
            parameters,
        };
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn stats(name: &str, mut x: Vec<f64>) -> ParamSummary {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = if x.len() > 1 {
        (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    x.sort_by(f64::total_cmp);
    ParamSummary {
        name: name.to_string(),
        mean,
        sd,
        q025: quantile_sorted(&x, 0.025),
        q50: quantile_sorted(&x, 0.5),
        q975: quantile_sorted(&x, 0.975),
    }
}

/// Per-parameter statistics on the constrained scale.
pub fn summarize(s: &PosteriorSamples) -> Result<Vec<ParamSummary>> {
    if s.n_draws() == 0 {
        return Err(Error::invalid("no draws to summarise"));
    }
    Ok((0..s.dim()).map(|j| stats(&s.names[j], s.constrained_column(j))).collect())
}

/// Pointwise posterior-predictive quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredibleBand {
    pub t: Vec<f64>,
    pub lower: Vec<f64>,
    pub median: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CredibleBand {
    pub fn mean_width(&self) -> f64 {
        if self.t.is_empty() {
            return 0.0;
        }
        self.upper.iter().zip(&self.lower).map(|(u, l)| u - l).sum::<f64>() / self.t.len() as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "t,lower,median,upper")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.lower[i], self.median[i], self.upper[i]
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates `curve` for every draw and takes pointwise quantiles at
/// `(lower, upper)` together with the median.
pub fn posterior_predictive<F>(
    s: &PosteriorSamples,
    t: &[f64],
    quantiles: (f64, f64),
    mut curve: F,
) -> Result<CredibleBand>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let (ql, qu) = quantiles;
    if !(0.0..=0.5).contains(&ql) || !(0.5..=1.0).contains(&qu) {
        return Err(Error::invalid(format!("band quantiles ({ql}, {qu}) must straddle the median")));
    }
    let n = s.n_draws();
    if n == 0 {
        return Err(Error::invalid("no draws for a predictive band"));
    }
    // column-major so each time point is contiguous
    let mut curves = vec![0.0; n * t.len()];
    for i in 0..n {
        let c = curve(s.row(i))?;
        if c.len() != t.len() {
            return Err(Error::Dimension { expected: t.len(), actual: c.len() });
        }
        for (j, v) in c.into_iter().enumerate() {
            curves[j * n + i] = v;
        }
    }
    let mut band = CredibleBand {
        t: t.to_vec(),
        lower: Vec::with_capacity(t.len()),
        median: Vec::with_capacity(t.len()),
        upper: Vec::with_capacity(t.len()),
    };
    for col in curves.chunks_mut(n) {
        col.sort_by(f64::total_cmp);
        band.lower.push(quantile_sorted(col, ql));
        band.median.push(quantile_sorted(col, 0.5));
        band.upper.push(quantile_sorted(col, qu));
    }
    Ok(band)
}
