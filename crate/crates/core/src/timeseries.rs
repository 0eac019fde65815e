//! Daily case series: loading cumulative counts, smoothing, unit
//! normalisation and train/test splitting.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::PhysParams;

/// Days per year of the time grid.
pub const DAYS: f64 = 365.0;
/// Raw counts per normalised unit.
pub const SCALE: f64 = 1e6;

/// Daily new cases on consecutive calendar dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Time in years since the first day against cases in millions per day.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizedSeries {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSeries {
    pub train: NormalizedSeries,
    pub test: NormalizedSeries,
}

/// `t_i = i / 365`.
pub fn time_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / DAYS).collect()
}

impl DailySeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Dimension {
                expected: dates.len(),
                actual: values.len(),
            });
        }
        for w in dates.windows(2) {
            if w[0].succ_opt() != Some(w[1]) {
                return Err(Error::invalid(format!("dates {} and {} are not consecutive", w[0], w[1])));
            }
        }
        Ok(Self { dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index and value of the largest entry (first one on ties).
    pub fn argmax(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }

    pub fn argmin(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((i, v)),
            })
    }
}

impl NormalizedSeries {
    pub fn new(t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() {
            return Err(Error::Dimension {
                expected: t.len(),
                actual: x.len(),
            });
        }
        Ok(Self { t, x })
    }

    /// Values on the standard daily grid starting at `t = 0`.
    pub fn on_grid(x: Vec<f64>) -> Self {
        Self {
            t: time_grid(x.len()),
            x,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "t,x")?;
        for (t, x) in self.t.iter().zip(&self.x) {
            writeln!(w, "{t:.16e},{x:.16e}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = open_csv(path)?;
        let (mut t, mut x) = (Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| parse_err(path, row + 2, 0, e.to_string()))?;
            if rec.len() != 2 {
                return Err(parse_err(path, row + 2, rec.len(), "expected two columns"));
            }
            for (col, out) in [&mut t, &mut x].into_iter().enumerate() {
                let v: f64 = rec[col]
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(path, row + 2, col + 1, format!("{e}")))?;
                out.push(v);
            }
        }
        Ok(Self { t, x })
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file))
}

fn parse_err(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

/// Reads per-region cumulative counts and returns worldwide daily new cases.
///
/// The header is `region,<date>,<date>,...` with consecutive ISO dates. The
/// output starts at the second date column; negative differences are
/// clamped to zero. Rows and columns are 1-based in errors.
pub fn load_cumulative_csv(path: &Path) -> Result<DailySeries> {
    let mut rdr = open_csv(path)?;
    let header = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, 0, e.to_string()))?
        .clone();
    if header.len() < 3 {
        return Err(parse_err(path, 1, header.len(), "need a region column and at least two dates"));
    }
    let mut dates = Vec::with_capacity(header.len() - 1);
    for (col, field) in header.iter().enumerate().skip(1) {
        let d = NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d")
            .map_err(|e| parse_err(path, 1, col + 1, format!("bad date {field:?}: {e}")))?;
        if let Some(&prev) = dates.last() {
            if NaiveDate::succ_opt(&prev) != Some(d) {
                return Err(parse_err(path, 1, col + 1, format!("date gap between {prev} and {d}")));
            }
        }
        dates.push(d);
    }

    // Integer sums so the total does not depend on row order.
    let mut totals = vec![0i128; dates.len()];
    let mut regions = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| parse_err(path, row, 0, e.to_string()))?;
        if rec.len() != header.len() {
            return Err(parse_err(
                path,
                row,
                rec.len(),
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        *regions.entry(rec[0].to_string()).or_insert(0usize) += 1;
        for (j, total) in totals.iter_mut().enumerate() {
            let cell = rec[j + 1].trim();
            let v: i64 = cell
                .parse()
                .map_err(|_| parse_err(path, row, j + 2, format!("not an integer count: {cell:?}")))?;
            *total += v as i128;
        }
    }
    if regions.is_empty() {
        return Err(parse_err(path, 2, 0, "no data rows"));
    }

    let values = totals
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0) as f64)
        .collect();
    DailySeries::new(dates[1..].to_vec(), values)
}

/// Trailing mean over `window` days, shrinking at the start.
pub fn moving_average(s: &DailySeries, window: usize) -> Result<DailySeries> {
    if window == 0 {
        return Err(Error::invalid("moving-average window must be at least 1"));
    }
    // Direct sums rather than a running total, so no drift accumulates.
    let values = (0..s.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            s.values[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect();
    Ok(DailySeries {
        dates: s.dates.clone(),
        values,
    })
}

pub fn normalize(s: &DailySeries) -> NormalizedSeries {
    NormalizedSeries::on_grid(s.values.iter().map(|v| v / SCALE).collect())
}

/// Inverse of [`normalize`] given the first calendar date.
pub fn denormalize(s: &NormalizedSeries, start: NaiveDate) -> DailySeries {
    let dates = s
        .t
        .iter()
        .map(|t| start + chrono::Days::new((t * DAYS).round() as u64))
        .collect();
    DailySeries {
        dates,
        values: s.x.iter().map(|x| x * SCALE).collect(),
    }
}

pub fn split(s: &NormalizedSeries, n_trn: usize) -> Result<SplitSeries> {
    if n_trn == 0 || n_trn > s.len() {
        return Err(Error::invalid(format!(
            "training size {n_trn} outside 1..={}",
            s.len()
        )));
    }
    Ok(SplitSeries {
        train: NormalizedSeries {
            t: s.t[..n_trn].to_vec(),
            x: s.x[..n_trn].to_vec(),
        },
        test: NormalizedSeries {
            t: s.t[n_trn..].to_vec(),
            x: s.x[n_trn..].to_vec(),
        },
    })
}

/// Closed-form oscillator curve on the daily grid plus Gaussian noise.
///
/// `phase = None` uses the zero-initial-velocity phase.
pub fn synthesize(
    phys: &PhysParams,
    amplitude: f64,
    phase: Option<f64>,
    noise_sd: f64,
    seed: u64,
    n: usize,
) -> Result<NormalizedSeries> {
    if !(noise_sd >= 0.0) {
        return Err(Error::invalid(format!("noise sd must be non-negative, got {noise_sd}")));
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = time_grid(n);
    let mut x = Vec::with_capacity(n);
    for &ti in &t {
        let clean = match phase {
            None => phys.analytic_solution(amplitude, ti)?,
            Some(p) => phys.analytic_solution_with_phase(amplitude, p, ti)?,
        };
        x.push(if noise_sd > 0.0 { clean + noise.sample(&mut rng) } else { clean });
    }
    Ok(NormalizedSeries { t, x })
}
