use std::fs;
use std::path::Path;

use crate::error::Result;

use super::run::ExperimentResult;

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

fn param(r: &ExperimentResult, name: &str, point: Option<f64>) -> String {
    match r.summary(name) {
        Some(s) => format!("{:.4} ± {:.4}", s.mean, s.sd),
        None => point.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
    }
}

/// Markdown comparison table, one row per result.
pub fn comparison_table(results: &[ExperimentResult]) -> String {
    let mut s = String::from(
        "| Method | n_trn | Unknowns | Descr. data | Pred. data | Descr. phys | Pred. phys | c | k | x0 |\n\
         |---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in results {
        let l = r.losses.unwrap_or(crate::train::LossReport {
            descriptive_data: f64::NAN,
            predictive_data: f64::NAN,
            descriptive_phys: None,
            predictive_phys: None,
        });
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.method.map_or("?", |m| m.label()),
            r.n_trn,
            r.unknowns,
            cell(Some(l.descriptive_data)),
            cell(Some(l.predictive_data)),
            cell(l.descriptive_phys),
            cell(l.predictive_phys),
            param(r, "c", r.phys.map(|p| p.c)),
            param(r, "k", r.phys.map(|p| p.k)),
            param(r, "x0", r.phys.map(|p| p.x0)),
        ));
    }
    s
}

/// Writes `summary.json` and `comparison.md` into `dir`.
pub fn emit_report(results: &[ExperimentResult], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(results)?)?;
    fs::write(dir.join("comparison.md"), comparison_table(results))?;
    Ok(())
}

/// Reads every `result.json` below `root`, in path order.
pub fn collect_results(root: &Path) -> Result<Vec<ExperimentResult>> {
    let mut paths = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d)? {
            let p = e?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == "result.json") {
                paths.push(p);
            }
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(serde_json::from_str(&fs::read_to_string(p)?)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Method;
    use crate::train::LossReport;

    fn fake(m: Method) -> ExperimentResult {
        ExperimentResult {
            method: Some(m),
            n_trn: 225,
            unknowns: m.unknowns(&Default::default()),
            losses: Some(LossReport {
                descriptive_data: 1e-3,
                predictive_data: 2e-3,
                descriptive_phys: m.has_physics().then_some(0.1),
                predictive_phys: m.has_physics().then_some(0.2),
            }),
            ..Default::default()
        }
    }

    #[test]
    fn empty_report_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&[], dir.path()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert_eq!(v, serde_json::json!([]));
        assert_eq!(fs::read_to_string(dir.path().join("comparison.md")).unwrap().lines().count(), 2);
    }

    #[test]
    fn six_methods_six_rows() {
        let dir = tempfile::tempdir().unwrap();
        let rs: Vec<_> = Method::ALL.iter().map(|&m| fake(m)).collect();
        emit_report(&rs, dir.path()).unwrap();
        let md = fs::read_to_string(dir.path().join("comparison.md")).unwrap();
        assert_eq!(md.lines().count(), 8);
        for n in ["1153", "1156", "1157", "| 6 |", "2306", "2312"] {
            assert!(md.contains(n), "{n}");
        }
    }

    #[test]
    fn results_are_collected_back() {
        let dir = tempfile::tempdir().unwrap();
        for (i, m) in [Method::Nn, Method::Bi].into_iter().enumerate() {
            let d = dir.path().join(format!("r{i}"));
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join("result.json"), serde_json::to_string(&fake(m)).unwrap()).unwrap();
        }
        let back = collect_results(dir.path()).unwrap();
        assert_eq!(back, vec![fake(Method::Nn), fake(Method::Bi)]);
    }
}
