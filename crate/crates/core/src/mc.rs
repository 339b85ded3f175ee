//! Replicated simulate-and-estimate experiments.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{empirical_vs_asymptotic, AsymptoticReport, SpreadComparison};
use crate::error::{Error, Result};
use crate::estimator::{solve_estimating_equations, EstimateStatus, GateFailure};
use crate::model::{Model, ModelKind};
use crate::simulate::{Simulator, DEFAULT_SUBGRID};

#[derive(Debug, Clone)]
pub struct McExperimentConfig {
    pub model: Model,
    /// Observations per replication.
    pub n: usize,
    /// Number of replications.
    pub m: usize,
    pub seed: u64,
    pub bins: usize,
    pub subgrid: usize,
}

impl McExperimentConfig {
    pub fn new(model: Model, n: usize, m: usize, seed: u64) -> Self {
        Self {
            model,
            n,
            m,
            seed,
            bins: 40,
            subgrid: DEFAULT_SUBGRID,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("replications m must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput("length n must be >= 2".into()));
        }
        if self.bins < 1 {
            return Err(Error::InvalidInput("bins must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one replication, in the model's own parametrization.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Replication {
    Ok([f64; 6]),
    Degenerate(Vec<GateFailure>),
}

/// Runs the replications in parallel. Replication `r` draws from the
/// streams keyed by `(seed, r)`, so the result does not depend on
/// scheduling.
pub fn run_replications(cfg: &McExperimentConfig) -> Result<Vec<Replication>> {
    cfg.validate()?;
    let sim = Simulator::new(&cfg.model, cfg.subgrid)?;
    let kind = cfg.model.kind();
    let dt = cfg.model.params().delta_t();
    Ok((0..cfg.m as u64)
        .into_par_iter()
        .map(|r| {
            let summary = sim.path_statistics(cfg.n, cfg.seed, r);
            let est = solve_estimating_equations(&summary, dt);
            match (&est.status, est.theta_hat) {
                (EstimateStatus::Ok, Some(p)) => match kind.from_generic(p.theta()) {
                    Ok(named) => Replication::Ok(named),
                    Err(_) => Replication::Degenerate(vec![GateFailure::NonFinite]),
                },
                (EstimateStatus::Degenerate(reasons), _) => {
                    Replication::Degenerate(reasons.clone())
                }
                (EstimateStatus::Ok, None) => unreachable!("ok estimate without value"),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub label: String,
    pub truth: f64,
    pub mean: Option<f64>,
    /// Sample standard deviation; absent with fewer than two estimates.
    pub sd: Option<f64>,
    pub rmse: Option<f64>,
    /// Asymptotic standard deviation of one estimate, `s / sqrt(n)`.
    pub asymptotic_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
    /// Density of `N(truth, s^2/n)` at the bin centre.
    pub normal_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub label: String,
    pub total: usize,
    pub bins: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub model: ModelKind,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub gate_failures: usize,
    pub gate_failure_reasons: Vec<(String, usize)>,
    pub summary: Vec<ParameterSummary>,
    /// Present from 100 successful replications on.
    pub comparison: Option<Vec<SpreadComparison>>,
    #[serde(skip)]
    pub histograms: Vec<Histogram>,
    #[serde(skip)]
    pub replications: Vec<Replication>,
}

impl McReport {
    pub fn estimates(&self) -> Vec<[f64; 6]> {
        self.replications
            .iter()
            .filter_map(|r| match r {
                Replication::Ok(t) => Some(*t),
                Replication::Degenerate(_) => None,
            })
            .collect()
    }
}

pub fn run_experiment(cfg: &McExperimentConfig, asymptotic: &AsymptoticReport) -> Result<McReport> {
    let replications = run_replications(cfg)?;
    summarize(cfg, asymptotic, replications)
}

pub fn summarize(
    cfg: &McExperimentConfig,
    asymptotic: &AsymptoticReport,
    replications: Vec<Replication>,
) -> Result<McReport> {
    if asymptotic.parametrization != cfg.model.kind() {
        return Err(Error::InvalidInput(format!(
            "asymptotic report is in the {} parametrization, experiment in {}",
            asymptotic.parametrization,
            cfg.model.kind()
        )));
    }
    let estimates: Vec<[f64; 6]> = replications
        .iter()
        .filter_map(|r| match r {
            Replication::Ok(t) => Some(*t),
            Replication::Degenerate(_) => None,
        })
        .collect();
    let mut reasons: Vec<(String, usize)> = Vec::new();
    for r in &replications {
        if let Replication::Degenerate(list) = r {
            for g in list {
                let name = g.describe().to_string();
                match reasons.iter_mut().find(|(k, _)| *k == name) {
                    Some((_, c)) => *c += 1,
                    None => reasons.push((name, 1)),
                }
            }
        }
    }
    let root_n = (cfg.n as f64).sqrt();
    let k = estimates.len();
    let summary = (0..6)
        .map(|p| {
            let truth = asymptotic.theta[p];
            let xs: Vec<f64> = estimates.iter().map(|e| e[p]).collect();
            let mean = (k > 0).then(|| xs.iter().sum::<f64>() / k as f64);
            let sd = (k > 1).then(|| {
                let m = mean.unwrap();
                (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
            });
            let rmse = (k > 0)
                .then(|| (xs.iter().map(|x| (x - truth).powi(2)).sum::<f64>() / k as f64).sqrt());
            ParameterSummary {
                label: asymptotic.labels[p].clone(),
                truth,
                mean,
                sd,
                rmse,
                asymptotic_sd: asymptotic.s[p] / root_n,
            }
        })
        .collect::<Vec<_>>();
    let histograms = summary
        .iter()
        .enumerate()
        .map(|(p, s)| {
            let xs: Vec<f64> = estimates.iter().map(|e| e[p]).collect();
            histogram(&s.label, &xs, cfg.bins, s.truth, s.asymptotic_sd)
        })
        .collect();
    let comparison = empirical_vs_asymptotic(&estimates, cfg.n, asymptotic).ok();
    Ok(McReport {
        model: cfg.model.kind(),
        n: cfg.n,
        m: cfg.m,
        seed: cfg.seed,
        gate_failures: replications.len() - k,
        gate_failure_reasons: reasons,
        summary,
        comparison,
        histograms,
        replications,
    })
}

/// Equal-width histogram over the range of `xs` with a normal overlay.
pub fn histogram(label: &str, xs: &[f64], bins: usize, mean: f64, sd: f64) -> Histogram {
    let bins = bins.max(1);
    let (mut lo, mut hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if xs.is_empty() {
        lo = mean - 4.0 * sd;
        hi = mean + 4.0 * sd;
    }
    if !(hi > lo) {
        let half = if sd > 0.0 {
            sd
        } else {
            0.5 * lo.abs().max(1.0)
        };
        lo -= half;
        hi += half;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let idx = (((x - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let density = |x: f64| {
        if sd > 0.0 {
            let z = (x - mean) / sd;
            (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
        } else {
            0.0
        }
    };
    Histogram {
        label: label.to_string(),
        total: xs.len(),
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, count)| {
                let left = lo + i as f64 * width;
                HistogramBin {
                    bin_left: left,
                    bin_right: left + width,
                    count,
                    normal_density: density(left + 0.5 * width),
                }
            })
            .collect(),
    }
}

/// Writes `estimates.csv`, `report.json`, `hist_<label>.csv` and a gnuplot
/// script `histograms.gp` into `dir`.
pub fn write_outputs(report: &McReport, dir: &Path) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let labels: Vec<&str> = report.summary.iter().map(|s| s.label.as_str()).collect();

    let mut est = csv::Writer::from_path(dir.join("estimates.csv")).map_err(csv_err)?;
    let mut header = vec!["replication", "status"];
    header.extend(labels.iter());
    est.write_record(&header).map_err(csv_err)?;
    for (r, rep) in report.replications.iter().enumerate() {
        let mut row = vec![r.to_string()];
        match rep {
            Replication::Ok(t) => {
                row.push("ok".into());
                row.extend(t.iter().map(|x| x.to_string()));
            }
            Replication::Degenerate(_) => {
                row.push("degenerate".into());
                row.extend(std::iter::repeat_n(String::new(), 6));
            }
        }
        est.write_record(&row).map_err(csv_err)?;
    }
    est.flush().map_err(io)?;

    for h in &report.histograms {
        let mut w =
            csv::Writer::from_path(dir.join(format!("hist_{}.csv", h.label))).map_err(csv_err)?;
        for b in &h.bins {
            w.serialize(b).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }

    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidInput(format!("serializing report: {e}")))?;
    std::fs::write(dir.join("report.json"), json + "\n").map_err(io)?;
    std::fs::write(dir.join("histograms.gp"), gnuplot_script(report)).map_err(io)?;
    Ok(())
}

/// Gnuplot script drawing each histogram as a density with the asymptotic
/// normal curve on top.
pub fn gnuplot_script(report: &McReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,1200");
    let _ = writeln!(s, "set output 'histograms.png'");
    let _ = writeln!(s, "set multiplot layout 3,2");
    let _ = writeln!(s, "set style fill solid 0.4");
    for h in &report.histograms {
        let width = h
            .bins
            .first()
            .map(|b| b.bin_right - b.bin_left)
            .unwrap_or(1.0);
        let scale = (h.total.max(1) as f64) * width;
        let _ = writeln!(s, "set title '{}'", h.label);
        let _ = writeln!(
            s,
            "plot 'hist_{0}.csv' skip 1 using (($1+$2)/2):($3/{1}) with boxes notitle, \\\n     'hist_{0}.csv' skip 1 using (($1+$2)/2):4 with lines lw 2 notitle",
            h.label, scale
        );
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv error: {e}"))
}
