//! Batch experiment: per instance the exact partition function, the best
//! SPA Bethe partition function, degree-M Bethe partition functions for
//! `M = 1..=M_max`, and the checkable condition.

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{zbm_montecarlo, zbm_typeformula, ZbmEstimate};
use crate::error::Result;
use crate::gen::{gen, GeneratorSpec};
use crate::lct::{check_condition, transform};
use crate::limits::Limits;
use crate::nfg::partition_contract_with;
use crate::spa::{spa_run, SpaOptions};

/// Largest M computed by the method-of-types sum; larger M use Monte Carlo.
pub const TYPEFORMULA_MAX_M: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Generator template; its seed is the master seed.
    pub generator: GeneratorSpec,
    pub instances: usize,
    pub m_max: usize,
    pub samples: usize,
    pub spa: SpaOptions,
    pub limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub z: f64,
    pub z_star: Option<f64>,
    /// `Z_{B,M}` for `M = 1..=M_max`.
    pub zbm: Vec<Option<f64>>,
    /// `(Z_{B,M} − Z*) / Z*`.
    pub dev: Vec<Option<f64>>,
    pub condition: Option<bool>,
    pub alpha: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSummary {
    pub m: usize,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    /// Empirical quantiles of the relative deviation at 0.1, 0.2, ..., 0.9.
    pub deciles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub per_m: Vec<MSummary>,
    /// Rows excluded because the SPA did not converge.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub summary: Summary,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of instance `index` under a master seed.
pub fn instance_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64 + 1))
}

/// `Z_{B,M}` by the method used in experiments.
pub fn zbm_for_experiment(
    g: &crate::nfg::FactorGraph,
    m: usize,
    samples: usize,
    seed: u64,
    limits: &Limits,
) -> Result<ZbmEstimate> {
    if m <= TYPEFORMULA_MAX_M {
        zbm_typeformula(g, m, limits)
    } else {
        zbm_montecarlo(g, m, samples, seed, limits)
    }
}

pub fn run_instance(spec: &ExperimentSpec, index: usize) -> Result<ExperimentRow> {
    let seed = instance_seed(spec.generator.seed, index);
    let g = gen(&GeneratorSpec {
        seed,
        ..spec.generator
    })?;
    let z = partition_contract_with(&g, &spec.limits)?.re;
    let report = spa_run(&g, &SpaOptions { seed, ..spec.spa.clone() });
    let z_star = report.z_bethe.map(|z| z.re);
    let mut zbm = Vec::with_capacity(spec.m_max);
    for m in 1..=spec.m_max {
        let est = zbm_for_experiment(&g, m, spec.samples, seed, &spec.limits)?;
        zbm.push(est.root().ok());
    }
    let dev = zbm
        .iter()
        .map(|v| match (v, z_star) {
            (Some(v), Some(zs)) if zs != 0.0 => Some((v - zs) / zs),
            _ => None,
        })
        .collect();
    let (condition, alpha) = match transform(&g, &report) {
        Ok(lr) => {
            let c = check_condition(&lr);
            (Some(c.holds()), Some(c.alpha))
        }
        Err(_) => (None, None),
    };
    Ok(ExperimentRow {
        seed,
        z,
        z_star,
        zbm,
        dev,
        condition,
        alpha,
        converged: report.converged,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(rows: &[ExperimentRow], m_max: usize) -> Summary {
    let used: Vec<&ExperimentRow> = rows.iter().filter(|r| r.converged).collect();
    let per_m = (0..m_max)
        .map(|k| {
            let mut v: Vec<f64> = used.iter().filter_map(|r| r.dev[k]).collect();
            v.sort_by(f64::total_cmp);
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            MSummary {
                m: k + 1,
                count: v.len(),
                mean,
                std,
                deciles: (1..10).map(|d| quantile(&v, d as f64 / 10.0)).collect(),
            }
        })
        .collect();
    Summary {
        per_m,
        excluded: rows.len() - used.len(),
    }
}

/// Runs all instances in parallel; rows are ordered by instance index.
pub fn experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let rows: Vec<Result<ExperimentRow>> = (0..spec.instances)
        .into_par_iter()
        .map(|i| run_instance(spec, i))
        .collect();
    let rows: Vec<ExperimentRow> = rows.into_iter().collect::<Result<_>>()?;
    let summary = summarize(&rows, spec.m_max);
    Ok(ExperimentResult { rows, summary })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Rows as CSV with a header line.
pub fn rows_to_csv(rows: &[ExperimentRow], m_max: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["seed".to_string(), "Z".into(), "Z_star".into()];
    header.extend((1..=m_max).map(|m| format!("Z_B{m}")));
    header.extend((1..=m_max).map(|m| format!("dev_{m}")));
    header.extend(["condition".into(), "alpha".into(), "converged".into()]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.seed.to_string(), r.z.to_string(), opt(&r.z_star)];
        rec.extend(r.zbm.iter().map(opt));
        rec.extend(r.dev.iter().map(opt));
        rec.extend([opt(&r.condition), opt(&r.alpha), r.converged.to_string()]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

/// Summary as CSV: one row per M with mean, std and deciles.
pub fn summary_to_csv(s: &Summary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["M".to_string(), "count".into(), "mean".into(), "std".into()];
    header.extend((1..10).map(|d| format!("q{}", d * 10)));
    w.write_record(&header).map_err(csv_err)?;
    for m in &s.per_m {
        let mut rec = vec![m.m.to_string(), m.count.to_string(), m.mean.to_string(), m.std.to_string()];
        rec.extend(m.deciles.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::NfgError {
    crate::error::NfgError::InvalidArgument(format!("csv: {e}"))
}

pub(crate) fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| crate::error::NfgError::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
