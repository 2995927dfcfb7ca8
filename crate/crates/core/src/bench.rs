//! Replication harness for the minimum-model-size metric.
//!
//! Each replication draws a fresh dataset from its own RNG stream, scores it
//! with every requested method and records the smallest ranking cutoff that
//! keeps all truly active features. Per-replication results are stored by
//! index, so the summaries do not depend on the thread count.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::screening::{minimum_model_size, pearson_sis_scores, srcs_cen_scores, srcs_scores, Method};
use crate::simgen::{calibrate_censoring, generate, replication_rng, SimDataset, SimScenario, RNG_ALGORITHM};

pub const DEFAULT_REPLICATIONS: usize = 100;
pub const FULL_REPLICATIONS: usize = 500;
pub const SCHEMA_VERSION: u32 = 1;
pub const QUANTILE_CONVENTION: &str = "nearest-rank (type 1)";

/// Location and spread of a sample of model sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub median: f64,
    /// Sample standard deviation (`n - 1` denominator; zero for one value).
    pub sd: f64,
    /// `sd / √n`.
    pub se: f64,
    pub q40: f64,
    pub q60: f64,
    pub q40_q60_gap: f64,
}

/// Nearest-rank quantile at `num / den` of an ascending sample.
fn nearest_rank(sorted: &[usize], num: usize, den: usize) -> usize {
    let k = (num * sorted.len()).div_ceil(den).max(1);
    sorted[k - 1]
}

pub fn summarize(s_values: &[usize]) -> Result<Summary> {
    if s_values.is_empty() {
        return Err(Error::Empty("model-size sample"));
    }
    let mut sorted = s_values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) as f64
    };
    let mean = sorted.iter().sum::<usize>() as f64 / n as f64;
    let sd = if n > 1 {
        let ss: f64 = sorted.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let q40 = nearest_rank(&sorted, 2, 5) as f64;
    let q60 = nearest_rank(&sorted, 3, 5) as f64;
    Ok(Summary {
        median,
        sd,
        se: sd / (n as f64).sqrt(),
        q40,
        q60,
        q40_q60_gap: q60 - q40,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub scenario: String,
    pub method: Method,
    #[serde(rename = "reps")]
    pub replications: usize,
    pub median_s: f64,
    /// Standard deviation of `S` across replications.
    pub sd_s: f64,
    pub se_s: f64,
    pub q40_q60_gap: f64,
    /// Mean censoring ratio over replications, for censored scenarios.
    pub realized_censoring: Option<f64>,
    pub seed: u64,
    /// Seconds spent on the whole scenario (shared by its methods).
    pub wall_time: f64,
    pub s_values: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub replications: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            master_seed: 20_160_101,
            threads: None,
        }
    }
}

/// Scores one dataset. Complete-data methods see the observed times `Y*` as
/// if they were uncensored.
pub fn model_size_for(data: &SimDataset, method: Method, active: &[usize]) -> Result<usize> {
    let scores = match method {
        Method::Srcs => srcs_scores(&data.x, data.response.times())?,
        Method::SrcsCen => srcs_cen_scores(&data.x, &data.response)?,
        Method::PearsonSis => pearson_sis_scores(&data.x, data.response.times())?,
    };
    minimum_model_size(&scores, active)
}

pub fn run_bench(scenario: &SimScenario, methods: &[Method], config: BenchConfig) -> Result<Vec<BenchSummary>> {
    if config.replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no screening method requested".into()));
    }
    scenario.validate()?;
    let active = scenario.true_active();
    let start = Instant::now();

    let work = || -> Result<Vec<(Vec<usize>, f64)>> {
        let censoring = match scenario.censoring {
            Some(_) => Some(calibrate_censoring(scenario, config.master_seed)?),
            None => None,
        };
        (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(config.master_seed, rep as u64);
                let data = generate(scenario, censoring.as_ref(), &mut rng)?;
                let sizes = methods
                    .iter()
                    .map(|&m| model_size_for(&data, m, &active))
                    .collect::<Result<Vec<_>>>()?;
                Ok((sizes, data.response.censoring_ratio()))
            })
            .collect()
    };
    let per_rep = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let wall_time = start.elapsed().as_secs_f64();

    let realized = scenario
        .censoring
        .as_ref()
        .map(|_| per_rep.iter().map(|(_, r)| r).sum::<f64>() / per_rep.len() as f64);

    methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let s_values: Vec<usize> = per_rep.iter().map(|(s, _)| s[j]).collect();
            let summary = summarize(&s_values)?;
            Ok(BenchSummary {
                scenario: scenario.name.clone(),
                method,
                replications: config.replications,
                median_s: summary.median,
                sd_s: summary.sd,
                se_s: summary.se,
                q40_q60_gap: summary.q40_q60_gap,
                realized_censoring: realized,
                seed: config.master_seed,
                wall_time,
                s_values,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "scenario,method,reps,median_s,sd_s,q40_q60_gap,realized_censoring,seed,wall_time";

pub fn write_csv<W: Write>(mut out: W, rows: &[BenchSummary]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        let cens = r.realized_censoring.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario, r.method, r.replications, r.median_s, r.sd_s, r.q40_q60_gap, cens, r.seed, r.wall_time
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    schema_version: u32,
    rng: &'a str,
    quantile_convention: &'a str,
    spread: &'a str,
    results: &'a [BenchSummary],
}

pub fn to_json(rows: &[BenchSummary]) -> String {
    let report = JsonReport {
        schema_version: SCHEMA_VERSION,
        rng: RNG_ALGORITHM,
        quantile_convention: QUANTILE_CONVENTION,
        spread: "sd_s is the standard deviation of S across replications; se_s = sd_s / sqrt(reps)",
        results: rows,
    };
    serde_json::to_string_pretty(&report).expect("bench rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{Covariance, NoiseSpec, ResponseModel, ScenarioCatalog};

    #[test]
    fn summarize_examples() {
        let s = summarize(&[4, 4, 4, 4]).unwrap();
        assert_eq!((s.median, s.sd, s.q40_q60_gap), (4.0, 0.0, 0.0));
        assert_eq!(summarize(&[1, 2, 3, 4, 5]).unwrap().median, 3.0);
        let s = summarize(&[2, 4, 4, 6]).unwrap();
        assert!((s.se - (8.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        assert!((s.se - 0.8165).abs() < 1e-4);
        assert!((s.sd - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(summarize(&[1, 2, 3, 4]).unwrap().median, 2.5);
        assert!(summarize(&[]).is_err());
        assert_eq!(summarize(&[7]).unwrap().sd, 0.0);
    }

    #[test]
    fn nearest_rank_quantiles() {
        let v: Vec<usize> = (1..=10).collect();
        assert_eq!(nearest_rank(&v, 2, 5), 4);
        assert_eq!(nearest_rank(&v, 3, 5), 6);
        assert_eq!(nearest_rank(&[5], 2, 5), 5);
        let v: Vec<usize> = (1..=100).collect();
        assert_eq!(summarize(&v).unwrap().q40_q60_gap, 20.0);
    }

    fn tiny(p: usize) -> SimScenario {
        SimScenario {
            name: "tiny".into(),
            description: String::new(),
            n: 50,
            p,
            covariance: Covariance::Independent,
            beta: vec![1.0, 1.0],
            model: ResponseModel::Linear,
            noise: NoiseSpec::Normal { variance: 1.0 },
            censoring: None,
            outliers: None,
        }
    }

    #[test]
    fn all_features_active_gives_p() {
        let config = BenchConfig { replications: 5, master_seed: 1, threads: Some(1) };
        let rows = run_bench(&tiny(2), &[Method::Srcs, Method::PearsonSis], config).unwrap();
        for r in rows {
            assert!(r.s_values.iter().all(|&s| s == 2));
            assert_eq!(r.realized_censoring, None);
        }
    }

    #[test]
    fn reproducible_and_bounded() {
        let config = BenchConfig { replications: 6, master_seed: 9, threads: Some(2) };
        let sc = tiny(30);
        let a = run_bench(&sc, &[Method::Srcs], config).unwrap();
        let b = run_bench(&sc, &[Method::Srcs], BenchConfig { threads: Some(1), ..config }).unwrap();
        assert_eq!(a[0].s_values, b[0].s_values);
        assert!(a[0].s_values.iter().all(|&s| (2..=30).contains(&s)));
        assert!(a[0].median_s >= 2.0);
    }

    #[test]
    fn srcs_cen_on_complete_equals_srcs() {
        let config = BenchConfig { replications: 4, master_seed: 3, threads: Some(1) };
        let rows = run_bench(&tiny(40), &[Method::Srcs, Method::SrcsCen], config).unwrap();
        assert_eq!(rows[0].s_values, rows[1].s_values);
    }

    #[test]
    fn rejects_bad_config() {
        let sc = tiny(10);
        let zero = BenchConfig { replications: 0, master_seed: 0, threads: None };
        assert!(run_bench(&sc, &[Method::Srcs], zero).is_err());
        assert!(run_bench(&sc, &[], BenchConfig::default()).is_err());
    }

    #[test]
    fn csv_and_json_output() {
        let cat = ScenarioCatalog::builtin();
        let mut sc = cat.get("ex1-case1b-cens20").unwrap().clone();
        sc.p = 20;
        let config = BenchConfig { replications: 3, master_seed: 5, threads: Some(1) };
        let rows = run_bench(&sc, &[Method::SrcsCen], config).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 9);
        assert_eq!(fields[1], "srcs_cen");
        assert!(fields[6].parse::<f64>().is_ok());
        let json = to_json(&rows);
        assert!(json.contains("\"schema_version\": 1"));
        assert!(json.contains("\"reps\": 3"));
        assert!(json.contains("\"method\": \"srcs_cen\""));
    }
}
