//! Marginal screening utilities and selection.
//!
//! For a complete response the utility of feature `k` is
//! `ω̂_k = (1/n³) Σ_j R_kj Q_j - 1/4`, with `R_kj` and `Q_j` indicator-count
//! ranks of `X_kj` and `Y_j`. For a censored response, `Q_j / n` is replaced by
//! the Kaplan–Meier imputation of `F(Y_j)` from [`crate::survival`].
//!
//! Both utilities share one kernel, `(Σ_j R_kj m_j) / n³ - 1/4`, where `m_j` is
//! `n` times the response-side distribution value. With all events observed
//! the censored `m_j` equal `Q_j`, so the two methods agree bit for bit.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::rank::{ranks_unchecked, cmp_finite};
use crate::scalar::Scalar;
use crate::survival::{impute_distribution, SurvivalResponse};

/// Column-major `n × p` predictor matrix with named features.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    columns: Vec<Vec<T>>,
    feature_names: Vec<String>,
    n: usize,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(columns: Vec<Vec<T>>, feature_names: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Empty("data matrix has no columns"));
        }
        if columns.len() != feature_names.len() {
            return Err(Error::LengthMismatch {
                expected: columns.len(),
                found: feature_names.len(),
            });
        }
        let n = columns[0].len();
        for col in &columns {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            check_finite(col, "predictor column")?;
        }
        let mut seen = HashSet::with_capacity(feature_names.len());
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        Ok(Self {
            columns,
            feature_names,
            n,
        })
    }

    /// Columns named `X1`, `X2`, ….
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|k| format!("X{k}")).collect();
        Self::new(columns, names)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, k: usize) -> &[T] {
        &self.columns[k]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Applies `f` elementwise to column `k`, keeping the rest untouched.
    pub fn map_column(&self, k: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let mut columns = self.columns.clone();
        columns[k] = columns[k].iter().map(|&v| f(v)).collect();
        Self::new(columns, self.feature_names.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Rank utility for a complete response.
    Srcs,
    /// Rank utility with Kaplan–Meier imputation for a censored response.
    SrcsCen,
    /// Absolute marginal Pearson correlation baseline.
    #[serde(rename = "pearson", alias = "pearson_sis")]
    PearsonSis,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Srcs => "srcs",
            Method::SrcsCen => "srcs_cen",
            Method::PearsonSis => "pearson",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srcs" => Some(Method::Srcs),
            "srcs_cen" | "srcs-cen" => Some(Method::SrcsCen),
            "pearson" | "pearson_sis" | "sis" => Some(Method::PearsonSis),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-feature utilities with the induced ranking.
///
/// `ranking` holds 0-based feature indices ordered by `|score|` descending,
/// ties broken by ascending index. `selected` is always the first `d_n`
/// entries of `ranking`; it is empty until [`select_top`] is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningScores<T> {
    pub scores: Vec<T>,
    pub method: Method,
    pub ranking: Vec<usize>,
    pub d_n: usize,
    pub selected: Vec<usize>,
}

impl<T: Scalar> ScreeningScores<T> {
    pub fn from_scores(scores: Vec<T>, method: Method) -> Self {
        let ranking = rank_by_magnitude(&scores);
        Self {
            scores,
            method,
            ranking,
            d_n: 0,
            selected: Vec::new(),
        }
    }

    pub fn p(&self) -> usize {
        self.scores.len()
    }

    /// 1-based position of every feature in `ranking`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ranking.len()];
        for (i, &k) in self.ranking.iter().enumerate() {
            pos[k] = i + 1;
        }
        pos
    }
}

fn rank_by_magnitude<T: Scalar>(scores: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps ascending index order among equal magnitudes
    idx.sort_by(|&a, &b| cmp_finite(&scores[b].abs(), &scores[a].abs()));
    idx
}

fn check_response<T: Scalar>(x: &DataMatrix<T>, len: usize) -> Result<()> {
    if len != x.n() {
        return Err(Error::LengthMismatch {
            expected: x.n(),
            found: len,
        });
    }
    if len < 2 {
        return Err(Error::TooFewObservations {
            required: 2,
            found: len,
        });
    }
    Ok(())
}

/// `(Σ_j R_kj m_j) / n³ - 1/4` for every column, in parallel over features.
fn rank_kernel<T: Scalar>(x: &DataMatrix<T>, response_scaled: &[T]) -> Vec<T> {
    let n = T::from_count(x.n());
    let n3 = n * n * n;
    x.columns
        .par_iter()
        .map(|col| {
            let ranks = ranks_unchecked(col);
            let mut acc = T::zero();
            for (&r, &m) in ranks.iter().zip(response_scaled) {
                acc = acc + T::from_count(r) * m;
            }
            acc / n3 - T::quarter()
        })
        .collect()
}

/// Rank utility `ω̂_k` for a complete response.
pub fn srcs_scores<T: Scalar>(x: &DataMatrix<T>, y: &[T]) -> Result<ScreeningScores<T>> {
    check_response(x, y.len())?;
    check_finite(y, "response")?;
    let q: Vec<T> = ranks_unchecked(y).into_iter().map(T::from_count).collect();
    Ok(ScreeningScores::from_scores(rank_kernel(x, &q), Method::Srcs))
}

/// Adjusted rank utility `ξ̂_k` for a right-censored response.
pub fn srcs_cen_scores<T: Scalar>(
    x: &DataMatrix<T>,
    resp: &SurvivalResponse<T>,
) -> Result<ScreeningScores<T>> {
    check_response(x, resp.len())?;
    let imputed = impute_distribution(resp);
    Ok(ScreeningScores::from_scores(
        rank_kernel(x, &imputed.scaled),
        Method::SrcsCen,
    ))
}

/// Marginal Pearson correlation of each column with `y`; constant columns
/// score zero.
pub fn pearson_sis_scores<T: Scalar>(x: &DataMatrix<T>, y: &[T]) -> Result<ScreeningScores<T>> {
    check_response(x, y.len())?;
    check_finite(y, "response")?;
    let n = T::from_count(y.len());
    let y_mean = y.iter().fold(T::zero(), |a, &b| a + b) / n;
    let yc: Vec<T> = y.iter().map(|&v| v - y_mean).collect();
    let syy = yc.iter().fold(T::zero(), |a, &b| a + b * b);
    if syy <= T::zero() {
        return Err(Error::InvalidParameter("response is constant".into()));
    }
    let scores = x
        .columns
        .par_iter()
        .map(|col| {
            let mean = col.iter().fold(T::zero(), |a, &b| a + b) / n;
            let (mut sxy, mut sxx) = (T::zero(), T::zero());
            for (&v, &w) in col.iter().zip(&yc) {
                let d = v - mean;
                sxy = sxy + d * w;
                sxx = sxx + d * d;
            }
            if sxx <= T::zero() {
                T::zero()
            } else {
                sxy / (sxx.sqrt() * syy.sqrt())
            }
        })
        .collect();
    Ok(ScreeningScores::from_scores(scores, Method::PearsonSis))
}

/// `d_n = round(a · ⌈n / ln n⌉)`, clamped to `[1, p]`.
pub fn model_size(n: usize, p: usize, a: f64) -> usize {
    let n_f = n as f64;
    let base = if n < 2 { 1.0 } else { (n_f / n_f.ln()).ceil() };
    let d = (a * base).round();
    (d.max(1.0) as usize).clamp(1, p.max(1))
}

/// Keeps the `d_n` features with the largest `|score|`.
pub fn select_top<T: Scalar>(mut scores: ScreeningScores<T>, n: usize, a: f64) -> ScreeningScores<T> {
    let d = model_size(n, scores.p(), a);
    scores.d_n = d;
    scores.selected = scores.ranking[..d].to_vec();
    scores
}

fn check_active(active: &[usize], p: usize) -> Result<()> {
    if active.is_empty() {
        return Err(Error::InvalidActiveSet("empty".into()));
    }
    if let Some(&k) = active.iter().find(|&&k| k >= p) {
        return Err(Error::InvalidActiveSet(format!(
            "index {k} out of range for {p} features"
        )));
    }
    Ok(())
}

/// Smallest ranking cutoff that contains every feature in `true_active`.
pub fn minimum_model_size<T: Scalar>(scores: &ScreeningScores<T>, true_active: &[usize]) -> Result<usize> {
    check_active(true_active, scores.p())?;
    let pos = scores.positions();
    Ok(true_active.iter().map(|&k| pos[k]).max().unwrap())
}

/// Separation between the active and inactive score magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveSetDiagnostic<T> {
    pub min_active_abs_score: T,
    pub max_inactive_abs_score: T,
    pub gap: T,
}

pub fn active_gap<T: Scalar>(
    scores: &ScreeningScores<T>,
    true_active: &[usize],
) -> Result<ActiveSetDiagnostic<T>> {
    check_active(true_active, scores.p())?;
    let active: HashSet<usize> = true_active.iter().copied().collect();
    if active.len() == scores.p() {
        return Err(Error::InvalidActiveSet("active set covers every feature".into()));
    }
    let mut min_active = T::infinity();
    let mut max_inactive = T::neg_infinity();
    for (k, s) in scores.scores.iter().enumerate() {
        if active.contains(&k) {
            min_active = min_active.min(s.abs());
        } else {
            max_inactive = max_inactive.max(s.abs());
        }
    }
    Ok(ActiveSetDiagnostic {
        min_active_abs_score: min_active,
        max_inactive_abs_score: max_inactive,
        gap: min_active - max_inactive,
    })
}
