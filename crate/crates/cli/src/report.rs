//! Screening report and its table / CSV / JSON renderings.

use std::io::Write;

use rankscreen::ScreeningScores;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 4] = ["feature", "score", "abs_rank", "selected"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub feature: String,
    pub score: f64,
    /// 1-based position by `|score|`.
    pub abs_rank: usize,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub schema_version: u32,
    pub method: String,
    pub n: usize,
    pub p: usize,
    pub rows_dropped: usize,
    pub a: f64,
    pub d_n: usize,
    pub censoring_ratio: Option<f64>,
    /// Event weights capped in the Kaplan–Meier step (censored method only).
    pub capped_weights: Option<usize>,
    /// All features in ranking order.
    pub features: Vec<FeatureRow>,
}

impl ScreenReport {
    pub fn from_scores(scores: &ScreeningScores, names: &[String], n: usize, rows_dropped: usize, a: f64) -> Self {
        let features = scores
            .ranking
            .iter()
            .enumerate()
            .map(|(pos, &k)| FeatureRow {
                feature: names[k].clone(),
                score: scores.scores[k],
                abs_rank: pos + 1,
                selected: pos < scores.d_n,
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            method: scores.method.name().to_string(),
            n,
            p: scores.p(),
            rows_dropped,
            a,
            d_n: scores.d_n,
            censoring_ratio: None,
            capped_weights: None,
            features,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.features {
            w.write_record([
                row.feature.clone(),
                row.score.to_string(),
                row.abs_rank.to_string(),
                u8::from(row.selected).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_table<W: Write>(&self, mut out: W, all: bool) -> std::io::Result<()> {
        writeln!(out, "method: {}   n: {}   p: {}   d_n: {} (a = {})", self.method, self.n, self.p, self.d_n, self.a)?;
        if self.rows_dropped > 0 {
            writeln!(out, "rows dropped for missing values: {}", self.rows_dropped)?;
        }
        if let Some(c) = self.censoring_ratio {
            writeln!(out, "censoring ratio: {c:.3}")?;
        }
        if let Some(c) = self.capped_weights.filter(|&c| c > 0) {
            writeln!(out, "warning: {c} censoring weight(s) capped at 1/n")?;
        }
        let rows: Vec<&FeatureRow> = self.features.iter().filter(|r| all || r.selected).collect();
        let width = rows.iter().map(|r| r.feature.len()).max().unwrap_or(7).max(7);
        writeln!(out, "{:>5}  {:<width$}  {:>12}  selected", "rank", "feature", "score")?;
        for r in rows {
            writeln!(
                out,
                "{:>5}  {:<width$}  {:>12.6}  {}",
                r.abs_rank,
                r.feature,
                r.score,
                if r.selected { "yes" } else { "no" }
            )?;
        }
        Ok(())
    }
}

/// Parses a CSV produced by [`ScreenReport::write_csv`].
pub fn read_csv_rows<R: std::io::Read>(input: R) -> csv::Result<Vec<FeatureRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let parse_err = |what: &str| {
                csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad {what}")))
            };
            Ok(FeatureRow {
                feature: rec[0].to_string(),
                score: rec[1].parse().map_err(|_| parse_err("score"))?,
                abs_rank: rec[2].parse().map_err(|_| parse_err("abs_rank"))?,
                selected: &rec[3] == "1",
            })
        })
        .collect()
}
