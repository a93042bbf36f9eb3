use std::path::Path;

use super::tail::TailReport;
use crate::{Error, Result};

pub const HMU_COLUMNS: &[&str] = &[
    "r",
    "n_total",
    "n_censored",
    "h_mean",
    "h_se",
    "h_over_r",
    "h_over_r_se",
    "sigma",
    "sigma_se",
    "delta_r",
    "nonrandom_error",
    "nonrandom_error_se",
    "nonrandom_over_sigma",
    "wandering_median",
    "wandering_q90",
];

pub const CHECK_COLUMNS: &[&str] = &["check", "r", "s", "lhs", "rhs", "slack", "pass"];

pub const TAIL_COLUMNS: &[&str] = &[
    "group",
    "x",
    "n_total",
    "n_censored",
    "n_used",
    "exceed",
    "p",
    "wilson_lo",
    "wilson_hi",
    "p_isotonic",
    "note",
];

/// Every CSV an experiment may write, with its columns.
pub const CSV_FILES: &[(&str, &[&str])] = &[
    ("hmu", HMU_COLUMNS),
    ("checks", CHECK_COLUMNS),
    ("fluctuation", TAIL_COLUMNS),
    ("wandering", TAIL_COLUMNS),
    ("straightness", TAIL_COLUMNS),
    ("density", TAIL_COLUMNS),
];

/// Meaning of every column, per file. Tail files share one description.
pub const COLUMN_DOCS: &[(&str, &[(&str, &str)])] = &[
    (
        "hmu",
        &[
            ("r", "axis distance; the pair is (0, 0) and (r, 0)"),
            ("n_total", "replicas"),
            (
                "n_censored",
                "replicas whose geodesic came within 2 of the window boundary",
            ),
            ("h_mean", "mean passage time over uncensored replicas"),
            ("h_se", "standard error of h_mean"),
            ("h_over_r", "h_mean / r"),
            ("h_over_r_se", "h_se / r"),
            ("sigma", "standard deviation of the passage time"),
            ("sigma_se", "standard error of sigma"),
            ("delta_r", "sqrt(r * sigma), the transversal scale"),
            ("nonrandom_error", "h_mean - mu_hat * r"),
            (
                "nonrandom_error_se",
                "standard error of nonrandom_error, including the error of mu_hat",
            ),
            ("nonrandom_over_sigma", "nonrandom_error / sigma"),
            (
                "wandering_median",
                "median distance from the geodesic to the axis",
            ),
            ("wandering_q90", "0.9 quantile of the same distance"),
        ],
    ),
    (
        "checks",
        &[
            ("check", "h_over_r, lower_bound, subadditive or monotone"),
            ("r", "first distance"),
            ("s", "second distance; empty for lower_bound"),
            ("lhs", "left-hand side of the inequality"),
            ("rhs", "right-hand side of the inequality"),
            (
                "slack",
                "three combined standard errors allowed in the comparison",
            ),
            ("pass", "whether the inequality holds within the slack"),
        ],
    ),
    (
        "tail",
        &[
            (
                "group",
                "sub-experiment, e.g. \"two_sided k=1\", \"r=100\" or \"radius=5\"",
            ),
            (
                "x",
                "threshold: t for fluctuation and straightness, s for wandering, a for density",
            ),
            (
                "n_total",
                "observations (replicas, or replica-centre pairs for density)",
            ),
            ("n_censored", "observations dropped for censoring"),
            ("n_used", "n_total - n_censored"),
            ("exceed", "observations at or beyond the threshold"),
            ("p", "exceed / n_used"),
            ("wilson_lo", "lower end of the 95% Wilson interval for p"),
            ("wilson_hi", "upper end of the 95% Wilson interval for p"),
            ("p_isotonic", "nonincreasing least-squares fit of p over x"),
            (
                "note",
                "wandering: which branch of the longitudinal interval applies",
            ),
        ],
    ),
];

/// Column documentation for a CSV file name (without `.csv`).
pub fn column_docs(file: &str) -> Option<&'static [(&'static str, &'static str)]> {
    let key = if TAIL_FILES.contains(&file) { "tail" } else { file };
    COLUMN_DOCS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d)
}

const TAIL_FILES: &[&str] = &["fluctuation", "wandering", "straightness", "density"];

/// Every file with its columns and their meaning, as JSON.
pub fn csv_schema() -> serde_json::Value {
    let files: Vec<serde_json::Value> = CSV_FILES
        .iter()
        .map(|(name, _)| {
            let cols: Vec<serde_json::Value> = column_docs(name)
                .unwrap_or_default()
                .iter()
                .map(|(c, d)| serde_json::json!({ "name": c, "description": d }))
                .collect();
            serde_json::json!({ "file": format!("{name}.csv"), "columns": cols })
        })
        .collect();
    serde_json::json!({ "schema": CSV_SCHEMA, "files": files })
}

pub const CSV_SCHEMA: &str = "fpplab.csv/1";

/// One CSV output: header plus rows of already formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    pub fn write(&self, dir: &Path) -> Result<std::path::PathBuf> {
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv()?)?;
        Ok(path)
    }

    /// Appends the rows of a tail report.
    pub fn push_tail(&mut self, t: &TailReport) {
        for r in &t.rows {
            self.push(vec![
                t.group.clone(),
                num(r.x),
                r.n_total.to_string(),
                r.n_censored.to_string(),
                r.n_used().to_string(),
                r.exceed.to_string(),
                num(r.p),
                num(r.wilson_lo),
                num(r.wilson_hi),
                num(r.p_isotonic),
                r.note.clone(),
            ]);
        }
    }
}

/// Shortest round-trip formatting, so equal values give equal bytes.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}
