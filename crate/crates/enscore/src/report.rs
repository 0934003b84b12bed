//! Result containers and their on-disk renderings (tidy CSV, matrix CSV,
//! JSON). All rendering lives here so CLI output is byte-identical to
//! library output.

use serde::Serialize;
use std::collections::BTreeMap;

/// One observation of a study result in tidy form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TidyRow {
    pub study: String,
    pub cell: String,
    pub score: String,
    pub metric: String,
    /// None renders as the literal `NA` (score unavailable in that cell).
    pub value: Option<f64>,
}

impl TidyRow {
    pub fn new(
        study: &str,
        cell: impl Into<String>,
        score: &str,
        metric: &str,
        value: Option<f64>,
    ) -> Self {
        Self {
            study: study.to_string(),
            cell: cell.into(),
            score: score.to_string(),
            metric: metric.to_string(),
            value,
        }
    }
}

fn render_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

/// A study's tidy results plus the parameters that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub rows: Vec<TidyRow>,
}

impl StudyReport {
    pub fn new(study: &str, params: BTreeMap<String, serde_json::Value>, rows: Vec<TidyRow>) -> Self {
        Self {
            study: study.to_string(),
            params,
            rows,
        }
    }

    pub fn to_tidy_csv(&self) -> String {
        let mut out = String::from("study,cell,score,metric,value\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.study,
                r.cell,
                r.score,
                r.metric,
                render_value(r.value)
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let summary = serde_json::json!({
            "study": self.study,
            "params": self.params,
            "row_count": self.rows.len(),
        });
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

/// Pairwise Diebold-Mariano matrix for one score: statistic and one-sided p
/// per (row model, column model), diagonal and unavailable models null.
#[derive(Debug, Clone, Serialize)]
pub struct DmMatrix {
    pub score: String,
    pub models: Vec<String>,
    pub statistic: Vec<Vec<Option<f64>>>,
    pub p_one_sided: Vec<Vec<Option<f64>>>,
}

impl DmMatrix {
    /// Long-form CSV: one row per ordered model pair off the diagonal.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row_model,col_model,statistic,p_one_sided\n");
        for (i, a) in self.models.iter().enumerate() {
            for (j, b) in self.models.iter().enumerate() {
                if i == j {
                    continue;
                }
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    a,
                    b,
                    render_value(self.statistic[i][j]),
                    render_value(self.p_one_sided[i][j])
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serializes")
    }
}

/// One point of a low-dimensional score curve along the forecast horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub model: String,
    pub score: String,
    pub dim: usize,
    pub start_h: usize,
    pub window_mean: f64,
}

/// Full output of the airline study: the score-average table, one DM matrix
/// per score, and the low-dimensional score curves.
#[derive(Debug, Clone, Serialize)]
pub struct AirlineReport {
    pub models: Vec<String>,
    pub scores: Vec<String>,
    /// Score-average table, `table[score][model]`; None = unavailable.
    pub table: Vec<Vec<Option<f64>>>,
    /// (score, model, error message) for every unavailable table cell.
    pub unavailable: Vec<(String, String, String)>,
    pub dm: Vec<DmMatrix>,
    pub curves: Vec<CurveRow>,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl AirlineReport {
    /// Score table CSV: rows are scores, columns are models; unavailable
    /// cells are empty.
    pub fn score_table_csv(&self) -> String {
        let mut out = String::from("score");
        for m in &self.models {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (si, score) in self.scores.iter().enumerate() {
            out.push_str(score);
            for cell in &self.table[si] {
                out.push(',');
                if let Some(v) = cell {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn curves_csv(&self) -> String {
        let mut out = String::from("model,score,dim,start_h,window_mean\n");
        for c in &self.curves {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.model, c.score, c.dim, c.start_h, c.window_mean
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let summary = serde_json::json!({
            "study": "airline",
            "params": self.params,
            "models": self.models,
            "scores": self.scores,
            "unavailable": self.unavailable,
        });
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}
