//! Result tables and the decision-similarity study.

use crate::error::{Error, Result};
use crate::mdp::{error_histogram, EpisodeRecord, SummaryStats, ERROR_BINS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One table row. Rates are in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub policy: String,
    pub success_pct: f64,
    pub mean_actions: f64,
    pub std_actions: f64,
    pub mean_actions_success: Option<f64>,
    pub std_actions_success: Option<f64>,
}

impl From<&SummaryStats> for ResultRow {
    fn from(s: &SummaryStats) -> Self {
        Self {
            policy: s.policy.clone(),
            success_pct: 100.0 * s.success_rate,
            mean_actions: s.mean_actions,
            std_actions: s.std_actions,
            mean_actions_success: s.mean_actions_success,
            std_actions_success: s.std_actions_success,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub csv: String,
    pub text: String,
}

const HEADERS: [&str; 6] = [
    "Policy",
    "Success %",
    "Mean #actions",
    "Std #actions",
    "Mean #actions (succ.)",
    "Std #actions (succ.)",
];

fn cells(r: &ResultRow) -> [String; 6] {
    let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.2}"));
    [
        r.policy.clone(),
        format!("{:.1}", r.success_pct),
        format!("{:.2}", r.mean_actions),
        format!("{:.2}", r.std_actions),
        opt(r.mean_actions_success),
        opt(r.std_actions_success),
    ]
}

/// Renders rows sorted by policy name as CSV and as an aligned text table.
/// Means and standard deviations over all episodes come first, then the
/// same over successful episodes only.
pub fn report_results(rows: &[ResultRow]) -> Result<ResultTable> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no policies to report"));
    }
    let mut rows: Vec<&ResultRow> = rows.iter().collect();
    rows.sort_by(|a, b| a.policy.cmp(&b.policy));
    let body: Vec<[String; 6]> = rows.iter().map(|r| cells(r)).collect();

    let mut csv = String::from("policy,success_pct,mean_actions,std_actions,mean_actions_success,std_actions_success\n");
    for c in &body {
        csv.push_str(&c.join(","));
        csv.push('\n');
    }

    let mut widths = HEADERS.map(str::len);
    for c in &body {
        for (w, cell) in widths.iter_mut().zip(c) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |c: &[String]| -> String {
        let parts: Vec<String> = c
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k == 0 {
                    format!("{s:<w$}", w = widths[k])
                } else {
                    format!("{s:>w$}", w = widths[k])
                }
            })
            .collect();
        parts.join("  ").trim_end().to_owned() + "\n"
    };
    let mut text = line(&HEADERS.map(String::from));
    text.push_str(&line(&widths.map(|w| "-".repeat(w))));
    for c in &body {
        text.push_str(&line(c));
    }
    Ok(ResultTable { csv, text })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub histogram: [usize; ERROR_BINS],
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySimilarity {
    pub policy: String,
    pub episodes: usize,
    pub steps: usize,
    pub vs_es: ErrorStats,
    pub vs_les: ErrorStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// Sorted by policy name.
    pub policies: Vec<PolicySimilarity>,
}

impl SimilarityReport {
    pub fn get(&self, policy: &str) -> Option<&PolicySimilarity> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

fn error_stats(mut e: Vec<f64>) -> ErrorStats {
    let histogram = error_histogram(e.iter().copied());
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    e.sort_by(f64::total_cmp);
    let n = e.len();
    let median = if n % 2 == 1 {
        e[n / 2]
    } else {
        0.5 * (e[n / 2 - 1] + e[n / 2])
    };
    ErrorStats {
        histogram,
        mean,
        median,
    }
}

/// Groups episodes by policy and summarizes, for every executed push, how
/// far its direction was from what ES and LES would have chosen.
pub fn similarity_analysis(records: &[EpisodeRecord]) -> Result<SimilarityReport> {
    let mut by_policy: BTreeMap<&str, Vec<&EpisodeRecord>> = BTreeMap::new();
    for r in records {
        by_policy.entry(&r.policy).or_default().push(r);
    }
    let mut policies = Vec::new();
    for (name, eps) in by_policy {
        let steps: Vec<_> = eps.iter().flat_map(|r| r.steps.iter()).collect();
        if steps.is_empty() {
            continue;
        }
        policies.push(PolicySimilarity {
            policy: name.to_owned(),
            episodes: eps.len(),
            steps: steps.len(),
            vs_es: error_stats(steps.iter().map(|s| s.e_es).collect()),
            vs_les: error_stats(steps.iter().map(|s| s.e_les).collect()),
        });
    }
    if policies.is_empty() {
        return Err(Error::EmptyInput("no recorded steps to analyze"));
    }
    Ok(SimilarityReport { policies })
}
