//! Sweeps over many groups: classify each, optionally decide it by complete
//! search, and flag any disagreement between the two.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Budgets;
use crate::error::{Error, Result};
use crate::group::{PGroupSpec, RawSpec};
use crate::oracle::{complement_lift_search, NotFoundReason, SearchOptions, SearchOutcome};
use crate::splitting::{classify, verify_section, SplitOutcome, VerifyMode};

#[derive(Clone, Debug)]
pub struct BatchOptions {
    pub with_oracle: bool,
    pub budgets: Budgets,
    pub seed: u64,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { with_oracle: false, budgets: Budgets::default(), seed: crate::config::DEFAULT_SEED, workers: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BatchRow {
    /// 1-based line number in the input.
    pub line: usize,
    pub spec: Option<String>,
    pub outcome: Option<SplitOutcome>,
    pub rule: Option<String>,
    /// `Found`, `NotFound-Exhausted`, `NotFound-Obstruction`, or
    /// `classifier-only` when the search was over budget.
    pub oracle: Option<String>,
    /// `None` when no definite oracle answer exists or the classifier says `Unknown`.
    pub agreement: Option<bool>,
    pub error: Option<String>,
}

impl BatchRow {
    pub fn disagrees(&self) -> bool {
        self.agreement == Some(false)
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| r.disagrees()).count()
    }

    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["line", "spec", "outcome", "rule", "oracle", "agreement", "error"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.line.to_string(),
                r.spec.clone().unwrap_or_default(),
                r.outcome.map(|o| o.to_string()).unwrap_or_default(),
                r.rule.clone().unwrap_or_default(),
                r.oracle.clone().unwrap_or_default(),
                r.agreement.map(|a| a.to_string()).unwrap_or_default(),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Non-blank input lines with their 1-based numbers, each parsed as a group.
pub fn parse_lines(input: &str) -> Vec<(usize, Result<PGroupSpec>)> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let parsed = serde_json::from_str::<RawSpec>(l)
                .map_err(Error::from)
                .and_then(PGroupSpec::try_from);
            (i + 1, parsed)
        })
        .collect()
}

fn oracle_verdict(spec: &Arc<PGroupSpec>, opts: &BatchOptions) -> Result<&'static str> {
    let search = SearchOptions { seed: opts.seed, ..SearchOptions::default() };
    match complement_lift_search(spec, &opts.budgets, &search) {
        Ok(SearchOutcome::Found { certificate, .. }) => {
            verify_section(&certificate, VerifyMode::Auto, opts.seed)?;
            Ok("Found")
        }
        Ok(SearchOutcome::NotFound { reason: NotFoundReason::Exhausted, .. }) => Ok("NotFound-Exhausted"),
        Ok(SearchOutcome::NotFound { reason: NotFoundReason::OrderPObstruction, .. }) => Ok("NotFound-Obstruction"),
        Err(Error::BudgetExceeded { .. }) => Ok("classifier-only"),
        Err(e) => Err(e),
    }
}

fn process(line: usize, parsed: &Result<PGroupSpec>, opts: &BatchOptions) -> BatchRow {
    let mut row = BatchRow { line, spec: None, outcome: None, rule: None, oracle: None, agreement: None, error: None };
    let spec = match parsed {
        Ok(s) => Arc::new(s.clone()),
        Err(e) => {
            row.error = Some(format!("line {line}: {e}"));
            return row;
        }
    };
    row.spec = Some(spec.to_string());
    let verdict = classify(&spec);
    row.outcome = Some(verdict.outcome);
    row.rule = Some(verdict.rule);
    if opts.with_oracle {
        match oracle_verdict(&spec, opts) {
            Ok(v) => {
                row.oracle = Some(v.to_string());
                let found = match v {
                    "Found" => Some(true),
                    "classifier-only" => None,
                    _ => Some(false),
                };
                row.agreement = match (verdict.outcome, found) {
                    (SplitOutcome::Unknown, _) | (_, None) => None,
                    (o, Some(f)) => Some((o == SplitOutcome::Splits) == f),
                };
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    row
}

/// Processes every line; rows come back in input order.
pub fn run_batch(lines: &[(usize, Result<PGroupSpec>)], opts: &BatchOptions) -> Result<BatchReport> {
    let work = || lines.par_iter().map(|(n, s)| process(*n, s, opts)).collect::<Vec<_>>();
    let rows = match opts.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(BatchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input() {
        let report = run_batch(&parse_lines("\n  \n"), &BatchOptions::default()).unwrap();
        assert!(report.rows.is_empty());
        assert_eq!(report.to_csv().unwrap(), "line,spec,outcome,rule,oracle,agreement,error\n");
    }

    #[test]
    fn malformed_lines_become_error_rows() {
        let input = "{\"p\":5,\"blocks\":[{\"n\":2,\"r\":2}]}\nnot json\n{\"p\":4,\"blocks\":[{\"n\":1,\"r\":1}]}\n";
        let report = run_batch(&parse_lines(input), &BatchOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.rows[0].outcome, Some(SplitOutcome::DoesNotSplit));
        assert!(report.rows[1].error.as_deref().unwrap().starts_with("line 2:"));
        assert!(report.rows[2].error.as_deref().unwrap().contains("NonPrime"));
        assert_eq!(report.errors(), 2);
    }

    #[test]
    fn oracle_agreement_on_small_groups() {
        let input = [
            r#"{"p":3,"blocks":[{"n":2,"r":2}]}"#,
            r#"{"p":5,"blocks":[{"n":2,"r":2}]}"#,
            r#"{"p":5,"blocks":[{"n":1,"r":1},{"n":2,"r":1}]}"#,
        ]
        .join("\n");
        let opts = BatchOptions { with_oracle: true, ..BatchOptions::default() };
        let report = run_batch(&parse_lines(&input), &opts).unwrap();
        let oracle: Vec<_> = report.rows.iter().map(|r| r.oracle.clone().unwrap()).collect();
        assert_eq!(oracle, ["Found", "NotFound-Obstruction", "Found"]);
        assert!(report.rows.iter().all(|r| r.agreement == Some(true)));
    }
}
