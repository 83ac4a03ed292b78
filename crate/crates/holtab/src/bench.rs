//! Benchmark harness: runs a list of problems under a schedule and
//! emits CSV rows `problem,status,steps,millis`.

use std::time::Duration;

use crate::engine::SearchStatus;
use crate::strategy::{run_schedule, Schedule};
use crate::szs::SzsStatus;
use crate::tptp::parse_problem;

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub problem: String,
    pub status: String,
    pub steps: u64,
    pub millis: u128,
}

/// One row per problem, in input order. Parse failures become `Error`
/// rows and the run continues. Solved problems are re-run and timed
/// best-of-3 to damp scheduler noise; unsolved ones are not re-run.
pub fn run_bench(problems: &[(String, String)], schedule: &Schedule, wall: Duration) -> Vec<BenchRow> {
    let mut rows = Vec::with_capacity(problems.len());
    for (name, text) in problems {
        let problem = match parse_problem(name, text, None) {
            Ok(p) => p,
            Err(_) => {
                rows.push(BenchRow {
                    problem: name.clone(),
                    status: SzsStatus::Error.to_string(),
                    steps: 0,
                    millis: 0,
                });
                continue;
            }
        };
        let first = run_schedule(&problem, schedule, wall, false);
        let mut best = first.result.elapsed;
        if first.result.status == SearchStatus::Theorem {
            for _ in 0..2 {
                let again = run_schedule(&problem, schedule, wall, false);
                best = best.min(again.result.elapsed);
            }
        }
        rows.push(BenchRow {
            problem: name.clone(),
            status: SzsStatus::from(first.result.status).to_string(),
            steps: first.result.steps,
            millis: best.as_millis(),
        });
    }
    rows
}

/// CSV with the fixed header `problem,status,steps,millis`.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("problem,status,steps,millis\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.problem, r.status, r.steps, r.millis
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::default_schedule;

    #[test]
    fn empty_list_gives_header_only() {
        let csv = to_csv(&run_bench(&[], &default_schedule(), Duration::from_secs(1)));
        assert_eq!(csv, "problem,status,steps,millis\n");
    }

    #[test]
    fn unparsable_problem_becomes_error_row() {
        let items = vec![
            ("bad".to_string(), "thf(".to_string()),
            (
                "good".to_string(),
                "thf(p_type, type, p: $o).\nthf(c, conjecture, p => p).".to_string(),
            ),
        ];
        let rows = run_bench(&items, &default_schedule(), Duration::from_secs(5));
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].status, "Error");
        assert_eq!(rows[1].status, "Theorem");
        let csv = to_csv(&rows);
        assert!(csv.starts_with("problem,status,steps,millis\n"));
        assert!(csv.contains("bad,Error,0,0"));
    }
}
