use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ResultRecord;
use crate::corpus::VerifyStatus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    None,
    Syntax,
    Runtime,
    Semantic,
}

/// Timeouts count as runtime faults.
pub fn classify_error(status: VerifyStatus) -> ErrorClass {
    match status {
        VerifyStatus::Pass => ErrorClass::None,
        VerifyStatus::SyntaxError => ErrorClass::Syntax,
        VerifyStatus::RuntimeError | VerifyStatus::Timeout => ErrorClass::Runtime,
        VerifyStatus::WrongOutput => ErrorClass::Semantic,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    pub syntax: u64,
    pub runtime: u64,
    pub semantic: u64,
}

/// One count per task, taken from the task's lowest-index sample: a task
/// counts only if that sample fails, and under that sample's class.
pub fn error_histogram(records: &[ResultRecord]) -> ErrorHistogram {
    let mut first: BTreeMap<&str, &ResultRecord> = BTreeMap::new();
    for r in records {
        first
            .entry(r.task_id.as_str())
            .and_modify(|cur| {
                if r.sample_index < cur.sample_index {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    let mut h = ErrorHistogram::default();
    for r in first.values() {
        match classify_error(r.status) {
            ErrorClass::None => {}
            ErrorClass::Syntax => h.syntax += 1,
            ErrorClass::Runtime => h.runtime += 1,
            ErrorClass::Semantic => h.semantic += 1,
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(task: &str, idx: u32, status: VerifyStatus) -> ResultRecord {
        ResultRecord::new(task, "m", idx, status, Some(10), Some(1.0))
    }

    #[test]
    fn mapping() {
        assert_eq!(classify_error(VerifyStatus::WrongOutput), ErrorClass::Semantic);
        assert_eq!(classify_error(VerifyStatus::Timeout), ErrorClass::Runtime);
        assert_eq!(classify_error(VerifyStatus::RuntimeError), ErrorClass::Runtime);
        assert_eq!(classify_error(VerifyStatus::SyntaxError), ErrorClass::Syntax);
        assert_eq!(classify_error(VerifyStatus::Pass), ErrorClass::None);
    }

    #[test]
    fn histogram_counts_tasks_by_first_sample() {
        assert_eq!(error_histogram(&[rec("a", 0, VerifyStatus::Pass)]), ErrorHistogram::default());
        let one_each = [
            rec("a", 0, VerifyStatus::SyntaxError),
            rec("b", 0, VerifyStatus::Timeout),
            rec("c", 0, VerifyStatus::WrongOutput),
        ];
        assert_eq!(error_histogram(&one_each), ErrorHistogram { syntax: 1, runtime: 1, semantic: 1 });
        let mixed = [rec("a", 1, VerifyStatus::SyntaxError), rec("a", 0, VerifyStatus::WrongOutput)];
        assert_eq!(error_histogram(&mixed), ErrorHistogram { syntax: 0, runtime: 0, semantic: 1 });
        let first_passes = [rec("a", 0, VerifyStatus::Pass), rec("a", 1, VerifyStatus::RuntimeError)];
        assert_eq!(error_histogram(&first_passes), ErrorHistogram::default());
    }
}
