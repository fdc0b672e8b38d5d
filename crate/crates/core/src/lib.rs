//! Line-level semantic supervision for LLM code generation.
//!
//! The crate has two halves. [`corpus`] turns paired correct/erroneous
//! submissions into labeled prefix fragments that mark where a program first
//! drifts from the intended logic. [`guard`] consumes a line-proposing
//! [`generator::Generator`] and a prefix-scoring [`evaluator::Evaluator`] and
//! grows a program line by line, rolling back and resampling any line whose
//! prefix score falls to the threshold or below.
//!
//! [`metrics`] holds the evaluation side: unbiased pass@k, execution-based
//! error taxonomy, rollback false-positive rates and cost reports.
//!
//! Data-parallel loops (verification, pairing, batch sessions, calibration)
//! go through [`par`], which uses rayon when the `parallel` feature is on and
//! falls back to plain iteration otherwise.

pub mod corpus;
pub mod evaluator;
pub mod fixtures;
pub mod generator;
pub mod guard;
pub mod hashing;
pub mod metrics;
pub mod par;

#[cfg(test)]
pub(crate) mod test_http;
