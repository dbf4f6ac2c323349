//! Batch toolkit for LLM-based mental inference over product comments.
//!
//! Runs standard, chain-of-thought, and tree-of-thoughts prompting pipelines
//! that infer a user's goal hierarchy (do/motor/be goals) and attributions to
//! 13 fundamental psychological needs, then scores the inferences against
//! self-reported baselines with an empathic-accuracy metric and reproduces the
//! group/correlation statistics over the results.

pub mod backend;
pub mod cli;
pub mod domain;
pub mod metric;
pub mod pipeline;
pub mod run;
pub mod stats;
