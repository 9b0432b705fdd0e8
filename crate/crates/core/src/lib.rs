//! Web-corpus extraction and cleaning: shard ingestion, trainable open-set
//! language identification, quality warnings, PII scrubbing, fuzzy document
//! hashing, URL classification, and per-language partitioned output.

pub mod blocklist;
pub mod corpus;
pub mod digest;
pub mod eval;
pub mod filters;
pub mod label;
pub mod lid;
pub mod pii;
pub mod pipeline;
pub mod samples;
pub mod script;
pub mod synth;
