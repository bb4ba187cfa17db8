//! Match orchestration for the soccer simulation stack: configuration, the
//! built-in playmaker, decision corpora and in-process matches.

pub mod builtin;
pub mod config;
pub mod corpus;
pub mod run;

pub use builtin::{decide, BuiltinPlaymaker};
pub use config::{apply_param_overrides, MatchConfig, TeamSpec, BUILTIN};
pub use corpus::{read_corpus, write_corpus, Recorder};
pub use run::{run_match, server_config, MatchError, MatchHooks, MatchResult, TeamSummary};
