//! Defaults for every command. Each flag can also be set through an
//! environment variable named `EXPLAINBOT_<FLAG>`, for example
//! `EXPLAINBOT_PORT=9000` or `EXPLAINBOT_MODEL=/srv/titanic.forest`.
//! A flag given on the command line wins over the environment.

use explainbot_core::corpus::DEFAULT_MIN_QUERIES;
use explainbot_core::tabular::{DEFAULT_SEED, DEFAULT_TEST_FRACTION};

pub const SEED: u64 = DEFAULT_SEED;
pub const TEST_FRACTION: f64 = DEFAULT_TEST_FRACTION;
pub const PORT: u16 = 8080;
pub const HOST: &str = "127.0.0.1";
pub const CORS_ORIGINS: &str = "*";
pub const MIN_QUERIES: usize = DEFAULT_MIN_QUERIES;
pub const FLOW_DEPTH: usize = 2;
pub const TREES: usize = 500;
