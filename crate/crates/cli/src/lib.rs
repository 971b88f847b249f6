pub mod config;
pub mod output;
pub mod suites;

pub use config::{Backend, Overrides, RunConfig, Strategy};
pub use suites::{run, Assertion, Row, Suite, SuiteReport};
