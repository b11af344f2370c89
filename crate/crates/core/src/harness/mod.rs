//! Runnable fixtures over the whole protocol: a seeded fleet, declarative
//! scenarios and the operation-count benchmark.

mod bench;
mod fleet;
mod scenario;

pub use bench::{bench, BenchConfig, BenchReport, BenchRow, REFERENCE_MESSAGE_LEN};
pub use fleet::{identity_for, Fleet, FIXTURE_LIFETIME};
pub use scenario::{
    run_scenario, Action, AuthStep, Expect, Outcome, ScenarioConfig, ScenarioError,
    ScenarioReport, Step, Tamper, DEFAULT_START_TIME,
};

#[cfg(test)]
mod tests;
