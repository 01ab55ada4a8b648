//! Exit-code classification.

use std::fmt;

/// A bad invocation, config or input file; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.to_string()))
}

pub trait OrUsage<T> {
    /// Reclassify an error as a usage error, prefixed with `what`.
    fn or_usage(self, what: impl fmt::Display) -> anyhow::Result<T>;
}

impl<T, E: fmt::Display> OrUsage<T> for std::result::Result<T, E> {
    fn or_usage(self, what: impl fmt::Display) -> anyhow::Result<T> {
        self.map_err(|e| usage(format!("{what}: {e}")))
    }
}

pub fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| c.is::<UsageError>())
}
