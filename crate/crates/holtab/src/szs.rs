//! SZS status vocabulary and the one-line result format.

use std::fmt;

use crate::engine::SearchStatus;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SzsStatus {
    Theorem,
    GaveUp,
    Timeout,
    Error,
}

impl fmt::Display for SzsStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SzsStatus::Theorem => "Theorem",
            SzsStatus::GaveUp => "GaveUp",
            SzsStatus::Timeout => "Timeout",
            SzsStatus::Error => "Error",
        };
        f.write_str(s)
    }
}

impl From<SearchStatus> for SzsStatus {
    fn from(s: SearchStatus) -> SzsStatus {
        match s {
            SearchStatus::Theorem => SzsStatus::Theorem,
            SearchStatus::GaveUp => SzsStatus::GaveUp,
            SearchStatus::Timeout => SzsStatus::Timeout,
        }
    }
}

/// `% SZS status <status> for <name>`
pub fn status_line(status: SzsStatus, name: &str) -> String {
    format!("% SZS status {status} for {name}")
}

impl SzsStatus {
    /// Process exit code: 0 proved, 1 not proved, 2 error.
    pub fn exit_code(self) -> i32 {
        match self {
            SzsStatus::Theorem => 0,
            SzsStatus::GaveUp | SzsStatus::Timeout => 1,
            SzsStatus::Error => 2,
        }
    }
}
