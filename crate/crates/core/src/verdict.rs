//! Three-valued answers and the search bounds that produce them.

use serde::{Deserialize, Serialize};

/// Limits shared by every bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBounds {
    pub max_degree: u32,
    pub max_sum_length: usize,
    pub max_steps: usize,
    pub max_localization_exponent: u32,
    pub max_rules: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_degree: 12,
            max_sum_length: 8,
            max_steps: 100_000,
            max_localization_exponent: 4,
            max_rules: 300,
        }
    }
}

impl SearchBounds {
    pub fn with_degree(mut self, d: u32) -> Self {
        self.max_degree = d;
        self
    }

    pub fn with_steps(mut self, s: usize) -> Self {
        self.max_steps = s;
        self
    }

    pub fn with_length(mut self, l: usize) -> Self {
        self.max_sum_length = l;
        self
    }
}

/// Which bound stopped a search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exhausted {
    pub bound: String,
    pub detail: String,
}

impl Exhausted {
    pub fn new(bound: impl Into<String>, detail: impl Into<String>) -> Self {
        Exhausted { bound: bound.into(), detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "evidence", rename_all = "snake_case")]
pub enum Verdict<P, R> {
    Proved(P),
    Refuted(R),
    Unknown(Exhausted),
}

impl<P, R> Verdict<P, R> {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Proved(_) => VerdictKind::Proved,
            Verdict::Refuted(_) => VerdictKind::Refuted,
            Verdict::Unknown(_) => VerdictKind::Unknown,
        }
    }

    pub fn proved(self) -> Option<P> {
        match self {
            Verdict::Proved(p) => Some(p),
            _ => None,
        }
    }

    pub fn refuted(self) -> Option<R> {
        match self {
            Verdict::Refuted(r) => Some(r),
            _ => None,
        }
    }

    pub fn map<P2, R2>(self, f: impl FnOnce(P) -> P2, g: impl FnOnce(R) -> R2) -> Verdict<P2, R2> {
        match self {
            Verdict::Proved(p) => Verdict::Proved(f(p)),
            Verdict::Refuted(r) => Verdict::Refuted(g(r)),
            Verdict::Unknown(e) => Verdict::Unknown(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Proved,
    Refuted,
    Unknown,
}

impl VerdictKind {
    pub fn exit_code(self) -> i32 {
        match self {
            VerdictKind::Proved => 0,
            VerdictKind::Refuted => 1,
            VerdictKind::Unknown => 2,
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictKind::Proved => "Proved",
            VerdictKind::Refuted => "Refuted",
            VerdictKind::Unknown => "Unknown",
        })
    }
}
