//! Signal-group mathematics: temperature-scaled softmax and the group
//! firing rule.
//!
//! A group of k signals is normalized jointly so that at most one member
//! fires. Firing is argmax-gated: the softmax winner fires iff its
//! normalized score strictly exceeds the firing gate (1/k unless the group
//! declares one) and its raw score exceeds the member's own threshold. For
//! k = 2 this coincides with the plain `normalized > 0.5` check emitted into
//! generated code, and for k ≥ 3 it makes at-most-one firing structurally
//! true at any finite temperature.
//!
//! Ties are detected on exact raw-score equality. A tie at the maximum
//! returns no winner unless the group opts into `tie_break: priority_order`,
//! in which case the earliest-declared tied member wins and the gate
//! comparison relaxes from `>` to `≥`.

use crate::ast::{SignalGroup, TieBreak};
use indexmap::IndexMap;
use thiserror::Error;

/// Raw scores in group member order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub entries: Vec<(String, f64)>,
}

impl ScoreVector {
    pub fn new(entries: Vec<(String, f64)>) -> ScoreVector {
        ScoreVector { entries }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, v)| *v)
    }
}

/// Softmax outputs in the same order; entries sum to 1 within 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedScores {
    pub entries: Vec<(String, f64)>,
}

impl NormalizedScores {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GroupFireError {
    #[error("score vector does not match group members: {0}")]
    MemberMismatch(String),
}

/// Temperature-scaled softmax with max-subtraction for numeric stability:
/// `normalized_i = exp(raw_i/τ) / Σ_j exp(raw_j/τ)`.
///
/// `temperature` must be positive and `scores` nonempty; both are programmer
/// errors rather than data errors, so they panic.
pub fn softmax(scores: &ScoreVector, temperature: f64) -> NormalizedScores {
    assert!(temperature > 0.0, "softmax temperature must be positive");
    assert!(!scores.entries.is_empty(), "softmax needs at least one entry");

    let max = scores
        .values()
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores
        .values()
        .map(|v| ((v - max) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    NormalizedScores {
        entries: scores
            .entries
            .iter()
            .zip(exps)
            .map(|((name, _), e)| (name.clone(), e / sum))
            .collect(),
    }
}

/// Decides which group member fires, if any, for one raw score vector.
///
/// `signal_thresholds` maps each member to its declared θ; the raw score of
/// the softmax winner must strictly exceed it.
pub fn group_fire(
    group: &SignalGroup,
    raw: &ScoreVector,
    signal_thresholds: &IndexMap<String, f64>,
) -> Result<Option<String>, GroupFireError> {
    if raw.entries.len() != group.members.len()
        || raw.names().ne(group.members.iter().map(String::as_str))
    {
        return Err(GroupFireError::MemberMismatch(format!(
            "expected [{}], got [{}]",
            group.members.join(", "),
            raw.names().collect::<Vec<_>>().join(", ")
        )));
    }
    for member in &group.members {
        if !signal_thresholds.contains_key(member) {
            return Err(GroupFireError::MemberMismatch(format!(
                "no threshold provided for member `{}`",
                member
            )));
        }
    }

    let normalized = softmax(raw, group.temperature);

    // argmax over raw scores; softmax is monotone so this is also the
    // argmax of the normalized scores.
    let max_raw = raw.values().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = raw
        .values()
        .enumerate()
        .filter(|(_, v)| *v == max_raw)
        .map(|(i, _)| i)
        .collect();

    let (winner, relaxed_gate) = if tied.len() > 1 {
        match group.tie_break {
            TieBreak::None => return Ok(None),
            TieBreak::PriorityOrder => (tied[0], true),
        }
    } else {
        (tied[0], false)
    };

    let (name, raw_score) = &raw.entries[winner];
    let norm_score = normalized.entries[winner].1;
    let gate = group.effective_firing_threshold();
    let gate_open = if relaxed_gate {
        norm_score >= gate
    } else {
        norm_score > gate
    };
    let theta = signal_thresholds[name];
    Ok((gate_open && *raw_score > theta).then(|| name.clone()))
}
