//! Reference interpreter: evaluates signals through pluggable evaluators,
//! traverses decision trees, produces hash-chained audit traces, executes
//! TEST blocks, and applies protocol-gate specs to sample messages.
//!
//! Evaluation is stateless per request and safe to run concurrently; the
//! trace log is a single-writer sequence.

pub mod evaluators;
pub mod trace;

use crate::ast::*;
use crate::normalize::{group_fire, softmax, GroupFireError, ScoreVector};
use evaluators::EvaluatorRegistry;
use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;
use trace::{AuditTraceEntry, TraceValue};

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("no evaluator registered for signal kind `{kind}`")]
    MissingEvaluator { kind: SignalKind },
    #[error("evaluator for `{signal}` returned {score}, outside [0, 1]")]
    EvaluatorRange { signal: String, score: f64 },
    #[error("no score available for signal `{name}`")]
    MissingScore { name: String },
    #[error("audit chain break at entry {index}: prev_hash does not match the predecessor")]
    ChainBreak { index: usize },
    #[error("could not extract text from protocol message: {reason}")]
    ExtractionFailure { reason: String },
    #[error("gate spec references unknown tree `{tree}`")]
    UnknownTree { tree: String },
    #[error("tree `{tree}` has no ELSE backend; refusing to route")]
    IncompleteTree { tree: String },
    #[error(transparent)]
    Group(#[from] GroupFireError),
}

/// Injectable timestamp source; `Fixed` keeps traces reproducible in tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clock {
    System,
    Fixed(f64),
}

impl Clock {
    pub fn now(&self) -> f64 {
        match self {
            Clock::Fixed(ts) => *ts,
            Clock::System => std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs_f64())
                .unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvaluationContext {
    pub user_roles: Vec<String>,
    pub channel: IndexMap<String, String>,
    pub clock: Clock,
}

impl Default for EvaluationContext {
    fn default() -> Self {
        EvaluationContext {
            user_roles: Vec::new(),
            channel: IndexMap::new(),
            clock: Clock::System,
        }
    }
}

impl EvaluationContext {
    pub fn with_roles(user_roles: Vec<String>) -> EvaluationContext {
        EvaluationContext {
            user_roles,
            ..EvaluationContext::default()
        }
    }
}

/// Scores per signal. Group members carry both a normalized entry under the
/// signal name and the pre-softmax raw under `<name>_raw`; authz signals
/// carry a boolean with the usual {0, 1} score view.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalScoreMap {
    entries: IndexMap<String, TraceValue>,
}

impl SignalScoreMap {
    pub fn from_entries(entries: IndexMap<String, TraceValue>) -> SignalScoreMap {
        SignalScoreMap { entries }
    }

    pub fn get(&self, name: &str) -> Option<TraceValue> {
        self.entries.get(name).copied()
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.get(name).map(TraceValue::as_score)
    }

    /// Boolean view: flags directly, scores thresholded at 0.5.
    pub fn is_true(&self, name: &str) -> Option<bool> {
        self.get(name).map(|v| match v {
            TraceValue::Flag(b) => b,
            TraceValue::Score(s) => s >= 0.5,
        })
    }

    pub fn entries(&self) -> &IndexMap<String, TraceValue> {
        &self.entries
    }
}

/// Evaluates every declared signal, applying group softmax normalization.
pub fn evaluate_signals(
    policy: &Policy,
    input: &str,
    ctx: &EvaluationContext,
    registry: &EvaluatorRegistry,
) -> Result<SignalScoreMap, RuntimeError> {
    let mut raw: IndexMap<&str, f64> = IndexMap::new();
    for signal in policy.signals.values() {
        let evaluator = registry.for_signal(signal)?;
        let score = evaluator.evaluate(signal, input, ctx);
        if !(0.0..=1.0).contains(&score) || !score.is_finite() {
            return Err(RuntimeError::EvaluatorRange {
                signal: signal.name.clone(),
                score,
            });
        }
        raw.insert(signal.name.as_str(), score);
    }

    let mut normalized: IndexMap<&str, f64> = IndexMap::new();
    for group in policy.signal_groups.values() {
        let vector = ScoreVector::new(
            group
                .members
                .iter()
                .map(|m| (m.clone(), raw.get(m.as_str()).copied().unwrap_or(0.0)))
                .collect(),
        );
        for (name, value) in softmax(&vector, group.temperature).entries {
            // Leak-free: keys borrow from the policy's member strings.
            if let Some(member) = group.members.iter().find(|m| **m == name) {
                normalized.insert(member.as_str(), value);
            }
        }
    }

    let mut entries = IndexMap::new();
    for signal in policy.signals.values() {
        let score = raw[signal.name.as_str()];
        if let Some(norm) = normalized.get(signal.name.as_str()) {
            entries.insert(signal.name.clone(), TraceValue::Score(*norm));
            entries.insert(format!("{}_raw", signal.name), TraceValue::Score(score));
        } else if signal.kind == SignalKind::Authz {
            entries.insert(signal.name.clone(), TraceValue::Flag(score >= 0.5));
        } else {
            entries.insert(signal.name.clone(), TraceValue::Score(score));
        }
    }
    Ok(SignalScoreMap { entries })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RoutingDecision {
    pub tree: String,
    /// Branch label: the backend name, or `branch_<i>` when several arms
    /// share one backend.
    pub branch: String,
    /// 0-based; ELSE is the branch count.
    pub branch_idx: usize,
    pub backend: String,
}

fn effective_theta(policy: &Policy, name: &str, embedding_override: Option<f64>) -> f64 {
    let signal = policy.signals.get(name);
    match (signal, embedding_override) {
        (Some(s), Some(o)) if s.kind == SignalKind::Embedding => o,
        (Some(s), _) => s.threshold.unwrap_or(0.5),
        (None, _) => 0.5,
    }
}

fn member_raw_vector(
    group: &SignalGroup,
    scores: &SignalScoreMap,
) -> Result<ScoreVector, RuntimeError> {
    let entries = group
        .members
        .iter()
        .map(|m| {
            scores
                .score(&format!("{}_raw", m))
                .map(|v| (m.clone(), v))
                .ok_or_else(|| RuntimeError::MissingScore {
                    name: format!("{}_raw", m),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScoreVector::new(entries))
}

fn group_thresholds_with_override(
    policy: &Policy,
    group: &SignalGroup,
    embedding_override: Option<f64>,
) -> IndexMap<String, f64> {
    group
        .members
        .iter()
        .map(|m| (m.clone(), effective_theta(policy, m, embedding_override)))
        .collect()
}

/// Does one signal reference hold under the score map? Group members use
/// the full group-firing semantics (argmax gate plus member threshold).
fn ref_fires(
    kind: SignalKind,
    name: &str,
    scores: &SignalScoreMap,
    policy: &Policy,
    embedding_override: Option<f64>,
) -> Result<bool, RuntimeError> {
    if let Some(group) = policy.group_of(name) {
        let raw = member_raw_vector(group, scores)?;
        let thresholds = group_thresholds_with_override(policy, group, embedding_override);
        let fired = group_fire(group, &raw, &thresholds)?;
        return Ok(fired.as_deref() == Some(name));
    }
    match kind {
        SignalKind::Authz => scores
            .is_true(name)
            .ok_or_else(|| RuntimeError::MissingScore { name: name.into() }),
        _ => {
            let score = scores
                .score(name)
                .ok_or_else(|| RuntimeError::MissingScore { name: name.into() })?;
            Ok(score > effective_theta(policy, name, embedding_override))
        }
    }
}

fn eval_condition(
    cond: &ConditionExpr,
    scores: &SignalScoreMap,
    policy: &Policy,
    embedding_override: Option<f64>,
) -> Result<bool, RuntimeError> {
    Ok(match cond {
        ConditionExpr::SignalRef { kind, name, .. } => {
            ref_fires(*kind, name, scores, policy, embedding_override)?
        }
        ConditionExpr::And(l, r) => {
            eval_condition(l, scores, policy, embedding_override)?
                && eval_condition(r, scores, policy, embedding_override)?
        }
        ConditionExpr::Or(l, r) => {
            eval_condition(l, scores, policy, embedding_override)?
                || eval_condition(r, scores, policy, embedding_override)?
        }
        ConditionExpr::Not(c) => !eval_condition(c, scores, policy, embedding_override)?,
    })
}

fn comparison(score: f64, threshold_text: &str, fired: bool, group: bool) -> String {
    let op = if fired { ">" } else { "<=" };
    let suffix = if group { " (group)" } else { "" };
    format!("{:.4} {} {}{}", score, op, threshold_text, suffix)
}

/// Per-reference explanations for the selected branch, formatted like
/// `"0.9983 > 0.5 (group)"` and `"0.7465 > 0.70"`.
fn explain_branch(
    cond: &ConditionExpr,
    scores: &SignalScoreMap,
    policy: &Policy,
    embedding_override: Option<f64>,
) -> IndexMap<String, String> {
    let mut out = IndexMap::new();
    for (kind, name, _) in cond.refs() {
        if out.contains_key(name) {
            continue;
        }
        if let Some(group) = policy.group_of(name) {
            let gate_text = match group.firing_threshold {
                Some(t) => two_dec(t),
                None => crate::emit::text::shortest(group.effective_firing_threshold()),
            };
            if let (Some(norm), Some(raw)) =
                (scores.score(name), scores.score(&format!("{}_raw", name)))
            {
                let theta = effective_theta(policy, name, embedding_override);
                out.insert(
                    name.to_string(),
                    comparison(norm, &gate_text, norm > group.effective_firing_threshold(), true),
                );
                out.insert(
                    format!("{}_raw", name),
                    comparison(raw, &two_dec(theta), raw > theta, false),
                );
            }
            continue;
        }
        match kind {
            SignalKind::Authz => {
                if let Some(flag) = scores.is_true(name) {
                    out.insert(name.to_string(), flag.to_string());
                }
            }
            _ => {
                if let Some(score) = scores.score(name) {
                    let theta = effective_theta(policy, name, embedding_override);
                    out.insert(
                        name.to_string(),
                        comparison(score, &two_dec(theta), score > theta, false),
                    );
                }
            }
        }
    }
    out
}

/// Routes one score map through a tree: branches evaluate in declaration
/// order, the first satisfied branch wins, ELSE otherwise. The returned
/// trace entry snapshots every signal value and explains the selected
/// branch's threshold crossings; `prev_hash` chains it to `chain_prev`.
pub fn route(
    tree: &DecisionTree,
    scores: &SignalScoreMap,
    policy: &Policy,
    chain_prev: Option<&AuditTraceEntry>,
    clock: &Clock,
) -> Result<(RoutingDecision, AuditTraceEntry), RuntimeError> {
    route_with_override(tree, scores, policy, chain_prev, clock, None)
}

/// [`route`] with a per-gate embedding threshold override (protocol gates
/// may run embedding comparisons at a lowered threshold while the source
/// policy, and therefore the source hash, stays unchanged).
pub fn route_with_override(
    tree: &DecisionTree,
    scores: &SignalScoreMap,
    policy: &Policy,
    chain_prev: Option<&AuditTraceEntry>,
    clock: &Clock,
    embedding_override: Option<f64>,
) -> Result<(RoutingDecision, AuditTraceEntry), RuntimeError> {
    let labels = tree.branch_labels();
    let mut selected: Option<(usize, &str)> = None;
    for (i, branch) in tree.branches.iter().enumerate() {
        if eval_condition(&branch.condition, scores, policy, embedding_override)? {
            selected = Some((i, branch.backend.as_str()));
            break;
        }
    }
    let (branch_idx, backend, thresholds_crossed) = match selected {
        Some((i, backend)) => (
            i,
            backend,
            explain_branch(
                &tree.branches[i].condition,
                scores,
                policy,
                embedding_override,
            ),
        ),
        None => {
            let backend = tree
                .else_backend
                .as_deref()
                .ok_or_else(|| RuntimeError::IncompleteTree {
                    tree: tree.name.clone(),
                })?;
            (tree.branches.len(), backend, IndexMap::new())
        }
    };

    let decision = RoutingDecision {
        tree: tree.name.clone(),
        branch: labels
            .get(branch_idx)
            .cloned()
            .unwrap_or_else(|| backend.to_string()),
        branch_idx,
        backend: backend.to_string(),
    };
    let entry = AuditTraceEntry {
        ts: clock.now(),
        policy_version: policy.version.clone(),
        source_hash: compute_source_hash(policy).as_str().to_string(),
        tree: decision.tree.clone(),
        branch: decision.branch.clone(),
        branch_idx,
        signals: scores.entries.clone(),
        thresholds_crossed,
        prev_hash: chain_prev.map(trace::entry_digest),
    };
    Ok((decision, entry))
}

// --- TEST blocks --------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct TestCaseResult {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    pub trace: Vec<AuditTraceEntry>,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct TestReport {
    pub cases: Vec<TestCaseResult>,
}

impl TestReport {
    pub fn all_passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
    }
}

/// Runs every TEST block: evaluate signals on the case input, then route
/// through the effective trees in declaration order. A tree deciding the
/// built-in `allow` passes control to the next tree; any other backend is
/// terminal. A policy whose every tree allows yields `allow`.
pub fn run_tests(
    policy: &Policy,
    registry: &EvaluatorRegistry,
    clock: &Clock,
) -> Result<TestReport, RuntimeError> {
    let trees = policy.effective_trees();
    let mut report = TestReport::default();
    for case in &policy.tests {
        let ctx = EvaluationContext::with_roles(case.user_roles.clone());
        let scores = evaluate_signals(policy, &case.input, &ctx, registry)?;
        let (actual, chain) = route_sequence(&trees, &scores, policy, clock)?;
        report.cases.push(TestCaseResult {
            name: case.name.clone(),
            expected: case.expected_decision.clone(),
            actual: actual.clone(),
            passed: actual == case.expected_decision,
            trace: chain,
        });
    }
    Ok(report)
}

/// Shared tree-sequence semantics for TEST execution and `explain`.
pub fn route_sequence(
    trees: &IndexMap<String, DecisionTree>,
    scores: &SignalScoreMap,
    policy: &Policy,
    clock: &Clock,
) -> Result<(String, Vec<AuditTraceEntry>), RuntimeError> {
    let mut chain: Vec<AuditTraceEntry> = Vec::new();
    let mut outcome = "allow".to_string();
    for tree in trees.values() {
        let (decision, entry) = route(tree, scores, policy, chain.last(), clock)?;
        chain.push(entry);
        if decision.backend != "allow" {
            outcome = decision.backend;
            break;
        }
    }
    Ok((outcome, chain))
}

// --- protocol gates ------------------------------------------------------------

/// Gate spec as emitted under `protocol_gates/`; unknown fields are ignored
/// so the spec format can grow.
#[derive(Debug, Clone, Deserialize)]
pub struct GateSpec {
    pub boundary: String,
    #[serde(default)]
    pub extraction: String,
    pub tree: String,
    #[serde(default)]
    pub embedding_threshold_override: Option<f64>,
    #[serde(default)]
    pub source_hash: String,
}

impl GateSpec {
    pub fn from_json(text: &str) -> Result<GateSpec, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GateOutcome {
    pub allowed: bool,
    pub backend: String,
}

/// Extracts the text a gate evaluates from a protocol message.
///
/// Accepted shapes: `{"tool": "...", "args": {...}}` for MCP tool calls
/// (tool name concatenated with argument values), `{"parts": ["...", ...]}`
/// for A2A task sends (text parts concatenated; parts may be objects with a
/// `text` field), and `{"response": "..."}` or a bare JSON string for tool
/// responses. An optional `user_roles` array rides along for authz signals.
pub fn extract_text(boundary: &str, message: &serde_json::Value) -> Result<String, RuntimeError> {
    let fail = |reason: &str| RuntimeError::ExtractionFailure {
        reason: reason.to_string(),
    };
    let text = match boundary {
        "mcp_tools_call" => {
            let tool = message
                .get("tool")
                .and_then(|v| v.as_str())
                .ok_or_else(|| fail("mcp_tools_call message lacks a string `tool` field"))?;
            let mut parts = vec![tool.to_string()];
            if let Some(args) = message.get("args") {
                collect_scalars(args, &mut parts);
            }
            parts.join(" ")
        }
        "a2a_tasks_send" => {
            let parts = message
                .get("parts")
                .and_then(|v| v.as_array())
                .ok_or_else(|| fail("a2a_tasks_send message lacks a `parts` array"))?;
            let texts: Vec<String> = parts
                .iter()
                .filter_map(|p| {
                    p.as_str()
                        .map(String::from)
                        .or_else(|| p.get("text").and_then(|t| t.as_str()).map(String::from))
                })
                .collect();
            texts.join(" ")
        }
        "tool_response" => message
            .as_str()
            .map(String::from)
            .or_else(|| {
                message
                    .get("response")
                    .and_then(|v| v.as_str())
                    .map(String::from)
            })
            .ok_or_else(|| fail("tool_response message lacks response text"))?,
        other => return Err(fail(&format!("unknown gate boundary `{}`", other))),
    };
    if text.trim().is_empty() {
        return Err(fail("extracted text is empty"));
    }
    Ok(text)
}

fn collect_scalars(value: &serde_json::Value, out: &mut Vec<String>) {
    match value {
        serde_json::Value::String(s) => out.push(s.clone()),
        serde_json::Value::Number(n) => out.push(n.to_string()),
        serde_json::Value::Bool(b) => out.push(b.to_string()),
        serde_json::Value::Array(items) => items.iter().for_each(|v| collect_scalars(v, out)),
        serde_json::Value::Object(map) => map.values().for_each(|v| collect_scalars(v, out)),
        serde_json::Value::Null => {}
    }
}

/// Applies one gate spec to a protocol message: extract, evaluate, route,
/// decide. Deny means the message must not cross the boundary.
pub fn apply_gate(
    spec: &GateSpec,
    message: &serde_json::Value,
    policy: &Policy,
    registry: &EvaluatorRegistry,
    clock: &Clock,
) -> Result<(GateOutcome, AuditTraceEntry), RuntimeError> {
    let text = extract_text(&spec.boundary, message)?;
    let roles: Vec<String> = message
        .get("user_roles")
        .and_then(|v| v.as_array())
        .map(|arr| {
            arr.iter()
                .filter_map(|r| r.as_str().map(String::from))
                .collect()
        })
        .unwrap_or_default();
    let ctx = EvaluationContext::with_roles(roles);
    let scores = evaluate_signals(policy, &text, &ctx, registry)?;
    let trees = policy.effective_trees();
    let tree = trees.get(&spec.tree).ok_or_else(|| RuntimeError::UnknownTree {
        tree: spec.tree.clone(),
    })?;
    let (decision, entry) = route_with_override(
        tree,
        &scores,
        policy,
        None,
        clock,
        spec.embedding_threshold_override,
    )?;
    Ok((
        GateOutcome {
            allowed: decision.backend != "deny",
            backend: decision.backend,
        },
        entry,
    ))
}
