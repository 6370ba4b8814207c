//! Graph-orchestration decision nodes (generated Python text).
//!
//! Strategy A emits, per tree, a signal-evaluation node that writes raw and
//! normalized scores into graph state plus a conditional-edge function whose
//! return annotation enumerates the branch targets. Strategy B emits a
//! single node that combines the state update, the audit trace entry, and
//! the routing target in one returned command.
//!
//! Group-member references expand to the dual gate of the generated code:
//! `normalized > 1/k` and `raw > θ`. Built-in allow/deny backends route to
//! `allow_handler`/`deny_handler` nodes; declared backends route to nodes of
//! their own name.

use super::text::{json_str, shortest};
use super::{ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;
use indexmap::IndexMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    A,
    B,
}

pub fn emit_langgraph(policy: &Policy, ctx: &EmitCtx, strategy: Strategy) -> Vec<ArtifactEntry> {
    let target = match strategy {
        Strategy::A => EmissionTarget::LanggraphA,
        Strategy::B => EmissionTarget::LanggraphB,
    };
    ctx.trees
        .values()
        .map(|tree| {
            let content = match strategy {
                Strategy::A => strategy_a(policy, ctx, tree),
                Strategy::B => strategy_b(policy, ctx, tree),
            };
            ArtifactEntry {
                target,
                path: format!("{}/{}.py", target.as_str(), tree.name),
                content,
                kind: ArtifactKind::PythonText,
            }
        })
        .collect()
}

/// Node name a backend routes to.
fn node_name(backend: &str) -> String {
    if is_builtin_backend(backend) {
        format!("{}_handler", backend)
    } else {
        backend.to_string()
    }
}

fn header(ctx: &EmitCtx, tree: &DecisionTree, strategy: &str) -> String {
    format!(
        "# Auto-generated policy decision node -- do not edit; recompile the source instead.\n\
         # source_hash: {}\n\
         # structural_hash({}): {}\n\
         # Decision tree: {} -- {}\n",
        ctx.hash(),
        tree.name,
        ctx.tree_hash(&tree.name),
        tree.name,
        strategy
    )
}

/// Unique routing targets ordered by their last occurrence, so the ELSE
/// target lands at the end of the annotation.
fn literal_targets(tree: &DecisionTree) -> Vec<String> {
    let mut last_seen: IndexMap<String, usize> = IndexMap::new();
    let mut idx = 0usize;
    for b in &tree.branches {
        last_seen.insert(node_name(&b.backend), idx);
        idx += 1;
    }
    if let Some(e) = &tree.else_backend {
        last_seen.insert(node_name(e), idx);
    }
    let mut targets: Vec<(String, usize)> = last_seen.into_iter().collect();
    targets.sort_by_key(|(_, i)| *i);
    targets.into_iter().map(|(name, _)| name).collect()
}

fn theta(policy: &Policy, name: &str) -> f64 {
    policy
        .signals
        .get(name)
        .and_then(|s| s.threshold)
        .unwrap_or(0.5)
}

/// Python expression for one condition. Group members expand to the dual
/// gate and register a `<name>_thr` assignment ahead of the comparison.
fn py_condition(cond: &ConditionExpr, policy: &Policy, thr_lines: &mut Vec<String>) -> String {
    py_cond_prec(cond, policy, thr_lines, 0)
}

// Precedence: or = 1, and = 2, not = 3, atom = 4.
fn py_cond_prec(
    cond: &ConditionExpr,
    policy: &Policy,
    thr_lines: &mut Vec<String>,
    parent: u8,
) -> String {
    let (text, level) = match cond {
        ConditionExpr::SignalRef { kind, name, .. } => match policy.group_of(name) {
            Some(group) => {
                let line = format!("{}_thr = {}", name, two_dec(theta(policy, name)));
                if !thr_lines.contains(&line) {
                    thr_lines.push(line);
                }
                let gate = match group.firing_threshold {
                    Some(t) => two_dec(t),
                    None => shortest(group.effective_firing_threshold()),
                };
                (
                    format!(
                        "(s[{n}] > {gate} and s[{raw}] > {name}_thr)",
                        n = json_str(name),
                        raw = json_str(&format!("{}_raw", name)),
                    ),
                    4u8,
                )
            }
            None => {
                if *kind == SignalKind::Authz {
                    (format!("s[{}]", json_str(name)), 4)
                } else {
                    (
                        format!("s[{}] > {}", json_str(name), two_dec(theta(policy, name))),
                        4,
                    )
                }
            }
        },
        ConditionExpr::Not(c) => (format!("not {}", py_cond_prec(c, policy, thr_lines, 3)), 3),
        ConditionExpr::And(l, r) => (
            format!(
                "{} and {}",
                py_cond_prec(l, policy, thr_lines, 2),
                py_cond_prec(r, policy, thr_lines, 3)
            ),
            2,
        ),
        ConditionExpr::Or(l, r) => (
            format!(
                "{} or {}",
                py_cond_prec(l, policy, thr_lines, 1),
                py_cond_prec(r, policy, thr_lines, 2)
            ),
            1,
        ),
    };
    if level < parent {
        format!("({})", text)
    } else {
        text
    }
}

fn branch_comment(i: usize, cond: &ConditionExpr) -> String {
    format!("    # Branch {}: {}\n", i + 1, cond.render())
}

/// Signal-evaluation node shared by both strategies.
fn eval_node(policy: &Policy) -> String {
    let mut out = String::new();
    out.push_str("def evaluate_signals(state: PolicyState) -> dict:\n");
    out.push_str("    \"\"\"Evaluate all signals; group members get raw + softmax-normalized scores.\"\"\"\n");
    out.push_str("    s = {}\n");
    for signal in policy.signals.values() {
        let key = if policy.group_of(&signal.name).is_some() {
            format!("{}_raw", signal.name)
        } else {
            signal.name.clone()
        };
        match signal.kind {
            SignalKind::Authz => {
                out.push_str(&format!(
                    "    s[{}] = evaluate_authz({}, state.get(\"user_roles\", []))\n",
                    json_str(&key),
                    json_str(signal.role.as_deref().unwrap_or("")),
                ));
            }
            _ => {
                let model = match &signal.model {
                    Some(m) => json_str(m),
                    None => "None".to_string(),
                };
                out.push_str(&format!(
                    "    s[{}] = evaluate_signal({}, {}, state[\"input\"])\n",
                    json_str(&key),
                    json_str(signal.kind.as_str()),
                    model,
                ));
            }
        }
    }
    for group in policy.signal_groups.values() {
        let raws: Vec<String> = group
            .members
            .iter()
            .map(|m| format!("s[{}]", json_str(&format!("{}_raw", m))))
            .collect();
        let normalized: Vec<String> = group
            .members
            .iter()
            .map(|m| format!("s[{}]", json_str(m)))
            .collect();
        out.push_str(&format!(
            "    # Signal group {}: temperature-scaled softmax (tau = {})\n",
            group.name,
            two_dec(group.temperature)
        ));
        out.push_str(&format!(
            "    {} = softmax([{}], temperature={})\n",
            normalized.join(", "),
            raws.join(", "),
            two_dec(group.temperature)
        ));
    }
    out.push_str("    return {\"signals\": s}\n");
    out
}

fn strategy_a(policy: &Policy, ctx: &EmitCtx, tree: &DecisionTree) -> String {
    let mut out = header(ctx, tree, "Strategy A (conditional edges)");
    out.push('\n');
    out.push_str(&eval_node(policy));
    out.push('\n');

    let targets = literal_targets(tree);
    out.push_str(&format!("def route_{}(\n    state: PolicyState,\n) -> Literal[\n", tree.name));
    for (i, t) in targets.iter().enumerate() {
        let comma = if i + 1 < targets.len() { "," } else { "" };
        out.push_str(&format!("    {}{}\n", json_str(t), comma));
    }
    out.push_str("]:\n");
    out.push_str("    s = state[\"signals\"]\n");

    for (i, branch) in tree.branches.iter().enumerate() {
        out.push_str(&branch_comment(i, &branch.condition));
        let mut thr_lines = Vec::new();
        let cond = py_condition(&branch.condition, policy, &mut thr_lines);
        for line in &thr_lines {
            out.push_str(&format!("    {}\n", line));
        }
        out.push_str(&format!("    if {}:\n", cond));
        out.push_str(&format!("        return {}\n", json_str(&node_name(&branch.backend))));
    }
    out.push_str(&format!(
        "    # Branch {}: ELSE (compiler-required)\n",
        tree.branches.len() + 1
    ));
    let else_target = node_name(tree.else_backend.as_deref().unwrap_or("deny"));
    out.push_str(&format!("    return {}\n", json_str(&else_target)));

    out.push('\n');
    out.push_str("graph.add_node(\"evaluate_signals\", evaluate_signals)\n");
    out.push_str(&format!(
        "graph.add_conditional_edges(\"evaluate_signals\", route_{})\n",
        tree.name
    ));
    out
}

fn strategy_b(policy: &Policy, ctx: &EmitCtx, tree: &DecisionTree) -> String {
    let mut out = header(ctx, tree, "Strategy B (command-returning node)");
    out.push('\n');
    out.push_str(&eval_node(policy));
    out.push('\n');

    let labels = tree.branch_labels();
    out.push_str(&format!(
        "def policy_node_{}(state: PolicyState) -> Command:\n",
        tree.name
    ));
    out.push_str("    s = evaluate_signals(state)[\"signals\"]\n");
    for (i, branch) in tree.branches.iter().enumerate() {
        out.push_str(&branch_comment(i, &branch.condition));
        let mut thr_lines = Vec::new();
        let cond = py_condition(&branch.condition, policy, &mut thr_lines);
        for line in &thr_lines {
            out.push_str(&format!("    {}\n", line));
        }
        let kw = if i == 0 { "if" } else { "elif" };
        out.push_str(&format!("    {} {}:\n", kw, cond));
        out.push_str(&format!(
            "        branch, branch_idx, goto = {}, {}, {}\n",
            json_str(&labels[i]),
            i,
            json_str(&node_name(&branch.backend))
        ));
    }
    let else_idx = tree.branches.len();
    let else_target = node_name(tree.else_backend.as_deref().unwrap_or("deny"));
    let else_label = labels.last().cloned().unwrap_or_else(|| "else".to_string());
    if tree.branches.is_empty() {
        out.push_str("    # ELSE (compiler-required)\n");
        out.push_str(&format!(
            "    branch, branch_idx, goto = {}, {}, {}\n",
            json_str(&else_label),
            else_idx,
            json_str(&else_target)
        ));
    } else {
        out.push_str("    else:\n");
        out.push_str(&format!(
            "        # Branch {}: ELSE (compiler-required)\n",
            else_idx + 1
        ));
        out.push_str(&format!(
            "        branch, branch_idx, goto = {}, {}, {}\n",
            json_str(&else_label),
            else_idx,
            json_str(&else_target)
        ));
    }
    out.push_str("    trace = {\n");
    out.push_str("        \"ts\": time.time(),\n");
    out.push_str(&format!("        \"policy_version\": {},\n", json_str(&policy.version)));
    out.push_str(&format!("        \"source_hash\": {},\n", json_str(ctx.hash())));
    out.push_str(&format!("        \"tree\": {},\n", json_str(&tree.name)));
    out.push_str("        \"branch\": branch,\n");
    out.push_str("        \"branch_idx\": branch_idx,\n");
    out.push_str("        \"signals\": s,\n");
    out.push_str("    }\n");
    out.push_str("    return Command(update={\"signals\": s, \"audit_trace\": [trace]}, goto=goto)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emit::EmitOptions;
    use crate::parser::parse;

    fn gate_policy() -> Policy {
        parse(
            r#"
SIGNAL jailbreak jb_guard { threshold: 0.50, model: "jb-model" }
SIGNAL pii pii_detector { threshold: 0.60, model: "pii-model" }
SIGNAL embedding jira_intent { threshold: 0.70, model: "embed", candidates: ["create a jira issue"] }
SIGNAL embedding slack_intent { threshold: 0.70, model: "embed", candidates: ["post to slack"] }
SIGNAL authz dev_role { role: "developer" }
SIGNAL_GROUP delegation_intents { signals: [jira_intent, slack_intent], temperature: 0.1 }
BACKEND allow_jira { kind: "action", target: "jira_create" }
BACKEND allow_slack { kind: "action", target: "slack_post" }
DECISION_TREE outbound_gate {
  IF jailbreak("jb_guard") { BACKEND deny }
  ELSE IF pii("pii_detector") { BACKEND deny }
  ELSE IF embedding("jira_intent") AND authz("dev_role") { BACKEND allow_jira }
  ELSE IF embedding("slack_intent") { BACKEND allow_slack }
  ELSE { BACKEND deny }
}
"#,
            "test.sr",
        )
        .expect("parse")
    }

    #[test]
    fn strategy_a_emits_threshold_comparisons_and_final_deny() {
        let policy = gate_policy();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let entries = emit_langgraph(&policy, &ctx, Strategy::A);
        assert_eq!(entries.len(), 1);
        let text = &entries[0].content;
        assert!(text.contains("def route_outbound_gate"), "{text}");
        assert!(text.contains("s[\"jb_guard\"] > 0.50"), "{text}");
        // Dual gate for the group member.
        assert!(text.contains("s[\"jira_intent\"] > 0.5"), "{text}");
        assert!(text.contains("s[\"jira_intent_raw\"] > jira_intent_thr"), "{text}");
        assert!(text.contains("jira_intent_thr = 0.70"), "{text}");
        // ELSE is compiler-required and unconditional.
        assert!(text.contains("# Branch 5: ELSE (compiler-required)"), "{text}");
        assert!(text.trim_end().ends_with("route_outbound_gate)"), "{text}");
        let last_return = text.rfind("return ").unwrap();
        assert!(text[last_return..].contains("deny_handler"));
    }

    #[test]
    fn only_else_tree_has_a_single_return() {
        let policy = parse(
            r#"
DECISION_TREE passthrough {
  ELSE { BACKEND allow }
}
"#,
            "test.sr",
        );
        // The grammar requires IF first; an only-ELSE tree comes from code.
        assert!(policy.is_err());

        let mut p = Policy::new();
        p.decision_trees.insert(
            "passthrough".into(),
            DecisionTree {
                name: "passthrough".into(),
                branches: Vec::new(),
                else_backend: Some("allow".into()),
                else_span: crate::diag::SourceSpan::synthetic(),
                span: crate::diag::SourceSpan::synthetic(),
            },
        );
        let ctx = EmitCtx::new(&p, EmitOptions::default());
        let entries = emit_langgraph(&p, &ctx, Strategy::A);
        let text = &entries[0].content;
        let route_fn = &text[text.find("def route_").unwrap()..];
        let returns = route_fn.matches("return ").count();
        assert_eq!(returns, 1, "{route_fn}");
        assert!(route_fn.contains("\"allow_handler\""));
    }

    #[test]
    fn strategy_b_combines_update_trace_and_target() {
        let policy = gate_policy();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let entries = emit_langgraph(&policy, &ctx, Strategy::B);
        let text = &entries[0].content;
        assert!(text.contains("def policy_node_outbound_gate"), "{text}");
        assert!(text.contains("\"audit_trace\": [trace]"), "{text}");
        assert!(text.contains("goto=goto"), "{text}");
        assert!(text.contains(ctx.hash()), "{text}");
    }

    #[test]
    fn return_annotation_lists_targets_with_else_last() {
        let policy = gate_policy();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let text = &emit_langgraph(&policy, &ctx, Strategy::A)[0].content;
        let jira = text.find("\"allow_jira\"").unwrap();
        let slack = text.find("\"allow_slack\"").unwrap();
        let deny = text.find("\"deny_handler\"").unwrap();
        assert!(jira < slack && slack < deny, "{text}");
    }
}
