//! Gateway policy bundle: agent definitions, routing bindings, channel
//! policies, the session send policy, and the before-tool-call hook.
//!
//! The gateway evaluates policy at its boundary before any agent loop runs,
//! so the bundle spans five configuration surfaces emitted from one source.
//! Channel metadata is not a language construct; bindings fall back to a
//! deterministic wildcard channel match.

use super::text::{hyphenate, json_str, Jv};
use super::{select_gate_tree, ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;

/// Tools every agent gets in addition to its skills.
pub const BASE_TOOLS: [&str; 3] = ["bash", "read", "write"];

/// Tools denied because no DSL construct declares the capability.
pub const UNDECLARED_CAPABILITY_TOOLS: [&str; 3] = ["browser", "canvas", "cron"];

/// The allow list generated for one agent: base tools plus `skill:<name>`
/// per declared skill, in declaration order. The cross-artifact verifier
/// checks endpoint reachability against exactly this set.
pub fn tools_allow_for_agent(agent: &AgentDef) -> Vec<String> {
    BASE_TOOLS
        .iter()
        .map(|t| t.to_string())
        .chain(agent.skills.iter().map(|s| format!("skill:{}", s)))
        .collect()
}

fn effective_sandbox_mode(policy: &Policy, agent: &AgentDef) -> SandboxMode {
    policy
        .deploys
        .get(&agent.id)
        .and_then(|d| d.sandbox_mode)
        .unwrap_or(agent.sandbox_mode)
}

pub fn emit_openclaw(policy: &Policy, ctx: &EmitCtx) -> Vec<ArtifactEntry> {
    let mut entries = vec![ArtifactEntry {
        target: EmissionTarget::Openclaw,
        path: "openclaw/openclaw.json".into(),
        content: gateway_json(policy, ctx),
        kind: ArtifactKind::Json,
    }];
    if let Some(gate_tree) = select_gate_tree(&ctx.trees) {
        entries.push(ArtifactEntry {
            target: EmissionTarget::Openclaw,
            path: "openclaw/before_tool_call.ts".into(),
            content: hook_text(policy, ctx, gate_tree),
            kind: ArtifactKind::TypescriptText,
        });
    }
    entries
}

fn gateway_json(policy: &Policy, ctx: &EmitCtx) -> String {
    let metadata = Jv::Obj(vec![
        ("source_hash".into(), Jv::str(ctx.hash())),
        (
            "policy_trees".into(),
            Jv::strings(ctx.trees.keys().cloned()),
        ),
        (
            "structural_hashes".into(),
            Jv::Obj(
                ctx.structural_hashes
                    .iter()
                    .map(|(k, v)| (k.clone(), Jv::str(v)))
                    .collect(),
            ),
        ),
    ]);

    let agent_list: Vec<Jv> = policy
        .agents
        .values()
        .map(|agent| {
            Jv::Obj(vec![
                ("id".into(), Jv::str(hyphenate(&agent.id))),
                ("model".into(), Jv::str(&agent.model)),
                (
                    "sandbox".into(),
                    Jv::Obj(vec![(
                        "mode".into(),
                        Jv::str(effective_sandbox_mode(policy, agent).as_str()),
                    )]),
                ),
                (
                    "tools".into(),
                    Jv::Obj(vec![
                        ("allow".into(), Jv::strings(tools_allow_for_agent(agent))),
                        (
                            "deny".into(),
                            Jv::strings(UNDECLARED_CAPABILITY_TOOLS.map(String::from)),
                        ),
                    ]),
                ),
            ])
        })
        .collect();

    let bindings: Vec<Jv> = policy
        .agents
        .values()
        .map(|agent| {
            Jv::Obj(vec![
                ("agentId".into(), Jv::str(hyphenate(&agent.id))),
                (
                    "match".into(),
                    Jv::Obj(vec![("channel".into(), Jv::str("*"))]),
                ),
            ])
        })
        .collect();

    let safety_gates: Vec<Jv> = policy
        .signals
        .values()
        .filter(|s| matches!(s.kind, SignalKind::Jailbreak | SignalKind::Pii))
        .map(|s| {
            let mut fields = vec![("signal".to_string(), Jv::str(&s.name))];
            if let Some(t) = s.threshold {
                fields.push(("threshold".into(), Jv::raw(two_dec(t))));
            }
            if !s.pii_types_allowed.is_empty() {
                fields.push((
                    "pii_types_allowed".into(),
                    Jv::strings(s.pii_types_allowed.clone()),
                ));
            }
            Jv::Obj(fields)
        })
        .collect();

    let doc = Jv::Obj(vec![
        ("_dsl_metadata".into(), metadata),
        (
            "agents".into(),
            Jv::Obj(vec![("list".into(), Jv::Arr(agent_list))]),
        ),
        ("bindings".into(), Jv::Arr(bindings)),
        (
            "channels".into(),
            Jv::Obj(vec![(
                "*".into(),
                Jv::Obj(vec![("dmPolicy".into(), Jv::str("pairing"))]),
            )]),
        ),
        (
            "session".into(),
            Jv::Obj(vec![(
                "sendPolicy".into(),
                Jv::Obj(vec![("dsl_safety_gates".into(), Jv::Arr(safety_gates))]),
            )]),
        ),
    ]);
    let mut out = doc.render_json();
    out.push('\n');
    out
}

/// The hook compiles the safety prefix of the gate tree: the leading run of
/// single-reference jailbreak/pii branches that deny.
fn safety_prefix<'t>(tree: &'t DecisionTree, policy: &Policy) -> Vec<&'t str> {
    let mut prefix = Vec::new();
    for branch in &tree.branches {
        let ConditionExpr::SignalRef { kind, name, .. } = &branch.condition else {
            break;
        };
        if !matches!(kind, SignalKind::Jailbreak | SignalKind::Pii) || branch.backend != "deny" {
            break;
        }
        if policy.signals.contains_key(name) {
            prefix.push(name.as_str());
        }
    }
    prefix
}

fn hook_text(policy: &Policy, ctx: &EmitCtx, tree: &DecisionTree) -> String {
    let mut out = String::new();
    out.push_str("// Auto-generated by the policy compiler\n");
    out.push_str(&format!("// (source_hash: {})\n", ctx.hash()));
    out.push_str(&format!("// Decision tree: {}\n", tree.name));
    out.push_str(&format!(
        "// structural_hash: {}\n\n",
        ctx.tree_hash(&tree.name)
    ));
    out.push_str("import { evaluateSignal } from \"./dsl-signal-evaluator\";\n\n");
    out.push_str("export async function beforeToolCall({\n");
    out.push_str("  toolName, toolArgs, sessionKey, agentId,\n");
    out.push_str("}) {\n");
    out.push_str("  const text = `${toolName} ${JSON.stringify(toolArgs)}`;\n");

    for name in safety_prefix(tree, policy) {
        let signal = &policy.signals[name];
        let threshold = two_dec(signal.threshold.unwrap_or(0.5));
        let model = json_str(signal.model.as_deref().unwrap_or(""));
        match signal.kind {
            SignalKind::Pii => {
                let allowed: Vec<String> =
                    signal.pii_types_allowed.iter().map(|s| json_str(s)).collect();
                out.push_str(&format!(
                    "\n  const {name} = await evaluateSignal({{\n    kind: \"pii\",\n    model: {model},\n    input: text,\n    piiTypesAllowed: [{allowed}],\n  }});\n",
                    allowed = allowed.join(", "),
                ));
                out.push_str(&format!(
                    "  if ({name}.score > {threshold}) {{\n    return {{ action: \"deny\",\n      signal: {sig},\n      score: {name}.score,\n      source_hash: {hash} }};\n  }}\n",
                    sig = json_str(name),
                    hash = json_str(ctx.hash()),
                ));
            }
            _ => {
                out.push_str(&format!(
                    "\n  const {name}_score = await evaluateSignal({{\n    kind: {kind},\n    model: {model},\n    input: text,\n  }});\n",
                    kind = json_str(signal.kind.as_str()),
                ));
                out.push_str(&format!(
                    "  if ({name}_score > {threshold}) {{\n    return {{ action: \"deny\",\n      signal: {sig},\n      score: {name}_score,\n      source_hash: {hash} }};\n  }}\n",
                    sig = json_str(name),
                    hash = json_str(ctx.hash()),
                ));
            }
        }
    }

    out.push_str(&format!(
        "\n  return {{ action: \"allow\",\n    tree: {tree},\n    source_hash: {hash} }};\n}}\n",
        tree = json_str(&tree.name),
        hash = json_str(ctx.hash()),
    ));
    out
}
