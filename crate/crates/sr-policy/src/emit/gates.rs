//! Protocol-boundary gate specs: one JSON spec per boundary (MCP tool call,
//! A2A task send, tool response). The runtime interprets these specs; the
//! spec format is the interchange contract between compiler and gate host.
//!
//! Each spec names its extraction rule, the decision tree to apply, every
//! signal threshold, audit requirements, and the source hash. An embedding
//! threshold override may be attached per build (protocol messages carry
//! tool names and structured metadata that depress cosine similarity, so
//! gates sometimes run with a lowered embedding threshold while the source
//! threshold stays put).

use super::text::Jv;
use super::{select_gate_tree, ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;
use crate::diag::{DiagCode, Diagnostic, SourceSpan};

/// The three gate boundaries with their extraction rule identifiers.
pub const BOUNDARIES: [(&str, &str); 3] = [
    ("mcp_tools_call", "tool_name_with_argument_values"),
    ("a2a_tasks_send", "concatenated_text_parts"),
    ("tool_response", "raw_response_text"),
];

pub fn emit_protocol_gates(
    policy: &Policy,
    ctx: &EmitCtx,
) -> (Vec<ArtifactEntry>, Vec<Diagnostic>) {
    let Some(tree) = select_gate_tree(&ctx.trees) else {
        return (
            Vec::new(),
            vec![Diagnostic::warning(
                DiagCode::W071NoGates,
                "policy declares no decision trees; no protocol gate specs were emitted",
                SourceSpan::synthetic(),
            )],
        );
    };

    let entries = BOUNDARIES
        .iter()
        .map(|(boundary, extraction)| {
            let mut fields = vec![
                ("boundary".to_string(), Jv::str(*boundary)),
                ("extraction".into(), Jv::str(*extraction)),
                ("tree".into(), Jv::str(&tree.name)),
                ("structural_hash".into(), Jv::str(ctx.tree_hash(&tree.name))),
                ("signals".into(), signal_thresholds(policy)),
            ];
            if let Some(override_value) = ctx.options.gate_override(boundary) {
                fields.push((
                    "embedding_threshold_override".into(),
                    Jv::raw(two_dec(override_value)),
                ));
            }
            fields.push((
                "audit".into(),
                Jv::Obj(vec![
                    ("require_trace".into(), Jv::raw("true")),
                    ("include_signals".into(), Jv::raw("true")),
                ]),
            ));
            fields.push(("source_hash".into(), Jv::str(ctx.hash())));

            let mut content = Jv::Obj(fields).render_json();
            content.push('\n');
            ArtifactEntry {
                target: EmissionTarget::ProtocolGates,
                path: format!("protocol_gates/{}.json", boundary),
                content,
                kind: ArtifactKind::Json,
            }
        })
        .collect();
    (entries, Vec::new())
}

fn signal_thresholds(policy: &Policy) -> Jv {
    Jv::Obj(
        policy
            .signals
            .values()
            .map(|s| {
                let mut fields = vec![("kind".to_string(), Jv::str(s.kind.as_str()))];
                if let Some(t) = s.threshold {
                    fields.push(("threshold".into(), Jv::raw(two_dec(t))));
                }
                (s.name.clone(), Jv::Obj(fields))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emit::{EmitCtx, EmitOptions};
    use crate::parser::parse;

    fn gate_policy() -> Policy {
        parse(
            r#"
SIGNAL jailbreak jb_guard { threshold: 0.50, model: "m" }
SIGNAL embedding jira_intent { threshold: 0.70, model: "m", candidates: ["create a jira issue"] }
DECISION_TREE safety_gate {
  IF jailbreak("jb_guard") { BACKEND deny }
  ELSE { BACKEND allow }
}
DECISION_TREE outbound_gate {
  IF jailbreak("jb_guard") { BACKEND deny }
  ELSE IF embedding("jira_intent") { BACKEND allow }
  ELSE { BACKEND deny }
}
"#,
            "t.sr",
        )
        .unwrap()
    }

    #[test]
    fn three_specs_reference_the_outbound_tree() {
        let policy = gate_policy();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let (entries, warnings) = emit_protocol_gates(&policy, &ctx);
        assert!(warnings.is_empty());
        assert_eq!(entries.len(), 3);
        for entry in &entries {
            let parsed: serde_json::Value = serde_json::from_str(&entry.content).unwrap();
            assert_eq!(parsed["tree"], "outbound_gate");
            assert_eq!(parsed["source_hash"], ctx.hash());
        }
    }

    #[test]
    fn override_is_carried_while_source_threshold_stays() {
        let policy = gate_policy();
        let options: EmitOptions = serde_json::from_str(
            r#"{ "protocol_gates": { "embedding_threshold_override": 0.65 } }"#,
        )
        .unwrap();
        let ctx = EmitCtx::new(&policy, options);
        let (entries, _) = emit_protocol_gates(&policy, &ctx);
        let parsed: serde_json::Value = serde_json::from_str(&entries[0].content).unwrap();
        assert_eq!(parsed["embedding_threshold_override"], 0.65);
        assert_eq!(parsed["signals"]["jira_intent"]["threshold"], 0.70);
    }

    #[test]
    fn no_trees_emit_zero_specs_and_a_warning() {
        let policy = parse(r#"SIGNAL jailbreak jb { threshold: 0.50, model: "m" }"#, "t.sr").unwrap();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let (entries, warnings) = emit_protocol_gates(&policy, &ctx);
        assert!(entries.is_empty());
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, DiagCode::W071NoGates);
    }
}
