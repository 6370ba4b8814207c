//! Inference routing configuration: the YAML consumed by the gateway plus
//! the identical structure embedded as policy.json in the ConfigMap.

use super::text::Jv;
use super::{ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;

/// The routing policy as an ordered value tree, shared between the YAML
/// artifact and the ConfigMap's embedded JSON.
pub fn routing_policy_value(policy: &Policy, ctx: &EmitCtx) -> Jv {
    let mut signals = Vec::new();
    for signal in policy.signals.values() {
        let mut fields = vec![("kind".to_string(), Jv::str(signal.kind.as_str()))];
        if let Some(t) = signal.threshold {
            fields.push(("threshold".into(), Jv::raw(two_dec(t))));
        }
        if !signal.pii_types_allowed.is_empty() {
            fields.push((
                "pii_types_allowed".into(),
                Jv::strings(signal.pii_types_allowed.clone()),
            ));
        }
        if !signal.candidates.is_empty() {
            fields.push(("candidates".into(), Jv::strings(signal.candidates.clone())));
        }
        if let Some(role) = &signal.role {
            fields.push(("role".into(), Jv::str(role)));
        }
        if let Some(group) = policy.group_of(&signal.name) {
            fields.push(("group".into(), Jv::str(&group.name)));
        }
        signals.push((signal.name.clone(), Jv::Obj(fields)));
    }

    let signal_models: Vec<(String, Jv)> = policy
        .signals
        .values()
        .filter_map(|s| s.model.as_ref().map(|m| (s.name.clone(), Jv::str(m))))
        .collect();

    let mut groups = Vec::new();
    for group in policy.signal_groups.values() {
        let mut fields = vec![
            ("signals".to_string(), Jv::strings(group.members.clone())),
            ("temperature".into(), Jv::raw(two_dec(group.temperature))),
        ];
        if let Some(t) = group.firing_threshold {
            fields.push(("firing_threshold".into(), Jv::raw(two_dec(t))));
        }
        fields.push((
            "tie_break".into(),
            Jv::str(match group.tie_break {
                TieBreak::None => "none",
                TieBreak::PriorityOrder => "priority_order",
            }),
        ));
        groups.push((group.name.clone(), Jv::Obj(fields)));
    }

    let mut trees = Vec::new();
    for tree in ctx.trees.values() {
        let mut rules = Vec::new();
        for (i, branch) in tree.branches.iter().enumerate() {
            rules.push(Jv::Obj(vec![
                ("priority".into(), Jv::raw((i + 1).to_string())),
                ("condition".into(), Jv::str(branch.condition.render())),
                ("backend".into(), Jv::str(&branch.backend)),
            ]));
        }
        if let Some(e) = &tree.else_backend {
            rules.push(Jv::Obj(vec![
                ("priority".into(), Jv::raw((tree.branches.len() + 1).to_string())),
                ("condition".into(), Jv::str("else")),
                ("backend".into(), Jv::str(e)),
            ]));
        }
        trees.push((
            tree.name.clone(),
            Jv::Obj(vec![
                ("structural_hash".into(), Jv::str(ctx.tree_hash(&tree.name))),
                ("rules".into(), Jv::Arr(rules)),
            ]),
        ));
    }

    let backends: Vec<(String, Jv)> = policy
        .backends
        .values()
        .map(|b| {
            (
                b.name.clone(),
                Jv::Obj(vec![
                    ("kind".into(), Jv::str(b.kind.as_str())),
                    ("target".into(), Jv::str(&b.target)),
                ]),
            )
        })
        .collect();

    Jv::Obj(vec![
        ("version".into(), Jv::str(&policy.version)),
        ("source_hash".into(), Jv::str(ctx.hash())),
        ("signals".into(), Jv::Obj(signals)),
        ("signal_models".into(), Jv::Obj(signal_models)),
        ("signal_groups".into(), Jv::Obj(groups)),
        ("decision_trees".into(), Jv::Obj(trees)),
        ("backends".into(), Jv::Obj(backends)),
    ])
}

/// The policy.json text embedded verbatim in the Kubernetes ConfigMap.
pub fn routing_policy_json(policy: &Policy, ctx: &EmitCtx) -> String {
    routing_policy_value(policy, ctx).render_json()
}

pub fn emit_routing_yaml(policy: &Policy, ctx: &EmitCtx) -> Vec<ArtifactEntry> {
    let body = routing_policy_value(policy, ctx).render_yaml();
    let content = format!(
        "# Routing policy for the inference gateway\n# source_hash: {}\n{}",
        ctx.hash(),
        body
    );
    vec![ArtifactEntry {
        target: EmissionTarget::RoutingYaml,
        path: "routing_yaml/routing-policy.yaml".into(),
        content,
        kind: ArtifactKind::Yaml,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emit::EmitOptions;
    use crate::parser::parse;

    #[test]
    fn thresholds_keep_their_two_digit_spelling() {
        let policy = parse(
            r#"
SIGNAL jailbreak jb_guard { threshold: 0.50, model: "m1" }
SIGNAL pii pii_detector { threshold: 0.60, model: "m2" }
"#,
            "test.sr",
        )
        .unwrap();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let entries = emit_routing_yaml(&policy, &ctx);
        assert_eq!(entries.len(), 1);
        let yaml = &entries[0].content;
        assert!(yaml.contains("threshold: 0.50"), "{yaml}");
        assert!(yaml.contains("threshold: 0.60"), "{yaml}");
        assert!(yaml.contains(ctx.hash()));
    }

    #[test]
    fn empty_policy_is_still_hash_stamped() {
        let policy = Policy::new();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let entries = emit_routing_yaml(&policy, &ctx);
        assert!(entries[0].content.contains(ctx.hash()));
        assert!(entries[0].content.contains("signals: {}"));
    }

    #[test]
    fn re_emission_is_byte_identical()  {
        let policy = parse(
            r#"SIGNAL jailbreak jb { threshold: 0.50, model: "m" }"#,
            "test.sr",
        )
        .unwrap();
        let ctx = EmitCtx::new(&policy, EmitOptions::default());
        let a = emit_routing_yaml(&policy, &ctx);
        let b = emit_routing_yaml(&policy, &ctx);
        assert_eq!(a[0].content, b[0].content);
    }
}
