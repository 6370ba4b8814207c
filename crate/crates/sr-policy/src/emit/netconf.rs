//! NETCONF `<edit-config>` payload targeting the candidate datastore,
//! carrying the policy instance data under the generated YANG schema.
//! Instance names are hyphenated (`jb_guard` becomes `jb-guard`)
//! consistently across signals, trees, branches, and backends.

use super::text::{hyphenate, xml_escape};
use super::yang::{NAMESPACE, PREFIX};
use super::{ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;

pub fn emit_netconf(policy: &Policy, ctx: &EmitCtx) -> ArtifactEntry {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<rpc xmlns=\"urn:ietf:params:xml:ns:netconf:base:1.0\"\n");
    out.push_str("     message-id=\"1\">\n");
    out.push_str("  <edit-config>\n");
    out.push_str("    <target><candidate/></target>\n");
    out.push_str("    <config>\n");
    out.push_str(&format!(
        "      <policy xmlns=\"{}\" xmlns:{}=\"{}\">\n",
        NAMESPACE, PREFIX, NAMESPACE
    ));
    out.push_str(&format!(
        "        <version>{}</version>\n",
        xml_escape(&policy.version)
    ));
    out.push_str(&format!(
        "        <source-hash>{}</source-hash>\n",
        ctx.hash()
    ));

    out.push_str("        <signals>\n");
    for signal in policy.signals.values() {
        out.push_str("          <signal>\n");
        out.push_str(&format!(
            "            <name>{}</name>\n",
            xml_escape(&hyphenate(&signal.name))
        ));
        out.push_str(&format!(
            "            <kind>{}:{}</kind>\n",
            PREFIX,
            signal.kind.as_str()
        ));
        if let Some(t) = signal.threshold {
            out.push_str(&format!(
                "            <threshold>{}</threshold>\n",
                two_dec(t)
            ));
        }
        if let Some(model) = &signal.model {
            out.push_str(&format!(
                "            <model>{}</model>\n",
                xml_escape(model)
            ));
        }
        for candidate in &signal.candidates {
            out.push_str(&format!(
                "            <candidates>{}</candidates>\n",
                xml_escape(candidate)
            ));
        }
        for pii_type in &signal.pii_types_allowed {
            out.push_str(&format!(
                "            <pii-types-allowed>{}</pii-types-allowed>\n",
                xml_escape(pii_type)
            ));
        }
        out.push_str("          </signal>\n");
    }
    out.push_str("        </signals>\n");

    out.push_str("        <routing>\n");
    for tree in ctx.trees.values() {
        out.push_str("          <decision-tree>\n");
        out.push_str(&format!(
            "            <name>{}</name>\n",
            xml_escape(&hyphenate(&tree.name))
        ));
        let mut priority = 1usize;
        for branch in &tree.branches {
            out.push_str(&branch_xml(
                priority,
                &condition_text(&branch.condition),
                &branch.backend,
            ));
            priority += 1;
        }
        if let Some(e) = &tree.else_backend {
            out.push_str(&branch_xml(priority, "else", e));
        }
        out.push_str("          </decision-tree>\n");
    }
    out.push_str("        </routing>\n");

    out.push_str("        <network>\n");
    for endpoint in policy.networks.values() {
        out.push_str("          <network-endpoint>\n");
        out.push_str(&format!(
            "            <name>{}</name>\n",
            xml_escape(&hyphenate(&endpoint.name))
        ));
        out.push_str(&format!(
            "            <host>{}</host>\n",
            xml_escape(&endpoint.host)
        ));
        out.push_str(&format!("            <port>{}</port>\n", endpoint.port));
        out.push_str(&format!(
            "            <skill>{}</skill>\n",
            xml_escape(&endpoint.skill)
        ));
        out.push_str("          </network-endpoint>\n");
    }
    out.push_str("        </network>\n");

    out.push_str("      </policy>\n");
    out.push_str("    </config>\n");
    out.push_str("  </edit-config>\n");
    out.push_str("</rpc>\n");

    ArtifactEntry {
        target: EmissionTarget::Netconf,
        path: "netconf/edit-config.xml".into(),
        content: out,
        kind: ArtifactKind::Xml,
    }
}

fn branch_xml(priority: usize, condition: &str, backend: &str) -> String {
    format!(
        "            <branch>\n              <priority>{}</priority>\n              <condition>{}</condition>\n              <backend>{}</backend>\n            </branch>\n",
        priority,
        xml_escape(condition),
        xml_escape(&hyphenate(backend))
    )
}

/// Compact condition rendering for instance data: hyphenated reference
/// names joined with lowercase operators, so a single-reference branch reads
/// as just the signal name.
fn condition_text(cond: &ConditionExpr) -> String {
    condition_prec(cond, 0)
}

fn condition_prec(cond: &ConditionExpr, parent: u8) -> String {
    let (text, level) = match cond {
        ConditionExpr::SignalRef { name, .. } => (hyphenate(name), 4u8),
        ConditionExpr::Not(c) => (format!("not {}", condition_prec(c, 3)), 3),
        ConditionExpr::And(l, r) => (
            format!("{} and {}", condition_prec(l, 2), condition_prec(r, 3)),
            2,
        ),
        ConditionExpr::Or(l, r) => (
            format!("{} or {}", condition_prec(l, 1), condition_prec(r, 2)),
            1,
        ),
    };
    if level < parent {
        format!("({})", text)
    } else {
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emit::EmitOptions;
    use crate::parser::parse;

    fn policy() -> Policy {
        parse(
            r#"
GLOBAL { version: "v2026.03.27" }
SIGNAL jailbreak jb_guard { threshold: 0.50, model: "jb-model" }
SIGNAL authz dev_role { role: "developer" }
DECISION_TREE outbound_gate {
  IF jailbreak("jb_guard") { BACKEND deny }
  ELSE IF authz("dev_role") { BACKEND allow }
  ELSE { BACKEND deny }
}
NETWORK atlassian { host: "*.atlassian.net", port: 443, skill: "jira" }
"#,
            "t.sr",
        )
        .unwrap()
    }

    #[test]
    fn payload_targets_the_candidate_datastore() {
        let p = policy();
        let ctx = EmitCtx::new(&p, EmitOptions::default());
        let xml = emit_netconf(&p, &ctx).content;
        assert!(xml.contains("<target><candidate/></target>"), "{xml}");
        assert!(xml.contains("<threshold>0.50</threshold>"), "{xml}");
        assert!(xml.contains("<name>jb-guard</name>"), "{xml}");
        assert!(xml.contains("<kind>vsr:jailbreak</kind>"), "{xml}");
        assert!(xml.contains(ctx.hash()), "{xml}");
    }

    #[test]
    fn branches_are_numbered_in_declaration_order() {
        let p = policy();
        let ctx = EmitCtx::new(&p, EmitOptions::default());
        let xml = emit_netconf(&p, &ctx).content;
        let first = xml.find("<priority>1</priority>").expect("first branch");
        let second = xml.find("<priority>2</priority>").expect("second branch");
        let third = xml.find("<priority>3</priority>").expect("else branch");
        assert!(first < second && second < third);
        assert!(xml.contains("<condition>jb-guard</condition>"), "{xml}");
        assert!(xml.contains("<condition>else</condition>"), "{xml}");
    }

    #[test]
    fn compound_conditions_join_with_lowercase_operators() {
        let src = r#"
SIGNAL embedding jira_intent { threshold: 0.70, model: "m", candidates: ["x"] }
SIGNAL authz dev_role { role: "developer" }
DECISION_TREE t {
  IF embedding("jira_intent") AND authz("dev_role") { BACKEND allow }
  ELSE { BACKEND deny }
}
"#;
        let p = parse(src, "t.sr").unwrap();
        let ctx = EmitCtx::new(&p, EmitOptions::default());
        let xml = emit_netconf(&p, &ctx).content;
        assert!(
            xml.contains("<condition>jira-intent and dev-role</condition>"),
            "{xml}"
        );
    }
}
