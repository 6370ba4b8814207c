//! YANG module generation (RFC 7950 subset). The module defines signal
//! kinds as identities derived from the kinds the policy actually uses,
//! constrains thresholds to `decimal64 { fraction-digits 2 }`, and keeps
//! decision-tree branches `ordered-by user` so branch priority survives the
//! datastore round trip.

use super::{ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;
use std::collections::BTreeSet;

pub const MODULE_NAME: &str = "vllm-sr-policy";
pub const NAMESPACE: &str = "urn:vllm:semantic-router:policy";
pub const PREFIX: &str = "vsr";

/// Module revision derived from a `vYYYY.MM.DD` policy version; otherwise a
/// fixed epoch revision so output stays deterministic.
pub fn revision(version: &str) -> String {
    let date = version.strip_prefix('v').unwrap_or(version);
    let parts: Vec<&str> = date.split('.').collect();
    if parts.len() == 3
        && parts[0].len() == 4
        && parts.iter().all(|p| p.chars().all(|c| c.is_ascii_digit()))
    {
        format!("{}-{}-{}", parts[0], parts[1], parts[2])
    } else {
        "2026-01-01".to_string()
    }
}

/// Kinds used by the policy's signals, in stable alphabetical order.
fn used_kinds(policy: &Policy) -> Vec<SignalKind> {
    let used: BTreeSet<&str> = policy.signals.values().map(|s| s.kind.as_str()).collect();
    let mut kinds: Vec<SignalKind> = SignalKind::all()
        .into_iter()
        .filter(|k| used.contains(k.as_str()))
        .collect();
    kinds.sort_by_key(|k| k.as_str());
    kinds
}

pub fn emit_yang(policy: &Policy, ctx: &EmitCtx) -> ArtifactEntry {
    let mut out = String::new();
    out.push_str(&format!(
        "// Generated routing policy schema (source-hash: {})\n",
        ctx.hash()
    ));
    out.push_str(&format!("module {} {{\n", MODULE_NAME));
    out.push_str(&format!("  namespace \"{}\";\n", NAMESPACE));
    out.push_str(&format!("  prefix {};\n", PREFIX));
    out.push_str(&format!("  revision {};\n\n", revision(&policy.version)));

    out.push_str("  identity signal-kind;\n");
    for kind in used_kinds(policy) {
        out.push_str(&format!("  identity {} {{ base signal-kind; }}\n", kind));
    }
    out.push('\n');

    out.push_str("  container policy {\n");
    out.push_str("    leaf version { type string; }\n");
    out.push_str("    leaf source-hash {\n");
    out.push_str("      type string { length \"8\"; } }\n");
    out.push_str("    container signals {\n");
    out.push_str("      list signal {\n");
    out.push_str("        key \"name\";\n");
    out.push_str("        leaf name { type string; }\n");
    out.push_str("        leaf kind {\n");
    out.push_str("          type identityref {\n");
    out.push_str("            base signal-kind; } }\n");
    out.push_str("        leaf threshold {\n");
    out.push_str("          type decimal64 {\n");
    out.push_str("            fraction-digits 2;\n");
    out.push_str("            range \"0.00..1.00\"; } }\n");
    out.push_str("        leaf model { type string; }\n");
    out.push_str("        leaf-list candidates { type string; }\n");
    out.push_str("        leaf-list pii-types-allowed {\n");
    out.push_str("          type string; }\n");
    out.push_str("      }\n");
    out.push_str("    }\n");
    out.push_str("    container routing {\n");
    out.push_str("      list decision-tree {\n");
    out.push_str("        key \"name\";\n");
    out.push_str("        leaf name { type string; }\n");
    out.push_str("        list branch {\n");
    out.push_str("          key \"priority\";\n");
    out.push_str("          ordered-by user;\n");
    out.push_str("          leaf priority { type uint8; }\n");
    out.push_str("          leaf condition { type string; }\n");
    out.push_str("          leaf backend { type string; }\n");
    out.push_str("        }\n");
    out.push_str("      }\n");
    out.push_str("    }\n");
    out.push_str("    container network {\n");
    out.push_str("      list network-endpoint {\n");
    out.push_str("        key \"name\";\n");
    out.push_str("        leaf name { type string; }\n");
    out.push_str("        leaf host { type string; }\n");
    out.push_str("        leaf port { type uint16; }\n");
    out.push_str("        leaf skill { type string; }\n");
    out.push_str("      }\n");
    out.push_str("    }\n");
    out.push_str("  }\n");
    out.push_str("}\n");

    ArtifactEntry {
        target: EmissionTarget::Yang,
        path: format!("yang/{}.yang", MODULE_NAME),
        content: out,
        kind: ArtifactKind::Yang,
    }
}
