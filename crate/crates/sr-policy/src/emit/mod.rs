//! Target artifact generation from a verified policy.
//!
//! Every emitted file embeds the one source hash of the compilation, and
//! bundle assembly asserts that presence before anything is written. Each
//! decision tree additionally carries a structural hash of its logic that is
//! identical across all targets of one build, so independently deployed
//! artifacts can be checked against each other.
//!
//! Emitters are pure text generators: the orchestration program text they
//! produce is never executed here (the runtime module is the executable
//! semantics of the policy).

pub mod gates;
pub mod kubernetes;
pub mod langgraph;
pub mod netconf;
pub mod openclaw;
pub mod routing;
pub mod text;
pub mod yang;

use crate::ast::*;
use crate::diag::{DiagCode, Diagnostic, SourceSpan};
use crate::verify::{verify, VerificationReport};
use indexmap::IndexMap;
use sha2::{Digest, Sha256};
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EmissionTarget {
    RoutingYaml,
    LanggraphA,
    LanggraphB,
    Openclaw,
    Kubernetes,
    Yang,
    Netconf,
    ProtocolGates,
}

impl EmissionTarget {
    /// All targets in the fixed emission order.
    pub fn all() -> [EmissionTarget; 8] {
        [
            EmissionTarget::RoutingYaml,
            EmissionTarget::LanggraphA,
            EmissionTarget::LanggraphB,
            EmissionTarget::Openclaw,
            EmissionTarget::Kubernetes,
            EmissionTarget::Yang,
            EmissionTarget::Netconf,
            EmissionTarget::ProtocolGates,
        ]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmissionTarget::RoutingYaml => "routing_yaml",
            EmissionTarget::LanggraphA => "langgraph_a",
            EmissionTarget::LanggraphB => "langgraph_b",
            EmissionTarget::Openclaw => "openclaw",
            EmissionTarget::Kubernetes => "kubernetes",
            EmissionTarget::Yang => "yang",
            EmissionTarget::Netconf => "netconf",
            EmissionTarget::ProtocolGates => "protocol_gates",
        }
    }

    pub fn parse(s: &str) -> Option<EmissionTarget> {
        EmissionTarget::all().into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    Yaml,
    Json,
    Xml,
    Yang,
    PythonText,
    TypescriptText,
}

#[derive(Debug, Clone)]
pub struct ArtifactEntry {
    pub target: EmissionTarget,
    /// Relative path under the output directory, `<target>/<file>`.
    pub path: String,
    pub content: String,
    pub kind: ArtifactKind,
}

#[derive(Debug, Clone)]
pub struct ArtifactBundle {
    pub entries: Vec<ArtifactEntry>,
    pub source_hash: SourceHash,
    pub structural_hashes: IndexMap<String, String>,
    pub warnings: Vec<Diagnostic>,
}

impl ArtifactBundle {
    /// Writes every entry under `dir` (atomic per file: temp then rename).
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for entry in &self.entries {
            let path = dir.join(&entry.path);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            let tmp = path.with_extension("tmp-write");
            std::fs::write(&tmp, entry.content.as_bytes())?;
            std::fs::rename(&tmp, &path)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Per-build emitter configuration. Protocol gates may carry an embedding
/// threshold override without touching the DSL source; the boundary-keyed
/// map wins over the blanket value.
#[derive(Debug, Clone, Default, serde::Deserialize)]
pub struct EmitOptions {
    #[serde(default)]
    pub protocol_gates: GateOptions,
}

#[derive(Debug, Clone, Default, serde::Deserialize)]
pub struct GateOptions {
    #[serde(default)]
    pub embedding_threshold_override: Option<f64>,
    #[serde(default)]
    pub per_boundary: IndexMap<String, f64>,
}

impl EmitOptions {
    pub fn from_json(text: &str) -> Result<EmitOptions, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn gate_override(&self, boundary: &str) -> Option<f64> {
        self.protocol_gates
            .per_boundary
            .get(boundary)
            .copied()
            .or(self.protocol_gates.embedding_threshold_override)
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("emission refused: verification failed with {} error(s)", .0.error_count())]
    Refused(Box<VerificationReport>),
    #[error("internal invariant violated: emitted file `{path}` does not embed the source hash")]
    HashMissing { path: String },
}

/// Shared emission context: the one source hash, structural hashes per
/// effective tree, and the effective tree set (declared trees plus the
/// synthesized route table).
#[derive(Debug, Clone)]
pub struct EmitCtx {
    pub source_hash: SourceHash,
    pub structural_hashes: IndexMap<String, String>,
    pub trees: IndexMap<String, DecisionTree>,
    pub options: EmitOptions,
}

impl EmitCtx {
    pub fn new(policy: &Policy, options: EmitOptions) -> EmitCtx {
        let trees = policy.effective_trees();
        let structural_hashes = trees
            .values()
            .map(|t| (t.name.clone(), structural_hash(t, policy)))
            .collect();
        EmitCtx {
            source_hash: compute_source_hash(policy),
            structural_hashes,
            trees,
            options,
        }
    }

    pub fn hash(&self) -> &str {
        self.source_hash.as_str()
    }

    pub fn tree_hash(&self, name: &str) -> &str {
        self.structural_hashes
            .get(name)
            .map(String::as_str)
            .unwrap_or("")
    }
}

/// Digest of one tree's decision logic — branch order, condition structure,
/// resolved thresholds, group gates, and backends — independent of emission
/// target. 16 hex characters.
pub fn structural_hash(tree: &DecisionTree, policy: &Policy) -> String {
    let mut desc = String::new();
    for (i, branch) in tree.branches.iter().enumerate() {
        desc.push_str(&format!(
            "branch {}: {} -> {}\n",
            i,
            structural_condition(&branch.condition, policy),
            branch.backend
        ));
    }
    desc.push_str(&format!(
        "else -> {}\n",
        tree.else_backend.as_deref().unwrap_or("<missing>")
    ));
    let digest = Sha256::digest(desc.as_bytes());
    digest
        .iter()
        .take(8)
        .map(|b| format!("{:02x}", b))
        .collect()
}

fn structural_condition(cond: &ConditionExpr, policy: &Policy) -> String {
    match cond {
        ConditionExpr::SignalRef { kind, name, .. } => {
            let theta = policy
                .signals
                .get(name)
                .and_then(|s| s.threshold)
                .map(two_dec)
                .unwrap_or_else(|| "-".to_string());
            match policy.group_of(name) {
                Some(group) => format!(
                    "{}(\"{}\")[t={},gate={},tau={}]",
                    kind,
                    name,
                    theta,
                    text::shortest(group.effective_firing_threshold()),
                    two_dec(group.temperature)
                ),
                None => format!("{}(\"{}\")[t={}]", kind, name, theta),
            }
        }
        ConditionExpr::And(l, r) => format!(
            "and({},{})",
            structural_condition(l, policy),
            structural_condition(r, policy)
        ),
        ConditionExpr::Or(l, r) => format!(
            "or({},{})",
            structural_condition(l, policy),
            structural_condition(r, policy)
        ),
        ConditionExpr::Not(c) => format!("not({})", structural_condition(c, policy)),
    }
}

/// Emits the requested targets from a verified policy. Refuses on any
/// verification error; asserts afterwards that every produced file embeds
/// the source hash.
pub fn emit_all(
    policy: &Policy,
    targets: &[EmissionTarget],
    options: EmitOptions,
) -> Result<ArtifactBundle, EmitError> {
    let report = verify(policy);
    if !report.overall_pass() {
        return Err(EmitError::Refused(Box::new(report)));
    }

    let ctx = EmitCtx::new(policy, options);
    let mut entries = Vec::new();
    let mut warnings = Vec::new();

    for target in EmissionTarget::all() {
        if !targets.contains(&target) {
            continue;
        }
        match target {
            EmissionTarget::RoutingYaml => entries.extend(routing::emit_routing_yaml(policy, &ctx)),
            EmissionTarget::LanggraphA => {
                entries.extend(langgraph::emit_langgraph(policy, &ctx, langgraph::Strategy::A))
            }
            EmissionTarget::LanggraphB => {
                entries.extend(langgraph::emit_langgraph(policy, &ctx, langgraph::Strategy::B))
            }
            EmissionTarget::Openclaw => entries.extend(openclaw::emit_openclaw(policy, &ctx)),
            EmissionTarget::Kubernetes => entries.extend(kubernetes::emit_kubernetes(policy, &ctx)),
            EmissionTarget::Yang => entries.push(yang::emit_yang(policy, &ctx)),
            EmissionTarget::Netconf => entries.push(netconf::emit_netconf(policy, &ctx)),
            EmissionTarget::ProtocolGates => {
                let (gate_entries, gate_warnings) = gates::emit_protocol_gates(policy, &ctx);
                entries.extend(gate_entries);
                warnings.extend(gate_warnings);
            }
        }
    }

    // Constructs with no mapping on any requested target.
    for plugin in policy.plugins.values() {
        warnings.push(Diagnostic::warning(
            DiagCode::W070NotMapped,
            format!(
                "PLUGIN `{}` does not map to any emission target and was skipped",
                plugin.name
            ),
            plugin.span.clone(),
        ));
    }

    // Check (v): one hash, stamped everywhere.
    for entry in &entries {
        if !entry.content.contains(ctx.hash()) {
            return Err(EmitError::HashMissing {
                path: entry.path.clone(),
            });
        }
    }

    Ok(ArtifactBundle {
        entries,
        source_hash: ctx.source_hash.clone(),
        structural_hashes: ctx.structural_hashes.clone(),
        warnings,
    })
}

/// The tree protocol gates and the gateway hook compile: the last declared
/// tree that references a safety classifier (jailbreak or pii), falling back
/// to the first declared tree.
pub fn select_gate_tree<'p>(trees: &'p IndexMap<String, DecisionTree>) -> Option<&'p DecisionTree> {
    trees
        .values()
        .filter(|t| {
            t.branches.iter().any(|b| {
                b.condition
                    .refs()
                    .iter()
                    .any(|(kind, _, _)| matches!(kind, SignalKind::Jailbreak | SignalKind::Pii))
            })
        })
        .last()
        .or_else(|| trees.values().next())
}

#[allow(dead_code)]
fn unused_span() -> SourceSpan {
    SourceSpan::synthetic()
}
