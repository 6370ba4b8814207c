//! Kubernetes manifests: NetworkPolicy (egress from declared endpoints),
//! ConfigMap (embedded policy.json), and a Sandbox resource per agent.
//!
//! With zero agents a single default manifest set named `routing-policy` is
//! emitted so infrastructure artifacts exist for pure routing policies.

use super::routing::routing_policy_json;
use super::text::{hyphenate, yaml_str};
use super::{ArtifactEntry, ArtifactKind, EmissionTarget, EmitCtx};
use crate::ast::*;
use std::collections::BTreeSet;

const NAMESPACE: &str = "agents";

pub fn emit_kubernetes(policy: &Policy, ctx: &EmitCtx) -> Vec<ArtifactEntry> {
    let agents: Vec<ManifestSubject> = if policy.agents.is_empty() {
        vec![ManifestSubject::default_set()]
    } else {
        policy
            .agents
            .values()
            .map(|a| ManifestSubject::for_agent(policy, a))
            .collect()
    };

    let mut entries = Vec::new();
    for subject in &agents {
        entries.push(entry(
            format!("kubernetes/{}-networkpolicy.yaml", subject.name),
            network_policy(policy, ctx, subject),
        ));
        entries.push(entry(
            format!("kubernetes/{}-configmap.yaml", subject.name),
            config_map(policy, ctx, subject),
        ));
        entries.push(entry(
            format!("kubernetes/{}-sandbox.yaml", subject.name),
            sandbox(policy, ctx, subject),
        ));
    }
    entries
}

fn entry(path: String, content: String) -> ArtifactEntry {
    ArtifactEntry {
        target: EmissionTarget::Kubernetes,
        path,
        content,
        kind: ArtifactKind::Yaml,
    }
}

struct ManifestSubject {
    name: String,
    skills: Vec<String>,
    replicas: u32,
    cpu: String,
    memory: String,
    image: String,
}

impl ManifestSubject {
    fn default_set() -> ManifestSubject {
        ManifestSubject {
            name: "routing-policy".into(),
            skills: Vec::new(),
            replicas: 1,
            cpu: "1".into(),
            memory: "2Gi".into(),
            image: "agent-runtime:latest".into(),
        }
    }

    fn for_agent(policy: &Policy, agent: &AgentDef) -> ManifestSubject {
        let deploy = policy.deploys.get(&agent.id);
        ManifestSubject {
            name: hyphenate(&agent.id),
            skills: agent.skills.clone(),
            replicas: deploy.and_then(|d| d.replicas).unwrap_or(1),
            cpu: deploy.and_then(|d| d.cpu.clone()).unwrap_or_else(|| "1".into()),
            memory: deploy
                .and_then(|d| d.memory.clone())
                .unwrap_or_else(|| "2Gi".into()),
            image: deploy
                .and_then(|d| d.image.clone())
                .unwrap_or_else(|| "agent-runtime:latest".into()),
        }
    }
}

/// Network names for the egress annotation: declared endpoints plus the
/// model registry when any signal needs a model downloaded.
fn network_names(policy: &Policy) -> Vec<String> {
    let mut names: Vec<String> = policy.networks.keys().cloned().collect();
    if policy.signals.values().any(|s| s.model.is_some()) {
        names.push("huggingface".into());
    }
    names
}

fn skills_annotation(policy: &Policy, subject: &ManifestSubject) -> String {
    if subject.skills.is_empty() {
        policy
            .networks
            .values()
            .map(|n| n.skill.clone())
            .collect::<Vec<_>>()
            .join(",")
    } else {
        subject.skills.join(",")
    }
}

fn network_policy(policy: &Policy, ctx: &EmitCtx, subject: &ManifestSubject) -> String {
    let mut out = String::new();
    out.push_str("apiVersion: networking.k8s.io/v1\n");
    out.push_str("kind: NetworkPolicy\n");
    out.push_str("metadata:\n");
    out.push_str(&format!("  name: {}-egress\n", subject.name));
    out.push_str(&format!("  namespace: {}\n", NAMESPACE));
    out.push_str("  labels:\n");
    out.push_str("    app.kubernetes.io/managed-by: dsl-compiler\n");
    out.push_str(&format!("    dsl-framework.io/source-hash: {}\n", ctx.hash()));
    out.push_str("  annotations:\n");
    out.push_str(&format!(
        "    dsl-framework.io/networks: {}\n",
        yaml_str(&network_names(policy).join(","))
    ));
    out.push_str(&format!(
        "    dsl-framework.io/skills: {}\n",
        yaml_str(&skills_annotation(policy, subject))
    ));
    out.push_str("spec:\n");
    out.push_str("  podSelector:\n");
    out.push_str("    matchLabels:\n");
    out.push_str(&format!("      app.kubernetes.io/name: {}\n", subject.name));
    out.push_str("  policyTypes: [Egress]\n");
    out.push_str("  egress:\n");
    out.push_str("    - to: # DNS\n");
    out.push_str("        - namespaceSelector:\n");
    out.push_str("            matchLabels:\n");
    out.push_str("              kubernetes.io/metadata.name: kube-system\n");
    out.push_str("          podSelector:\n");
    out.push_str("            matchLabels:\n");
    out.push_str("              k8s-app: kube-dns\n");
    out.push_str("      ports:\n");
    out.push_str("        - { protocol: UDP, port: 53 }\n");
    out.push_str("        - { protocol: TCP, port: 53 }\n");
    if !policy.networks.is_empty() {
        let ports: BTreeSet<u16> = policy.networks.values().map(|n| n.port).collect();
        out.push_str("    - to: # SaaS endpoints\n");
        out.push_str("        - ipBlock:\n");
        out.push_str("            cidr: 0.0.0.0/0\n");
        out.push_str("            except:\n");
        out.push_str("              - 10.0.0.0/8\n");
        out.push_str("              - 172.16.0.0/12\n");
        out.push_str("              - 192.168.0.0/16\n");
        out.push_str("      ports:\n");
        for port in ports {
            out.push_str(&format!("        - {{ protocol: TCP, port: {} }}\n", port));
        }
    }
    out
}

fn config_map(policy: &Policy, ctx: &EmitCtx, subject: &ManifestSubject) -> String {
    let mut out = String::new();
    out.push_str("apiVersion: v1\n");
    out.push_str("kind: ConfigMap\n");
    out.push_str("metadata:\n");
    out.push_str(&format!("  name: {}-routing-policy\n", subject.name));
    out.push_str(&format!("  namespace: {}\n", NAMESPACE));
    out.push_str("  labels:\n");
    out.push_str("    app.kubernetes.io/managed-by: dsl-compiler\n");
    out.push_str(&format!("    dsl-framework.io/source-hash: {}\n", ctx.hash()));
    out.push_str("data:\n");
    out.push_str("  policy.json: |\n");
    for line in routing_policy_json(policy, ctx).lines() {
        if line.is_empty() {
            out.push('\n');
        } else {
            out.push_str(&format!("    {}\n", line));
        }
    }
    out
}

fn sandbox(policy: &Policy, ctx: &EmitCtx, subject: &ManifestSubject) -> String {
    let hosts: Vec<String> = policy.networks.values().map(|n| n.host.clone()).collect();
    let mut out = String::new();
    out.push_str("apiVersion: agents.x-k8s.io/v1alpha1\n");
    out.push_str("kind: Sandbox\n");
    out.push_str("metadata:\n");
    out.push_str(&format!("  name: {}\n", subject.name));
    out.push_str(&format!("  namespace: {}\n", NAMESPACE));
    out.push_str("  labels:\n");
    out.push_str(&format!("    app.kubernetes.io/name: {}\n", subject.name));
    out.push_str("    app.kubernetes.io/managed-by: dsl-compiler\n");
    out.push_str(&format!("    dsl-framework.io/source-hash: {}\n", ctx.hash()));
    out.push_str("  annotations:\n");
    out.push_str(&format!(
        "    dsl-framework.io/policy-configmap: {}-routing-policy\n",
        subject.name
    ));
    out.push_str(&format!(
        "    dsl-framework.io/networkpolicy: {}-egress\n",
        subject.name
    ));
    out.push_str("    dsl-framework.io/audit-level: full\n");
    out.push_str(&format!(
        "    dsl-framework.io/skills: {}\n",
        yaml_str(&skills_annotation(policy, subject))
    ));
    out.push_str(&format!(
        "    dsl-framework.io/permitted-hosts: {}\n",
        yaml_str(&hosts.join(","))
    ));
    out.push_str("spec:\n");
    out.push_str("  podTemplate:\n");
    out.push_str("    metadata:\n");
    out.push_str("      labels:\n");
    out.push_str(&format!("        app.kubernetes.io/name: {}\n", subject.name));
    out.push_str("    spec:\n");
    out.push_str("      containers:\n");
    out.push_str("        - name: agent\n");
    out.push_str(&format!("          image: {}\n", subject.image));
    out.push_str("          resources:\n");
    out.push_str(&format!(
        "            requests: {{ cpu: {}, memory: {} }}\n",
        yaml_str(&subject.cpu),
        subject.memory
    ));
    out.push_str(&format!(
        "            limits: {{ cpu: {}, memory: {} }}\n",
        yaml_str(&subject.cpu),
        subject.memory
    ));
    out.push_str("          env:\n");
    out.push_str("            - name: POLICY_CONFIG\n");
    out.push_str("              value: /etc/policy/policy.json\n");
    out.push_str("            - name: AUDIT_LEVEL\n");
    out.push_str("              value: full\n");
    out.push_str("          volumeMounts:\n");
    out.push_str("            - name: policy-config\n");
    out.push_str("              mountPath: /etc/policy\n");
    out.push_str("              readOnly: true\n");
    out.push_str("      volumes:\n");
    out.push_str("        - name: policy-config\n");
    out.push_str("          configMap:\n");
    out.push_str(&format!("            name: {}-routing-policy\n", subject.name));
    out.push_str("  volumeClaimTemplates:\n");
    out.push_str("    - metadata: { name: agent-workspace }\n");
    out.push_str("      spec:\n");
    out.push_str("        accessModes: [ReadWriteOnce]\n");
    out.push_str("        resources:\n");
    out.push_str("          requests: { storage: 5Gi }\n");
    out.push_str(&format!("  replicas: {}\n", subject.replicas));
    out
}
