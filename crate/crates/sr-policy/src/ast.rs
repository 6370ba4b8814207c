//! Typed policy AST with canonical serialization and source hashing.
//!
//! A [`Policy`] is the validated form of one `.sr` source. Declaration order
//! is preserved everywhere because it is semantically significant: branch
//! order is evaluation priority, group member order drives tie-breaking, and
//! route synthesis breaks priority ties by declaration order.
//!
//! Every value here is immutable after construction and free of interior
//! mutability, so policies can be shared and sent across threads.

use crate::diag::{DiagCode, Diagnostic, SourceSpan};
use indexmap::IndexMap;
use sha2::{Digest, Sha256};
use std::fmt;

/// Backends that may be referenced without a declaration.
pub const BUILTIN_BACKENDS: [&str; 2] = ["allow", "deny"];

/// Name of the decision tree synthesized from ROUTE blocks.
pub const ROUTE_TABLE_TREE: &str = "route_table";

pub fn is_builtin_backend(name: &str) -> bool {
    BUILTIN_BACKENDS.contains(&name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Jailbreak,
    Pii,
    Embedding,
    Authz,
    Keyword,
    Complexity,
}

impl SignalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::Jailbreak => "jailbreak",
            SignalKind::Pii => "pii",
            SignalKind::Embedding => "embedding",
            SignalKind::Authz => "authz",
            SignalKind::Keyword => "keyword",
            SignalKind::Complexity => "complexity",
        }
    }

    pub fn parse(s: &str) -> Option<SignalKind> {
        Some(match s {
            "jailbreak" => SignalKind::Jailbreak,
            "pii" => SignalKind::Pii,
            "embedding" => SignalKind::Embedding,
            "authz" => SignalKind::Authz,
            "keyword" => SignalKind::Keyword,
            "complexity" => SignalKind::Complexity,
            _ => return None,
        })
    }

    pub fn all() -> [SignalKind; 6] {
        [
            SignalKind::Jailbreak,
            SignalKind::Pii,
            SignalKind::Embedding,
            SignalKind::Authz,
            SignalKind::Keyword,
            SignalKind::Complexity,
        ]
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One declared signal. Kind-specific fields are validated at parse time:
/// embedding requires candidates, authz requires a role, and fields that do
/// not belong to the kind must be absent.
#[derive(Debug, Clone)]
pub struct Signal {
    pub name: String,
    pub kind: SignalKind,
    /// θ in [0, 1]. Required for scored kinds; authz signals may omit it.
    pub threshold: Option<f64>,
    pub model: Option<String>,
    pub candidates: Vec<String>,
    pub pii_types_allowed: Vec<String>,
    pub subjects: Vec<Subject>,
    pub role: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct Subject {
    pub kind: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    None,
    PriorityOrder,
}

/// k ≥ 2 embedding signals normalized jointly by temperature-scaled softmax.
#[derive(Debug, Clone)]
pub struct SignalGroup {
    pub name: String,
    pub members: Vec<String>,
    pub member_spans: Vec<SourceSpan>,
    /// τ > 0.
    pub temperature: f64,
    /// Optional explicit firing gate; defaults to 1/k, compared strictly.
    pub firing_threshold: Option<f64>,
    pub tie_break: TieBreak,
    pub span: SourceSpan,
}

impl SignalGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// The gate a normalized score must exceed for the group to fire.
    pub fn effective_firing_threshold(&self) -> f64 {
        self.firing_threshold
            .unwrap_or(1.0 / self.members.len() as f64)
    }
}

/// Boolean expression over typed signal references. NOT binds tighter than
/// AND, AND tighter than OR.
#[derive(Debug, Clone)]
pub enum ConditionExpr {
    SignalRef {
        kind: SignalKind,
        name: String,
        span: SourceSpan,
    },
    And(Box<ConditionExpr>, Box<ConditionExpr>),
    Or(Box<ConditionExpr>, Box<ConditionExpr>),
    Not(Box<ConditionExpr>),
}

impl ConditionExpr {
    pub fn signal_ref(kind: SignalKind, name: impl Into<String>) -> ConditionExpr {
        ConditionExpr::SignalRef {
            kind,
            name: name.into(),
            span: SourceSpan::synthetic(),
        }
    }

    /// All signal references, left to right, duplicates included.
    pub fn refs(&self) -> Vec<(&SignalKind, &str, &SourceSpan)> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<(&'a SignalKind, &'a str, &'a SourceSpan)>) {
        match self {
            ConditionExpr::SignalRef { kind, name, span } => out.push((kind, name, span)),
            ConditionExpr::And(l, r) | ConditionExpr::Or(l, r) => {
                l.collect_refs(out);
                r.collect_refs(out);
            }
            ConditionExpr::Not(c) => c.collect_refs(out),
        }
    }

    /// Canonical source rendering with minimal parentheses.
    pub fn render(&self) -> String {
        self.render_prec(0)
    }

    // Precedence levels: OR = 1, AND = 2, NOT = 3, ref = 4.
    fn render_prec(&self, parent: u8) -> String {
        let (text, level) = match self {
            ConditionExpr::SignalRef { kind, name, .. } => {
                (format!("{}(\"{}\")", kind, name), 4u8)
            }
            ConditionExpr::Not(c) => (format!("NOT {}", c.render_prec(3)), 3),
            ConditionExpr::And(l, r) => {
                (format!("{} AND {}", l.render_prec(2), r.render_prec(3)), 2)
            }
            ConditionExpr::Or(l, r) => {
                (format!("{} OR {}", l.render_prec(1), r.render_prec(2)), 1)
            }
        };
        if level < parent {
            format!("({})", text)
        } else {
            text
        }
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub condition: ConditionExpr,
    pub backend: String,
    pub span: SourceSpan,
}

/// Priority-ordered IF/ELSE-IF branches with a mandatory ELSE. Branch order
/// equals declaration order equals evaluation priority.
#[derive(Debug, Clone)]
pub struct DecisionTree {
    pub name: String,
    pub branches: Vec<Branch>,
    /// `None` only for malformed trees kept alive so the verifier can flag
    /// them; every parsed-valid tree carries its ELSE backend.
    pub else_backend: Option<String>,
    pub else_span: SourceSpan,
    pub span: SourceSpan,
}

impl DecisionTree {
    /// Trace labels per branch: the backend name, or `branch_<i>` when the
    /// backend appears in more than one arm (ELSE included). The final
    /// element is the ELSE label; its index equals the branch count.
    pub fn branch_labels(&self) -> Vec<String> {
        let mut counts: IndexMap<&str, usize> = IndexMap::new();
        for b in &self.branches {
            *counts.entry(b.backend.as_str()).or_insert(0) += 1;
        }
        if let Some(e) = &self.else_backend {
            *counts.entry(e.as_str()).or_insert(0) += 1;
        }
        let mut labels: Vec<String> = self
            .branches
            .iter()
            .enumerate()
            .map(|(i, b)| {
                if counts[b.backend.as_str()] > 1 {
                    format!("branch_{}", i)
                } else {
                    b.backend.clone()
                }
            })
            .collect();
        if let Some(e) = &self.else_backend {
            labels.push(if counts[e.as_str()] > 1 {
                format!("branch_{}", self.branches.len())
            } else {
                e.clone()
            });
        }
        labels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Str(String),
    Number(f64),
    Bool(bool),
    Ident(String),
}

impl ParamValue {
    fn render(&self) -> String {
        match self {
            ParamValue::Str(s) => quote(s),
            ParamValue::Number(n) => two_dec(*n),
            ParamValue::Bool(b) => b.to_string(),
            ParamValue::Ident(i) => i.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Route {
    pub name: String,
    pub priority: i64,
    pub when: ConditionExpr,
    pub model: String,
    pub params: IndexMap<String, ParamValue>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Model,
    Action,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Model => "model",
            BackendKind::Action => "action",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Backend {
    pub name: String,
    pub kind: BackendKind,
    /// Model id or action verb.
    pub target: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct NetworkEndpoint {
    pub name: String,
    pub host: String,
    pub port: u16,
    pub methods: Vec<String>,
    pub paths: Vec<String>,
    pub skill: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandboxMode {
    All,
    NonMain,
    Off,
}

impl SandboxMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SandboxMode::All => "all",
            SandboxMode::NonMain => "non-main",
            SandboxMode::Off => "off",
        }
    }

    pub fn parse(s: &str) -> Option<SandboxMode> {
        Some(match s {
            "all" => SandboxMode::All,
            "non-main" => SandboxMode::NonMain,
            "off" => SandboxMode::Off,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AgentDef {
    pub id: String,
    pub model: String,
    pub skills: Vec<String>,
    pub sandbox_mode: SandboxMode,
    pub workspace: Option<String>,
    pub span: SourceSpan,
}

/// Deployment envelope for one agent; all attributes optional.
#[derive(Debug, Clone)]
pub struct DeployDef {
    pub agent: String,
    pub sandbox_mode: Option<SandboxMode>,
    pub workspace: Option<String>,
    pub replicas: Option<u32>,
    pub cpu: Option<String>,
    pub memory: Option<String>,
    pub image: Option<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub name: String,
    pub input: String,
    pub user_roles: Vec<String>,
    pub expected_decision: String,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default)]
pub struct GlobalBlock {
    pub default_backend: Option<String>,
    /// Free-form defaults retained verbatim (the block's attribute set is
    /// intentionally open beyond `version` and `default_backend`).
    pub defaults: IndexMap<String, AttrValue>,
    pub span: Option<SourceSpan>,
}

/// Attribute value as written in source. Object nesting is limited to one
/// level by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Str(String),
    Number(f64),
    Bool(bool),
    Ident(String),
    List(Vec<AttrValue>),
    Object(IndexMap<String, AttrValue>),
}

impl AttrValue {
    pub fn render(&self) -> String {
        match self {
            AttrValue::Str(s) => quote(s),
            AttrValue::Number(n) => two_dec(*n),
            AttrValue::Bool(b) => b.to_string(),
            AttrValue::Ident(i) => i.clone(),
            AttrValue::List(items) => {
                let inner: Vec<String> = items.iter().map(AttrValue::render).collect();
                format!("[{}]", inner.join(", "))
            }
            AttrValue::Object(map) => {
                let inner: Vec<String> = map
                    .iter()
                    .map(|(k, v)| format!("{}: {}", k, v.render()))
                    .collect();
                format!("{{ {} }}", inner.join(", "))
            }
        }
    }
}

/// Plugin blocks are parsed and retained but never mapped by emitters.
#[derive(Debug, Clone)]
pub struct PluginBlock {
    pub name: String,
    pub attrs: IndexMap<String, AttrValue>,
    pub span: SourceSpan,
}

/// 8 lowercase hexadecimal characters identifying one canonical source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SourceHash(String);

impl SourceHash {
    pub fn from_canonical_text(text: &str) -> SourceHash {
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{:02x}", b)).collect();
        SourceHash(hex[..8].to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The full typed AST of one `.sr` source.
#[derive(Debug, Clone, Default)]
pub struct Policy {
    pub version: String,
    pub signals: IndexMap<String, Signal>,
    pub signal_groups: IndexMap<String, SignalGroup>,
    pub decision_trees: IndexMap<String, DecisionTree>,
    pub routes: Vec<Route>,
    pub backends: IndexMap<String, Backend>,
    pub networks: IndexMap<String, NetworkEndpoint>,
    pub agents: IndexMap<String, AgentDef>,
    pub deploys: IndexMap<String, DeployDef>,
    pub tests: Vec<TestCase>,
    pub global: GlobalBlock,
    pub plugins: IndexMap<String, PluginBlock>,
}

impl Policy {
    pub fn new() -> Policy {
        Policy {
            version: "v1".to_string(),
            ..Policy::default()
        }
    }

    /// The group a signal belongs to, if any. Group membership is unique
    /// because duplicate membership is rejected by the verifier.
    pub fn group_of(&self, signal_name: &str) -> Option<&SignalGroup> {
        self.signal_groups
            .values()
            .find(|g| g.members.iter().any(|m| m == signal_name))
    }

    /// True when `name` refers to a declared or built-in backend.
    pub fn backend_exists(&self, name: &str) -> bool {
        is_builtin_backend(name) || self.backends.contains_key(name)
    }

    /// Member thresholds of a group, in member order. Members without a
    /// declared threshold default to 0.5.
    pub fn group_thresholds(&self, group: &SignalGroup) -> IndexMap<String, f64> {
        group
            .members
            .iter()
            .map(|m| {
                let theta = self
                    .signals
                    .get(m)
                    .and_then(|s| s.threshold)
                    .unwrap_or(0.5);
                (m.clone(), theta)
            })
            .collect()
    }

    /// Declared trees followed by the synthesized route table, when any
    /// routes exist and a default backend is configured.
    pub fn effective_trees(&self) -> IndexMap<String, DecisionTree> {
        let mut trees = self.decision_trees.clone();
        let synthesis = routes_to_tree(self);
        if let Some(tree) = synthesis.tree {
            trees.insert(tree.name.clone(), tree);
        }
        trees
    }
}

// --- Canonical serialization --------------------------------------------

/// Reals are rendered with exactly two fraction digits everywhere in the
/// canonical form; the parser rejects literals that would lose precision.
pub fn two_dec(x: f64) -> String {
    format!("{:.2}", x)
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn str_list(items: &[String]) -> String {
    let inner: Vec<String> = items.iter().map(|s| quote(s)).collect();
    format!("[{}]", inner.join(", "))
}

/// Deterministic text form of a policy: sections in a fixed order, blocks in
/// declaration order, attributes in a fixed per-block order, normalized
/// whitespace, reals with two fraction digits. Parsing the canonical text
/// yields a structurally equal policy.
pub fn canonicalize(policy: &Policy) -> String {
    let mut out = String::new();
    let mut block = |text: String| {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&text);
    };

    {
        let g = &policy.global;
        let mut lines = vec![format!("  version: {}", quote(&policy.version))];
        if let Some(b) = &g.default_backend {
            lines.push(format!("  default_backend: {}", b));
        }
        let mut extra: Vec<(&String, &AttrValue)> =
            g.defaults.iter().filter(|(k, _)| *k != "version").collect();
        extra.sort_by(|a, b| a.0.cmp(b.0));
        for (k, v) in extra {
            lines.push(format!("  {}: {}", k, v.render()));
        }
        block(format!("GLOBAL {{\n{}\n}}\n", lines.join("\n")));
    }

    for s in policy.signals.values() {
        let mut lines = Vec::new();
        if let Some(t) = s.threshold {
            lines.push(format!("  threshold: {}", two_dec(t)));
        }
        if let Some(m) = &s.model {
            lines.push(format!("  model: {}", quote(m)));
        }
        if !s.candidates.is_empty() {
            lines.push(format!("  candidates: {}", str_list(&s.candidates)));
        }
        if !s.pii_types_allowed.is_empty() {
            lines.push(format!(
                "  pii_types_allowed: {}",
                str_list(&s.pii_types_allowed)
            ));
        }
        if !s.subjects.is_empty() {
            let subjects: Vec<String> = s
                .subjects
                .iter()
                .map(|sub| {
                    format!("{{ kind: {}, name: {} }}", quote(&sub.kind), quote(&sub.name))
                })
                .collect();
            lines.push(format!("  subjects: [{}]", subjects.join(", ")));
        }
        if let Some(r) = &s.role {
            lines.push(format!("  role: {}", quote(r)));
        }
        block(format!(
            "SIGNAL {} {} {{\n{}\n}}\n",
            s.kind,
            s.name,
            lines.join("\n")
        ));
    }

    for g in policy.signal_groups.values() {
        let mut lines = vec![
            format!("  signals: [{}]", g.members.join(", ")),
            format!("  temperature: {}", two_dec(g.temperature)),
        ];
        if let Some(t) = g.firing_threshold {
            lines.push(format!("  firing_threshold: {}", two_dec(t)));
        }
        if g.tie_break == TieBreak::PriorityOrder {
            lines.push("  tie_break: priority_order".to_string());
        }
        block(format!("SIGNAL_GROUP {} {{\n{}\n}}\n", g.name, lines.join("\n")));
    }

    for b in policy.backends.values() {
        block(format!(
            "BACKEND {} {{\n  kind: {}\n  target: {}\n}}\n",
            b.name,
            quote(b.kind.as_str()),
            quote(&b.target)
        ));
    }

    for t in policy.decision_trees.values() {
        block(canonical_tree(t));
    }

    for r in policy.routes.iter() {
        let mut model_line = format!("  MODEL {}", quote(&r.model));
        if !r.params.is_empty() {
            let mut params: Vec<(&String, &ParamValue)> = r.params.iter().collect();
            params.sort_by(|a, b| a.0.cmp(b.0));
            let rendered: Vec<String> = params
                .iter()
                .map(|(k, v)| format!("{} = {}", k, v.render()))
                .collect();
            model_line.push_str(&format!(" ({})", rendered.join(", ")));
        }
        block(format!(
            "ROUTE {} {{\n  PRIORITY {}\n  WHEN {}\n{}\n}}\n",
            r.name,
            r.priority,
            r.when.render(),
            model_line
        ));
    }

    for n in policy.networks.values() {
        block(format!(
            "NETWORK {} {{\n  host: {}\n  port: {}\n  methods: {}\n  paths: {}\n  skill: {}\n}}\n",
            n.name,
            quote(&n.host),
            n.port,
            str_list(&n.methods),
            str_list(&n.paths),
            quote(&n.skill)
        ));
    }

    for a in policy.agents.values() {
        let mut lines = vec![
            format!("  model: {}", quote(&a.model)),
            format!("  skills: {}", str_list(&a.skills)),
            format!("  sandbox_mode: {}", quote(a.sandbox_mode.as_str())),
        ];
        if let Some(w) = &a.workspace {
            lines.push(format!("  workspace: {}", quote(w)));
        }
        block(format!("AGENT {} {{\n{}\n}}\n", a.id, lines.join("\n")));
    }

    for d in policy.deploys.values() {
        let mut lines = Vec::new();
        if let Some(m) = d.sandbox_mode {
            lines.push(format!("  sandbox_mode: {}", quote(m.as_str())));
        }
        if let Some(w) = &d.workspace {
            lines.push(format!("  workspace: {}", quote(w)));
        }
        if let Some(r) = d.replicas {
            lines.push(format!("  replicas: {}", r));
        }
        if let Some(c) = &d.cpu {
            lines.push(format!("  cpu: {}", quote(c)));
        }
        if let Some(m) = &d.memory {
            lines.push(format!("  memory: {}", quote(m)));
        }
        if let Some(i) = &d.image {
            lines.push(format!("  image: {}", quote(i)));
        }
        block(format!("DEPLOY {} {{\n{}\n}}\n", d.agent, lines.join("\n")));
    }

    for t in policy.tests.iter() {
        let mut lines = vec![format!("  input: {}", quote(&t.input))];
        if !t.user_roles.is_empty() {
            lines.push(format!("  user_roles: {}", str_list(&t.user_roles)));
        }
        lines.push(format!(
            "  expect: {{ decision: {} }}",
            quote(&t.expected_decision)
        ));
        block(format!("TEST {} {{\n{}\n}}\n", t.name, lines.join("\n")));
    }

    for p in policy.plugins.values() {
        let mut attrs: Vec<(&String, &AttrValue)> = p.attrs.iter().collect();
        attrs.sort_by(|a, b| a.0.cmp(b.0));
        let lines: Vec<String> = attrs
            .iter()
            .map(|(k, v)| format!("  {}: {}", k, v.render()))
            .collect();
        if lines.is_empty() {
            block(format!("PLUGIN {} {{\n}}\n", p.name));
        } else {
            block(format!("PLUGIN {} {{\n{}\n}}\n", p.name, lines.join("\n")));
        }
    }

    out
}

fn canonical_tree(t: &DecisionTree) -> String {
    let mut lines = Vec::new();
    for (i, b) in t.branches.iter().enumerate() {
        let kw = if i == 0 { "IF" } else { "ELSE IF" };
        lines.push(format!(
            "  {} {} {{ BACKEND {} }}",
            kw,
            b.condition.render(),
            b.backend
        ));
    }
    if let Some(e) = &t.else_backend {
        lines.push(format!("  ELSE {{ BACKEND {} }}", e));
    }
    format!("DECISION_TREE {} {{\n{}\n}}\n", t.name, lines.join("\n"))
}

/// First 8 hex characters of the SHA-256 digest of the canonical text.
/// Stable across runs and platforms; sensitive to every semantic field and
/// insensitive to comments and whitespace.
pub fn compute_source_hash(policy: &Policy) -> SourceHash {
    SourceHash::from_canonical_text(&canonicalize(policy))
}

// --- Route synthesis ------------------------------------------------------

#[derive(Debug)]
pub struct RouteSynthesis {
    pub tree: Option<DecisionTree>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Synthesizes the `route_table` decision tree from ROUTE blocks: branches
/// sorted by priority descending (higher integer = higher priority), ties
/// broken by declaration order with a warning, ELSE from the global default
/// backend.
pub fn routes_to_tree(policy: &Policy) -> RouteSynthesis {
    let mut diagnostics = Vec::new();
    if policy.routes.is_empty() {
        return RouteSynthesis {
            tree: None,
            diagnostics,
        };
    }

    let default_backend = match &policy.global.default_backend {
        Some(b) => b.clone(),
        None => {
            let span = policy
                .global
                .span
                .clone()
                .unwrap_or_else(|| policy.routes[0].span.clone());
            diagnostics.push(Diagnostic::error(
                DiagCode::E050MissingDefaultBackend,
                "ROUTE blocks require a GLOBAL default_backend for the synthesized ELSE branch",
                span,
            ));
            return RouteSynthesis {
                tree: None,
                diagnostics,
            };
        }
    };

    let mut indexed: Vec<(usize, &Route)> = policy.routes.iter().enumerate().collect();
    // Stable sort keeps declaration order within equal priorities.
    indexed.sort_by(|a, b| b.1.priority.cmp(&a.1.priority));

    for window in indexed.windows(2) {
        if window[0].1.priority == window[1].1.priority {
            diagnostics.push(
                Diagnostic::warning(
                    DiagCode::W012RoutePriorityTie,
                    format!(
                        "routes `{}` and `{}` share priority {}; declaration order decides",
                        window[0].1.name, window[1].1.name, window[0].1.priority
                    ),
                    window[1].1.span.clone(),
                )
                .with_related(vec![window[0].1.span.clone()]),
            );
        }
    }

    let branches: Vec<Branch> = indexed
        .iter()
        .map(|(_, r)| Branch {
            condition: r.when.clone(),
            backend: r.model.clone(),
            span: r.span.clone(),
        })
        .collect();

    let span = policy.routes[0].span.clone();
    RouteSynthesis {
        tree: Some(DecisionTree {
            name: ROUTE_TABLE_TREE.to_string(),
            branches,
            else_backend: Some(default_backend),
            else_span: span.clone(),
            span,
        }),
        diagnostics,
    }
}
