//! Compile-time policy checks: referential integrity, exhaustiveness, dead
//! branch detection, group co-firing, and cross-artifact consistency.
//! Emission is refused on any error.
//!
//! Dead-branch analysis treats each distinct signal reference as an
//! independent boolean variable and enumerates all 2^n assignments with
//! bitset truth tables. Classifier and embedding references are free
//! booleans for reachability purposes, which is conservative: crisp logic is
//! never falsely reported dead. Embedding references additionally get a
//! note that geometric overlap is not checked at compile time (that would
//! require the embedding model during compilation).

use crate::ast::*;
use crate::diag::{DiagCode, Diagnostic, SourceSpan};
use crate::emit::openclaw::tools_allow_for_agent;
use indexmap::IndexMap;
use serde::Serialize;

/// Enumeration is refused above this many distinct references per tree.
pub const MAX_REACHABILITY_VARS: usize = 20;

/// Decidability class of a signal predicate: fully decidable, decidable
/// under embedding-space assumptions, or empirically testable only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecidabilityTier {
    Crisp,
    Geometric,
    Classifier,
}

pub fn classify_kind(kind: SignalKind) -> DecidabilityTier {
    match kind {
        SignalKind::Authz | SignalKind::Keyword => DecidabilityTier::Crisp,
        SignalKind::Embedding => DecidabilityTier::Geometric,
        SignalKind::Jailbreak | SignalKind::Pii | SignalKind::Complexity => {
            DecidabilityTier::Classifier
        }
    }
}

pub fn classify_signal(signal: &Signal) -> DecidabilityTier {
    classify_kind(signal.kind)
}

#[derive(Debug, Clone, Serialize)]
pub struct PassResult {
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl PassResult {
    fn from_diags(diagnostics: Vec<Diagnostic>) -> PassResult {
        PassResult {
            passed: crate::diag::no_errors(&diagnostics),
            diagnostics,
        }
    }

    fn skipped() -> PassResult {
        PassResult {
            passed: true,
            diagnostics: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub referential: PassResult,
    pub exhaustiveness: PassResult,
    pub dead_branch: PassResult,
    pub cofiring: PassResult,
    pub cross_artifact: PassResult,
    /// Decidability tier per declared signal.
    pub tiers: IndexMap<String, DecidabilityTier>,
}

impl VerificationReport {
    pub fn passes(&self) -> [(&'static str, &PassResult); 5] {
        [
            ("referential", &self.referential),
            ("exhaustiveness", &self.exhaustiveness),
            ("dead_branch", &self.dead_branch),
            ("cofiring", &self.cofiring),
            ("cross_artifact", &self.cross_artifact),
        ]
    }

    pub fn all_diagnostics(&self) -> Vec<&Diagnostic> {
        self.passes()
            .into_iter()
            .flat_map(|(_, p)| p.diagnostics.iter())
            .collect()
    }

    /// Overall pass iff no error-severity diagnostic in any pass.
    pub fn overall_pass(&self) -> bool {
        self.passes().into_iter().all(|(_, p)| p.passed)
    }

    pub fn error_count(&self) -> usize {
        self.all_diagnostics().iter().filter(|d| d.is_error()).count()
    }

    pub fn warning_count(&self) -> usize {
        self.all_diagnostics()
            .iter()
            .filter(|d| d.severity == crate::diag::Severity::Warning)
            .count()
    }
}

// --- bitset truth tables ---------------------------------------------------

/// Truth table over 2^n assignments, one bit per assignment.
struct TruthTable {
    blocks: Vec<u64>,
    bits: usize,
}

impl TruthTable {
    fn n_blocks(bits: usize) -> usize {
        bits.div_ceil(64)
    }

    fn last_mask(bits: usize) -> u64 {
        let rem = bits % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    fn all_true(bits: usize) -> TruthTable {
        let mut blocks = vec![u64::MAX; Self::n_blocks(bits)];
        if let Some(last) = blocks.last_mut() {
            *last = Self::last_mask(bits);
        }
        TruthTable { blocks, bits }
    }

    /// Table of variable `var`: bit p set iff assignment p has the variable
    /// true, i.e. `(p >> var) & 1 == 1`.
    fn var(bits: usize, var: usize) -> TruthTable {
        let mut blocks = vec![0u64; Self::n_blocks(bits)];
        if var < 6 {
            let mut pattern = 0u64;
            for b in 0..64 {
                if (b >> var) & 1 == 1 {
                    pattern |= 1u64 << b;
                }
            }
            for blk in blocks.iter_mut() {
                *blk = pattern;
            }
        } else {
            for (j, blk) in blocks.iter_mut().enumerate() {
                if (j >> (var - 6)) & 1 == 1 {
                    *blk = u64::MAX;
                }
            }
        }
        if let Some(last) = blocks.last_mut() {
            *last &= Self::last_mask(bits);
        }
        TruthTable { blocks, bits }
    }

    fn and(&self, other: &TruthTable) -> TruthTable {
        TruthTable {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a & b)
                .collect(),
            bits: self.bits,
        }
    }

    fn or(&self, other: &TruthTable) -> TruthTable {
        TruthTable {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a | b)
                .collect(),
            bits: self.bits,
        }
    }

    fn not(&self) -> TruthTable {
        let mut blocks: Vec<u64> = self.blocks.iter().map(|a| !a).collect();
        if let Some(last) = blocks.last_mut() {
            *last &= Self::last_mask(self.bits);
        }
        TruthTable {
            blocks,
            bits: self.bits,
        }
    }

    fn and_not_in_place(&mut self, other: &TruthTable) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    fn any(&self) -> bool {
        self.blocks.iter().any(|b| *b != 0)
    }
}

fn cond_table(
    cond: &ConditionExpr,
    vars: &IndexMap<(SignalKind, String), usize>,
    bits: usize,
) -> TruthTable {
    match cond {
        ConditionExpr::SignalRef { kind, name, .. } => {
            let var = vars[&(*kind, name.clone())];
            TruthTable::var(bits, var)
        }
        ConditionExpr::And(l, r) => cond_table(l, vars, bits).and(&cond_table(r, vars, bits)),
        ConditionExpr::Or(l, r) => cond_table(l, vars, bits).or(&cond_table(r, vars, bits)),
        ConditionExpr::Not(c) => cond_table(c, vars, bits).not(),
    }
}

/// Distinct references of a tree in order of first appearance.
pub fn distinct_refs(tree: &DecisionTree) -> IndexMap<(SignalKind, String), usize> {
    let mut vars = IndexMap::new();
    for branch in &tree.branches {
        for (kind, name, _) in branch.condition.refs() {
            let key = (*kind, name.to_string());
            let next = vars.len();
            vars.entry(key).or_insert(next);
        }
    }
    vars
}

// --- passes -----------------------------------------------------------------

/// Exhaustiveness: with the mandatory ELSE present, every input reaches
/// exactly one leaf by construction; its absence is the only failure mode.
pub fn check_exhaustiveness(tree: &DecisionTree) -> Vec<Diagnostic> {
    match tree.else_backend {
        Some(_) => Vec::new(),
        None => vec![Diagnostic::error(
            DiagCode::E010MissingElse,
            format!("decision tree `{}` lacks a final ELSE branch", tree.name),
            tree.span.clone(),
        )],
    }
}

/// Flags branches unreachable under every boolean assignment of the tree's
/// distinct references, with the shadowing earlier branches attached.
pub fn check_dead_branches(tree: &DecisionTree, _policy: &Policy) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let vars = distinct_refs(tree);
    let n = vars.len();
    if n > MAX_REACHABILITY_VARS {
        diags.push(Diagnostic::error(
            DiagCode::E021TooManyVariables,
            format!(
                "tree `{}` has {} distinct signal references; reachability enumeration is limited to {}",
                tree.name, n, MAX_REACHABILITY_VARS
            ),
            tree.span.clone(),
        ));
        return diags;
    }

    let geometric: Vec<&String> = vars
        .keys()
        .filter(|(kind, _)| *kind == SignalKind::Embedding)
        .map(|(_, name)| name)
        .collect();
    if !geometric.is_empty() {
        diags.push(Diagnostic::note(
            DiagCode::W050GeometricUnchecked,
            format!(
                "tree `{}` references embedding signal(s) {}; geometric overlap is not analyzed at compile time, references are treated as free booleans",
                tree.name,
                geometric
                    .iter()
                    .map(|n| format!("`{}`", n))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            tree.span.clone(),
        ));
    }

    let bits = 1usize << n;
    let tables: Vec<TruthTable> = tree
        .branches
        .iter()
        .map(|b| cond_table(&b.condition, &vars, bits))
        .collect();

    let mut remaining = TruthTable::all_true(bits);
    for (i, table) in tables.iter().enumerate() {
        let reachable = table.and(&remaining);
        if !reachable.any() {
            let mut shadowers = Vec::new();
            for j in 0..i {
                // Is branch i reachable once branch j stops capturing?
                let mut without_j = TruthTable::all_true(bits);
                for (k, earlier) in tables.iter().enumerate().take(i) {
                    if k != j {
                        without_j.and_not_in_place(earlier);
                    }
                }
                if table.and(&without_j).any() {
                    shadowers.push(tree.branches[j].span.clone());
                }
            }
            if shadowers.is_empty() {
                shadowers = tree.branches[..i].iter().map(|b| b.span.clone()).collect();
            }
            diags.push(
                Diagnostic::warning(
                    DiagCode::W020ShadowedBranch,
                    format!(
                        "branch {} of tree `{}` is shadowed: no assignment reaches it past the earlier branches",
                        i + 1,
                        tree.name
                    ),
                    tree.branches[i].span.clone(),
                )
                .with_related(shadowers),
            );
        }
        remaining.and_not_in_place(table);
    }
    diags
}

/// Group firing gate must be strictly above 1/k; warns on missing
/// tie-breaking and on temperatures that weaken softmax separation.
pub fn check_group_cofiring(group: &SignalGroup, _policy: &Policy) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let k = group.size().max(1);
    if let Some(t) = group.firing_threshold {
        if t <= 1.0 / k as f64 {
            diags.push(Diagnostic::error(
                DiagCode::E030ThresholdTooLow,
                format!(
                    "group `{}` firing threshold {} does not exceed 1/k = {:.4}; at-most-one firing is not guaranteed",
                    group.name,
                    two_dec(t),
                    1.0 / k as f64
                ),
                group.span.clone(),
            ));
        }
    }
    if group.tie_break == TieBreak::None {
        diags.push(Diagnostic::warning(
            DiagCode::W010GroupTie,
            format!(
                "group `{}` (size {}) has no tie-breaking strategy; tied raw scores fall through to the default branch",
                group.name, k
            ),
            group.span.clone(),
        ));
    }
    if group.temperature > 1.0 {
        diags.push(Diagnostic::warning(
            DiagCode::W011HighTemperature,
            format!(
                "group `{}` temperature {} exceeds 1.0; softmax separation weakens as the temperature grows",
                group.name,
                two_dec(group.temperature)
            ),
            group.span.clone(),
        ));
    }
    diags
}

fn check_condition_refs(cond: &ConditionExpr, policy: &Policy, diags: &mut Vec<Diagnostic>) {
    for (kind, name, span) in cond.refs() {
        match policy.signals.get(name) {
            None => diags.push(Diagnostic::error(
                DiagCode::E001UndefinedSignal,
                format!("signal `{}` is not declared", name),
                span.clone(),
            )),
            Some(signal) if signal.kind != *kind => diags.push(
                Diagnostic::error(
                    DiagCode::E002KindMismatch,
                    format!(
                        "signal `{}` is declared {} but referenced as {}",
                        name, signal.kind, kind
                    ),
                    span.clone(),
                )
                .with_related(vec![signal.span.clone()]),
            ),
            Some(_) => {}
        }
    }
}

fn check_backend_ref(name: &str, span: &SourceSpan, policy: &Policy, diags: &mut Vec<Diagnostic>) {
    if !policy.backend_exists(name) {
        diags.push(Diagnostic::error(
            DiagCode::E003UndefinedBackend,
            format!(
                "backend `{}` is neither declared nor one of the built-ins (allow, deny)",
                name
            ),
            span.clone(),
        ));
    }
}

fn check_tree_refs(tree: &DecisionTree, policy: &Policy, diags: &mut Vec<Diagnostic>) {
    for branch in &tree.branches {
        check_condition_refs(&branch.condition, policy, diags);
        check_backend_ref(&branch.backend, &branch.span, policy, diags);
    }
    if let Some(e) = &tree.else_backend {
        check_backend_ref(e, &tree.else_span, policy, diags);
    }
}

/// Every reference resolves: signal refs to a declared signal of matching
/// kind, backends to declared or built-in backends, group members to
/// embedding signals, test expectations to backends.
pub fn check_referential_integrity(policy: &Policy) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    for tree in policy.decision_trees.values() {
        check_tree_refs(tree, policy, &mut diags);
    }

    for group in policy.signal_groups.values() {
        for (member, span) in group.members.iter().zip(&group.member_spans) {
            match policy.signals.get(member) {
                None => diags.push(Diagnostic::error(
                    DiagCode::E001UndefinedSignal,
                    format!("group member `{}` is not a declared signal", member),
                    span.clone(),
                )),
                Some(signal) if signal.kind != SignalKind::Embedding => diags.push(
                    Diagnostic::error(
                        DiagCode::E002KindMismatch,
                        format!(
                            "group member `{}` must be an embedding signal, found {}",
                            member, signal.kind
                        ),
                        span.clone(),
                    )
                    .with_related(vec![signal.span.clone()]),
                ),
                Some(_) => {}
            }
        }
    }

    for route in &policy.routes {
        check_condition_refs(&route.when, policy, &mut diags);
        check_backend_ref(&route.model, &route.span, policy, &mut diags);
    }

    for test in &policy.tests {
        check_backend_ref(&test.expected_decision, &test.span, policy, &mut diags);
    }

    if let Some(default) = &policy.global.default_backend {
        let span = policy
            .global
            .span
            .clone()
            .unwrap_or_else(SourceSpan::synthetic);
        check_backend_ref(default, &span, policy, &mut diags);
    }

    diags
}

/// Cross-artifact consistency: agent skills must resolve to network
/// endpoints, resolved skills must surface in the generated tool allow set,
/// signal models imply registry egress, backend targets must be nonempty.
pub fn check_cross_artifact(policy: &Policy) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let skills: IndexMap<&str, &NetworkEndpoint> = policy
        .networks
        .values()
        .map(|n| (n.skill.as_str(), n))
        .collect();

    for agent in policy.agents.values() {
        let allow = tools_allow_for_agent(agent);
        for skill in &agent.skills {
            match skills.get(skill.as_str()) {
                None => diags.push(Diagnostic::error(
                    DiagCode::E040SkillWithoutEndpoint,
                    format!(
                        "agent `{}` uses skill `{}` but no NETWORK endpoint declares it",
                        agent.id, skill
                    ),
                    agent.span.clone(),
                )),
                Some(endpoint) => {
                    let tool = format!("skill:{}", skill);
                    if !allow.contains(&tool) {
                        diags.push(
                            Diagnostic::error(
                                DiagCode::E041EndpointUnreachableTool,
                                format!(
                                    "endpoint `{}` (skill `{}`) is not reachable through agent `{}`'s tool allow list",
                                    endpoint.name, skill, agent.id
                                ),
                                agent.span.clone(),
                            )
                            .with_related(vec![endpoint.span.clone()]),
                        );
                    }
                }
            }
        }
    }

    let modeled: Vec<&Signal> = policy.signals.values().filter(|s| s.model.is_some()).collect();
    if let Some(first) = modeled.first() {
        diags.push(Diagnostic::note(
            DiagCode::W042ModelEgressImplied,
            format!(
                "signal evaluation models require model-registry egress: {}",
                modeled
                    .iter()
                    .map(|s| format!("`{}`", s.name))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            first.span.clone(),
        ));
    }

    for backend in policy.backends.values() {
        if backend.target.is_empty() {
            diags.push(Diagnostic::error(
                DiagCode::E043EmptyBackendTarget,
                format!("backend `{}` has an empty target", backend.name),
                backend.span.clone(),
            ));
        }
    }

    diags
}

/// Runs every pass over the policy, including the synthesized route table.
/// Hash consistency (the fifth cross-target check) is enforced structurally
/// by emission: one hash is computed once and stamped into every artifact,
/// and bundle assembly asserts its presence in each file.
pub fn verify(policy: &Policy) -> VerificationReport {
    let synthesis = routes_to_tree(policy);
    let mut effective: Vec<&DecisionTree> = policy.decision_trees.values().collect();
    if let Some(tree) = &synthesis.tree {
        effective.push(tree);
    }

    let mut referential = check_referential_integrity(policy);
    referential.extend(synthesis.diagnostics.iter().cloned());
    if let Some(tree) = &synthesis.tree {
        check_tree_refs(tree, policy, &mut referential);
    }
    let referential = PassResult::from_diags(referential);

    let exhaustiveness = PassResult::from_diags(
        effective
            .iter()
            .flat_map(|t| check_exhaustiveness(t))
            .collect(),
    );

    // Reachability relies on references resolving; skip it when they do not.
    let dead_branch = if referential.passed {
        PassResult::from_diags(
            effective
                .iter()
                .flat_map(|t| check_dead_branches(t, policy))
                .collect(),
        )
    } else {
        PassResult::skipped()
    };

    let cofiring = PassResult::from_diags(
        policy
            .signal_groups
            .values()
            .flat_map(|g| check_group_cofiring(g, policy))
            .collect(),
    );

    let cross_artifact = PassResult::from_diags(check_cross_artifact(policy));

    let tiers = policy
        .signals
        .values()
        .map(|s| (s.name.clone(), classify_signal(s)))
        .collect();

    VerificationReport {
        referential,
        exhaustiveness,
        dead_branch,
        cofiring,
        cross_artifact,
        tiers,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;

    fn tree_src(body: &str) -> Policy {
        let src = format!(
            r#"
SIGNAL authz a {{ role: "r" }}
SIGNAL authz b {{ role: "r" }}
SIGNAL authz c {{ role: "r" }}
DECISION_TREE t {{
{body}
}}
"#
        );
        parse(&src, "test.sr").expect("parse")
    }

    #[test]
    fn classification_follows_the_kind_table() {
        assert_eq!(classify_kind(SignalKind::Authz), DecidabilityTier::Crisp);
        assert_eq!(classify_kind(SignalKind::Keyword), DecidabilityTier::Crisp);
        assert_eq!(
            classify_kind(SignalKind::Embedding),
            DecidabilityTier::Geometric
        );
        assert_eq!(
            classify_kind(SignalKind::Jailbreak),
            DecidabilityTier::Classifier
        );
        assert_eq!(classify_kind(SignalKind::Pii), DecidabilityTier::Classifier);
        assert_eq!(
            classify_kind(SignalKind::Complexity),
            DecidabilityTier::Classifier
        );
    }

    #[test]
    fn subset_branch_behind_superset_is_shadowed() {
        let policy = tree_src(
            r#"  IF authz("a") { BACKEND deny }
  ELSE IF authz("a") AND authz("b") { BACKEND allow }
  ELSE { BACKEND deny }"#,
        );
        let diags = check_dead_branches(&policy.decision_trees["t"], &policy);
        let shadowed: Vec<_> = diags
            .iter()
            .filter(|d| d.code == DiagCode::W020ShadowedBranch)
            .collect();
        assert_eq!(shadowed.len(), 1);
        // The shadowing set names branch 1.
        assert_eq!(shadowed[0].related.len(), 1);
    }

    #[test]
    fn single_branch_tree_has_no_dead_branches() {
        let policy = tree_src(
            r#"  IF authz("a") { BACKEND allow }
  ELSE { BACKEND deny }"#,
        );
        let diags = check_dead_branches(&policy.decision_trees["t"], &policy);
        assert!(diags.iter().all(|d| d.code != DiagCode::W020ShadowedBranch));
    }

    #[test]
    fn disjoint_branches_are_all_reachable() {
        let policy = tree_src(
            r#"  IF authz("a") { BACKEND deny }
  ELSE IF authz("b") { BACKEND allow }
  ELSE IF authz("c") AND NOT authz("a") { BACKEND allow }
  ELSE { BACKEND deny }"#,
        );
        let diags = check_dead_branches(&policy.decision_trees["t"], &policy);
        assert!(diags.iter().all(|d| d.code != DiagCode::W020ShadowedBranch));
    }

    #[test]
    fn too_many_variables_is_refused() {
        let mut policy = Policy::new();
        let mut branches = Vec::new();
        let mut cond = ConditionExpr::signal_ref(SignalKind::Authz, "s0");
        for i in 1..=MAX_REACHABILITY_VARS {
            cond = ConditionExpr::And(
                Box::new(cond),
                Box::new(ConditionExpr::signal_ref(SignalKind::Authz, format!("s{i}"))),
            );
        }
        branches.push(Branch {
            condition: cond,
            backend: "allow".into(),
            span: SourceSpan::synthetic(),
        });
        let tree = DecisionTree {
            name: "big".into(),
            branches,
            else_backend: Some("deny".into()),
            else_span: SourceSpan::synthetic(),
            span: SourceSpan::synthetic(),
        };
        let diags = check_dead_branches(&tree, &mut policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E021TooManyVariables));
    }

    #[test]
    fn kind_mismatch_is_detected() {
        let src = r#"
SIGNAL jailbreak jb_guard { threshold: 0.50, model: "m" }
DECISION_TREE t {
  IF pii("jb_guard") { BACKEND deny }
  ELSE { BACKEND allow }
}
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_referential_integrity(&policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E002KindMismatch));
    }

    #[test]
    fn undefined_signal_is_detected() {
        let src = r#"
DECISION_TREE t {
  IF pii("ghost") { BACKEND deny }
  ELSE { BACKEND allow }
}
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_referential_integrity(&policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E001UndefinedSignal));
    }

    #[test]
    fn group_firing_threshold_at_or_below_1_over_k_is_an_error() {
        let src = r#"
SIGNAL embedding e1 { threshold: 0.70, model: "m", candidates: ["x"] }
SIGNAL embedding e2 { threshold: 0.70, model: "m", candidates: ["y"] }
SIGNAL_GROUP g { signals: [e1, e2], temperature: 0.1, firing_threshold: 0.40 }
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_group_cofiring(&policy.signal_groups["g"], &policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E030ThresholdTooLow));
    }

    #[test]
    fn tie_break_priority_order_suppresses_the_tie_warning() {
        let src = r#"
SIGNAL embedding e1 { threshold: 0.70, model: "m", candidates: ["x"] }
SIGNAL embedding e2 { threshold: 0.70, model: "m", candidates: ["y"] }
SIGNAL_GROUP g { signals: [e1, e2], temperature: 0.1, tie_break: priority_order }
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_group_cofiring(&policy.signal_groups["g"], &policy);
        assert!(diags.iter().all(|d| d.code != DiagCode::W010GroupTie));
    }

    #[test]
    fn high_temperature_warns() {
        let src = r#"
SIGNAL embedding e1 { threshold: 0.70, model: "m", candidates: ["x"] }
SIGNAL embedding e2 { threshold: 0.70, model: "m", candidates: ["y"] }
SIGNAL_GROUP g { signals: [e1, e2], temperature: 1.50 }
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_group_cofiring(&policy.signal_groups["g"], &policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::W011HighTemperature));
    }

    #[test]
    fn skill_without_endpoint_is_an_error() {
        let src = r#"
AGENT helper { model: "m", skills: ["jira"], sandbox_mode: "all" }
"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_cross_artifact(&policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E040SkillWithoutEndpoint));
    }

    #[test]
    fn no_agents_passes_vacuously() {
        let policy = parse("", "test.sr").expect("parse");
        let diags = check_cross_artifact(&policy);
        assert!(crate::diag::no_errors(&diags));
    }

    #[test]
    fn empty_backend_target_is_an_error() {
        let src = r#"BACKEND b { kind: "action" }"#;
        let policy = parse(src, "test.sr").expect("parse");
        let diags = check_cross_artifact(&policy);
        assert!(diags.iter().any(|d| d.code == DiagCode::E043EmptyBackendTarget));
    }

    #[test]
    fn adding_an_error_never_flips_overall_to_pass() {
        let src = r#"
SIGNAL jailbreak jb { threshold: 0.50, model: "m" }
DECISION_TREE t {
  IF jailbreak("jb") { BACKEND deny }
  ELSE { BACKEND allow }
}
"#;
        let mut policy = parse(src, "test.sr").expect("parse");
        assert!(verify(&policy).overall_pass());
        policy.tests.push(TestCase {
            name: "bad".into(),
            input: "x".into(),
            user_roles: Vec::new(),
            expected_decision: "nonexistent_backend".into(),
            span: SourceSpan::synthetic(),
        });
        assert!(!verify(&policy).overall_pass());
    }
}
