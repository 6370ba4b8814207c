//! Acceptance gate: one test per release criterion, each printing a
//! PASS/FAIL line. `cargo test -p sr-policy --test acceptance -- --nocapture`
//! shows the full checklist.

use indexmap::IndexMap;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sr_policy::ast::*;
use sr_policy::diag::{DiagCode, Severity, SourceSpan};
use sr_policy::emit::{emit_all, ArtifactKind, EmissionTarget, EmitOptions};
use sr_policy::normalize::{group_fire, softmax, ScoreVector};
use sr_policy::parser::parse;
use sr_policy::runtime::evaluators::{default_registry, ConstantEvaluator};
use sr_policy::runtime::trace::{entry_digest, TraceLog, TraceValue};
use sr_policy::runtime::{
    evaluate_signals, route, run_tests, Clock, EvaluationContext, SignalScoreMap,
};
use sr_policy::verify::{check_dead_branches, verify};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

fn multi_gate() -> Policy {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../policies/multi_gate.sr");
    let source = std::fs::read_to_string(path).expect("read multi_gate.sr");
    parse(&source, "multi_gate.sr").expect("multi_gate.sr parses")
}

fn report(criterion: usize, description: &str) {
    println!("ACCEPTANCE {criterion}: PASS — {description}");
}

/// Criterion 1: softmax reproduces the worked normalization of raw scores
/// (0.7465, 0.1113) at τ = 0.1 to (0.9983, 0.0017) within 1e-3.
#[test]
fn criterion_1_softmax_reproduction() {
    let start = Instant::now();
    let raw = ScoreVector::new(vec![
        ("jira_intent".into(), 0.7465),
        ("slack_intent".into(), 0.1113),
    ]);
    let norm = softmax(&raw, 0.1);
    let jira = norm.get("jira_intent").unwrap();
    let slack = norm.get("slack_intent").unwrap();
    assert!((jira - 0.9983).abs() <= 1e-3, "jira normalized = {jira}");
    assert!((slack - 0.0017).abs() <= 1e-3, "slack normalized = {slack}");
    assert!(start.elapsed().as_millis() < 100);
    report(1, "softmax (0.7465, 0.1113) @ τ=0.1 → (0.9983, 0.0017) ± 1e-3");
}

/// Criterion 2: the multi-gate policy parses, verifies with exactly the
/// group-tie warning class, builds every target with one embedded hash, and
/// every structured artifact parses under a strict format parser — in < 5 s.
#[test]
fn criterion_2_end_to_end_multi_gate() {
    let start = Instant::now();
    let policy = multi_gate();

    let report_v = verify(&policy);
    assert!(report_v.overall_pass());
    let warning_codes: Vec<DiagCode> = report_v
        .all_diagnostics()
        .into_iter()
        .filter(|d| d.severity == Severity::Warning)
        .map(|d| d.code)
        .collect();
    assert_eq!(warning_codes, vec![DiagCode::W010GroupTie], "{warning_codes:?}");

    let bundle = emit_all(&policy, &EmissionTarget::all(), EmitOptions::default()).unwrap();
    assert!(bundle.entries.len() >= 9, "only {} files", bundle.entries.len());

    let hash = bundle.source_hash.as_str();
    assert_eq!(hash.len(), 8);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    for entry in &bundle.entries {
        assert!(entry.content.contains(hash), "{} lacks hash token", entry.path);
        match entry.kind {
            ArtifactKind::Yaml => {
                serde_yaml::from_str::<serde_yaml::Value>(&entry.content)
                    .unwrap_or_else(|e| panic!("{} is not strict YAML: {e}", entry.path));
            }
            ArtifactKind::Json => {
                serde_json::from_str::<serde_json::Value>(&entry.content)
                    .unwrap_or_else(|e| panic!("{} is not strict JSON: {e}", entry.path));
            }
            ArtifactKind::Xml => {
                roxmltree::Document::parse(&entry.content)
                    .unwrap_or_else(|e| panic!("{} is not well-formed XML: {e}", entry.path));
            }
            ArtifactKind::Yang | ArtifactKind::PythonText | ArtifactKind::TypescriptText => {}
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    report(
        2,
        "parse + verify (exactly W010) + build all targets, one hash, strict parsers, < 5 s",
    );
}

/// Criterion 3: TEST blocks reproduce their expected decisions with the
/// shipped mocks, and pinning the worked raw scores yields the allow_jira
/// trace at branch_idx 3 with the `0.7465 > 0.70` crossing.
#[test]
fn criterion_3_test_block_fidelity() {
    let policy = multi_gate();
    let results = run_tests(&policy, &default_registry(), &Clock::Fixed(1.0)).unwrap();
    assert!(results.all_passed(), "{results:#?}");
    assert_eq!(results.cases[0].name, "safe_jira");
    assert_eq!(results.cases[0].actual, "allow_jira");
    assert_eq!(results.cases[1].name, "jailbreak_blocked");
    assert_eq!(results.cases[1].actual, "deny");

    let mut pinned = default_registry();
    pinned.register_name("jb_guard", Arc::new(ConstantEvaluator(0.0)));
    pinned.register_name("pii_detector", Arc::new(ConstantEvaluator(0.0)));
    pinned.register_name("jira_intent", Arc::new(ConstantEvaluator(0.7465)));
    pinned.register_name("slack_intent", Arc::new(ConstantEvaluator(0.1113)));
    pinned.register_name("needs_reasoning", Arc::new(ConstantEvaluator(0.0)));
    let ctx = EvaluationContext::with_roles(vec!["jira-contributor".into()]);
    let scores = evaluate_signals(&policy, "pinned", &ctx, &pinned).unwrap();
    let tree = &policy.decision_trees["outbound_gate"];
    let (decision, entry) = route(tree, &scores, &policy, None, &Clock::Fixed(1.0)).unwrap();
    assert_eq!(decision.backend, "allow_jira");
    assert_eq!(decision.branch_idx, 3);
    assert_eq!(
        entry.thresholds_crossed.get("jira_intent_raw").map(String::as_str),
        Some("0.7465 > 0.70")
    );
    report(3, "safe_jira → allow_jira (branch_idx 3, \"0.7465 > 0.70\"); jailbreak_blocked → deny");
}

// --- random crisp trees for criterion 4 ---------------------------------------

fn random_condition(rng: &mut StdRng, names: &[String], depth: usize) -> ConditionExpr {
    if depth == 0 || rng.gen_bool(0.4) {
        let name = names[rng.gen_range(0..names.len())].clone();
        return ConditionExpr::signal_ref(SignalKind::Authz, name);
    }
    match rng.gen_range(0..3) {
        0 => ConditionExpr::And(
            Box::new(random_condition(rng, names, depth - 1)),
            Box::new(random_condition(rng, names, depth - 1)),
        ),
        1 => ConditionExpr::Or(
            Box::new(random_condition(rng, names, depth - 1)),
            Box::new(random_condition(rng, names, depth - 1)),
        ),
        _ => ConditionExpr::Not(Box::new(random_condition(rng, names, depth - 1))),
    }
}

fn random_crisp_tree(rng: &mut StdRng) -> (Policy, DecisionTree) {
    let n = rng.gen_range(1..=10usize);
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut policy = Policy::new();
    for name in &names {
        policy.signals.insert(
            name.clone(),
            Signal {
                name: name.clone(),
                kind: SignalKind::Authz,
                threshold: None,
                model: None,
                candidates: Vec::new(),
                pii_types_allowed: Vec::new(),
                subjects: Vec::new(),
                role: Some("r".into()),
                span: SourceSpan::synthetic(),
            },
        );
    }
    let n_branches = rng.gen_range(1..=5usize);
    let branches = (0..n_branches)
        .map(|i| Branch {
            condition: random_condition(rng, &names, 3),
            backend: format!("b{i}"),
            span: SourceSpan::new("t.sr", i as u32 + 1, 1, i as u32 + 1, 2),
        })
        .collect();
    let tree = DecisionTree {
        name: "t".into(),
        branches,
        else_backend: Some("fallthrough".into()),
        else_span: SourceSpan::synthetic(),
        span: SourceSpan::synthetic(),
    };
    (policy, tree)
}

fn oracle_eval(cond: &ConditionExpr, bits: u32, index: &IndexMap<String, usize>) -> bool {
    match cond {
        ConditionExpr::SignalRef { name, .. } => (bits >> index[name]) & 1 == 1,
        ConditionExpr::And(l, r) => oracle_eval(l, bits, index) && oracle_eval(r, bits, index),
        ConditionExpr::Or(l, r) => oracle_eval(l, bits, index) || oracle_eval(r, bits, index),
        ConditionExpr::Not(c) => !oracle_eval(c, bits, index),
    }
}

/// Criterion 4: over ≥ 100 random crisp-only trees (≤ 10 refs), every one
/// of the 2^n assignments selects exactly one branch, and verifier shadow
/// flags agree exactly with brute-force reachability.
#[test]
fn criterion_4_oracle_exhaustiveness() {
    let mut rng = StdRng::seed_from_u64(0x5eed_cafe);
    let n_trees = 120;
    for trial in 0..n_trees {
        let (policy, tree) = random_crisp_tree(&mut rng);
        let index: IndexMap<String, usize> = policy
            .signals
            .keys()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let n = index.len();
        let mut reachable = vec![false; tree.branches.len()];

        for bits in 0u32..(1u32 << n) {
            let holding: Vec<usize> = tree
                .branches
                .iter()
                .enumerate()
                .filter(|(_, b)| oracle_eval(&b.condition, bits, &index))
                .map(|(i, _)| i)
                .collect();
            // Exactly one leaf: the first holding branch, or ELSE.
            let expected = holding.first().copied().unwrap_or(tree.branches.len());
            if expected < tree.branches.len() {
                reachable[expected] = true;
            }

            let entries = index
                .iter()
                .map(|(name, i)| (name.clone(), TraceValue::Flag((bits >> i) & 1 == 1)))
                .collect();
            let scores = SignalScoreMap::from_entries(entries);
            let (decision, _) = route(&tree, &scores, &policy, None, &Clock::Fixed(0.0)).unwrap();
            assert_eq!(
                decision.branch_idx, expected,
                "trial {trial}: interpreter disagrees with the oracle"
            );
        }

        let flagged: Vec<usize> = check_dead_branches(&tree, &policy)
            .into_iter()
            .filter(|d| d.code == DiagCode::W020ShadowedBranch)
            .map(|d| d.span.start_line as usize - 1)
            .collect();
        for (i, is_reachable) in reachable.iter().enumerate() {
            assert_eq!(
                !*is_reachable,
                flagged.contains(&i),
                "trial {trial}: shadow flag mismatch on branch {i}"
            );
        }
    }
    report(4, "120 random crisp trees: exactly-one-leaf + shadow flags match brute force");
}

/// Criterion 5: over random score vectors (k ≤ 8, τ ∈ {0.01, 0.1, 1.0}),
/// group_fire returns at most one name, exact ties with no tie-breaking
/// return none, and normalized outputs sum to 1 ± 1e-9.
#[test]
fn criterion_5_at_most_one_firing() {
    let mut rng = StdRng::seed_from_u64(0xf1a9);
    for trial in 0..2000 {
        let k = rng.gen_range(2..=8usize);
        let tau = [0.01, 0.1, 1.0][rng.gen_range(0..3)];
        let values: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let vector = ScoreVector::new(
            values
                .iter()
                .enumerate()
                .map(|(i, v)| (format!("m{i}"), *v))
                .collect(),
        );
        let group = SignalGroup {
            name: "g".into(),
            members: (0..k).map(|i| format!("m{i}")).collect(),
            member_spans: (0..k).map(|_| SourceSpan::synthetic()).collect(),
            temperature: tau,
            firing_threshold: None,
            tie_break: if rng.gen_bool(0.5) {
                TieBreak::None
            } else {
                TieBreak::PriorityOrder
            },
            span: SourceSpan::synthetic(),
        };
        let thresholds: IndexMap<String, f64> = (0..k)
            .map(|i| (format!("m{i}"), rng.gen_range(0.0..=1.0)))
            .collect();

        let norm = softmax(&vector, tau);
        let sum: f64 = norm.entries.iter().map(|(_, v)| v).sum();
        assert!((sum - 1.0).abs() <= 1e-9, "trial {trial}: sum = {sum}");

        let fired = group_fire(&group, &vector, &thresholds).unwrap();
        let hits = group
            .members
            .iter()
            .filter(|m| fired.as_deref() == Some(m.as_str()))
            .count();
        assert!(hits <= 1, "trial {trial}");
    }

    // Exact ties, tie_break = none → nothing fires, at every k and τ.
    for k in 2..=8usize {
        for tau in [0.01, 0.1, 1.0] {
            let group = SignalGroup {
                name: "g".into(),
                members: (0..k).map(|i| format!("m{i}")).collect(),
                member_spans: (0..k).map(|_| SourceSpan::synthetic()).collect(),
                temperature: tau,
                firing_threshold: None,
                tie_break: TieBreak::None,
                span: SourceSpan::synthetic(),
            };
            let vector = ScoreVector::new((0..k).map(|i| (format!("m{i}"), 0.6)).collect());
            let thresholds: IndexMap<String, f64> =
                (0..k).map(|i| (format!("m{i}"), 0.0)).collect();
            assert_eq!(group_fire(&group, &vector, &thresholds).unwrap(), None);
        }
    }
    report(5, "2000 random vectors: ≤ 1 fires, ties fall through, Σ = 1 ± 1e-9");
}

fn extract_jb_threshold_tokens(
    entries: &[sr_policy::emit::ArtifactEntry],
) -> Vec<(String, String)> {
    let patterns = [
        // routing yaml + configmap/gates JSON blocks keyed by signal name
        regex::Regex::new(
            r#"(?s)jb_guard"?:\s*\{?\s*\n?\s*"?kind"?: "jailbreak",?\s*\n\s*"?threshold"?: ([0-9.]+)"#,
        )
        .unwrap(),
        // generated python comparisons
        regex::Regex::new(r#"s\["jb_guard"\] > ([0-9.]+)"#).unwrap(),
        // gateway hook comparisons
        regex::Regex::new(r#"jb_guard_score > ([0-9.]+)"#).unwrap(),
        // send-policy entries
        regex::Regex::new(r#""signal": "jb_guard",\s*\n\s*"threshold": ([0-9.]+)"#).unwrap(),
        // NETCONF instance data
        regex::Regex::new(
            r#"<name>jb-guard</name>\s*\n\s*<kind>vsr:jailbreak</kind>\s*\n\s*<threshold>([0-9.]+)</threshold>"#,
        )
        .unwrap(),
    ];
    let mut found = Vec::new();
    for entry in entries {
        for pattern in &patterns {
            for caps in pattern.captures_iter(&entry.content) {
                found.push((entry.path.clone(), caps[1].to_string()));
            }
        }
    }
    found
}

/// Criterion 6: the jb_guard threshold string is identical in every artifact
/// that renders it; retuning the DSL threshold moves every one of them and
/// the source hash.
#[test]
fn criterion_6_anti_drift() {
    let source = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../policies/multi_gate.sr"),
    )
    .unwrap();
    let policy = parse(&source, "multi_gate.sr").unwrap();
    let bundle = emit_all(&policy, &EmissionTarget::all(), EmitOptions::default()).unwrap();
    let tokens = extract_jb_threshold_tokens(&bundle.entries);
    assert!(tokens.len() >= 8, "only extracted from {} places: {tokens:?}", tokens.len());
    for (path, token) in &tokens {
        assert_eq!(token, "0.50", "{path} renders {token}");
    }

    let retuned_source = source.replace(
        "threshold: 0.50\n  model: \"mmbert32k-jailbreak-detector\"",
        "threshold: 0.75\n  model: \"mmbert32k-jailbreak-detector\"",
    );
    assert_ne!(source, retuned_source);
    let retuned = parse(&retuned_source, "multi_gate.sr").unwrap();
    let retuned_bundle = emit_all(&retuned, &EmissionTarget::all(), EmitOptions::default()).unwrap();
    assert_ne!(bundle.source_hash, retuned_bundle.source_hash);
    let retuned_tokens = extract_jb_threshold_tokens(&retuned_bundle.entries);
    assert_eq!(retuned_tokens.len(), tokens.len());
    for (path, token) in &retuned_tokens {
        assert_eq!(token, "0.75", "{path} renders {token}");
    }
    report(6, "jb_guard threshold identical across artifacts; 0.50 → 0.75 moves all + hash");
}

/// Criterion 7: in a 10-entry chained log, flipping a byte in any earlier
/// entry is detected at the correct break index — exhaustively per entry,
/// through the persisted NDJSON form.
#[test]
fn criterion_7_tamper_detection() {
    let mut log = TraceLog::new();
    for i in 0..10usize {
        let mut signals = IndexMap::new();
        signals.insert("jb_guard".to_string(), TraceValue::Score(0.01 * i as f64));
        let entry = sr_policy::runtime::trace::AuditTraceEntry {
            ts: 1_700_000_000.0 + i as f64,
            policy_version: "v1".into(),
            source_hash: "deadbeef".into(),
            tree: "t".into(),
            branch: "allow".into(),
            branch_idx: 0,
            signals,
            thresholds_crossed: IndexMap::new(),
            prev_hash: log.last().map(entry_digest),
        };
        log.append(entry).unwrap();
    }
    let ndjson = log.to_ndjson();
    assert!(log.verify_chain().valid);

    // Flip one timestamp digit in each earlier entry: detected at i + 1.
    for i in 0..9usize {
        let mut lines: Vec<String> = ndjson.lines().map(String::from).collect();
        let tampered_line = lines[i].replacen("\"ts\":17", "\"ts\":27", 1);
        assert_ne!(tampered_line, lines[i], "entry {i}: edit must apply");
        lines[i] = tampered_line;
        let tampered = TraceLog::from_ndjson(&lines.join("\n")).unwrap();
        let status = tampered.verify_chain();
        assert!(!status.valid, "entry {i}: tamper undetected");
        assert_eq!(status.first_broken, Some(i + 1), "entry {i}");
    }

    // Flip one prev_hash character in each chained entry: detected at i.
    for i in 1..10usize {
        let mut entries = log.entries().to_vec();
        let prev = entries[i].prev_hash.clone().unwrap();
        let flipped_char = if prev.starts_with('0') { "1" } else { "0" };
        entries[i].prev_hash = Some(format!("{}{}", flipped_char, &prev[1..]));
        let tampered_text = entries
            .iter()
            .map(|e| serde_json::to_string(e).unwrap())
            .collect::<Vec<_>>()
            .join("\n");
        let tampered = TraceLog::from_ndjson(&tampered_text).unwrap();
        let status = tampered.verify_chain();
        assert!(!status.valid);
        assert_eq!(status.first_broken, Some(i));
    }
    report(7, "10-entry chain: every per-entry byte flip detected at the correct index");
}

/// Criterion 8: median route+trace over a 5-branch tree with precomputed
/// scores stays under 1 ms (5 ms with the CI tolerance); a full check of a
/// 50-signal synthetic policy stays under 1 s (5 s with tolerance).
#[test]
fn criterion_8_latency() {
    let policy = multi_gate();
    let ctx = EvaluationContext::with_roles(vec!["jira-contributor".into()]);
    let scores = evaluate_signals(
        &policy,
        "Create a Jira issue for the login bug",
        &ctx,
        &default_registry(),
    )
    .unwrap();
    let tree = &policy.decision_trees["outbound_gate"];
    assert_eq!(tree.branches.len() + 1, 5, "five-arm tree");

    let mut samples: Vec<f64> = (0..1001)
        .map(|_| {
            let start = Instant::now();
            let out = route(tree, &scores, &policy, None, &Clock::Fixed(0.0)).unwrap();
            std::hint::black_box(out);
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_ms = samples[samples.len() / 2];
    assert!(median_ms < 5.0, "median route+trace = {median_ms} ms");

    // 50-signal synthetic policy: five 10-ref crisp trees.
    let mut synthetic = Policy::new();
    for i in 0..50usize {
        let name = format!("s{i}");
        synthetic.signals.insert(
            name.clone(),
            Signal {
                name,
                kind: SignalKind::Authz,
                threshold: None,
                model: None,
                candidates: Vec::new(),
                pii_types_allowed: Vec::new(),
                subjects: Vec::new(),
                role: Some("r".into()),
                span: SourceSpan::synthetic(),
            },
        );
    }
    for t in 0..5usize {
        let refs: Vec<ConditionExpr> = (0..10)
            .map(|i| ConditionExpr::signal_ref(SignalKind::Authz, format!("s{}", t * 10 + i)))
            .collect();
        let branches: Vec<Branch> = refs
            .chunks(2)
            .map(|pair| Branch {
                condition: ConditionExpr::And(
                    Box::new(pair[0].clone()),
                    Box::new(pair[1].clone()),
                ),
                backend: "deny".into(),
                span: SourceSpan::synthetic(),
            })
            .collect();
        synthetic.decision_trees.insert(
            format!("tree{t}"),
            DecisionTree {
                name: format!("tree{t}"),
                branches,
                else_backend: Some("allow".into()),
                else_span: SourceSpan::synthetic(),
                span: SourceSpan::synthetic(),
            },
        );
    }
    let start = Instant::now();
    let synthetic_report = verify(&synthetic);
    let elapsed = start.elapsed();
    assert!(synthetic_report.overall_pass());
    assert!(elapsed.as_secs_f64() < 5.0, "full check took {elapsed:?}");
    report(
        8,
        "route+trace median < 5 ms (1 ms × CI tolerance); 50-signal check < 5 s",
    );
}

/// Criterion 9: golden artifact content — YANG typing and ordering
/// constraints, the NETCONF candidate target and threshold rendering, the
/// gateway deny list, and the generated node's final unconditional deny.
#[test]
fn criterion_9_golden_artifacts() {
    let policy = multi_gate();
    let bundle = emit_all(&policy, &EmissionTarget::all(), EmitOptions::default()).unwrap();
    let content = |pred: &dyn Fn(&str) -> bool| {
        bundle
            .entries
            .iter()
            .find(|e| pred(&e.path))
            .map(|e| e.content.clone())
            .expect("artifact present")
    };

    let yang = content(&|p| p.ends_with(".yang"));
    assert!(yang.contains("fraction-digits 2"));
    assert!(yang.contains("range \"0.00..1.00\""));
    assert!(yang.contains("ordered-by user"));

    let netconf = content(&|p| p.contains("netconf/"));
    assert!(netconf.contains("<target><candidate/></target>"));
    assert!(netconf.contains("<threshold>0.50</threshold>"));

    let openclaw = content(&|p| p.ends_with("openclaw.json"));
    let parsed: serde_json::Value = serde_json::from_str(&openclaw).unwrap();
    let gates = &parsed["session"]["sendPolicy"]["dsl_safety_gates"];
    assert_eq!(gates[0]["signal"], "jb_guard");
    // Deny list shape is asserted against the bundle policy in unit tests;
    // here the multi-gate policy has no agents, so the list is empty but
    // the send policy still exists.
    assert!(parsed["agents"]["list"].as_array().unwrap().is_empty());

    let node = content(&|p| p.contains("langgraph_a/outbound_gate"));
    assert!(node.contains("def route_outbound_gate"));
    let final_return = node.rfind("    return ").expect("final return");
    assert!(
        node[final_return..].starts_with("    return \"deny_handler\""),
        "{}",
        &node[final_return..]
    );
    assert!(node[..final_return].contains("# Branch 5: ELSE (compiler-required)"));

    // The deny list check proper needs agents: use the bundle policy.
    let bundle_policy = {
        let path =
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../policies/agent_bundle.sr");
        parse(&std::fs::read_to_string(path).unwrap(), "agent_bundle.sr").unwrap()
    };
    let agent_bundle =
        emit_all(&bundle_policy, &[EmissionTarget::Openclaw], EmitOptions::default()).unwrap();
    let gateway: serde_json::Value = serde_json::from_str(
        &agent_bundle
            .entries
            .iter()
            .find(|e| e.path.ends_with("openclaw.json"))
            .unwrap()
            .content,
    )
    .unwrap();
    assert_eq!(
        gateway["agents"]["list"][0]["tools"]["deny"],
        serde_json::json!(["browser", "canvas", "cron"])
    );
    report(9, "YANG/NETCONF/gateway/node golden content all present");
}
