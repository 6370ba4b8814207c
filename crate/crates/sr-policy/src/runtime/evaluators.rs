//! Pluggable signal evaluators and the deterministic mock set.
//!
//! The registry is keyed by signal kind with optional per-signal-name
//! overrides, so tests can pin individual signals to fixed scores. Every
//! shipped mock is deterministic for a fixed input: bag-of-words cosine for
//! embeddings, max-match wordlists for keyword-style classifiers, regex
//! entity scan for PII (any disallowed entity scores 1.0), and a role table
//! for authorization.

use crate::ast::{Signal, SignalKind};
use crate::runtime::{EvaluationContext, RuntimeError};
use regex::Regex;
use serde::Deserialize;
use std::collections::HashMap;
use std::sync::Arc;

/// Behavior contract: score in [0, 1], deterministic for a fixed input.
pub trait SignalEvaluator: Send + Sync {
    fn evaluate(&self, signal: &Signal, input: &str, ctx: &EvaluationContext) -> f64;
}

#[derive(Clone, Default)]
pub struct EvaluatorRegistry {
    by_kind: HashMap<SignalKind, Arc<dyn SignalEvaluator>>,
    by_name: HashMap<String, Arc<dyn SignalEvaluator>>,
}

impl std::fmt::Debug for EvaluatorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvaluatorRegistry")
            .field("kinds", &self.by_kind.keys().collect::<Vec<_>>())
            .field("names", &self.by_name.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl EvaluatorRegistry {
    pub fn new() -> EvaluatorRegistry {
        EvaluatorRegistry::default()
    }

    pub fn register_kind(
        &mut self,
        kind: SignalKind,
        evaluator: Arc<dyn SignalEvaluator>,
    ) -> &mut Self {
        self.by_kind.insert(kind, evaluator);
        self
    }

    /// Per-name override; wins over the kind entry for that signal.
    pub fn register_name(
        &mut self,
        name: impl Into<String>,
        evaluator: Arc<dyn SignalEvaluator>,
    ) -> &mut Self {
        self.by_name.insert(name.into(), evaluator);
        self
    }

    pub fn for_signal(&self, signal: &Signal) -> Result<&Arc<dyn SignalEvaluator>, RuntimeError> {
        self.by_name
            .get(&signal.name)
            .or_else(|| self.by_kind.get(&signal.kind))
            .ok_or(RuntimeError::MissingEvaluator { kind: signal.kind })
    }
}

// --- mocks -------------------------------------------------------------------

/// Max score over case-insensitive phrase matches; 0.0 when nothing matches.
pub struct KeywordEvaluator {
    weights: Vec<(String, f64)>,
}

impl KeywordEvaluator {
    pub fn new(weights: impl IntoIterator<Item = (String, f64)>) -> KeywordEvaluator {
        KeywordEvaluator {
            weights: weights
                .into_iter()
                .map(|(p, w)| (p.to_lowercase(), w.clamp(0.0, 1.0)))
                .collect(),
        }
    }
}

impl SignalEvaluator for KeywordEvaluator {
    fn evaluate(&self, _signal: &Signal, input: &str, _ctx: &EvaluationContext) -> f64 {
        let haystack = input.to_lowercase();
        self.weights
            .iter()
            .filter(|(phrase, _)| haystack.contains(phrase))
            .map(|(_, w)| *w)
            .fold(0.0, f64::max)
    }
}

fn bag_of_words(text: &str) -> HashMap<String, f64> {
    let mut counts: HashMap<String, f64> = HashMap::new();
    for token in text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        *counts.entry(token.to_string()).or_insert(0.0) += 1.0;
    }
    counts
}

fn cosine(a: &HashMap<String, f64>, b: &HashMap<String, f64>) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(token, x)| b.get(token).map(|y| x * y))
        .sum();
    let norm = |m: &HashMap<String, f64>| m.values().map(|v| v * v).sum::<f64>().sqrt();
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        (dot / denom).clamp(0.0, 1.0)
    }
}

/// Bag-of-words cosine against the signal's declared candidates; the score
/// is the best candidate match.
pub struct BowCosineEvaluator;

impl SignalEvaluator for BowCosineEvaluator {
    fn evaluate(&self, signal: &Signal, input: &str, _ctx: &EvaluationContext) -> f64 {
        let input_bag = bag_of_words(input);
        signal
            .candidates
            .iter()
            .map(|c| cosine(&input_bag, &bag_of_words(c)))
            .fold(0.0, f64::max)
    }
}

/// Regex entity scan: any match whose entity type is not in the signal's
/// `pii_types_allowed` scores 1.0.
pub struct RegexPiiEvaluator {
    patterns: Vec<(String, Regex)>,
}

impl RegexPiiEvaluator {
    pub fn new(
        patterns: impl IntoIterator<Item = (String, String)>,
    ) -> Result<RegexPiiEvaluator, regex::Error> {
        let compiled = patterns
            .into_iter()
            .map(|(name, pattern)| Regex::new(&pattern).map(|r| (name, r)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RegexPiiEvaluator { patterns: compiled })
    }
}

impl SignalEvaluator for RegexPiiEvaluator {
    fn evaluate(&self, signal: &Signal, input: &str, _ctx: &EvaluationContext) -> f64 {
        for (entity, regex) in &self.patterns {
            if signal.pii_types_allowed.contains(entity) {
                continue;
            }
            if regex.is_match(input) {
                return 1.0;
            }
        }
        0.0
    }
}

/// Grants the signal's role when any context user role maps to it (or names
/// it directly).
pub struct AuthzEvaluator {
    role_table: HashMap<String, Vec<String>>,
}

impl AuthzEvaluator {
    pub fn new(role_table: HashMap<String, Vec<String>>) -> AuthzEvaluator {
        AuthzEvaluator { role_table }
    }
}

impl SignalEvaluator for AuthzEvaluator {
    fn evaluate(&self, signal: &Signal, _input: &str, ctx: &EvaluationContext) -> f64 {
        let Some(required) = &signal.role else {
            return 0.0;
        };
        let granted = ctx.user_roles.iter().any(|user_role| {
            user_role == required
                || self
                    .role_table
                    .get(user_role)
                    .is_some_and(|roles| roles.contains(required))
        });
        if granted {
            1.0
        } else {
            0.0
        }
    }
}

/// Fixed score regardless of input; for pinning signals in tests.
pub struct ConstantEvaluator(pub f64);

impl SignalEvaluator for ConstantEvaluator {
    fn evaluate(&self, _signal: &Signal, _input: &str, _ctx: &EvaluationContext) -> f64 {
        self.0
    }
}

// --- declarative configuration ----------------------------------------------

/// Evaluator config file: mocks with parameters per signal kind, plus
/// optional per-signal-name overrides.
#[derive(Debug, Deserialize)]
pub struct EvaluatorConfig {
    #[serde(default)]
    pub kinds: HashMap<String, EvalSpec>,
    #[serde(default)]
    pub signals: HashMap<String, EvalSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EvalSpec {
    Keyword { weights: HashMap<String, f64> },
    BowCosine {},
    RegexPii { patterns: HashMap<String, String> },
    Authz { role_table: HashMap<String, Vec<String>> },
    Constant { score: f64 },
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("evaluator config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown signal kind `{0}` in evaluator config")]
    UnknownKind(String),
    #[error("invalid PII pattern: {0}")]
    Pattern(#[from] regex::Error),
}

fn build_spec(spec: &EvalSpec) -> Result<Arc<dyn SignalEvaluator>, ConfigError> {
    Ok(match spec {
        EvalSpec::Keyword { weights } => {
            let mut sorted: Vec<(String, f64)> =
                weights.iter().map(|(k, v)| (k.clone(), *v)).collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            Arc::new(KeywordEvaluator::new(sorted))
        }
        EvalSpec::BowCosine {} => Arc::new(BowCosineEvaluator),
        EvalSpec::RegexPii { patterns } => {
            let mut sorted: Vec<(String, String)> =
                patterns.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            sorted.sort_by(|a, b| a.0.cmp(&b.0));
            Arc::new(RegexPiiEvaluator::new(sorted)?)
        }
        EvalSpec::Authz { role_table } => Arc::new(AuthzEvaluator::new(role_table.clone())),
        EvalSpec::Constant { score } => Arc::new(ConstantEvaluator(*score)),
    })
}

pub fn build_registry(config: &EvaluatorConfig) -> Result<EvaluatorRegistry, ConfigError> {
    let mut registry = EvaluatorRegistry::new();
    let mut kinds: Vec<(&String, &EvalSpec)> = config.kinds.iter().collect();
    kinds.sort_by_key(|(k, _)| k.as_str());
    for (kind_name, spec) in kinds {
        let kind = SignalKind::parse(kind_name)
            .ok_or_else(|| ConfigError::UnknownKind(kind_name.clone()))?;
        registry.register_kind(kind, build_spec(spec)?);
    }
    let mut names: Vec<(&String, &EvalSpec)> = config.signals.iter().collect();
    names.sort_by_key(|(k, _)| k.as_str());
    for (name, spec) in names {
        registry.register_name(name.clone(), build_spec(spec)?);
    }
    Ok(registry)
}

pub fn registry_from_json(text: &str) -> Result<EvaluatorRegistry, ConfigError> {
    let config: EvaluatorConfig = serde_json::from_str(text)?;
    build_registry(&config)
}

/// The shipped default registry. Covers every signal kind with mocks tuned
/// so the bundled example policies' TEST blocks pass.
pub fn default_registry() -> EvaluatorRegistry {
    registry_from_json(DEFAULT_CONFIG_JSON).expect("default evaluator config is valid")
}

/// JSON source of [`default_registry`]; also shipped as a standalone file
/// for the CLI's `--evaluators` flag.
pub const DEFAULT_CONFIG_JSON: &str = r#"{
  "kinds": {
    "jailbreak": {
      "type": "keyword",
      "weights": {
        "you are now dan": 1.0,
        "bypass all safety": 1.0,
        "ignore previous instructions": 1.0,
        "disregard your guidelines": 0.9
      }
    },
    "pii": {
      "type": "regex_pii",
      "patterns": {
        "US_SSN": "\\b\\d{3}-\\d{2}-\\d{4}\\b",
        "EMAIL_ADDRESS": "\\b[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\\.[A-Za-z]{2,}\\b",
        "CREDIT_CARD": "\\b\\d{4}[- ]\\d{4}[- ]\\d{4}[- ]\\d{4}\\b"
      }
    },
    "embedding": { "type": "bow_cosine" },
    "authz": {
      "type": "authz",
      "role_table": {
        "jira-contributor": ["developer"],
        "dev-team": ["developer"],
        "ops": ["operator"]
      }
    },
    "keyword": { "type": "keyword", "weights": {} },
    "complexity": {
      "type": "keyword",
      "weights": {
        "prove": 0.9,
        "step by step": 0.9,
        "chain of thought": 0.9,
        "reasoning": 0.8
      }
    }
  }
}
"#;
