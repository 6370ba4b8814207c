//! Compiler, verifier, and reference interpreter for the Semantic Router
//! policy DSL.
//!
//! One `.sr` source declares signals (probabilistic detectors thresholded
//! to booleans), signal groups (softmax-normalized so at most one member
//! fires), decision trees (priority-ordered branches with a mandatory
//! ELSE), routes, backends, network endpoints, agents, and tests. From that
//! single source the compiler verifies the policy logic and emits artifacts
//! for inference routing, graph- and gateway-based orchestration, protocol
//! boundary gates, and infrastructure (Kubernetes, YANG/NETCONF) — every
//! artifact stamped with the same 8-hex source hash so drift between
//! targets is mechanically detectable.
//!
//! The usual pipeline:
//!
//! ```
//! use sr_policy::{parser, verify, emit};
//!
//! let source = r#"
//! SIGNAL jailbreak jb_guard { threshold: 0.50, model: "detector" }
//! DECISION_TREE safety_gate {
//!   IF jailbreak("jb_guard") { BACKEND deny }
//!   ELSE { BACKEND allow }
//! }
//! "#;
//! let policy = parser::parse(source, "example.sr").expect("parses");
//! let report = verify::verify(&policy);
//! assert!(report.overall_pass());
//!
//! let bundle = emit::emit_all(
//!     &policy,
//!     &emit::EmissionTarget::all(),
//!     emit::EmitOptions::default(),
//! ).expect("emits");
//! for entry in &bundle.entries {
//!     assert!(entry.content.contains(bundle.source_hash.as_str()));
//! }
//! ```

pub mod ast;
pub mod diag;
pub mod emit;
pub mod lexer;
pub mod normalize;
pub mod parser;
pub mod runtime;
pub mod verify;

pub use ast::{canonicalize, compute_source_hash, Policy, SourceHash};
pub use diag::{Diagnostic, Severity, SourceSpan};
pub use verify::{verify as verify_policy, VerificationReport};
