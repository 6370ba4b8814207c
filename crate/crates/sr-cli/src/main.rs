//! `srpc` — check, build, test, hash, and explain Semantic Router policies.
//!
//! Exit codes are a stable contract: 0 success (warnings allowed unless
//! `--deny-warnings`), 1 policy/verification/test failure, 2 environment or
//! usage failure. No command mutates the source file.

use clap::{Parser, Subcommand, ValueEnum};
use sr_policy::ast::{compute_source_hash, Policy};
use sr_policy::diag::{Diagnostic, Severity};
use sr_policy::emit::{emit_all, EmissionTarget, EmitError, EmitOptions};
use sr_policy::parser::parse_source;
use sr_policy::runtime::evaluators::{default_registry, registry_from_json, EvaluatorRegistry};
use sr_policy::runtime::{evaluate_signals, route_sequence, Clock, EvaluationContext};
use sr_policy::verify::{verify, VerificationReport};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_POLICY: u8 = 1;
const EXIT_ENV: u8 = 2;

#[derive(Parser)]
#[command(
    name = "srpc",
    version,
    about = "Compiler, verifier, and reference interpreter for .sr routing policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and verify a policy, printing diagnostics.
    Check {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        /// Treat warnings as failures.
        #[arg(long)]
        deny_warnings: bool,
    },
    /// Compile a verified policy into target artifacts.
    Build {
        path: PathBuf,
        /// Comma-separated targets, or `all`.
        #[arg(long, default_value = "all")]
        targets: String,
        /// Output directory (default: $SRPC_OUT_DIR or ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emitter configuration (JSON), e.g. protocol-gate overrides.
        #[arg(long)]
        emit_config: Option<PathBuf>,
    },
    /// Run the policy's TEST blocks against mock evaluators.
    Test {
        path: PathBuf,
        /// Evaluator configuration (JSON); defaults to the shipped mocks.
        #[arg(long)]
        evaluators: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print the 8-hex source hash; optionally verify a built bundle.
    Hash {
        path: PathBuf,
        /// Check that every file under this directory embeds the hash.
        #[arg(long)]
        verify_bundle: Option<PathBuf>,
    },
    /// Evaluate one input through the full tree sequence and print the
    /// chained audit trace.
    Explain {
        path: PathBuf,
        #[arg(long)]
        input: String,
        /// Comma-separated user roles for authz signals.
        #[arg(long, value_delimiter = ',')]
        roles: Vec<String>,
        #[arg(long)]
        evaluators: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // A panic anywhere in parse/verify/emit is an environment failure, not
    // a policy verdict.
    let result = std::panic::catch_unwind(|| run(cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(_) => {
            eprintln!("srpc: internal error (crash); this is a bug");
            ExitCode::from(EXIT_ENV)
        }
    }
}

fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Check {
            path,
            format,
            deny_warnings,
        } => cmd_check(&path, format, deny_warnings),
        Command::Build {
            path,
            targets,
            out,
            emit_config,
        } => cmd_build(&path, &targets, out, emit_config),
        Command::Test {
            path,
            evaluators,
            format,
        } => cmd_test(&path, evaluators, format),
        Command::Hash { path, verify_bundle } => cmd_hash(&path, verify_bundle),
        Command::Explain {
            path,
            input,
            roles,
            evaluators,
        } => cmd_explain(&path, &input, roles, evaluators),
    }
}

fn read_source(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("srpc: cannot read {}: {}", path.display(), e);
        EXIT_ENV
    })
}

fn print_diagnostics(diags: &[&Diagnostic]) {
    for d in diags {
        eprintln!("{}", d);
    }
}

/// Parses a file; on parse errors prints them and returns the failure code.
fn load_policy(path: &Path) -> Result<(Policy, Vec<Diagnostic>), u8> {
    let source = read_source(path)?;
    let outcome = parse_source(&source, &path.to_string_lossy());
    if outcome.has_errors() {
        print_diagnostics(&outcome.diagnostics.iter().collect::<Vec<_>>());
        return Err(EXIT_POLICY);
    }
    Ok((outcome.policy, outcome.diagnostics))
}

fn load_registry(config: Option<PathBuf>) -> Result<EvaluatorRegistry, u8> {
    match config {
        None => Ok(default_registry()),
        Some(path) => {
            let text = read_source(&path)?;
            registry_from_json(&text).map_err(|e| {
                eprintln!("srpc: invalid evaluator config {}: {}", path.display(), e);
                EXIT_ENV
            })
        }
    }
}

#[derive(serde::Serialize)]
struct CheckOutput<'a> {
    pass: bool,
    source_hash: String,
    errors: usize,
    warnings: usize,
    parse_diagnostics: &'a [Diagnostic],
    report: &'a VerificationReport,
}

fn cmd_check(path: &Path, format: Format, deny_warnings: bool) -> u8 {
    let (policy, parse_diags) = match load_policy(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let report = verify(&policy);
    let hash = compute_source_hash(&policy);

    let mut all: Vec<&Diagnostic> = parse_diags.iter().collect();
    all.extend(report.all_diagnostics());
    let errors = all.iter().filter(|d| d.severity == Severity::Error).count();
    let warnings = all.iter().filter(|d| d.severity == Severity::Warning).count();
    let notes = all.iter().filter(|d| d.severity == Severity::Note).count();
    let pass = errors == 0;

    match format {
        Format::Human => {
            print_diagnostics(&all);
            println!(
                "check: {} ({} error{}, {} warning{}, {} note{}) source_hash={}",
                if pass { "pass" } else { "fail" },
                errors,
                plural(errors),
                warnings,
                plural(warnings),
                notes,
                plural(notes),
                hash
            );
        }
        Format::Json => {
            let output = CheckOutput {
                pass,
                source_hash: hash.as_str().to_string(),
                errors,
                warnings,
                parse_diagnostics: &parse_diags,
                report: &report,
            };
            println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
        }
    }

    if !pass || (deny_warnings && warnings > 0) {
        EXIT_POLICY
    } else {
        EXIT_OK
    }
}

fn plural(n: usize) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

fn parse_targets(spec: &str) -> Result<Vec<EmissionTarget>, u8> {
    if spec == "all" {
        return Ok(EmissionTarget::all().to_vec());
    }
    let mut targets = Vec::new();
    for name in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match EmissionTarget::parse(name) {
            Some(t) => targets.push(t),
            None => {
                eprintln!(
                    "srpc: unknown target `{}` (expected one of: {})",
                    name,
                    EmissionTarget::all()
                        .iter()
                        .map(|t| t.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                return Err(EXIT_ENV);
            }
        }
    }
    Ok(targets)
}

fn cmd_build(
    path: &Path,
    targets: &str,
    out: Option<PathBuf>,
    emit_config: Option<PathBuf>,
) -> u8 {
    let targets = match parse_targets(targets) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let out_dir = out.unwrap_or_else(|| {
        std::env::var_os("SRPC_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    });
    let options = match emit_config {
        None => EmitOptions::default(),
        Some(config_path) => {
            let text = match read_source(&config_path) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match EmitOptions::from_json(&text) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("srpc: invalid emit config {}: {}", config_path.display(), e);
                    return EXIT_ENV;
                }
            }
        }
    };

    let (policy, parse_diags) = match load_policy(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    print_diagnostics(&parse_diags.iter().collect::<Vec<_>>());

    let bundle = match emit_all(&policy, &targets, options) {
        Ok(b) => b,
        Err(EmitError::Refused(report)) => {
            print_diagnostics(&report.all_diagnostics());
            eprintln!("srpc: emission refused; fix the errors above and rebuild");
            return EXIT_POLICY;
        }
        Err(e) => {
            eprintln!("srpc: {}", e);
            return EXIT_POLICY;
        }
    };

    print_diagnostics(&bundle.warnings.iter().collect::<Vec<_>>());
    match bundle.write_to(&out_dir) {
        Ok(paths) => {
            for p in &paths {
                println!("{}", p.display());
            }
            println!("source hash: {}", bundle.source_hash);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("srpc: cannot write bundle under {}: {}", out_dir.display(), e);
            EXIT_ENV
        }
    }
}

fn cmd_test(path: &Path, evaluators: Option<PathBuf>, format: Format) -> u8 {
    let (policy, _) = match load_policy(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let report = verify(&policy);
    if !report.overall_pass() {
        print_diagnostics(&report.all_diagnostics());
        return EXIT_POLICY;
    }
    let registry = match load_registry(evaluators) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let results = match sr_policy::runtime::run_tests(&policy, &registry, &Clock::System) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("srpc: {}", e);
            return EXIT_ENV;
        }
    };

    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&results).expect("serializable")
        ),
        Format::Human => {
            for case in &results.cases {
                if case.passed {
                    println!("PASS {} -> {}", case.name, case.actual);
                } else {
                    println!(
                        "FAIL {} -> {} (expected {})",
                        case.name, case.actual, case.expected
                    );
                    for entry in &case.trace {
                        println!(
                            "  {}",
                            serde_json::to_string(entry).expect("serializable")
                        );
                    }
                }
            }
            let passed = results.cases.iter().filter(|c| c.passed).count();
            println!("tests: {}/{} passed", passed, results.cases.len());
        }
    }
    if results.all_passed() {
        EXIT_OK
    } else {
        EXIT_POLICY
    }
}

fn walk_files(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

fn cmd_hash(path: &Path, verify_bundle: Option<PathBuf>) -> u8 {
    let (policy, _) = match load_policy(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let hash = compute_source_hash(&policy);
    println!("{}", hash);

    let Some(bundle_dir) = verify_bundle else {
        return EXIT_OK;
    };
    let mut files = Vec::new();
    if let Err(e) = walk_files(&bundle_dir, &mut files) {
        eprintln!("srpc: cannot read bundle {}: {}", bundle_dir.display(), e);
        return EXIT_ENV;
    }
    files.sort();
    if files.is_empty() {
        eprintln!("srpc: bundle {} contains no files", bundle_dir.display());
        return EXIT_ENV;
    }
    let mut drifted = Vec::new();
    for file in &files {
        let content = std::fs::read(file).unwrap_or_default();
        let token = hash.as_str().as_bytes();
        let found = content.windows(token.len()).any(|w| w == token);
        if !found {
            drifted.push(file);
        }
    }
    if drifted.is_empty() {
        println!("consistent: {} file(s) carry source hash {}", files.len(), hash);
        EXIT_OK
    } else {
        for file in &drifted {
            println!("drift detected: {} does not carry {}", file.display(), hash);
        }
        EXIT_POLICY
    }
}

fn cmd_explain(
    path: &Path,
    input: &str,
    roles: Vec<String>,
    evaluators: Option<PathBuf>,
) -> u8 {
    let (policy, _) = match load_policy(path) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let report = verify(&policy);
    if !report.overall_pass() {
        print_diagnostics(&report.all_diagnostics());
        return EXIT_POLICY;
    }
    let registry = match load_registry(evaluators) {
        Ok(r) => r,
        Err(code) => return code,
    };
    let ctx = EvaluationContext::with_roles(roles);
    let scores = match evaluate_signals(&policy, input, &ctx, &registry) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("srpc: {}", e);
            return EXIT_ENV;
        }
    };
    let trees = policy.effective_trees();
    match route_sequence(&trees, &scores, &policy, &Clock::System) {
        Ok((decision, chain)) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&chain).expect("serializable")
            );
            eprintln!("decision: {}", decision);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("srpc: {}", e);
            return EXIT_ENV;
        }
    }
}
