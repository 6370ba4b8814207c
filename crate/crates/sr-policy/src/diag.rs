//! Spanned diagnostics shared by the parser, verifier, and emitters.
//!
//! Severity is three-valued: errors block emission, warnings do not, and
//! notes record analysis boundaries (e.g. which checks could not run for a
//! signal tier) without affecting pass/fail.

use serde::Serialize;
use std::fmt;

/// A half-open region of source text, 1-based lines and columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, sl: u32, sc: u32, el: u32, ec: u32) -> Self {
        debug_assert!((sl, sc) <= (el, ec), "span start must not follow its end");
        SourceSpan {
            file: file.into(),
            start_line: sl,
            start_col: sc,
            end_line: el,
            end_col: ec,
        }
    }

    /// Span for values constructed in code rather than parsed from a file.
    pub fn synthetic() -> Self {
        SourceSpan::new("<synthetic>", 1, 1, 1, 1)
    }

    pub fn merge(&self, other: &SourceSpan) -> SourceSpan {
        let (sl, sc) = std::cmp::min(
            (self.start_line, self.start_col),
            (other.start_line, other.start_col),
        );
        let (el, ec) = std::cmp::max((self.end_line, self.end_col), (other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), sl, sc, el, ec)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Note,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        f.write_str(s)
    }
}

/// Stable diagnostic codes. The numeric ranges group by producer: E0xx
/// verifier, E05x route synthesis, E1xx lexer/parser, Wxxx advisories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagCode {
    E001UndefinedSignal,
    E002KindMismatch,
    E003UndefinedBackend,
    E010MissingElse,
    E021TooManyVariables,
    E030ThresholdTooLow,
    E040SkillWithoutEndpoint,
    E041EndpointUnreachableTool,
    E043EmptyBackendTarget,
    E050MissingDefaultBackend,
    E100Syntax,
    E101UnterminatedString,
    E102InvalidNumber,
    E103UnknownCharacter,
    E104NumberPrecision,
    E105DuplicateName,
    E106UnknownSignalKind,
    E107SignalFields,
    E108UnknownAttribute,
    E109InvalidValue,
    W010GroupTie,
    W011HighTemperature,
    W012RoutePriorityTie,
    W020ShadowedBranch,
    W042ModelEgressImplied,
    W050GeometricUnchecked,
    W070NotMapped,
    W071NoGates,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::E001UndefinedSignal => "E001_UNDEFINED_SIGNAL",
            DiagCode::E002KindMismatch => "E002_KIND_MISMATCH",
            DiagCode::E003UndefinedBackend => "E003_UNDEFINED_BACKEND",
            DiagCode::E010MissingElse => "E010_MISSING_ELSE",
            DiagCode::E021TooManyVariables => "E021_TOO_MANY_VARIABLES",
            DiagCode::E030ThresholdTooLow => "E030_THRESHOLD_TOO_LOW",
            DiagCode::E040SkillWithoutEndpoint => "E040_SKILL_WITHOUT_ENDPOINT",
            DiagCode::E041EndpointUnreachableTool => "E041_ENDPOINT_UNREACHABLE_TOOL",
            DiagCode::E043EmptyBackendTarget => "E043_EMPTY_BACKEND_TARGET",
            DiagCode::E050MissingDefaultBackend => "E050_MISSING_DEFAULT_BACKEND",
            DiagCode::E100Syntax => "E100_SYNTAX",
            DiagCode::E101UnterminatedString => "E101_UNTERMINATED_STRING",
            DiagCode::E102InvalidNumber => "E102_INVALID_NUMBER",
            DiagCode::E103UnknownCharacter => "E103_UNKNOWN_CHARACTER",
            DiagCode::E104NumberPrecision => "E104_NUMBER_PRECISION",
            DiagCode::E105DuplicateName => "E105_DUPLICATE_NAME",
            DiagCode::E106UnknownSignalKind => "E106_UNKNOWN_SIGNAL_KIND",
            DiagCode::E107SignalFields => "E107_SIGNAL_FIELDS",
            DiagCode::E108UnknownAttribute => "E108_UNKNOWN_ATTRIBUTE",
            DiagCode::E109InvalidValue => "E109_INVALID_VALUE",
            DiagCode::W010GroupTie => "W010_GROUP_TIE",
            DiagCode::W011HighTemperature => "W011_HIGH_TEMPERATURE",
            DiagCode::W012RoutePriorityTie => "W012_ROUTE_PRIORITY_TIE",
            DiagCode::W020ShadowedBranch => "W020_SHADOWED_BRANCH",
            DiagCode::W042ModelEgressImplied => "W042_MODEL_EGRESS_IMPLIED",
            DiagCode::W050GeometricUnchecked => "W050_GEOMETRIC_UNCHECKED",
            DiagCode::W070NotMapped => "W070_NOT_MAPPED",
            DiagCode::W071NoGates => "W071_NO_GATES",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    pub span: SourceSpan,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<SourceSpan>,
}

impl Diagnostic {
    pub fn error(code: DiagCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
            related: Vec::new(),
        }
    }

    pub fn warning(code: DiagCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
            related: Vec::new(),
        }
    }

    pub fn note(code: DiagCode, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: Severity::Note,
            code,
            message: message.into(),
            span,
            related: Vec::new(),
        }
    }

    pub fn with_related(mut self, spans: Vec<SourceSpan>) -> Self {
        self.related = spans;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}[{}]: {}",
            self.span, self.severity, self.code, self.message
        )
    }
}

/// True when no error-severity diagnostic is present.
pub fn no_errors(diags: &[Diagnostic]) -> bool {
    !diags.iter().any(Diagnostic::is_error)
}
