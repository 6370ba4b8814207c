//! Recursive-descent parser for `.sr` sources.
//!
//! Errors are collected per file with recovery at block boundaries, so one
//! malformed block does not hide problems in the rest of the policy. The
//! parser never panics on arbitrary input; everything surfaces as spanned
//! diagnostics.

use crate::ast::*;
use crate::diag::{no_errors, DiagCode, Diagnostic, SourceSpan};
use crate::lexer::{tokenize, Keyword, Token, TokenKind};
use indexmap::IndexMap;

#[derive(Debug)]
pub struct ParseOutcome {
    pub policy: Policy,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutcome {
    pub fn has_errors(&self) -> bool {
        !no_errors(&self.diagnostics)
    }
}

/// Parses a source file, always returning a best-effort policy alongside
/// all diagnostics.
pub fn parse_source(source: &str, file: &str) -> ParseOutcome {
    let (tokens, mut diagnostics) = tokenize(source, file);
    let mut parser = Parser::new(&tokens, file, source);
    let policy = parser.parse_policy();
    diagnostics.extend(parser.diags);
    ParseOutcome {
        policy,
        diagnostics,
    }
}

/// Strict entry point: `Ok` only when no error-severity diagnostic was
/// produced. Warnings are discarded here; use [`parse_source`] to keep them.
pub fn parse(source: &str, file: &str) -> Result<Policy, Vec<Diagnostic>> {
    let outcome = parse_source(source, file);
    if outcome.has_errors() {
        Err(outcome
            .diagnostics
            .into_iter()
            .filter(Diagnostic::is_error)
            .collect())
    } else {
        Ok(outcome.policy)
    }
}

/// One parsed attribute: the value, its span, and element spans when the
/// value is a list (needed for per-member diagnostics).
struct RawAttr {
    value: AttrValue,
    span: SourceSpan,
    element_spans: Vec<SourceSpan>,
}

type AttrMap = IndexMap<String, RawAttr>;

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    diags: Vec<Diagnostic>,
    eof_span: SourceSpan,
}

/// Internal marker: the active block could not be finished and the caller
/// should resynchronize at the next block keyword.
struct Recover;

type PResult<T> = Result<T, Recover>;

impl<'a> Parser<'a> {
    fn new(tokens: &'a [Token], file: &'a str, source: &str) -> Parser<'a> {
        let last_line = source.lines().count().max(1) as u32;
        let last_col = source.lines().last().map_or(1, |l| l.chars().count() as u32 + 1);
        Parser {
            tokens,
            pos: 0,
            diags: Vec::new(),
            eof_span: SourceSpan::new(file, last_line, last_col, last_line, last_col),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here_span(&self) -> SourceSpan {
        self.peek()
            .map(|t| t.span.clone())
            .unwrap_or_else(|| self.eof_span.clone())
    }

    fn error_here(&mut self, message: impl Into<String>) -> Recover {
        let span = self.here_span();
        self.diags
            .push(Diagnostic::error(DiagCode::E100Syntax, message, span));
        Recover
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<SourceSpan> {
        match self.peek() {
            Some(t) if &t.kind == kind => {
                let span = t.span.clone();
                self.pos += 1;
                Ok(span)
            }
            Some(t) => {
                let found = t.kind.describe();
                Err(self.error_here(format!("expected {}, found {}", what, found)))
            }
            None => Err(self.error_here(format!("expected {}, found end of file", what))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Ident(name),
                span,
            }) => {
                let out = (name.clone(), span.clone());
                self.pos += 1;
                Ok(out)
            }
            Some(t) => {
                let found = t.kind.describe();
                Err(self.error_here(format!("expected {}, found {}", what, found)))
            }
            None => Err(self.error_here(format!("expected {}, found end of file", what))),
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> PResult<SourceSpan> {
        self.expect(&TokenKind::Kw(kw), &format!("`{}`", kw.as_str()))
    }

    /// Skips tokens until the next top-level block keyword at brace depth 0.
    fn recover(&mut self) {
        let mut depth = 0i32;
        while let Some(t) = self.peek() {
            match &t.kind {
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => depth = (depth - 1).max(0),
                TokenKind::Kw(kw) if kw.starts_block() && depth == 0 => return,
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn parse_policy(&mut self) -> Policy {
        let mut policy = Policy::new();
        while let Some(t) = self.peek() {
            let result = match &t.kind {
                TokenKind::Kw(Keyword::Signal) => self.parse_signal(&mut policy),
                TokenKind::Kw(Keyword::SignalGroup) => self.parse_group(&mut policy),
                TokenKind::Kw(Keyword::DecisionTree) => self.parse_tree(&mut policy),
                TokenKind::Kw(Keyword::Route) => self.parse_route(&mut policy),
                TokenKind::Kw(Keyword::Backend) => self.parse_backend(&mut policy),
                TokenKind::Kw(Keyword::Network) => self.parse_network(&mut policy),
                TokenKind::Kw(Keyword::Agent) => self.parse_agent(&mut policy),
                TokenKind::Kw(Keyword::Deploy) => self.parse_deploy(&mut policy),
                TokenKind::Kw(Keyword::Test) => self.parse_test(&mut policy),
                TokenKind::Kw(Keyword::Global) => self.parse_global(&mut policy),
                TokenKind::Kw(Keyword::Plugin) => self.parse_plugin(&mut policy),
                other => {
                    let found = other.describe();
                    Err(self.error_here(format!(
                        "expected a block keyword (SIGNAL, DECISION_TREE, ...), found {}",
                        found
                    )))
                }
            };
            if result.is_err() {
                self.recover();
            }
        }
        policy
    }

    // -- attribute machinery ------------------------------------------------

    fn parse_value(&mut self, depth: u8) -> PResult<(AttrValue, SourceSpan, Vec<SourceSpan>)> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Str(s),
                span,
            }) => {
                self.pos += 1;
                Ok((AttrValue::Str(s), span, Vec::new()))
            }
            Some(Token {
                kind: TokenKind::Number(v, _),
                span,
            }) => {
                self.pos += 1;
                Ok((AttrValue::Number(v), span, Vec::new()))
            }
            Some(Token {
                kind: TokenKind::Bool(b),
                span,
            }) => {
                self.pos += 1;
                Ok((AttrValue::Bool(b), span, Vec::new()))
            }
            Some(Token {
                kind: TokenKind::Ident(i),
                span,
            }) => {
                self.pos += 1;
                Ok((AttrValue::Ident(i), span, Vec::new()))
            }
            Some(Token {
                kind: TokenKind::LBracket,
                span: open,
            }) => {
                self.pos += 1;
                let mut items = Vec::new();
                let mut element_spans = Vec::new();
                loop {
                    if let Some(Token {
                        kind: TokenKind::RBracket,
                        span,
                    }) = self.peek()
                    {
                        let span = span.clone();
                        self.pos += 1;
                        return Ok((AttrValue::List(items), open.merge(&span), element_spans));
                    }
                    let (item, item_span, _) = self.parse_value(depth)?;
                    if matches!(item, AttrValue::List(_)) {
                        self.diags.push(Diagnostic::error(
                            DiagCode::E100Syntax,
                            "lists may not be nested",
                            item_span.clone(),
                        ));
                        return Err(Recover);
                    }
                    items.push(item);
                    element_spans.push(item_span);
                    match self.peek() {
                        Some(Token {
                            kind: TokenKind::Comma,
                            ..
                        }) => {
                            self.pos += 1; // trailing commas are fine
                        }
                        Some(Token {
                            kind: TokenKind::RBracket,
                            ..
                        }) => {}
                        _ => {
                            return Err(self.error_here("expected `,` or `]` in list"));
                        }
                    }
                }
            }
            Some(Token {
                kind: TokenKind::LBrace,
                span: open,
            }) => {
                if depth >= 1 {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E100Syntax,
                        "object values may nest at most one level deep",
                        open,
                    ));
                    return Err(Recover);
                }
                self.pos += 1;
                let mut map = IndexMap::new();
                loop {
                    if let Some(Token {
                        kind: TokenKind::RBrace,
                        span,
                    }) = self.peek()
                    {
                        let span = span.clone();
                        self.pos += 1;
                        return Ok((AttrValue::Object(map), open.merge(&span), Vec::new()));
                    }
                    let (key, _) = self.expect_ident("attribute name")?;
                    self.expect(&TokenKind::Colon, "`:`")?;
                    let (value, vspan, _) = self.parse_value(depth + 1)?;
                    if matches!(value, AttrValue::Object(_) | AttrValue::List(_)) {
                        self.diags.push(Diagnostic::error(
                            DiagCode::E100Syntax,
                            "object attribute values must be scalars",
                            vspan,
                        ));
                        return Err(Recover);
                    }
                    map.insert(key, value);
                    if let Some(Token {
                        kind: TokenKind::Comma,
                        ..
                    }) = self.peek()
                    {
                        self.pos += 1;
                    }
                }
            }
            Some(t) => {
                let found = t.kind.describe();
                Err(self.error_here(format!("expected a value, found {}", found)))
            }
            None => Err(self.error_here("expected a value, found end of file")),
        }
    }

    /// Parses `{ key: value ... }` with optional commas between entries.
    fn parse_attr_block(&mut self) -> PResult<(AttrMap, SourceSpan)> {
        let open = self.expect(&TokenKind::LBrace, "`{`")?;
        let mut attrs = AttrMap::new();
        loop {
            match self.peek() {
                Some(Token {
                    kind: TokenKind::RBrace,
                    span,
                }) => {
                    let span = span.clone();
                    self.pos += 1;
                    return Ok((attrs, open.merge(&span)));
                }
                Some(Token {
                    kind: TokenKind::Comma,
                    ..
                }) => {
                    self.pos += 1;
                }
                Some(_) => {
                    let (key, key_span) = self.expect_ident("attribute name")?;
                    self.expect(&TokenKind::Colon, "`:`")?;
                    let (value, vspan, element_spans) = self.parse_value(0)?;
                    let span = key_span.merge(&vspan);
                    if attrs.contains_key(&key) {
                        self.diags.push(Diagnostic::error(
                            DiagCode::E105DuplicateName,
                            format!("attribute `{}` given more than once", key),
                            span.clone(),
                        ));
                    }
                    attrs.insert(
                        key,
                        RawAttr {
                            value,
                            span,
                            element_spans,
                        },
                    );
                }
                None => {
                    return Err(self.error_here("unclosed `{` block"));
                }
            }
        }
    }

    fn unknown_attrs(&mut self, attrs: &AttrMap, allowed: &[&str], block: &str) {
        for (key, raw) in attrs {
            if !allowed.contains(&key.as_str()) {
                self.diags.push(Diagnostic::error(
                    DiagCode::E108UnknownAttribute,
                    format!("unknown attribute `{}` in {} block", key, block),
                    raw.span.clone(),
                ));
            }
        }
    }

    fn take_string(&mut self, attrs: &mut AttrMap, key: &str) -> Option<(String, SourceSpan)> {
        let raw = attrs.shift_remove(key)?;
        match raw.value {
            AttrValue::Str(s) => Some((s, raw.span)),
            other => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("attribute `{}` expects a string, found {}", key, kind_of(&other)),
                    raw.span,
                ));
                None
            }
        }
    }

    fn take_number(&mut self, attrs: &mut AttrMap, key: &str) -> Option<(f64, SourceSpan)> {
        let raw = attrs.shift_remove(key)?;
        match raw.value {
            AttrValue::Number(n) => Some((n, raw.span)),
            other => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("attribute `{}` expects a number, found {}", key, kind_of(&other)),
                    raw.span,
                ));
                None
            }
        }
    }

    fn take_string_list(&mut self, attrs: &mut AttrMap, key: &str) -> Option<Vec<String>> {
        let raw = attrs.shift_remove(key)?;
        match raw.value {
            AttrValue::List(items) => {
                let mut out = Vec::new();
                for (item, span) in items.into_iter().zip(raw.element_spans) {
                    match item {
                        AttrValue::Str(s) => out.push(s),
                        other => self.diags.push(Diagnostic::error(
                            DiagCode::E109InvalidValue,
                            format!(
                                "attribute `{}` expects a list of strings, found {}",
                                key,
                                kind_of(&other)
                            ),
                            span,
                        )),
                    }
                }
                Some(out)
            }
            other => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("attribute `{}` expects a list, found {}", key, kind_of(&other)),
                    raw.span,
                ));
                None
            }
        }
    }

    fn check_unit_range(&mut self, value: f64, span: &SourceSpan, what: &str) -> bool {
        if !(0.0..=1.0).contains(&value) {
            self.diags.push(Diagnostic::error(
                DiagCode::E109InvalidValue,
                format!("{} must lie in [0, 1], got {}", what, value),
                span.clone(),
            ));
            false
        } else {
            true
        }
    }

    fn declare<T>(
        &mut self,
        map: &mut IndexMap<String, T>,
        name: String,
        span: &SourceSpan,
        namespace: &str,
        value: T,
    ) {
        if map.contains_key(&name) {
            self.diags.push(Diagnostic::error(
                DiagCode::E105DuplicateName,
                format!("duplicate {} name `{}`", namespace, name),
                span.clone(),
            ));
        } else {
            map.insert(name, value);
        }
    }

    // -- blocks --------------------------------------------------------------

    fn parse_signal(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Signal)?;
        let (kind_word, kind_span) = self.expect_ident("signal kind")?;
        let Some(kind) = SignalKind::parse(&kind_word) else {
            self.diags.push(Diagnostic::error(
                DiagCode::E106UnknownSignalKind,
                format!(
                    "unknown signal kind `{}` (expected one of jailbreak, pii, embedding, authz, keyword, complexity)",
                    kind_word
                ),
                kind_span,
            ));
            return Err(Recover);
        };
        let (name, name_span) = self.expect_ident("signal name")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        let span = kw_span.merge(&block_span);

        self.unknown_attrs(
            &attrs,
            &[
                "threshold",
                "model",
                "candidates",
                "pii_types_allowed",
                "subjects",
                "role",
            ],
            "SIGNAL",
        );

        let threshold = self.take_number(&mut attrs, "threshold").and_then(|(v, s)| {
            self.check_unit_range(v, &s, "threshold").then_some(v)
        });
        let model = self.take_string(&mut attrs, "model").map(|(s, _)| s);
        let candidates = self.take_string_list(&mut attrs, "candidates").unwrap_or_default();
        let pii_types_allowed = self
            .take_string_list(&mut attrs, "pii_types_allowed")
            .unwrap_or_default();
        let role = self.take_string(&mut attrs, "role").map(|(s, _)| s);
        let subjects = self.take_subjects(&mut attrs);

        let field_error = |parser: &mut Self, msg: String| {
            parser
                .diags
                .push(Diagnostic::error(DiagCode::E107SignalFields, msg, name_span.clone()));
        };
        match kind {
            SignalKind::Embedding => {
                if candidates.is_empty() {
                    field_error(
                        self,
                        format!("embedding signal `{}` requires nonempty candidates", name),
                    );
                }
            }
            SignalKind::Authz => {
                if role.is_none() {
                    field_error(self, format!("authz signal `{}` requires a role", name));
                }
            }
            _ => {}
        }
        if kind != SignalKind::Embedding && !candidates.is_empty() {
            field_error(
                self,
                format!("`candidates` is only valid on embedding signals (`{}`)", name),
            );
        }
        if kind != SignalKind::Pii && !pii_types_allowed.is_empty() {
            field_error(
                self,
                format!("`pii_types_allowed` is only valid on pii signals (`{}`)", name),
            );
        }
        if kind != SignalKind::Authz && (role.is_some() || !subjects.is_empty()) {
            field_error(
                self,
                format!("`subjects`/`role` are only valid on authz signals (`{}`)", name),
            );
        }
        if threshold.is_none() && kind != SignalKind::Authz {
            field_error(
                self,
                format!("{} signal `{}` requires a threshold", kind, name),
            );
        }
        if model.is_none() && !matches!(kind, SignalKind::Authz | SignalKind::Keyword) {
            field_error(self, format!("{} signal `{}` requires a model", kind, name));
        }

        let signal = Signal {
            name: name.clone(),
            kind,
            threshold,
            model,
            candidates,
            pii_types_allowed,
            subjects,
            role,
            span,
        };
        self.declare(&mut policy.signals, name, &name_span, "signal", signal);
        Ok(())
    }

    fn take_subjects(&mut self, attrs: &mut AttrMap) -> Vec<Subject> {
        let Some(raw) = attrs.shift_remove("subjects") else {
            return Vec::new();
        };
        let AttrValue::List(items) = raw.value else {
            self.diags.push(Diagnostic::error(
                DiagCode::E109InvalidValue,
                "attribute `subjects` expects a list of objects",
                raw.span,
            ));
            return Vec::new();
        };
        let mut out = Vec::new();
        for (item, span) in items.into_iter().zip(raw.element_spans) {
            let AttrValue::Object(map) = item else {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    "each subject must be an object with `kind` and `name`",
                    span,
                ));
                continue;
            };
            let kind = map.get("kind").and_then(as_string);
            let name = map.get("name").and_then(as_string);
            match (kind, name) {
                (Some(kind), Some(name)) => out.push(Subject { kind, name }),
                _ => self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    "each subject must carry string `kind` and `name`",
                    span,
                )),
            }
        }
        out
    }

    fn parse_group(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::SignalGroup)?;
        let (name, name_span) = self.expect_ident("signal group name")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        let span = kw_span.merge(&block_span);

        self.unknown_attrs(
            &attrs,
            &["signals", "temperature", "firing_threshold", "tie_break"],
            "SIGNAL_GROUP",
        );

        let (members, member_spans) = match attrs.shift_remove("signals") {
            Some(raw) => match raw.value {
                AttrValue::List(items) => {
                    let mut members = Vec::new();
                    let mut spans = Vec::new();
                    for (item, span) in items.into_iter().zip(raw.element_spans) {
                        match item {
                            AttrValue::Ident(i) => {
                                members.push(i);
                                spans.push(span);
                            }
                            AttrValue::Str(s) => {
                                members.push(s);
                                spans.push(span);
                            }
                            other => self.diags.push(Diagnostic::error(
                                DiagCode::E109InvalidValue,
                                format!("group members must be signal names, found {}", kind_of(&other)),
                                span,
                            )),
                        }
                    }
                    (members, spans)
                }
                _ => {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        "attribute `signals` expects a list of signal names",
                        raw.span,
                    ));
                    (Vec::new(), Vec::new())
                }
            },
            None => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("signal group `{}` requires a `signals` list", name),
                    name_span.clone(),
                ));
                (Vec::new(), Vec::new())
            }
        };
        if !members.is_empty() && members.len() < 2 {
            self.diags.push(Diagnostic::error(
                DiagCode::E109InvalidValue,
                format!(
                    "signal group `{}` needs at least two members, got {}",
                    name,
                    members.len()
                ),
                name_span.clone(),
            ));
        }

        let temperature = match self.take_number(&mut attrs, "temperature") {
            Some((v, s)) => {
                if v <= 0.0 {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        format!("temperature must be positive, got {}", v),
                        s,
                    ));
                    0.1
                } else {
                    v
                }
            }
            None => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("signal group `{}` requires a temperature", name),
                    name_span.clone(),
                ));
                0.1
            }
        };

        let firing_threshold = self
            .take_number(&mut attrs, "firing_threshold")
            .and_then(|(v, s)| self.check_unit_range(v, &s, "firing_threshold").then_some(v));

        let tie_break = match attrs.shift_remove("tie_break") {
            None => TieBreak::None,
            Some(raw) => match &raw.value {
                AttrValue::Ident(i) | AttrValue::Str(i) if i == "none" => TieBreak::None,
                AttrValue::Ident(i) | AttrValue::Str(i) if i == "priority_order" => {
                    TieBreak::PriorityOrder
                }
                other => {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        format!(
                            "tie_break must be `none` or `priority_order`, found {}",
                            kind_of(other)
                        ),
                        raw.span,
                    ));
                    TieBreak::None
                }
            },
        };

        let group = SignalGroup {
            name: name.clone(),
            members,
            member_spans,
            temperature,
            firing_threshold,
            tie_break,
            span,
        };
        self.declare(
            &mut policy.signal_groups,
            name,
            &name_span,
            "signal group",
            group,
        );
        Ok(())
    }

    fn parse_tree(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::DecisionTree)?;
        let (name, name_span) = self.expect_ident("decision tree name")?;
        self.expect(&TokenKind::LBrace, "`{`")?;

        let mut branches = Vec::new();
        let mut else_backend = None;
        let mut else_span = name_span.clone();

        self.expect_keyword(Keyword::If)?;
        loop {
            let cond_start = self.here_span();
            let condition = self.parse_condition()?;
            let (backend, backend_span) = self.parse_backend_arm()?;
            branches.push(Branch {
                condition,
                backend,
                span: cond_start.merge(&backend_span),
            });

            match self.peek() {
                Some(Token {
                    kind: TokenKind::Kw(Keyword::Else),
                    span,
                }) => {
                    let else_kw_span = span.clone();
                    self.pos += 1;
                    if matches!(
                        self.peek(),
                        Some(Token {
                            kind: TokenKind::Kw(Keyword::If),
                            ..
                        })
                    ) {
                        self.pos += 1;
                        continue;
                    }
                    let (backend, backend_span) = self.parse_backend_arm()?;
                    else_backend = Some(backend);
                    else_span = else_kw_span.merge(&backend_span);
                    break;
                }
                _ => break,
            }
        }

        let close = self.expect(&TokenKind::RBrace, "`}`")?;
        let span = kw_span.merge(&close);
        if else_backend.is_none() {
            self.diags.push(Diagnostic::error(
                DiagCode::E010MissingElse,
                format!("decision tree `{}` lacks a final ELSE branch", name),
                span.clone(),
            ));
        }
        let tree = DecisionTree {
            name: name.clone(),
            branches,
            else_backend,
            else_span,
            span,
        };
        self.declare(
            &mut policy.decision_trees,
            name,
            &name_span,
            "decision tree",
            tree,
        );
        Ok(())
    }

    /// `{ BACKEND name }`
    fn parse_backend_arm(&mut self) -> PResult<(String, SourceSpan)> {
        self.expect(&TokenKind::LBrace, "`{`")?;
        self.expect_keyword(Keyword::Backend)?;
        let (name, _) = self.expect_ident("backend name")?;
        let close = self.expect(&TokenKind::RBrace, "`}`")?;
        Ok((name, close))
    }

    // Condition grammar: NOT binds tighter than AND, AND tighter than OR.
    fn parse_condition(&mut self) -> PResult<ConditionExpr> {
        let mut left = self.parse_and()?;
        while matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Kw(Keyword::Or),
                ..
            })
        ) {
            self.pos += 1;
            let right = self.parse_and()?;
            left = ConditionExpr::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> PResult<ConditionExpr> {
        let mut left = self.parse_not()?;
        while matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Kw(Keyword::And),
                ..
            })
        ) {
            self.pos += 1;
            let right = self.parse_not()?;
            left = ConditionExpr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> PResult<ConditionExpr> {
        if matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::Kw(Keyword::Not),
                ..
            })
        ) {
            self.pos += 1;
            let inner = self.parse_not()?;
            return Ok(ConditionExpr::Not(Box::new(inner)));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> PResult<ConditionExpr> {
        match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                self.pos += 1;
                let inner = self.parse_condition()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token {
                kind: TokenKind::Ident(word),
                span: kind_span,
            }) => {
                self.pos += 1;
                let Some(kind) = SignalKind::parse(&word) else {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E106UnknownSignalKind,
                        format!("unknown signal kind `{}` in condition", word),
                        kind_span,
                    ));
                    return Err(Recover);
                };
                self.expect(&TokenKind::LParen, "`(`")?;
                let name_token = self.peek().cloned();
                let (name, name_span) = match name_token {
                    Some(Token {
                        kind: TokenKind::Str(s),
                        span,
                    }) => {
                        self.pos += 1;
                        (s, span)
                    }
                    _ => {
                        return Err(self.error_here(
                            "signal references are written kind(\"name\") with a quoted name",
                        ))
                    }
                };
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(ConditionExpr::SignalRef {
                    kind,
                    name,
                    span: kind_span.merge(&name_span),
                })
            }
            Some(t) => {
                let found = t.kind.describe();
                Err(self.error_here(format!(
                    "expected a signal reference or `(`, found {}",
                    found
                )))
            }
            None => Err(self.error_here("expected a condition, found end of file")),
        }
    }

    fn parse_route(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Route)?;
        let (name, name_span) = self.expect_ident("route name")?;
        self.expect(&TokenKind::LBrace, "`{`")?;

        self.expect_keyword(Keyword::Priority)?;
        let priority = match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Number(v, _),
                span,
            }) => {
                self.pos += 1;
                if v.fract() != 0.0 {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        format!("priority must be an integer, got {}", v),
                        span,
                    ));
                }
                v as i64
            }
            _ => return Err(self.error_here("PRIORITY expects an integer")),
        };

        self.expect_keyword(Keyword::When)?;
        let when = self.parse_condition()?;

        self.expect_keyword(Keyword::Model)?;
        let model = match self.peek().cloned() {
            Some(Token {
                kind: TokenKind::Str(s),
                ..
            }) => {
                self.pos += 1;
                s
            }
            Some(Token {
                kind: TokenKind::Ident(i),
                ..
            }) => {
                self.pos += 1;
                i
            }
            _ => return Err(self.error_here("MODEL expects a backend name")),
        };

        let mut params = IndexMap::new();
        if matches!(
            self.peek(),
            Some(Token {
                kind: TokenKind::LParen,
                ..
            })
        ) {
            self.pos += 1;
            loop {
                if matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokenKind::RParen,
                        ..
                    })
                ) {
                    self.pos += 1;
                    break;
                }
                let (key, _) = self.expect_ident("parameter name")?;
                self.expect(&TokenKind::Equals, "`=`")?;
                let value = match self.peek().cloned() {
                    Some(Token {
                        kind: TokenKind::Str(s),
                        ..
                    }) => {
                        self.pos += 1;
                        ParamValue::Str(s)
                    }
                    Some(Token {
                        kind: TokenKind::Number(v, _),
                        ..
                    }) => {
                        self.pos += 1;
                        ParamValue::Number(v)
                    }
                    Some(Token {
                        kind: TokenKind::Bool(b),
                        ..
                    }) => {
                        self.pos += 1;
                        ParamValue::Bool(b)
                    }
                    Some(Token {
                        kind: TokenKind::Ident(i),
                        ..
                    }) => {
                        self.pos += 1;
                        ParamValue::Ident(i)
                    }
                    _ => return Err(self.error_here("expected a parameter value")),
                };
                params.insert(key, value);
                if matches!(
                    self.peek(),
                    Some(Token {
                        kind: TokenKind::Comma,
                        ..
                    })
                ) {
                    self.pos += 1;
                }
            }
        }

        let close = self.expect(&TokenKind::RBrace, "`}`")?;
        let route = Route {
            name: name.clone(),
            priority,
            when,
            model,
            params,
            span: kw_span.merge(&close),
        };
        if policy.routes.iter().any(|r| r.name == name) {
            self.diags.push(Diagnostic::error(
                DiagCode::E105DuplicateName,
                format!("duplicate route name `{}`", name),
                name_span,
            ));
        } else {
            policy.routes.push(route);
        }
        Ok(())
    }

    fn parse_backend(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Backend)?;
        let (name, name_span) = self.expect_ident("backend name")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        self.unknown_attrs(&attrs, &["kind", "target"], "BACKEND");

        let kind = match self.take_string(&mut attrs, "kind") {
            Some((s, span)) => match s.as_str() {
                "model" => BackendKind::Model,
                "action" => BackendKind::Action,
                other => {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        format!("backend kind must be \"model\" or \"action\", got \"{}\"", other),
                        span,
                    ));
                    BackendKind::Model
                }
            },
            None => BackendKind::Model,
        };
        let target = self
            .take_string(&mut attrs, "target")
            .map(|(s, _)| s)
            .unwrap_or_default();

        let backend = Backend {
            name: name.clone(),
            kind,
            target,
            span: kw_span.merge(&block_span),
        };
        self.declare(&mut policy.backends, name, &name_span, "backend", backend);
        Ok(())
    }

    fn parse_network(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Network)?;
        let (name, name_span) = self.expect_ident("network name")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        self.unknown_attrs(&attrs, &["host", "port", "methods", "paths", "skill"], "NETWORK");

        let host = self.take_string(&mut attrs, "host").map(|(s, _)| s);
        let port = self.take_number(&mut attrs, "port").and_then(|(v, s)| {
            if v.fract() != 0.0 || !(1.0..=65535.0).contains(&v) {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("port must be an integer in 1..=65535, got {}", v),
                    s,
                ));
                None
            } else {
                Some(v as u16)
            }
        });
        let methods = self.take_string_list(&mut attrs, "methods").unwrap_or_default();
        let paths = self.take_string_list(&mut attrs, "paths").unwrap_or_default();
        let skill = self.take_string(&mut attrs, "skill").and_then(|(s, span)| {
            if s.is_empty() {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    "network skill must be nonempty",
                    span,
                ));
                None
            } else {
                Some(s)
            }
        });

        let (Some(host), Some(port), Some(skill)) = (host, port, skill) else {
            self.diags.push(Diagnostic::error(
                DiagCode::E109InvalidValue,
                format!("network `{}` requires host, port, and skill", name),
                name_span,
            ));
            return Ok(());
        };

        let endpoint = NetworkEndpoint {
            name: name.clone(),
            host,
            port,
            methods,
            paths,
            skill,
            span: kw_span.merge(&block_span),
        };
        self.declare(&mut policy.networks, name, &name_span, "network", endpoint);
        Ok(())
    }

    fn parse_agent(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Agent)?;
        let (name, name_span) = self.expect_ident("agent id")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        self.unknown_attrs(&attrs, &["model", "skills", "sandbox_mode", "workspace"], "AGENT");

        let model = match self.take_string(&mut attrs, "model") {
            Some((s, _)) => s,
            None => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("agent `{}` requires a model", name),
                    name_span.clone(),
                ));
                String::new()
            }
        };
        let skills = self.take_string_list(&mut attrs, "skills").unwrap_or_default();
        let sandbox_mode = match self.take_string(&mut attrs, "sandbox_mode") {
            Some((s, span)) => SandboxMode::parse(&s).unwrap_or_else(|| {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("sandbox_mode must be one of all, non-main, off; got \"{}\"", s),
                    span,
                ));
                SandboxMode::All
            }),
            None => SandboxMode::All,
        };
        let workspace = self.take_string(&mut attrs, "workspace").map(|(s, _)| s);

        let agent = AgentDef {
            id: name.clone(),
            model,
            skills,
            sandbox_mode,
            workspace,
            span: kw_span.merge(&block_span),
        };
        self.declare(&mut policy.agents, name, &name_span, "agent", agent);
        Ok(())
    }

    fn parse_deploy(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Deploy)?;
        let (name, name_span) = self.expect_ident("deploy target")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        self.unknown_attrs(
            &attrs,
            &["sandbox_mode", "workspace", "replicas", "cpu", "memory", "image"],
            "DEPLOY",
        );

        let sandbox_mode = self.take_string(&mut attrs, "sandbox_mode").and_then(|(s, span)| {
            SandboxMode::parse(&s).or_else(|| {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("sandbox_mode must be one of all, non-main, off; got \"{}\"", s),
                    span,
                ));
                None
            })
        });
        let workspace = self.take_string(&mut attrs, "workspace").map(|(s, _)| s);
        let replicas = self.take_number(&mut attrs, "replicas").and_then(|(v, s)| {
            if v.fract() != 0.0 || v < 0.0 {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("replicas must be a non-negative integer, got {}", v),
                    s,
                ));
                None
            } else {
                Some(v as u32)
            }
        });
        let cpu = self.take_string(&mut attrs, "cpu").map(|(s, _)| s);
        let memory = self.take_string(&mut attrs, "memory").map(|(s, _)| s);
        let image = self.take_string(&mut attrs, "image").map(|(s, _)| s);

        let deploy = DeployDef {
            agent: name.clone(),
            sandbox_mode,
            workspace,
            replicas,
            cpu,
            memory,
            image,
            span: kw_span.merge(&block_span),
        };
        self.declare(&mut policy.deploys, name, &name_span, "deploy", deploy);
        Ok(())
    }

    fn parse_test(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Test)?;
        let (name, name_span) = self.expect_ident("test name")?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        self.unknown_attrs(&attrs, &["input", "user_roles", "expect"], "TEST");

        let input = match self.take_string(&mut attrs, "input") {
            Some((s, _)) => s,
            None => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("test `{}` requires an input", name),
                    name_span.clone(),
                ));
                String::new()
            }
        };
        let user_roles = self.take_string_list(&mut attrs, "user_roles").unwrap_or_default();
        let expected_decision = match attrs.shift_remove("expect") {
            Some(raw) => match &raw.value {
                AttrValue::Object(map) => match map.get("decision").and_then(as_string) {
                    Some(d) => d,
                    None => {
                        self.diags.push(Diagnostic::error(
                            DiagCode::E109InvalidValue,
                            "expect block requires a string `decision`",
                            raw.span,
                        ));
                        String::new()
                    }
                },
                _ => {
                    self.diags.push(Diagnostic::error(
                        DiagCode::E109InvalidValue,
                        "expect must be an object like { decision: \"allow\" }",
                        raw.span,
                    ));
                    String::new()
                }
            },
            None => {
                self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("test `{}` requires an expect block", name),
                    name_span.clone(),
                ));
                String::new()
            }
        };

        let case = TestCase {
            name: name.clone(),
            input,
            user_roles,
            expected_decision,
            span: kw_span.merge(&block_span),
        };
        if policy.tests.iter().any(|t| t.name == name) {
            self.diags.push(Diagnostic::error(
                DiagCode::E105DuplicateName,
                format!("duplicate test name `{}`", name),
                name_span,
            ));
        } else {
            policy.tests.push(case);
        }
        Ok(())
    }

    fn parse_global(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Global)?;
        let (mut attrs, block_span) = self.parse_attr_block()?;
        let span = kw_span.merge(&block_span);

        if policy.global.span.is_some() {
            self.diags.push(Diagnostic::error(
                DiagCode::E105DuplicateName,
                "multiple GLOBAL blocks",
                span.clone(),
            ));
            return Ok(());
        }
        policy.global.span = Some(span);

        if let Some((v, _)) = self.take_string(&mut attrs, "version") {
            policy.version = v;
        }
        if let Some(raw) = attrs.shift_remove("default_backend") {
            match &raw.value {
                AttrValue::Ident(i) => policy.global.default_backend = Some(i.clone()),
                AttrValue::Str(s) => policy.global.default_backend = Some(s.clone()),
                other => self.diags.push(Diagnostic::error(
                    DiagCode::E109InvalidValue,
                    format!("default_backend expects a backend name, found {}", kind_of(other)),
                    raw.span,
                )),
            }
        }
        for (key, raw) in attrs {
            policy.global.defaults.insert(key, raw.value);
        }
        Ok(())
    }

    fn parse_plugin(&mut self, policy: &mut Policy) -> PResult<()> {
        let kw_span = self.expect_keyword(Keyword::Plugin)?;
        let (name, name_span) = self.expect_ident("plugin name")?;
        let (attrs, block_span) = self.parse_attr_block()?;
        let plugin = PluginBlock {
            name: name.clone(),
            attrs: attrs.into_iter().map(|(k, raw)| (k, raw.value)).collect(),
            span: kw_span.merge(&block_span),
        };
        self.declare(&mut policy.plugins, name, &name_span, "plugin", plugin);
        Ok(())
    }
}

fn as_string(v: &AttrValue) -> Option<String> {
    match v {
        AttrValue::Str(s) => Some(s.clone()),
        _ => None,
    }
}

fn kind_of(v: &AttrValue) -> &'static str {
    match v {
        AttrValue::Str(_) => "a string",
        AttrValue::Number(_) => "a number",
        AttrValue::Bool(_) => "a boolean",
        AttrValue::Ident(_) => "an identifier",
        AttrValue::List(_) => "a list",
        AttrValue::Object(_) => "an object",
    }
}
