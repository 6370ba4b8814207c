//! Deterministic text rendering shared by the emitters.
//!
//! [`Jv`] is a tiny ordered JSON-ish value that renders to both 2-space JSON
//! and 2-space block YAML, so artifacts that must agree structurally (the
//! routing config and the ConfigMap's embedded policy.json) are generated
//! from one tree. Numbers are carried pre-rendered so thresholds keep their
//! exact two-digit spelling in every format.

/// Ordered JSON-ish value; `Raw` carries pre-rendered numbers/booleans.
#[derive(Debug, Clone)]
pub enum Jv {
    Str(String),
    Raw(String),
    Arr(Vec<Jv>),
    Obj(Vec<(String, Jv)>),
}

impl Jv {
    pub fn str(s: impl Into<String>) -> Jv {
        Jv::Str(s.into())
    }

    pub fn raw(s: impl Into<String>) -> Jv {
        Jv::Raw(s.into())
    }

    pub fn strings<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Jv {
        Jv::Arr(items.into_iter().map(|s| Jv::Str(s.into())).collect())
    }

    pub fn render_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out, 0);
        out
    }

    fn write_json(&self, out: &mut String, level: usize) {
        match self {
            Jv::Str(s) => out.push_str(&json_str(s)),
            Jv::Raw(r) => out.push_str(r),
            Jv::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    out.push_str(&"  ".repeat(level + 1));
                    item.write_json(out, level + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(level));
                out.push(']');
            }
            Jv::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (key, value)) in fields.iter().enumerate() {
                    out.push_str(&"  ".repeat(level + 1));
                    out.push_str(&json_str(key));
                    out.push_str(": ");
                    value.write_json(out, level + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(level));
                out.push('}');
            }
        }
    }

    /// Block-style YAML document body (no leading `---`).
    pub fn render_yaml(&self) -> String {
        let mut out = String::new();
        match self {
            Jv::Obj(_) | Jv::Arr(_) => self.write_yaml_block(&mut out, 0),
            _ => {
                out.push_str(&self.yaml_scalar());
                out.push('\n');
            }
        }
        out
    }

    fn is_scalar(&self) -> bool {
        matches!(self, Jv::Str(_) | Jv::Raw(_))
    }

    fn yaml_scalar(&self) -> String {
        match self {
            Jv::Str(s) => yaml_str(s),
            Jv::Raw(r) => r.clone(),
            _ => unreachable!("yaml_scalar on composite"),
        }
    }

    fn write_yaml_block(&self, out: &mut String, level: usize) {
        let pad = "  ".repeat(level);
        match self {
            Jv::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str(&pad);
                    out.push_str("{}\n");
                    return;
                }
                for (key, value) in fields {
                    out.push_str(&pad);
                    out.push_str(&yaml_key(key));
                    out.push(':');
                    match value {
                        v if v.is_scalar() => {
                            out.push(' ');
                            out.push_str(&v.yaml_scalar());
                            out.push('\n');
                        }
                        Jv::Arr(items) if items.iter().all(Jv::is_scalar) => {
                            let inner: Vec<String> =
                                items.iter().map(Jv::yaml_scalar).collect();
                            out.push_str(&format!(" [{}]\n", inner.join(", ")));
                        }
                        Jv::Arr(items) if items.is_empty() => out.push_str(" []\n"),
                        Jv::Obj(fields) if fields.is_empty() => out.push_str(" {}\n"),
                        composite => {
                            out.push('\n');
                            composite.write_yaml_block(out, level + 1);
                        }
                    }
                }
            }
            Jv::Arr(items) => {
                if items.is_empty() {
                    out.push_str(&pad);
                    out.push_str("[]\n");
                    return;
                }
                for item in items {
                    match item {
                        v if v.is_scalar() => {
                            out.push_str(&pad);
                            out.push_str("- ");
                            out.push_str(&v.yaml_scalar());
                            out.push('\n');
                        }
                        Jv::Obj(fields) if !fields.is_empty() => {
                            // "- key: value" with continuation lines aligned.
                            let mut first = true;
                            for (key, value) in fields {
                                out.push_str(&pad);
                                out.push_str(if first { "- " } else { "  " });
                                first = false;
                                out.push_str(&yaml_key(key));
                                out.push(':');
                                match value {
                                    v if v.is_scalar() => {
                                        out.push(' ');
                                        out.push_str(&v.yaml_scalar());
                                        out.push('\n');
                                    }
                                    Jv::Arr(inner) if inner.iter().all(Jv::is_scalar) => {
                                        let items: Vec<String> =
                                            inner.iter().map(Jv::yaml_scalar).collect();
                                        out.push_str(&format!(" [{}]\n", items.join(", ")));
                                    }
                                    composite => {
                                        out.push('\n');
                                        composite.write_yaml_block(out, level + 2);
                                    }
                                }
                            }
                        }
                        other => {
                            out.push_str(&pad);
                            out.push_str("-\n");
                            other.write_yaml_block(out, level + 1);
                        }
                    }
                }
            }
            _ => unreachable!("write_yaml_block on scalar"),
        }
    }
}

/// JSON string literal with standard escapes; also used for Python and
/// TypeScript string literals.
pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// YAML scalar: strings are always double-quoted (JSON-style escapes are
/// valid YAML), which sidesteps the bare-scalar ambiguity rules.
pub fn yaml_str(s: &str) -> String {
    json_str(s)
}

fn yaml_key(key: &str) -> String {
    let bare = !key.is_empty()
        && key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '/' | '*'));
    if bare {
        key.to_string()
    } else {
        yaml_str(key)
    }
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Shortest round-trip rendering, used for derived constants like 1/k.
pub fn shortest(v: f64) -> String {
    format!("{}", v)
}

/// Underscores to hyphens, lowercased; applied to NETCONF instance names and
/// Kubernetes/gateway resource ids.
pub fn hyphenate(name: &str) -> String {
    name.to_lowercase().replace('_', "-")
}
