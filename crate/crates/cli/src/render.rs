use std::io::Write;

use ogp_core::obligation::{Obligation, Verdict};
use ogp_core::predicate::Universe;

use crate::Format;

/// Buffers a report in one of the two output formats. Machine records are
/// `key: value` lines separated by blank lines; human text is free-form.
pub struct Sink {
    format: Format,
    buf: String,
    errors: String,
}

impl Sink {
    pub fn new(format: Format) -> Self {
        Sink { format, buf: String::new(), errors: String::new() }
    }

    pub fn machine(&self) -> bool {
        self.format == Format::Machine
    }

    /// Human-only text.
    pub fn say(&mut self, line: impl AsRef<str>) {
        if !self.machine() {
            self.buf.push_str(line.as_ref());
            self.buf.push('\n');
        }
    }

    /// Machine-only record. Multi-line values are folded onto one line.
    pub fn record(&mut self, fields: &[(&str, String)]) {
        if self.machine() {
            for (k, v) in fields {
                self.buf.push_str(k);
                self.buf.push_str(": ");
                self.buf.push_str(&v.replace('\n', " | "));
                self.buf.push('\n');
            }
            self.buf.push('\n');
        }
    }

    /// Verbatim text in either format.
    pub fn raw(&mut self, text: &str) {
        self.buf.push_str(text);
        if !text.ends_with('\n') {
            self.buf.push('\n');
        }
    }

    pub fn error(&mut self, msg: impl std::fmt::Display) {
        self.errors.push_str(&format!("error: {msg}\n"));
        self.record(&[("error", msg.to_string())]);
    }

    pub fn flush(&mut self) {
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(self.buf.as_bytes());
        let _ = stdout.flush();
        let _ = std::io::stderr().write_all(self.errors.as_bytes());
        self.buf.clear();
        self.errors.clear();
    }
}

pub fn counterexample(universe: &Universe, v: &Verdict) -> Option<String> {
    match v {
        Verdict::Invalid(val) => Some(universe.render(val)),
        _ => None,
    }
}

pub fn detail(v: &Verdict) -> Option<&str> {
    match v {
        Verdict::Pending(s) | Verdict::Capped(s) | Verdict::Error(s) => Some(s),
        _ => None,
    }
}

/// One obligation: a machine record, and a human line (plus the formula when
/// `verbose`, and the counterexample when invalid).
pub fn obligation(out: &mut Sink, universe: &Universe, file: &str, scope: &str, o: &Obligation, verbose: bool) {
    let cex = counterexample(universe, &o.verdict);
    let mut fields = vec![
        ("file", file.to_string()),
        ("scope", scope.to_string()),
        ("id", o.id.clone()),
        ("kind", o.kind.tag().to_string()),
        ("verdict", o.verdict.word().to_string()),
        ("provenance", o.provenance.clone()),
        ("formula", o.formula.to_string()),
    ];
    if let Some(c) = &cex {
        fields.push(("counterexample", c.clone()));
    }
    if let Some(d) = detail(&o.verdict) {
        fields.push(("detail", d.to_string()));
    }
    out.record(&fields);
    if verbose || !o.verdict.is_valid() {
        out.say(format!("    {:<12} {}  ({})", o.verdict.word(), o.id, o.provenance));
        if verbose {
            out.say(format!("      formula: {}", o.formula));
        }
        if let Some(c) = cex {
            out.say(format!("      counterexample: {c}"));
        }
        if let Some(d) = detail(&o.verdict) {
            out.say(format!("      {d}"));
        }
    }
}

/// `n obligations, all valid` or `n obligations, k valid, ...` by verdict.
pub fn tally<'a>(obs: impl IntoIterator<Item = &'a Obligation>) -> String {
    let mut counts: Vec<(&'static str, usize)> = Vec::new();
    let mut total = 0;
    for o in obs {
        total += 1;
        let w = o.verdict.word();
        match counts.iter_mut().find(|(k, _)| *k == w) {
            Some((_, n)) => *n += 1,
            None => counts.push((w, 1)),
        }
    }
    let noun = if total == 1 { "obligation" } else { "obligations" };
    match counts.as_slice() {
        [] => format!("0 {noun}"),
        [("valid", _)] => format!("{total} {noun}, all valid"),
        _ => {
            let parts: Vec<String> = counts.iter().map(|(w, n)| format!("{n} {w}")).collect();
            format!("{total} {noun}: {}", parts.join(", "))
        }
    }
}
