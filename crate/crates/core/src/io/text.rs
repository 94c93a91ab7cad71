//! Line-oriented sectioned key/value text.
//!
//! ```text
//! # comment
//! [measured]
//! r_s = 88e3 s^-1     # trailing comment
//! [system]
//! gate_period = 10 ns
//! ```
//!
//! A value is a number or a bare word, optionally followed by one unit
//! token. Times without a unit are nanoseconds.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct TextError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for TextError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, TextError> {
    Err(TextError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub unit: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, TextError> {
        let mut doc = Document::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return err(line, "section header is missing its closing ']'");
                };
                let name = name.trim();
                if !valid_name(name) {
                    return err(line, format!("bad section name '{name}'"));
                }
                if doc.section(name).is_some() {
                    return err(line, format!("section [{name}] appears twice"));
                }
                seen.clear();
                doc.sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let Some((key, rhs)) = content.split_once('=') else {
                return err(line, "expected 'key = value' or '[section]'");
            };
            let key = key.trim();
            if !valid_name(key) {
                return err(line, format!("bad key '{key}'"));
            }
            let Some(section) = doc.sections.last_mut() else {
                return err(line, format!("key '{key}' appears before any [section]"));
            };
            if !seen.insert(key.to_string()) {
                return err(line, format!("key '{key}' repeated in [{}]", section.name));
            }
            let mut tokens = rhs.split_whitespace();
            let Some(value) = tokens.next() else {
                return err(line, format!("key '{key}' has no value"));
            };
            let unit = tokens.next().map(str::to_string);
            if let Some(extra) = tokens.next() {
                return err(
                    line,
                    format!("unexpected '{extra}' after the unit of '{key}'"),
                );
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                unit,
                line,
            });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Errors on sections not in `allowed`.
    pub fn only_sections(&self, allowed: &[&str]) -> Result<(), TextError> {
        for s in &self.sections {
            if !allowed.contains(&s.name.as_str()) {
                return err(
                    s.line,
                    format!(
                        "unknown section [{}] (expected one of {})",
                        s.name,
                        allowed.join(", ")
                    ),
                );
            }
        }
        Ok(())
    }
}

/// Typed access to one section, tracking which keys were consumed.
pub struct Reader<'a> {
    name: &'a str,
    section: Option<&'a Section>,
    used: BTreeSet<&'a str>,
}

const TIME_UNITS: [(&str, f64); 6] = [
    ("s", 1.0),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("µs", 1e-6),
    ("ns", 1e-9),
    ("ps", 1e-12),
];

const RATE_UNITS: [&str; 5] = ["s^-1", "/s", "1/s", "Hz", "cps"];

impl<'a> Reader<'a> {
    pub fn new(doc: &'a Document, name: &'a str) -> Self {
        Reader {
            name,
            section: doc.section(name),
            used: BTreeSet::new(),
        }
    }

    pub fn exists(&self) -> bool {
        self.section.is_some()
    }

    fn entry(&mut self, key: &'a str) -> Option<&'a Entry> {
        let e = self.section?.entries.iter().find(|e| e.key == key)?;
        self.used.insert(key);
        Some(e)
    }

    fn missing(&self, key: &str) -> TextError {
        TextError {
            line: self.section.map_or(0, |s| s.line),
            message: format!("missing required key '{key}' in [{}]", self.name),
        }
    }

    fn number(e: &Entry) -> Result<f64, TextError> {
        match e.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => err(
                e.line,
                format!("'{}' for key '{}' is not a finite number", e.value, e.key),
            ),
        }
    }

    fn unitless(e: &Entry) -> Result<f64, TextError> {
        match e.unit.as_deref() {
            None => Self::number(e),
            Some("%") => Ok(Self::number(e)? / 100.0),
            Some(u) => err(
                e.line,
                format!("key '{}' is dimensionless, got unit '{u}'", e.key),
            ),
        }
    }

    fn rate(e: &Entry) -> Result<f64, TextError> {
        match e.unit.as_deref() {
            None => Self::number(e),
            Some(u) if RATE_UNITS.contains(&u) => Self::number(e),
            Some(u) => err(
                e.line,
                format!(
                    "key '{}' is a rate; unit '{u}' is not one of {}",
                    e.key,
                    RATE_UNITS.join(", ")
                ),
            ),
        }
    }

    fn time(e: &Entry) -> Result<f64, TextError> {
        let scale = match e.unit.as_deref() {
            None => 1e-9,
            Some(u) => match TIME_UNITS.iter().find(|(name, _)| *name == u) {
                Some((_, s)) => *s,
                None => {
                    return err(
                        e.line,
                        format!(
                            "key '{}' is a time; unit '{u}' is not one of s, ms, us, ns, ps",
                            e.key
                        ),
                    )
                }
            },
        };
        Ok(Self::number(e)? * scale)
    }

    pub fn required_number(&mut self, key: &'a str) -> Result<f64, TextError> {
        let e = self.entry(key).ok_or_else(|| self.missing(key))?;
        Self::unitless(e)
    }

    pub fn number_or(&mut self, key: &'a str, default: f64) -> Result<f64, TextError> {
        self.entry(key).map_or(Ok(default), Self::unitless)
    }

    pub fn required_rate(&mut self, key: &'a str) -> Result<f64, TextError> {
        let e = self.entry(key).ok_or_else(|| self.missing(key))?;
        Self::rate(e)
    }

    pub fn rate_or(&mut self, key: &'a str, default: f64) -> Result<f64, TextError> {
        self.entry(key).map_or(Ok(default), Self::rate)
    }

    pub fn required_time(&mut self, key: &'a str) -> Result<f64, TextError> {
        let e = self.entry(key).ok_or_else(|| self.missing(key))?;
        Self::time(e)
    }

    pub fn time_or(&mut self, key: &'a str, default: f64) -> Result<f64, TextError> {
        self.entry(key).map_or(Ok(default), Self::time)
    }

    pub fn word_or(
        &mut self,
        key: &'a str,
        default: &'a str,
    ) -> Result<(&'a str, usize), TextError> {
        match self.entry(key) {
            None => Ok((default, 0)),
            Some(e) if e.unit.is_some() => {
                err(e.line, format!("key '{}' takes a single word", e.key))
            }
            Some(e) => Ok((e.value.as_str(), e.line)),
        }
    }

    pub fn u64_or(&mut self, key: &'a str, default: u64) -> Result<u64, TextError> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => e.value.parse::<u64>().or_else(|_| {
                err(
                    e.line,
                    format!(
                        "'{}' for key '{}' is not an unsigned integer",
                        e.value, e.key
                    ),
                )
            }),
        }
    }

    /// Line of `key`, if present.
    pub fn line_of(&self, key: &str) -> usize {
        self.section
            .and_then(|s| s.entries.iter().find(|e| e.key == key))
            .map_or(0, |e| e.line)
    }

    /// Errors on keys never read.
    pub fn finish(self) -> Result<(), TextError> {
        if let Some(s) = self.section {
            for e in &s.entries {
                if !self.used.contains(e.key.as_str()) {
                    return err(
                        e.line,
                        format!("unknown key '{}' in [{}]", e.key, self.name),
                    );
                }
            }
        }
        Ok(())
    }
}

/// `value unit` with nine significant digits.
pub fn format_quantity(value: f64, unit: Option<&str>) -> String {
    let v = super::table::fmt_sig(value);
    match unit {
        Some(u) => format!("{v} {u}"),
        None => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_units_and_comments() {
        let doc = Document::parse(
            "# header\n[a]\nx = 1.5e3 s^-1 # note\n\ny = 10\n[b]\nt = 2 us\nw = cw\n",
        )
        .unwrap();
        let mut a = Reader::new(&doc, "a");
        assert_eq!(a.required_rate("x").unwrap(), 1500.0);
        assert_eq!(a.required_time("y").unwrap(), 10e-9);
        a.finish().unwrap();
        let mut b = Reader::new(&doc, "b");
        assert!((b.required_time("t").unwrap() - 2e-6).abs() < 1e-20);
        assert_eq!(b.word_or("w", "x").unwrap().0, "cw");
        b.finish().unwrap();
    }

    #[test]
    fn errors_carry_lines() {
        assert_eq!(Document::parse("x = 1").unwrap_err().line, 1);
        assert_eq!(Document::parse("[a]\n\n[a]").unwrap_err().line, 3);
        assert_eq!(Document::parse("[a]\nx 1").unwrap_err().line, 2);
        assert_eq!(Document::parse("[a]\nx = 1\nx = 2").unwrap_err().line, 3);
        let doc = Document::parse("[a]\nx = 1 kg\ny = nan\nz = 3").unwrap();
        let mut r = Reader::new(&doc, "a");
        assert_eq!(r.required_rate("x").unwrap_err().line, 2);
        assert_eq!(r.required_number("y").unwrap_err().line, 3);
        let e = r.required_number("missing").unwrap_err();
        assert!(e.message.contains("'missing'"));
        assert_eq!(r.finish().unwrap_err().line, 4);
    }

    #[test]
    fn percent_is_a_fraction() {
        let doc = Document::parse("[a]\nx = 40 %").unwrap();
        assert!((Reader::new(&doc, "a").required_number("x").unwrap() - 0.4).abs() < 1e-15);
    }
}
