//! Flat key-value documents with dotted section names.
//!
//! ```text
//! # comment
//! mode = poisson_quantum
//! poisson.R = 500e-9      # trailing comments are allowed
//! particle.name = "Au100"
//! ```
//!
//! One `key = value` pair per line. Keys are dot-separated identifiers
//! (`[A-Za-z_][A-Za-z0-9_-]*`). Values run to the end of the line or to an
//! unquoted `#`; a value wrapped in double quotes is taken verbatim.
//! Duplicate keys are an error. Both the scenario configs and the shipped
//! species table use this format.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based line of the entry.
    pub line: usize,
    /// 1-based column where the value starts.
    pub column: usize,
}

fn parse_error(line: usize, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        msg: msg.into(),
    }
}

fn valid_segment(seg: &str) -> bool {
    let mut chars = seg.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

pub fn parse_document(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(eq) = line.find('=') else {
            let col = line.len() - trimmed.len() + 1;
            return Err(parse_error(line_no, col, "expected `key = value`"));
        };
        let key_part = &line[..eq];
        let key = key_part.trim();
        let key_col = key_part.len() - key_part.trim_start().len() + 1;
        if key.is_empty() {
            return Err(parse_error(line_no, key_col, "missing key before `=`"));
        }
        if !key.split('.').all(valid_segment) {
            return Err(parse_error(
                line_no,
                key_col,
                format!("invalid key `{key}`"),
            ));
        }

        let rest = &line[eq + 1..];
        let value_offset = eq + 1 + (rest.len() - rest.trim_start().len());
        let column = value_offset + 1;
        let rest = rest.trim_start();
        let value = if let Some(quoted) = rest.strip_prefix('"') {
            let Some(end) = quoted.find('"') else {
                return Err(parse_error(line_no, column, "unterminated string"));
            };
            let tail = quoted[end + 1..].trim();
            if !(tail.is_empty() || tail.starts_with('#')) {
                return Err(parse_error(
                    line_no,
                    column + end + 2,
                    "unexpected text after quoted value",
                ));
            }
            quoted[..end].to_string()
        } else {
            let v = match rest.find('#') {
                Some(h) => &rest[..h],
                None => rest,
            };
            v.trim_end().to_string()
        };
        if value.is_empty() {
            return Err(parse_error(
                line_no,
                column,
                format!("missing value for `{key}`"),
            ));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(parse_error(
                line_no,
                key_col,
                format!(
                    "duplicate key `{key}` (first defined on line {})",
                    prev.line
                ),
            ));
        }
        entries.push(Entry {
            key: key.to_string(),
            value,
            line: line_no,
            column,
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_quotes() {
        let doc = "# header\n\nmode = farfield\npoisson.R = 5e-7  # radius\nparticle.name = \"Au # 100\"\r\n";
        let e = parse_document(doc).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].key, "mode");
        assert_eq!(e[0].value, "farfield");
        assert_eq!((e[0].line, e[0].column), (3, 8));
        assert_eq!(e[1].value, "5e-7");
        assert_eq!(e[2].value, "Au # 100");
    }

    #[test]
    fn reports_positions() {
        let err = parse_document("a = 1\n  b 2\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 2,
                column: 3,
                msg: "expected `key = value`".into()
            }
        );
        let err = parse_document("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                line: 2,
                column: 1,
                ..
            }
        ));
        assert!(matches!(
            parse_document("x.1y = 3").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_document("x =   # nothing").unwrap_err(),
            Error::Parse {
                line: 1,
                column: 7,
                ..
            }
        ));
        assert!(parse_document("x = \"open").is_err());
    }

    #[test]
    fn empty_document_has_no_entries() {
        assert!(parse_document("").unwrap().is_empty());
        assert!(parse_document("# only a comment\n\n").unwrap().is_empty());
    }
}
