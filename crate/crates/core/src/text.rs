//! Line-oriented text formats shared by every file the workbench reads.
//!
//! All inputs are plain text: one record per line, whitespace separated
//! tokens, `#` starts a comment. Parse failures carry a 1-based line and
//! column so they can be reported the way a compiler would.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn at(line: &Line<'_>, token: usize, message: impl Into<String>) -> Self {
        let column = line.tokens.get(token).map(|t| t.column).unwrap_or(line.end_column);
        ParseError::new(line.number, column, message)
    }

    /// Shifts the line number of an error raised inside an embedded block.
    pub fn offset(mut self, lines: usize) -> Self {
        self.line += lines;
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<Token<'a>>,
    pub end_column: usize,
}

impl<'a> Line<'a> {
    pub fn word(&self, i: usize) -> Option<&'a str> {
        self.tokens.get(i).map(|t| t.text)
    }

    pub fn expect(&self, i: usize, what: &str) -> Result<&'a str, ParseError> {
        self.word(i)
            .ok_or_else(|| ParseError::at(self, i, format!("expected {what}")))
    }

    /// Looks for a `key=value` token anywhere after position `from`.
    pub fn keyed(&self, from: usize, key: &str) -> Option<(usize, &'a str)> {
        self.tokens.iter().enumerate().skip(from).find_map(|(i, t)| {
            t.text
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix('='))
                .map(|v| (i, v))
        })
    }
}

/// Splits `text` into non-empty, comment-stripped lines of tokens.
pub(crate) fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut tokens = Vec::new();
        let mut start: Option<usize> = None;
        for (pos, ch) in content.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = start.take() {
                    tokens.push(Token {
                        text: &content[s..pos],
                        column: s + 1,
                    });
                }
            } else if start.is_none() {
                start = Some(pos);
            }
        }
        if let Some(s) = start {
            tokens.push(Token {
                text: &content[s..],
                column: s + 1,
            });
        }
        if !tokens.is_empty() {
            out.push(Line {
                number: idx + 1,
                tokens,
                end_column: content.len() + 1,
            });
        }
    }
    out
}

pub(crate) fn parse_usize(line: &Line<'_>, token: usize, text: &str) -> Result<usize, ParseError> {
    text.parse()
        .map_err(|_| ParseError::at(line, token, format!("expected a non-negative integer, got `{text}`")))
}

/// Parses `[a,b,c]` or `a,b,c` into integers; `[]` and `-` are empty.
pub(crate) fn parse_usize_list(line: &Line<'_>, token: usize, text: &str) -> Result<Vec<usize>, ParseError> {
    let inner = text.trim_start_matches('[').trim_end_matches(']');
    if inner.is_empty() || inner == "-" {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| parse_usize(line, token, s))
        .collect()
}

pub fn format_list(items: &[usize]) -> String {
    let parts: Vec<String> = items.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_with_columns_and_comments() {
        let ls = lines("  a < b  # cover\n\n# only comment\nc");
        assert_eq!(ls.len(), 2);
        assert_eq!(ls[0].number, 1);
        assert_eq!(ls[0].tokens[0].column, 3);
        assert_eq!(ls[0].word(2), Some("b"));
        assert_eq!(ls[1].number, 4);
    }

    #[test]
    fn parses_lists() {
        let ls = lines("x [1,0,2] []");
        assert_eq!(parse_usize_list(&ls[0], 1, "[1,0,2]").unwrap(), vec![1, 0, 2]);
        assert!(parse_usize_list(&ls[0], 2, "[]").unwrap().is_empty());
        let err = parse_usize_list(&ls[0], 1, "[1,z]").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
    }
}
