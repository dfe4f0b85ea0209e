//! Token-list command templates with `{name}` placeholders.
//!
//! Templates are argument vectors, never shell strings: each token is rendered
//! independently and passed to the child as one argument.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommandTemplate(Vec<String>);

/// One piece of a token: literal text or a placeholder name.
#[derive(Debug, PartialEq, Eq)]
enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn pieces(token: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = token;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}').map(|c| open + c) else {
            break;
        };
        let name = &rest[open + 1..close];
        if !is_ident(name) {
            // Not a placeholder (e.g. literal JSON braces); keep scanning after '{'.
            out.push(Piece::Text(&rest[..open + 1]));
            rest = &rest[open + 1..];
            continue;
        }
        if open > 0 {
            out.push(Piece::Text(&rest[..open]));
        }
        out.push(Piece::Slot(name));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

impl CommandTemplate {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CommandTemplate(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    /// How many times `{name}` occurs across all tokens.
    pub fn count(&self, name: &str) -> usize {
        self.0
            .iter()
            .flat_map(|t| pieces(t))
            .filter(|p| matches!(p, Piece::Slot(n) if *n == name))
            .count()
    }

    /// Every placeholder name must belong to `known`.
    pub fn check_known(&self, known: &[&str]) -> Result<()> {
        for token in &self.0 {
            for piece in pieces(token) {
                if let Piece::Slot(name) = piece {
                    if !known.contains(&name) {
                        return Err(Error::Template(format!("unknown placeholder {{{name}}}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<Vec<String>> {
        if self.0.is_empty() {
            return Err(Error::Template("empty command".into()));
        }
        self.0
            .iter()
            .map(|token| {
                let mut s = String::with_capacity(token.len());
                for piece in pieces(token) {
                    match piece {
                        Piece::Text(t) => s.push_str(t),
                        Piece::Slot(name) => match values.get(name) {
                            Some(v) => s.push_str(v),
                            None => {
                                return Err(Error::Template(format!(
                                    "unknown placeholder {{{name}}}"
                                )))
                            }
                        },
                    }
                }
                Ok(s)
            })
            .collect()
    }
}
