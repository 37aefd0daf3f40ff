//! SQL subset: AST, parsing, printing, validation, canonical keys and mutation.

mod ast;
mod canonical;
mod lexer;
mod mutate;
mod parser;
mod printer;
mod resolve;
mod validate;

use thiserror::Error;

pub use ast::*;
pub use canonical::{canonical_key, normal_form, skeleton_key};
pub use mutate::{mutate_query, mutate_query_with, EditKind, Mutation, MutationOutcome};
pub use parser::parse_sql;
pub use printer::{print_sql, Dialect};
pub use resolve::{ColumnSource, ResolveError, Resolved, Scope};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SqlError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported construct `{construct}` at byte {offset}")]
    Unsupported { construct: String, offset: usize },
}

impl SqlError {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        SqlError::Syntax {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(construct: impl Into<String>, offset: usize) -> Self {
        SqlError::Unsupported {
            construct: construct.into(),
            offset,
        }
    }
}

/// Splits provider output into candidate statements on `;` outside string
/// literals, dropping code fences and blank pieces.
pub fn split_statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_str = false;
    for line in text.lines() {
        if !in_str && line.trim_start().starts_with("```") {
            continue;
        }
        for ch in line.chars() {
            match ch {
                '\'' => {
                    in_str = !in_str;
                    cur.push(ch);
                }
                ';' if !in_str => {
                    push_piece(&mut out, &cur);
                    cur.clear();
                }
                _ => cur.push(ch),
            }
        }
        cur.push('\n');
    }
    push_piece(&mut out, &cur);
    out
}

fn push_piece(out: &mut Vec<String>, piece: &str) {
    let t = piece.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_semicolons_outside_strings() {
        let text = "```sql\nSELECT * FROM t WHERE a = 'x;y';\nSELECT 1 FROM u;\n```\n";
        assert_eq!(
            split_statements(text),
            vec!["SELECT * FROM t WHERE a = 'x;y'", "SELECT 1 FROM u"]
        );
    }
}
