//! Recursive-descent parser for the supported SQL subset.

use crate::sql::ast::*;
use crate::sql::lexer::{tokenize, Token, TokenKind};
use crate::sql::SqlError;
use crate::value::Value;

const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "AND", "OR", "NOT", "IN", "BETWEEN", "AS", "JOIN",
    "INNER", "ON", "ORDER", "LIMIT", "OFFSET", "HAVING", "UNION", "INTERSECT", "EXCEPT", "LEFT",
    "RIGHT", "FULL", "OUTER", "CROSS", "NATURAL", "DISTINCT", "LIKE", "IS", "NULL", "EXISTS",
    "WITH", "CASE", "USING", "ALL", "ANY", "WINDOW", "FETCH",
];

fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|r| r.eq_ignore_ascii_case(word))
}

/// Name of the unsupported construct a keyword introduces, if any.
fn unsupported_construct(word: &str) -> Option<&'static str> {
    let w = word.to_ascii_uppercase();
    Some(match w.as_str() {
        "ORDER" => "ORDER BY",
        "LIMIT" | "FETCH" => "LIMIT",
        "OFFSET" => "OFFSET",
        "HAVING" => "HAVING",
        "UNION" | "INTERSECT" | "EXCEPT" => "set operation",
        "LEFT" | "RIGHT" | "FULL" | "OUTER" | "NATURAL" => "OUTER JOIN",
        "CROSS" => "CROSS JOIN",
        "USING" => "JOIN USING",
        "DISTINCT" => "DISTINCT",
        "NOT" => "NOT",
        "LIKE" => "LIKE",
        "IS" | "NULL" => "NULL test",
        "EXISTS" => "EXISTS",
        "WITH" => "WITH clause",
        "CASE" => "CASE expression",
        "WINDOW" => "window function",
        "ALL" | "ANY" => "quantified comparison",
        "INSERT" | "UPDATE" | "DELETE" | "CREATE" | "DROP" | "ALTER" | "TRUNCATE" | "MERGE" => {
            "non-SELECT statement"
        }
        _ => return None,
    })
}

/// Parses a single SELECT statement (an optional trailing `;` is allowed).
pub fn parse_sql(text: &str) -> Result<QueryAst, SqlError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let q = p.query(0)?;
    while p.eat(|k| matches!(k, TokenKind::Semicolon)) {}
    if let Some(t) = p.peek() {
        return Err(p.unexpected(t.clone(), "end of statement"));
    }
    Ok(q)
}

enum Operand {
    Column(ColumnName),
    Literal(Value),
}

/// Parsed condition before join predicates are separated out.
enum Cond {
    Atom(Atom),
    ColumnsEqual(ColumnName, ColumnName, usize),
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Token> {
        self.tokens.get(self.pos + ahead)
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.offset).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, f: impl Fn(&TokenKind) -> bool) -> bool {
        if self.peek().is_some_and(|t| f(&t.kind)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, kw: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_word(kw)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_word(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_word(kw))
    }

    fn unexpected(&self, t: Token, expected: &str) -> SqlError {
        if let TokenKind::Word(w) = &t.kind {
            if let Some(c) = unsupported_construct(w) {
                return SqlError::unsupported(c, t.offset);
            }
        }
        if let TokenKind::Op(op @ ("/" | "%")) = t.kind {
            let _ = op;
            return SqlError::unsupported("arithmetic expression", t.offset);
        }
        SqlError::syntax(
            t.offset,
            format!("expected {expected}, found {}", t.describe()),
        )
    }

    fn expect_word(&mut self, kw: &str) -> Result<(), SqlError> {
        match self.bump() {
            Some(t) if t.is_word(kw) => Ok(()),
            Some(t) => Err(self.unexpected(t, &format!("`{kw}`"))),
            None => Err(SqlError::syntax(self.end, format!("expected `{kw}`, found end of input"))),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), SqlError> {
        match self.bump() {
            Some(t) if t.kind == kind => Ok(()),
            Some(t) => Err(self.unexpected(t, what)),
            None => Err(SqlError::syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SqlError> {
        match self.bump() {
            Some(Token {
                kind: TokenKind::QuotedIdent(s),
                ..
            }) => Ok(s),
            Some(Token {
                kind: TokenKind::Word(w),
                offset,
            }) if !is_reserved(&w) => {
                let _ = offset;
                Ok(w)
            }
            Some(t) => Err(self.unexpected(t, what)),
            None => Err(SqlError::syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn at_ident(&self) -> bool {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::QuotedIdent(_)) => true,
            Some(TokenKind::Word(w)) => !is_reserved(w),
            _ => false,
        }
    }

    fn query(&mut self, depth: usize) -> Result<QueryAst, SqlError> {
        self.expect_word("SELECT")?;
        if self.at_word("DISTINCT") {
            return Err(SqlError::unsupported("DISTINCT", self.offset()));
        }
        let projections = self.select_list()?;
        self.expect_word("FROM")?;
        let (from_tables, mut conds) = self.from_clause(depth)?;
        if self.eat_word("WHERE") {
            conds.push(self.or_cond(depth)?);
        }
        let mut group_by = Vec::new();
        if self.eat_word("GROUP") {
            self.expect_word("BY")?;
            loop {
                group_by.push(self.column_name()?);
                if !self.eat(|k| matches!(k, TokenKind::Comma)) {
                    break;
                }
            }
        }
        if let Some(t) = self.peek() {
            if let TokenKind::Word(w) = &t.kind {
                if let Some(c) = unsupported_construct(w) {
                    return Err(SqlError::unsupported(c, t.offset));
                }
            }
        }

        let mut join_predicates = Vec::new();
        let mut residual = Vec::new();
        for c in conds.into_iter().flat_map(flatten_and) {
            match c {
                Cond::ColumnsEqual(left, right, _) => join_predicates.push(JoinPredicate { left, right }),
                other => residual.push(into_predicate(other)?),
            }
        }
        Ok(QueryAst {
            projections,
            from_tables,
            join_predicates,
            where_clause: PredicateExpr::and(residual),
            group_by,
        })
    }

    fn select_list(&mut self) -> Result<Vec<SelectItem>, SqlError> {
        let mut items = Vec::new();
        loop {
            let item = if self.eat(|k| matches!(k, TokenKind::Star)) {
                Projection::Star
            } else if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Word(_)))
                && matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::LParen))
            {
                self.aggregate()?
            } else {
                let col = self.column_name()?;
                Projection::Column { column: col }
            };
            let alias = if item == Projection::Star {
                None
            } else if self.eat_word("AS") || self.at_ident() {
                Some(self.ident("alias")?)
            } else {
                None
            };
            items.push(SelectItem { item, alias });
            if !self.eat(|k| matches!(k, TokenKind::Comma)) {
                break;
            }
        }
        Ok(items)
    }

    fn aggregate(&mut self) -> Result<Projection, SqlError> {
        let Some(Token {
            kind: TokenKind::Word(name),
            offset,
        }) = self.bump()
        else {
            unreachable!("caller checked for a word");
        };
        let func = match name.to_ascii_uppercase().as_str() {
            "COUNT" => AggregateFn::Count,
            "SUM" => AggregateFn::Sum,
            "AVG" => AggregateFn::Avg,
            other => return Err(SqlError::unsupported(format!("function {other}"), offset)),
        };
        self.expect(TokenKind::LParen, "`(`")?;
        if self.at_word("DISTINCT") {
            return Err(SqlError::unsupported("DISTINCT", self.offset()));
        }
        let arg = if func == AggregateFn::Count && self.eat(|k| matches!(k, TokenKind::Star)) {
            None
        } else {
            Some(self.column_name()?)
        };
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(Projection::Aggregate { func, arg })
    }

    fn column_name(&mut self) -> Result<ColumnName, SqlError> {
        let first = self.ident("column name")?;
        if self.eat(|k| matches!(k, TokenKind::Dot)) {
            if self.at_star() {
                return Err(SqlError::unsupported("qualified star", self.offset()));
            }
            let name = self.ident("column name")?;
            Ok(ColumnName::qualified(first, name))
        } else {
            Ok(ColumnName::bare(first))
        }
    }

    fn at_star(&self) -> bool {
        matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Star))
    }

    fn table_ref(&mut self) -> Result<TableRef, SqlError> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
            return Err(SqlError::unsupported("derived table", self.offset()));
        }
        let name = self.ident("table name")?;
        if self.eat(|k| matches!(k, TokenKind::Dot)) {
            return Err(SqlError::unsupported("schema-qualified table", self.offset()));
        }
        let alias = if self.eat_word("AS") || self.at_ident() {
            Some(self.ident("table alias")?)
        } else {
            None
        };
        Ok(TableRef { name, alias })
    }

    fn from_clause(&mut self, depth: usize) -> Result<(Vec<TableRef>, Vec<Cond>), SqlError> {
        let mut tables = vec![self.table_ref()?];
        let mut conds = Vec::new();
        loop {
            if self.eat(|k| matches!(k, TokenKind::Comma)) {
                tables.push(self.table_ref()?);
            } else if self.at_word("JOIN") || self.at_word("INNER") {
                if self.eat_word("INNER") && !self.at_word("JOIN") {
                    return Err(SqlError::syntax(self.offset(), "expected `JOIN` after `INNER`"));
                }
                self.expect_word("JOIN")?;
                tables.push(self.table_ref()?);
                self.expect_word("ON")?;
                conds.push(self.or_cond(depth)?);
            } else {
                break;
            }
        }
        Ok((tables, conds))
    }

    fn or_cond(&mut self, depth: usize) -> Result<Cond, SqlError> {
        let mut parts = vec![self.and_cond(depth)?];
        while self.eat_word("OR") {
            parts.push(self.and_cond(depth)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Cond::Or(parts.into_iter().flat_map(flatten_or).collect())
        })
    }

    fn and_cond(&mut self, depth: usize) -> Result<Cond, SqlError> {
        let mut parts = vec![self.primary_cond(depth)?];
        while self.eat_word("AND") {
            parts.push(self.primary_cond(depth)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Cond::And(parts.into_iter().flat_map(flatten_and).collect())
        })
    }

    fn primary_cond(&mut self, depth: usize) -> Result<Cond, SqlError> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
            if self.peek_at(1).is_some_and(|t| t.is_word("SELECT")) {
                return Err(SqlError::unsupported("scalar subquery", self.offset()));
            }
            self.bump();
            let inner = self.or_cond(depth)?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(inner);
        }
        if let Some(t) = self.peek() {
            if t.is_word("NOT") || t.is_word("EXISTS") {
                return Err(self.unexpected(t.clone(), "condition"));
            }
        }
        let start = self.offset();
        let left = self.operand()?;
        self.reject_arithmetic()?;
        let Some(tok) = self.bump() else {
            return Err(SqlError::syntax(self.end, "expected comparison, found end of input"));
        };
        match tok.kind {
            TokenKind::Op(op) if op != "/" && op != "%" => {
                let op = match op {
                    "=" => CompareOp::Eq,
                    "<>" | "!=" => CompareOp::Ne,
                    "<" => CompareOp::Lt,
                    "<=" => CompareOp::Le,
                    ">" => CompareOp::Gt,
                    _ => CompareOp::Ge,
                };
                let right = self.operand()?;
                self.reject_arithmetic()?;
                match (left, right) {
                    (Operand::Column(column), Operand::Literal(value)) => {
                        Ok(Cond::Atom(Atom::Compare { column, op, value }))
                    }
                    (Operand::Literal(value), Operand::Column(column)) => Ok(Cond::Atom(Atom::Compare {
                        column,
                        op: op.flipped(),
                        value,
                    })),
                    (Operand::Column(a), Operand::Column(b)) if op == CompareOp::Eq => {
                        Ok(Cond::ColumnsEqual(a, b, start))
                    }
                    (Operand::Column(_), Operand::Column(_)) => Err(SqlError::unsupported(
                        "non-equality column comparison",
                        start,
                    )),
                    (Operand::Literal(_), Operand::Literal(_)) => {
                        Err(SqlError::unsupported("constant comparison", start))
                    }
                }
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("BETWEEN") => {
                let column = self.require_column(left, start)?;
                let low = self.literal()?;
                self.expect_word("AND")?;
                let high = self.literal()?;
                Ok(Cond::Atom(Atom::Between { column, low, high }))
            }
            TokenKind::Word(w) if w.eq_ignore_ascii_case("IN") => {
                let column = self.require_column(left, start)?;
                self.expect(TokenKind::LParen, "`(`")?;
                if self.at_word("SELECT") {
                    if depth >= 1 {
                        return Err(SqlError::unsupported(
                            "subquery nested deeper than one level",
                            self.offset(),
                        ));
                    }
                    let sub = self.query(depth + 1)?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    return Ok(Cond::Atom(Atom::InSubquery {
                        column,
                        subquery: Box::new(sub),
                    }));
                }
                let mut values = vec![self.literal()?];
                while self.eat(|k| matches!(k, TokenKind::Comma)) {
                    values.push(self.literal()?);
                }
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(Cond::Atom(Atom::InList { column, values }))
            }
            _ => Err(self.unexpected(tok, "comparison operator")),
        }
    }

    fn require_column(&self, operand: Operand, offset: usize) -> Result<ColumnName, SqlError> {
        match operand {
            Operand::Column(c) => Ok(c),
            Operand::Literal(_) => Err(SqlError::syntax(offset, "expected a column on the left-hand side")),
        }
    }

    fn reject_arithmetic(&self) -> Result<(), SqlError> {
        match self.peek() {
            Some(t)
                if matches!(
                    t.kind,
                    TokenKind::Plus | TokenKind::Minus | TokenKind::Star | TokenKind::Op("/" | "%")
                ) =>
            {
                Err(SqlError::unsupported("arithmetic expression", t.offset))
            }
            _ => Ok(()),
        }
    }

    fn operand(&mut self) -> Result<Operand, SqlError> {
        if self.at_ident() {
            if matches!(self.peek_at(1).map(|t| &t.kind), Some(TokenKind::LParen)) {
                let t = self.peek().cloned().unwrap();
                let name = match &t.kind {
                    TokenKind::Word(w) | TokenKind::QuotedIdent(w) => w.to_ascii_uppercase(),
                    _ => String::new(),
                };
                return Err(SqlError::unsupported(format!("function {name}"), t.offset));
            }
            return Ok(Operand::Column(self.column_name()?));
        }
        Ok(Operand::Literal(self.literal()?))
    }

    fn literal(&mut self) -> Result<Value, SqlError> {
        let negative = if self.eat(|k| matches!(k, TokenKind::Minus)) {
            true
        } else {
            self.eat(|k| matches!(k, TokenKind::Plus));
            false
        };
        match self.bump() {
            Some(Token {
                kind: TokenKind::Number(n),
                offset,
            }) => {
                let text = if negative { format!("-{n}") } else { n };
                if text.contains(['.', 'e', 'E']) {
                    text.parse::<f64>()
                        .ok()
                        .filter(|d| d.is_finite())
                        .map(Value::Dec)
                        .ok_or_else(|| SqlError::syntax(offset, format!("invalid number {text}")))
                } else {
                    text.parse::<i64>()
                        .map(Value::Int)
                        .map_err(|_| SqlError::syntax(offset, format!("integer literal {text} out of range")))
                }
            }
            Some(Token {
                kind: TokenKind::Str(s),
                offset,
            }) => {
                if negative {
                    Err(SqlError::syntax(offset, "cannot negate a string literal"))
                } else {
                    Ok(Value::Text(s))
                }
            }
            Some(t) => Err(self.unexpected(t, "literal")),
            None => Err(SqlError::syntax(self.end, "expected literal, found end of input")),
        }
    }
}

fn flatten_and(c: Cond) -> Vec<Cond> {
    match c {
        Cond::And(parts) => parts,
        other => vec![other],
    }
}

fn flatten_or(c: Cond) -> Vec<Cond> {
    match c {
        Cond::Or(parts) => parts,
        other => vec![other],
    }
}

fn into_predicate(c: Cond) -> Result<PredicateExpr, SqlError> {
    Ok(match c {
        Cond::Atom(a) => PredicateExpr::Atom(a),
        Cond::ColumnsEqual(_, _, offset) => {
            return Err(SqlError::unsupported(
                "column comparison nested inside OR",
                offset,
            ))
        }
        Cond::And(parts) => PredicateExpr::And(
            parts
                .into_iter()
                .map(into_predicate)
                .collect::<Result<_, _>>()?,
        ),
        Cond::Or(parts) => PredicateExpr::Or(
            parts
                .into_iter()
                .map(into_predicate)
                .collect::<Result<_, _>>()?,
        ),
    })
}
