//! Recursive-descent parser for the quality-extended dialect.

use super::ast::*;
use super::lexer::{error_at, tokenize, Tok, Token};
use crate::error::{Error, Result};
use crate::quality::Feature;

const KEYWORDS: &[&str] = &[
    "select", "from", "where", "with", "order", "by", "limit", "and", "or", "not", "is", "null", "asc", "desc",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

/// Parses query text into a [`QualityQuery`].
pub fn parse(text: &str) -> Result<QualityQuery> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let q = p.query()?;
    if p.peek() == &Tok::Semi {
        p.pos += 1;
    }
    if p.peek() != &Tok::Eof {
        return Err(p.error("unexpected input after end of query"));
    }
    Ok(q)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident(s) | Tok::Quoted(s) => format!("`{s}`"),
            Tok::Number(n) => format!("`{n}`"),
            Tok::Str(s) => format!("'{s}'"),
            other => format!("{other:?}"),
        };
        error_at(t.line, t.column, format!("{}, found {found}", message.into()))
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {}", kw.to_ascii_uppercase())))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                Ok(s)
            }
            Tok::Quoted(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn column_ref(&mut self) -> Result<String> {
        let mut name = self.ident("column name")?;
        if self.eat(&Tok::Dot) {
            name.push('.');
            name.push_str(&self.ident("column name")?);
        }
        Ok(name)
    }

    fn query(&mut self) -> Result<QualityQuery> {
        self.expect_keyword("select")?;
        let mut projection = vec![self.column_ref()?];
        while self.eat(&Tok::Comma) {
            projection.push(self.column_ref()?);
        }
        self.expect_keyword("from")?;
        let from = self.ident("global schema name")?;
        let selection = if self.eat_keyword("where") {
            Some(self.pred_or()?)
        } else {
            None
        };
        let goal = if self.eat_keyword("with") {
            Some(self.goal_or()?)
        } else {
            None
        };
        let mut order_by = Vec::new();
        if self.eat_keyword("order") {
            self.expect_keyword("by")?;
            loop {
                let feature = self.feature()?;
                let direction = if self.eat_keyword("asc") {
                    Direction::Asc
                } else {
                    self.eat_keyword("desc");
                    Direction::Desc
                };
                order_by.push(OrderItem { feature, direction });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let limit = if self.eat_keyword("limit") {
            match *self.peek() {
                Tok::Number(n) if n >= 1.0 && n.fract() == 0.0 => {
                    self.pos += 1;
                    Some(n as usize)
                }
                _ => return Err(self.error("LIMIT expects a positive integer")),
            }
        } else {
            None
        };
        Ok(QualityQuery {
            projection,
            from,
            selection,
            goal,
            order_by,
            limit,
        })
    }

    fn feature(&mut self) -> Result<Feature> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.pos += 1;
                s.parse()
            }
            _ => Err(self.error("expected a quality feature")),
        }
    }

    // ---- quality goal ----

    fn goal_or(&mut self) -> Result<Goal> {
        let mut parts = vec![self.goal_and()?];
        while self.eat_keyword("or") {
            parts.push(self.goal_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Goal::Or(parts) })
    }

    fn goal_and(&mut self) -> Result<Goal> {
        let mut parts = vec![self.goal_atom()?];
        while self.eat_keyword("and") {
            parts.push(self.goal_atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Goal::And(parts) })
    }

    fn goal_atom(&mut self) -> Result<Goal> {
        if self.eat(&Tok::LParen) {
            let g = self.goal_or()?;
            if !self.eat(&Tok::RParen) {
                return Err(self.error("expected `)`"));
            }
            return Ok(g);
        }
        let feature = self.feature()?;
        let comparator = match self.peek() {
            Tok::Ge => Some(Comparator::Ge),
            Tok::Gt => Some(Comparator::Gt),
            Tok::Eq => Some(Comparator::Eq),
            Tok::Le => Some(Comparator::Le),
            Tok::Lt => Some(Comparator::Lt),
            _ => None,
        };
        if let Some(comparator) = comparator {
            self.pos += 1;
            return match *self.peek() {
                Tok::Number(v) if (0.0..=1.0).contains(&v) => {
                    self.pos += 1;
                    Ok(Goal::Leaf(FeatureConstraint {
                        feature,
                        comparator,
                        bound: Bound::Value(v),
                    }))
                }
                Tok::Number(_) => Err(self.error("quality bounds must lie in [0, 1]")),
                _ => Err(self.error("expected a numeric bound")),
            };
        }
        // `feature is high` or `feature high`
        self.eat_keyword("is");
        match self.peek().clone() {
            Tok::Ident(term) if !is_keyword(&term) => {
                self.pos += 1;
                Ok(Goal::Leaf(FeatureConstraint {
                    feature,
                    comparator: Comparator::Ge,
                    bound: Bound::Term(term.to_ascii_lowercase()),
                }))
            }
            _ => Err(self.error("expected a comparator or a qualitative term")),
        }
    }

    // ---- selection predicate ----

    fn pred_or(&mut self) -> Result<Predicate> {
        let mut parts = vec![self.pred_and()?];
        while self.eat_keyword("or") {
            parts.push(self.pred_and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::Or(parts) })
    }

    fn pred_and(&mut self) -> Result<Predicate> {
        let mut parts = vec![self.pred_not()?];
        while self.eat_keyword("and") {
            parts.push(self.pred_not()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Predicate::And(parts) })
    }

    fn pred_not(&mut self) -> Result<Predicate> {
        if self.eat_keyword("not") {
            return Ok(Predicate::Not(Box::new(self.pred_not()?)));
        }
        if self.peek() == &Tok::LParen {
            self.pos += 1;
            let p = self.pred_or()?;
            if !self.eat(&Tok::RParen) {
                return Err(self.error("expected `)`"));
            }
            return Ok(p);
        }
        let column = self.column_ref()?;
        if self.eat_keyword("is") {
            let negated = self.eat_keyword("not");
            self.expect_keyword("null")?;
            return Ok(Predicate::IsNull { column, negated });
        }
        let op = match self.peek() {
            Tok::Eq => CompareOp::Eq,
            Tok::Ne => CompareOp::Ne,
            Tok::Lt => CompareOp::Lt,
            Tok::Le => CompareOp::Le,
            Tok::Gt => CompareOp::Gt,
            Tok::Ge => CompareOp::Ge,
            _ => return Err(self.error("expected a comparison operator")),
        };
        self.pos += 1;
        let value = match self.peek().clone() {
            Tok::Number(n) => Literal::Number(n),
            Tok::Str(s) => Literal::Text(s),
            _ => return Err(self.error("expected a literal")),
        };
        self.pos += 1;
        Ok(Predicate::Compare { column, op, value })
    }
}
