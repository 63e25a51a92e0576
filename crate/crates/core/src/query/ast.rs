use std::fmt;

use crate::quality::{Feature, QualityVector};

/// Parsed quality-extended query.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityQuery {
    /// Global column names, optionally `Table.Column`.
    pub projection: Vec<String>,
    /// Name of the global schema in `FROM`.
    pub from: String,
    pub selection: Option<Predicate>,
    pub goal: Option<Goal>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderItem {
    pub feature: Feature,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Ge,
    Gt,
    Eq,
    Le,
    Lt,
}

impl Comparator {
    pub fn holds(self, score: f64, bound: f64) -> bool {
        match self {
            Comparator::Ge => score >= bound,
            Comparator::Gt => score > bound,
            Comparator::Eq => score == bound,
            Comparator::Le => score <= bound,
            Comparator::Lt => score < bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
            Comparator::Eq => "=",
            Comparator::Le => "<=",
            Comparator::Lt => "<",
        }
    }

    /// The comparator whose truth is the complement of this one.
    pub fn negated_symbol(self) -> &'static str {
        match self {
            Comparator::Ge => "<",
            Comparator::Gt => "<=",
            Comparator::Eq => "!=",
            Comparator::Le => ">",
            Comparator::Lt => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Value(f64),
    /// Qualitative term such as `high`, lower-cased.
    Term(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConstraint {
    pub feature: Feature,
    pub comparator: Comparator,
    pub bound: Bound,
}

impl FeatureConstraint {
    /// Evaluates a resolved leaf. Qualitative leaves never hold.
    pub fn holds(&self, v: &QualityVector) -> bool {
        match self.bound {
            Bound::Value(b) => self.comparator.holds(v.get(self.feature), b),
            Bound::Term(_) => false,
        }
    }
}

/// Boolean tree of feature constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Goal {
    Leaf(FeatureConstraint),
    And(Vec<Goal>),
    Or(Vec<Goal>),
}

impl Goal {
    pub fn holds(&self, v: &QualityVector) -> bool {
        match self {
            Goal::Leaf(c) => c.holds(v),
            Goal::And(gs) => gs.iter().all(|g| g.holds(v)),
            Goal::Or(gs) => gs.iter().any(|g| g.holds(v)),
        }
    }

    pub fn leaves(&self) -> Vec<&FeatureConstraint> {
        match self {
            Goal::Leaf(c) => vec![c],
            Goal::And(gs) | Goal::Or(gs) => gs.iter().flat_map(Goal::leaves).collect(),
        }
    }

    /// Distinct features in first-appearance order.
    pub fn features(&self) -> Vec<Feature> {
        let mut out = Vec::new();
        for l in self.leaves() {
            if !out.contains(&l.feature) {
                out.push(l.feature);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    fn test(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CompareOp::Eq => ord == Equal,
            CompareOp::Ne => ord != Equal,
            CompareOp::Lt => ord == Less,
            CompareOp::Le => ord != Greater,
            CompareOp::Gt => ord == Greater,
            CompareOp::Ge => ord != Less,
        }
    }
}

/// `WHERE` selection over global columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare { column: String, op: CompareOp, value: Literal },
    IsNull { column: String, negated: bool },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn columns(&self) -> Vec<&str> {
        match self {
            Predicate::Compare { column, .. } | Predicate::IsNull { column, .. } => vec![column.as_str()],
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().flat_map(Predicate::columns).collect(),
            Predicate::Not(p) => p.columns(),
        }
    }

    /// Evaluates against a row; `lookup` returns the cell of a named
    /// column. Comparisons with null are false.
    pub fn eval<'a>(&self, lookup: &dyn Fn(&str) -> Option<&'a str>) -> bool {
        match self {
            Predicate::Compare { column, op, value } => match lookup(column) {
                None => false,
                Some(cell) => {
                    let ord = match value {
                        Literal::Number(n) => match cell.trim().parse::<f64>() {
                            Ok(x) => x.partial_cmp(n),
                            Err(_) => None,
                        },
                        Literal::Text(t) => Some(cell.cmp(t.as_str())),
                    };
                    ord.is_some_and(|o| op.test(o))
                }
            },
            Predicate::IsNull { column, negated } => lookup(column).is_none() != *negated,
            Predicate::And(ps) => ps.iter().all(|p| p.eval(lookup)),
            Predicate::Or(ps) => ps.iter().any(|p| p.eval(lookup)),
            Predicate::Not(p) => !p.eval(lookup),
        }
    }
}

// ---- unparse ----

fn fmt_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(f, "{v:.1}")
    } else {
        write!(f, "{v}")
    }
}

fn fmt_ident(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    for (i, part) in name.split('.').enumerate() {
        if i > 0 {
            f.write_str(".")?;
        }
        let plain = part.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && part.chars().all(|c| c.is_alphanumeric() || c == '_')
            && !super::parser::is_keyword(part);
        if plain {
            f.write_str(part)?;
        } else {
            write!(f, "\"{part}\"")?;
        }
    }
    Ok(())
}

impl fmt::Display for FeatureConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.bound {
            Bound::Value(v) => {
                write!(f, "{} {} ", self.feature, self.comparator.symbol())?;
                fmt_number(f, *v)
            }
            Bound::Term(t) => write!(f, "{} IS {}", self.feature, t),
        }
    }
}

fn fmt_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str, compound: impl Fn(&T) -> bool) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if compound(item) {
            write!(f, "({item})")?;
        } else {
            write!(f, "{item}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compound = |g: &Goal| !matches!(g, Goal::Leaf(_));
        match self {
            Goal::Leaf(c) => write!(f, "{c}"),
            Goal::And(gs) => fmt_list(f, gs, " AND ", compound),
            Goal::Or(gs) => fmt_list(f, gs, " OR ", compound),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compound = |p: &Predicate| matches!(p, Predicate::And(_) | Predicate::Or(_));
        match self {
            Predicate::Compare { column, op, value } => {
                fmt_ident(f, column)?;
                write!(f, " {} ", op.symbol())?;
                match value {
                    Literal::Number(n) => fmt_number(f, *n),
                    Literal::Text(t) => write!(f, "'{}'", t.replace('\'', "''")),
                }
            }
            Predicate::IsNull { column, negated } => {
                fmt_ident(f, column)?;
                f.write_str(if *negated { " IS NOT NULL" } else { " IS NULL" })
            }
            Predicate::And(ps) => fmt_list(f, ps, " AND ", compound),
            Predicate::Or(ps) => fmt_list(f, ps, " OR ", compound),
            Predicate::Not(p) => {
                if matches!(**p, Predicate::Compare { .. } | Predicate::IsNull { .. } | Predicate::Not(_)) {
                    write!(f, "NOT {p}")
                } else {
                    write!(f, "NOT ({p})")
                }
            }
        }
    }
}

impl fmt::Display for QualityQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        for (i, c) in self.projection.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            fmt_ident(f, c)?;
        }
        f.write_str(" FROM ")?;
        fmt_ident(f, &self.from)?;
        if let Some(p) = &self.selection {
            write!(f, " WHERE {p}")?;
        }
        if let Some(g) = &self.goal {
            write!(f, " WITH {g}")?;
        }
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            for (i, o) in self.order_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(
                    f,
                    "{} {}",
                    o.feature,
                    if o.direction == Direction::Desc { "DESC" } else { "ASC" }
                )?;
            }
        }
        if let Some(k) = self.limit {
            write!(f, " LIMIT {k}")?;
        }
        Ok(())
    }
}
