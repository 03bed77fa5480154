//! Store values and the small expression language shared by guards and
//! process updates.

use std::fmt;

use thiserror::Error;

use crate::model::ThimacPath;

/// The type of a value held in a thimac store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Number,
    Text,
    Boolean,
    Reference,
}

impl ValueType {
    pub const ALL: [ValueType; 4] = [
        ValueType::Number,
        ValueType::Text,
        ValueType::Boolean,
        ValueType::Reference,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Number => "number",
            ValueType::Text => "text",
            ValueType::Boolean => "boolean",
            ValueType::Reference => "reference",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.keyword() == word)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A concrete store value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Boolean(bool),
    /// Reference to another thing, named by its thimac path.
    Ref(ThimacPath),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Number(_) => ValueType::Number,
            Value::Text(_) => ValueType::Text,
            Value::Boolean(_) => ValueType::Boolean,
            Value::Ref(_) => ValueType::Reference,
        }
    }

    /// Parses a command-line style value. With a known type the text is read
    /// as that type; otherwise numbers, booleans, `@refs` and quoted text are
    /// recognised and anything else is taken as bare text.
    pub fn parse_loose(raw: &str, ty: Option<ValueType>) -> Result<Value, String> {
        let unquoted = raw
            .strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .map(str::to_owned);
        match ty {
            Some(ValueType::Number) => parse_number(raw).map(Value::Number),
            Some(ValueType::Text) => Ok(Value::Text(unquoted.unwrap_or_else(|| raw.to_owned()))),
            Some(ValueType::Boolean) => match raw {
                "true" => Ok(Value::Boolean(true)),
                "false" => Ok(Value::Boolean(false)),
                _ => Err(format!("expected true or false, found `{raw}`")),
            },
            Some(ValueType::Reference) => {
                let path = raw.strip_prefix('@').unwrap_or(raw);
                ThimacPath::parse(path)
                    .map(Value::Ref)
                    .ok_or_else(|| format!("`{raw}` is not a thimac path"))
            }
            None => {
                if let Some(text) = unquoted {
                    Ok(Value::Text(text))
                } else if let Ok(n) = parse_number(raw) {
                    Ok(Value::Number(n))
                } else if raw == "true" || raw == "false" {
                    Ok(Value::Boolean(raw == "true"))
                } else if let Some(path) = raw.strip_prefix('@').and_then(ThimacPath::parse) {
                    Ok(Value::Ref(path))
                } else {
                    Ok(Value::Text(raw.to_owned()))
                }
            }
        }
    }
}

fn parse_number(raw: &str) -> Result<f64, String> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|n| n.is_finite())
        .ok_or_else(|| format!("`{raw}` is not a finite number"))
}

/// Formats a value in DSL literal syntax. The same rendering is used in trace
/// output.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::Text(s) => write_quoted(f, s),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Ref(p) => write!(f, "@{p}"),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
    Add,
    Sub,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "or",
            BinaryOp::And => "and",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Ge => ">=",
            BinaryOp::Gt => ">",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
        }
    }

    /// Binding strength; higher binds tighter.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Ge
            | BinaryOp::Gt => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
        }
    }

    fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Expression over store paths. Paths are absolute once a model is built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    Store(ThimacPath),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

const NOT_PRECEDENCE: u8 = 3;
const NEG_PRECEDENCE: u8 = 6;
const ATOM_PRECEDENCE: u8 = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("store `{0}` is unset")]
    UnsetStore(ThimacPath),
    #[error("no store at `{0}`")]
    NoStore(ThimacPath),
    #[error("operator `{op}` cannot be applied to {left} and {right}")]
    OperandTypes {
        op: &'static str,
        left: ValueType,
        right: ValueType,
    },
    #[error("operator `{op}` cannot be applied to {operand}")]
    OperandType { op: &'static str, operand: ValueType },
    #[error("expected a boolean result, found {0}")]
    NotBoolean(ValueType),
    #[error("arithmetic produced a non-finite number")]
    NonFinite,
}

impl Expr {
    pub fn store(path: ThimacPath) -> Expr {
        Expr::Store(path)
    }

    pub fn num(n: f64) -> Expr {
        Expr::Lit(Value::Number(n))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary(op, Box::new(operand))
    }

    /// Every store path the expression reads, in reading order.
    pub fn paths(&self) -> Vec<&ThimacPath> {
        let mut out = Vec::new();
        self.collect_paths(&mut out);
        out
    }

    fn collect_paths<'a>(&'a self, out: &mut Vec<&'a ThimacPath>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Store(p) => out.push(p),
            Expr::Unary(_, e) => e.collect_paths(out),
            Expr::Binary(_, l, r) => {
                l.collect_paths(out);
                r.collect_paths(out);
            }
        }
    }

    pub fn map_paths(&self, f: &mut impl FnMut(&ThimacPath) -> ThimacPath) -> Expr {
        match self {
            Expr::Lit(v) => Expr::Lit(v.clone()),
            Expr::Store(p) => Expr::Store(f(p)),
            Expr::Unary(op, e) => Expr::unary(*op, e.map_paths(f)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.map_paths(f), r.map_paths(f)),
        }
    }

    /// Evaluates against a store lookup. `lookup` returns `Err(NoStore)` for
    /// paths without a store and `Ok(None)` for unset stores.
    pub fn eval<F>(&self, lookup: &F) -> Result<Value, EvalError>
    where
        F: Fn(&ThimacPath) -> Result<Option<Value>, EvalError>,
    {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Store(p) => lookup(p)?.ok_or_else(|| EvalError::UnsetStore(p.clone())),
            Expr::Unary(UnaryOp::Neg, e) => match e.eval(lookup)? {
                Value::Number(n) => Ok(Value::Number(-n)),
                v => Err(EvalError::OperandType {
                    op: "-",
                    operand: v.value_type(),
                }),
            },
            Expr::Unary(UnaryOp::Not, e) => match e.eval(lookup)? {
                Value::Boolean(b) => Ok(Value::Boolean(!b)),
                v => Err(EvalError::OperandType {
                    op: "not",
                    operand: v.value_type(),
                }),
            },
            Expr::Binary(op @ (BinaryOp::And | BinaryOp::Or), l, r) => {
                let left = expect_bool(op.symbol(), l.eval(lookup)?)?;
                // Short-circuit so a guard like `x != 0 and y < 1` need not
                // read `y` when it is irrelevant.
                match (op, left) {
                    (BinaryOp::And, false) => Ok(Value::Boolean(false)),
                    (BinaryOp::Or, true) => Ok(Value::Boolean(true)),
                    _ => Ok(Value::Boolean(expect_bool(op.symbol(), r.eval(lookup)?)?)),
                }
            }
            Expr::Binary(op, l, r) => {
                let left = l.eval(lookup)?;
                let right = r.eval(lookup)?;
                apply_binary(*op, left, right)
            }
        }
    }

    pub fn eval_bool<F>(&self, lookup: &F) -> Result<bool, EvalError>
    where
        F: Fn(&ThimacPath) -> Result<Option<Value>, EvalError>,
    {
        match self.eval(lookup)? {
            Value::Boolean(b) => Ok(b),
            v => Err(EvalError::NotBoolean(v.value_type())),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Lit(Value::Number(n)) if n.is_sign_negative() => NEG_PRECEDENCE,
            Expr::Lit(_) | Expr::Store(_) => ATOM_PRECEDENCE,
            Expr::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
            Expr::Unary(UnaryOp::Not, _) => NOT_PRECEDENCE,
            Expr::Binary(op, _, _) => op.precedence(),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

fn expect_bool(op: &'static str, v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Boolean(b) => Ok(b),
        v => Err(EvalError::OperandType {
            op,
            operand: v.value_type(),
        }),
    }
}

fn apply_binary(op: BinaryOp, left: Value, right: Value) -> Result<Value, EvalError> {
    use std::cmp::Ordering;
    let mismatch = |l: &Value, r: &Value| EvalError::OperandTypes {
        op: op.symbol(),
        left: l.value_type(),
        right: r.value_type(),
    };
    match op {
        BinaryOp::Add | BinaryOp::Sub => match (&left, &right) {
            (Value::Number(a), Value::Number(b)) => {
                let n = if op == BinaryOp::Add { a + b } else { a - b };
                if n.is_finite() {
                    Ok(Value::Number(n))
                } else {
                    Err(EvalError::NonFinite)
                }
            }
            _ => Err(mismatch(&left, &right)),
        },
        BinaryOp::Eq | BinaryOp::Ne => {
            if left.value_type() != right.value_type() {
                return Err(mismatch(&left, &right));
            }
            let equal = left == right;
            Ok(Value::Boolean(if op == BinaryOp::Eq { equal } else { !equal }))
        }
        _ if op.is_comparison() => {
            let ordering = match (&left, &right) {
                (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
                (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
                _ => None,
            }
            .ok_or_else(|| mismatch(&left, &right))?;
            let holds = match op {
                BinaryOp::Lt => ordering == Ordering::Less,
                BinaryOp::Le => ordering != Ordering::Greater,
                BinaryOp::Ge => ordering != Ordering::Less,
                BinaryOp::Gt => ordering == Ordering::Greater,
                _ => unreachable!("equality handled above"),
            };
            Ok(Value::Boolean(holds))
        }
        _ => unreachable!("logical operators are evaluated lazily"),
    }
}

/// Prints in DSL syntax with the minimum parentheses needed to parse back to
/// the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Store(p) => write!(f, "{p}"),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                // `--x` would lex as the start of a trigger arrow.
                let needs_parens = matches!(**e, Expr::Unary(UnaryOp::Neg, _))
                    || matches!(**e, Expr::Lit(Value::Number(_)));
                if needs_parens {
                    write!(f, "({e})")
                } else {
                    e.fmt_child(f, ATOM_PRECEDENCE)
                }
            }
            Expr::Unary(UnaryOp::Not, e) => {
                f.write_str("not ")?;
                e.fmt_child(f, NOT_PRECEDENCE)
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                if op.is_comparison() {
                    l.fmt_child(f, p + 1)?;
                    write!(f, " {} ", op.symbol())?;
                    r.fmt_child(f, p + 1)
                } else {
                    l.fmt_child(f, p)?;
                    write!(f, " {} ", op.symbol())?;
                    r.fmt_child(f, p + 1)
                }
            }
        }
    }
}

/// A boolean condition on a behavioral edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Guard {
    pub expr: Expr,
}

impl Guard {
    pub fn new(expr: Expr) -> Self {
        Guard { expr }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ThimacPath {
        ThimacPath::parse(s).unwrap()
    }

    fn lookup_with(
        entries: &[(&str, Option<Value>)],
    ) -> impl Fn(&ThimacPath) -> Result<Option<Value>, EvalError> {
        let entries: Vec<(ThimacPath, Option<Value>)> =
            entries.iter().map(|(k, v)| (p(k), v.clone())).collect();
        move |path| {
            entries
                .iter()
                .find(|(k, _)| k == path)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| EvalError::NoStore(path.clone()))
        }
    }

    fn negative_guard() -> Expr {
        Expr::binary(BinaryOp::Lt, Expr::store(p("SavingsBalance")), Expr::num(0.0))
    }

    #[test]
    fn negative_balance_guard_holds() {
        let l = lookup_with(&[("SavingsBalance", Some(Value::Number(-50.0)))]);
        assert!(negative_guard().eval_bool(&l).unwrap());
    }

    #[test]
    fn positive_balance_guard_fails() {
        let l = lookup_with(&[("SavingsBalance", Some(Value::Number(150.0)))]);
        assert!(!negative_guard().eval_bool(&l).unwrap());
    }

    #[test]
    fn unset_store_is_an_error() {
        let l = lookup_with(&[("SavingsBalance", None)]);
        assert_eq!(
            negative_guard().eval_bool(&l),
            Err(EvalError::UnsetStore(p("SavingsBalance")))
        );
    }

    #[test]
    fn mixed_type_comparison_is_rejected() {
        let e = Expr::binary(BinaryOp::Lt, Expr::Lit(Value::Text("a".into())), Expr::num(1.0));
        let l = lookup_with(&[]);
        assert!(matches!(e.eval(&l), Err(EvalError::OperandTypes { .. })));
    }

    #[test]
    fn and_short_circuits() {
        let e = Expr::binary(
            BinaryOp::And,
            Expr::Lit(Value::Boolean(false)),
            Expr::binary(BinaryOp::Lt, Expr::store(p("Missing")), Expr::num(0.0)),
        );
        assert_eq!(e.eval_bool(&lookup_with(&[])), Ok(false));
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let e = Expr::binary(
            BinaryOp::Sub,
            Expr::store(p("a")),
            Expr::binary(BinaryOp::Sub, Expr::store(p("b")), Expr::num(1.0)),
        );
        assert_eq!(e.to_string(), "a - (b - 1)");
        let e = Expr::unary(
            UnaryOp::Not,
            Expr::binary(BinaryOp::Or, Expr::store(p("x")), Expr::store(p("y"))),
        );
        assert_eq!(e.to_string(), "not (x or y)");
        assert_eq!(Expr::num(-50.0).to_string(), "-50");
    }

    #[test]
    fn loose_value_parsing() {
        assert_eq!(Value::parse_loose("150", None), Ok(Value::Number(150.0)));
        assert_eq!(Value::parse_loose("Bob", None), Ok(Value::Text("Bob".into())));
        assert_eq!(Value::parse_loose("\"42\"", None), Ok(Value::Text("42".into())));
        assert_eq!(
            Value::parse_loose("42", Some(ValueType::Text)),
            Ok(Value::Text("42".into()))
        );
        assert!(Value::parse_loose("abc", Some(ValueType::Number)).is_err());
        assert_eq!(
            Value::parse_loose("@Cook.Sirloin", None),
            Ok(Value::Ref(p("Cook.Sirloin")))
        );
    }
}
