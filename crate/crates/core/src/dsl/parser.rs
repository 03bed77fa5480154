//! Recursive-descent parser producing an unresolved syntax tree.

use super::lexer::{tokenize, Pos, Tok, Token};
use super::ParseError;
use crate::expr::{BinaryOp, UnaryOp, Value, ValueType};
use crate::model::{ActionKind, ThimacPath};

pub(crate) const KEYWORDS: &[&str] = &[
    "thimac",
    "specializes",
    "store",
    "create",
    "process",
    "release",
    "transfer",
    "receive",
    "flow",
    "trigger",
    "event",
    "covers",
    "input",
    "guard",
    "behavior",
    "terminal",
    "repeatable",
    "and",
    "or",
    "not",
    "true",
    "false",
    "number",
    "text",
    "boolean",
    "reference",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PathRef {
    pub segments: Vec<String>,
    pub pos: Pos,
}

impl PathRef {
    pub fn dotted(&self) -> String {
        self.segments.join(".")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Name {
    pub text: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ExprAst {
    Lit(Value),
    Store(PathRef),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ThimacAst {
    pub name: Name,
    pub specializes: bool,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Member {
    Thimac(ThimacAst),
    Store {
        value_type: Option<ValueType>,
        initial: Option<Value>,
        pos: Pos,
    },
    Action {
        kind: ActionKind,
        name: Option<Name>,
        update: Option<(PathRef, ExprAst)>,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EventAst {
    pub id: Name,
    pub label: Option<String>,
    pub covers: Vec<PathRef>,
    pub input: Option<PathRef>,
    pub guard: Option<(ExprAst, Pos)>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct EdgeAst {
    pub from: Name,
    pub to: Name,
    pub guard: Option<(ExprAst, Pos)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct BehaviorAst {
    pub edges: Vec<EdgeAst>,
    pub terminals: Vec<Name>,
    pub repeatable: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Item {
    Thimac(ThimacAst),
    Flow(Vec<PathRef>),
    Trigger(Vec<PathRef>),
    Event(EventAst),
    Behavior(BehaviorAst, Pos),
}

pub(crate) fn parse_items(text: &str) -> Result<Vec<Item>, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let mut items = Vec::new();
    while !p.check(&Tok::Eof) {
        items.push(p.item()?);
    }
    Ok(items)
}

/// Parses a standalone expression; used for guards given outside a file.
pub(crate) fn parse_expr_text(text: &str) -> Result<ExprAst, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn check(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn check_word(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == word)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.check(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.check_word(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = self.peek().tok.describe();
        let message = match expected {
            [one] => format!("expected {one}, found {found}"),
            _ => format!("unexpected {found}"),
        };
        ParseError::new(self.pos(), message, expected)
    }

    fn expect(&mut self, tok: &Tok, class: &str) -> Result<Token, ParseError> {
        if self.check(tok) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[class]))
        }
    }

    fn expect_word(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_word(word) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{word}`")]))
        }
    }

    fn ident(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Ident(text) => {
                let name = Name {
                    text: text.clone(),
                    pos: self.pos(),
                };
                self.bump();
                Ok(name)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// An identifier that is not a reserved word.
    fn name(&mut self, what: &str) -> Result<Name, ParseError> {
        let name = self.ident()?;
        if is_keyword(&name.text) {
            return Err(ParseError::new(
                name.pos,
                format!("`{}` is a reserved word and cannot name a {what}", name.text),
                &["identifier"],
            ));
        }
        Ok(name)
    }

    fn path(&mut self) -> Result<PathRef, ParseError> {
        let first = self.ident()?;
        let pos = first.pos;
        let mut segments = vec![first.text];
        while self.check(&Tok::Dot) {
            let dot = self.bump();
            match &self.peek().tok {
                Tok::Ident(s) => {
                    segments.push(s.clone());
                    self.bump();
                }
                _ => {
                    return Err(ParseError::new(
                        dot.pos,
                        format!("dangling `.` in path `{}.`", segments.join(".")),
                        &["identifier"],
                    ));
                }
            }
        }
        Ok(PathRef { segments, pos })
    }

    fn item(&mut self) -> Result<Item, ParseError> {
        let pos = self.pos();
        match &self.peek().tok {
            Tok::Ident(w) if w == "thimac" => Ok(Item::Thimac(self.thimac()?)),
            Tok::Ident(w) if w == "flow" => {
                self.bump();
                Ok(Item::Flow(self.chain(&Tok::Arrow, "`->`")?))
            }
            Tok::Ident(w) if w == "trigger" => {
                self.bump();
                Ok(Item::Trigger(self.chain(&Tok::DashArrow, "`-->`")?))
            }
            Tok::Ident(w) if w == "event" => Ok(Item::Event(self.event()?)),
            Tok::Ident(w) if w == "behavior" => Ok(Item::Behavior(self.behavior()?, pos)),
            _ => Err(self.unexpected(&["`thimac`", "`flow`", "`trigger`", "`event`", "`behavior`"])),
        }
    }

    fn chain(&mut self, arrow: &Tok, arrow_class: &str) -> Result<Vec<PathRef>, ParseError> {
        let mut paths = vec![self.path()?];
        self.expect(arrow, arrow_class)?;
        paths.push(self.path()?);
        while self.eat(arrow) {
            paths.push(self.path()?);
        }
        self.expect(&Tok::Semi, "`;`")?;
        Ok(paths)
    }

    fn thimac(&mut self) -> Result<ThimacAst, ParseError> {
        self.expect_word("thimac")?;
        let name = self.name("thimac")?;
        let specializes = self.eat_word("specializes");
        self.expect(&Tok::LBrace, "`{`")?;
        let mut members = Vec::new();
        loop {
            let pos = self.pos();
            match &self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(w) if w == "thimac" => members.push(Member::Thimac(self.thimac()?)),
                Tok::Ident(w) if w == "store" => {
                    self.bump();
                    let value_type = if self.eat(&Tok::Colon) {
                        let ty = self.ident()?;
                        Some(ValueType::from_keyword(&ty.text).ok_or_else(|| {
                            ParseError::new(
                                ty.pos,
                                format!("unknown store type `{}`", ty.text),
                                &["`number`", "`text`", "`boolean`", "`reference`"],
                            )
                        })?)
                    } else {
                        None
                    };
                    let initial = if self.eat(&Tok::Eq) { Some(self.literal()?) } else { None };
                    self.expect(&Tok::Semi, "`;`")?;
                    members.push(Member::Store {
                        value_type,
                        initial,
                        pos,
                    });
                }
                Tok::Ident(w) if ActionKind::from_keyword(w).is_some() => {
                    let kind = ActionKind::from_keyword(w).expect("checked");
                    self.bump();
                    let name = match &self.peek().tok {
                        Tok::Ident(_) => Some(self.name("action")?),
                        _ => None,
                    };
                    let update = if self.eat(&Tok::Eq) {
                        let target = self.path()?;
                        self.expect(&Tok::Define, "`:=`")?;
                        Some((target, self.expr()?))
                    } else {
                        None
                    };
                    self.expect(&Tok::Semi, "`;`")?;
                    members.push(Member::Action {
                        kind,
                        name,
                        update,
                        pos,
                    });
                }
                _ => {
                    return Err(self.unexpected(&[
                        "`thimac`",
                        "`store`",
                        "`create`",
                        "`process`",
                        "`release`",
                        "`transfer`",
                        "`receive`",
                        "`}`",
                    ]))
                }
            }
        }
        Ok(ThimacAst {
            name,
            specializes,
            members,
        })
    }

    fn literal(&mut self) -> Result<Value, ParseError> {
        let negative = self.eat(&Tok::Minus);
        let value = match &self.peek().tok {
            Tok::Number(n) => Value::Number(if negative { -n } else { *n }),
            _ if negative => return Err(self.unexpected(&["number"])),
            Tok::Str(s) => Value::Text(s.clone()),
            Tok::Ident(w) if w == "true" => Value::Boolean(true),
            Tok::Ident(w) if w == "false" => Value::Boolean(false),
            Tok::At => {
                self.bump();
                let path = self.path()?;
                return Ok(Value::Ref(ThimacPath::new(path.segments)));
            }
            _ => return Err(self.unexpected(&["number", "string", "`true`", "`false`", "`@`"])),
        };
        self.bump();
        Ok(value)
    }

    fn event(&mut self) -> Result<EventAst, ParseError> {
        self.expect_word("event")?;
        let id = self.name("event")?;
        let label = match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Some(s)
            }
            _ => None,
        };
        self.expect_word("covers")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut covers = Vec::new();
        while !self.check(&Tok::RBrace) {
            covers.push(self.path()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBrace, "`}`")?;
        let input = if self.eat_word("input") { Some(self.path()?) } else { None };
        let guard = if self.check_word("guard") {
            let pos = self.bump().pos;
            Some((self.expr()?, pos))
        } else {
            None
        };
        self.expect(&Tok::Semi, "`;`")?;
        Ok(EventAst {
            id,
            label,
            covers,
            input,
            guard,
        })
    }

    fn behavior(&mut self) -> Result<BehaviorAst, ParseError> {
        self.expect_word("behavior")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut b = BehaviorAst::default();
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.check_word("terminal") || self.check_word("repeatable") {
                let terminal = self.check_word("terminal");
                self.bump();
                let mut names = vec![self.name("event")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.name("event")?);
                }
                self.expect(&Tok::Semi, "`;`")?;
                if terminal {
                    b.terminals.extend(names);
                } else {
                    b.repeatable.extend(names);
                }
                continue;
            }
            if !matches!(self.peek().tok, Tok::Ident(_)) {
                return Err(self.unexpected(&["event id", "`terminal`", "`repeatable`", "`}`"]));
            }
            let mut ids = vec![self.name("event")?];
            self.expect(&Tok::Arrow, "`->`")?;
            ids.push(self.name("event")?);
            while self.eat(&Tok::Arrow) {
                ids.push(self.name("event")?);
            }
            let guard = if self.check_word("guard") {
                let pos = self.bump().pos;
                if ids.len() > 2 {
                    return Err(ParseError::new(pos, "a guard applies to a single edge, not a chain", &["`;`"]));
                }
                Some((self.expr()?, pos))
            } else {
                None
            };
            self.expect(&Tok::Semi, "`;`")?;
            for pair in ids.windows(2) {
                b.edges.push(EdgeAst {
                    from: pair[0].clone(),
                    to: pair[1].clone(),
                    guard: guard.clone(),
                });
            }
        }
        Ok(b)
    }

    fn expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut left = self.and_expr()?;
        while self.eat_word("or") {
            let right = self.and_expr()?;
            left = ExprAst::Binary(BinaryOp::Or, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> Result<ExprAst, ParseError> {
        let mut left = self.not_expr()?;
        while self.eat_word("and") {
            let right = self.not_expr()?;
            left = ExprAst::Binary(BinaryOp::And, Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<ExprAst, ParseError> {
        if self.eat_word("not") {
            let operand = self.not_expr()?;
            return Ok(ExprAst::Unary(UnaryOp::Not, Box::new(operand)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<ExprAst, ParseError> {
        let left = self.additive()?;
        let op = match self.peek().tok {
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Eq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Ge => BinaryOp::Ge,
            Tok::Gt => BinaryOp::Gt,
            _ => return Ok(left),
        };
        self.bump();
        let right = self.additive()?;
        Ok(ExprAst::Binary(op, Box::new(left), Box::new(right)))
    }

    fn additive(&mut self) -> Result<ExprAst, ParseError> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.unary()?;
            left = ExprAst::Binary(op, Box::new(left), Box::new(right));
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        if self.check(&Tok::Minus) {
            self.bump();
            if let Tok::Number(n) = *self.peek_at(0) {
                self.bump();
                return Ok(ExprAst::Lit(Value::Number(-n)));
            }
            let operand = self.unary()?;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(operand)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        match &self.peek().tok {
            Tok::Number(_) | Tok::Str(_) | Tok::At => Ok(ExprAst::Lit(self.literal()?)),
            Tok::Ident(w) if w == "true" || w == "false" => Ok(ExprAst::Lit(self.literal()?)),
            Tok::Ident(w) if matches!(w.as_str(), "and" | "or" | "not") => {
                Err(self.unexpected(&["store path", "literal", "`(`"]))
            }
            Tok::Ident(_) => Ok(ExprAst::Store(self.path()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected(&["store path", "literal", "`(`"])),
        }
    }
}
