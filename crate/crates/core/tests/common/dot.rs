//! A small reader for the DOT subset: graphs, subgraphs, attribute
//! statements, node statements and edge chains. Enough to count what a
//! renderer produced without trusting the renderer.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Arrow,
}

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '{' => {
                out.push(Tok::LBrace);
                i += 1
            }
            '}' => {
                out.push(Tok::RBrace);
                i += 1
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1
            }
            '=' => {
                out.push(Tok::Eq);
                i += 1
            }
            ';' => {
                out.push(Tok::Semi);
                i += 1
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push(Tok::Arrow);
                i += 2
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some('n') => s.push('\n'),
                                Some(&c) => s.push(c),
                                None => return Err("dangling escape".into()),
                            }
                            i += 2;
                        }
                        Some(&c) => {
                            s.push(c);
                            i += 1
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                out.push(Tok::Id(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct DotGraph {
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
    /// Cluster name and label, in order of appearance.
    pub clusters: Vec<(String, Option<String>)>,
}

impl DotGraph {
    pub fn dashed_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .filter(|(_, _, a)| a.get("style").map(String::as_str) == Some("dashed"))
            .map(|(f, t, _)| (f.clone(), t.clone()))
            .collect()
    }

    pub fn solid_edges(&self) -> Vec<(String, String)> {
        self.edges
            .iter()
            .filter(|(_, _, a)| !a.contains_key("style"))
            .map(|(f, t, _)| (f.clone(), t.clone()))
            .collect()
    }
}

struct Reader {
    toks: Vec<Tok>,
    pos: usize,
}

impl Reader {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            got => Err(format!("expected {t:?}, found {got:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            got => Err(format!("expected identifier, found {got:?}")),
        }
    }

    fn attrs(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut out = BTreeMap::new();
        if self.peek() != Some(&Tok::LBracket) {
            return Ok(out);
        }
        self.next();
        while self.peek() != Some(&Tok::RBracket) {
            let k = self.id()?;
            self.expect(Tok::Eq)?;
            let v = self.id()?;
            out.insert(k, v);
            if matches!(self.peek(), Some(Tok::Comma | Tok::Semi)) {
                self.next();
            }
        }
        self.next();
        Ok(out)
    }

    fn body(&mut self, g: &mut DotGraph, cluster: Option<usize>) -> Result<(), String> {
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.next();
                    return Ok(());
                }
                Some(Tok::Semi) => {
                    self.next();
                }
                None => return Err("unclosed brace".into()),
                _ => self.statement(g, cluster)?,
            }
        }
    }

    fn statement(&mut self, g: &mut DotGraph, cluster: Option<usize>) -> Result<(), String> {
        let first = self.id()?;
        if first == "subgraph" {
            let name = self.id()?;
            g.clusters.push((name, None));
            let index = g.clusters.len() - 1;
            return self.body(g, Some(index));
        }
        if matches!(first.as_str(), "graph" | "node" | "edge") && self.peek() == Some(&Tok::LBracket) {
            self.attrs()?;
            return Ok(());
        }
        match self.peek() {
            Some(Tok::Eq) => {
                self.next();
                let value = self.id()?;
                if first == "label" {
                    if let Some(i) = cluster {
                        g.clusters[i].1 = Some(value);
                    }
                }
            }
            Some(Tok::Arrow) => {
                let mut chain = vec![first];
                while self.peek() == Some(&Tok::Arrow) {
                    self.next();
                    chain.push(self.id()?);
                }
                let attrs = self.attrs()?;
                for pair in chain.windows(2) {
                    g.edges.push((pair[0].clone(), pair[1].clone(), attrs.clone()));
                }
            }
            _ => {
                let attrs = self.attrs()?;
                g.nodes.insert(first, attrs);
            }
        }
        Ok(())
    }
}

pub fn parse_dot(text: &str) -> Result<DotGraph, String> {
    let mut r = Reader {
        toks: lex(text)?,
        pos: 0,
    };
    if r.id()? != "digraph" {
        return Err("not a digraph".into());
    }
    if let Some(Tok::Id(_)) = r.peek() {
        r.next();
    }
    let mut g = DotGraph::default();
    r.body(&mut g, None)?;
    if r.peek().is_some() {
        return Err("trailing input after graph".into());
    }
    Ok(g)
}
