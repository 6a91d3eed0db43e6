//! The problem-file language.
//!
//! ```text
//! atoms A, H, K;
//! constraint !(H & K);          # H and K are incompatible
//! ce X := A | H;
//! ce Y := A | K;
//! assess P(X) = 1/2;
//! assess P(Y) = 0.25;
//! query bounds(X ^ Y);
//! query coherent;
//! ```
//!
//! Inside events `!`, `&`, `v`, `->` and `<->` are negation, conjunction,
//! disjunction, implication and equivalence, from tightest to loosest. Over
//! conditionals `^` is conjunction, `v` disjunction, `!X` the negated
//! conditional and `Q(X, Y)` the quasi conjunction.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::event_algebra::{ConditionalEvent, EventExpr};
use crate::rational::{in_unit_interval, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown {kind} `{name}`")]
    Unknown {
        line: usize,
        column: usize,
        kind: &'static str,
        name: String,
    },
    #[error("line {line}, column {column}: `{name}` is already defined")]
    Duplicate {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}, column {column}: prevision {value} is outside [0, 1]")]
    Range {
        line: usize,
        column: usize,
        value: Rational,
    },
}

/// A possibly negated reference to a named conditional event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub name: String,
    pub negated: bool,
}

/// A compound built from named conditional events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Target {
    /// One literal is the conditional event itself (or its negation).
    Conjunction(Vec<Literal>),
    Disjunction(Vec<String>),
    Quasi(Vec<String>),
}

impl Target {
    pub fn names(&self) -> Vec<&str> {
        match self {
            Target::Conjunction(ls) => ls.iter().map(|l| l.name.as_str()).collect(),
            Target::Disjunction(ns) | Target::Quasi(ns) => ns.iter().map(String::as_str).collect(),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Conjunction(ls) => {
                let parts: Vec<String> = ls
                    .iter()
                    .map(|l| format!("{}{}", if l.negated { "!" } else { "" }, l.name))
                    .collect();
                f.write_str(&parts.join(" ^ "))
            }
            Target::Disjunction(ns) => f.write_str(&ns.join(" v ")),
            Target::Quasi(ns) => write!(f, "Q({})", ns.join(", ")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Coherent,
    Bounds(Target),
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Query::Coherent => f.write_str("coherent"),
            Query::Bounds(t) => write!(f, "bounds({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProblemFile {
    pub atoms: Vec<String>,
    pub constraints: Vec<EventExpr>,
    pub conditionals: Vec<(String, ConditionalEvent)>,
    pub assessments: Vec<(Target, Rational)>,
    pub queries: Vec<Query>,
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.atoms.is_empty() {
            writeln!(f, "atoms {};", self.atoms.join(", "))?;
        }
        for c in &self.constraints {
            writeln!(f, "constraint {c};")?;
        }
        for (name, ce) in &self.conditionals {
            writeln!(f, "ce {name} := {ce};")?;
        }
        for (t, v) in &self.assessments {
            writeln!(f, "assess P({t}) = {v};")?;
        }
        for q in &self.queries {
            writeln!(f, "query {q};")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Punct(&'static str),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const PUNCT: [&str; 12] = ["<->", "->", ":=", ";", ",", "(", ")", "|", "&", "!", "^", "="];

fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, column: &mut usize, n: usize| {
        for k in 0..n {
            if chars[*i + k] == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        }
        *i += n;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut column, 1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut column, 1);
            }
            continue;
        }
        let (start_line, start_col) = (line, column);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            push(&mut out, Tok::Ident(chars[i..j].iter().collect()));
            let len = j - i;
            advance(&mut i, &mut line, &mut column, len);
            continue;
        }
        let negative_number = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit() || *d == '.');
        if c.is_ascii_digit() || c == '.' || negative_number {
            let mut j = i + usize::from(negative_number);
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.' || chars[j] == '/') {
                j += 1;
            }
            push(&mut out, Tok::Number(chars[i..j].iter().collect()));
            let len = j - i;
            advance(&mut i, &mut line, &mut column, len);
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                push(&mut out, Tok::Punct(p));
                advance(&mut i, &mut line, &mut column, p.chars().count());
            }
            None => {
                return Err(DslError::Syntax {
                    line,
                    column,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

const RESERVED: [&str; 4] = ["v", "true", "false", "Q"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    file: ProblemFile,
    atoms: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Spanned, message: impl Into<String>) -> DslError {
        DslError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, p: &'static str) -> Result<(), DslError> {
        let t = self.bump();
        if t.tok == Tok::Punct(p) {
            Ok(())
        } else {
            Err(Self::error_at(&t, format!("expected `{p}`, found {}", t.tok)))
        }
    }

    fn eat(&mut self, p: &'static str) -> bool {
        if self.peek().tok == Tok::Punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, Spanned), DslError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => Ok((s.clone(), t.clone())),
            _ => Err(Self::error_at(&t, format!("expected {what}, found {}", t.tok))),
        }
    }

    fn problem(mut self) -> Result<ProblemFile, DslError> {
        while self.peek().tok != Tok::End {
            self.statement()?;
        }
        Ok(self.file)
    }

    fn statement(&mut self) -> Result<(), DslError> {
        let t = self.bump();
        let Tok::Ident(word) = &t.tok else {
            return Err(Self::error_at(&t, format!("expected a statement, found {}", t.tok)));
        };
        match word.as_str() {
            "atoms" => loop {
                let (name, at) = self.name("an atom name")?;
                if !self.atoms.insert(name.clone()) {
                    return Err(duplicate(&at, name));
                }
                self.file.atoms.push(name);
                if !self.eat(",") {
                    break self.expect(";");
                }
            },
            "constraint" => {
                let e = self.event()?;
                self.file.constraints.push(e);
                self.expect(";")
            }
            "ce" => {
                let (name, at) = self.name("a conditional name")?;
                if self.file.conditionals.iter().any(|(n, _)| *n == name) || self.atoms.contains(&name) {
                    return Err(duplicate(&at, name));
                }
                self.expect(":=")?;
                let consequent = self.event()?;
                let antecedent = if self.eat("|") { self.event()? } else { EventExpr::True };
                self.file
                    .conditionals
                    .push((name, ConditionalEvent::new(consequent, antecedent)));
                self.expect(";")
            }
            "assess" => {
                let p = self.bump();
                if p.tok != Tok::Ident("P".into()) {
                    return Err(Self::error_at(&p, format!("expected `P`, found {}", p.tok)));
                }
                self.expect("(")?;
                let target = self.target()?;
                self.expect(")")?;
                self.expect("=")?;
                let n = self.bump();
                let Tok::Number(text) = &n.tok else {
                    return Err(Self::error_at(&n, format!("expected a number, found {}", n.tok)));
                };
                let value = parse_rational(text).map_err(|e| Self::error_at(&n, e.to_string()))?;
                if !in_unit_interval(&value) {
                    return Err(DslError::Range {
                        line: n.line,
                        column: n.column,
                        value,
                    });
                }
                self.file.assessments.push((target, value));
                self.expect(";")
            }
            "query" => {
                let q = self.bump();
                let query = match &q.tok {
                    Tok::Ident(s) if s == "coherent" => Query::Coherent,
                    Tok::Ident(s) if s == "bounds" => {
                        self.expect("(")?;
                        let target = self.target()?;
                        self.expect(")")?;
                        Query::Bounds(target)
                    }
                    _ => {
                        return Err(Self::error_at(
                            &q,
                            format!("expected `coherent` or `bounds`, found {}", q.tok),
                        ))
                    }
                };
                self.file.queries.push(query);
                self.expect(";")
            }
            _ => Err(Self::error_at(&t, format!("unknown statement `{word}`"))),
        }
    }

    fn event(&mut self) -> Result<EventExpr, DslError> {
        let lhs = self.implication()?;
        if self.eat("<->") {
            let rhs = self.event()?;
            return Ok(lhs.clone().and(rhs.clone()).or(lhs.negate().and(rhs.negate())));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<EventExpr, DslError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            return Ok(lhs.negate().or(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<EventExpr, DslError> {
        let mut e = self.conjunction()?;
        while self.eat_word("v") {
            e = e.or(self.conjunction()?);
        }
        Ok(e)
    }

    fn conjunction(&mut self) -> Result<EventExpr, DslError> {
        let mut e = self.unary()?;
        while self.eat("&") {
            e = e.and(self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<EventExpr, DslError> {
        if self.eat("!") {
            return Ok(self.unary()?.negate());
        }
        if self.eat("(") {
            let e = self.event()?;
            self.expect(")")?;
            return Ok(e);
        }
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if s == "true" => Ok(EventExpr::True),
            Tok::Ident(s) if s == "false" => Ok(EventExpr::False),
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                if self.atoms.contains(s) {
                    Ok(EventExpr::atom(s.clone()))
                } else {
                    Err(unknown(&t, "atom", s))
                }
            }
            _ => Err(Self::error_at(&t, format!("expected an event, found {}", t.tok))),
        }
    }

    fn conditional_ref(&mut self) -> Result<String, DslError> {
        let (name, at) = self.name("a conditional name")?;
        if self.file.conditionals.iter().any(|(n, _)| *n == name) {
            Ok(name)
        } else {
            Err(unknown(&at, "conditional", &name))
        }
    }

    fn literal(&mut self) -> Result<(Literal, Spanned), DslError> {
        let at = self.peek().clone();
        let negated = self.eat("!");
        Ok((
            Literal {
                name: self.conditional_ref()?,
                negated,
            },
            at,
        ))
    }

    fn target(&mut self) -> Result<Target, DslError> {
        let start = self.peek().clone();
        let target = if start.tok == Tok::Ident("Q".into()) {
            self.bump();
            self.expect("(")?;
            let mut names = vec![self.conditional_ref()?];
            while self.eat(",") {
                names.push(self.conditional_ref()?);
            }
            self.expect(")")?;
            Target::Quasi(names)
        } else {
            let (first, _) = self.literal()?;
            if self.peek().tok == Tok::Ident("v".into()) {
                if first.negated {
                    return Err(Self::error_at(&start, "negated conditionals cannot be disjoined"));
                }
                let mut names = vec![first.name];
                while self.eat_word("v") {
                    names.push(self.conditional_ref()?);
                }
                Target::Disjunction(names)
            } else {
                let mut lits = vec![first];
                while self.eat("^") {
                    let (lit, _) = self.literal()?;
                    lits.push(lit);
                }
                Target::Conjunction(lits)
            }
        };
        let names = target.names();
        let distinct: BTreeSet<&str> = names.iter().copied().collect();
        if distinct.len() != names.len() {
            return Err(Self::error_at(&start, "a conditional appears twice in the same compound"));
        }
        Ok(target)
    }
}

fn duplicate(at: &Spanned, name: String) -> DslError {
    DslError::Duplicate {
        line: at.line,
        column: at.column,
        name,
    }
}

fn unknown(at: &Spanned, kind: &'static str, name: &str) -> DslError {
    DslError::Unknown {
        line: at.line,
        column: at.column,
        kind,
        name: name.to_string(),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, DslError> {
    Parser {
        toks: lex(text)?,
        pos: 0,
        file: ProblemFile::default(),
        atoms: BTreeSet::new(),
    }
    .problem()
}

/// Parses a compound expression over the conditionals defined in `file`.
pub fn parse_target(text: &str, file: &ProblemFile) -> Result<Target, DslError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        file: file.clone(),
        atoms: file.atoms.iter().cloned().collect(),
    };
    let t = p.target()?;
    let end = p.bump();
    if end.tok != Tok::End {
        return Err(Parser::error_at(&end, format!("unexpected {}", end.tok)));
    }
    Ok(t)
}
