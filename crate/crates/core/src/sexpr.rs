//! S-expression surface syntax and session files.
//!
//! ```text
//! (session 2 mrl (filter [0]))
//! (def ax (d (seq (ifm [0] (atom a)) (ifm [1] (atom a))) (rule id [0,1])))
//! (seq (ifm [0,1] (atom a)))
//! ```
//!
//! Formulas: `(atom p t...)`, `(neg [f] A)`, `(conj w A B)`,
//! `(imp [f] w A B)`, `(bang w A)`, `(forall w x A)` where `w` is an
//! ultrafilter witness and `[f]` lists an endomorphism's images. Terms:
//! `(var x)`, `(cst c)`, `(app f t...)`. Derivations:
//! `(d <seq> (rule <tag> <params>) <premises>...)`. Objects without a `def`
//! are named by their index. `;` starts a line comment.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::checker::{self, Calculus, Derivation, LogicMode, Rule, RuleTag};
use crate::roles::{Endomorphism, PrincipalFilter, RoleSet, Ultrafilter, Universe};
use crate::syntax::{Formula, IFormula, Sequent, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: universe mismatch: {msg}")]
    UniverseMismatch { pos: Pos, msg: String },
    #[error("{pos}: exponential in an MRL session")]
    BangInMRL { pos: Pos },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UniverseMismatch { pos, .. } | ParseError::BangInMRL { pos } => *pos,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::UniverseMismatch { .. } => "UniverseMismatch",
            ParseError::BangInMRL { .. } => "BangInMRL",
        }
    }
}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionHeader {
    pub universe: Universe,
    pub mode: LogicMode,
    pub filter: Option<PrincipalFilter>,
}

impl SessionHeader {
    pub fn new(universe: Universe, mode: LogicMode) -> Self {
        SessionHeader { universe, mode, filter: None }
    }

    pub fn calculus(&self) -> Calculus {
        let calc = Calculus::new(self.universe, self.mode);
        match self.filter {
            Some(f) => calc.restricted(f),
            None => calc,
        }
    }
}

impl fmt::Display for SessionHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(session {} {}", self.universe.size(), self.mode)?;
        if let Some(filter) = self.filter {
            write!(f, " {filter}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone)]
pub enum Object {
    Formula(Formula),
    IFormula(IFormula),
    Sequent(Sequent),
    Derivation(Derivation),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Formula(_) => "formula",
            Object::IFormula(_) => "i-formula",
            Object::Sequent(_) => "sequent",
            Object::Derivation(_) => "derivation",
        }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Formula(x) => write!(f, "{x}"),
            Object::IFormula(x) => write!(f, "{x}"),
            Object::Sequent(x) => write!(f, "{x}"),
            Object::Derivation(d) => f.write_str(&print_derivation(d)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Named {
    pub name: String,
    /// Whether the name was given by a `def`.
    pub explicit: bool,
    pub object: Object,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub header: SessionHeader,
    pub objects: Vec<Named>,
}

impl Session {
    pub fn new(header: SessionHeader) -> Self {
        Session { header, objects: Vec::new() }
    }

    pub fn get(&self, name: &str) -> Option<&Named> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn derivations(&self) -> impl Iterator<Item = (&str, &Derivation)> {
        self.objects.iter().filter_map(|o| match &o.object {
            Object::Derivation(d) => Some((o.name.as_str(), d)),
            _ => None,
        })
    }

    /// Appends an object under `name`.
    pub fn push(&mut self, name: impl Into<String>, object: Object) {
        let pos = Pos { line: 0, col: 0 };
        self.objects.push(Named { name: name.into(), explicit: true, object, pos });
    }
}

/// The canonical form: header, then one object per `def` or bare line.
impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.header)?;
        for o in &self.objects {
            let body = match &o.object {
                Object::Derivation(d) => print_derivation(d),
                other => other.to_string(),
            };
            if o.explicit {
                if body.contains('\n') {
                    writeln!(f, "(def {}\n  {})", o.name, body.replace('\n', "\n  "))?;
                } else {
                    writeln!(f, "(def {} {})", o.name, body)?;
                }
            } else {
                writeln!(f, "{body}")?;
            }
        }
        Ok(())
    }
}

/// Prints a derivation with one node per line, premises indented.
pub fn print_derivation(d: &Derivation) -> String {
    let mut out = String::new();
    // Each entry opens a node or closes the innermost open one.
    enum Step<'a> {
        Open(&'a Derivation, usize),
        Close,
    }
    let mut stack = vec![Step::Open(d, 0)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Open(node, depth) => {
                if depth > 0 {
                    out.push('\n');
                    out.push_str(&"  ".repeat(depth));
                }
                let _ = write!(out, "(d {} {}", node.conclusion, print_rule(&node.rule));
                stack.push(Step::Close);
                for p in node.premises.iter().rev() {
                    stack.push(Step::Open(p, depth + 1));
                }
            }
            Step::Close => out.push(')'),
        }
    }
    out
}

pub fn print_rule(rule: &Rule) -> String {
    let list = |xs: &[usize]| format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    let tag = rule.tag().name();
    match rule {
        Rule::Id { parts } => format!("(rule {tag} {})", list(parts)),
        Rule::ImpPos { at, left } => format!("(rule {tag} {at} {})", list(left)),
        Rule::ForallNeg { at, witness } => format!("(rule {tag} {at} {witness})"),
        Rule::ForallPos { at, eigen } => format!("(rule {tag} {at} {eigen})"),
        other => format!("(rule {tag} {})", other.at().unwrap_or(0)),
    }
}

// ---- lexer -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    List(Vec<usize>),
    Word(String),
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let bump = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    bump(c, &mut line, &mut col);
                }
            }
            '(' | ')' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push((if c == '(' { Tok::Open } else { Tok::Close }, pos));
            }
            '[' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let mut body = String::new();
                loop {
                    match chars.next() {
                        Some(']') => {
                            bump(']', &mut line, &mut col);
                            break;
                        }
                        Some(c) => {
                            bump(c, &mut line, &mut col);
                            body.push(c);
                        }
                        None => return Err(syntax(pos, "unterminated '['")),
                    }
                }
                let mut items = Vec::new();
                for part in body.split(',').map(str::trim) {
                    if part.is_empty() {
                        continue;
                    }
                    items.push(part.parse().map_err(|_| syntax(pos, format!("'{part}' is not a role index")))?);
                }
                out.push((Tok::List(items), pos));
            }
            ']' => return Err(syntax(pos, "unbalanced ']'")),
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ';') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                }
                out.push((Tok::Word(word), pos));
            }
        }
    }
    Ok(out)
}

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

// ---- parser ----------------------------------------------------------------

struct Parser<'h> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    header: Option<&'h SessionHeader>,
}

impl<'h> Parser<'h> {
    fn new(text: &str, header: Option<&'h SessionHeader>) -> Result<Self> {
        let toks = lex(text)?;
        let lines = text.lines().count().max(1);
        let end = Pos { line: lines, col: text.lines().last().map_or(1, |l| l.chars().count() + 1) };
        Ok(Parser { toks, at: 0, end, header })
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |t| t.1)
    }

    fn done(&self) -> bool {
        self.at >= self.toks.len()
    }

    fn next(&mut self) -> Result<(Tok, Pos)> {
        let t = self.toks.get(self.at).cloned().ok_or_else(|| syntax(self.end, "unexpected end of input"))?;
        self.at += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn open(&mut self) -> Result<Pos> {
        match self.next()? {
            (Tok::Open, p) => Ok(p),
            (_, p) => Err(syntax(p, "expected '('")),
        }
    }

    fn close(&mut self) -> Result<()> {
        match self.next()? {
            (Tok::Close, _) => Ok(()),
            (_, p) => Err(syntax(p, "expected ')'")),
        }
    }

    fn word(&mut self) -> Result<(String, Pos)> {
        match self.next()? {
            (Tok::Word(w), p) => Ok((w, p)),
            (_, p) => Err(syntax(p, "expected a name")),
        }
    }

    fn number(&mut self) -> Result<(usize, Pos)> {
        let (w, p) = self.word()?;
        w.parse().map(|n| (n, p)).map_err(|_| syntax(p, format!("'{w}' is not a number")))
    }

    fn list(&mut self) -> Result<(Vec<usize>, Pos)> {
        match self.next()? {
            (Tok::List(xs), p) => Ok((xs, p)),
            (_, p) => Err(syntax(p, "expected a bracketed list")),
        }
    }

    fn header(&self) -> &'h SessionHeader {
        self.header.expect("objects are parsed inside a session")
    }

    fn universe(&self) -> Universe {
        self.header().universe
    }

    fn mismatch(pos: Pos, e: impl fmt::Display) -> ParseError {
        ParseError::UniverseMismatch { pos, msg: e.to_string() }
    }

    /// Reads `(word` and returns the head word.
    fn head(&mut self) -> Result<(String, Pos)> {
        self.open()?;
        self.word()
    }

    fn at_close(&self) -> bool {
        matches!(self.peek(), Some(Tok::Close))
    }

    // ---- roles ----

    fn role_set(&mut self) -> Result<RoleSet> {
        let (xs, p) = self.list()?;
        self.universe().set(xs).map_err(|e| Self::mismatch(p, e))
    }

    fn endomorphism(&mut self) -> Result<Endomorphism> {
        let (xs, p) = self.list()?;
        self.universe().endomorphism(xs).map_err(|e| Self::mismatch(p, e))
    }

    fn witness(&mut self) -> Result<Ultrafilter> {
        let (w, p) = self.number()?;
        self.universe().ultrafilter(w).map_err(|e| Self::mismatch(p, e))
    }

    // ---- terms and formulas ----

    fn term(&mut self) -> Result<Term> {
        let (h, p) = self.head()?;
        let t = match h.as_str() {
            "var" => Term::var(self.word()?.0),
            "cst" => Term::cst(self.word()?.0),
            "app" => {
                let f = self.word()?.0;
                let mut args = Vec::new();
                while !self.at_close() {
                    args.push(self.term()?);
                }
                Term::app(f, args)
            }
            other => return Err(syntax(p, format!("unknown term former '{other}'"))),
        };
        self.close()?;
        Ok(t)
    }

    fn formula(&mut self) -> Result<Formula> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            let (h, p) = self.head()?;
            let f = self.formula_body(&h, p)?;
            self.close()?;
            Ok(f)
        })
    }

    fn formula_body(&mut self, head: &str, p: Pos) -> Result<Formula> {
        Ok(match head {
            "atom" => {
                let pred = self.word()?.0;
                let mut args = Vec::new();
                while !self.at_close() {
                    args.push(self.term()?);
                }
                Formula::atom(pred, args)
            }
            "neg" => {
                let f = self.endomorphism()?;
                Formula::neg(f, self.formula()?)
            }
            "conj" => {
                let u = self.witness()?;
                let a = self.formula()?;
                Formula::conj(u, a, self.formula()?)
            }
            "imp" => {
                let f = self.endomorphism()?;
                let u = self.witness()?;
                let a = self.formula()?;
                Formula::imp(f, u, a, self.formula()?)
            }
            "bang" => {
                if self.header().mode == LogicMode::Mrl {
                    return Err(ParseError::BangInMRL { pos: p });
                }
                let u = self.witness()?;
                Formula::bang(u, self.formula()?)
            }
            "forall" => {
                let u = self.witness()?;
                let x = self.word()?.0;
                Formula::forall(u, &x, self.formula()?)
            }
            other => return Err(syntax(p, format!("unknown formula former '{other}'"))),
        })
    }

    fn ifm_body(&mut self) -> Result<IFormula> {
        let r = self.role_set()?;
        Ok(IFormula::new(r, self.formula()?))
    }

    fn ifm(&mut self) -> Result<IFormula> {
        let (h, p) = self.head()?;
        if h != "ifm" {
            return Err(syntax(p, "expected (ifm ...)"));
        }
        let x = self.ifm_body()?;
        self.close()?;
        Ok(x)
    }

    fn seq_body(&mut self) -> Result<Sequent> {
        let mut items = Vec::new();
        while !self.at_close() {
            items.push(self.ifm()?);
        }
        Ok(Sequent::new(items))
    }

    fn seq(&mut self) -> Result<Sequent> {
        let (h, p) = self.head()?;
        if h != "seq" {
            return Err(syntax(p, "expected (seq ...)"));
        }
        let s = self.seq_body()?;
        self.close()?;
        Ok(s)
    }

    // ---- derivations ----

    fn rule(&mut self) -> Result<Rule> {
        let (h, p) = self.head()?;
        if h != "rule" {
            return Err(syntax(p, "expected (rule ...)"));
        }
        let (name, np) = self.word()?;
        let tag = RuleTag::from_name(&name).ok_or_else(|| syntax(np, format!("unknown rule '{name}'")))?;
        let rule = match tag {
            RuleTag::Id => Rule::Id { parts: self.list()?.0 },
            RuleTag::ImpPos => {
                let at = self.number()?.0;
                Rule::ImpPos { at, left: self.list()?.0 }
            }
            RuleTag::ForallNeg => {
                let at = self.number()?.0;
                Rule::ForallNeg { at, witness: self.term()? }
            }
            RuleTag::ForallPos => {
                let at = self.number()?.0;
                Rule::ForallPos { at, eigen: self.word()?.0 }
            }
            _ => {
                let at = self.number()?.0;
                match tag {
                    RuleTag::Contract => Rule::Contract { at },
                    RuleTag::Neg => Rule::Neg { at },
                    RuleTag::ConjNegL => Rule::ConjNegL { at },
                    RuleTag::ConjNegR => Rule::ConjNegR { at },
                    RuleTag::ConjPos => Rule::ConjPos { at },
                    RuleTag::ImpNeg => Rule::ImpNeg { at },
                    RuleTag::BangPos => Rule::BangPos { at },
                    RuleTag::BangNegWeaken => Rule::BangNegWeaken { at },
                    RuleTag::BangNegDerelict => Rule::BangNegDerelict { at },
                    _ => Rule::BangNegContract { at },
                }
            }
        };
        self.close()?;
        Ok(rule)
    }

    fn derivation_body(&mut self) -> Result<Derivation> {
        let conclusion = self.seq()?;
        let rule = self.rule()?;
        let mut premises = Vec::new();
        while !self.at_close() {
            premises.push(self.derivation()?);
        }
        Ok(Derivation::new(conclusion, rule, premises))
    }

    fn derivation(&mut self) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            let (h, p) = self.head()?;
            if h != "d" {
                return Err(syntax(p, "expected (d ...)"));
            }
            let d = self.derivation_body()?;
            self.close()?;
            Ok(d)
        })
    }

    fn object(&mut self) -> Result<Object> {
        let (h, p) = self.head()?;
        let obj = match h.as_str() {
            "d" => Object::Derivation(self.derivation_body()?),
            "seq" => Object::Sequent(self.seq_body()?),
            "ifm" => Object::IFormula(self.ifm_body()?),
            "atom" | "neg" | "conj" | "imp" | "bang" | "forall" => Object::Formula(self.formula_body(&h, p)?),
            other => return Err(syntax(p, format!("unknown object '{other}'"))),
        };
        self.close()?;
        Ok(obj)
    }

    fn session_header(&mut self) -> Result<SessionHeader> {
        let (h, p) = self.head()?;
        if h != "session" {
            return Err(syntax(p, "a file starts with (session <n> <mode> [(filter [core])])"));
        }
        let (n, np) = self.number()?;
        let universe = Universe::new(n).map_err(|e| Self::mismatch(np, e))?;
        let (mode, mp) = self.word()?;
        let mode = match mode.as_str() {
            "mrl" => LogicMode::Mrl,
            "lmrl" => LogicMode::Lmrl,
            other => return Err(syntax(mp, format!("unknown mode '{other}' (mrl or lmrl)"))),
        };
        let mut filter = None;
        if !self.at_close() {
            let (fh, fp) = self.head()?;
            if fh != "filter" {
                return Err(syntax(fp, "expected (filter [core])"));
            }
            let (xs, lp) = self.list()?;
            let core = universe.set(xs).map_err(|e| Self::mismatch(lp, e))?;
            if core.is_empty() {
                return Err(Self::mismatch(lp, "a filter core must be non-empty"));
            }
            filter = Some(PrincipalFilter::new(core));
            self.close()?;
        }
        self.close()?;
        Ok(SessionHeader { universe, mode, filter })
    }

    fn finish(&self) -> Result<()> {
        if self.done() {
            Ok(())
        } else {
            Err(syntax(self.pos(), "trailing input"))
        }
    }
}

/// Parses a session file.
pub fn parse_session(text: &str) -> Result<Session> {
    let mut p = Parser::new(text, None)?;
    let header = p.session_header()?;
    let mut p = Parser { header: Some(&header), ..p };
    let mut objects: Vec<Named> = Vec::new();
    while !p.done() {
        let pos = p.pos();
        let is_def = matches!(p.toks.get(p.at + 1), Some((Tok::Word(w), _)) if w == "def")
            && matches!(p.peek(), Some(Tok::Open));
        let (name, explicit, object) = if is_def {
            p.open()?;
            p.word()?;
            let (name, np) = p.word()?;
            if objects.iter().any(|o| o.name == name) {
                return Err(syntax(np, format!("'{name}' is defined twice")));
            }
            let object = p.object()?;
            p.close()?;
            (name, true, object)
        } else {
            (objects.len().to_string(), false, p.object()?)
        };
        objects.push(Named { name, explicit, object, pos });
    }
    Ok(Session { header, objects })
}

pub fn parse_formula(text: &str, header: &SessionHeader) -> Result<Formula> {
    let mut p = Parser::new(text, Some(header))?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_ifm(text: &str, header: &SessionHeader) -> Result<IFormula> {
    let mut p = Parser::new(text, Some(header))?;
    let x = p.ifm()?;
    p.finish()?;
    Ok(x)
}

pub fn parse_sequent(text: &str, header: &SessionHeader) -> Result<Sequent> {
    let mut p = Parser::new(text, Some(header))?;
    let s = p.seq()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_derivation(text: &str, header: &SessionHeader) -> Result<Derivation> {
    let mut p = Parser::new(text, Some(header))?;
    let d = p.derivation()?;
    p.finish()?;
    Ok(d)
}

/// A role set written `[0,1]`.
pub fn parse_role_set(text: &str, universe: Universe) -> Result<RoleSet> {
    let header = SessionHeader::new(universe, LogicMode::Mrl);
    let mut p = Parser::new(text, Some(&header))?;
    let r = p.role_set()?;
    p.finish()?;
    Ok(r)
}

/// Canonical re-print of a session file.
pub fn format_session(text: &str) -> Result<String> {
    Ok(parse_session(text)?.to_string())
}

#[cfg(test)]
mod tests;
