//! The `.blu` document language: lexer, syntax tree, parser and printer.
//!
//! ```text
//! builtin N
//! blueprint B = F1[a, b, g, h] / { a*h = b*g, g + h = 1 }
//! blueprint Bg = B[1/g]
//! module M over N = <X1, X2> / { 2*X2 = 3*X1 }
//! morphism f : B -> Bg { a -> a }
//! presentation P { charts X = A, T = Bg; arrows T -> X = f; }
//! presentation C = cover B by g, h
//! ```

use std::fmt::{self, Write as _};

use serde::Serialize;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Spans are diagnostics only and never distinguish two documents.
impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }

    /// One-based line and column of the start.
    pub fn line_col(&self, src: &str) -> (usize, usize) {
        let before = &src[..self.start.min(src.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DslError {
    #[error("syntax error: {message}")]
    Syntax { message: String, span: Span },
    #[error("unresolved name `{name}`")]
    UnresolvedName { name: String, span: Span },
    #[error("duplicate name `{name}`")]
    DuplicateName { name: String, span: Span },
    #[error("`{name}` is a {found}, expected a {expected}")]
    WrongKind { name: String, expected: &'static str, found: &'static str, span: Span },
    #[error("invalid declaration `{name}`: {message}")]
    Invalid { name: String, message: String, span: Span },
}

impl DslError {
    pub fn span(&self) -> Span {
        match self {
            DslError::Syntax { span, .. }
            | DslError::UnresolvedName { span, .. }
            | DslError::DuplicateName { span, .. }
            | DslError::WrongKind { span, .. }
            | DslError::Invalid { span, .. } => *span,
        }
    }

    /// `origin:line:col: message`.
    pub fn render(&self, origin: &str, src: &str) -> String {
        let (line, col) = self.span().line_col(src);
        format!("{origin}:{line}:{col}: {self}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

/// A monomial: a rational coefficient times named factors with exponents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub numer: i128,
    pub denom: i128,
    pub factors: Vec<(Ident, u32)>,
    pub span: Span,
}

/// A formal sum; the empty sum is written `0` or `*`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sum {
    pub terms: Vec<Term>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relation {
    pub lhs: Sum,
    pub rhs: Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coefficients {
    F1,
    Nat,
    Int,
    IntMod(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum BlueprintExpr {
    /// `F1[a, b] / { ... }`, or a declared builtin as the coefficient head.
    Free { head: Ident, coefficients: Option<Coefficients>, atoms: Vec<Ident>, relations: Vec<Relation> },
    /// `B[1/g, 1/(g*h)]`.
    Localize { base: Ident, at: Vec<Term> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PresentationExpr {
    Diagram { charts: Vec<(Ident, Ident)>, arrows: Vec<(Ident, Ident, Ident)> },
    Cover { base: Ident, by: Vec<Term> },
    Spec { base: Ident },
    Atlas { of: Ident },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DeclBody {
    Builtin(Coefficients),
    Blueprint(BlueprintExpr),
    Module { base: Ident, generators: Vec<Ident>, relations: Vec<Relation> },
    Morphism { source: Ident, target: Ident, assignments: Vec<(Ident, Term)> },
    Presentation(PresentationExpr),
}

impl DeclBody {
    pub fn kind(&self) -> &'static str {
        match self {
            DeclBody::Builtin(_) | DeclBody::Blueprint(_) => "blueprint",
            DeclBody::Module { .. } => "module",
            DeclBody::Morphism { .. } => "morphism",
            DeclBody::Presentation(_) => "presentation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decl {
    pub name: Ident,
    pub body: DeclBody,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Document {
    pub decls: Vec<Decl>,
}

impl Document {
    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name.text == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i128),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 18] = ["->", "=", "[", "]", "/", "{", "}", ",", ";", ":", "+", "*", "^", "(", ")", "-", "<", ">"];

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, DslError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), Span { start, end: i }));
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let span = Span { start, end: i };
            let n = src[start..i]
                .parse()
                .map_err(|_| DslError::Syntax { message: "integer out of range".into(), span })?;
            out.push((Tok::Int(n), span));
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                i += s.len();
                out.push((Tok::Sym(s), Span { start, end: i }));
            }
            None => {
                let end = start + c.len_utf8();
                return Err(DslError::Syntax { message: format!("unexpected character `{c}`"), span: Span { start, end } });
            }
        }
    }
    out.push((Tok::Eof, Span { start: src.len(), end: src.len() }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(DslError::Syntax { message: format!("expected {expected}, found {}", self.peek()), span: self.span() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> Result<Span, DslError> {
        if self.is_sym(s) {
            Ok(self.bump().1)
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn word(&mut self, w: &str) -> Result<Span, DslError> {
        if self.is_word(w) {
            Ok(self.bump().1)
        } else {
            self.error(&format!("`{w}`"))
        }
    }

    fn ident(&mut self) -> Result<Ident, DslError> {
        match self.peek().clone() {
            Tok::Ident(text) => {
                let span = self.bump().1;
                Ok(Ident { text, span })
            }
            _ => self.error("a name"),
        }
    }

    fn int(&mut self) -> Result<i128, DslError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error("an integer"),
        }
    }

    /// Comma-separated items, possibly empty when `close` follows at once.
    fn list<T>(&mut self, close: &str, mut item: impl FnMut(&mut Self) -> Result<T, DslError>) -> Result<Vec<T>, DslError> {
        let mut out = Vec::new();
        if self.is_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if !self.eat_sym(",") {
                return Ok(out);
            }
        }
    }

    fn document(&mut self) -> Result<Document, DslError> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(Document { decls })
    }

    fn decl(&mut self) -> Result<Decl, DslError> {
        let start = self.span();
        let keyword = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return self.error("a declaration"),
        };
        self.bump();
        let (name, body) = match keyword.as_str() {
            "builtin" => {
                let name = self.ident()?;
                let c = if self.eat_sym("=") {
                    self.coefficients()?
                } else {
                    match keyword_coefficients(&name.text) {
                        Some(c) => c,
                        None => {
                            return Err(DslError::Syntax {
                                message: format!("`{}` is not a builtin; write `builtin {} = N`", name.text, name.text),
                                span: name.span,
                            })
                        }
                    }
                };
                (name, DeclBody::Builtin(c))
            }
            "blueprint" => {
                let name = self.ident()?;
                self.sym("=")?;
                (name, DeclBody::Blueprint(self.blueprint_expr()?))
            }
            "module" => {
                let name = self.ident()?;
                self.word("over")?;
                let base = self.ident()?;
                self.sym("=")?;
                self.sym("<")?;
                let generators = self.list(">", Self::ident)?;
                self.sym(">")?;
                let relations = self.relations()?;
                (name, DeclBody::Module { base, generators, relations })
            }
            "morphism" => {
                let name = self.ident()?;
                self.sym(":")?;
                let source = self.ident()?;
                self.sym("->")?;
                let target = self.ident()?;
                self.sym("{")?;
                let assignments = self.list("}", |p| {
                    let atom = p.ident()?;
                    p.sym("->")?;
                    Ok((atom, p.term()?))
                })?;
                self.sym("}")?;
                (name, DeclBody::Morphism { source, target, assignments })
            }
            "presentation" => {
                let name = self.ident()?;
                (name, DeclBody::Presentation(self.presentation_expr()?))
            }
            _ => {
                return Err(DslError::Syntax {
                    message: format!("unknown declaration `{keyword}`; expected builtin, blueprint, module, morphism or presentation"),
                    span: start,
                })
            }
        };
        Ok(Decl { name, body, span: start.join(self.prev_span()) })
    }

    fn coefficients(&mut self) -> Result<Coefficients, DslError> {
        let id = self.ident()?;
        match keyword_coefficients(&id.text) {
            Some(Coefficients::Int) if self.is_sym("/") && matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let span = self.span();
                let n = self.int()?;
                if n < 2 || n > u32::MAX as i128 {
                    return Err(DslError::Syntax { message: format!("modulus {n} out of range"), span });
                }
                Ok(Coefficients::IntMod(n as u64))
            }
            Some(c) => Ok(c),
            None => Err(DslError::Syntax { message: format!("`{}` is not F1, N, Z or Z/n", id.text), span: id.span }),
        }
    }

    fn blueprint_expr(&mut self) -> Result<BlueprintExpr, DslError> {
        let head = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return self.error("F1, N, Z or a blueprint name"),
        };
        let mut coefficients = keyword_coefficients(&head.text);
        if coefficients == Some(Coefficients::Int) && self.is_sym("/") && matches!(self.peek_at(1), Tok::Int(_)) {
            self.pos -= 1;
            coefficients = Some(self.coefficients()?);
        }
        let mut atoms = Vec::new();
        if self.eat_sym("[") {
            if matches!(self.peek(), Tok::Int(1)) && matches!(self.peek_at(1), Tok::Sym("/")) {
                let at = self.list("]", |p| {
                    let s = p.span();
                    if p.int()? != 1 {
                        return Err(DslError::Syntax { message: "expected `1/` before an inverted element".into(), span: s });
                    }
                    p.sym("/")?;
                    if p.eat_sym("(") {
                        let t = p.term()?;
                        p.sym(")")?;
                        Ok(t)
                    } else {
                        p.factor_term()
                    }
                })?;
                self.sym("]")?;
                return Ok(BlueprintExpr::Localize { base: head, at });
            }
            atoms = self.list("]", Self::ident)?;
            self.sym("]")?;
        }
        let relations = self.relations()?;
        Ok(BlueprintExpr::Free { head, coefficients, atoms, relations })
    }

    fn relations(&mut self) -> Result<Vec<Relation>, DslError> {
        if !self.eat_sym("/") {
            return Ok(vec![]);
        }
        self.sym("{")?;
        let rels = self.list("}", |p| {
            let lhs = p.sum()?;
            p.sym("=")?;
            let rhs = p.sum()?;
            Ok(Relation { lhs, rhs })
        })?;
        self.sym("}")?;
        Ok(rels)
    }

    fn presentation_expr(&mut self) -> Result<PresentationExpr, DslError> {
        if self.eat_sym("=") {
            let w = self.ident()?;
            return match w.text.as_str() {
                "cover" => {
                    let base = self.ident()?;
                    self.word("by")?;
                    let mut by = vec![self.term()?];
                    while self.eat_sym(",") {
                        by.push(self.term()?);
                    }
                    Ok(PresentationExpr::Cover { base, by })
                }
                "spec" => Ok(PresentationExpr::Spec { base: self.ident()? }),
                "atlas" => Ok(PresentationExpr::Atlas { of: self.ident()? }),
                _ => Err(DslError::Syntax { message: format!("expected cover, spec or atlas, found `{}`", w.text), span: w.span }),
            };
        }
        self.sym("{")?;
        self.word("charts")?;
        let charts = self.list(";", |p| {
            let n = p.ident()?;
            p.sym("=")?;
            Ok((n, p.ident()?))
        })?;
        self.sym(";")?;
        let mut arrows = Vec::new();
        if self.is_word("arrows") {
            self.bump();
            arrows = self.list(";", |p| {
                let from = p.ident()?;
                p.sym("->")?;
                let to = p.ident()?;
                p.sym("=")?;
                Ok((from, to, p.ident()?))
            })?;
            self.sym(";")?;
        }
        self.sym("}")?;
        Ok(PresentationExpr::Diagram { charts, arrows })
    }

    fn sum(&mut self) -> Result<Sum, DslError> {
        let start = self.span();
        if self.eat_sym("*") {
            return Ok(Sum { terms: vec![], span: start });
        }
        if matches!(self.peek(), Tok::Int(0)) && !matches!(self.peek_at(1), Tok::Sym("*" | "+")) {
            self.bump();
            return Ok(Sum { terms: vec![], span: start });
        }
        let mut terms = vec![self.term()?];
        while self.eat_sym("+") {
            terms.push(self.term()?);
        }
        Ok(Sum { terms, span: start.join(self.prev_span()) })
    }

    fn term(&mut self) -> Result<Term, DslError> {
        let start = self.span();
        let mut t = Term { numer: 1, denom: 1, factors: vec![], span: start };
        self.factor(&mut t)?;
        while self.eat_sym("*") {
            self.factor(&mut t)?;
        }
        t.span = start.join(self.prev_span());
        Ok(t)
    }

    /// A single factor read as a term, as in `1/g`.
    fn factor_term(&mut self) -> Result<Term, DslError> {
        let start = self.span();
        let mut t = Term { numer: 1, denom: 1, factors: vec![], span: start };
        self.factor(&mut t)?;
        t.span = start.join(self.prev_span());
        Ok(t)
    }

    fn factor(&mut self, t: &mut Term) -> Result<(), DslError> {
        let overflow = |span| DslError::Syntax { message: "coefficient out of range".into(), span };
        match self.peek().clone() {
            Tok::Int(n) => {
                let span = self.bump().1;
                t.numer = t.numer.checked_mul(n).ok_or(overflow(span))?;
            }
            Tok::Sym("-") => {
                let span = self.bump().1;
                let n = self.int()?;
                t.numer = t.numer.checked_mul(-n).ok_or(overflow(span))?;
            }
            Tok::Sym("(") => {
                let span = self.bump().1;
                let neg = self.eat_sym("-");
                let n = self.int()?;
                self.sym("/")?;
                let dspan = self.span();
                let d = self.int()?;
                if d == 0 {
                    return Err(DslError::Syntax { message: "zero denominator".into(), span: dspan });
                }
                self.sym(")")?;
                t.numer = t.numer.checked_mul(if neg { -n } else { n }).ok_or(overflow(span))?;
                t.denom = t.denom.checked_mul(d).ok_or(overflow(span))?;
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                let mut k = 1;
                if self.eat_sym("^") {
                    let span = self.span();
                    let e = self.int()?;
                    if e < 1 || e > u32::MAX as i128 {
                        return Err(DslError::Syntax { message: "exponents must be positive".into(), span });
                    }
                    k = e as u32;
                }
                t.factors.push((name, k));
            }
            _ => return self.error("a factor"),
        }
        Ok(())
    }
}

fn keyword_coefficients(s: &str) -> Option<Coefficients> {
    match s {
        "F1" => Some(Coefficients::F1),
        "N" => Some(Coefficients::Nat),
        "Z" => Some(Coefficients::Int),
        _ => None,
    }
}

pub fn parse(src: &str) -> Result<Document, DslError> {
    Parser { toks: lex(src)?, pos: 0 }.document()
}

/// Parse a single term such as `g*h` or `10`.
pub fn parse_term(src: &str) -> Result<Term, DslError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.error("end of input");
    }
    Ok(t)
}

impl fmt::Display for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficients::F1 => f.write_str("F1"),
            Coefficients::Nat => f.write_str("N"),
            Coefficients::Int => f.write_str("Z"),
            Coefficients::IntMod(n) => write!(f, "Z/{n}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.denom != 1 {
            parts.push(format!("({}/{})", self.numer, self.denom));
        } else if self.numer != 1 || self.factors.is_empty() {
            parts.push(self.numer.to_string());
        }
        for (name, k) in &self.factors {
            parts.push(if *k == 1 { name.text.clone() } else { format!("{}^{k}", name.text) });
        }
        f.write_str(&parts.join("*"))
    }
}

impl fmt::Display for Sum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

fn names(ids: &[Ident]) -> String {
    ids.iter().map(|i| i.text.as_str()).collect::<Vec<_>>().join(", ")
}

fn joined<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}

fn write_relations(out: &mut String, rels: &[Relation]) {
    if !rels.is_empty() {
        let _ = write!(out, " / {{ {} }}", joined(rels));
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = &self.name.text;
        let mut out = String::new();
        match &self.body {
            DeclBody::Builtin(c) => {
                if keyword_coefficients(name) == Some(*c) {
                    let _ = write!(out, "builtin {name}");
                } else {
                    let _ = write!(out, "builtin {name} = {c}");
                }
            }
            DeclBody::Blueprint(BlueprintExpr::Free { head, coefficients, atoms, relations }) => {
                let head = match coefficients {
                    Some(c) => c.to_string(),
                    None => head.text.clone(),
                };
                let _ = write!(out, "blueprint {name} = {head}");
                if !atoms.is_empty() {
                    let _ = write!(out, "[{}]", names(atoms));
                }
                write_relations(&mut out, relations);
            }
            DeclBody::Blueprint(BlueprintExpr::Localize { base, at }) => {
                let items: Vec<String> = at
                    .iter()
                    .map(|t| {
                        if t.denom != 1 || t.factors.len() + usize::from(t.numer != 1) > 1 {
                            format!("1/({t})")
                        } else {
                            format!("1/{t}")
                        }
                    })
                    .collect();
                let _ = write!(out, "blueprint {name} = {}[{}]", base.text, items.join(", "));
            }
            DeclBody::Module { base, generators, relations } => {
                let _ = write!(out, "module {name} over {} = <{}>", base.text, names(generators));
                write_relations(&mut out, relations);
            }
            DeclBody::Morphism { source, target, assignments } => {
                let items: Vec<String> = assignments.iter().map(|(a, t)| format!("{} -> {t}", a.text)).collect();
                let _ = write!(out, "morphism {name} : {} -> {} {{ {} }}", source.text, target.text, items.join(", "));
            }
            DeclBody::Presentation(PresentationExpr::Diagram { charts, arrows }) => {
                let cs: Vec<String> = charts.iter().map(|(n, b)| format!("{} = {}", n.text, b.text)).collect();
                let _ = write!(out, "presentation {name} {{ charts {};", cs.join(", "));
                if !arrows.is_empty() {
                    let ars: Vec<String> = arrows.iter().map(|(a, b, m)| format!("{} -> {} = {}", a.text, b.text, m.text)).collect();
                    let _ = write!(out, " arrows {};", ars.join(", "));
                }
                out.push_str(" }");
            }
            DeclBody::Presentation(PresentationExpr::Cover { base, by }) => {
                let _ = write!(out, "presentation {name} = cover {} by {}", base.text, joined(by));
            }
            DeclBody::Presentation(PresentationExpr::Spec { base }) => {
                let _ = write!(out, "presentation {name} = spec {}", base.text);
            }
            DeclBody::Presentation(PresentationExpr::Atlas { of }) => {
                let _ = write!(out, "presentation {name} = atlas {}", of.text);
            }
        }
        f.write_str(&out)
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}
