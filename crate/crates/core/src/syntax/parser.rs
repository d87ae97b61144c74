use std::collections::BTreeSet;

use super::{
    FreeDecl, Name, Region, RegionDecl, RegionKind, SourceUnit, Span, StoreKind, Term, Type, Var,
};
use crate::usage::{Usage, UsageFamily};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ParseErrorKind {
    Syntax,
    StoreInEvaluationPosition,
    BehaviourInValuePosition,
    NonValuePayload,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::Syntax, span, message: message.into() }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    One,
    Star,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Dot,
    Colon,
    Semi,
    Comma,
    Bar,
    Bang,
    Eq,
    At,
    LArrow,
    LDArrow,
    Lolli,
    EffOpen,
    EffClose,
    Eof,
}

const KEYWORDS: &[&str] = &[
    "fun", "let", "in", "nu", "get", "set", "pset", "store", "region", "free", "main", "Reg",
];

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let adv = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => adv(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '#' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                col += (i - start) as u32;
                out.push((Tok::Ident(chars[start..i].iter().collect()), span));
            }
            _ => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                let (tok, n) = match two.as_str() {
                    "<-" => (Tok::LArrow, 2),
                    "<=" => (Tok::LDArrow, 2),
                    "-o" => (Tok::Lolli, 2),
                    "-{" => (Tok::EffOpen, 2),
                    "}>" => (Tok::EffClose, 2),
                    _ => {
                        let t = match c {
                            '1' => Tok::One,
                            '*' => Tok::Star,
                            '(' => Tok::LParen,
                            ')' => Tok::RParen,
                            '[' => Tok::LBrack,
                            ']' => Tok::RBrack,
                            '.' => Tok::Dot,
                            ':' => Tok::Colon,
                            ';' => Tok::Semi,
                            ',' => Tok::Comma,
                            '|' => Tok::Bar,
                            '!' => Tok::Bang,
                            '=' => Tok::Eq,
                            '@' => Tok::At,
                            _ => {
                                return Err(ParseError::syntax(
                                    span,
                                    format!("unexpected character `{c}`"),
                                ))
                            }
                        };
                        (t, 1)
                    }
                };
                adv(n, &mut i, &mut col);
                out.push((tok, span));
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

/// Source positions mirroring the shape of a parsed term.
struct SpanTree {
    span: Span,
    kids: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: Span) -> Self {
        SpanTree { span, kids: Vec::new() }
    }

    fn node(span: Span, kids: Vec<SpanTree>) -> Self {
        SpanTree { span, kids }
    }

    fn preorder(&self, out: &mut Vec<Span>) {
        out.push(self.span);
        for k in &self.kids {
            k.preorder(out);
        }
    }
}

type Parsed = (Term, SpanTree);

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    seq_counter: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, seq_counter: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(ParseError::syntax(self.span(), format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, ParseError> {
        if self.is_kw(kw) {
            Ok(self.bump().1)
        } else {
            Err(ParseError::syntax(self.span(), format!("expected `{kw}`, found {:?}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.bump().1;
                Ok((s, sp))
            }
            other => Err(ParseError::syntax(
                self.span(),
                format!("expected identifier, found {other:?}"),
            )),
        }
    }

    fn unit(&mut self) -> Result<(Vec<RegionDecl>, Vec<FreeDecl>, Parsed), ParseError> {
        let mut regions = Vec::new();
        let mut free = Vec::new();
        loop {
            if self.is_kw("region") {
                self.bump();
                let (name, _) = self.ident()?;
                let kind = match self.ident()?.0.as_str() {
                    "volatile" => RegionKind::Volatile,
                    "persistent" => RegionKind::Persistent,
                    _ => {
                        return Err(ParseError::syntax(
                            self.toks[self.pos - 1].1,
                            "expected `volatile` or `persistent`",
                        ))
                    }
                };
                let (fam_kw, fam_span) = self.ident()?;
                if fam_kw != "family" {
                    return Err(ParseError::syntax(fam_span, "expected `family`"));
                }
                let (fam, fam_span) = self.ident()?;
                let family = match fam.as_str() {
                    "UU" => UsageFamily::Unrestricted,
                    "WR" => UsageFamily::WriteOnce,
                    "AF" => UsageFamily::Affine,
                    _ => return Err(ParseError::syntax(fam_span, "expected UU, WR or AF")),
                };
                self.expect(Tok::Colon, "`:`")?;
                let content = self.value_type()?;
                self.expect(Tok::Semi, "`;`")?;
                regions.push(RegionDecl { name: Region::new(name), kind, family, content });
            } else if self.is_kw("free") {
                self.bump();
                let (name, _) = self.ident()?;
                let (u, usp) = self.ident()?;
                let usage = match u.as_str() {
                    "aff" => Usage::One,
                    "exp" => Usage::Many,
                    _ => return Err(ParseError::syntax(usp, "expected `aff` or `exp`")),
                };
                self.expect(Tok::Colon, "`:`")?;
                let ty = self.value_type()?;
                self.expect(Tok::Semi, "`;`")?;
                free.push(FreeDecl { name: Name::new(name), usage, ty });
            } else {
                break;
            }
        }
        self.expect_kw("main")?;
        let main = self.expr()?;
        self.expect(Tok::Eof, "end of input")?;
        Ok((regions, free, main))
    }

    fn value_type(&mut self) -> Result<Type, ParseError> {
        let sp = self.span();
        let t = self.ty()?;
        if !t.behaviour_well_placed(true) {
            return Err(ParseError {
                kind: ParseErrorKind::BehaviourInValuePosition,
                span: sp,
                message: format!("`B` cannot be used as a value type in `{t}`"),
            });
        }
        Ok(t)
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let dom = self.ty_prefix()?;
        match self.peek() {
            Tok::Lolli => {
                self.bump();
                let cod = self.ty()?;
                Ok(Type::lolli(dom, cod))
            }
            Tok::EffOpen => {
                self.bump();
                let mut regions = Vec::new();
                if *self.peek() != Tok::EffClose {
                    loop {
                        regions.push(Region::new(self.ident()?.0));
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::EffClose, "`}>`")?;
                let cod = self.ty()?;
                Ok(Type::arrow(dom, regions.into_iter().collect(), cod))
            }
            _ => Ok(dom),
        }
    }

    fn ty_prefix(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::One => {
                self.bump();
                Ok(Type::One)
            }
            Tok::Ident(s) if s == "B" => {
                self.bump();
                Ok(Type::Behaviour)
            }
            Tok::Bang => {
                self.bump();
                Ok(Type::bang(self.ty_prefix()?))
            }
            Tok::Ident(s) if s == "Reg" => {
                self.bump();
                self.expect(Tok::LBrack, "`[`")?;
                let (r, _) = self.ident()?;
                self.expect(Tok::RBrack, "`]`")?;
                Ok(Type::reg(Region::new(r), self.ty_prefix()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            other => Err(ParseError::syntax(self.span(), format!("expected a type, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let mut acc = self.seq()?;
        while *self.peek() == Tok::Bar {
            let sp = self.bump().1;
            let rhs = self.seq()?;
            let span = acc.1.span;
            let _ = sp;
            acc = (Term::par(acc.0, rhs.0), SpanTree::node(span, vec![acc.1, rhs.1]));
        }
        Ok(acc)
    }

    fn seq(&mut self) -> Result<Parsed, ParseError> {
        let first = self.app()?;
        if *self.peek() != Tok::Semi {
            return Ok(first);
        }
        let semi = self.bump().1;
        let rest = self.seq()?;
        self.seq_counter += 1;
        let z = Name::new(format!("_seq{}", self.seq_counter));
        let lam = Term::Lam(z, Type::One, Box::new(rest.0));
        let span = first.1.span;
        Ok((
            Term::app(lam, first.0),
            SpanTree::node(span, vec![SpanTree::node(semi, vec![rest.1]), first.1]),
        ))
    }

    fn starts_prefix(&self) -> bool {
        match self.peek() {
            Tok::Star | Tok::LParen | Tok::Bang => true,
            Tok::Ident(s) => {
                !KEYWORDS.contains(&s.as_str())
                    || matches!(s.as_str(), "fun" | "let" | "nu" | "get" | "set" | "pset" | "store")
            }
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Parsed, ParseError> {
        let mut acc = self.prefix()?;
        while self.starts_prefix() {
            let arg = self.prefix()?;
            let span = acc.1.span;
            acc = (Term::app(acc.0, arg.0), SpanTree::node(span, vec![acc.1, arg.1]));
        }
        Ok(acc)
    }

    fn prefix(&mut self) -> Result<Parsed, ParseError> {
        if *self.peek() == Tok::Bang {
            let sp = self.bump().1;
            let (t, st) = self.prefix()?;
            return Ok((Term::bang(t), SpanTree::node(sp, vec![st])));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Parsed, ParseError> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok((Term::Unit, SpanTree::leaf(sp)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(kw) => match kw.as_str() {
                "fun" => {
                    self.bump();
                    let (x, _) = self.ident()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let ty = self.value_type()?;
                    self.expect(Tok::Dot, "`.`")?;
                    let (body, bst) = self.expr()?;
                    Ok((Term::Lam(Name::new(x), ty, Box::new(body)), SpanTree::node(sp, vec![bst])))
                }
                "let" => {
                    self.bump();
                    self.expect(Tok::Bang, "`!`")?;
                    let (x, _) = self.ident()?;
                    self.expect(Tok::Eq, "`=`")?;
                    let (m, mst) = self.expr()?;
                    self.expect_kw("in")?;
                    let (n, nst) = self.expr()?;
                    Ok((
                        Term::LetBang(Name::new(x), Box::new(m), Box::new(n)),
                        SpanTree::node(sp, vec![mst, nst]),
                    ))
                }
                "nu" => {
                    self.bump();
                    let (x, _) = self.ident()?;
                    self.expect(Tok::At, "`@`")?;
                    let (r, _) = self.ident()?;
                    self.expect(Tok::Colon, "`:`")?;
                    let ty = self.value_type()?;
                    self.expect(Tok::Dot, "`.`")?;
                    let (body, bst) = self.expr()?;
                    Ok((
                        Term::Nu(Name::new(x), Region::new(r), ty, Box::new(body)),
                        SpanTree::node(sp, vec![bst]),
                    ))
                }
                "get" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let (x, _) = self.ident()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok((Term::Get(Var::new(Name::new(x))), SpanTree::leaf(sp)))
                }
                "set" | "pset" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let (x, _) = self.ident()?;
                    self.expect(Tok::Comma, "`,`")?;
                    let (v, vst) = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let x = Var::new(Name::new(x));
                    let t = if kw == "set" {
                        Term::Set(x, Box::new(v))
                    } else {
                        Term::Pset(x, Box::new(v))
                    };
                    Ok((t, SpanTree::node(sp, vec![vst])))
                }
                "store" => {
                    self.bump();
                    let (x, _) = self.ident()?;
                    let kind = match self.peek() {
                        Tok::LArrow => StoreKind::Volatile,
                        Tok::LDArrow => StoreKind::Persistent,
                        other => {
                            return Err(ParseError::syntax(
                                self.span(),
                                format!("expected `<-` or `<=`, found {other:?}"),
                            ))
                        }
                    };
                    self.bump();
                    let (v, vst) = self.app()?;
                    Ok((
                        Term::Store(Var::new(Name::new(x)), kind, Box::new(v)),
                        SpanTree::node(sp, vec![vst]),
                    ))
                }
                _ => {
                    let (x, _) = self.ident()?;
                    Ok((Term::Var(Var::new(Name::new(x))), SpanTree::leaf(sp)))
                }
            },
            other => Err(ParseError::syntax(sp, format!("expected a term, found {other:?}"))),
        }
    }
}

/// Renames binders so every binder name in the result is distinct and
/// different from every free name.
struct Renamer {
    claimed: BTreeSet<Name>,
    scope: Vec<(Name, Name)>,
}

impl Renamer {
    fn bind(&mut self, x: &Name) -> Name {
        let new = if self.claimed.contains(x) {
            x.fresh(|n| self.claimed.contains(n))
        } else {
            x.clone()
        };
        self.claimed.insert(new.clone());
        self.scope.push((x.clone(), new.clone()));
        new
    }

    fn lookup(&self, v: &Var) -> Var {
        let name = self
            .scope
            .iter()
            .rev()
            .find(|(old, _)| old == &v.name)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| v.name.clone());
        Var { name, region: v.region.clone() }
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Unit => Term::Unit,
            Term::Var(v) => Term::Var(self.lookup(v)),
            Term::Get(v) => Term::Get(self.lookup(v)),
            Term::Set(v, p) => Term::Set(self.lookup(v), Box::new(self.term(p))),
            Term::Pset(v, p) => Term::Pset(self.lookup(v), Box::new(self.term(p))),
            Term::Store(v, k, p) => Term::Store(self.lookup(v), *k, Box::new(self.term(p))),
            Term::Lam(x, a, b) => {
                let x2 = self.bind(x);
                let b2 = self.term(b);
                self.scope.pop();
                Term::Lam(x2, a.clone(), Box::new(b2))
            }
            Term::Nu(x, r, a, b) => {
                let x2 = self.bind(x);
                let b2 = self.term(b);
                self.scope.pop();
                Term::Nu(x2, r.clone(), a.clone(), Box::new(b2))
            }
            Term::LetBang(x, m, n) => {
                let m2 = self.term(m);
                let x2 = self.bind(x);
                let n2 = self.term(n);
                self.scope.pop();
                Term::LetBang(x2, Box::new(m2), Box::new(n2))
            }
            Term::App(a, b) => Term::app(self.term(a), self.term(b)),
            Term::Par(a, b) => Term::par(self.term(a), self.term(b)),
            Term::Bang(b) => Term::bang(self.term(b)),
        }
    }
}

fn uniquify(t: &Term, extra_free: impl IntoIterator<Item = Name>) -> Term {
    let mut claimed = t.free_vars();
    claimed.extend(extra_free);
    // sequencing binders get plain readable names
    let mut r = Renamer { claimed, scope: Vec::new() };
    let out = r.term(t);
    rename_seq_binders(&out, &mut r.claimed.clone())
}

/// `_seqN` binders from desugared `;` become `z`, `z#1`, ...
fn rename_seq_binders(t: &Term, taken: &mut BTreeSet<Name>) -> Term {
    match t {
        Term::Lam(x, a, b) if x.as_str().starts_with("_seq") => {
            let z = Name::from("z");
            let new = if taken.contains(&z) { z.fresh(|n| taken.contains(n)) } else { z };
            taken.insert(new.clone());
            Term::Lam(new, a.clone(), Box::new(rename_seq_binders(b, taken)))
        }
        Term::Lam(x, a, b) => Term::Lam(x.clone(), a.clone(), Box::new(rename_seq_binders(b, taken))),
        Term::Nu(x, r, a, b) => {
            Term::Nu(x.clone(), r.clone(), a.clone(), Box::new(rename_seq_binders(b, taken)))
        }
        Term::LetBang(x, m, n) => Term::LetBang(
            x.clone(),
            Box::new(rename_seq_binders(m, taken)),
            Box::new(rename_seq_binders(n, taken)),
        ),
        Term::App(a, b) => Term::app(rename_seq_binders(a, taken), rename_seq_binders(b, taken)),
        Term::Par(a, b) => Term::par(rename_seq_binders(a, taken), rename_seq_binders(b, taken)),
        Term::Bang(b) => Term::bang(rename_seq_binders(b, taken)),
        Term::Set(v, p) => Term::Set(v.clone(), Box::new(rename_seq_binders(p, taken))),
        Term::Pset(v, p) => Term::Pset(v.clone(), Box::new(rename_seq_binders(p, taken))),
        Term::Store(v, k, p) => Term::Store(v.clone(), *k, Box::new(rename_seq_binders(p, taken))),
        Term::Unit | Term::Var(_) | Term::Get(_) => t.clone(),
    }
}

/// Stores only under `|`/`nu` spines from the root; payloads are values.
fn validate(t: &Term, st: &SpanTree, static_pos: bool) -> Result<(), ParseError> {
    let payload = |v: &Term, vst: &SpanTree, what: &str| {
        if v.is_value() {
            Ok(())
        } else {
            Err(ParseError {
                kind: ParseErrorKind::NonValuePayload,
                span: vst.span,
                message: format!("the payload of {what} must be a value, found `{v}`"),
            })
        }
    };
    match t {
        Term::Store(_, _, v) => {
            if !static_pos {
                return Err(ParseError {
                    kind: ParseErrorKind::StoreInEvaluationPosition,
                    span: st.span,
                    message: "a store may only appear under parallel composition and nu".into(),
                });
            }
            payload(v, &st.kids[0], "a store")?;
            validate(v, &st.kids[0], false)
        }
        Term::Set(_, v) | Term::Pset(_, v) => {
            payload(v, &st.kids[0], "set/pset")?;
            validate(v, &st.kids[0], false)
        }
        Term::Par(a, b) => {
            validate(a, &st.kids[0], static_pos)?;
            validate(b, &st.kids[1], static_pos)
        }
        Term::Nu(_, _, _, b) => validate(b, &st.kids[0], static_pos),
        _ => {
            for (c, cst) in t.children().into_iter().zip(&st.kids) {
                validate(c, cst, false)?;
            }
            Ok(())
        }
    }
}

/// Parses a full `.rgc` source unit.
pub fn parse_unit(src: &str) -> Result<SourceUnit, ParseError> {
    let mut p = Parser::new(src)?;
    let (regions, free, (main, st)) = p.unit()?;
    validate(&main, &st, true)?;
    let main = uniquify(&main, free.iter().map(|d| d.name.clone()));
    let mut spans = Vec::new();
    st.preorder(&mut spans);
    Ok(SourceUnit { regions, free, main, spans })
}

/// Parses a bare program (no declarations, no `main`).
pub fn parse_program(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let (main, st) = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    validate(&main, &st, true)?;
    Ok(uniquify(&main, []))
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.expect(Tok::Eof, "end of input")?;
    if !t.behaviour_well_placed(false) {
        return Err(ParseError {
            kind: ParseErrorKind::BehaviourInValuePosition,
            span: Span { line: 1, col: 1 },
            message: format!("`B` cannot be used as a value type in `{t}`"),
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let t = parse_program("fun x:1. x").unwrap();
        assert_eq!(t, Term::lam("x", Type::One, Term::var("x")));
    }

    #[test]
    fn get_par_store() {
        let u = parse_unit(
            "region r volatile family AF : 1; free x exp : Reg[r] 1; main (get(x) | store x <- *)",
        )
        .unwrap();
        assert_eq!(
            u.main,
            Term::par(Term::get("x"), Term::store("x", StoreKind::Volatile, Term::Unit))
        );
        assert_eq!(u.spans.len(), u.main.size());
    }

    #[test]
    fn sequencing_desugars() {
        let t = parse_program("fun x:1. (set(y,*); *)").unwrap();
        assert_eq!(
            t,
            Term::lam(
                "x",
                Type::One,
                Term::app(Term::lam("z", Type::One, Term::Unit), Term::set("y", Term::Unit))
            )
        );
    }

    #[test]
    fn types_parse() {
        assert_eq!(
            parse_type("!Reg[r]1 -{r}> B").unwrap(),
            Type::arrow(
                Type::bang(Type::reg("r", Type::One)),
                Effect::single("r".into()),
                Type::Behaviour
            )
        );
        assert_eq!(
            parse_type("1 -o 1 -o 1").unwrap(),
            Type::lolli(Type::One, Type::lolli(Type::One, Type::One))
        );
        assert_eq!(parse_type("1 -{}> 1").unwrap(), Type::lolli(Type::One, Type::One));
    }

    use super::super::Effect;

    #[test]
    fn application_is_left_associative() {
        let t = parse_program("f g h").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("g")), Term::var("h")));
        let t = parse_program("!x y").unwrap();
        assert_eq!(t, Term::app(Term::bang(Term::var("x")), Term::var("y")));
    }

    #[test]
    fn binders_are_made_unique() {
        let t = parse_program("(fun x:1. x) (fun x:1. x) x").unwrap();
        let mut names = BTreeSet::new();
        t.all_names(&mut names);
        assert!(names.contains(&Name::from("x#1")));
        assert!(names.contains(&Name::from("x#2")));
        // the free x is untouched
        assert!(t.free_vars().contains(&Name::from("x")));
    }

    #[test]
    fn let_shadowing_keeps_scoping() {
        let t = parse_program("nu x@r:1. let !x = get(x) in x").unwrap();
        match t {
            Term::Nu(x, _, _, body) => match *body {
                Term::LetBang(y, m, n) => {
                    assert_ne!(x, y);
                    assert_eq!(*m, Term::Get(Var::new(x)));
                    assert_eq!(*n, Term::Var(Var::new(y)));
                }
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_stores_in_evaluation_position() {
        let bad = [
            "(fun x:1. x) (store y <- *)",
            "(store y <- *) *",
            "!(store y <- *)",
            "let !x = (store y <- *) in x",
            "let !x = !* in (store y <- *)",
            "set(z, store y <- *)",
            "pset(z, store y <- *)",
            "fun x:1. (store y <- * | x)",
            "(fun x:1. x) (* | store y <- *)",
            "!(* | nu a@r:1. store a <- *)",
        ];
        for src in bad {
            let err = parse_program(src).unwrap_err();
            assert!(
                matches!(
                    err.kind,
                    ParseErrorKind::StoreInEvaluationPosition | ParseErrorKind::NonValuePayload
                ),
                "{src}: {err}"
            );
        }
        assert_eq!(
            parse_program("(fun x:1. x) (store y <- *)").unwrap_err().kind,
            ParseErrorKind::StoreInEvaluationPosition
        );
        assert!(parse_program("nu a@r:1. (get(a) | (store a <- * | store a <- *))").is_ok());
    }

    #[test]
    fn rejects_non_value_payloads() {
        let err = parse_program("set(x, (fun y:1. y) *)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonValuePayload);
        assert!(parse_program("store x <= !(fun y:1. y)").is_ok());
    }

    #[test]
    fn rejects_behaviour_in_value_position() {
        let err = parse_program("fun x:B. x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BehaviourInValuePosition);
        let err = parse_unit("free x exp : !B; main x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BehaviourInValuePosition);
        assert!(parse_program("fun x:(1 -o B). x").is_ok());
        assert!(parse_type("B -o 1").is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_unit("main\n  fun x:1 x").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Syntax);
        assert_eq!(err.span, Span { line: 2, col: 11 });
    }

    #[test]
    fn comments_are_skipped() {
        let u = parse_unit("// a comment\nmain * // trailing\n").unwrap();
        assert_eq!(u.main, Term::Unit);
    }
}
