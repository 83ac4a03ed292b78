//! TPTP THF0 front end: parses `thf(name, role, formula).` entries into
//! interned types, a constant signature, and closed normal propositions
//! of type `$o`.
//!
//! The accepted subset covers the connectives `~ & | => <=> = !=`, the
//! binders `! ? ^ @+`, application `@`, the defined constants `$true`
//! and `$false`, the builtin types `$o` and `$i`, user sorts declared
//! via `$tType`, includes, and the usual comments. Defined connectives
//! are elaborated away during construction:
//!
//! * `$true`   becomes `$false => $false`
//! * `~ s`     becomes `s => $false`
//! * `s | t`   becomes `(s => $false) => t`
//! * `s & t`   becomes `(s => (t => $false)) => $false`
//! * `? [X]:t` becomes `(! [X]: (t => $false)) => $false`
//! * `s <=> t` becomes `s = t` at type `$o`
//! * `s != t`  becomes `(s = t) => $false`

use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::term::{NameId, Store, TermError, TermId, Ty, TyId};

#[derive(Debug, Error)]
pub enum TptpError {
    #[error("line {line}, column {col}: syntax error: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("line {line}, column {col}: unknown symbol '{name}'")]
    UnknownSymbol { name: String, line: u32, col: u32 },
    #[error("line {line}, column {col}: type error: {msg}")]
    Type { line: u32, col: u32, msg: String },
    #[error("line {line}, column {col}: unsupported feature: {what}")]
    Unsupported { line: u32, col: u32, what: String },
    #[error("include '{path}': {msg}")]
    Include { path: String, msg: String },
    #[error("cannot read '{path}': {msg}")]
    Io { path: String, msg: String },
}

type Result<T> = std::result::Result<T, TptpError>;

/// Declared constants and base sorts of a problem.
#[derive(Default, Clone, Debug)]
pub struct Signature {
    pub consts: IndexMap<NameId, TyId>,
    pub sorts: IndexSet<NameId>,
}

impl Signature {
    pub fn with_builtins(store: &mut Store) -> Signature {
        let mut sig = Signature::default();
        let iota = store.intern_name("$i");
        store.base_sort("$i");
        sig.sorts.insert(iota);
        sig
    }
}

/// A parsed problem. The store owning all term ids travels with it.
#[derive(Debug)]
pub struct Problem {
    pub name: String,
    pub store: Store,
    pub signature: Signature,
    pub axioms: Vec<(String, TermId)>,
    pub conjecture: Option<(String, TermId)>,
}

impl Problem {
    /// Number of formulas (axioms plus conjecture).
    pub fn num_formulas(&self) -> usize {
        self.axioms.len() + usize::from(self.conjecture.is_some())
    }
}

/// The branch the engine must refute: every axiom, plus the negated
/// conjecture when one is present.
pub fn negate_conjecture(
    store: &mut Store,
    axioms: &[(String, TermId)],
    conjecture: Option<TermId>,
) -> Vec<TermId> {
    let mut goals: Vec<TermId> = axioms.iter().map(|(_, t)| *t).collect();
    if let Some(c) = conjecture {
        goals.push(store.mk_neg(c));
    }
    goals
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Arrow,   // >
    Caret,   // ^
    Bang,    // !
    Question,// ?
    Tilde,   // ~
    Amp,     // &
    Vline,   // |
    Implies, // =>
    Iff,     // <=>
    Eq,      // =
    Neq,     // !=
    At,      // @
    ChoiceBinder, // @+
    DescrBinder,  // @-
    Lower(String),
    Upper(String),
    Dollar(String),
    Int(String),
    Unsupported(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) | Tok::Dollar(s) | Tok::Int(s) => write!(f, "'{s}'"),
            Tok::Unsupported(s) => write!(f, "'{s}'"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Colon => ":",
                    Tok::Arrow => ">",
                    Tok::Caret => "^",
                    Tok::Bang => "!",
                    Tok::Question => "?",
                    Tok::Tilde => "~",
                    Tok::Amp => "&",
                    Tok::Vline => "|",
                    Tok::Implies => "=>",
                    Tok::Iff => "<=>",
                    Tok::Eq => "=",
                    Tok::Neq => "!=",
                    Tok::At => "@",
                    Tok::ChoiceBinder => "@+",
                    Tok::DescrBinder => "@-",
                    _ => unreachable!(),
                };
                write!(f, "'{s}'")
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let err = |msg: String| TptpError::Syntax {
            line: tline,
            col: tcol,
            msg,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => bump!(),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                bump!();
                bump!();
                loop {
                    if i + 1 >= chars.len() {
                        return Err(err("unterminated block comment".into()));
                    }
                    if chars[i] == '*' && chars[i + 1] == '/' {
                        bump!();
                        bump!();
                        break;
                    }
                    bump!();
                }
            }
            '(' => {
                out.push(Spanned { tok: Tok::LParen, line, col });
                bump!();
            }
            ')' => {
                out.push(Spanned { tok: Tok::RParen, line, col });
                bump!();
            }
            '[' => {
                out.push(Spanned { tok: Tok::LBracket, line, col });
                bump!();
            }
            ']' => {
                out.push(Spanned { tok: Tok::RBracket, line, col });
                bump!();
            }
            ',' => {
                out.push(Spanned { tok: Tok::Comma, line, col });
                bump!();
            }
            '.' => {
                out.push(Spanned { tok: Tok::Dot, line, col });
                bump!();
            }
            ':' => {
                out.push(Spanned { tok: Tok::Colon, line, col });
                bump!();
            }
            '>' => {
                out.push(Spanned { tok: Tok::Arrow, line, col });
                bump!();
            }
            '^' => {
                out.push(Spanned { tok: Tok::Caret, line, col });
                bump!();
            }
            '&' => {
                out.push(Spanned { tok: Tok::Amp, line, col });
                bump!();
            }
            '|' => {
                out.push(Spanned { tok: Tok::Vline, line, col });
                bump!();
            }
            '!' => {
                bump!();
                if chars.get(i) == Some(&'=') {
                    bump!();
                    out.push(Spanned { tok: Tok::Neq, line: tline, col: tcol });
                } else if chars.get(i) == Some(&'>') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("!>"), line: tline, col: tcol });
                } else if chars.get(i) == Some(&'!') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("!!"), line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Bang, line: tline, col: tcol });
                }
            }
            '?' => {
                bump!();
                if chars.get(i) == Some(&'*') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("?*"), line: tline, col: tcol });
                } else if chars.get(i) == Some(&'?') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("??"), line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Question, line: tline, col: tcol });
                }
            }
            '~' => {
                bump!();
                if chars.get(i) == Some(&'&') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("~&"), line: tline, col: tcol });
                } else if chars.get(i) == Some(&'|') {
                    bump!();
                    out.push(Spanned { tok: Tok::Unsupported("~|"), line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Tilde, line: tline, col: tcol });
                }
            }
            '=' => {
                bump!();
                if chars.get(i) == Some(&'>') {
                    bump!();
                    out.push(Spanned { tok: Tok::Implies, line: tline, col: tcol });
                } else {
                    out.push(Spanned { tok: Tok::Eq, line: tline, col: tcol });
                }
            }
            '<' => {
                bump!();
                if chars.get(i) == Some(&'=') {
                    bump!();
                    if chars.get(i) == Some(&'>') {
                        bump!();
                        out.push(Spanned { tok: Tok::Iff, line: tline, col: tcol });
                    } else {
                        out.push(Spanned { tok: Tok::Unsupported("<="), line: tline, col: tcol });
                    }
                } else if chars.get(i) == Some(&'~') {
                    bump!();
                    if chars.get(i) == Some(&'>') {
                        bump!();
                    }
                    out.push(Spanned { tok: Tok::Unsupported("<~>"), line: tline, col: tcol });
                } else {
                    return Err(err("stray '<'".into()));
                }
            }
            '@' => {
                bump!();
                match chars.get(i) {
                    Some(&'+') => {
                        bump!();
                        out.push(Spanned { tok: Tok::ChoiceBinder, line: tline, col: tcol });
                    }
                    Some(&'-') => {
                        bump!();
                        out.push(Spanned { tok: Tok::DescrBinder, line: tline, col: tcol });
                    }
                    Some(&'@') => {
                        bump!();
                        out.push(Spanned { tok: Tok::Unsupported("@@"), line: tline, col: tcol });
                    }
                    _ => out.push(Spanned { tok: Tok::At, line: tline, col: tcol }),
                }
            }
            '$' => {
                bump!();
                let mut s = String::from("$");
                if chars.get(i) == Some(&'$') {
                    bump!();
                    s.push('$');
                }
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Spanned { tok: Tok::Dollar(s), line: tline, col: tcol });
            }
            '\'' => {
                bump!();
                let mut s = String::new();
                loop {
                    if i >= chars.len() {
                        return Err(err("unterminated quoted name".into()));
                    }
                    if chars[i] == '\\' && i + 1 < chars.len() {
                        s.push(chars[i + 1]);
                        bump!();
                        bump!();
                        continue;
                    }
                    if chars[i] == '\'' {
                        bump!();
                        break;
                    }
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Spanned { tok: Tok::Lower(s), line: tline, col: tcol });
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Spanned { tok: Tok::Int(s), line: tline, col: tcol });
            }
            c if c.is_ascii_lowercase() => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Spanned { tok: Tok::Lower(s), line: tline, col: tcol });
            }
            c if c.is_ascii_uppercase() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    bump!();
                }
                out.push(Spanned { tok: Tok::Upper(s), line: tline, col: tcol });
            }
            other => return Err(err(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- ast

#[derive(Debug)]
struct Ast {
    kind: AstKind,
    line: u32,
    col: u32,
}

#[derive(Debug)]
enum AstKind {
    Var(String),
    Const(String),
    True,
    False,
    Not(Box<Ast>),
    And(Box<Ast>, Box<Ast>),
    Or(Box<Ast>, Box<Ast>),
    Imp(Box<Ast>, Box<Ast>),
    Iff(Box<Ast>, Box<Ast>),
    Eq(Box<Ast>, Box<Ast>),
    Neq(Box<Ast>, Box<Ast>),
    App(Box<Ast>, Box<Ast>),
    Forall(String, TyAst, Box<Ast>),
    Exists(String, TyAst, Box<Ast>),
    Lam(String, TyAst, Box<Ast>),
    Choice(String, TyAst, Box<Ast>),
}

#[derive(Debug, Clone)]
enum TyAst {
    Prop,
    Named(String, u32, u32),
    Arrow(Box<TyAst>, Box<TyAst>),
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((0, 0))
    }

    fn err(&self, msg: impl Into<String>) -> TptpError {
        let (line, col) = self.here();
        TptpError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<Spanned> {
        let s = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        if let Tok::Unsupported(what) = s.tok {
            return Err(TptpError::Unsupported {
                line: s.line,
                col: s.col,
                what: what.to_owned(),
            });
        }
        Ok(s)
    }

    fn expect(&mut self, tok: Tok) -> Result<Spanned> {
        let s = self.next()?;
        if s.tok != tok {
            return Err(TptpError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected {tok}, found {}", s.tok),
            });
        }
        Ok(s)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `name` position in thf entries: lowercase word, integer, quoted.
    fn entry_name(&mut self) -> Result<String> {
        let s = self.next()?;
        match s.tok {
            Tok::Lower(n) | Tok::Int(n) => Ok(n),
            other => Err(TptpError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected a formula name, found {other}"),
            }),
        }
    }

    fn formula(&mut self) -> Result<Ast> {
        let (line, col) = self.here();
        let first = self.eq_level()?;
        match self.peek() {
            Some(Tok::Amp) => {
                let mut acc = first;
                while self.eat(&Tok::Amp) {
                    let rhs = self.eq_level()?;
                    acc = Ast {
                        kind: AstKind::And(Box::new(acc), Box::new(rhs)),
                        line,
                        col,
                    };
                }
                self.reject_mixed()?;
                Ok(acc)
            }
            Some(Tok::Vline) => {
                let mut acc = first;
                while self.eat(&Tok::Vline) {
                    let rhs = self.eq_level()?;
                    acc = Ast {
                        kind: AstKind::Or(Box::new(acc), Box::new(rhs)),
                        line,
                        col,
                    };
                }
                self.reject_mixed()?;
                Ok(acc)
            }
            Some(Tok::Implies) => {
                self.pos += 1;
                let rhs = self.formula()?;
                Ok(Ast {
                    kind: AstKind::Imp(Box::new(first), Box::new(rhs)),
                    line,
                    col,
                })
            }
            Some(Tok::Iff) => {
                self.pos += 1;
                let rhs = self.eq_level()?;
                self.reject_mixed()?;
                Ok(Ast {
                    kind: AstKind::Iff(Box::new(first), Box::new(rhs)),
                    line,
                    col,
                })
            }
            _ => Ok(first),
        }
    }

    fn reject_mixed(&self) -> Result<()> {
        match self.peek() {
            Some(Tok::Amp | Tok::Vline | Tok::Implies | Tok::Iff) => {
                Err(self.err("mixed binary connectives need parentheses"))
            }
            _ => Ok(()),
        }
    }

    fn eq_level(&mut self) -> Result<Ast> {
        let (line, col) = self.here();
        let lhs = self.app_level()?;
        match self.peek() {
            Some(Tok::Eq) => {
                self.pos += 1;
                let rhs = self.app_level()?;
                Ok(Ast {
                    kind: AstKind::Eq(Box::new(lhs), Box::new(rhs)),
                    line,
                    col,
                })
            }
            Some(Tok::Neq) => {
                self.pos += 1;
                let rhs = self.app_level()?;
                Ok(Ast {
                    kind: AstKind::Neq(Box::new(lhs), Box::new(rhs)),
                    line,
                    col,
                })
            }
            _ => Ok(lhs),
        }
    }

    fn app_level(&mut self) -> Result<Ast> {
        let (line, col) = self.here();
        let mut acc = self.unitary()?;
        while self.eat(&Tok::At) {
            let rhs = self.unitary()?;
            acc = Ast {
                kind: AstKind::App(Box::new(acc), Box::new(rhs)),
                line,
                col,
            };
        }
        Ok(acc)
    }

    fn unitary(&mut self) -> Result<Ast> {
        let s = self.next()?;
        let (line, col) = (s.line, s.col);
        match s.tok {
            Tok::Tilde => {
                let inner = self.unitary()?;
                Ok(Ast {
                    kind: AstKind::Not(Box::new(inner)),
                    line,
                    col,
                })
            }
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Bang => self.quantified(line, col, Binder::Forall),
            Tok::Question => self.quantified(line, col, Binder::Exists),
            Tok::Caret => self.quantified(line, col, Binder::Lam),
            Tok::ChoiceBinder => self.quantified(line, col, Binder::Choice),
            Tok::DescrBinder => Err(TptpError::Unsupported {
                line,
                col,
                what: "description binder '@-'".into(),
            }),
            Tok::Lower(name) => Ok(Ast {
                kind: AstKind::Const(name),
                line,
                col,
            }),
            Tok::Upper(name) => Ok(Ast {
                kind: AstKind::Var(name),
                line,
                col,
            }),
            Tok::Dollar(w) => match w.as_str() {
                "$true" => Ok(Ast {
                    kind: AstKind::True,
                    line,
                    col,
                }),
                "$false" => Ok(Ast {
                    kind: AstKind::False,
                    line,
                    col,
                }),
                other => Err(TptpError::Unsupported {
                    line,
                    col,
                    what: format!("defined symbol '{other}' in formula position"),
                }),
            },
            Tok::Int(_) => Err(TptpError::Unsupported {
                line,
                col,
                what: "numeric terms (arithmetic)".into(),
            }),
            other => Err(TptpError::Syntax {
                line,
                col,
                msg: format!("expected a formula, found {other}"),
            }),
        }
    }

    fn quantified(&mut self, line: u32, col: u32, binder: Binder) -> Result<Ast> {
        self.expect(Tok::LBracket)?;
        let mut bindings = Vec::new();
        loop {
            let v = self.next()?;
            let name = match v.tok {
                Tok::Upper(n) => n,
                other => {
                    return Err(TptpError::Syntax {
                        line: v.line,
                        col: v.col,
                        msg: format!("expected a variable, found {other}"),
                    })
                }
            };
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            bindings.push((name, ty));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBracket)?;
            break;
        }
        self.expect(Tok::Colon)?;
        let body = self.unitary()?;
        let mut acc = body;
        for (name, ty) in bindings.into_iter().rev() {
            let kind = match binder {
                Binder::Forall => AstKind::Forall(name, ty, Box::new(acc)),
                Binder::Exists => AstKind::Exists(name, ty, Box::new(acc)),
                Binder::Lam => AstKind::Lam(name, ty, Box::new(acc)),
                Binder::Choice => AstKind::Choice(name, ty, Box::new(acc)),
            };
            acc = Ast { kind, line, col };
        }
        Ok(acc)
    }

    fn ty(&mut self) -> Result<TyAst> {
        let lhs = self.ty_atom()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.ty()?;
            return Ok(TyAst::Arrow(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn ty_atom(&mut self) -> Result<TyAst> {
        let s = self.next()?;
        match s.tok {
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Dollar(w) => match w.as_str() {
                "$o" => Ok(TyAst::Prop),
                "$i" => Ok(TyAst::Named("$i".into(), s.line, s.col)),
                "$tType" => Err(TptpError::Unsupported {
                    line: s.line,
                    col: s.col,
                    what: "'$tType' outside a sort declaration".into(),
                }),
                other => Err(TptpError::Unsupported {
                    line: s.line,
                    col: s.col,
                    what: format!("defined type '{other}'"),
                }),
            },
            Tok::Lower(n) => Ok(TyAst::Named(n, s.line, s.col)),
            other => Err(TptpError::Syntax {
                line: s.line,
                col: s.col,
                msg: format!("expected a type, found {other}"),
            }),
        }
    }
}

enum Binder {
    Forall,
    Exists,
    Lam,
    Choice,
}

// ---------------------------------------------------------------- elaboration

struct Elab<'a> {
    store: &'a mut Store,
    sig: &'a Signature,
    ctx: Vec<(String, TyId)>,
}

impl<'a> Elab<'a> {
    fn term_err(&self, e: TermError, line: u32, col: u32) -> TptpError {
        TptpError::Type {
            line,
            col,
            msg: e.to_string(),
        }
    }

    fn resolve_ty(&mut self, ty: &TyAst) -> Result<TyId> {
        match ty {
            TyAst::Prop => Ok(self.store.prop()),
            TyAst::Named(n, line, col) => {
                let id = self.store.intern_name(n);
                if self.sig.sorts.contains(&id) {
                    Ok(self.store.intern_ty(Ty::Base(id)))
                } else {
                    Err(TptpError::UnknownSymbol {
                        name: n.clone(),
                        line: *line,
                        col: *col,
                    })
                }
            }
            TyAst::Arrow(a, b) => {
                let a = self.resolve_ty(a)?;
                let b = self.resolve_ty(b)?;
                Ok(self.store.arrow(a, b))
            }
        }
    }

    fn prop_operand(&mut self, ast: &Ast) -> Result<TermId> {
        let (t, ty) = self.elab(ast)?;
        if ty != self.store.prop() {
            return Err(TptpError::Type {
                line: ast.line,
                col: ast.col,
                msg: format!(
                    "connective operand has type {}, expected $o",
                    self.store.print_ty(ty)
                ),
            });
        }
        Ok(t)
    }

    fn elab(&mut self, ast: &Ast) -> Result<(TermId, TyId)> {
        let (line, col) = (ast.line, ast.col);
        match &ast.kind {
            AstKind::Var(name) => {
                let pos = self
                    .ctx
                    .iter()
                    .rposition(|(n, _)| n == name)
                    .ok_or_else(|| TptpError::UnknownSymbol {
                        name: name.clone(),
                        line,
                        col,
                    })?;
                let ty = self.ctx[pos].1;
                let idx = self.ctx.len() - 1 - pos;
                let t = self
                    .store
                    .mk_db(idx)
                    .map_err(|e| self.term_err(e, line, col))?;
                Ok((t, ty))
            }
            AstKind::Const(name) => {
                let id = self.store.intern_name(name);
                let ty = self
                    .sig
                    .consts
                    .get(&id)
                    .copied()
                    .ok_or_else(|| TptpError::UnknownSymbol {
                        name: name.clone(),
                        line,
                        col,
                    })?;
                Ok((self.store.mk_const(id, ty), ty))
            }
            AstKind::True => {
                let bot = self.store.mk_bot();
                Ok((self.store.mk_imp(bot, bot), self.store.prop()))
            }
            AstKind::False => Ok((self.store.mk_bot(), self.store.prop())),
            AstKind::Not(s) => {
                let s = self.prop_operand(s)?;
                Ok((self.store.mk_neg(s), self.store.prop()))
            }
            AstKind::Imp(s, t) => {
                let s = self.prop_operand(s)?;
                let t = self.prop_operand(t)?;
                Ok((self.store.mk_imp(s, t), self.store.prop()))
            }
            AstKind::Or(s, t) => {
                // s | t  ~>  (s => $false) => t
                let s = self.prop_operand(s)?;
                let t = self.prop_operand(t)?;
                let ns = self.store.mk_neg(s);
                Ok((self.store.mk_imp(ns, t), self.store.prop()))
            }
            AstKind::And(s, t) => {
                // s & t  ~>  (s => (t => $false)) => $false
                let s = self.prop_operand(s)?;
                let t = self.prop_operand(t)?;
                let nt = self.store.mk_neg(t);
                let inner = self.store.mk_imp(s, nt);
                Ok((self.store.mk_neg(inner), self.store.prop()))
            }
            AstKind::Iff(s, t) => {
                let s = self.prop_operand(s)?;
                let t = self.prop_operand(t)?;
                let prop = self.store.prop();
                let eq = self
                    .store
                    .mk_eq(prop, s, t)
                    .map_err(|e| self.term_err(e, line, col))?;
                Ok((eq, prop))
            }
            AstKind::Eq(s, t) | AstKind::Neq(s, t) => {
                let (s2, sty) = self.elab(s)?;
                let (t2, tty) = self.elab(t)?;
                if sty != tty {
                    return Err(TptpError::Type {
                        line,
                        col,
                        msg: format!(
                            "equation sides have types {} and {}",
                            self.store.print_ty(sty),
                            self.store.print_ty(tty)
                        ),
                    });
                }
                let eq = self
                    .store
                    .mk_eq(sty, s2, t2)
                    .map_err(|e| self.term_err(e, line, col))?;
                let out = if matches!(ast.kind, AstKind::Neq(..)) {
                    self.store.mk_neg(eq)
                } else {
                    eq
                };
                Ok((out, self.store.prop()))
            }
            AstKind::App(f, a) => {
                let (f2, fty) = self.elab(f)?;
                let (a2, aty) = self.elab(a)?;
                match self.store.ty(fty) {
                    Ty::Arrow(dom, cod) if dom == aty => {
                        let t = self
                            .store
                            .mk_norm_ap(f2, a2)
                            .map_err(|e| self.term_err(e, line, col))?;
                        Ok((t, cod))
                    }
                    Ty::Arrow(dom, _) => Err(TptpError::Type {
                        line,
                        col,
                        msg: format!(
                            "function expects {} but argument has type {}",
                            self.store.print_ty(dom),
                            self.store.print_ty(aty)
                        ),
                    }),
                    _ => Err(TptpError::Type {
                        line,
                        col,
                        msg: format!(
                            "applied term has non-function type {}",
                            self.store.print_ty(fty)
                        ),
                    }),
                }
            }
            AstKind::Forall(x, ty, body) => {
                let ty = self.resolve_ty(ty)?;
                self.ctx.push((x.clone(), ty));
                let body = self.prop_operand(body);
                self.ctx.pop();
                Ok((self.store.mk_all(ty, body?), self.store.prop()))
            }
            AstKind::Exists(x, ty, body) => {
                // ? [x]: t  ~>  (! [x]: (t => $false)) => $false
                let ty = self.resolve_ty(ty)?;
                self.ctx.push((x.clone(), ty));
                let body = self.prop_operand(body);
                self.ctx.pop();
                let nb = self.store.mk_neg(body?);
                let all = self.store.mk_all(ty, nb);
                Ok((self.store.mk_neg(all), self.store.prop()))
            }
            AstKind::Lam(x, ty, body) => {
                let ty = self.resolve_ty(ty)?;
                self.ctx.push((x.clone(), ty));
                let body = self.elab(body);
                self.ctx.pop();
                let (b2, bty) = body?;
                let lam = self.store.mk_norm_lam(ty, b2);
                Ok((lam, self.store.arrow(ty, bty)))
            }
            AstKind::Choice(x, ty, body) => {
                let ty = self.resolve_ty(ty)?;
                self.ctx.push((x.clone(), ty));
                let body = self.prop_operand(body);
                self.ctx.pop();
                let lam = self.store.mk_norm_lam(ty, body?);
                let eps = self.store.mk_choice(ty);
                let t = self
                    .store
                    .mk_norm_ap(eps, lam)
                    .map_err(|e| self.term_err(e, line, col))?;
                Ok((t, ty))
            }
        }
    }
}

// ---------------------------------------------------------------- driver

struct ProblemBuilder {
    store: Store,
    signature: Signature,
    axioms: Vec<(String, TermId)>,
    conjecture: Option<(String, TermId)>,
    tptp_root: Option<PathBuf>,
    include_depth: usize,
}

impl ProblemBuilder {
    fn consume(&mut self, text: &str) -> Result<()> {
        let toks = lex(text)?;
        let mut p = Parser { toks, pos: 0 };
        while p.peek().is_some() {
            let head = p.next()?;
            match &head.tok {
                Tok::Lower(w) if w == "thf" => self.thf_entry(&mut p)?,
                Tok::Lower(w) if w == "include" => self.include(&mut p)?,
                Tok::Lower(w) if w == "tff" || w == "fof" || w == "cnf" || w == "tpi" => {
                    return Err(TptpError::Unsupported {
                        line: head.line,
                        col: head.col,
                        what: format!("'{w}' dialect (only thf is accepted)"),
                    })
                }
                other => {
                    return Err(TptpError::Syntax {
                        line: head.line,
                        col: head.col,
                        msg: format!("expected 'thf' or 'include', found {other}"),
                    })
                }
            }
        }
        Ok(())
    }

    fn thf_entry(&mut self, p: &mut Parser) -> Result<()> {
        p.expect(Tok::LParen)?;
        let name = p.entry_name()?;
        p.expect(Tok::Comma)?;
        let role_tok = p.next()?;
        let role = match &role_tok.tok {
            Tok::Lower(r) => r.clone(),
            other => {
                return Err(TptpError::Syntax {
                    line: role_tok.line,
                    col: role_tok.col,
                    msg: format!("expected a role, found {other}"),
                })
            }
        };
        p.expect(Tok::Comma)?;
        match role.as_str() {
            "type" => self.type_decl(p)?,
            "axiom" | "hypothesis" | "definition" => {
                let t = self.formula_entry(p)?;
                self.axioms.push((name, t));
            }
            "conjecture" => {
                if self.conjecture.is_some() {
                    return Err(TptpError::Unsupported {
                        line: role_tok.line,
                        col: role_tok.col,
                        what: "multiple conjectures".into(),
                    });
                }
                let t = self.formula_entry(p)?;
                self.conjecture = Some((name, t));
            }
            other => {
                return Err(TptpError::Syntax {
                    line: role_tok.line,
                    col: role_tok.col,
                    msg: format!("unsupported role '{other}'"),
                })
            }
        }
        p.expect(Tok::RParen)?;
        p.expect(Tok::Dot)?;
        Ok(())
    }

    fn type_decl(&mut self, p: &mut Parser) -> Result<()> {
        let wrapped = p.eat(&Tok::LParen);
        let sym = p.next()?;
        let (sym_name, line, col) = match sym.tok {
            Tok::Lower(n) => (n, sym.line, sym.col),
            other => {
                return Err(TptpError::Syntax {
                    line: sym.line,
                    col: sym.col,
                    msg: format!("expected a declared symbol, found {other}"),
                })
            }
        };
        p.expect(Tok::Colon)?;
        if let Some(Tok::Dollar(w)) = p.peek() {
            if w == "$tType" {
                p.next()?;
                if wrapped {
                    p.expect(Tok::RParen)?;
                }
                let id = self.store.intern_name(&sym_name);
                if self.signature.consts.contains_key(&id) {
                    return Err(TptpError::Type {
                        line,
                        col,
                        msg: format!("'{sym_name}' is already a constant"),
                    });
                }
                self.store.base_sort(&sym_name);
                self.signature.sorts.insert(id);
                return Ok(());
            }
        }
        let ty_ast = p.ty()?;
        if wrapped {
            p.expect(Tok::RParen)?;
        }
        let mut el = Elab {
            store: &mut self.store,
            sig: &self.signature,
            ctx: Vec::new(),
        };
        let ty = el.resolve_ty(&ty_ast)?;
        let id = self.store.intern_name(&sym_name);
        if self.signature.sorts.contains(&id) {
            return Err(TptpError::Type {
                line,
                col,
                msg: format!("'{sym_name}' is already a sort"),
            });
        }
        match self.signature.consts.get(&id) {
            Some(&prev) if prev != ty => Err(TptpError::Type {
                line,
                col,
                msg: format!("'{sym_name}' declared at two types"),
            }),
            _ => {
                self.signature.consts.insert(id, ty);
                self.store.mk_const(id, ty);
                Ok(())
            }
        }
    }

    fn formula_entry(&mut self, p: &mut Parser) -> Result<TermId> {
        let ast = p.formula()?;
        let mut el = Elab {
            store: &mut self.store,
            sig: &self.signature,
            ctx: Vec::new(),
        };
        let (t, ty) = el.elab(&ast)?;
        if ty != self.store.prop() {
            return Err(TptpError::Type {
                line: ast.line,
                col: ast.col,
                msg: format!(
                    "formula has type {}, expected $o",
                    self.store.print_ty(ty)
                ),
            });
        }
        debug_assert!(self.store.is_closed(t));
        Ok(t)
    }

    fn include(&mut self, p: &mut Parser) -> Result<()> {
        p.expect(Tok::LParen)?;
        let path_tok = p.next()?;
        let rel = match path_tok.tok {
            Tok::Lower(s) => s,
            other => {
                return Err(TptpError::Syntax {
                    line: path_tok.line,
                    col: path_tok.col,
                    msg: format!("expected a quoted include path, found {other}"),
                })
            }
        };
        if p.peek() == Some(&Tok::Comma) {
            return Err(TptpError::Unsupported {
                line: path_tok.line,
                col: path_tok.col,
                what: "selective include lists".into(),
            });
        }
        p.expect(Tok::RParen)?;
        p.expect(Tok::Dot)?;
        if self.include_depth >= 16 {
            return Err(TptpError::Include {
                path: rel.clone(),
                msg: "include nesting too deep".into(),
            });
        }
        let root = self.tptp_root.clone().ok_or_else(|| TptpError::Include {
            path: rel.clone(),
            msg: "no --tptp-root directory was given".into(),
        })?;
        let full = root.join(&rel);
        let text = std::fs::read_to_string(&full).map_err(|e| TptpError::Include {
            path: full.display().to_string(),
            msg: e.to_string(),
        })?;
        self.include_depth += 1;
        let r = self.consume(&text);
        self.include_depth -= 1;
        r
    }
}

/// Parses a THF0 problem from text.
pub fn parse_problem(name: &str, text: &str, tptp_root: Option<&Path>) -> Result<Problem> {
    let mut store = Store::new();
    let signature = Signature::with_builtins(&mut store);
    let mut b = ProblemBuilder {
        store,
        signature,
        axioms: Vec::new(),
        conjecture: None,
        tptp_root: tptp_root.map(Path::to_path_buf),
        include_depth: 0,
    };
    b.consume(text)?;
    Ok(Problem {
        name: name.to_owned(),
        store: b.store,
        signature: b.signature,
        axioms: b.axioms,
        conjecture: b.conjecture,
    })
}

/// Parses a problem from a file.
pub fn parse_problem_file(path: &Path, tptp_root: Option<&Path>) -> Result<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| TptpError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_problem(&path.display().to_string(), &text, tptp_root)
}

/// Parses one formula against an existing signature, into an existing
/// store. Used by round-trip checks and diagnostics.
pub fn parse_formula(store: &mut Store, sig: &Signature, text: &str) -> Result<TermId> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.formula()?;
    if p.peek().is_some() {
        return Err(p.err("trailing tokens after formula"));
    }
    let mut el = Elab {
        store,
        sig,
        ctx: Vec::new(),
    };
    let (t, ty) = el.elab(&ast)?;
    if ty != el.store.prop() {
        return Err(TptpError::Type {
            line: ast.line,
            col: ast.col,
            msg: "formula is not a proposition".into(),
        });
    }
    Ok(t)
}
