//! The `.mvdl` text format.
//!
//! ```text
//! % comment
//! 0.8 :: label(i1, whale).     % fact with degree 4/5
//! 7/10 :: polar(i1).
//! company(acme).               % degree 1
//! orca(X) :- label(X, whale), polar(X).
//! kp(Y, X) :- company(X).      % Y occurs only in the head: existential
//! ```
//!
//! Lowercase identifiers (and integers) are constants and predicates,
//! uppercase identifiers are variables. Degrees are decimals or fractions and
//! are read exactly.

use std::collections::BTreeMap;
use std::fmt;

use crate::degree::{parse_rational, TruthDegree};
use crate::syntax::{
    Atom, FuzzyDatabase, GroundAtom, NullId, Program, Rule, SyntaxError, Term,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input.
    Syntax,
    /// A degree outside `(0, 1]`, or conflicting degrees for one fact.
    Domain,
    /// A predicate used with two different arities.
    Arity,
    /// A head-only variable under strict safety.
    Safety,
    /// A query atom containing variables.
    NonGround,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Domain => "domain error",
            ErrorKind::Arity => "arity error",
            ErrorKind::Safety => "safety error",
            ErrorKind::NonGround => "non-ground query",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{line}:{column}: {kind}: {message}{}",
    file.as_ref().map(|f| format!("{f}:")).unwrap_or_default(),
    if token.is_empty() { String::new() } else { format!(" (at `{token}`)") })]
pub struct ParseError {
    pub kind: ErrorKind,
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

/// Options for reading source files.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Reject head-only variables instead of reading them as existential.
    pub strict_safety: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Fact { atom: GroundAtom, degree: TruthDegree },
    Rule(Rule),
    Comment(String),
}

/// A parsed file: its statements in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    pub name: Option<String>,
    pub statements: Vec<Located<Statement>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Located<T> {
    pub line: usize,
    pub column: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Null(u32),
    Number(String),
    ColonColon,
    ColonDash,
    LParen,
    RParen,
    Comma,
    Dot,
    Comment(String),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: &str, token: String| ParseError {
        kind: ErrorKind::Syntax,
        file: None,
        line,
        column,
        message: message.to_string(),
        token,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let start = i;
        let mut advance = |i: &mut usize, n: usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut i, 1);
            continue;
        }
        let tok = if c == '%' {
            let mut j = i;
            while j < chars.len() && chars[j] != '\n' {
                j += 1;
            }
            let body: String = chars[i + 1..j].iter().collect();
            let n = j - i;
            advance(&mut i, n);
            Tok::Comment(body.trim().to_string())
        } else if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, n);
            if c.is_ascii_uppercase() {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            }
        } else if c == '_' {
            let mut j = i + 1;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, n);
            match word.strip_prefix("_n").and_then(|n| n.parse::<u32>().ok()) {
                Some(id) => Tok::Null(id),
                None => return Err(err(start_line, start_col, "unexpected identifier", word)),
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            let digits = |j: &mut usize| {
                while *j < chars.len() && chars[*j].is_ascii_digit() {
                    *j += 1;
                }
            };
            digits(&mut j);
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                j += 1;
                digits(&mut j);
            } else if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                j += 1;
                digits(&mut j);
            }
            let word: String = chars[i..j].iter().collect();
            let n = j - i;
            advance(&mut i, n);
            Tok::Number(word)
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let (tok, n) = match (c, two.as_str()) {
                (_, "::") => (Tok::ColonColon, 2),
                (_, ":-") => (Tok::ColonDash, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                _ => return Err(err(start_line, start_col, "unexpected character", c.to_string())),
            };
            advance(&mut i, n);
            tok
        };
        out.push(Token {
            tok,
            text: chars[start..i].iter().collect(),
            line: start_line,
            column: start_col,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        text: String::new(),
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    options: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, kind: ErrorKind, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            file: None,
            line: token.line,
            column: token.column,
            message: message.into(),
            token: token.text.clone(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(self.error_at(&t, ErrorKind::Syntax, format!("expected {what}")))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Ident(c) => Ok(Term::Const(c)),
            Tok::Null(n) => Ok(Term::Null(NullId(n))),
            Tok::Number(ref n) if n.bytes().all(|b| b.is_ascii_digit()) => Ok(Term::Const(n.clone())),
            _ => Err(self.error_at(&t, ErrorKind::Syntax, "expected a term")),
        }
    }

    fn atom(&mut self) -> Result<(Atom, Token), ParseError> {
        let t = self.next();
        let Tok::Ident(pred) = &t.tok else {
            let msg = if matches!(t.tok, Tok::Var(_)) {
                "predicate names must start with a lowercase letter"
            } else {
                "expected an atom"
            };
            return Err(self.error_at(&t, ErrorKind::Syntax, msg));
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            loop {
                args.push(self.term()?);
                let sep = self.next();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return Err(self.error_at(&sep, ErrorKind::Syntax, "expected `,` or `)`")),
                }
            }
        }
        Ok((Atom::new(pred.clone(), args), t))
    }

    fn statement(&mut self) -> Result<Option<Located<Statement>>, ParseError> {
        let first = self.peek().clone();
        let located = |value| Located {
            line: first.line,
            column: first.column,
            value,
        };
        match &first.tok {
            Tok::Eof => Ok(None),
            Tok::Comment(c) => {
                self.next();
                Ok(Some(located(Statement::Comment(c.clone()))))
            }
            Tok::Number(n) => {
                self.next();
                let value = parse_rational(n)
                    .ok_or_else(|| self.error_at(&first, ErrorKind::Syntax, "malformed degree"))?;
                let degree = TruthDegree::new(value).map_err(|e| {
                    self.error_at(&first, ErrorKind::Domain, e.to_string())
                })?;
                if degree.is_zero() {
                    return Err(self.error_at(
                        &first,
                        ErrorKind::Domain,
                        "fact degrees must lie in (0, 1]",
                    ));
                }
                self.expect(Tok::ColonColon, "`::` after a degree")?;
                let (atom, at) = self.atom()?;
                self.expect(Tok::Dot, "`.` after a fact")?;
                let atom = self.ground_fact(atom, &at)?;
                Ok(Some(located(Statement::Fact { atom, degree })))
            }
            _ => {
                let (head, at) = self.atom()?;
                let t = self.next();
                match t.tok {
                    Tok::Dot => {
                        let atom = self.ground_fact(head, &at)?;
                        Ok(Some(located(Statement::Fact {
                            atom,
                            degree: TruthDegree::one(),
                        })))
                    }
                    Tok::ColonDash => {
                        let mut body = vec![self.atom()?.0];
                        loop {
                            let sep = self.next();
                            match sep.tok {
                                Tok::Comma => body.push(self.atom()?.0),
                                Tok::Dot => break,
                                _ => {
                                    return Err(self.error_at(
                                        &sep,
                                        ErrorKind::Syntax,
                                        "expected `,` or `.` in rule body",
                                    ))
                                }
                            }
                        }
                        let rule = if self.options.strict_safety {
                            Rule::new_safe(head, body)
                        } else {
                            Rule::new(head, body)
                        };
                        let rule = rule.map_err(|e| {
                            let kind = match e {
                                SyntaxError::UnsafeHead { .. } => ErrorKind::Safety,
                                _ => ErrorKind::Syntax,
                            };
                            self.error_at(&first, kind, e.to_string())
                        })?;
                        Ok(Some(located(Statement::Rule(rule))))
                    }
                    _ => Err(self.error_at(&t, ErrorKind::Syntax, "expected `.` or `:-`")),
                }
            }
        }
    }

    fn ground_fact(&self, atom: Atom, at: &Token) -> Result<GroundAtom, ParseError> {
        if atom.args.iter().any(|t| matches!(t, Term::Null(_))) {
            return Err(self.error_at(at, ErrorKind::Domain, "facts may not mention labelled nulls"));
        }
        atom.to_ground()
            .ok_or_else(|| self.error_at(at, ErrorKind::Syntax, "facts must be ground"))
    }
}

impl SourceFile {
    pub fn parse(name: Option<&str>, text: &str, options: ParseOptions) -> Result<Self, ParseError> {
        let with_file = |mut e: ParseError| {
            e.file = name.map(str::to_string);
            e
        };
        let tokens = lex(text).map_err(with_file)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            options,
        };
        let mut statements = Vec::new();
        while let Some(s) = parser.statement().map_err(with_file)? {
            statements.push(s);
        }
        Ok(SourceFile {
            name: name.map(str::to_string),
            statements,
        })
    }
}

/// Merges parsed files into one program and database, checking arities and
/// fact degrees across all of them.
pub fn assemble(files: &[SourceFile]) -> Result<(Program, FuzzyDatabase), ParseError> {
    let mut arities: BTreeMap<String, usize> = BTreeMap::new();
    let mut rules = Vec::new();
    let mut db = FuzzyDatabase::new();
    for file in files {
        let at = |line, column, kind, message: String| ParseError {
            kind,
            file: file.name.clone(),
            line,
            column,
            message,
            token: String::new(),
        };
        for stmt in &file.statements {
            let mut check = |pred: &str, arity: usize| match arities.get(pred) {
                Some(&expected) if expected != arity => Err(at(
                    stmt.line,
                    stmt.column,
                    ErrorKind::Arity,
                    SyntaxError::Arity {
                        predicate: pred.to_string(),
                        expected,
                        found: arity,
                    }
                    .to_string(),
                )),
                Some(_) => Ok(()),
                None => {
                    arities.insert(pred.to_string(), arity);
                    Ok(())
                }
            };
            match &stmt.value {
                Statement::Fact { atom, degree } => {
                    check(&atom.predicate, atom.arity())?;
                    db.insert(atom.clone(), degree.clone())
                        .map_err(|e| at(stmt.line, stmt.column, ErrorKind::Domain, e.to_string()))?;
                }
                Statement::Rule(rule) => {
                    for a in std::iter::once(rule.head()).chain(rule.body()) {
                        check(&a.predicate, a.arity())?;
                    }
                    rules.push(rule.clone());
                }
                Statement::Comment(_) => {}
            }
        }
    }
    let program = Program::new(rules).expect("arities checked above");
    Ok((program, db))
}

/// Parses one text into a program and database.
pub fn parse(text: &str) -> Result<(Program, FuzzyDatabase), ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions) -> Result<(Program, FuzzyDatabase), ParseError> {
    assemble(&[SourceFile::parse(None, text, options)?])
}

/// Parses a single ground atom such as `orca(i1)` or `kp(_n1, acme)`.
pub fn parse_ground_atom(text: &str) -> Result<GroundAtom, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        options: ParseOptions::default(),
    };
    let (atom, at) = parser.atom()?;
    if parser.peek().tok == Tok::Dot {
        parser.next();
    }
    let rest = parser.peek().clone();
    if rest.tok != Tok::Eof {
        return Err(parser.error_at(&rest, ErrorKind::Syntax, "trailing input after atom"));
    }
    atom.to_ground().ok_or_else(|| {
        parser.error_at(&at, ErrorKind::NonGround, format!("`{atom}` contains variables"))
    })
}

/// Canonical text: facts sorted by predicate then arguments, degrees as
/// reduced fractions, then rules in program order.
pub fn format(program: &Program, database: &FuzzyDatabase) -> String {
    let mut out = String::new();
    for (atom, degree) in database.iter() {
        out.push_str(&format!("{degree} :: {atom}.\n"));
    }
    for rule in program.rules() {
        out.push_str(&format!("{rule}\n"));
    }
    out
}
