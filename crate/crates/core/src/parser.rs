//! Reader and printer for `.net` model files and `.q` query files.
//!
//! ```text
//! network  := 'network' ID '{' vardecl* automaton+ '}'
//! vardecl  := ('int'|'real'|'bool') ID '=' literal ';'
//! automaton:= 'automaton' ID '{' 'init' ID ';' 'locations' ID (',' ID)* ';' edge* '}'
//! edge     := 'edge' ID '->' ID 'on' ID ('when' expr)? ('do' assign (',' assign)*)? ';'
//! query    := 'EF' '(' lit ('&&' lit)* ')'      lit := '!'? ID '.' ID
//! ```
//!
//! Location names may be numerals. `//` starts a line comment.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_rational::Rational64;
use thiserror::Error;

use crate::expr::{eval_expr, BinOp, Expr, Type, Value};
use crate::model::{
    validate_network, Assignment, Automaton, Diagnostic, Edge, Ident, Literal, Locus, Network,
    SourceSpan, StateFormula, VarDecl,
};

const KEYWORDS: &[&str] = &[
    "network", "automaton", "int", "real", "bool", "init", "locations", "edge", "on", "when",
    "do", "true", "false", "EF",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    fn at(span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            diagnostics: vec![Diagnostic {
                locus: Locus::Network,
                message: message.into(),
                span: Some(span),
            }],
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Decimal(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) | Tok::Decimal(s) => write!(f, "`{s}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

const PUNCTS: &[&str] = &[
    "->", ":=", "&&", "||", "==", "!=", "<=", ">=", "{", "}", "(", ")", ";", ",", ".", "=", "<",
    ">", "!", "+", "-", "*", "/",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c == b' ' || c == b'\t' || c == b'\r' {
            i += 1;
            col += 1;
            continue;
        }
        if text[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                Tok::Decimal(text[start..i].to_string())
            } else {
                Tok::Number(text[start..i].to_string())
            }
        } else if let Some(p) = PUNCTS.iter().find(|p| text[i..].starts_with(**p)) {
            i += p.len();
            Tok::Punct(p)
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError::at(
                SourceSpan {
                    line,
                    column: col,
                    length: ch.len_utf8(),
                },
                format!("unexpected character `{ch}`"),
            ));
        };
        let len = i - start;
        out.push(Token {
            tok,
            span: SourceSpan {
                line,
                column: col,
                length: len,
            },
        });
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan {
            line,
            column: col,
            length: 0,
        },
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    spans: HashMap<Locus, SourceSpan>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            spans: HashMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ParseError::at(
            self.span(),
            format!("expected {expected}, found {}", self.peek()),
        ))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_punct(&mut self, p: &str) -> PResult<SourceSpan> {
        if self.is_punct(p) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(Ident, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.bump().span;
                Ok((Ident::new(s).expect("lexed identifier"), span))
            }
            _ => self.error(what),
        }
    }

    fn location(&mut self) -> PResult<(Ident, SourceSpan)> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let span = self.bump().span;
                Ident::location(s.clone())
                    .map(|i| (i, span))
                    .map_err(|_| ParseError::at(span, format!("location numeral `{s}` is too long")))
            }
            _ => self.ident("a location name"),
        }
    }

    fn network(&mut self) -> PResult<Network> {
        self.expect_keyword("network")?;
        let (name, span) = self.ident("a network name")?;
        self.spans.insert(Locus::Network, span);
        self.expect_punct("{")?;
        let mut net = Network {
            name,
            variables: Vec::new(),
            automata: Vec::new(),
            positional: false,
        };
        while let Tok::Ident(kw) = self.peek() {
            let ty = match kw.as_str() {
                "int" => Type::Int,
                "real" => Type::Real,
                "bool" => Type::Bool,
                _ => break,
            };
            self.bump();
            let (vname, vspan) = self.ident("a variable name")?;
            self.expect_punct("=")?;
            let lit_span = self.span();
            let init_expr = self.expr()?;
            self.expect_punct(";")?;
            let init = constant_value(&init_expr).ok_or_else(|| {
                ParseError::at(lit_span, "initial value must be a constant literal")
            })?;
            self.spans.insert(Locus::Variable(net.variables.len()), vspan);
            net.variables.push(VarDecl {
                name: vname,
                ty,
                init,
            });
        }
        while self.is_keyword("automaton") {
            let a = self.automaton(net.automata.len())?;
            net.automata.push(a);
        }
        if self.is_punct("}") && net.automata.is_empty() {
            return Err(ParseError::at(
                self.span(),
                "a network needs at least one automaton",
            ));
        }
        self.expect_punct("}")?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.error("end of input");
        }
        Ok(net)
    }

    fn automaton(&mut self, ai: usize) -> PResult<Automaton> {
        self.expect_keyword("automaton")?;
        let (name, span) = self.ident("an automaton name")?;
        self.spans.insert(Locus::Automaton(ai), span);
        self.expect_punct("{")?;
        self.expect_keyword("init")?;
        let (initial, _) = self.location()?;
        self.expect_punct(";")?;
        self.expect_keyword("locations")?;
        let mut locations = Vec::new();
        loop {
            let (l, lspan) = self.location()?;
            self.spans.insert(Locus::Location(ai, locations.len()), lspan);
            locations.push(l);
            if self.is_punct(",") {
                self.bump();
            } else {
                break;
            }
        }
        self.expect_punct(";")?;
        let mut edges = Vec::new();
        while self.is_keyword("edge") {
            let espan = self.bump().span;
            self.spans.insert(Locus::Edge(ai, edges.len()), espan);
            let (source, _) = self.location()?;
            self.expect_punct("->")?;
            let (target, _) = self.location()?;
            self.expect_keyword("on")?;
            let (action, _) = self.ident("an action name")?;
            let guard = if self.is_keyword("when") {
                self.bump();
                self.expr()?
            } else {
                Expr::tt()
            };
            let mut updates = Vec::new();
            if self.is_keyword("do") {
                self.bump();
                loop {
                    let (t, _) = self.ident("an assignment target")?;
                    self.expect_punct(":=")?;
                    let e = self.expr()?;
                    updates.push(Assignment { target: t, expr: e });
                    if self.is_punct(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_punct(";")?;
            edges.push(Edge {
                source,
                action,
                guard,
                updates,
                target,
            });
        }
        self.expect_punct("}")?;
        Ok(Automaton {
            name,
            locations,
            initial,
            edges,
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        let Tok::Punct(p) = self.peek() else {
            return None;
        };
        Some(match *p {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            ">=" => BinOp::Ge,
            ">" => BinOp::Gt,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            let op_span = self.bump().span;
            let rhs = self.binary(p + 1)?;
            if op.is_comparison() {
                if let Some(next) = self.binary_op() {
                    if next.is_comparison() {
                        return Err(ParseError::at(op_span, "comparisons do not chain; add parentheses"));
                    }
                }
            }
            lhs = match (op, &lhs, &rhs) {
                // `n.0 / d.0` is how real literals print
                (BinOp::Div, Expr::Real(a), Expr::Real(b)) if *b != Rational64::from_integer(0) => {
                    Expr::Real(a / b)
                }
                _ => Expr::bin(op, lhs, rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_punct("!") {
            self.bump();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.is_punct("-") {
            let span = self.bump().span;
            return match self.peek().clone() {
                Tok::Number(n) => {
                    self.bump();
                    let v: i128 = n.parse().map_err(|_| ParseError::at(span, "integer literal too large"))?;
                    i64::try_from(-v)
                        .map(Expr::Int)
                        .map_err(|_| ParseError::at(span, "integer literal too large"))
                }
                Tok::Decimal(d) => {
                    self.bump();
                    Ok(Expr::Real(-parse_decimal(&d).ok_or_else(|| ParseError::at(span, "real literal too large"))?))
                }
                _ => Ok(Expr::Neg(Box::new(self.unary()?))),
            };
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                n.parse::<i64>()
                    .map(Expr::Int)
                    .map_err(|_| ParseError::at(span, "integer literal too large"))
            }
            Tok::Decimal(d) => {
                self.bump();
                parse_decimal(&d)
                    .map(Expr::Real)
                    .ok_or_else(|| ParseError::at(span, "real literal too large"))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Ident(_) => {
                let (v, _) = self.ident("an expression")?;
                Ok(Expr::Var(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            _ => self.error("an expression"),
        }
    }

    fn query(&mut self) -> PResult<StateFormula> {
        self.expect_keyword("EF")?;
        self.expect_punct("(")?;
        let mut literals = Vec::new();
        loop {
            let negated = if self.is_punct("!") {
                self.bump();
                true
            } else {
                false
            };
            let (automaton, _) = self.ident("an automaton name")?;
            self.expect_punct(".")?;
            let (location, _) = self.location()?;
            literals.push(Literal {
                automaton,
                location,
                negated,
            });
            if self.is_punct("&&") {
                self.bump();
            } else if self.is_punct("||") {
                return Err(ParseError::at(
                    self.span(),
                    "state formulas are conjunctions; `||` is not allowed",
                ));
            } else {
                break;
            }
        }
        self.expect_punct(")")?;
        if !matches!(self.peek(), Tok::Eof) {
            return self.error("end of input");
        }
        Ok(StateFormula { literals })
    }
}

fn parse_decimal(d: &str) -> Option<Rational64> {
    let (int_part, frac) = d.split_once('.').unwrap_or((d, ""));
    let denom = 10i64.checked_pow(frac.len() as u32)?;
    let numer: i64 = format!("{int_part}{frac}").parse().ok()?;
    Some(Rational64::new(numer, denom))
}

fn constant_value(e: &Expr) -> Option<Value> {
    if !e.is_constant() {
        return None;
    }
    eval_expr(e, &std::collections::BTreeMap::new()).ok()
}

/// Marks the network as positional when it carries exactly the variables
/// and updates the transformation adds.
fn detect_positional(net: &mut Network) {
    let n = net.automata.len();
    if n == 0 || net.variables.len() < n {
        return;
    }
    let base = net.variables.len() - n;
    let ok = net.automata.iter().enumerate().all(|(ai, a)| {
        let v = &net.variables[base + ai];
        let p = Network::positional_name(&a.name);
        v.name == p
            && v.ty == Type::Int
            && a.location_code(&a.initial).map(Value::Int) == Some(v.init)
            && a.edges.iter().all(|e| {
                matches!(e.updates.last(), Some(asg)
                    if asg.target == p
                        && a.location_code(&e.target).map(Expr::Int) == Some(asg.expr.clone()))
            })
    });
    net.positional = ok;
}

/// Parses and validates a `.net` model.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut p = Parser::new(text)?;
    let mut net = p.network()?;
    detect_positional(&mut net);
    let mut diags = validate_network(&net);
    if diags.is_empty() {
        return Ok(net);
    }
    let fallback = p.spans.get(&Locus::Network).copied();
    for d in &mut diags {
        d.span = p
            .spans
            .get(&d.locus)
            .copied()
            .or_else(|| match d.locus {
                Locus::Location(ai, _) | Locus::Edge(ai, _) => p.spans.get(&Locus::Automaton(ai)).copied(),
                _ => None,
            })
            .or(fallback);
    }
    Err(ParseError { diagnostics: diags })
}

/// Parses a `.q` file without resolving names.
pub fn parse_query(text: &str) -> Result<StateFormula, ParseError> {
    Parser::new(text)?.query()
}

/// Parses a `.q` file and checks its names against `net`.
pub fn parse_query_for(text: &str, net: &Network) -> Result<StateFormula, ParseError> {
    let f = parse_query(text)?;
    f.check(net).map_err(|e| {
        ParseError::at(
            SourceSpan {
                line: 1,
                column: 1,
                length: text.lines().next().map_or(0, str::len),
            },
            e.to_string(),
        )
    })?;
    Ok(f)
}

/// Prints a network in the `.net` syntax; `parse_network` reads it back to
/// an equal value.
pub fn print_network(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "network {} {{", net.name);
    for v in &net.variables {
        let _ = writeln!(out, "  {} {} = {};", v.ty, v.name, Expr::from_value(v.init));
    }
    for a in &net.automata {
        out.push('\n');
        let _ = writeln!(out, "  automaton {} {{", a.name);
        let _ = writeln!(out, "    init {};", a.initial);
        let locs: Vec<&str> = a.locations.iter().map(Ident::as_str).collect();
        let _ = writeln!(out, "    locations {};", locs.join(", "));
        for e in &a.edges {
            let _ = write!(out, "    edge {} -> {} on {}", e.source, e.target, e.action);
            if !e.guard.is_true() {
                let _ = write!(out, " when {}", e.guard);
            }
            if !e.updates.is_empty() {
                let asgs: Vec<String> = e
                    .updates
                    .iter()
                    .map(|u| format!("{} := {}", u.target, u.expr))
                    .collect();
                let _ = write!(out, " do {}", asgs.join(", "));
            }
            out.push_str(";\n");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

impl Expr {
    pub fn from_value(v: Value) -> Expr {
        match v {
            Value::Int(i) => Expr::Int(i),
            Value::Real(r) => Expr::Real(r),
            Value::Bool(b) => Expr::Bool(b),
        }
    }
}
