//! Text formats: model files, array files and outcome files.
//!
//! Model files are a sequence of statements; `#` starts a comment that runs
//! to the end of the line and whitespace (including newlines) only separates
//! tokens.
//!
//! ```text
//! model "phone"
//! factor Display { 16MC, 8MC, BW }
//! factor Email { graphical, text, none }
//! constraint Email = graphical => Display != BW
//! ```
//!
//! Constraint operators bind `!` tighter than `&&`, `&&` tighter than `||`,
//! and `||` tighter than `=>`; `=>` associates to the right.
//!
//! Array files are comma-separated: a header naming every factor once (any
//! order), then one row of value names per line. Outcome files hold one
//! `pass` or `fail` per line.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::array::{Outcome, OutcomeVector, TestArray};
use crate::error::{Error, Result};
use crate::model::{ConstraintExpr, Factor, SutModel, Test};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError { line: pos.line, column: pos.column, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Bang,
    Eq,
    Ne,
    AndAnd,
    OrOr,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Ne => f.write_str("`!=`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-')
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Pos { line: 1, column: 1 };
    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut pos);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut pos);
            }
            continue;
        }
        chars.next();
        advance(c, &mut pos);
        let two = |second: char, tok: Tok, chars: &mut std::iter::Peekable<std::str::Chars>, pos: &mut Pos| {
            if chars.peek() == Some(&second) {
                chars.next();
                advance(second, pos);
                Some(tok)
            } else {
                None
            }
        };
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '!' => two('=', Tok::Ne, &mut chars, &mut pos).unwrap_or(Tok::Bang),
            '=' => two('>', Tok::Arrow, &mut chars, &mut pos).unwrap_or(Tok::Eq),
            '&' => two('&', Tok::AndAnd, &mut chars, &mut pos)
                .ok_or_else(|| ParseError::at(start, "expected `&&`"))?,
            '|' => two('|', Tok::OrOr, &mut chars, &mut pos)
                .ok_or_else(|| ParseError::at(start, "expected `||`"))?,
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            advance('"', &mut pos);
                            break;
                        }
                        Some('\n') | None => return Err(ParseError::at(start, "unterminated string")),
                        Some(c) => {
                            advance(c, &mut pos);
                            s.push(c);
                        }
                    }
                }
                Tok::Str(s)
            }
            c if is_ident_start(c) => {
                let mut s = String::from(c);
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    advance(c, &mut pos);
                }
                Tok::Ident(s)
            }
            other => return Err(ParseError::at(start, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// Constraint syntax tree with unresolved names.
enum RawExpr {
    Atom { factor: String, value: String, equals: bool, pos: Pos },
    Not(Box<RawExpr>),
    And(Vec<RawExpr>),
    Or(Vec<RawExpr>),
    Implies(Box<RawExpr>, Box<RawExpr>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(())
        } else {
            Err(ParseError::at(pos, format!("expected {want}, found {tok}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(ParseError::at(pos, format!("expected {what}, found {tok}"))),
        }
    }

    fn expr(&mut self) -> Result<RawExpr, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.expr()?;
            return Ok(RawExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<RawExpr, ParseError> {
        let mut children = vec![self.and()?];
        while *self.peek() == Tok::OrOr {
            self.bump();
            children.push(self.and()?);
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { RawExpr::Or(children) })
    }

    fn and(&mut self) -> Result<RawExpr, ParseError> {
        let mut children = vec![self.not()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            children.push(self.not()?);
        }
        Ok(if children.len() == 1 { children.pop().unwrap() } else { RawExpr::And(children) })
    }

    fn not(&mut self) -> Result<RawExpr, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(RawExpr::Not(Box::new(self.not()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            _ => {
                let (factor, pos) = self.ident("a factor name, `!` or `(`")?;
                let equals = match self.bump() {
                    (Tok::Eq, _) => true,
                    (Tok::Ne, _) => false,
                    (tok, p) => return Err(ParseError::at(p, format!("expected `=` or `!=` after {factor}, found {tok}"))),
                };
                let (value, _) = self.ident("a value name")?;
                Ok(RawExpr::Atom { factor, value, equals, pos })
            }
        }
    }
}

fn resolve(e: RawExpr, factors: &[Factor]) -> Result<ConstraintExpr, ParseError> {
    Ok(match e {
        RawExpr::Atom { factor, value, equals, pos } => {
            let op = if equals { "=" } else { "!=" };
            let f = factors
                .iter()
                .position(|f| f.name() == factor)
                .ok_or_else(|| ParseError::at(pos, format!("unknown factor `{factor}` in atom `{factor} {op} {value}`")))?;
            let v = factors[f].value_index(&value).ok_or_else(|| {
                ParseError::at(pos, format!("unknown value `{value}` for factor `{factor}` in atom `{factor} {op} {value}`"))
            })?;
            ConstraintExpr::Atom { factor: f, value: v, equals }
        }
        RawExpr::Not(inner) => ConstraintExpr::Not(Box::new(resolve(*inner, factors)?)),
        RawExpr::And(cs) => ConstraintExpr::And(cs.into_iter().map(|c| resolve(c, factors)).collect::<Result<_, _>>()?),
        RawExpr::Or(cs) => ConstraintExpr::Or(cs.into_iter().map(|c| resolve(c, factors)).collect::<Result<_, _>>()?),
        RawExpr::Implies(l, r) => {
            ConstraintExpr::Implies(Box::new(resolve(*l, factors)?), Box::new(resolve(*r, factors)?))
        }
    })
}

/// Parses a model file. Constraint lines are conjoined.
pub fn parse_model(text: &str) -> Result<SutModel> {
    let mut p = Parser { toks: lex(text)?, at: 0 };
    let mut name = String::from("model");
    let mut factors: Vec<Factor> = Vec::new();
    let mut raw_constraints = Vec::new();

    if *p.peek() == Tok::Ident("model".into()) {
        p.bump();
        name = match p.bump() {
            (Tok::Str(s), _) | (Tok::Ident(s), _) => s,
            (tok, pos) => return Err(ParseError::at(pos, format!("expected a model name, found {tok}")).into()),
        };
    }
    loop {
        let (tok, pos) = p.bump();
        match tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "factor" => {
                let (fname, fpos) = p.ident("a factor name")?;
                if factors.iter().any(|f| f.name() == fname) {
                    return Err(ParseError::at(fpos, format!("factor `{fname}` declared twice")).into());
                }
                p.expect(Tok::LBrace)?;
                let mut values = vec![p.ident("a value name")?];
                while *p.peek() == Tok::Comma {
                    p.bump();
                    values.push(p.ident("a value name")?);
                }
                p.expect(Tok::RBrace)?;
                if values.len() < 2 {
                    return Err(ParseError::at(fpos, format!("factor `{fname}` needs at least 2 values")).into());
                }
                if let Some((v, vpos)) = values.iter().enumerate().find_map(|(i, (v, vp))| {
                    values[..i].iter().any(|(w, _)| w == v).then_some((v, *vp))
                }) {
                    return Err(ParseError::at(vpos, format!("factor `{fname}` declares value `{v}` twice")).into());
                }
                factors.push(Factor::new(fname, values.into_iter().map(|(v, _)| v))?);
            }
            Tok::Ident(kw) if kw == "constraint" => raw_constraints.push(p.expr()?),
            other => {
                return Err(ParseError::at(pos, format!("expected `factor` or `constraint`, found {other}")).into());
            }
        }
    }
    if factors.is_empty() {
        return Err(ParseError::at(p.pos(), "model declares no factors").into());
    }
    let constraints = raw_constraints
        .into_iter()
        .map(|e| resolve(e, &factors))
        .collect::<Result<Vec<_>, _>>()?;
    SutModel::new(name, factors, constraints)
}

/// Renders a model in canonical form; [`parse_model`] reads it back to an
/// equal model as long as names are identifiers.
pub fn serialize_model(model: &SutModel) -> String {
    let mut out = String::new();
    writeln!(out, "model \"{}\"", model.name()).unwrap();
    writeln!(out).unwrap();
    for f in model.factors() {
        writeln!(out, "factor {} {{ {} }}", f.name(), f.values().join(", ")).unwrap();
    }
    if !model.constraints().is_empty() {
        writeln!(out).unwrap();
    }
    for c in model.constraints() {
        let mut line = String::new();
        write_expr(&mut line, c, model, 0);
        writeln!(out, "constraint {line}").unwrap();
    }
    out
}

fn precedence(e: &ConstraintExpr) -> u8 {
    match e {
        ConstraintExpr::Implies(..) => 1,
        ConstraintExpr::Or(_) | ConstraintExpr::True => 2,
        ConstraintExpr::And(_) => 3,
        _ => 4,
    }
}

fn write_expr(out: &mut String, e: &ConstraintExpr, model: &SutModel, min: u8) {
    let parens = precedence(e) < min;
    if parens {
        out.push('(');
    }
    match e {
        // The grammar has no constant, so truth is spelled as a tautology.
        ConstraintExpr::True => {
            let f = &model.factors()[0];
            write!(out, "{0} = {1} || {0} != {1}", f.name(), f.values()[0]).unwrap();
        }
        ConstraintExpr::Atom { factor, value, equals } => {
            let f = &model.factors()[*factor];
            let op = if *equals { "=" } else { "!=" };
            write!(out, "{} {op} {}", f.name(), f.values()[*value]).unwrap();
        }
        ConstraintExpr::Not(inner) => {
            out.push('!');
            write_expr(out, inner, model, 4);
        }
        ConstraintExpr::And(cs) | ConstraintExpr::Or(cs) => {
            let sep = if matches!(e, ConstraintExpr::And(_)) { " && " } else { " || " };
            let child_min = precedence(e) + 1;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_expr(out, c, model, child_min);
            }
        }
        ConstraintExpr::Implies(l, r) => {
            write_expr(out, l, model, 2);
            out.push_str(" => ");
            write_expr(out, r, model, 1);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Lines that are neither blank nor comments, with trailing comments removed,
/// numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

/// Parses an array file against `model`. Row validity is not checked.
pub fn parse_array(text: &str, model: &SutModel) -> Result<TestArray> {
    let mut lines = content_lines(text);
    let Some((hline, header)) = lines.next() else {
        return Err(ParseError { line: 1, column: 1, message: "missing header line".into() }.into());
    };
    let mut columns = Vec::with_capacity(model.k());
    for name in header.split(',').map(str::trim) {
        let f = model.factor_index(name).ok_or_else(|| ParseError {
            line: hline,
            column: 1,
            message: format!("unknown factor `{name}` in header"),
        })?;
        if columns.contains(&f) {
            return Err(ParseError { line: hline, column: 1, message: format!("factor `{name}` appears twice in header") }.into());
        }
        columns.push(f);
    }
    if columns.len() != model.k() {
        return Err(ParseError {
            line: hline,
            column: 1,
            message: format!("header names {} factors, model has {}", columns.len(), model.k()),
        }
        .into());
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(ParseError {
                line: lineno,
                column: 1,
                message: format!("row has {} cells, expected {}", cells.len(), columns.len()),
            }
            .into());
        }
        let mut values = vec![0; model.k()];
        for (&f, cell) in columns.iter().zip(&cells) {
            let factor = &model.factors()[f];
            values[f] = factor.value_index(cell).ok_or_else(|| ParseError {
                line: lineno,
                column: 1,
                message: format!("unknown value `{cell}` for factor `{}`", factor.name()),
            })?;
        }
        rows.push(Test::new(values));
    }
    TestArray::for_model(model, rows)
}

/// Canonical array text: header in model order, one row per line.
pub fn serialize_array(array: &TestArray, model: &SutModel) -> String {
    let mut out = String::new();
    let names: Vec<&str> = model.factors().iter().map(Factor::name).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    for r in array.rows() {
        let cells: Vec<&str> = r.iter().zip(model.factors()).map(|(&v, f)| f.values()[v].as_str()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses an outcome file for an array of `rows` rows.
pub fn parse_outcomes(text: &str, rows: usize) -> Result<OutcomeVector> {
    let mut outcomes = Vec::new();
    for (lineno, line) in content_lines(text) {
        outcomes.push(match line {
            "pass" => Outcome::Pass,
            "fail" => Outcome::Fail,
            other => {
                return Err(ParseError { line: lineno, column: 1, message: format!("expected `pass` or `fail`, found `{other}`") }
                    .into())
            }
        });
    }
    if outcomes.len() != rows {
        return Err(Error::input(format!("outcome file has {} entries, array has {rows} rows", outcomes.len())));
    }
    Ok(OutcomeVector::new(outcomes))
}

pub fn serialize_outcomes(outcomes: &OutcomeVector) -> String {
    outcomes
        .outcomes()
        .iter()
        .map(|o| match o {
            Outcome::Pass => "pass\n",
            Outcome::Fail => "fail\n",
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn phone_fixture_shape() {
        let m = fixtures::phone();
        assert_eq!(m.k(), 5);
        assert_eq!(m.domain_sizes(), vec![3, 3, 3, 2, 2]);
        assert_eq!(m.constraints().len(), 7);
        assert_eq!(m.name(), "phone");
    }

    #[test]
    fn no_constraints_means_true() {
        let m = parse_model("factor A { x, y }\nfactor B { 0, 1 }\n").unwrap();
        assert!(m.constraints().is_empty());
        assert_eq!(m.constraint(), ConstraintExpr::True);
    }

    #[test]
    fn unknown_value_names_the_atom() {
        let err = parse_model("factor F1 { 0, 1, 2 }\nconstraint F1 = 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("F1 = 5"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn structural_errors() {
        assert!(parse_model("factor A { x }").is_err());
        assert!(parse_model("factor A { x, y } factor A { x, y }").is_err());
        assert!(parse_model("factor A { x, x }").is_err());
        assert!(parse_model("factor A { x, y } constraint B = x").is_err());
        assert!(parse_model("factor A { x, y } constraint A = x &").is_err());
        assert!(parse_model("").is_err());
        let err = parse_model("factor A { x, y }\n  constraint (A = x").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn precedence_and_associativity() {
        let m = parse_model("factor A {0,1} factor B {0,1} factor C {0,1} constraint A = 0 => B = 0 => C = 0").unwrap();
        let expected = ConstraintExpr::implies(
            ConstraintExpr::eq(0, 0),
            ConstraintExpr::implies(ConstraintExpr::eq(1, 0), ConstraintExpr::eq(2, 0)),
        );
        assert_eq!(m.constraints()[0], expected);

        let m = parse_model("factor A {0,1} factor B {0,1} factor C {0,1} constraint !A = 0 || B = 1 && C = 1").unwrap();
        let expected = ConstraintExpr::Or(vec![
            ConstraintExpr::not(ConstraintExpr::eq(0, 0)),
            ConstraintExpr::And(vec![ConstraintExpr::eq(1, 1), ConstraintExpr::eq(2, 1)]),
        ]);
        assert_eq!(m.constraints()[0], expected);
    }

    #[test]
    fn layout_does_not_matter() {
        let a = parse_model("factor A {0,1} factor B {0,1} constraint A=0=>B!=1").unwrap();
        let b = parse_model("# header\nfactor A {\n 0, # zero\n 1 }\nfactor B { 0 , 1 }\n\nconstraint A = 0\n   => B != 1 # trailing\n").unwrap();
        assert_eq!(a.factors(), b.factors());
        assert_eq!(a.constraints(), b.constraints());
    }

    #[test]
    fn model_round_trip() {
        let m = fixtures::phone();
        let text = serialize_model(&m);
        assert_eq!(parse_model(&text).unwrap(), m);
        assert_eq!(serialize_model(&parse_model(&text).unwrap()), text);
    }

    #[test]
    fn golden_array_sizes() {
        assert_eq!(fixtures::cca_2().len(), 11);
        assert_eq!(fixtures::cla_2bar_2bar().len(), 28);
        let m = fixtures::phone();
        assert_eq!(parse_array("F1,F2,F3,F4,F5\n", &m).unwrap().len(), 0);
    }

    #[test]
    fn array_header_order_is_free() {
        let m = fixtures::phone();
        let a = parse_array("F5,F4,F3,F2,F1\n1,0,2,1,0\n", &m).unwrap();
        assert_eq!(a.row(0).values(), &[0, 1, 2, 0, 1]);
    }

    #[test]
    fn array_errors() {
        let m = fixtures::phone();
        assert!(parse_array("F1,F2,F3,F4,F5\n0,0,0,0\n", &m).is_err());
        assert!(parse_array("F1,F2,F3,F4,F5\n0,0,0,0,7\n", &m).is_err());
        assert!(parse_array("F1,F2,F3,F4\n", &m).is_err());
        assert!(parse_array("F1,F2,F3,F4,F9\n", &m).is_err());
        assert!(parse_array("", &m).is_err());
    }

    #[test]
    fn array_round_trip_is_byte_identical() {
        let m = fixtures::phone();
        let text = fixtures::CLA_1_1_ARRAY;
        assert_eq!(serialize_array(&parse_array(text, &m).unwrap(), &m), text);
    }

    #[test]
    fn outcomes() {
        let text = format!("fail\n{}", "pass\n".repeat(14));
        let o = parse_outcomes(&text, 15).unwrap();
        assert_eq!(o.failing_rows().iter().collect::<Vec<_>>(), vec![0]);
        assert_eq!(serialize_outcomes(&o), text);

        let short = format!("fail\n{}", "pass\n".repeat(13));
        assert!(parse_outcomes(&short, 15).is_err());
        assert!(parse_outcomes("pass\nmaybe\n", 2).is_err());
    }
}
