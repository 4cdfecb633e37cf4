//! Recursive-descent parser for `.ped` model files.

use std::fmt;

use thiserror::Error;

use super::ast::{GuardExpr, Literal, ModelAst, Rule, Stmt};
use crate::semantics::{Plane, XRay};

const KEYWORDS: &[&str] = &[
    "InActions",
    "BoolVars",
    "PlaneVars",
    "Rule",
    "Guard",
    "Do",
    "End",
    "if",
    "then",
    "fi",
    "true",
    "false",
];

const LITERALS: &[&str] = &[
    "true",
    "false",
    "None",
    "FR",
    "LT",
    "BI",
    "Standby",
    "Fluo",
    "SingleShot",
    "Series",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: expected {}, found {found}", .expected.join(" | "))]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    /// Byte offset into the source; never exceeds the source length.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Colon,
    Comma,
    Eq,
    EqEq,
    Assign,
    Semi,
    Bang,
    AndAnd,
    OrOr,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::AndAnd => f.write_str("`&&`"),
            Tok::OrOr => f.write_str("`||`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        let start = (i, line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                offset: start.0,
                line: start.1,
                column: start.2,
            });
            *i += len;
            *col += len;
        };
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b':' if bytes.get(i + 1) == Some(&b'=') => push(Tok::Assign, 2, &mut i, &mut col),
            b':' => push(Tok::Colon, 1, &mut i, &mut col),
            b',' => push(Tok::Comma, 1, &mut i, &mut col),
            b';' => push(Tok::Semi, 1, &mut i, &mut col),
            b'(' => push(Tok::LParen, 1, &mut i, &mut col),
            b')' => push(Tok::RParen, 1, &mut i, &mut col),
            b'=' if bytes.get(i + 1) == Some(&b'=') => push(Tok::EqEq, 2, &mut i, &mut col),
            b'=' => push(Tok::Eq, 1, &mut i, &mut col),
            b'!' => push(Tok::Bang, 1, &mut i, &mut col),
            b'&' if bytes.get(i + 1) == Some(&b'&') => push(Tok::AndAnd, 2, &mut i, &mut col),
            b'|' if bytes.get(i + 1) == Some(&b'|') => push(Tok::OrOr, 2, &mut i, &mut col),
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let word = src[i..j].to_string();
                push(Tok::Ident(word), j - i, &mut i, &mut col);
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(SyntaxError {
                    line,
                    column: col,
                    offset: i,
                    expected: vec!["token".into()],
                    found: format!("character {ch:?}"),
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(SyntaxError {
            line: t.line,
            column: t.column,
            offset: t.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.to_string(),
        })
    }

    fn expect(&mut self, tok: Tok, name: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&[name])
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.peek_word() == Some(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&[kw])
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        self.peek_word() == Some(kw)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn bool_lit(&mut self) -> PResult<bool> {
        match self.peek_word() {
            Some("true") => {
                self.bump();
                Ok(true)
            }
            Some("false") => {
                self.bump();
                Ok(false)
            }
            _ => self.error(&["true", "false"]),
        }
    }

    fn plane_lit(&mut self) -> PResult<Plane> {
        match self.peek_word().and_then(|w| w.parse::<Plane>().ok()) {
            Some(p) => {
                self.bump();
                Ok(p)
            }
            None => self.error(&["None", "FR", "LT", "BI"]),
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        let word = self.peek_word().map(str::to_string);
        let lit = match word.as_deref() {
            Some("true") => Literal::Bool(true),
            Some("false") => Literal::Bool(false),
            Some(w) => match (w.parse::<Plane>(), w.parse::<XRay>()) {
                (Ok(p), _) => Literal::Plane(p),
                (_, Ok(x)) => Literal::XRay(x),
                _ => return self.error(LITERALS),
            },
            None => return self.error(LITERALS),
        };
        self.bump();
        Ok(lit)
    }

    fn model(&mut self) -> PResult<ModelAst> {
        let mut ast = ModelAst::default();
        self.keyword("InActions")?;
        self.expect(Tok::Colon, ":")?;
        ast.input_actions.push(self.ident()?);
        while *self.peek() == Tok::Comma {
            self.bump();
            ast.input_actions.push(self.ident()?);
        }

        self.keyword("BoolVars")?;
        self.expect(Tok::Colon, ":")?;
        while matches!(self.peek(), Tok::Ident(_)) && !self.at_keyword("PlaneVars") {
            let name = self.ident()?;
            self.expect(Tok::Eq, "=")?;
            ast.bool_vars.push((name, self.bool_lit()?));
        }

        self.keyword("PlaneVars")?;
        self.expect(Tok::Colon, ":")?;
        while matches!(self.peek(), Tok::Ident(_)) && !self.at_keyword("Rule") {
            let name = self.ident()?;
            self.expect(Tok::Eq, "=")?;
            ast.plane_vars.push((name, self.plane_lit()?));
        }

        while self.at_keyword("Rule") {
            ast.rules.push(self.rule()?);
        }
        if *self.peek() != Tok::Eof {
            return self.error(&["Rule", "end of input"]);
        }
        Ok(ast)
    }

    fn rule(&mut self) -> PResult<Rule> {
        self.keyword("Rule")?;
        let action = self.ident()?;
        self.keyword("Guard")?;
        self.expect(Tok::Colon, ":")?;
        let guard = self.gexpr()?;
        self.keyword("Do")?;
        self.expect(Tok::Colon, ":")?;
        let do_clause = self.stmts("End")?;
        self.keyword("End")?;
        Ok(Rule {
            action,
            guard,
            do_clause,
        })
    }

    fn stmts(&mut self, terminator: &str) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while !self.at_keyword(terminator) {
            if self.at_keyword("if") {
                self.bump();
                let cond = self.gexpr()?;
                self.keyword("then")?;
                let body = self.stmts("fi")?;
                self.keyword("fi")?;
                out.push(Stmt::IfThen(cond, body));
            } else if matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
                let target = self.ident()?;
                self.expect(Tok::Assign, ":=")?;
                let value = self.literal()?;
                self.expect(Tok::Semi, ";")?;
                out.push(Stmt::Assign(target, value));
            } else {
                return self.error(&["identifier", "if", terminator]);
            }
        }
        Ok(out)
    }

    fn gexpr(&mut self) -> PResult<GuardExpr> {
        let mut lhs = self.gterm()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            lhs = GuardExpr::or(lhs, self.gterm()?);
        }
        Ok(lhs)
    }

    fn gterm(&mut self) -> PResult<GuardExpr> {
        let mut lhs = self.gfact()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            lhs = GuardExpr::and(lhs, self.gfact()?);
        }
        Ok(lhs)
    }

    fn gfact(&mut self) -> PResult<GuardExpr> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(GuardExpr::negate(self.gfact()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.gexpr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(e)
            }
            Tok::Ident(w) if w == "true" || w == "false" => Ok(GuardExpr::Const(self.bool_lit()?)),
            Tok::Ident(_) => {
                let name = self.ident()?;
                if *self.peek() == Tok::EqEq {
                    self.bump();
                    Ok(GuardExpr::Cmp(name, self.literal()?))
                } else {
                    Ok(GuardExpr::Var(name))
                }
            }
            _ => self.error(&["!", "(", "identifier", "true", "false"]),
        }
    }
}

/// Parses `.ped` source text into a syntax tree.
pub fn parse(source: &str) -> Result<ModelAst, SyntaxError> {
    let toks = lex(source)?;
    Parser { toks, pos: 0 }.model()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_fails_at_origin() {
        let err = parse("").unwrap_err();
        assert_eq!((err.line, err.column, err.offset), (1, 1, 0));
        assert_eq!(err.expected, vec!["InActions"]);
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let ast = parse("# header\nInActions: a # trailing\nBoolVars:\nPlaneVars:\n").unwrap();
        assert_eq!(ast.input_actions, vec!["a"]);
        assert!(ast.rules.is_empty());
    }

    #[test]
    fn operator_precedence_and_associativity() {
        let src = "InActions: a BoolVars: x = true y = false PlaneVars: \
                   Rule a Guard: !x || x && y || y Do: End";
        let ast = parse(src).unwrap();
        let x = || GuardExpr::Var("x".into());
        let y = || GuardExpr::Var("y".into());
        let expected = GuardExpr::or(GuardExpr::or(GuardExpr::negate(x()), GuardExpr::and(x(), y())), y());
        assert_eq!(ast.rules[0].guard, expected);
    }

    #[test]
    fn keyword_is_not_an_identifier() {
        let err = parse("InActions: Rule BoolVars: PlaneVars:").unwrap_err();
        assert_eq!(err.expected, vec!["identifier"]);
        assert_eq!((err.line, err.column), (1, 12));
    }

    #[test]
    fn bad_character_reports_position() {
        let err = parse("InActions: a\nBoolVars: x = $").unwrap_err();
        assert_eq!((err.line, err.column), (2, 15));
    }

    #[test]
    fn nested_conditionals_parse() {
        let src = "InActions: a BoolVars: x = true PlaneVars: p = None \
                   Rule a Guard: true Do: if x then if p == FR then OutputType := Fluo; fi x := false; fi End";
        let ast = parse(src).unwrap();
        let Stmt::IfThen(_, body) = &ast.rules[0].do_clause[0] else {
            panic!("expected conditional")
        };
        assert_eq!(body.len(), 2);
        assert!(matches!(body[0], Stmt::IfThen(..)));
    }
}
