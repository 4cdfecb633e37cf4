use std::collections::{BTreeSet, HashMap};

use super::{ActForm, DataExpr, Fixpoint, Formula, FormulaError, Sort, Value};
use crate::semantics::{Plane, XRay};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Star,
    Dot,
    Comma,
    Colon,
    Assign,
    EqEq,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, FormulaError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '%' | '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBrack, 1),
            ']' => (Tok::RBrack, 1),
            '<' => (Tok::Lt, 1),
            '>' => (Tok::Gt, 1),
            '*' => (Tok::Star, 1),
            '.' => (Tok::Dot, 1),
            ',' => (Tok::Comma, 1),
            ':' => (Tok::Colon, 1),
            '=' if next == Some('=') => (Tok::EqEq, 2),
            '=' if next == Some('>') => (Tok::Implies, 2),
            '=' => (Tok::Assign, 1),
            '!' => (Tok::Bang, 1),
            '&' if next == Some('&') => (Tok::AndAnd, 2),
            '|' if next == Some('|') => (Tok::OrOr, 2),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            _ => {
                return Err(FormulaError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character {c:?}"),
                })
            }
        };
        out.push(Token { tok, line, column: col });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

const RESERVED: &[&str] = &[
    "nu", "mu", "forall", "exists", "true", "false", "output", "tau", "Bool", "XRay", "Plane",
];

fn literal_value(word: &str) -> Option<Value> {
    match word {
        "true" => Some(Value::Bool(true)),
        "false" => Some(Value::Bool(false)),
        _ => word
            .parse::<XRay>()
            .map(Value::XRay)
            .or_else(|_| word.parse::<Plane>().map(Value::Plane))
            .ok(),
    }
}

fn value_sort(v: Value) -> Sort {
    match v {
        Value::Bool(_) => Sort::Bool,
        Value::XRay(_) => Sort::XRay,
        Value::Plane(_) => Sort::Plane,
    }
}

#[derive(Debug, Clone)]
enum Binding {
    Fix(String, usize),
    Data(String, Sort),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<Binding>,
}

type PResult<T> = Result<T, FormulaError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(FormulaError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.word() == Some(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.word() {
            Some(w) if !RESERVED.contains(&w) && literal_value(w).is_none() => {
                let w = w.to_string();
                self.bump();
                Ok(w)
            }
            _ => self.fail("expected a name"),
        }
    }

    fn sort(&mut self) -> PResult<Sort> {
        let s = match self.word() {
            Some("Bool") => Sort::Bool,
            Some("XRay") => Sort::XRay,
            Some("Plane") => Sort::Plane,
            _ => return self.fail("expected a sort (Bool, XRay, Plane)"),
        };
        self.bump();
        Ok(s)
    }

    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scope.iter().rev().find(|b| match b {
            Binding::Fix(n, _) | Binding::Data(n, _) => n == name,
        })
    }

    fn data_sort(&self, name: &str) -> Option<Sort> {
        match self.lookup(name) {
            Some(Binding::Data(_, s)) => Some(*s),
            _ => None,
        }
    }

    fn bindings(&mut self) -> PResult<Vec<(String, Sort)>> {
        let mut out = vec![];
        loop {
            let n = self.name()?;
            self.expect(Tok::Colon, "`:`")?;
            out.push((n, self.sort()?));
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(out)
    }

    fn with_data<T>(&mut self, vars: &[(String, Sort)], f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let depth = self.scope.len();
        self.scope
            .extend(vars.iter().map(|(n, s)| Binding::Data(n.clone(), *s)));
        let r = f(self);
        self.scope.truncate(depth);
        r
    }

    // ---- formulas ----

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(Tok::Implies) {
            if !lhs.is_data_only() {
                return Err(FormulaError::NonMonotone);
            }
            let rhs = self.implication()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat(Tok::OrOr) {
            lhs = Formula::Or(Box::new(lhs), Box::new(self.conjunction()?));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat(Tok::AndAnd) {
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                let inner = self.unary()?;
                match inner {
                    Formula::Data(e) => Ok(Formula::Data(DataExpr::Not(Box::new(e)))),
                    f if f.is_data_only() => Ok(Formula::Not(Box::new(f))),
                    _ => Err(FormulaError::NonMonotone),
                }
            }
            Tok::LBrack => {
                self.bump();
                let (act, binders) = self.act_or()?;
                if self.eat(Tok::Star) {
                    self.expect(Tok::RBrack, "`]`")?;
                    return Ok(Formula::BoxStar(act, Box::new(self.unary()?)));
                }
                self.expect(Tok::RBrack, "`]`")?;
                let body = self.with_data(&binders, |p| p.unary())?;
                Ok(Formula::Box(act, Box::new(body)))
            }
            Tok::Lt => {
                self.bump();
                let (act, binders) = self.act_or()?;
                self.expect(Tok::Gt, "`>`")?;
                let body = self.with_data(&binders, |p| p.unary())?;
                Ok(Formula::Diamond(act, Box::new(body)))
            }
            Tok::Ident(w) if w == "nu" || w == "mu" => {
                self.bump();
                let fp = self.fixpoint()?;
                Ok(if w == "nu" { Formula::Nu(fp) } else { Formula::Mu(fp) })
            }
            Tok::Ident(w) if w == "forall" || w == "exists" => {
                self.bump();
                let vars = self.bindings()?;
                let body = self.with_data(&vars, |p| p.implication())?;
                Ok(if w == "forall" {
                    Formula::Forall(vars, Box::new(body))
                } else {
                    Formula::Exists(vars, Box::new(body))
                })
            }
            _ => self.primary(),
        }
    }

    fn fixpoint(&mut self) -> PResult<Fixpoint> {
        let var = self.name()?;
        let mut params = Vec::new();
        if self.eat(Tok::LParen) {
            loop {
                let n = self.name()?;
                self.expect(Tok::Colon, "`:`")?;
                let sort = self.sort()?;
                if sort != Sort::Bool {
                    return Err(FormulaError::Type(format!("parameter `{n}` of `{var}` must be Bool")));
                }
                self.expect(Tok::Assign, "`=`")?;
                let init = match self.word() {
                    Some("true") => true,
                    Some("false") => false,
                    _ => return self.fail("expected `true` or `false`"),
                };
                self.bump();
                params.push((n, init));
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        }
        self.expect(Tok::Dot, "`.`")?;
        let depth = self.scope.len();
        self.scope.push(Binding::Fix(var.clone(), params.len()));
        self.scope
            .extend(params.iter().map(|(n, _)| Binding::Data(n.clone(), Sort::Bool)));
        let body = self.implication();
        self.scope.truncate(depth);
        Ok(Fixpoint {
            var,
            params,
            body: Box::new(body?),
        })
    }

    fn primary(&mut self) -> PResult<Formula> {
        if self.eat(Tok::LParen) {
            let f = self.implication()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        let Some(w) = self.word().map(str::to_string) else {
            return self.fail("expected a formula");
        };
        if let Some(Binding::Fix(_, arity)) = self.lookup(&w).cloned() {
            self.bump();
            let mut args = Vec::new();
            if self.eat(Tok::LParen) {
                loop {
                    let (e, s) = self.data_or()?;
                    if s != Sort::Bool {
                        return Err(FormulaError::Type(format!("argument of `{w}` must be Bool")));
                    }
                    args.push(e);
                    if !self.eat(Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
            }
            if args.len() != arity {
                return Err(FormulaError::Arity {
                    var: w,
                    expected: arity,
                    found: args.len(),
                });
            }
            return Ok(Formula::VarApp(w, args));
        }
        if (w == "true" || w == "false") && !matches!(self.toks[self.pos + 1].tok, Tok::EqEq) {
            self.bump();
            return Ok(if w == "true" { Formula::True } else { Formula::False });
        }
        let (e, s) = self.data_cmp()?;
        if s != Sort::Bool {
            return Err(FormulaError::Type("data predicate must be Bool".into()));
        }
        Ok(Formula::Data(e))
    }

    // ---- data expressions ----

    fn data_or(&mut self) -> PResult<(DataExpr, Sort)> {
        let (mut lhs, mut sort) = self.data_and()?;
        while self.eat(Tok::OrOr) {
            let (rhs, rs) = self.data_and()?;
            if sort != Sort::Bool || rs != Sort::Bool {
                return Err(FormulaError::Type("`||` needs Bool operands".into()));
            }
            lhs = DataExpr::Or(Box::new(lhs), Box::new(rhs));
            sort = Sort::Bool;
        }
        Ok((lhs, sort))
    }

    fn data_and(&mut self) -> PResult<(DataExpr, Sort)> {
        let (mut lhs, sort) = self.data_unary()?;
        while self.eat(Tok::AndAnd) {
            let (rhs, rs) = self.data_unary()?;
            if sort != Sort::Bool || rs != Sort::Bool {
                return Err(FormulaError::Type("`&&` needs Bool operands".into()));
            }
            lhs = DataExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, sort))
    }

    fn data_unary(&mut self) -> PResult<(DataExpr, Sort)> {
        if self.eat(Tok::Bang) {
            let (e, s) = self.data_unary()?;
            if s != Sort::Bool {
                return Err(FormulaError::Type("`!` needs a Bool operand".into()));
            }
            return Ok((DataExpr::Not(Box::new(e)), Sort::Bool));
        }
        if self.eat(Tok::LParen) {
            let r = self.data_or()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(r);
        }
        self.data_cmp()
    }

    fn data_cmp(&mut self) -> PResult<(DataExpr, Sort)> {
        let (lhs, ls) = self.data_term()?;
        if self.eat(Tok::EqEq) {
            let (rhs, rs) = self.data_term()?;
            if ls != rs {
                return Err(FormulaError::Type(format!("cannot compare {ls} with {rs}")));
            }
            return Ok((DataExpr::Eq(Box::new(lhs), Box::new(rhs)), Sort::Bool));
        }
        Ok((lhs, ls))
    }

    fn data_term(&mut self) -> PResult<(DataExpr, Sort)> {
        let Some(w) = self.word().map(str::to_string) else {
            return self.fail("expected a data term");
        };
        if let Some(v) = literal_value(&w) {
            self.bump();
            return Ok((DataExpr::Lit(v), value_sort(v)));
        }
        match self.data_sort(&w) {
            Some(s) => {
                self.bump();
                Ok((DataExpr::Var(w), s))
            }
            None => Err(FormulaError::Unbound(w)),
        }
    }

    // ---- action formulas ----

    fn act_or(&mut self) -> PResult<(ActForm, Vec<(String, Sort)>)> {
        let (mut lhs, mut binders) = self.act_and()?;
        while self.eat(Tok::OrOr) {
            let (rhs, _) = self.act_and()?;
            lhs = ActForm::Or(Box::new(lhs), Box::new(rhs));
            binders.clear();
        }
        Ok((lhs, binders))
    }

    fn act_and(&mut self) -> PResult<(ActForm, Vec<(String, Sort)>)> {
        let (mut lhs, mut binders) = self.act_unary()?;
        while self.eat(Tok::AndAnd) {
            let (rhs, more) = self.act_unary()?;
            for (n, s) in more {
                match binders.iter().find(|(m, _)| *m == n) {
                    Some((_, t)) if *t != s => {
                        return Err(FormulaError::Type(format!("`{n}` bound with two sorts")));
                    }
                    Some(_) => {}
                    None => binders.push((n, s)),
                }
            }
            lhs = ActForm::And(Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, binders))
    }

    fn act_unary(&mut self) -> PResult<(ActForm, Vec<(String, Sort)>)> {
        if self.eat(Tok::Bang) {
            let (a, _) = self.act_unary()?;
            return Ok((ActForm::Not(Box::new(a)), vec![]));
        }
        if self.eat(Tok::LParen) {
            let r = self.act_or()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(r);
        }
        if self.eat_word("true") {
            return Ok((ActForm::True, vec![]));
        }
        if self.eat_word("false") {
            return Ok((ActForm::False, vec![]));
        }
        if self.eat_word("tau") {
            return Ok((ActForm::Tau, vec![]));
        }
        if self.eat_word("forall") {
            let vars = self.bindings()?;
            let (body, binders) = self.with_data(&vars, |p| p.act_or())?;
            let binders = binders
                .into_iter()
                .filter(|(n, _)| !vars.iter().any(|(v, _)| v == n))
                .collect();
            return Ok((ActForm::Forall(vars, Box::new(body)), binders));
        }
        if self.eat_word("output") {
            self.expect(Tok::LParen, "`(`")?;
            let mut binders = Vec::new();
            let x = self.pattern(Sort::XRay, &mut binders)?;
            self.expect(Tok::Comma, "`,`")?;
            let p = self.pattern(Sort::Plane, &mut binders)?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok((ActForm::Output(x, p), binders));
        }
        Ok((ActForm::Action(self.name()?), vec![]))
    }

    fn pattern(&mut self, sort: Sort, binders: &mut Vec<(String, Sort)>) -> PResult<DataExpr> {
        let Some(w) = self.word().map(str::to_string) else {
            return self.fail("expected a value or variable");
        };
        if let Some(v) = literal_value(&w) {
            if value_sort(v) != sort {
                return Err(FormulaError::Type(format!("`{w}` is not a {sort}")));
            }
            self.bump();
            return Ok(DataExpr::Lit(v));
        }
        let name = self.name()?;
        match self.data_sort(&name) {
            Some(s) if s != sort => Err(FormulaError::Type(format!("`{name}` is a {s}, expected {sort}"))),
            Some(_) => Ok(DataExpr::Var(name)),
            None => {
                if binders.iter().any(|(n, _)| *n == name) {
                    return Err(FormulaError::Type(format!("`{name}` bound twice in one pattern")));
                }
                binders.push((name.clone(), sort));
                Ok(DataExpr::Var(name))
            }
        }
    }
}

/// Parses a formula and checks that it is closed and alternation-free.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        scope: Vec::new(),
    };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return p.fail("unexpected input after formula");
    }
    validate(&f)?;
    Ok(f)
}

/// Closedness, arity and alternation checks for formulas however built.
pub(crate) fn validate(f: &Formula) -> Result<(), FormulaError> {
    let mut arities = HashMap::new();
    closed(f, &mut arities)?;
    data_closed(f, &mut Vec::new())?;
    alternation_free(f)
}

fn expr_closed(e: &DataExpr, scope: &[String]) -> Result<(), FormulaError> {
    match e {
        DataExpr::Lit(_) => Ok(()),
        DataExpr::Var(n) if scope.contains(n) => Ok(()),
        DataExpr::Var(n) => Err(FormulaError::Unbound(n.clone())),
        DataExpr::Not(a) => expr_closed(a, scope),
        DataExpr::Eq(a, b) | DataExpr::And(a, b) | DataExpr::Or(a, b) => {
            expr_closed(a, scope)?;
            expr_closed(b, scope)
        }
    }
}

/// Checks the data variables of an action formula and returns the names its
/// output patterns bind.
fn act_closed(act: &ActForm, scope: &mut Vec<String>) -> Result<Vec<String>, FormulaError> {
    match act {
        ActForm::Output(x, p) => {
            let mut binders = Vec::new();
            for e in [x, p] {
                match e {
                    DataExpr::Var(n) if !scope.contains(n) => binders.push(n.clone()),
                    _ => expr_closed(e, scope)?,
                }
            }
            Ok(binders)
        }
        ActForm::Not(a) => act_closed(a, scope).map(|_| vec![]),
        ActForm::Or(a, b) => {
            act_closed(a, scope)?;
            act_closed(b, scope).map(|_| vec![])
        }
        ActForm::And(a, b) => {
            let mut l = act_closed(a, scope)?;
            l.extend(act_closed(b, scope)?);
            Ok(l)
        }
        ActForm::Forall(vars, a) => {
            let depth = scope.len();
            scope.extend(vars.iter().map(|(n, _)| n.clone()));
            let r = act_closed(a, scope);
            scope.truncate(depth);
            Ok(r?.into_iter().filter(|n| !vars.iter().any(|(v, _)| v == n)).collect())
        }
        ActForm::True | ActForm::False | ActForm::Action(_) | ActForm::Tau => Ok(vec![]),
    }
}

fn data_closed(f: &Formula, scope: &mut Vec<String>) -> Result<(), FormulaError> {
    let depth = scope.len();
    let r = match f {
        Formula::Data(e) => expr_closed(e, scope),
        Formula::VarApp(_, args) => args.iter().try_for_each(|a| expr_closed(a, scope)),
        Formula::Nu(fp) | Formula::Mu(fp) => {
            scope.extend(fp.params.iter().map(|(n, _)| n.clone()));
            data_closed(&fp.body, scope)
        }
        Formula::Forall(vars, g) | Formula::Exists(vars, g) => {
            scope.extend(vars.iter().map(|(n, _)| n.clone()));
            data_closed(g, scope)
        }
        Formula::Box(act, g) | Formula::Diamond(act, g) => {
            let binders = act_closed(act, scope)?;
            scope.extend(binders);
            data_closed(g, scope)
        }
        Formula::BoxStar(act, g) => {
            act_closed(act, scope)?;
            data_closed(g, scope)
        }
        Formula::Not(g) => data_closed(g, scope),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            data_closed(a, scope)?;
            data_closed(b, scope)
        }
        Formula::True | Formula::False => Ok(()),
    };
    scope.truncate(depth);
    r
}

fn closed(f: &Formula, arities: &mut HashMap<String, Vec<usize>>) -> Result<(), FormulaError> {
    match f {
        Formula::VarApp(v, args) => match arities.get(v).and_then(|s| s.last()) {
            None => Err(FormulaError::Unbound(v.clone())),
            Some(&n) if n != args.len() => Err(FormulaError::Arity {
                var: v.clone(),
                expected: n,
                found: args.len(),
            }),
            Some(_) => Ok(()),
        },
        Formula::Nu(fp) | Formula::Mu(fp) => {
            arities.entry(fp.var.clone()).or_default().push(fp.params.len());
            let r = closed(&fp.body, arities);
            arities.get_mut(&fp.var).map(Vec::pop);
            r
        }
        Formula::Not(g) => {
            if g.is_data_only() {
                closed(g, arities)
            } else {
                Err(FormulaError::NonMonotone)
            }
        }
        Formula::Implies(a, b) => {
            if !a.is_data_only() {
                return Err(FormulaError::NonMonotone);
            }
            closed(a, arities)?;
            closed(b, arities)
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            closed(a, arities)?;
            closed(b, arities)
        }
        Formula::Box(_, g) | Formula::Diamond(_, g) | Formula::BoxStar(_, g) => closed(g, arities),
        Formula::Forall(_, g) | Formula::Exists(_, g) => closed(g, arities),
        Formula::True | Formula::False | Formula::Data(_) => Ok(()),
    }
}

pub(crate) fn free_fix_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(f, &mut Vec::new(), &mut out);
    out
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::VarApp(v, _) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Formula::Nu(fp) | Formula::Mu(fp) => {
            bound.push(fp.var.clone());
            collect_free(&fp.body, bound, out);
            bound.pop();
        }
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => collect_free(g, bound, out),
        Formula::Box(_, g) | Formula::Diamond(_, g) | Formula::BoxStar(_, g) => collect_free(g, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::True | Formula::False | Formula::Data(_) => {}
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FixKind {
    Greatest,
    Least,
}

/// Fixpoint subformulas (and `[A*]`, an anonymous greatest fixpoint) of `f`,
/// including `f` itself.
fn fixpoints<'a>(f: &'a Formula, out: &mut Vec<(FixKind, &'a Formula)>) {
    match f {
        Formula::Nu(fp) => {
            out.push((FixKind::Greatest, f));
            fixpoints(&fp.body, out);
        }
        Formula::Mu(fp) => {
            out.push((FixKind::Least, f));
            fixpoints(&fp.body, out);
        }
        Formula::BoxStar(_, g) => {
            out.push((FixKind::Greatest, f));
            fixpoints(g, out);
        }
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => fixpoints(g, out),
        Formula::Box(_, g) | Formula::Diamond(_, g) => fixpoints(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            fixpoints(a, out);
            fixpoints(b, out);
        }
        Formula::True | Formula::False | Formula::Data(_) | Formula::VarApp(..) => {}
    }
}

fn alternation_free(f: &Formula) -> Result<(), FormulaError> {
    let mut all = Vec::new();
    fixpoints(f, &mut all);
    for (kind, node) in &all {
        let fp = match node {
            Formula::Nu(fp) | Formula::Mu(fp) => fp,
            _ => continue,
        };
        let mut inner = Vec::new();
        fixpoints(&fp.body, &mut inner);
        for (k, sub) in inner {
            if k != *kind && free_fix_vars(sub).contains(&fp.var) {
                return Err(FormulaError::Alternation(fp.var.clone()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadlock_freedom_shape() {
        let f = parse_formula("[true*]<true>true").unwrap();
        assert_eq!(
            f,
            Formula::BoxStar(ActForm::True, Box::new(Formula::Diamond(ActForm::True, Box::new(Formula::True))))
        );
    }

    #[test]
    fn parameterless_fixpoint() {
        let f = parse_formula("nu X. <true>X").unwrap();
        let Formula::Nu(fp) = f else { panic!("expected nu") };
        assert!(fp.params.is_empty());
        assert_eq!(*fp.body, Formula::Diamond(ActForm::True, Box::new(Formula::VarApp("X".into(), vec![]))));
    }

    #[test]
    fn arity_mismatch() {
        assert_eq!(
            parse_formula("nu X(f:Bool=false). X(f, true)"),
            Err(FormulaError::Arity {
                var: "X".into(),
                expected: 1,
                found: 2
            })
        );
        assert!(matches!(parse_formula("nu X(f:Bool=false). X"), Err(FormulaError::Arity { .. })));
    }

    #[test]
    fn alternation_rejected() {
        assert_eq!(
            parse_formula("nu X. mu Y. (<a>Y || [b]X)"),
            Err(FormulaError::Alternation("X".into()))
        );
        // Nested fixpoints of the same kind, or closed inner ones, are fine.
        assert!(parse_formula("nu X. ([a]X && nu Y. [b]Y)").is_ok());
        assert!(parse_formula("nu X. ([a]X && mu Y. (<b>Y || <c>true))").is_ok());
    }

    #[test]
    fn unbound_and_type_errors() {
        assert_eq!(parse_formula("[a]Z"), Err(FormulaError::Unbound("Z".into())));
        assert!(matches!(parse_formula("forall x:XRay . x == FR"), Err(FormulaError::Type(_))));
        assert!(matches!(parse_formula("nu X(p:Plane=None). X"), Err(FormulaError::Syntax { .. }) | Err(FormulaError::Type(_))));
        assert!(matches!(parse_formula("[output(FR, FR)]true"), Err(FormulaError::Type(_))));
    }

    #[test]
    fn negation_must_be_monotone() {
        assert_eq!(parse_formula("!<a>true"), Err(FormulaError::NonMonotone));
        assert_eq!(parse_formula("<a>true => true"), Err(FormulaError::NonMonotone));
        assert!(parse_formula("!false").is_ok());
    }

    #[test]
    fn output_pattern_binds_for_body_only() {
        let f = parse_formula("[output(xr, p)](xr == Standby)").unwrap();
        assert!(matches!(f, Formula::Box(ActForm::Output(..), _)));
        assert_eq!(parse_formula("[output(xr, p)]true && xr == Fluo"), Err(FormulaError::Unbound("xr".into())));
        // Under a complement nothing is bound.
        assert_eq!(parse_formula("[!(output(xr, p))](p == FR)"), Err(FormulaError::Unbound("p".into())));
    }

    #[test]
    fn syntax_error_position() {
        let Err(FormulaError::Syntax { line, column, .. }) = parse_formula("[a]\n  <b") else {
            panic!("expected syntax error")
        };
        assert_eq!((line, column), (2, 5));
    }
}
