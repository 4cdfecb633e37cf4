use std::fmt::Write;

use super::ast::{GuardExpr, ModelAst, Stmt};
use super::ValidatedModel;

const INDENT: &str = "  ";

/// Canonical text of a model. Parsing the result yields the same tree.
pub fn render(model: &ValidatedModel) -> String {
    render_ast(model.ast())
}

pub fn render_ast(ast: &ModelAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "InActions: {}", ast.input_actions.join(", "));
    out.push_str("BoolVars:\n");
    for (name, v) in &ast.bool_vars {
        let _ = writeln!(out, "{INDENT}{name} = {v}");
    }
    out.push_str("PlaneVars:\n");
    for (name, p) in &ast.plane_vars {
        let _ = writeln!(out, "{INDENT}{name} = {p}");
    }
    for rule in &ast.rules {
        out.push('\n');
        let _ = writeln!(out, "Rule {}", rule.action);
        let _ = writeln!(out, "{INDENT}Guard: {}", render_guard(&rule.guard));
        let _ = writeln!(out, "{INDENT}Do:");
        render_stmts(&mut out, &rule.do_clause, 2);
        out.push_str("End\n");
    }
    out
}

fn render_stmts(out: &mut String, body: &[Stmt], depth: usize) {
    let pad = INDENT.repeat(depth);
    for s in body {
        match s {
            Stmt::Assign(v, lit) => {
                let _ = writeln!(out, "{pad}{v} := {lit};");
            }
            Stmt::IfThen(c, then) => {
                let _ = writeln!(out, "{pad}if {} then", render_guard(c));
                render_stmts(out, then, depth + 1);
                let _ = writeln!(out, "{pad}fi");
            }
        }
    }
}

pub fn render_guard(g: &GuardExpr) -> String {
    let mut s = String::new();
    write_guard(&mut s, g, 0);
    s
}

fn precedence(g: &GuardExpr) -> u8 {
    match g {
        GuardExpr::Or(..) => 1,
        GuardExpr::And(..) => 2,
        _ => 3,
    }
}

fn write_guard(out: &mut String, g: &GuardExpr, min_prec: u8) {
    let prec = precedence(g);
    let wrap = prec < min_prec;
    if wrap {
        out.push('(');
    }
    match g {
        GuardExpr::Const(b) => {
            let _ = write!(out, "{b}");
        }
        GuardExpr::Var(v) => out.push_str(v),
        GuardExpr::Cmp(v, lit) => {
            let _ = write!(out, "{v} == {lit}");
        }
        GuardExpr::Not(e) => {
            out.push('!');
            write_guard(out, e, 3);
        }
        GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
            write_guard(out, a, prec);
            out.push_str(if prec == 1 { " || " } else { " && " });
            write_guard(out, b, prec + 1);
        }
    }
    if wrap {
        out.push(')');
    }
}
