use std::fmt::Write as _;
use std::io::Read;

use super::{Constraint, CspInstance};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Converts a clause (signed 1-based literals) to a constraint whose single
/// nogood is the local assignment falsifying every literal. Repeated
/// literals collapse; a clause containing `x` and `-x` has no nogood.
fn clause_to_constraint(lits: &[i64]) -> Constraint {
    let mut vars: Vec<usize> = Vec::with_capacity(lits.len());
    let mut nogood: Vec<usize> = Vec::with_capacity(lits.len());
    let mut tautology = false;
    for &lit in lits {
        let var = (lit.unsigned_abs() - 1) as usize;
        let falsifying = usize::from(lit < 0);
        match vars.iter().position(|&v| v == var) {
            Some(pos) => tautology |= nogood[pos] != falsifying,
            None => {
                vars.push(var);
                nogood.push(falsifying);
            }
        }
    }
    let nogoods = if tautology { Vec::new() } else { vec![nogood] };
    Constraint::new(vars, nogoods)
}

/// Parses a DIMACS CNF stream into a `d = 2` instance.
///
/// Comment lines (`c ...`), blank lines and the SATLIB `%` end marker are
/// accepted. Clauses may span lines and must be terminated by `0`.
pub fn read_dimacs<R: Read>(mut input: R) -> Result<CspInstance> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;

    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Constraint> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        last_line = lineno;
        if line.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(lineno, "duplicate problem line"));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(parse_err(lineno, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad variable count `{}`", fields[2])))?;
            let count = fields[3]
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad clause count `{}`", fields[3])))?;
            header = Some((vars, count));
            continue;
        }
        let (n_vars, _) = header.ok_or_else(|| parse_err(lineno, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(clause_to_constraint(&pending));
                pending.clear();
            } else {
                if lit.unsigned_abs() as usize > n_vars {
                    return Err(parse_err(
                        lineno,
                        format!("literal {lit} out of range for {n_vars} variables"),
                    ));
                }
                pending.push(lit);
            }
        }
    }

    let (n_vars, n_clauses) = header.ok_or_else(|| parse_err(last_line.max(1), "missing problem line"))?;
    if !pending.is_empty() {
        return Err(parse_err(last_line, "last clause is missing its 0 terminator"));
    }
    if clauses.len() != n_clauses {
        return Err(parse_err(
            last_line.max(1),
            format!("header declares {n_clauses} clauses, found {}", clauses.len()),
        ));
    }
    let k = clauses.iter().map(|c| c.vars.len()).max().unwrap_or(0);
    CspInstance::with_arity(2, n_vars, k, clauses, String::from("dimacs"))
}

/// Writes a `d = 2` instance whose constraints each carry exactly one
/// nogood as DIMACS CNF.
pub fn write_dimacs(instance: &CspInstance) -> Result<String> {
    if instance.d() != 2 {
        return Err(Error::input("DIMACS output needs d = 2"));
    }
    let mut out = String::new();
    if !instance.label().is_empty() {
        let _ = writeln!(out, "c {}", instance.label());
    }
    let _ = writeln!(out, "p cnf {} {}", instance.n_ab(), instance.constraints().len());
    for c in instance.constraints() {
        if c.nogoods.len() != 1 {
            return Err(Error::input("only single-nogood constraints have a clause form"));
        }
        for (&var, &bad) in c.vars.iter().zip(&c.nogoods[0]) {
            let lit = var as i64 + 1;
            let _ = write!(out, "{} ", if bad == 0 { lit } else { -lit });
        }
        out.push_str("0\n");
    }
    Ok(out)
}
