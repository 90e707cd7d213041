//! LP-file export and solution-file import for external MILP solvers.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{IpOutcome, IpProblem, UnknownReason};
use crate::model::{Assignment, LinearConstraint, Sense, VarId};
use crate::rational::{decimal_places, format_rational, lcm_of_denominators, round_nearest, to_i128, Rational};

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E') {
        out.insert_str(0, "v_");
    }
    out
}

/// LP-safe, pairwise distinct names for the problem's variables, in declaration order.
pub fn lp_names(p: &IpProblem) -> Vec<String> {
    let mut used = HashSet::new();
    p.vars
        .iter()
        .map(|v| {
            let base = sanitize(&v.name);
            let mut name = base.clone();
            let mut k = 1;
            while !used.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}

fn write_terms(out: &mut String, terms: &[(Rational, &str)]) {
    let mut first = true;
    for (c, name) in terms {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        if first {
            if c.is_negative() {
                out.push_str("- ");
            }
        } else {
            let _ = write!(out, " {sign} ");
        }
        if !mag.is_one() {
            let _ = write!(out, "{} ", format_rational(&mag));
        }
        out.push_str(name);
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Rows whose data all terminate as decimals are written verbatim; otherwise
/// the row is multiplied through by the lcm of its denominators.
fn emission_form(row: &LinearConstraint) -> (Vec<Rational>, Rational) {
    let data = row.terms().iter().map(|(c, _)| c).chain(std::iter::once(row.rhs()));
    if data.clone().all(|x| decimal_places(x).is_some()) {
        (row.terms().iter().map(|(c, _)| c.clone()).collect(), row.rhs().clone())
    } else {
        let d = Rational::from_integer(lcm_of_denominators(data));
        (row.terms().iter().map(|(c, _)| c * &d).collect(), row.rhs() * &d)
    }
}

pub fn export_lp_text(p: &IpProblem) -> String {
    let names = lp_names(p);
    let index: HashMap<VarId, usize> = p.vars.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
    let name_of = |v: VarId| names[index[&v]].as_str();
    let mut out = String::new();
    match &p.objective {
        Some(obj) => {
            out.push_str(match obj.sense {
                Sense::Min => "Minimize\n",
                Sense::Max => "Maximize\n",
            });
            out.push_str(" obj: ");
            let terms: Vec<(Rational, &str)> = obj
                .coeffs
                .iter()
                .map(|&(c, v)| (Rational::from_integer(BigInt::from(c)), name_of(v)))
                .collect();
            write_terms(&mut out, &terms);
            out.push('\n');
        }
        None => {
            out.push_str("Minimize\n obj: 0");
            if let Some(first) = names.first() {
                let _ = write!(out, " {first}");
            }
            out.push('\n');
        }
    }
    out.push_str("Subject To\n");
    let mut k = 0;
    for row in &p.rows {
        for le in row.to_le() {
            k += 1;
            let (coeffs, rhs) = emission_form(&le);
            let terms: Vec<(Rational, &str)> = coeffs
                .into_iter()
                .zip(le.terms())
                .map(|(c, (_, v))| (c, name_of(*v)))
                .collect();
            let _ = write!(out, " c{k}: ");
            write_terms(&mut out, &terms);
            let _ = writeln!(out, " <= {}", format_rational(&rhs));
        }
    }
    out.push_str("Bounds\n");
    for (v, name) in p.vars.iter().zip(&names) {
        let _ = writeln!(out, " {} <= {} <= {}", v.lower, name, v.upper);
    }
    if !names.is_empty() {
        out.push_str("Generals\n");
        for name in &names {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

fn parse_value(text: &str) -> Option<Rational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let mut value = crate::rational::parse_decimal(mantissa)?;
    let ten = Rational::from_integer(BigInt::from(10));
    if exponent.unsigned_abs() > 400 {
        return None;
    }
    for _ in 0..exponent.unsigned_abs() {
        if exponent > 0 {
            value *= &ten;
        } else {
            value /= &ten;
        }
    }
    Some(if neg { -value } else { value })
}

/// Reads a solution file: a `status <word>` header followed by `name value`
/// lines. Variables absent from the file are taken to be 0; values are rounded
/// to the nearest integer and the witness is re-verified exactly against `p`.
pub fn parse_external_solution(text: &str, p: &IpProblem) -> IpOutcome {
    let unknown = |msg: String| IpOutcome::Unknown(UnknownReason::External(msg));
    let names = lp_names(p);
    let by_name: HashMap<&str, VarId> = names.iter().map(String::as_str).zip(p.vars.iter().map(|v| v.id)).collect();
    let tolerance = Rational::new(BigInt::one(), BigInt::from(1_000_000));
    let mut status: Option<String> = None;
    let mut witness = Assignment::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return unknown(format!("line {}: expected `name value`, got `{line}`", lineno + 1));
        }
        if fields[0].eq_ignore_ascii_case("status") {
            status = Some(fields[1].to_ascii_lowercase());
            if status.as_deref() == Some("infeasible") {
                return IpOutcome::Infeasible;
            }
            continue;
        }
        let Some(&id) = by_name.get(fields[0]) else {
            return unknown(format!("line {}: unknown variable `{}`", lineno + 1, fields[0]));
        };
        let Some(value) = parse_value(fields[1]) else {
            return unknown(format!("line {}: malformed value `{}`", lineno + 1, fields[1]));
        };
        let rounded = round_nearest(&value);
        if (value - Rational::from_integer(rounded.clone())).abs() > tolerance {
            return unknown(format!("line {}: non-integral value for `{}`", lineno + 1, fields[0]));
        }
        let Some(x) = to_i128(&rounded).and_then(|x| i64::try_from(x).ok()) else {
            return unknown(format!("line {}: value out of range", lineno + 1));
        };
        witness.insert(id, x);
    }
    match status.as_deref() {
        None => return unknown("missing status line".into()),
        Some("optimal" | "feasible" | "solution" | "integer_optimal") => {}
        Some(other) => return unknown(format!("solver status `{other}`")),
    }
    for v in &p.vars {
        if !witness.contains(v.id) {
            witness.insert(v.id, 0);
        }
    }
    if !p.is_satisfied_by(&witness) {
        return unknown("solution fails exact verification".into());
    }
    let value = p.objective_value(&witness);
    IpOutcome::Feasible { witness, value }
}
