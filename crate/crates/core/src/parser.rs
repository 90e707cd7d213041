//! Text format for QIP instances.
//!
//! ```text
//! MINIMIZE -x1 + 2 x2
//! SUBJECT TO
//!   2 x1 + x3 <= 4
//! UNCERTAINTY
//!   x2 + x4 <= 1
//! BOUNDS
//!   0 <= x1 <= 2
//! ORDER
//!   E x1
//!   A x2
//! END
//! ```
//!
//! Sections appear in this order; the objective, `UNCERTAINTY` and `BOUNDS`
//! are optional. Variables default to `0 <= x <= 1`. `#` starts a comment.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};

use crate::model::{LinearConstraint, QipBuilder, QipInstance, Quantifier, Relation, Sense, VarId};
use crate::rational::{format_rational, parse_decimal, to_i64, Rational};

/// 1-based position in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(String),
    Plus,
    Minus,
    Slash,
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

const KEYWORDS: [&str; 8] = [
    "MINIMIZE",
    "MAXIMIZE",
    "SUBJECT",
    "TO",
    "UNCERTAINTY",
    "BOUNDS",
    "ORDER",
    "END",
];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']')
}

fn err(span: SourceSpan, message: impl Into<String>) -> ParseError {
    ParseError {
        span,
        message: message.into(),
    }
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let span = SourceSpan {
            line: lineno,
            column: i + 1,
        };
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = if is_ident_start(c) {
            let end = (i..chars.len()).find(|&j| !is_ident_char(chars[j])).unwrap_or(chars.len());
            (Tok::Word(chars[i..end].iter().collect()), end - i)
        } else if c.is_ascii_digit() || c == '.' {
            let end = (i..chars.len())
                .find(|&j| !(chars[j].is_ascii_digit() || chars[j] == '.'))
                .unwrap_or(chars.len());
            (Tok::Number(chars[i..end].iter().collect()), end - i)
        } else {
            let next = chars.get(i + 1).copied();
            match (c, next) {
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('=', Some('<')) => (Tok::Le, 2),
                ('=', Some('>')) => (Tok::Ge, 2),
                ('=', _) => (Tok::Eq, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('/', _) => (Tok::Slash, 1),
                _ => return Err(err(span, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token { tok, span });
        i += len;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Objective,
    Rows,
    Uncertainty,
    Bounds,
    Order,
}

struct RawRow {
    terms: Vec<(Rational, String, SourceSpan)>,
    relation: Relation,
    rhs: Rational,
}

/// Cursor over the tokens of one logical line.
struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    end_span: SourceSpan,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn span(&self) -> SourceSpan {
        self.peek().map(|t| t.span).unwrap_or(self.end_span)
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// `decimal` or `int / int`.
    fn rational(&mut self) -> Result<Rational, ParseError> {
        let span = self.span();
        let Some(Token { tok: Tok::Number(text), .. }) = self.next() else {
            return Err(err(span, "expected a number"));
        };
        let value = parse_decimal(text).ok_or_else(|| err(span, format!("malformed number `{text}`")))?;
        if let Some(Token { tok: Tok::Slash, .. }) = self.peek() {
            self.pos += 1;
            let dspan = self.span();
            let Some(Token { tok: Tok::Number(dtext), .. }) = self.next() else {
                return Err(err(dspan, "expected a denominator"));
            };
            let denom = parse_decimal(dtext)
                .filter(|d| d.is_integer() && !d.is_zero())
                .ok_or_else(|| err(dspan, format!("invalid denominator `{dtext}`")))?;
            if !value.is_integer() {
                return Err(err(span, "numerator of a fraction must be an integer"));
            }
            return Ok(value / denom);
        }
        Ok(value)
    }

    fn signed_rational(&mut self) -> Result<Rational, ParseError> {
        let negative = match self.peek().map(|t| &t.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let v = self.rational()?;
        Ok(if negative { -v } else { v })
    }

    fn signed_int(&mut self) -> Result<i64, ParseError> {
        let span = self.span();
        let v = self.signed_rational()?;
        to_i64(&v).ok_or_else(|| err(span, "bound must be an integer"))
    }

    fn ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        let span = self.span();
        match self.next() {
            Some(Token { tok: Tok::Word(w), .. }) if !KEYWORDS.contains(&w.as_str()) => Ok((w.clone(), span)),
            Some(Token { tok: Tok::Word(w), .. }) => Err(err(span, format!("keyword `{w}` used as a variable"))),
            _ => Err(err(span, "expected a variable name")),
        }
    }

    /// `term (("+"|"-") term)*` with an optional leading sign; a lone `0` is the empty expression.
    fn linexpr(&mut self) -> Result<Vec<(Rational, String, SourceSpan)>, ParseError> {
        let mut terms = Vec::new();
        if let [Token { tok: Tok::Number(n), .. }, rest @ ..] = &self.toks[self.pos..] {
            let ends = rest.first().map_or(true, |t| matches!(t.tok, Tok::Le | Tok::Ge | Tok::Eq));
            if ends && parse_decimal(n).is_some_and(|v| v.is_zero()) {
                self.pos += 1;
                return Ok(terms);
            }
        }
        let mut first = true;
        loop {
            let sign = match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    Rational::one()
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    -Rational::one()
                }
                _ if first => Rational::one(),
                _ => break,
            };
            first = false;
            let coef = match self.peek().map(|t| &t.tok) {
                Some(Tok::Number(_)) => self.rational()?,
                _ => Rational::one(),
            };
            let (name, span) = self.ident()?;
            terms.push((sign * coef, name, span));
        }
        Ok(terms)
    }
}

fn relation(c: &mut Cursor<'_>) -> Result<Relation, ParseError> {
    let span = c.span();
    match c.next().map(|t| &t.tok) {
        Some(Tok::Le) => Ok(Relation::Le),
        Some(Tok::Ge) => Ok(Relation::Ge),
        Some(Tok::Eq) => Ok(Relation::Eq),
        _ => Err(err(span, "expected `<=`, `>=` or `=`")),
    }
}

fn expect_end(c: &Cursor<'_>) -> Result<(), ParseError> {
    if c.done() {
        Ok(())
    } else {
        Err(err(c.span(), "unexpected trailing input"))
    }
}

fn keyword_line(toks: &[Token]) -> Option<&str> {
    match toks.first() {
        Some(Token { tok: Tok::Word(w), .. }) if KEYWORDS.contains(&w.as_str()) => Some(w.as_str()),
        _ => None,
    }
}

pub fn parse_qip(text: &str) -> Result<QipInstance, ParseError> {
    let mut section: Option<Section> = None;
    let mut sense: Option<Sense> = None;
    let mut objective: Vec<(Rational, String, SourceSpan)> = Vec::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut univ: Vec<RawRow> = Vec::new();
    let mut bounds: Vec<(String, SourceSpan, i64, i64)> = Vec::new();
    let mut order: Vec<(Quantifier, Vec<(String, SourceSpan)>)> = Vec::new();
    let mut ended = false;
    let mut last_span = SourceSpan { line: 1, column: 1 };

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let toks = lex_line(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let end_span = SourceSpan {
            line: lineno,
            column: line.chars().count() + 1,
        };
        last_span = end_span;
        let first_span = toks[0].span;
        if ended {
            return Err(err(first_span, "content after END"));
        }
        let mut c = Cursor {
            toks: &toks,
            pos: 0,
            end_span,
        };
        let advance = |current: Option<Section>, next: Section, kw: &str| -> Result<Section, ParseError> {
            if current.is_some_and(|s| s >= next) {
                return Err(err(first_span, format!("section `{kw}` out of order")));
            }
            Ok(next)
        };
        if let Some(kw) = keyword_line(&toks) {
            c.pos = 1;
            match kw {
                "MINIMIZE" | "MAXIMIZE" => {
                    section = Some(advance(section, Section::Objective, kw)?);
                    sense = Some(if kw == "MINIMIZE" { Sense::Min } else { Sense::Max });
                    if !c.done() {
                        objective.extend(c.linexpr()?);
                        expect_end(&c)?;
                    }
                }
                "SUBJECT" => {
                    match c.next() {
                        Some(Token { tok: Tok::Word(w), .. }) if w == "TO" => {}
                        _ => return Err(err(c.span(), "expected `TO` after `SUBJECT`")),
                    }
                    expect_end(&c)?;
                    section = Some(advance(section, Section::Rows, "SUBJECT TO")?);
                }
                "UNCERTAINTY" => {
                    expect_end(&c)?;
                    section = Some(advance(section, Section::Uncertainty, kw)?);
                }
                "BOUNDS" => {
                    expect_end(&c)?;
                    section = Some(advance(section, Section::Bounds, kw)?);
                }
                "ORDER" => {
                    expect_end(&c)?;
                    section = Some(advance(section, Section::Order, kw)?);
                }
                "END" => {
                    expect_end(&c)?;
                    if section != Some(Section::Order) || order.is_empty() {
                        return Err(err(first_span, "END before any ORDER declaration"));
                    }
                    ended = true;
                }
                _ => return Err(err(first_span, format!("unexpected keyword `{kw}`"))),
            }
            continue;
        }
        match section {
            None => return Err(err(first_span, "expected `SUBJECT TO` or an objective")),
            Some(Section::Objective) => {
                // Continuation of a long objective expression.
                if !matches!(toks[0].tok, Tok::Plus | Tok::Minus) {
                    return Err(err(first_span, "objective continuation must start with `+` or `-`"));
                }
                objective.extend(c.linexpr()?);
                expect_end(&c)?;
            }
            Some(Section::Rows) | Some(Section::Uncertainty) => {
                let terms = c.linexpr()?;
                let relation = relation(&mut c)?;
                let rhs = c.signed_rational()?;
                expect_end(&c)?;
                let row = RawRow { terms, relation, rhs };
                if section == Some(Section::Rows) {
                    rows.push(row);
                } else {
                    univ.push(row);
                }
            }
            Some(Section::Bounds) => {
                let lo = c.signed_int()?;
                if relation(&mut c)? != Relation::Le {
                    return Err(err(first_span, "bounds are written `lo <= x <= hi`"));
                }
                let (name, span) = c.ident()?;
                let rel_span = c.span();
                if relation(&mut c)? != Relation::Le {
                    return Err(err(rel_span, "bounds are written `lo <= x <= hi`"));
                }
                let hi = c.signed_int()?;
                expect_end(&c)?;
                bounds.push((name, span, lo, hi));
            }
            Some(Section::Order) => {
                let q = match &toks[0].tok {
                    Tok::Word(w) if w == "E" => Quantifier::Exists,
                    Tok::Word(w) if w == "A" => Quantifier::Forall,
                    _ => return Err(err(first_span, "block declarations start with `E` or `A`")),
                };
                c.pos = 1;
                let mut names = Vec::new();
                while !c.done() {
                    names.push(c.ident()?);
                }
                if names.is_empty() {
                    return Err(err(end_span, "empty block declaration"));
                }
                order.push((q, names));
            }
        }
    }
    if !ended {
        return Err(err(last_span, "missing END"));
    }

    let mut b = QipBuilder::new();
    let mut ids: HashMap<String, VarId> = HashMap::new();
    for (q, names) in &order {
        for (name, span) in names {
            if ids.contains_key(name) {
                return Err(err(*span, format!("variable `{name}` declared twice")));
            }
            let id = b.binary(name.clone(), *q);
            ids.insert(name.clone(), id);
        }
    }
    let lookup = |name: &str, span: SourceSpan| -> Result<VarId, ParseError> {
        ids.get(name)
            .copied()
            .ok_or_else(|| err(span, format!("unknown variable `{name}`")))
    };
    let mut bounded = std::collections::HashSet::new();
    for (name, span, lo, hi) in &bounds {
        let id = lookup(name, *span)?;
        if !bounded.insert(id) {
            return Err(err(*span, format!("bounds for `{name}` given twice")));
        }
        b.set_bounds(id, *lo, *hi);
    }
    for (raw, is_univ) in rows.iter().map(|r| (r, false)).chain(univ.iter().map(|r| (r, true))) {
        let mut terms = Vec::with_capacity(raw.terms.len());
        for (c, name, span) in &raw.terms {
            terms.push((c.clone(), lookup(name, *span)?));
        }
        let row = LinearConstraint::new(terms, raw.relation, raw.rhs.clone());
        if is_univ {
            b.univ_row(row);
        } else {
            b.exist_row(row);
        }
    }
    if let Some(sense) = sense {
        let mut coeffs: Vec<(i64, VarId)> = Vec::new();
        for (c, name, span) in &objective {
            let id = lookup(name, *span)?;
            let value = to_i64(c).ok_or_else(|| err(*span, "objective coefficients must be integers"))?;
            match coeffs.iter_mut().find(|(_, v)| *v == id) {
                Some(entry) => entry.0 += value,
                None => coeffs.push((value, id)),
            }
        }
        b.objective(sense, coeffs);
    }
    b.build().map_err(|e| err(last_span, e.to_string()))
}

fn write_linexpr(out: &mut String, terms: impl IntoIterator<Item = (Rational, String)>) {
    let mut first = true;
    for (c, name) in terms {
        let mag = c.abs();
        if first {
            if c.is_negative() {
                out.push_str("- ");
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if !mag.is_one() {
            let _ = write!(out, "{} ", format_rational(&mag));
        }
        out.push_str(&name);
        first = false;
    }
    if first {
        out.push('0');
    }
}

fn write_row(out: &mut String, inst: &QipInstance, row: &LinearConstraint) {
    out.push_str("  ");
    write_linexpr(
        out,
        row.terms().iter().map(|(c, v)| (c.clone(), inst.name(*v).to_string())),
    );
    let _ = writeln!(out, " {} {}", row.relation().symbol(), format_rational(row.rhs()));
}

/// Canonical text form; `parse_qip(&serialize_qip(i))` equals `i`.
pub fn serialize_qip(inst: &QipInstance) -> String {
    let mut out = String::new();
    if let Some(obj) = inst.objective() {
        out.push_str(match obj.sense {
            Sense::Min => "MINIMIZE ",
            Sense::Max => "MAXIMIZE ",
        });
        write_linexpr(
            &mut out,
            obj.coeffs
                .iter()
                .map(|&(c, v)| (Rational::from_integer(c.into()), inst.name(v).to_string())),
        );
        out.push('\n');
    }
    out.push_str("SUBJECT TO\n");
    for row in inst.exist_system() {
        write_row(&mut out, inst, row);
    }
    if !inst.univ_system().is_empty() {
        out.push_str("UNCERTAINTY\n");
        for row in inst.univ_system() {
            write_row(&mut out, inst, row);
        }
    }
    let non_default: Vec<_> = inst
        .variables()
        .iter()
        .filter(|v| (v.lower, v.upper) != (0, 1))
        .collect();
    if !non_default.is_empty() {
        out.push_str("BOUNDS\n");
        for v in non_default {
            let _ = writeln!(out, "  {} <= {} <= {}", v.lower, v.name, v.upper);
        }
    }
    out.push_str("ORDER\n");
    for block in inst.blocks() {
        let _ = write!(out, "  {}", block.quantifier);
        for v in &block.vars {
            let _ = write!(out, " {}", inst.name(*v));
        }
        out.push('\n');
    }
    out.push_str("END\n");
    out
}
