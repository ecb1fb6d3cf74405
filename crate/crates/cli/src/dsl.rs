//! The program language.
//!
//! ```text
//! # comment
//! rel R1(a, b)                 # columns of R1.csv
//! rel G1(src, dst) from Graph  # reads Graph.csv
//! query Q1(x1, x3) :- R1(x1, x2), R2(x2, x3)
//! dcq D := Q1 - Q2 - Q3
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use dcq_core::schema::validate_query;
use dcq_core::{Atom, Attr, Dcq, DcqError, Query};

use crate::error::DslError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelDecl {
    pub name: String,
    /// Column names, matched positionally against the CSV header and atom arguments.
    pub columns: Vec<String>,
    /// Table the data comes from; defaults to the relation name.
    pub source: Option<String>,
}

impl RelDecl {
    pub fn source(&self) -> &str {
        self.source.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDecl {
    pub name: String,
    pub query: Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DcqDecl {
    pub name: String,
    pub operands: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub relations: Vec<RelDecl>,
    pub queries: Vec<QueryDecl>,
    pub dcqs: Vec<DcqDecl>,
}

impl Program {
    pub fn relation(&self, name: &str) -> Option<&RelDecl> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn query(&self, name: &str) -> Option<&Query> {
        self.queries
            .iter()
            .find(|q| q.name == name)
            .map(|q| &q.query)
    }

    pub fn dcq_decl(&self, name: &str) -> Option<&DcqDecl> {
        self.dcqs.iter().find(|d| d.name == name)
    }

    /// The named difference with its operand queries.
    pub fn dcq(&self, name: &str) -> Option<Dcq> {
        let decl = self.dcq_decl(name)?;
        let operands = decl
            .operands
            .iter()
            .map(|q| self.query(q).cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(Dcq::new(operands))
    }

    /// Every difference in declaration order.
    pub fn all_dcqs(&self) -> Vec<(String, Dcq)> {
        self.dcqs
            .iter()
            .filter_map(|d| self.dcq(&d.name).map(|dcq| (d.name.clone(), dcq)))
            .collect()
    }

    /// Checks query and difference invariants.
    pub fn validate(&self) -> Result<(), DslError> {
        for q in &self.queries {
            validate_query(&q.query).map_err(|source| DslError::Invalid {
                name: q.name.clone(),
                source,
            })?;
        }
        for (name, dcq) in self.all_dcqs() {
            dcq.validate().map_err(|source| match source {
                DcqError::HeadMismatch(detail) => DslError::HeadMismatch {
                    dcq: name.clone(),
                    detail,
                },
                source => DslError::Invalid {
                    name: name.clone(),
                    source,
                },
            })?;
        }
        Ok(())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.relations {
            write!(f, "rel {}({})", r.name, r.columns.join(", "))?;
            if let Some(source) = &r.source {
                write!(f, " from {source}")?;
            }
            writeln!(f)?;
        }
        for q in &self.queries {
            let head: Vec<&str> = q.query.head.iter().map(|a| a.name()).collect();
            let body: Vec<String> = q.query.body.iter().map(|a| a.to_string()).collect();
            writeln!(
                f,
                "query {}({}) :- {}",
                q.name,
                head.join(", "),
                body.join(", ")
            )?;
        }
        for d in &self.dcqs {
            writeln!(f, "dcq {} := {}", d.name, d.operands.join(" - "))?;
        }
        Ok(())
    }
}

/// Parses and validates a program.
pub fn parse_program(text: &str) -> Result<Program, DslError> {
    let program = parse_unchecked(text)?;
    program.validate()?;
    Ok(program)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Turnstile,
    Define,
    Minus,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Turnstile => f.write_str("`:-`"),
            Tok::Define => f.write_str("`:=`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, DslError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut c = 0;
        while c < chars.len() {
            let pos = Pos {
                line: i + 1,
                col: c + 1,
            };
            let ch = chars[c];
            match ch {
                '#' => break,
                ' ' | '\t' | '\r' => c += 1,
                '(' | ')' | ',' | '-' => {
                    out.push((
                        match ch {
                            '(' => Tok::LParen,
                            ')' => Tok::RParen,
                            ',' => Tok::Comma,
                            _ => Tok::Minus,
                        },
                        pos,
                    ));
                    c += 1;
                }
                ':' => match chars.get(c + 1) {
                    Some('-') => {
                        out.push((Tok::Turnstile, pos));
                        c += 2;
                    }
                    Some('=') => {
                        out.push((Tok::Define, pos));
                        c += 2;
                    }
                    _ => return Err(syntax(pos, "expected `:-` or `:=`")),
                },
                c0 if c0.is_ascii_alphabetic() || c0 == '_' => {
                    let start = c;
                    while c < chars.len() && (chars[c].is_ascii_alphanumeric() || chars[c] == '_') {
                        c += 1;
                    }
                    out.push((Tok::Ident(chars[start..c].iter().collect()), pos));
                }
                other => return Err(syntax(pos, &format!("unexpected character `{other}`"))),
            }
        }
    }
    let end = Pos {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    out.push((Tok::End, end));
    Ok(out)
}

fn syntax(pos: Pos, message: &str) -> DslError {
    DslError::Syntax {
        line: pos.line,
        col: pos.col,
        message: message.to_string(),
    }
}

const KEYWORDS: [&str; 4] = ["rel", "query", "dcq", "from"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

struct RawAtom {
    relation: String,
    args: Vec<String>,
    pos: Pos,
}

struct RawQuery {
    name: String,
    head: Vec<String>,
    body: Vec<RawAtom>,
    pos: Pos,
}

struct RawDcq {
    name: String,
    operands: Vec<(String, Pos)>,
    pos: Pos,
}

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, DslError> {
        let (tok, pos) = self.next();
        if tok == want {
            Ok(pos)
        } else {
            Err(syntax(pos, &format!("expected {want}, found {tok}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        match self.next() {
            (Tok::Ident(s), pos) if !KEYWORDS.contains(&s.as_str()) => Ok((s, pos)),
            (tok, pos) => Err(syntax(pos, &format!("expected {what}, found {tok}"))),
        }
    }

    /// `( ident, ... )`, possibly empty.
    fn ident_list(&mut self, what: &str) -> Result<Vec<String>, DslError> {
        self.expect(Tok::LParen)?;
        let mut items = Vec::new();
        if self.peek().0 == Tok::RParen {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.ident(what)?.0);
            match self.next() {
                (Tok::Comma, _) => continue,
                (Tok::RParen, _) => return Ok(items),
                (tok, pos) => {
                    return Err(syntax(pos, &format!("expected `,` or `)`, found {tok}")))
                }
            }
        }
    }

    fn keyword(&self) -> Option<&str> {
        match &self.peek().0 {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => Some(s.as_str()),
            _ => None,
        }
    }
}

fn parse_unchecked(text: &str) -> Result<Program, DslError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut rels: Vec<(RelDecl, Pos)> = Vec::new();
    let mut queries: Vec<RawQuery> = Vec::new();
    let mut dcqs: Vec<RawDcq> = Vec::new();
    loop {
        let (tok, pos) = p.next();
        match tok {
            Tok::End => break,
            Tok::Ident(k) if k == "rel" => {
                let (name, pos) = p.ident("relation name")?;
                let columns = p.ident_list("column name")?;
                if columns.is_empty() {
                    return Err(syntax(pos, "a relation needs at least one column"));
                }
                let source = if p.keyword() == Some("from") {
                    p.next();
                    Some(p.ident("source table")?.0)
                } else {
                    None
                };
                rels.push((
                    RelDecl {
                        name,
                        columns,
                        source,
                    },
                    pos,
                ));
            }
            Tok::Ident(k) if k == "query" => {
                let (name, pos) = p.ident("query name")?;
                let head = p.ident_list("head attribute")?;
                p.expect(Tok::Turnstile)?;
                let mut body = Vec::new();
                loop {
                    let (relation, pos) = p.ident("relation name")?;
                    let args = p.ident_list("attribute")?;
                    body.push(RawAtom {
                        relation,
                        args,
                        pos,
                    });
                    if p.peek().0 == Tok::Comma {
                        p.next();
                    } else {
                        break;
                    }
                }
                queries.push(RawQuery {
                    name,
                    head,
                    body,
                    pos,
                });
            }
            Tok::Ident(k) if k == "dcq" => {
                let (name, pos) = p.ident("difference name")?;
                p.expect(Tok::Define)?;
                let mut operands = vec![p.ident("query name")?];
                while p.peek().0 == Tok::Minus {
                    p.next();
                    operands.push(p.ident("query name")?);
                }
                if operands.len() < 2 {
                    return Err(syntax(
                        p.peek().1,
                        "a difference needs at least two operands",
                    ));
                }
                dcqs.push(RawDcq {
                    name,
                    operands,
                    pos,
                });
            }
            other => {
                return Err(syntax(
                    pos,
                    &format!("expected `rel`, `query` or `dcq`, found {other}"),
                ))
            }
        }
    }
    resolve(rels, queries, dcqs)
}

fn resolve(
    rels: Vec<(RelDecl, Pos)>,
    queries: Vec<RawQuery>,
    dcqs: Vec<RawDcq>,
) -> Result<Program, DslError> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut check_unique = |name: &str, pos: Pos| {
        if seen.insert(name.to_string()) {
            Ok(())
        } else {
            Err(DslError::Duplicate {
                name: name.to_string(),
                line: pos.line,
                col: pos.col,
            })
        }
    };
    let mut arity: HashMap<String, usize> = HashMap::new();
    for (r, pos) in &rels {
        check_unique(&r.name, *pos)?;
        arity.insert(r.name.clone(), r.columns.len());
    }
    let mut program = Program {
        relations: rels.into_iter().map(|(r, _)| r).collect(),
        ..Default::default()
    };
    for raw in queries {
        check_unique(&raw.name, raw.pos)?;
        let mut body = Vec::new();
        for a in raw.body {
            let expected = *arity
                .get(&a.relation)
                .ok_or_else(|| DslError::UnknownRelation {
                    name: a.relation.clone(),
                    line: a.pos.line,
                    col: a.pos.col,
                })?;
            if expected != a.args.len() {
                return Err(DslError::Arity {
                    relation: a.relation,
                    expected,
                    found: a.args.len(),
                    line: a.pos.line,
                    col: a.pos.col,
                });
            }
            body.push(Atom {
                relation: a.relation,
                attrs: a.args.iter().map(|x| Attr::new(x)).collect(),
            });
        }
        let head = raw.head.iter().map(|x| Attr::new(x)).collect();
        program.queries.push(QueryDecl {
            name: raw.name,
            query: Query { head, body },
        });
    }
    for raw in dcqs {
        check_unique(&raw.name, raw.pos)?;
        for (q, pos) in &raw.operands {
            if program.query(q).is_none() {
                return Err(DslError::UnknownQuery {
                    name: q.clone(),
                    line: pos.line,
                    col: pos.col,
                });
            }
        }
        program.dcqs.push(DcqDecl {
            name: raw.name,
            operands: raw.operands.into_iter().map(|(q, _)| q).collect(),
        });
    }
    Ok(program)
}

/// Parses without the query invariants, for preprocessing that repairs them.
pub fn parse_program_unchecked(text: &str) -> Result<Program, DslError> {
    parse_unchecked(text)
}
