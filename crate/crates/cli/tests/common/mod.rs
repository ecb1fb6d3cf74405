//! SQL normalizer for comparing emitted text with hand-written forms.
//!
//! Parses the subset the emitter produces (select-from-where with `and`,
//! `or`, `[NOT] EXISTS`, row `NOT IN` and column equalities), resolves every
//! column to a table occurrence, and prints a canonical string: output names
//! are dropped, equalities become sorted equivalence classes (inherited by
//! subqueries), other columns are replaced by their class representative,
//! conjunctions and disjunctions are sorted, and table occurrences of the
//! same table are renumbered to the smallest string.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

pub fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}.sql", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn columns_of(table: &str) -> &'static [&'static str] {
    match table {
        "graph" => &["src", "dst"],
        "triple" | "triple1" | "triple2" => &["node1", "node2", "node3"],
        _ => &[],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(char),
}

fn tokenize(sql: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut chars = sql.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '-' {
            chars.next();
            if chars.peek() == Some(&'-') {
                while chars.next().is_some_and(|c| c != '\n') {}
            } else {
                out.push(Tok::Sym('-'));
            }
        } else if c.is_alphanumeric() || c == '_' {
            let mut w = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    w.push(c.to_ascii_lowercase());
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Tok::Word(w));
        } else {
            out.push(Tok::Sym(c));
            chars.next();
        }
    }
    out
}

#[derive(Clone, Debug)]
struct RawCol {
    qualifier: Option<String>,
    name: String,
}

#[derive(Clone, Debug)]
enum RawCond {
    Eq(RawCol, RawCol),
    And(Vec<RawCond>),
    Or(Vec<RawCond>),
    Not(Box<RawCond>),
    Exists(Box<RawSelect>),
    NotIn(Vec<RawCol>, Box<RawSelect>),
}

#[derive(Clone, Debug)]
struct RawSelect {
    distinct: bool,
    /// Empty for `*`.
    columns: Vec<RawCol>,
    from: Vec<(String, Option<String>)>,
    filter: Option<RawCond>,
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
}

const KEYWORDS: &[&str] = &[
    "select", "distinct", "from", "where", "and", "or", "not", "exists", "in", "as",
];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn peek_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x == w)
    }

    fn peek_sym(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Sym(c))
    }

    fn word(&mut self, w: &str) {
        assert!(
            self.peek_word(w),
            "expected `{w}` at token {}, found {:?}",
            self.at,
            self.peek()
        );
        self.at += 1;
    }

    fn sym(&mut self, c: char) {
        assert!(
            self.peek_sym(c),
            "expected `{c}` at token {}, found {:?}",
            self.at,
            self.peek()
        );
        self.at += 1;
    }

    fn ident(&mut self) -> String {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()) => {
                self.at += 1;
                w
            }
            other => panic!("expected identifier at token {}, found {other:?}", self.at),
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if !KEYWORDS.contains(&w.as_str()))
    }

    fn column(&mut self) -> RawCol {
        let first = self.ident();
        if self.peek_sym('.') {
            self.at += 1;
            RawCol {
                qualifier: Some(first),
                name: self.ident(),
            }
        } else {
            RawCol {
                qualifier: None,
                name: first,
            }
        }
    }

    fn select(&mut self) -> RawSelect {
        self.word("select");
        let distinct = self.peek_word("distinct");
        if distinct {
            self.at += 1;
        }
        let mut columns = Vec::new();
        if self.peek_sym('*') {
            self.at += 1;
        } else {
            loop {
                columns.push(self.column());
                if self.peek_word("as") {
                    self.at += 1;
                    self.ident();
                }
                if !self.peek_sym(',') {
                    break;
                }
                self.at += 1;
            }
        }
        self.word("from");
        let mut from = Vec::new();
        loop {
            let table = self.ident();
            let alias = if self.is_ident() {
                Some(self.ident())
            } else {
                None
            };
            from.push((table, alias));
            if !self.peek_sym(',') {
                break;
            }
            self.at += 1;
        }
        let filter = if self.peek_word("where") {
            self.at += 1;
            Some(self.or())
        } else {
            None
        };
        RawSelect {
            distinct,
            columns,
            from,
            filter,
        }
    }

    fn or(&mut self) -> RawCond {
        let mut items = vec![self.and()];
        while self.peek_word("or") {
            self.at += 1;
            items.push(self.and());
        }
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            RawCond::Or(items)
        }
    }

    fn and(&mut self) -> RawCond {
        let mut items = vec![self.unary()];
        while self.peek_word("and") {
            self.at += 1;
            items.push(self.unary());
        }
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            RawCond::And(items)
        }
    }

    fn subquery(&mut self) -> RawSelect {
        self.sym('(');
        let s = self.select();
        self.sym(')');
        s
    }

    /// `(c1, c2, ...) NOT IN (...)`, or `None` with the position restored.
    fn row_not_in(&mut self) -> Option<RawCond> {
        let start = self.at;
        self.sym('(');
        let mut row = Vec::new();
        loop {
            if !self.is_ident() {
                self.at = start;
                return None;
            }
            row.push(self.column());
            if self.peek_sym(',') {
                self.at += 1;
            } else {
                break;
            }
        }
        if !self.peek_sym(')') {
            self.at = start;
            return None;
        }
        self.at += 1;
        if !self.peek_word("not") {
            self.at = start;
            return None;
        }
        self.word("not");
        self.word("in");
        Some(RawCond::NotIn(row, Box::new(self.subquery())))
    }

    fn unary(&mut self) -> RawCond {
        if self.peek_word("not") {
            self.at += 1;
            return RawCond::Not(Box::new(self.unary()));
        }
        if self.peek_word("exists") {
            self.at += 1;
            return RawCond::Exists(Box::new(self.subquery()));
        }
        if self.peek_sym('(') {
            if let Some(c) = self.row_not_in() {
                return c;
            }
            self.sym('(');
            let inner = self.or();
            self.sym(')');
            return inner;
        }
        let left = self.column();
        self.sym('=');
        let right = self.column();
        RawCond::Eq(left, right)
    }
}

/// A column of a table occurrence.
type Col = (usize, String);

#[derive(Clone, Debug)]
enum Cond {
    Eq(Col, Col),
    /// A conjunction nested under `or` or `not`.
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
    Exists(Box<Select>),
    NotIn(Vec<Col>, Box<Select>),
}

#[derive(Clone, Debug)]
struct Select {
    distinct: bool,
    columns: Vec<Col>,
    tables: Vec<usize>,
    /// Top-level conjuncts.
    filter: Vec<Cond>,
}

struct Resolver {
    /// Table name of each occurrence.
    names: Vec<String>,
}

type Scope = Vec<(usize, String, Option<String>)>;

impl Resolver {
    fn column(&self, c: &RawCol, scopes: &[Scope]) -> Col {
        for scope in scopes.iter().rev() {
            let hits: Vec<usize> = scope
                .iter()
                .filter(|(_, table, alias)| match &c.qualifier {
                    Some(q) => alias.as_ref().map_or(table == q, |a| a == q),
                    None => columns_of(table).contains(&c.name.as_str()),
                })
                .map(|(id, _, _)| *id)
                .collect();
            match hits.len() {
                0 => continue,
                1 => return (hits[0], c.name.clone()),
                _ => panic!("ambiguous column {c:?}"),
            }
        }
        panic!("unresolved column {c:?}")
    }

    fn select(&mut self, s: &RawSelect, scopes: &mut Vec<Scope>) -> Select {
        let mut scope = Scope::new();
        let mut tables = Vec::new();
        for (table, alias) in &s.from {
            let id = self.names.len();
            self.names.push(table.clone());
            tables.push(id);
            scope.push((id, table.clone(), alias.clone()));
        }
        scopes.push(scope);
        let columns = s.columns.iter().map(|c| self.column(c, scopes)).collect();
        let mut filter = Vec::new();
        if let Some(f) = &s.filter {
            self.conjuncts(f, scopes, &mut filter);
        }
        scopes.pop();
        Select {
            distinct: s.distinct,
            columns,
            tables,
            filter,
        }
    }

    fn conjuncts(&mut self, c: &RawCond, scopes: &mut Vec<Scope>, out: &mut Vec<Cond>) {
        match c {
            RawCond::And(items) => {
                for i in items {
                    self.conjuncts(i, scopes, out);
                }
            }
            other => out.push(self.cond(other, scopes)),
        }
    }

    fn cond(&mut self, c: &RawCond, scopes: &mut Vec<Scope>) -> Cond {
        match c {
            RawCond::Eq(a, b) => Cond::Eq(self.column(a, scopes), self.column(b, scopes)),
            RawCond::And(_) => {
                let mut items = Vec::new();
                self.conjuncts(c, scopes, &mut items);
                Cond::And(items)
            }
            RawCond::Or(items) => {
                let mut flat = Vec::new();
                for i in items {
                    match self.cond(i, scopes) {
                        Cond::Or(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                Cond::Or(flat)
            }
            RawCond::Not(inner) => Cond::Not(Box::new(self.cond(inner, scopes))),
            RawCond::Exists(s) => Cond::Exists(Box::new(self.select(s, scopes))),
            RawCond::NotIn(row, s) => {
                let row = row.iter().map(|c| self.column(c, scopes)).collect();
                Cond::NotIn(row, Box::new(self.select(s, scopes)))
            }
        }
    }
}

/// Union-find over column strings.
#[derive(Clone, Default)]
struct Classes {
    parent: BTreeMap<String, String>,
}

impl Classes {
    fn find(&self, x: &str) -> String {
        let mut x = x.to_string();
        while let Some(p) = self.parent.get(&x) {
            if *p == x {
                break;
            }
            x = p.clone();
        }
        x
    }

    fn union(&mut self, a: &str, b: &str) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.parent.entry(ra.clone()).or_insert_with(|| ra.clone());
        self.parent.entry(rb.clone()).or_insert_with(|| rb.clone());
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(hi, lo);
        }
    }

    fn members(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for k in self.parent.keys() {
            out.entry(self.find(k)).or_default().insert(k.clone());
        }
        out
    }
}

struct Printer<'a> {
    names: &'a [String],
    /// Renumbering of occurrences for the current permutation.
    label: &'a [usize],
}

impl Printer<'_> {
    fn col(&self, c: &Col) -> String {
        format!("{}{}.{}", self.names[c.0], self.label[c.0], c.1)
    }

    fn select(&self, s: &Select, inherited: &Classes) -> String {
        let mut classes = inherited.clone();
        for c in &s.filter {
            if let Cond::Eq(a, b) = c {
                classes.union(&self.col(a), &self.col(b));
            }
        }
        let own: BTreeSet<String> = s
            .tables
            .iter()
            .map(|&t| format!("{}{}.", self.names[t], self.label[t]))
            .collect();
        let mut parts: Vec<String> = classes
            .members()
            .into_values()
            .filter(|m| m.len() > 1 && m.iter().any(|c| own.iter().any(|o| c.starts_with(o))))
            .map(|m| format!("eq{{{}}}", m.into_iter().collect::<Vec<_>>().join(",")))
            .collect();
        for c in &s.filter {
            if !matches!(c, Cond::Eq(..)) {
                parts.push(self.cond(c, &classes));
            }
        }
        parts.sort();
        let mut tables: Vec<String> = s
            .tables
            .iter()
            .map(|&t| format!("{}{}", self.names[t], self.label[t]))
            .collect();
        tables.sort();
        let columns: Vec<String> = s
            .columns
            .iter()
            .map(|c| classes.find(&self.col(c)))
            .collect();
        format!(
            "select{}[{}] from[{}] where[{}]",
            if s.distinct { " distinct" } else { "" },
            if columns.is_empty() {
                "*".to_string()
            } else {
                columns.join(",")
            },
            tables.join(","),
            parts.join(" and ")
        )
    }

    fn cond(&self, c: &Cond, classes: &Classes) -> String {
        match c {
            Cond::Eq(a, b) => {
                let mut pair = [classes.find(&self.col(a)), classes.find(&self.col(b))];
                pair.sort();
                format!("{}={}", pair[0], pair[1])
            }
            Cond::And(items) => {
                let mut parts: Vec<String> = items.iter().map(|i| self.cond(i, classes)).collect();
                parts.sort();
                format!("and({})", parts.join(" & "))
            }
            Cond::Or(items) => {
                let mut parts: Vec<String> = items.iter().map(|i| self.cond(i, classes)).collect();
                parts.sort();
                format!("or({})", parts.join(" | "))
            }
            Cond::Not(inner) => format!("not({})", self.cond(inner, classes)),
            Cond::Exists(s) => format!("exists({})", self.select(s, classes)),
            Cond::NotIn(row, s) => {
                let row: Vec<String> = row.iter().map(|c| classes.find(&self.col(c))).collect();
                format!(
                    "notin[{}]({})",
                    row.join(","),
                    self.select(s, &Classes::default())
                )
            }
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Canonical text of one statement.
pub fn normalize(sql: &str) -> String {
    let toks: Vec<Tok> = tokenize(sql)
        .into_iter()
        .filter(|t| *t != Tok::Sym(';'))
        .collect();
    let mut parser = Parser { toks, at: 0 };
    let raw = parser.select();
    assert!(
        parser.at == parser.toks.len(),
        "trailing tokens after {:?}",
        parser.toks.get(parser.at)
    );
    let mut resolver = Resolver { names: Vec::new() };
    let select = resolver.select(&raw, &mut Vec::new());
    let names = resolver.names;

    let mut by_name: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (id, n) in names.iter().enumerate() {
        by_name.entry(n).or_default().push(id);
    }
    // Every combination of per-table orderings.
    let mut labelings: Vec<Vec<usize>> = vec![vec![0; names.len()]];
    for ids in by_name.values() {
        let perms = permutations(&(0..ids.len()).collect::<Vec<_>>());
        labelings = labelings
            .into_iter()
            .flat_map(|l| {
                perms.iter().map(move |p| {
                    let mut l = l.clone();
                    for (k, &id) in ids.iter().enumerate() {
                        l[id] = p[k];
                    }
                    l
                })
            })
            .collect();
    }
    labelings
        .iter()
        .map(|label| {
            Printer {
                names: &names,
                label,
            }
            .select(&select, &Classes::default())
        })
        .min()
        .expect("at least one labeling")
}
