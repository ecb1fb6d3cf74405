//! Attributes, values, atoms, queries, relations and databases.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{DcqError, Result};
use crate::ring::Semiring;

/// A query attribute (variable). Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Attr(Arc<str>);

impl Attr {
    pub fn new(name: &str) -> Self {
        Attr(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Attr {
    fn from(name: &str) -> Self {
        Attr::new(name)
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Builds an attribute list from names.
pub fn attrs(names: &[&str]) -> Vec<Attr> {
    names.iter().map(|n| Attr::new(n)).collect()
}

/// A data value: an integer or an interned string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Str(Arc<str>),
}

impl Value {
    /// Parses an integer when possible, otherwise keeps the text.
    pub fn parse(text: &str) -> Self {
        match text.parse::<i64>() {
            Ok(i) => Value::Int(i),
            Err(_) => Value::Str(Arc::from(text)),
        }
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(Arc::from(s))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// Values aligned with an attribute list.
pub type Tuple = Vec<Value>;

/// Shorthand for an all-integer tuple.
pub fn int_tuple(values: &[i64]) -> Tuple {
    values.iter().map(|&v| Value::Int(v)).collect()
}

/// Positions of `onto` inside `from`.
pub fn positions(from: &[Attr], onto: &[Attr]) -> Result<Vec<usize>> {
    onto.iter()
        .map(|a| {
            from.iter()
                .position(|b| b == a)
                .ok_or_else(|| DcqError::AttributeMissing(a.to_string()))
        })
        .collect()
}

/// Picks the values at `pos` out of `t`.
#[inline]
pub fn pick(t: &[Value], pos: &[usize]) -> Tuple {
    pos.iter().map(|&i| t[i].clone()).collect()
}

/// Restricts `t` (laid out as `from`) to the attributes `onto`, in `onto`'s order.
pub fn project_tuple(t: &[Value], from: &[Attr], onto: &[Attr]) -> Result<Tuple> {
    Ok(pick(t, &positions(from, onto)?))
}

/// One body atom `R(x1, ..., xn)`; the i-th attribute names the i-th column of `R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub relation: String,
    pub attrs: Vec<Attr>,
}

impl Atom {
    pub fn new(relation: &str, attrs: &[&str]) -> Self {
        Atom {
            relation: relation.to_string(),
            attrs: crate::schema::attrs(attrs),
        }
    }

    pub fn attr_set(&self) -> BTreeSet<Attr> {
        self.attrs.iter().cloned().collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.attrs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A conjunctive query: head attributes and body atoms.
///
/// The head is a set; its order fixes the column order of results.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub head: Vec<Attr>,
    pub body: Vec<Atom>,
}

impl Query {
    pub fn new(head: &[&str], body: Vec<Atom>) -> Self {
        Query {
            head: attrs(head),
            body,
        }
    }

    /// A full query whose head lists the universe in first-occurrence order.
    pub fn full(body: Vec<Atom>) -> Self {
        let mut head: Vec<Attr> = Vec::new();
        for atom in &body {
            for a in &atom.attrs {
                if !head.contains(a) {
                    head.push(a.clone());
                }
            }
        }
        Query { head, body }
    }

    pub fn universe(&self) -> BTreeSet<Attr> {
        self.body
            .iter()
            .flat_map(|a| a.attrs.iter().cloned())
            .collect()
    }

    pub fn head_set(&self) -> BTreeSet<Attr> {
        self.head.iter().cloned().collect()
    }

    pub fn is_full(&self) -> bool {
        let head = self.head_set();
        self.body
            .iter()
            .all(|a| a.attrs.iter().all(|x| head.contains(x)))
    }

    pub fn with_head(&self, head: Vec<Attr>) -> Query {
        Query {
            head,
            body: self.body.clone(),
        }
    }

    pub fn relation_names(&self) -> Vec<&str> {
        self.body.iter().map(|a| a.relation.as_str()).collect()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.head.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(") :- ")?;
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Checks the structural assumptions every engine relies on.
pub fn validate_query(q: &Query) -> Result<()> {
    let mut names = HashSet::new();
    for atom in &q.body {
        if !names.insert(atom.relation.as_str()) {
            return Err(DcqError::SelfJoin(atom.relation.clone()));
        }
        if atom.attrs.is_empty() || atom.attr_set().len() != atom.attrs.len() {
            return Err(DcqError::MalformedAtom(atom.relation.clone()));
        }
    }
    for (i, a) in q.body.iter().enumerate() {
        for b in &q.body[i + 1..] {
            if a.attr_set() == b.attr_set() {
                return Err(DcqError::DuplicateAttributeSet {
                    first: a.relation.clone(),
                    second: b.relation.clone(),
                });
            }
        }
    }
    let universe = q.universe();
    let mut seen = HashSet::new();
    for h in &q.head {
        if !universe.contains(h) {
            return Err(DcqError::HeadNotInBody(h.to_string()));
        }
        if !seen.insert(h) {
            return Err(DcqError::SchemaClash(format!("head repeats `{h}`")));
        }
    }
    Ok(())
}

/// A difference `Q1 - Q2 - ... - Qk` of queries over the same head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dcq {
    pub operands: Vec<Query>,
}

impl Dcq {
    pub fn new(operands: Vec<Query>) -> Self {
        Dcq { operands }
    }

    pub fn pair(q1: Query, q2: Query) -> Self {
        Dcq {
            operands: vec![q1, q2],
        }
    }

    pub fn head(&self) -> &[Attr] {
        &self.operands[0].head
    }

    pub fn validate(&self) -> Result<()> {
        if self.operands.len() < 2 {
            return Err(DcqError::TooFewOperands);
        }
        let head = self.operands[0].head_set();
        let mut names = HashSet::new();
        for q in &self.operands {
            validate_query(q)?;
            if q.head_set() != head {
                return Err(DcqError::HeadMismatch(format!(
                    "{:?} vs {:?}",
                    self.operands[0].head, q.head
                )));
            }
            for atom in &q.body {
                if !names.insert(atom.relation.as_str()) {
                    return Err(DcqError::SelfJoin(atom.relation.clone()));
                }
            }
        }
        Ok(())
    }
}

/// A deduplicated relation whose tuples each carry a weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation<W = ()> {
    schema: Vec<Attr>,
    rows: Vec<Tuple>,
    weights: Vec<W>,
}

impl<W: Semiring> Relation<W> {
    pub fn empty(schema: Vec<Attr>) -> Self {
        Relation {
            schema,
            rows: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a relation from rows; duplicate rows are merged by adding weights.
    pub fn from_weighted(schema: Vec<Attr>, rows: impl IntoIterator<Item = (Tuple, W)>) -> Self {
        let mut index: HashMap<Tuple, usize> = HashMap::new();
        let mut out: Relation<W> = Relation::empty(schema);
        for (t, w) in rows {
            debug_assert_eq!(t.len(), out.schema.len(), "tuple arity differs from schema");
            match index.get(&t) {
                Some(&i) => out.weights[i] = out.weights[i].add(&w),
                None => {
                    index.insert(t.clone(), out.rows.len());
                    out.rows.push(t);
                    out.weights.push(w);
                }
            }
        }
        out
    }

    /// Builds a relation from rows that are already distinct.
    pub(crate) fn from_distinct(schema: Vec<Attr>, rows: Vec<Tuple>, weights: Vec<W>) -> Self {
        debug_assert_eq!(rows.len(), weights.len());
        Relation {
            schema,
            rows,
            weights,
        }
    }

    pub fn schema(&self) -> &[Attr] {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Tuple] {
        &self.rows
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &W)> {
        self.rows.iter().zip(self.weights.iter())
    }

    /// Same data under new column names.
    pub fn renamed(&self, schema: Vec<Attr>) -> Result<Self> {
        if schema.len() != self.schema.len() {
            return Err(DcqError::SchemaMismatch(format!(
                "cannot rename {:?} to {:?}",
                self.schema, schema
            )));
        }
        Ok(Relation {
            schema,
            rows: self.rows.clone(),
            weights: self.weights.clone(),
        })
    }

    /// Columns reordered (and possibly dropped) to `onto`; weights of merged rows are added.
    pub fn project(&self, onto: &[Attr]) -> Result<Self> {
        let pos = positions(&self.schema, onto)?;
        Ok(Relation::from_weighted(
            onto.to_vec(),
            self.iter().map(|(t, w)| (pick(t, &pos), w.clone())),
        ))
    }

    pub fn filter(&self, mut keep: impl FnMut(&Tuple, &W) -> bool) -> Self {
        let mut out = Relation::empty(self.schema.clone());
        for (t, w) in self.iter() {
            if keep(t, w) {
                out.rows.push(t.clone());
                out.weights.push(w.clone());
            }
        }
        out
    }

    pub fn map_weights<V: Semiring>(&self, f: impl Fn(&W) -> V) -> Relation<V> {
        Relation {
            schema: self.schema.clone(),
            rows: self.rows.clone(),
            weights: self.weights.iter().map(f).collect(),
        }
    }

    /// Drops the weights.
    pub fn support(&self) -> Relation<()> {
        self.map_weights(|_| ())
    }

    pub fn to_set(&self) -> HashSet<Tuple> {
        self.rows.iter().cloned().collect()
    }

    pub fn to_map(&self) -> HashMap<Tuple, W> {
        self.iter().map(|(t, w)| (t.clone(), w.clone())).collect()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.rows.iter().any(|r| r.as_slice() == t)
    }

    /// Rows sorted by value; gives a canonical form for comparisons.
    pub fn sorted(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.rows.len()).collect();
        idx.sort_by(|&a, &b| self.rows[a].cmp(&self.rows[b]));
        Relation {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            weights: idx.iter().map(|&i| self.weights[i].clone()).collect(),
        }
    }
}

impl Relation<()> {
    /// Builds a set relation; duplicate rows collapse.
    pub fn from_rows(schema: Vec<Attr>, rows: impl IntoIterator<Item = Tuple>) -> Self {
        Relation::from_weighted(schema, rows.into_iter().map(|t| (t, ())))
    }

    pub fn from_ints(schema: &[&str], rows: &[&[i64]]) -> Self {
        Relation::from_rows(attrs(schema), rows.iter().map(|r| int_tuple(r)))
    }
}

/// Named relations. Relations are shared, so cloning a database is cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct Database<W = ()> {
    relations: BTreeMap<String, Arc<Relation<W>>>,
}

impl<W> Default for Database<W> {
    fn default() -> Self {
        Database {
            relations: BTreeMap::new(),
        }
    }
}

impl<W: Semiring> Database<W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, relation: Relation<W>) {
        self.relations.insert(name.to_string(), Arc::new(relation));
    }

    pub fn insert_shared(&mut self, name: &str, relation: Arc<Relation<W>>) {
        self.relations.insert(name.to_string(), relation);
    }

    pub fn with(mut self, name: &str, relation: Relation<W>) -> Self {
        self.insert(name, relation);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Relation<W>>> {
        self.relations.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(|k| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<Relation<W>>)> {
        self.relations.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Total number of tuples, N.
    pub fn size(&self) -> usize {
        self.relations.values().map(|r| r.len()).sum()
    }

    /// Number of tuples in the relations a query reads.
    pub fn size_for(&self, q: &Query) -> usize {
        q.body
            .iter()
            .filter_map(|a| self.get(&a.relation))
            .map(|r| r.len())
            .sum()
    }

    pub fn support(&self) -> Database<()> {
        Database {
            relations: self
                .relations
                .iter()
                .map(|(k, v)| (k.clone(), Arc::new(v.support())))
                .collect(),
        }
    }

    /// Checks that every atom of `q` resolves with matching arity.
    pub fn resolves(&self, q: &Query) -> Result<()> {
        for atom in &q.body {
            let rel = self
                .get(&atom.relation)
                .ok_or_else(|| DcqError::UnresolvedRelation(atom.relation.clone()))?;
            if rel.arity() != atom.attrs.len() {
                return Err(DcqError::ArityMismatch {
                    relation: atom.relation.clone(),
                    expected: atom.attrs.len(),
                    found: rel.arity(),
                });
            }
        }
        Ok(())
    }
}
