//! Attribute-at-a-time backtracking join for queries of any shape.
//!
//! Each atom is stored as a hash trie in a global attribute order that puts
//! the head first. Candidates for an attribute come from the smallest trie
//! level among the atoms containing it and are probed in the others. Once the
//! head is bound the remaining attributes are only searched for one witness.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::Result;
use crate::instance::Instance;
use crate::metrics::Metrics;
use crate::ring::Semiring;
use crate::schema::{Attr, Database, Query, Relation, Tuple, Value};

#[derive(Default)]
struct Trie {
    children: HashMap<Value, Trie>,
}

impl Trie {
    fn insert(&mut self, values: impl Iterator<Item = Value>) {
        let mut node = self;
        for v in values {
            node = node.children.entry(v).or_default();
        }
    }
}

/// A prepared backtracking evaluator.
pub struct GenericEvaluator {
    head: Vec<Attr>,
    order: Vec<Attr>,
    /// Position in `head` of each of the first `head.len()` attributes of `order`.
    head_slot: Vec<usize>,
    /// For each depth, the atoms whose next trie level is that attribute.
    at_depth: Vec<Vec<usize>>,
    tries: Vec<Trie>,
    empty: bool,
}

impl GenericEvaluator {
    pub fn new<W: Semiring>(inst: &Instance<W>, m: &Metrics) -> Self {
        let order = attribute_order(inst);
        let rank: HashMap<&Attr, usize> = order.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut at_depth = vec![Vec::new(); order.len()];
        let mut tries = Vec::with_capacity(inst.atoms.len());
        for (i, atom) in inst.atoms.iter().enumerate() {
            let mut cols: Vec<usize> = (0..atom.attrs.len()).collect();
            cols.sort_by_key(|&c| rank[&atom.attrs[c]]);
            for &c in &cols {
                at_depth[rank[&atom.attrs[c]]].push(i);
            }
            let mut trie = Trie::default();
            for t in atom.relation.rows() {
                trie.insert(cols.iter().map(|&c| t[c].clone()));
            }
            m.scanned(atom.relation.len());
            tries.push(trie);
        }
        let head_slot = order
            .iter()
            .take(inst.head.len())
            .map(|a| {
                inst.head
                    .iter()
                    .position(|h| h == a)
                    .expect("head attribute")
            })
            .collect();
        let empty = inst.atoms.iter().any(|a| a.relation.is_empty());
        GenericEvaluator {
            head: inst.head.clone(),
            order,
            head_slot,
            at_depth,
            tries,
            empty,
        }
    }

    /// All head results.
    pub fn evaluate(&self, m: &Metrics) -> Relation<()> {
        let mut out = Vec::new();
        if !self.empty {
            let mut cursors: Vec<&Trie> = self.tries.iter().collect();
            let mut binding = vec![None; self.head.len()];
            self.enumerate(0, &mut cursors, &mut binding, &mut out, m);
        }
        m.emitted(out.len());
        Relation::from_rows(self.head.clone(), out)
    }

    /// Whether the body has a match that agrees with `t` on the head.
    pub fn contains_head(&self, t: &[Value], m: &Metrics) -> bool {
        if self.empty {
            return false;
        }
        let mut cursors: Vec<&Trie> = self.tries.iter().collect();
        for depth in 0..self.head.len() {
            let v = &t[self.head_slot[depth]];
            for &a in &self.at_depth[depth] {
                m.probes(1);
                match cursors[a].children.get(v) {
                    Some(next) => cursors[a] = next,
                    None => return false,
                }
            }
        }
        self.exists(self.head.len(), &mut cursors, m)
    }

    fn candidates<'t>(&self, depth: usize, cursors: &[&'t Trie]) -> Option<(usize, &'t Trie)> {
        self.at_depth[depth]
            .iter()
            .map(|&a| (a, cursors[a]))
            .min_by_key(|(_, t)| t.children.len())
    }

    /// Moves every cursor at `depth` to value `v`; false if some atom lacks it.
    fn descend(&self, depth: usize, v: &Value, cursors: &mut [&Trie], m: &Metrics) -> bool {
        for &a in &self.at_depth[depth] {
            m.probes(1);
            match cursors[a].children.get(v) {
                Some(next) => cursors[a] = next,
                None => return false,
            }
        }
        true
    }

    fn enumerate<'t>(
        &'t self,
        depth: usize,
        cursors: &mut Vec<&'t Trie>,
        binding: &mut Vec<Option<Value>>,
        out: &mut Vec<Tuple>,
        m: &Metrics,
    ) {
        if depth == self.head.len() {
            if self.exists(depth, cursors, m) {
                out.push(binding.iter().map(|v| v.clone().expect("bound")).collect());
            }
            return;
        }
        let Some((_, smallest)) = self.candidates(depth, cursors) else {
            return;
        };
        for v in smallest.children.keys() {
            let saved = cursors.clone();
            if self.descend(depth, v, cursors, m) {
                binding[self.head_slot[depth]] = Some(v.clone());
                self.enumerate(depth + 1, cursors, binding, out, m);
            }
            *cursors = saved;
        }
    }

    fn exists<'t>(&'t self, depth: usize, cursors: &mut Vec<&'t Trie>, m: &Metrics) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let Some((_, smallest)) = self.candidates(depth, cursors) else {
            return true;
        };
        for v in smallest.children.keys() {
            let saved = cursors.clone();
            if self.descend(depth, v, cursors, m) && self.exists(depth + 1, cursors, m) {
                *cursors = saved;
                return true;
            }
            *cursors = saved;
        }
        false
    }
}

/// Head attributes first, then the rest; within each group repeatedly pick
/// the attribute with the fewest distinct values, preferring attributes that
/// share an atom with those already chosen.
fn attribute_order<W: Semiring>(inst: &Instance<W>) -> Vec<Attr> {
    let mut domain: HashMap<Attr, usize> = HashMap::new();
    for atom in &inst.atoms {
        for (c, a) in atom.attrs.iter().enumerate() {
            let distinct: HashSet<&Value> = atom.relation.rows().iter().map(|t| &t[c]).collect();
            let e = domain.entry(a.clone()).or_insert(usize::MAX);
            *e = (*e).min(distinct.len());
        }
    }
    let head: BTreeSet<Attr> = inst.head.iter().cloned().collect();
    let universe: BTreeSet<Attr> = domain.keys().cloned().collect();
    let rest: BTreeSet<Attr> = universe.difference(&head).cloned().collect();
    let mut order: Vec<Attr> = Vec::new();
    for group in [head, rest] {
        let mut left = group;
        while !left.is_empty() {
            let connected = |a: &Attr| {
                inst.atoms.iter().any(|atom| {
                    atom.attrs.contains(a) && atom.attrs.iter().any(|b| order.contains(b))
                })
            };
            let next = left
                .iter()
                .min_by_key(|a| (!connected(a), domain[*a], (*a).clone()))
                .expect("nonempty")
                .clone();
            left.remove(&next);
            order.push(next);
        }
    }
    order
}

/// Evaluates any query under set semantics.
pub fn evaluate_generic<W: Semiring>(
    q: &Query,
    d: &Database<W>,
    m: &Metrics,
) -> Result<Relation<()>> {
    let inst = Instance::bind(q, d)?;
    Ok(GenericEvaluator::new(&inst, m).evaluate(m))
}
