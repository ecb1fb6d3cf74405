//! Queries bound to concrete relations, plus the hash-based relational
//! operators the engines share.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::error::Result;
use crate::metrics::Metrics;
use crate::ring::Semiring;
use crate::schema::{pick, positions, Atom, Attr, Database, Query, Relation, Tuple};

/// An atom together with its relation. Column `i` of `relation` holds `attrs[i]`.
#[derive(Clone, Debug)]
pub struct BoundAtom<W = ()> {
    pub name: String,
    pub attrs: Vec<Attr>,
    pub relation: Arc<Relation<W>>,
}

impl<W: Semiring> BoundAtom<W> {
    pub fn new(name: &str, attrs: Vec<Attr>, relation: Relation<W>) -> Self {
        BoundAtom {
            name: name.to_string(),
            attrs,
            relation: Arc::new(relation),
        }
    }

    pub fn attr_set(&self) -> BTreeSet<Attr> {
        self.attrs.iter().cloned().collect()
    }

    pub fn atom(&self) -> Atom {
        Atom {
            relation: self.name.clone(),
            attrs: self.attrs.clone(),
        }
    }
}

/// A query whose atoms are bound to relations.
#[derive(Clone, Debug)]
pub struct Instance<W = ()> {
    pub head: Vec<Attr>,
    pub atoms: Vec<BoundAtom<W>>,
}

impl<W: Semiring> Instance<W> {
    /// Resolves every atom of `q` in `d`.
    pub fn bind(q: &Query, d: &Database<W>) -> Result<Self> {
        d.resolves(q)?;
        let atoms = q
            .body
            .iter()
            .map(|a| BoundAtom {
                name: a.relation.clone(),
                attrs: a.attrs.clone(),
                relation: Arc::clone(d.get(&a.relation).expect("resolved above")),
            })
            .collect();
        Ok(Instance {
            head: q.head.clone(),
            atoms,
        })
    }

    pub fn query(&self) -> Query {
        Query {
            head: self.head.clone(),
            body: self.atoms.iter().map(|a| a.atom()).collect(),
        }
    }

    pub fn database(&self) -> Database<W> {
        let mut d = Database::new();
        for a in &self.atoms {
            d.insert_shared(&a.name, Arc::clone(&a.relation));
        }
        d
    }

    pub fn with_head(&self, head: Vec<Attr>) -> Self {
        Instance {
            head,
            atoms: self.atoms.clone(),
        }
    }

    /// Total number of tuples.
    pub fn size(&self) -> usize {
        self.atoms.iter().map(|a| a.relation.len()).sum()
    }

    pub fn is_full(&self) -> bool {
        self.query().is_full()
    }
}

/// Attributes shared by two lists, in the order of `left`.
pub fn shared_attrs(left: &[Attr], right: &[Attr]) -> Vec<Attr> {
    left.iter().filter(|a| right.contains(a)).cloned().collect()
}

/// Membership index over the projection of `rows` onto `pos`.
pub fn key_set<'a>(rows: impl Iterator<Item = &'a Tuple>, pos: &[usize]) -> HashSet<Tuple> {
    rows.map(|t| pick(t, pos)).collect()
}

/// `parent ⋉ child`; each surviving parent tuple's weight is multiplied by the
/// sum of its matching child weights.
pub fn absorb<W: Semiring>(
    parent: &BoundAtom<W>,
    child: &BoundAtom<W>,
    m: &Metrics,
) -> Result<BoundAtom<W>> {
    let key = shared_attrs(&child.attrs, &parent.attrs);
    let child_pos = positions(&child.attrs, &key)?;
    let parent_pos = positions(&parent.attrs, &key)?;
    let mut sums: HashMap<Tuple, W> = HashMap::with_capacity(child.relation.len());
    for (t, w) in child.relation.iter() {
        let k = pick(t, &child_pos);
        match sums.get_mut(&k) {
            Some(s) => *s = s.add(w),
            None => {
                sums.insert(k, w.clone());
            }
        }
    }
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for (t, w) in parent.relation.iter() {
        if let Some(s) = sums.get(&pick(t, &parent_pos)) {
            rows.push(t.clone());
            weights.push(w.mul(s));
        }
    }
    m.scanned(child.relation.len() + parent.relation.len());
    m.probes(parent.relation.len());
    Ok(BoundAtom {
        name: parent.name.clone(),
        attrs: parent.attrs.clone(),
        relation: Arc::new(Relation::from_distinct(parent.attrs.clone(), rows, weights)),
    })
}

/// Projects an atom onto `onto`, adding the weights of merged tuples.
pub fn project_atom<W: Semiring>(
    atom: &BoundAtom<W>,
    onto: &[Attr],
    m: &Metrics,
) -> Result<BoundAtom<W>> {
    m.scanned(atom.relation.len());
    let pos = positions(&atom.attrs, onto)?;
    let relation = Relation::from_weighted(
        onto.to_vec(),
        atom.relation
            .iter()
            .map(|(t, w)| (pick(t, &pos), w.clone())),
    );
    Ok(BoundAtom {
        name: atom.name.clone(),
        attrs: onto.to_vec(),
        relation: Arc::new(relation),
    })
}

/// Rows of `left` whose projection onto the shared attributes occurs in `right`.
/// Weights are kept.
pub fn semijoin_rows<W: Semiring>(
    left_attrs: &[Attr],
    left_rows: &[usize],
    left: &Relation<W>,
    right_attrs: &[Attr],
    right_rows: &[usize],
    right: &Relation<W>,
    m: &Metrics,
) -> Vec<usize> {
    let key = shared_attrs(left_attrs, right_attrs);
    let lp = positions(left_attrs, &key).expect("shared attributes");
    let rp = positions(right_attrs, &key).expect("shared attributes");
    let keys = key_set(right_rows.iter().map(|&i| &right.rows()[i]), &rp);
    m.scanned(right_rows.len() + left_rows.len());
    m.probes(left_rows.len());
    left_rows
        .iter()
        .copied()
        .filter(|&i| keys.contains(&pick(&left.rows()[i], &lp)))
        .collect()
}
