//! Reduction of a linear-reducible query to an equivalent full join over its head.
//!
//! The join tree of the body plus the head edge is walked bottom-up with the
//! head node as root. A node whose head attributes are covered by its parent's
//! is semijoined into the parent and dropped; otherwise it is projected onto its
//! head attributes. Children of the head node are only projected.

use std::collections::BTreeSet;

use crate::error::{DcqError, Result};
use crate::hypergraph::{build_join_tree, is_linear_reducible, JoinTree};
use crate::instance::{absorb, project_atom, Instance};
use crate::metrics::Metrics;
use crate::ring::Semiring;
use crate::schema::{Atom, Attr, Database, Query};

/// One step of the schema-level reduction. Indexes refer to body atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceStep {
    /// Semijoin `child` into `parent` and drop it.
    Absorb { child: usize, parent: usize },
    /// Replace the atom by its projection onto `onto`.
    Project { atom: usize, onto: Vec<Attr> },
}

/// The reduction worked out on schemas only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducePlan {
    /// Join tree over body plus head edge (the head node is last); absent for full queries.
    pub tree: Option<JoinTree>,
    pub steps: Vec<ReduceStep>,
    /// Surviving atoms and their final attributes, in body order.
    pub survivors: Vec<(usize, Vec<Attr>)>,
}

impl ReducePlan {
    pub fn new(q: &Query) -> Result<Self> {
        if !is_linear_reducible(q) {
            return Err(DcqError::NotLinearReducible);
        }
        let mut current: Vec<Vec<Attr>> = q.body.iter().map(|a| a.attrs.clone()).collect();
        if q.is_full() {
            return Ok(ReducePlan {
                tree: None,
                steps: Vec::new(),
                survivors: current.into_iter().enumerate().collect(),
            });
        }
        let head: BTreeSet<Attr> = q.head_set();
        let tree = build_join_tree(q, true)?;
        let head_node = q.body.len();
        let in_head = |attrs: &[Attr]| -> Vec<Attr> {
            attrs
                .iter()
                .filter(|a| head.contains(*a))
                .cloned()
                .collect()
        };
        let mut removed = vec![false; q.body.len()];
        let mut steps = Vec::new();
        for u in tree.post_order() {
            if u == head_node {
                continue;
            }
            let parent = tree.nodes[u].parent.expect("non-root node");
            let own = in_head(&current[u]);
            let within_head = own.len() == current[u].len();
            if parent != head_node {
                let parent_head: BTreeSet<Attr> = in_head(&current[parent]).into_iter().collect();
                if own.iter().all(|a| parent_head.contains(a)) {
                    steps.push(ReduceStep::Absorb { child: u, parent });
                    removed[u] = true;
                    continue;
                }
            }
            if !within_head {
                steps.push(ReduceStep::Project {
                    atom: u,
                    onto: own.clone(),
                });
                current[u] = own;
            }
        }
        let survivors = current
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !removed[*i])
            .collect();
        Ok(ReducePlan {
            tree: Some(tree),
            steps,
            survivors,
        })
    }

    /// The reduced query: surviving atoms under their original names.
    pub fn reduced_query(&self, q: &Query) -> Query {
        Query {
            head: q.head.clone(),
            body: self
                .survivors
                .iter()
                .map(|(i, attrs)| Atom {
                    relation: q.body[*i].relation.clone(),
                    attrs: attrs.clone(),
                })
                .collect(),
        }
    }
}

/// Reduced edge set of a linear-reducible query; every edge is a subset of the head.
pub fn schema_reduce(q: &Query) -> Result<Vec<BTreeSet<Attr>>> {
    Ok(ReducePlan::new(q)?
        .survivors
        .into_iter()
        .map(|(_, attrs)| attrs.into_iter().collect())
        .collect())
}

/// A full query over the original head together with its reduced instance.
#[derive(Clone, Debug)]
pub struct ReducedQuery<W = ()> {
    pub instance: Instance<W>,
}

impl<W: Semiring> ReducedQuery<W> {
    pub fn query(&self) -> Query {
        self.instance.query()
    }

    pub fn database(&self) -> Database<W> {
        self.instance.database()
    }
}

/// Reduces `q` over `d`. Weights follow the semiring: a semijoin multiplies a
/// parent tuple by the sum of its matches and a projection adds merged weights.
pub fn reduce<W: Semiring>(q: &Query, d: &Database<W>, m: &Metrics) -> Result<ReducedQuery<W>> {
    let instance = Instance::bind(q, d)?;
    Ok(ReducedQuery {
        instance: reduce_instance(&instance, m)?,
    })
}

/// [`reduce`] on an already bound instance.
pub fn reduce_instance<W: Semiring>(inst: &Instance<W>, m: &Metrics) -> Result<Instance<W>> {
    let plan = ReducePlan::new(&inst.query())?;
    let mut atoms: Vec<_> = inst.atoms.clone();
    for step in &plan.steps {
        match step {
            ReduceStep::Absorb { child, parent } => {
                atoms[*parent] = absorb(&atoms[*parent], &atoms[*child], m)?;
            }
            ReduceStep::Project { atom, onto } => {
                atoms[*atom] = project_atom(&atoms[*atom], onto, m)?;
            }
        }
    }
    let atoms = plan
        .survivors
        .iter()
        .map(|(i, _)| atoms[*i].clone())
        .collect();
    Ok(Instance {
        head: inst.head.clone(),
        atoms,
    })
}
