//! GYO reduction, join trees and the structural query classes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{DcqError, Result};
use crate::reduce::schema_reduce;
use crate::schema::{Attr, Query};

/// Name given to the head edge when it joins the hypergraph.
pub const HEAD_EDGE: &str = "<head>";

/// A named hyperedge. The optional head edge has no physical relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperedge {
    pub name: String,
    pub attrs: BTreeSet<Attr>,
    pub is_head: bool,
}

impl Hyperedge {
    pub fn new(name: &str, attrs: impl IntoIterator<Item = Attr>) -> Self {
        Hyperedge {
            name: name.to_string(),
            attrs: attrs.into_iter().collect(),
            is_head: false,
        }
    }

    pub fn head(attrs: impl IntoIterator<Item = Attr>) -> Self {
        Hyperedge {
            name: HEAD_EDGE.to_string(),
            attrs: attrs.into_iter().collect(),
            is_head: true,
        }
    }
}

/// Anonymous edges named by position.
pub fn anonymous_edges(sets: &[BTreeSet<Attr>]) -> Vec<Hyperedge> {
    sets.iter()
        .enumerate()
        .map(|(i, s)| Hyperedge::new(&format!("e{i:04}"), s.iter().cloned()))
        .collect()
}

/// One GYO step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GyoStep {
    /// `attr` occurred only in `edge` and was removed from it.
    Eliminate { edge: usize, attr: Attr },
    /// `edge` was contained in `into` and removed.
    Absorb { edge: usize, into: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GyoOutcome {
    /// Edges left at the fixpoint; empty iff the hypergraph is acyclic.
    pub residual: Vec<usize>,
    pub trace: Vec<GyoStep>,
    /// The last surviving edge when the reduction succeeds.
    pub last: Option<usize>,
}

impl GyoOutcome {
    pub fn is_acyclic(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Repeatedly removes ear attributes and contained edges.
///
/// Ties are broken deterministically: the edge to absorb is the first by
/// (head edge last, name), and its absorber the first by (head edge first, name).
pub fn gyo_reduce(edges: &[Hyperedge]) -> GyoOutcome {
    let n = edges.len();
    let mut live = vec![true; n];
    let mut current: Vec<BTreeSet<Attr>> = edges.iter().map(|e| e.attrs.clone()).collect();
    let mut trace = Vec::new();

    let mut absorb_order: Vec<usize> = (0..n).collect();
    absorb_order.sort_by(|&a, &b| {
        (edges[a].is_head, &edges[a].name, a).cmp(&(edges[b].is_head, &edges[b].name, b))
    });
    let absorber_key = |i: usize| (!edges[i].is_head, edges[i].name.clone(), i);

    loop {
        let mut changed = false;

        let mut occurrences: HashMap<&Attr, usize> = HashMap::new();
        for i in (0..n).filter(|&i| live[i]) {
            for a in &current[i] {
                *occurrences.entry(a).or_default() += 1;
            }
        }
        let mut ears: Vec<(usize, Attr)> = Vec::new();
        for i in (0..n).filter(|&i| live[i]) {
            for a in &current[i] {
                if occurrences[a] == 1 {
                    ears.push((i, a.clone()));
                }
            }
        }
        for (i, a) in ears {
            current[i].remove(&a);
            trace.push(GyoStep::Eliminate { edge: i, attr: a });
            changed = true;
        }

        'absorb: for &i in &absorb_order {
            if !live[i] {
                continue;
            }
            let absorber = (0..n)
                .filter(|&j| j != i && live[j] && current[i].is_subset(&current[j]))
                .min_by_key(|&j| absorber_key(j));
            if let Some(j) = absorber {
                live[i] = false;
                trace.push(GyoStep::Absorb { edge: i, into: j });
                changed = true;
                break 'absorb;
            }
        }

        if !changed {
            break;
        }
    }

    let remaining: Vec<usize> = (0..n).filter(|&i| live[i]).collect();
    if remaining.len() <= 1 {
        GyoOutcome {
            residual: Vec::new(),
            trace,
            last: remaining.first().copied(),
        }
    } else {
        GyoOutcome {
            residual: remaining,
            trace,
            last: None,
        }
    }
}

/// True iff the edge sets form an alpha-acyclic hypergraph.
pub fn sets_acyclic(sets: &[BTreeSet<Attr>]) -> bool {
    sets.is_empty() || gyo_reduce(&anonymous_edges(sets)).is_acyclic()
}

/// A node of a [`JoinTree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub name: String,
    pub attrs: BTreeSet<Attr>,
    pub is_head: bool,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A rooted join tree. Node `i` corresponds to input edge `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

impl JoinTree {
    /// Builds a join tree from the GYO absorption trace, rooted at `root` if given.
    pub fn from_edges(edges: &[Hyperedge], root: Option<usize>) -> Result<Self> {
        if edges.is_empty() {
            return Err(DcqError::NotAcyclic);
        }
        let outcome = gyo_reduce(edges);
        if !outcome.is_acyclic() {
            return Err(DcqError::NotAcyclic);
        }
        let mut adjacent: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        for step in &outcome.trace {
            if let GyoStep::Absorb { edge, into } = *step {
                adjacent[edge].push(into);
                adjacent[into].push(edge);
            }
        }
        let root = root.or(outcome.last).unwrap_or(0);
        let mut nodes: Vec<TreeNode> = edges
            .iter()
            .map(|e| TreeNode {
                name: e.name.clone(),
                attrs: e.attrs.clone(),
                is_head: e.is_head,
                parent: None,
                children: Vec::new(),
            })
            .collect();
        let mut seen = vec![false; edges.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let mut next: Vec<usize> = adjacent[u].iter().copied().filter(|&v| !seen[v]).collect();
            next.sort_by(|&a, &b| (&edges[a].name, a).cmp(&(&edges[b].name, b)));
            for v in next {
                seen[v] = true;
                nodes[v].parent = Some(u);
                nodes[u].children.push(v);
                queue.push_back(v);
            }
        }
        debug_assert!(
            seen.iter().all(|&s| s),
            "absorption trace must span all edges"
        );
        Ok(JoinTree { nodes, root })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Root first; every node before its children.
    pub fn pre_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.nodes[u].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Children before parents; siblings in name order.
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        self.post_from(self.root, &mut out);
        out
    }

    fn post_from(&self, u: usize, out: &mut Vec<usize>) {
        for &c in &self.nodes[u].children {
            self.post_from(c, out);
        }
        out.push(u);
    }

    /// The highest node containing `x`.
    pub fn top(&self, x: &Attr) -> Option<usize> {
        self.pre_order()
            .into_iter()
            .find(|&u| self.nodes[u].attrs.contains(x))
    }

    pub fn tops(&self) -> BTreeMap<Attr, usize> {
        let mut tops = BTreeMap::new();
        for u in self.pre_order() {
            for x in &self.nodes[u].attrs {
                tops.entry(x.clone()).or_insert(u);
            }
        }
        tops
    }

    /// Checks that the nodes containing each attribute form a connected subtree.
    pub fn is_connected(&self) -> bool {
        let universe: BTreeSet<&Attr> = self.nodes.iter().flat_map(|n| n.attrs.iter()).collect();
        universe.into_iter().all(|x| {
            let subtree_roots = self
                .nodes
                .iter()
                .filter(|n| n.attrs.contains(x))
                .filter(|n| match n.parent {
                    None => true,
                    Some(p) => !self.nodes[p].attrs.contains(x),
                })
                .count();
            subtree_roots == 1
        })
    }
}

/// Edges of a query; atom `i` becomes edge `i` and the head, if requested, comes last.
pub fn query_edges(q: &Query, with_head: bool) -> Vec<Hyperedge> {
    let mut edges: Vec<Hyperedge> = q
        .body
        .iter()
        .map(|a| Hyperedge::new(&a.relation, a.attrs.iter().cloned()))
        .collect();
    if with_head {
        edges.push(Hyperedge::head(q.head.iter().cloned()));
    }
    edges
}

/// Join tree over the body, or over body plus head rooted at the head node.
pub fn build_join_tree(q: &Query, force_virtual_head: bool) -> Result<JoinTree> {
    let edges = query_edges(q, force_virtual_head);
    let root = force_virtual_head.then_some(q.body.len());
    JoinTree::from_edges(&edges, root)
}

pub fn is_acyclic(q: &Query) -> bool {
    q.body.is_empty() || gyo_reduce(&query_edges(q, false)).is_acyclic()
}

/// Acyclic, and still acyclic with the head added as an edge.
pub fn is_free_connex(q: &Query) -> bool {
    is_acyclic(q) && gyo_reduce(&query_edges(q, true)).is_acyclic()
}

/// The body plus the head edge is acyclic.
pub fn is_linear_reducible(q: &Query) -> bool {
    gyo_reduce(&query_edges(q, true)).is_acyclic()
}

/// Structural flags of one query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub acyclic: bool,
    pub free_connex: bool,
    pub linear_reducible: bool,
    pub full: bool,
}

pub fn classify(q: &Query) -> Classification {
    Classification {
        acyclic: is_acyclic(q),
        free_connex: is_free_connex(q),
        linear_reducible: is_linear_reducible(q),
        full: q.is_full(),
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "acyclic={} free-connex={} linear-reducible={} full={}",
            self.acyclic, self.free_connex, self.linear_reducible, self.full
        )
    }
}

/// Why a pair of queries is not difference-linear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    FirstNotFreeConnex,
    SecondNotLinearReducible,
    /// Adding this reduced edge of the second query to the first makes it cyclic.
    CyclicWith(BTreeSet<Attr>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::FirstNotFreeConnex => f.write_str("first operand is not free-connex"),
            Witness::SecondNotLinearReducible => {
                f.write_str("second operand is not linear-reducible")
            }
            Witness::CyclicWith(e) => {
                let names: Vec<&str> = e.iter().map(|a| a.name()).collect();
                write!(
                    f,
                    "edge {{{}}} makes the first operand cyclic",
                    names.join(",")
                )
            }
        }
    }
}

/// Outcome of the difference-linearity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceVerdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

/// Tests whether `q1 - q2` is difference-linear.
pub fn is_difference_linear(q1: &Query, q2: &Query) -> Result<DifferenceVerdict> {
    if q1.head_set() != q2.head_set() {
        return Err(DcqError::HeadMismatch(format!(
            "{:?} vs {:?}",
            q1.head, q2.head
        )));
    }
    let fail = |w: Witness| {
        Ok(DifferenceVerdict {
            holds: false,
            witness: Some(w),
        })
    };
    if !is_free_connex(q1) {
        return fail(Witness::FirstNotFreeConnex);
    }
    if !is_linear_reducible(q2) {
        return fail(Witness::SecondNotLinearReducible);
    }
    let first = schema_reduce(q1)?;
    let second = schema_reduce(q2)?;
    for e in &second {
        let mut sets = first.clone();
        sets.push(e.clone());
        if !sets_acyclic(&sets) {
            return fail(Witness::CyclicWith(e.clone()));
        }
    }
    Ok(DifferenceVerdict {
        holds: true,
        witness: None,
    })
}
