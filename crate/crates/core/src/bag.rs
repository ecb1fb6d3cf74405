//! Bag-semantics difference for a single free-connex query over two databases.
//!
//! A result tuple keeps `max(0, w1 - w2)` copies, where `w1` and `w2` are its
//! multiplicities in the two databases. After reduction both multiplicities
//! are products of per-atom counts, so the tuple survives iff the product of
//! per-atom ratios `w1/w2` exceeds one. Atoms are split by how their counts
//! compare; tuples with some atom missing from the second database are joined
//! directly, and the rest are found by a threshold search over a join tree
//! whose buckets are sorted by the best ratio reachable below each tuple.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{DcqError, Result};
use crate::hypergraph::{is_free_connex, Hyperedge, JoinTree};
use crate::instance::{shared_attrs, BoundAtom, Instance};
use crate::metrics::Metrics;
use crate::reduce::reduce_instance;
use crate::schema::{pick, positions, Attr, Database, Query, Relation, Tuple};
use crate::yannakakis::for_each_full;

/// A tuple with its count in each database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountedTuple {
    pub tuple: Tuple,
    pub first: u64,
    pub second: u64,
}

impl CountedTuple {
    pub fn ratio(&self) -> Ratio {
        Ratio::of(self.first, self.second)
    }
}

/// `first / second` as an exact fraction; a zero denominator is infinite.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ratio {
    Finite(BigRational),
    Infinite,
}

impl Ratio {
    pub fn of(num: u64, den: u64) -> Self {
        if den == 0 {
            Ratio::Infinite
        } else {
            Ratio::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// One relation split against its counterpart.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartitionedRelation {
    pub schema: Vec<Attr>,
    /// Tuples absent from the second relation.
    pub missing: Vec<CountedTuple>,
    /// Tuples with `first <= second`.
    pub at_most: Vec<CountedTuple>,
    /// Tuples with `first > second`.
    pub above: Vec<CountedTuple>,
}

/// Splits `first` by comparing each count with the matching count in `second`.
pub fn partition(first: &Relation<u64>, second: &Relation<u64>) -> Result<PartitionedRelation> {
    let pos = positions(second.schema(), first.schema()).map_err(|_| {
        DcqError::SchemaMismatch(format!("{:?} vs {:?}", first.schema(), second.schema()))
    })?;
    if second.arity() != first.arity() {
        return Err(DcqError::SchemaMismatch(format!(
            "{:?} vs {:?}",
            first.schema(),
            second.schema()
        )));
    }
    let counts: HashMap<Tuple, u64> = second.iter().map(|(t, w)| (pick(t, &pos), *w)).collect();
    let mut out = PartitionedRelation {
        schema: first.schema().to_vec(),
        ..Default::default()
    };
    for (t, &w1) in first.iter() {
        let w2 = counts.get(t).copied().unwrap_or(0);
        let ct = CountedTuple {
            tuple: t.clone(),
            first: w1,
            second: w2,
        };
        if w2 == 0 {
            out.missing.push(ct);
        } else if w1 <= w2 {
            out.at_most.push(ct);
        } else {
            out.above.push(ct);
        }
    }
    Ok(out)
}

fn ratio_cmp(a: &CountedTuple, b: &CountedTuple) -> Ordering {
    (a.first as u128 * b.second as u128).cmp(&(b.first as u128 * a.second as u128))
}

fn net(first: u128, second: u128) -> u64 {
    u64::try_from(first.saturating_sub(second)).unwrap_or(u64::MAX)
}

fn two_path_shape(q: &Query) -> Option<(usize, usize)> {
    if q.body.len() != 2 || !q.is_full() || q.body.iter().any(|a| a.attrs.len() != 2) {
        return None;
    }
    let (a, b) = (&q.body[0].attrs, &q.body[1].attrs);
    let shared = shared_attrs(a, b);
    if shared.len() != 1 {
        return None;
    }
    Some((
        a.iter().position(|x| *x == shared[0])?,
        b.iter().position(|x| *x == shared[0])?,
    ))
}

/// The two-atom path case, written out as the three cases of the general algorithm.
pub fn bag_dcq_2path(
    q: &Query,
    d1: &Database<u64>,
    d2: &Database<u64>,
    m: &Metrics,
) -> Result<Relation<u64>> {
    let (ka, kb) = two_path_shape(q)
        .ok_or_else(|| DcqError::SchemaMismatch(format!("`{q}` is not a full two-atom path")))?;
    let part = |i: usize| -> Result<PartitionedRelation> {
        let atom = &q.body[i];
        let get = |d: &Database<u64>| {
            d.get(&atom.relation)
                .map(|r| {
                    Relation::from_distinct(
                        atom.attrs.clone(),
                        r.rows().to_vec(),
                        r.weights().to_vec(),
                    )
                })
                .ok_or_else(|| DcqError::UnresolvedRelation(atom.relation.clone()))
        };
        let p = partition(&get(d1)?, &get(d2)?)?;
        m.scanned(p.missing.len() + p.at_most.len() + p.above.len());
        Ok(p)
    };
    let (pa, pb) = (part(0)?, part(1)?);
    let head = &q.head;
    let out_pos = {
        let mut schema = q.body[0].attrs.clone();
        schema.push(q.body[1].attrs[1 - kb].clone());
        positions(&schema, head)?
    };
    let mut rows: Vec<(Tuple, u64)> = Vec::new();
    let mut emit = |a: &CountedTuple, b: &CountedTuple| {
        let mut t = a.tuple.clone();
        t.push(b.tuple[1 - kb].clone());
        let w = net(
            a.first as u128 * b.first as u128,
            a.second as u128 * b.second as u128,
        );
        rows.push((pick(&t, &out_pos), w));
    };
    let bucket = |tuples: &[CountedTuple], sort: bool| {
        let mut by_key: HashMap<_, Vec<CountedTuple>> = HashMap::new();
        for t in tuples {
            by_key
                .entry(t.tuple[kb].clone())
                .or_default()
                .push(t.clone());
        }
        if sort {
            for list in by_key.values_mut() {
                list.sort_by(|x, y| {
                    m.comparisons(1);
                    ratio_cmp(y, x)
                });
            }
        }
        by_key
    };
    let b_all: Vec<CountedTuple> = pb
        .missing
        .iter()
        .chain(&pb.at_most)
        .chain(&pb.above)
        .cloned()
        .collect();
    let b_all = bucket(&b_all, false);
    let b_missing = bucket(&pb.missing, false);
    let b_above = bucket(&pb.above, true);
    let b_at_most = bucket(&pb.at_most, true);

    // Case 1: the left tuple or the right tuple is missing from the second database.
    for a in &pa.missing {
        for b in b_all.get(&a.tuple[ka]).into_iter().flatten() {
            m.probes(1);
            emit(a, b);
        }
    }
    for a in pa.at_most.iter().chain(&pa.above) {
        for b in b_missing.get(&a.tuple[ka]).into_iter().flatten() {
            m.probes(1);
            emit(a, b);
        }
    }
    // Case 2: both ratios above one.
    for a in &pa.above {
        for b in b_above.get(&a.tuple[ka]).into_iter().flatten() {
            emit(a, b);
        }
    }
    // Case 3: one ratio above one, scanned against the other side in decreasing ratio.
    for (left, right) in [(&pa.above, &b_at_most), (&pa.at_most, &b_above)] {
        for a in left {
            for b in right.get(&a.tuple[ka]).into_iter().flatten() {
                m.comparisons(1);
                if a.first as u128 * b.first as u128 <= a.second as u128 * b.second as u128 {
                    break;
                }
                emit(a, b);
            }
        }
    }
    m.emitted(rows.len());
    Ok(Relation::from_weighted(head.clone(), rows))
}

/// A node of a [`BagTree`]: its attributes, parent and counted tuples.
#[derive(Clone, Debug)]
pub struct BagNode {
    pub attrs: Vec<Attr>,
    pub parent: Option<usize>,
    pub rows: Vec<CountedTuple>,
}

/// A combination of one row per node whose ratio product exceeds the threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BagMatch {
    /// Row index chosen at each node of the subtree; other nodes hold `usize::MAX`.
    pub rows: Vec<usize>,
    pub ratio: BigRational,
}

/// Join tree over counted relations with every count in the second database positive.
///
/// Each row gets a best ratio: its own ratio times, for each child, the best
/// best-ratio among matching child rows (zero without a match). Child rows
/// are bucketed by the key shared with the parent and sorted by best ratio,
/// descending.
#[derive(Clone, Debug)]
pub struct BagTree {
    nodes: Vec<BagNode>,
    root: usize,
    children: Vec<Vec<usize>>,
    own: Vec<Vec<BigRational>>,
    best: Vec<Vec<BigRational>>,
    parent_key: Vec<Vec<usize>>,
    buckets: Vec<HashMap<Tuple, Vec<usize>>>,
    root_order: Vec<usize>,
}

impl BagTree {
    pub fn new(nodes: Vec<BagNode>, m: &Metrics) -> Result<Self> {
        let roots: Vec<usize> = (0..nodes.len())
            .filter(|&u| nodes[u].parent.is_none())
            .collect();
        let [root] = roots[..] else {
            return Err(DcqError::NotAcyclic);
        };
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        for (u, node) in nodes.iter().enumerate() {
            if let Some(p) = node.parent {
                children[p].push(u);
            }
        }
        let mut post = Vec::with_capacity(n);
        let mut stack = vec![(root, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                post.push(u);
            } else {
                stack.push((u, true));
                stack.extend(children[u].iter().map(|&c| (c, false)));
            }
        }
        if post.len() != n {
            return Err(DcqError::NotAcyclic);
        }
        let own: Vec<Vec<BigRational>> = nodes
            .iter()
            .map(|node| {
                node.rows
                    .iter()
                    .map(|r| BigRational::new(BigInt::from(r.first), BigInt::from(r.second.max(1))))
                    .collect()
            })
            .collect();
        let mut best: Vec<Vec<BigRational>> = own.clone();
        let mut parent_key = vec![Vec::new(); n];
        let mut buckets: Vec<HashMap<Tuple, Vec<usize>>> = vec![HashMap::new(); n];
        for &u in &post {
            if let Some(p) = nodes[u].parent {
                let key = shared_attrs(&nodes[u].attrs, &nodes[p].attrs);
                let child_pos = positions(&nodes[u].attrs, &key)?;
                parent_key[u] = positions(&nodes[p].attrs, &key)?;
                let mut by_key: HashMap<Tuple, Vec<usize>> = HashMap::new();
                for (i, r) in nodes[u].rows.iter().enumerate() {
                    by_key
                        .entry(pick(&r.tuple, &child_pos))
                        .or_default()
                        .push(i);
                }
                for list in by_key.values_mut() {
                    list.sort_by(|&a, &b| {
                        m.comparisons(1);
                        best[u][b].cmp(&best[u][a])
                    });
                }
                m.scanned(nodes[u].rows.len());
                for (i, r) in nodes[p].rows.iter().enumerate() {
                    m.probes(1);
                    let factor = match by_key.get(&pick(&r.tuple, &parent_key[u])) {
                        Some(list) => best[u][list[0]].clone(),
                        None => BigRational::zero(),
                    };
                    best[p][i] *= factor;
                }
                buckets[u] = by_key;
            }
        }
        let mut root_order: Vec<usize> = (0..nodes[root].rows.len()).collect();
        root_order.sort_by(|&a, &b| {
            m.comparisons(1);
            best[root][b].cmp(&best[root][a])
        });
        Ok(BagTree {
            nodes,
            root,
            children,
            own,
            best,
            parent_key,
            buckets,
            root_order,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &[BagNode] {
        &self.nodes
    }

    /// Best ratio product reachable in the subtree of `node` through `row`.
    pub fn best_ratio(&self, node: usize, row: usize) -> &BigRational {
        &self.best[node][row]
    }

    /// All combinations through root row `row` with ratio product above `tau`.
    pub fn enumerate(&self, row: usize, tau: &BigRational, m: &Metrics) -> Vec<BagMatch> {
        let mut out = Vec::new();
        let mut chosen = vec![usize::MAX; self.nodes.len()];
        if self.best[self.root][row] > *tau {
            let _ = self.walk_node(self.root, row, tau, &mut chosen, m, &mut |chosen, ratio| {
                out.push(BagMatch {
                    rows: chosen.to_vec(),
                    ratio,
                });
                ControlFlow::Continue(())
            });
        }
        out
    }

    /// Streams every combination whose ratio product exceeds one.
    pub fn for_each_above_one(
        &self,
        m: &Metrics,
        f: &mut dyn FnMut(&[usize], BigRational) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let one = BigRational::one();
        let mut chosen = vec![usize::MAX; self.nodes.len()];
        for &row in &self.root_order {
            m.comparisons(1);
            if self.best[self.root][row] <= one {
                break;
            }
            self.walk_node(self.root, row, &one, &mut chosen, m, f)?;
        }
        ControlFlow::Continue(())
    }

    fn walk_node(
        &self,
        u: usize,
        row: usize,
        tau: &BigRational,
        chosen: &mut Vec<usize>,
        m: &Metrics,
        k: &mut dyn FnMut(&[usize], BigRational) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        chosen[u] = row;
        let own = &self.own[u][row];
        let need = tau / own;
        let tuple = &self.nodes[u].rows[row].tuple;
        let lists: Vec<&[usize]> = self.children[u]
            .iter()
            .map(|&c| {
                self.buckets[c]
                    .get(&pick(tuple, &self.parent_key[c]))
                    .map_or(&[][..], |v| v.as_slice())
            })
            .collect();
        if lists.iter().any(|l| l.is_empty()) {
            return ControlFlow::Continue(());
        }
        let maxes: Vec<BigRational> = self.children[u]
            .iter()
            .zip(&lists)
            .map(|(&c, l)| self.best[c][l[0]].clone())
            .collect();
        let result = self.walk_children(
            u,
            0,
            &lists,
            &maxes,
            BigRational::one(),
            &need,
            chosen,
            m,
            &mut |ch, acc| k(ch, acc * own),
        );
        chosen[u] = usize::MAX;
        result
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_children(
        &self,
        u: usize,
        i: usize,
        lists: &[&[usize]],
        maxes: &[BigRational],
        acc: BigRational,
        need: &BigRational,
        chosen: &mut Vec<usize>,
        m: &Metrics,
        k: &mut dyn FnMut(&[usize], BigRational) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if i == lists.len() {
            return k(chosen, acc);
        }
        let c = self.children[u][i];
        let rest: BigRational = maxes[i + 1..].iter().fold(BigRational::one(), |p, x| p * x);
        let threshold = need / (&acc * rest);
        for &r in lists[i] {
            m.comparisons(1);
            if self.best[c][r] <= threshold {
                break;
            }
            self.walk_node(
                c,
                r,
                &threshold,
                chosen,
                m,
                &mut |ch: &[usize], p: BigRational| {
                    let mut ch = ch.to_vec();
                    self.walk_children(u, i + 1, lists, maxes, &acc * p, need, &mut ch, m, k)
                },
            )?;
        }
        ControlFlow::Continue(())
    }
}

fn to_nodes(
    tree: &JoinTree,
    atoms: &[BoundAtom<u64>],
    parts: &[Vec<CountedTuple>],
) -> Vec<BagNode> {
    atoms
        .iter()
        .enumerate()
        .map(|(u, a)| BagNode {
            attrs: a.attrs.clone(),
            parent: tree.nodes[u].parent,
            rows: parts[u].clone(),
        })
        .collect()
}

fn counted_atom(a: &BoundAtom<u64>, rows: &[CountedTuple]) -> BoundAtom<u64> {
    BoundAtom {
        name: a.name.clone(),
        attrs: a.attrs.clone(),
        relation: Arc::new(Relation::from_distinct(
            a.attrs.clone(),
            rows.iter().map(|r| r.tuple.clone()).collect(),
            rows.iter().map(|r| r.first).collect(),
        )),
    }
}

/// `Q(d1) - Q(d2)` as multisets for a free-connex query.
pub fn bag_dcq(
    q: &Query,
    d1: &Database<u64>,
    d2: &Database<u64>,
    m: &Metrics,
) -> Result<Relation<u64>> {
    if !is_free_connex(q) {
        return Err(DcqError::NotFreeConnex);
    }
    let bind = |d: &Database<u64>| {
        Instance::bind(q, d).map_err(|e| match e {
            DcqError::ArityMismatch { .. } => DcqError::SchemaMismatch(e.to_string()),
            other => other,
        })
    };
    let (i1, i2) = (bind(d1)?, bind(d2)?);
    let (r1, r2) = if q.is_full() {
        (i1, i2)
    } else {
        (reduce_instance(&i1, m)?, reduce_instance(&i2, m)?)
    };
    let parts: Vec<PartitionedRelation> = r1
        .atoms
        .iter()
        .zip(&r2.atoms)
        .map(|(a, b)| {
            m.scanned(a.relation.len() + b.relation.len());
            partition(&a.relation, &b.relation)
        })
        .collect::<Result<_>>()?;
    let head = q.head.clone();
    let mut rows: Vec<(Tuple, u64)> = Vec::new();

    // Some atom missing from the second database: split on the first such atom.
    for i in 0..parts.len() {
        if parts[i].missing.is_empty() {
            continue;
        }
        let atoms: Vec<BoundAtom<u64>> = r1
            .atoms
            .iter()
            .enumerate()
            .map(|(j, a)| match j.cmp(&i) {
                Ordering::Less => {
                    let present: Vec<CountedTuple> = parts[j]
                        .at_most
                        .iter()
                        .chain(&parts[j].above)
                        .cloned()
                        .collect();
                    counted_atom(a, &present)
                }
                Ordering::Equal => counted_atom(a, &parts[j].missing),
                Ordering::Greater => a.clone(),
            })
            .collect();
        let inst = Instance {
            head: head.clone(),
            atoms,
        };
        for_each_full(&inst, &head, m, |t, w| {
            rows.push((t, w));
            ControlFlow::Continue(())
        })?;
    }

    // Every atom present: one pass per choice of which atoms have ratio at most one.
    let edges: Vec<Hyperedge> = r1
        .atoms
        .iter()
        .map(|a| Hyperedge::new(&a.name, a.attrs.iter().cloned()))
        .collect();
    let tree = JoinTree::from_edges(&edges, None)?;
    let k = parts.len();
    let out_src: Vec<(usize, usize)> = head
        .iter()
        .map(|x| {
            r1.atoms
                .iter()
                .enumerate()
                .find_map(|(u, a)| a.attrs.iter().position(|b| b == x).map(|c| (u, c)))
                .ok_or_else(|| DcqError::AttributeMissing(x.to_string()))
        })
        .collect::<Result<_>>()?;
    for mask in 0..(1u64 << k) - 1 {
        let chosen: Vec<Vec<CountedTuple>> = (0..k)
            .map(|u| {
                if mask & (1 << u) != 0 {
                    parts[u].at_most.clone()
                } else {
                    parts[u].above.clone()
                }
            })
            .collect();
        if chosen.iter().any(|c| c.is_empty()) {
            continue;
        }
        let bag_tree = BagTree::new(to_nodes(&tree, &r1.atoms, &chosen), m)?;
        let _ = bag_tree.for_each_above_one(m, &mut |picked, _| {
            let (mut w1, mut w2) = (1u128, 1u128);
            for (u, &r) in picked.iter().enumerate() {
                w1 = w1.saturating_mul(chosen[u][r].first as u128);
                w2 = w2.saturating_mul(chosen[u][r].second as u128);
            }
            let t: Tuple = out_src
                .iter()
                .map(|&(u, c)| chosen[u][picked[u]].tuple[c].clone())
                .collect();
            m.emitted(1);
            rows.push((t, net(w1, w2)));
            ControlFlow::Continue(())
        });
    }
    Ok(Relation::from_weighted(head, rows))
}
