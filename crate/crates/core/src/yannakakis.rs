//! Yannakakis-style evaluation of free-connex queries in time linear in input plus output.

use std::collections::HashMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{DcqError, Result};
use crate::hypergraph::{is_free_connex, Hyperedge, JoinTree};
use crate::instance::{semijoin_rows, shared_attrs, BoundAtom, Instance};
use crate::metrics::Metrics;
use crate::reduce::reduce_instance;
use crate::ring::Semiring;
use crate::schema::{pick, positions, Attr, Database, Query, Relation, Tuple};

fn tree_of<W: Semiring>(inst: &Instance<W>) -> Result<JoinTree> {
    let edges: Vec<Hyperedge> = inst
        .atoms
        .iter()
        .map(|a| Hyperedge::new(&a.name, a.attrs.iter().cloned()))
        .collect();
    JoinTree::from_edges(&edges, None)
}

/// Row indexes that survive the bottom-up and top-down semijoin passes.
fn reduced_rows<W: Semiring>(inst: &Instance<W>, tree: &JoinTree, m: &Metrics) -> Vec<Vec<usize>> {
    let mut alive: Vec<Vec<usize>> = inst
        .atoms
        .iter()
        .map(|a| (0..a.relation.len()).collect())
        .collect();
    let semijoin = |alive: &Vec<Vec<usize>>, left: usize, right: usize| {
        let (l, r) = (&inst.atoms[left], &inst.atoms[right]);
        semijoin_rows(
            &l.attrs,
            &alive[left],
            &l.relation,
            &r.attrs,
            &alive[right],
            &r.relation,
            m,
        )
    };
    for u in tree.post_order() {
        if let Some(p) = tree.nodes[u].parent {
            alive[p] = semijoin(&alive, p, u);
        }
    }
    for u in tree.pre_order() {
        if let Some(p) = tree.nodes[u].parent {
            alive[u] = semijoin(&alive, u, p);
        }
    }
    alive
}

/// The instance after both semijoin passes; no tuple is dangling afterwards.
pub fn full_reduce<W: Semiring>(inst: &Instance<W>, m: &Metrics) -> Result<Instance<W>> {
    if inst.atoms.is_empty() {
        return Ok(inst.clone());
    }
    let tree = tree_of(inst)?;
    let alive = reduced_rows(inst, &tree, m);
    let atoms = inst
        .atoms
        .iter()
        .zip(alive)
        .map(|(a, rows)| BoundAtom {
            name: a.name.clone(),
            attrs: a.attrs.clone(),
            relation: Arc::new(Relation::from_distinct(
                a.attrs.clone(),
                rows.iter().map(|&i| a.relation.rows()[i].clone()).collect(),
                rows.iter()
                    .map(|&i| a.relation.weights()[i].clone())
                    .collect(),
            )),
        })
        .collect();
    Ok(Instance {
        head: inst.head.clone(),
        atoms,
    })
}

struct Enumerator<'a, W> {
    inst: &'a Instance<W>,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    parent_key: Vec<Vec<usize>>,
    index: Vec<HashMap<Tuple, Vec<usize>>>,
    root_rows: Vec<usize>,
    out_src: Vec<(usize, usize)>,
    m: &'a Metrics,
}

impl<'a, W: Semiring> Enumerator<'a, W> {
    fn walk<F>(&self, k: usize, acc: W, chosen: &mut [usize], f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(Tuple, W) -> ControlFlow<()>,
    {
        if k == self.order.len() {
            let t: Tuple = self
                .out_src
                .iter()
                .map(|&(u, col)| self.inst.atoms[u].relation.rows()[chosen[u]][col].clone())
                .collect();
            self.m.emitted(1);
            return f(t, acc);
        }
        let u = self.order[k];
        let rows: &[usize] = match self.parent[u] {
            None => &self.root_rows,
            Some(p) => {
                let prow = &self.inst.atoms[p].relation.rows()[chosen[p]];
                self.m.probes(1);
                match self.index[u].get(&pick(prow, &self.parent_key[u])) {
                    Some(rows) => rows,
                    None => return ControlFlow::Continue(()),
                }
            }
        };
        for &r in rows {
            chosen[u] = r;
            let w = acc.mul(&self.inst.atoms[u].relation.weights()[r]);
            self.walk(k + 1, w, chosen, f)?;
        }
        ControlFlow::Continue(())
    }
}

/// Streams the results of a full acyclic instance, projected onto `out`.
///
/// Distinct join results are passed to `f` with the product of their tuple
/// weights; `out` must cover every attribute for results to be distinct.
pub fn for_each_full<W, F>(inst: &Instance<W>, out: &[Attr], m: &Metrics, mut f: F) -> Result<()>
where
    W: Semiring,
    F: FnMut(Tuple, W) -> ControlFlow<()>,
{
    if inst.atoms.is_empty() {
        if !out.is_empty() {
            return Err(DcqError::AttributeMissing(out[0].to_string()));
        }
        let _ = f(Vec::new(), W::one());
        return Ok(());
    }
    let tree = tree_of(inst)?;
    let alive = reduced_rows(inst, &tree, m);
    let order = tree.pre_order();
    let n = inst.atoms.len();
    let mut parent = vec![None; n];
    let mut parent_key = vec![Vec::new(); n];
    let mut index: Vec<HashMap<Tuple, Vec<usize>>> = vec![HashMap::new(); n];
    for u in 0..n {
        if let Some(p) = tree.nodes[u].parent {
            let key = shared_attrs(&inst.atoms[u].attrs, &inst.atoms[p].attrs);
            let child_pos = positions(&inst.atoms[u].attrs, &key)?;
            parent_key[u] = positions(&inst.atoms[p].attrs, &key)?;
            parent[u] = Some(p);
            let rows = inst.atoms[u].relation.rows();
            for &r in &alive[u] {
                index[u]
                    .entry(pick(&rows[r], &child_pos))
                    .or_default()
                    .push(r);
            }
            m.scanned(alive[u].len());
        }
    }
    let mut out_src = Vec::with_capacity(out.len());
    for a in out {
        let src = order
            .iter()
            .find_map(|&u| {
                inst.atoms[u]
                    .attrs
                    .iter()
                    .position(|b| b == a)
                    .map(|c| (u, c))
            })
            .ok_or_else(|| DcqError::AttributeMissing(a.to_string()))?;
        out_src.push(src);
    }
    let e = Enumerator {
        inst,
        order,
        parent,
        parent_key,
        index,
        root_rows: alive[tree.root].clone(),
        out_src,
        m,
    };
    let _ = e.walk(0, W::one(), &mut vec![0; n], &mut f);
    Ok(())
}

/// Materializes a full acyclic instance over `out`.
pub fn join_full<W: Semiring>(
    inst: &Instance<W>,
    out: &[Attr],
    m: &Metrics,
) -> Result<Relation<W>> {
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for_each_full(inst, out, m, |t, w| {
        rows.push(t);
        weights.push(w);
        ControlFlow::Continue(())
    })?;
    Ok(Relation::from_distinct(out.to_vec(), rows, weights))
}

/// Evaluates a free-connex instance over its head.
pub fn eval_instance<W: Semiring>(inst: &Instance<W>, m: &Metrics) -> Result<Relation<W>> {
    if !is_free_connex(&inst.query()) {
        return Err(DcqError::NotFreeConnex);
    }
    let reduced = reduce_instance(inst, m)?;
    join_full(&reduced, &inst.head, m)
}

/// Streams the head results of a free-connex instance; `f` may stop early.
pub fn for_each_result<W, F>(inst: &Instance<W>, m: &Metrics, f: F) -> Result<()>
where
    W: Semiring,
    F: FnMut(Tuple, W) -> ControlFlow<()>,
{
    if !is_free_connex(&inst.query()) {
        return Err(DcqError::NotFreeConnex);
    }
    let reduced = reduce_instance(inst, m)?;
    for_each_full(&reduced, &inst.head, m, f)
}

/// Evaluates a free-connex query.
pub fn yannakakis<W: Semiring>(q: &Query, d: &Database<W>, m: &Metrics) -> Result<Relation<W>> {
    eval_instance(&Instance::bind(q, d)?, m)
}

/// Projection of `q`'s body onto `target` without materializing the full result.
pub fn yannakakis_project<W: Semiring>(
    q: &Query,
    target: &[Attr],
    d: &Database<W>,
    m: &Metrics,
) -> Result<Relation<W>> {
    eval_instance(&Instance::bind(q, d)?.with_head(target.to_vec()), m)
}
