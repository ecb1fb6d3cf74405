//! Conversions between differences and signed conjunctive queries (joins
//! with negated atoms), and a linear-time emptiness test for differences of
//! full queries.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use crate::engine::{dcq_baseline, materialize};
use crate::error::{DcqError, Result};
use crate::hypergraph::{is_acyclic, is_linear_reducible, sets_acyclic};
use crate::instance::{key_set, Instance};
use crate::metrics::Metrics;
use crate::reduce::{reduce_instance, ReducePlan};
use crate::schema::{pick, positions, Atom, Attr, Database, Dcq, Query, Relation, Tuple, Value};
use crate::yannakakis::for_each_result;

/// An atom that is either joined or negated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedAtom {
    pub atom: Atom,
    pub negated: bool,
}

/// A join of atoms some of which are negated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedQuery {
    pub head: Vec<Attr>,
    pub atoms: Vec<SignedAtom>,
}

impl SignedQuery {
    pub fn positive(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| !a.negated).map(|a| &a.atom)
    }

    pub fn negated(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.negated).map(|a| &a.atom)
    }

    pub fn universe(&self) -> BTreeSet<Attr> {
        self.atoms
            .iter()
            .flat_map(|a| a.atom.attrs.iter().cloned())
            .collect()
    }
}

impl fmt::Display for SignedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| {
                if a.negated {
                    format!("¬{}", a.atom.relation)
                } else {
                    a.atom.relation.clone()
                }
            })
            .collect();
        f.write_str(&parts.join("⋈"))
    }
}

/// Display helper for a union of signed queries.
pub struct Union<'a>(pub &'a [SignedQuery]);

impl fmt::Display for Union<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| format!("({q})")).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}

/// `Q1 - Q2` as the union over the reduced atoms `e` of `Q2` of `Q1 ⋈ ¬e`.
pub fn dcq_to_scq(dcq: &Dcq) -> Result<Vec<SignedQuery>> {
    let [q1, q2] = &dcq.operands[..] else {
        return Err(DcqError::TooFewOperands);
    };
    if !is_linear_reducible(q2) {
        return Err(DcqError::NotLinearReducible);
    }
    let reduced = ReducePlan::new(q2)?.reduced_query(q2);
    Ok(reduced
        .body
        .iter()
        .map(|negated| SignedQuery {
            head: q1.head.clone(),
            atoms: q1
                .body
                .iter()
                .map(|a| SignedAtom {
                    atom: a.clone(),
                    negated: false,
                })
                .chain(std::iter::once(SignedAtom {
                    atom: negated.clone(),
                    negated: true,
                }))
                .collect(),
        })
        .collect())
}

/// [`dcq_to_scq`] together with one database holding the relations of `Q1`
/// and the reduced relations of `Q2`.
pub fn dcq_to_scq_instance(
    dcq: &Dcq,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<(Vec<SignedQuery>, Database)> {
    let scqs = dcq_to_scq(dcq)?;
    let mut out = Instance::bind(&dcq.operands[0], d1)?.database();
    let second = Instance::bind(&dcq.operands[1], d2)?;
    let reduced = if second.is_full() {
        second
    } else {
        reduce_instance(&second, m)?
    };
    for atom in &reduced.atoms {
        if out.get(&atom.name).is_some() {
            return Err(DcqError::SelfJoin(atom.name.clone()));
        }
        out.insert_shared(&atom.name, atom.relation.clone());
    }
    Ok((scqs, out))
}

const DOMAIN_PREFIX: &str = "dom_";

/// A signed query as `(Q+ - Q+ ⋈ e1) ∩ (Q+ - Q+ ⋈ e2) ∩ ...`, where `Q+` joins
/// the positive atoms with the domains of attributes that only occur negated.
#[derive(Clone, Debug)]
pub struct ScqRewrite {
    pub head: Vec<Attr>,
    /// Full query over every attribute.
    pub positive: Query,
    pub differences: Vec<(Query, Query)>,
    /// Unary domain relations referenced by `positive`.
    pub domains: Database,
}

impl ScqRewrite {
    /// The differences as two-operand queries over all attributes.
    pub fn dcqs(&self) -> Vec<Dcq> {
        self.differences
            .iter()
            .map(|(a, b)| Dcq::pair(a.clone(), b.clone()))
            .collect()
    }

    /// Materializes `Q+` once, drops bindings found in any negated atom and
    /// projects onto the head.
    pub fn evaluate(&self, d: &Database, m: &Metrics) -> Result<Relation> {
        let mut all = d.clone();
        for (name, rel) in self.domains.iter() {
            all.insert_shared(name, rel.clone());
        }
        let base = materialize(&Instance::bind(&self.positive, &all)?, m)?;
        let schema = base.schema().to_vec();
        let mut checks: Vec<(Vec<usize>, HashSet<Tuple>)> = Vec::new();
        for (_, minus) in &self.differences {
            let atom = minus.body.last().expect("negated atom");
            let rel = d
                .get(&atom.relation)
                .ok_or_else(|| DcqError::UnresolvedRelation(atom.relation.clone()))?;
            let own: Vec<usize> = (0..atom.attrs.len()).collect();
            checks.push((
                positions(&schema, &atom.attrs)?,
                key_set(rel.rows().iter(), &own),
            ));
        }
        m.probes(base.len() * checks.len());
        let out = positions(&schema, &self.head)?;
        let mut seen = HashSet::new();
        let rows: Vec<Tuple> = base
            .rows()
            .iter()
            .filter(|t| checks.iter().all(|(pos, set)| !set.contains(&pick(t, pos))))
            .map(|t| pick(t, &out))
            .filter(|t| seen.insert(t.clone()))
            .collect();
        Ok(Relation::from_rows(self.head.clone(), rows))
    }
}

impl fmt::Display for ScqRewrite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |q: &Query| {
            q.body
                .iter()
                .map(|a| a.relation.as_str())
                .collect::<Vec<_>>()
                .join("⋈")
        };
        if self.differences.is_empty() {
            return f.write_str(&join(&self.positive));
        }
        let parts: Vec<String> = self
            .differences
            .iter()
            .map(|(a, b)| format!("({} − {})", join(a), join(b)))
            .collect();
        f.write_str(&parts.join(" ∩ "))
    }
}

/// Rewrites a signed query into an intersection of differences.
///
/// Attributes that occur only in negated atoms range over `domains`.
pub fn scq_to_dcq(scq: &SignedQuery, domains: &BTreeMap<Attr, Vec<Value>>) -> Result<ScqRewrite> {
    let positive_attrs: BTreeSet<Attr> = scq
        .positive()
        .flat_map(|a| a.attrs.iter().cloned())
        .collect();
    let mut body: Vec<Atom> = scq.positive().cloned().collect();
    let mut domain_db = Database::new();
    for x in scq.universe() {
        if positive_attrs.contains(&x) {
            continue;
        }
        let values = domains
            .get(&x)
            .ok_or_else(|| DcqError::MissingDomain(x.to_string()))?;
        let name = format!("{DOMAIN_PREFIX}{x}");
        domain_db.insert(
            &name,
            Relation::from_rows(vec![x.clone()], values.iter().map(|v| vec![v.clone()])),
        );
        body.push(Atom {
            relation: name,
            attrs: vec![x.clone()],
        });
    }
    let universe: Vec<Attr> =
        body.iter()
            .flat_map(|a| a.attrs.iter().cloned())
            .fold(Vec::new(), |mut acc, a| {
                if !acc.contains(&a) {
                    acc.push(a);
                }
                acc
            });
    let positive = Query {
        head: universe,
        body,
    };
    let differences = scq
        .negated()
        .map(|atom| {
            let mut minus = positive.clone();
            minus.body.push(atom.clone());
            (positive.clone(), minus)
        })
        .collect();
    Ok(ScqRewrite {
        head: scq.head.clone(),
        positive,
        differences,
        domains: domain_db,
    })
}

/// Outcome of [`decide_dcq`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub nonempty: bool,
    /// Tuples inspected per atom of the second query.
    pub inspected: Vec<usize>,
    /// `|R_e| + 1` per atom of the second query.
    pub bounds: Vec<usize>,
    pub warning: Option<String>,
}

/// Decides whether `Q1(d1) - Q2(d2)` is nonempty for full queries.
///
/// For each atom `e` of `Q2` the projection of `Q1` onto `e` is streamed until
/// a tuple outside `R_e` shows up; at most `|R_e| + 1` tuples are inspected.
pub fn decide_dcq(
    q1: &Query,
    q2: &Query,
    d1: &Database,
    d2: &Database,
    m: &Metrics,
) -> Result<Decision> {
    if !q1.is_full() || !q2.is_full() {
        return Err(DcqError::ConditionsNotMet(
            "both queries must be full".into(),
        ));
    }
    if q1.head_set() != q2.head_set() {
        return Err(DcqError::HeadMismatch(format!("{q1} vs {q2}")));
    }
    let first_edges: Vec<BTreeSet<Attr>> = q1.body.iter().map(|a| a.attr_set()).collect();
    let applicable = is_acyclic(q1)
        && q2.body.iter().all(|e| {
            let mut edges = first_edges.clone();
            edges.push(e.attr_set());
            sets_acyclic(&edges)
        });
    if !applicable {
        let nonempty = !dcq_baseline(q1, q2, d1, d2, m)?.is_empty();
        return Ok(Decision {
            nonempty,
            inspected: Vec::new(),
            bounds: Vec::new(),
            warning: Some(
                "acyclicity conditions fail; decided by materializing both queries".into(),
            ),
        });
    }
    let first = Instance::bind(q1, d1)?;
    let second = Instance::bind(q2, d2)?;
    let mut decision = Decision {
        nonempty: false,
        inspected: Vec::new(),
        bounds: Vec::new(),
        warning: None,
    };
    for e in &second.atoms {
        let members = key_set(
            e.relation.rows().iter(),
            &(0..e.attrs.len()).collect::<Vec<_>>(),
        );
        let mut inspected = 0usize;
        let mut outside = false;
        for_each_result(&first.with_head(e.attrs.clone()), m, |t, ()| {
            inspected += 1;
            m.inspected(1);
            if members.contains(&t) {
                ControlFlow::Continue(())
            } else {
                outside = true;
                ControlFlow::Break(())
            }
        })?;
        decision.inspected.push(inspected);
        decision.bounds.push(e.relation.len() + 1);
        if outside {
            decision.nonempty = true;
            break;
        }
    }
    Ok(decision)
}
