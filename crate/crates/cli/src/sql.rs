//! SQL text for a difference.
//!
//! The optimized form keeps the first operand's join and, for each later
//! operand, one `NOT EXISTS` per edge of its reduced query, joined by `or`.
//! Edges covered by the head are checked on their own; an edge with
//! attributes outside the head nests its absorbed subtree as `EXISTS`. An
//! edge over the same table and columns as a first-operand atom always holds
//! and is left out. The baseline form is a `NOT IN` over the materialized
//! operand.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use dcq_core::reduce::ReducePlan;
use dcq_core::{is_linear_reducible, Atom, Attr, Dcq, Query, Strategy};

use crate::dsl::{Program, RelDecl};
use crate::error::SqlError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Cond {
    Eq(String, String),
    Or(Vec<Cond>),
    Exists {
        negated: bool,
        query: Box<Select>,
    },
    NotIn {
        row: Vec<String>,
        query: Box<Select>,
    },
    False,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Select {
    distinct: bool,
    /// `(expression, output name)`; empty means `*`.
    columns: Vec<(String, Option<String>)>,
    from: Vec<(String, String)>,
    filter: Vec<Cond>,
}

struct Emitter<'a> {
    program: &'a Program,
    next_alias: HashMap<char, usize>,
}

/// `attribute -> alias.column` for the atoms of one FROM list.
type Binding = HashMap<Attr, String>;
/// Table and alias per FROM entry.
type FromList = Vec<(String, String)>;
/// Query attribute to qualified column.
type ColumnRefs = Vec<(Attr, String)>;

impl<'a> Emitter<'a> {
    fn decl(&self, relation: &str) -> Result<&'a RelDecl, SqlError> {
        self.program
            .relation(relation)
            .ok_or_else(|| SqlError::UnknownRelation(relation.to_string()))
    }

    fn alias(&mut self, source: &str) -> String {
        let initial = source
            .chars()
            .next()
            .map_or('t', |c| c.to_ascii_lowercase());
        let n = self.next_alias.entry(initial).or_insert(0);
        *n += 1;
        format!("{initial}{n}")
    }

    /// Adds an atom to a FROM list; returns its alias and column references.
    fn bind_atom(&mut self, atom: &Atom) -> Result<(String, String, ColumnRefs), SqlError> {
        let decl = self.decl(&atom.relation)?;
        let alias = self.alias(decl.source());
        let refs = atom
            .attrs
            .iter()
            .zip(&decl.columns)
            .map(|(a, c)| (a.clone(), format!("{alias}.{c}")))
            .collect();
        Ok((decl.source().to_string(), alias, refs))
    }

    /// FROM list and join conditions of a whole query.
    fn join(&mut self, q: &Query) -> Result<(FromList, Binding, Vec<Cond>), SqlError> {
        let mut from = Vec::new();
        let mut binding = Binding::new();
        let mut conds = Vec::new();
        for atom in &q.body {
            let (source, alias, refs) = self.bind_atom(atom)?;
            from.push((source, alias));
            for (a, r) in refs {
                match binding.get(&a) {
                    Some(first) => conds.push(Cond::Eq(first.clone(), r)),
                    None => {
                        binding.insert(a, r);
                    }
                }
            }
        }
        Ok((from, binding, conds))
    }

    /// True when `atom` reads the same table and columns as an atom of `first`.
    fn implied(&self, atom: &Atom, first: &Query) -> Result<bool, SqlError> {
        let decl = self.decl(&atom.relation)?;
        let mine: BTreeSet<(&str, &Attr)> = decl
            .columns
            .iter()
            .map(String::as_str)
            .zip(&atom.attrs)
            .collect();
        for other in &first.body {
            let od = self.decl(&other.relation)?;
            let theirs: BTreeSet<(&str, &Attr)> = od
                .columns
                .iter()
                .map(String::as_str)
                .zip(&other.attrs)
                .collect();
            if od.source() == decl.source() && theirs == mine {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `SELECT * FROM atom WHERE <children exist> and <shared attributes match outer>`.
    fn nested(
        &mut self,
        q2: &Query,
        children: &[Vec<usize>],
        u: usize,
        outer: &Binding,
    ) -> Result<Select, SqlError> {
        let atom = &q2.body[u];
        let (source, alias, refs) = self.bind_atom(atom)?;
        let own: Binding = refs.iter().cloned().collect();
        let mut filter = Vec::new();
        for &c in &children[u] {
            let inner = self.nested(q2, children, c, &own)?;
            filter.push(Cond::Exists {
                negated: false,
                query: Box::new(inner),
            });
        }
        for (a, r) in &refs {
            if let Some(o) = outer.get(a) {
                filter.push(Cond::Eq(r.clone(), o.clone()));
            }
        }
        Ok(Select {
            distinct: false,
            columns: Vec::new(),
            from: vec![(source, alias)],
            filter,
        })
    }

    fn disjuncts_of(
        &mut self,
        q1: &Query,
        q2: &Query,
        children: &[Vec<usize>],
        u: usize,
        bound: &Binding,
        out: &mut Vec<Cond>,
    ) -> Result<(), SqlError> {
        let head = q2.head_set();
        let atom = &q2.body[u];
        if atom.attrs.iter().all(|a| head.contains(a)) {
            if !self.implied(atom, q1)? {
                let alone = self.nested(q2, &vec![Vec::new(); q2.body.len()], u, bound)?;
                out.push(Cond::Exists {
                    negated: true,
                    query: Box::new(alone),
                });
            }
            for &c in &children[u] {
                self.disjuncts_of(q1, q2, children, c, bound, out)?;
            }
        } else {
            let nested = self.nested(q2, children, u, bound)?;
            out.push(Cond::Exists {
                negated: true,
                query: Box::new(nested),
            });
        }
        Ok(())
    }

    /// The condition under which a first-operand row is not in `q2`.
    fn not_in_operand(
        &mut self,
        q1: &Query,
        q2: &Query,
        bound: &Binding,
    ) -> Result<Cond, SqlError> {
        let mut disjuncts = Vec::new();
        if q2.is_full() {
            let none = vec![Vec::new(); q2.body.len()];
            for u in 0..q2.body.len() {
                self.disjuncts_of(q1, q2, &none, u, bound, &mut disjuncts)?;
            }
        } else if is_linear_reducible(q2) {
            let plan = ReducePlan::new(q2)?;
            let tree = plan.tree.expect("non-full query has a tree");
            let head_node = q2.body.len();
            let children: Vec<Vec<usize>> = tree.nodes.iter().map(|n| n.children.clone()).collect();
            for &c in &tree.nodes[head_node].children {
                self.disjuncts_of(q1, q2, &children, c, bound, &mut disjuncts)?;
            }
        } else {
            let (from, binding, mut filter) = self.join(q2)?;
            for a in &q2.head {
                filter.push(Cond::Eq(binding[a].clone(), bound[a].clone()));
            }
            let residual = Select {
                distinct: false,
                columns: Vec::new(),
                from,
                filter,
            };
            disjuncts.push(Cond::Exists {
                negated: true,
                query: Box::new(residual),
            });
        }
        Ok(match disjuncts.len() {
            0 => Cond::False,
            1 => disjuncts.pop().expect("one disjunct"),
            _ => Cond::Or(disjuncts),
        })
    }

    fn emit(&mut self, dcq: &Dcq, strategy: Strategy) -> Result<Select, SqlError> {
        let q1 = &dcq.operands[0];
        let (from, bound, mut filter) = self.join(q1)?;
        let head = q1.head.clone();
        for q in &dcq.operands[1..] {
            match strategy {
                Strategy::Baseline => {
                    let (inner_from, inner, inner_filter) = self.join(q)?;
                    let columns = head.iter().map(|a| (inner[a].clone(), None)).collect();
                    let sub = Select {
                        distinct: true,
                        columns,
                        from: inner_from,
                        filter: inner_filter,
                    };
                    let row = head.iter().map(|a| bound[a].clone()).collect();
                    filter.push(Cond::NotIn {
                        row,
                        query: Box::new(sub),
                    });
                }
                _ => filter.push(self.not_in_operand(q1, q, &bound)?),
            }
        }
        let columns = head
            .iter()
            .map(|a| (bound[a].clone(), Some(a.to_string())))
            .collect();
        Ok(Select {
            distinct: false,
            columns,
            from,
            filter,
        })
    }
}

/// SQL for `dcq` in the shape of `strategy`: the optimized `NOT EXISTS` form
/// for the easy, multi-operand and Boolean-heuristic strategies, `NOT IN`
/// for the baseline.
pub fn emit_sql(program: &Program, dcq: &Dcq, strategy: Strategy) -> Result<String, SqlError> {
    match strategy {
        Strategy::Easy | Strategy::Dmcq | Strategy::HeuristicBool | Strategy::Baseline => {}
        other => return Err(SqlError::UnsupportedPlanForSql(other.to_string())),
    }
    dcq.validate()?;
    let select = Emitter {
        program,
        next_alias: HashMap::new(),
    }
    .emit(dcq, strategy)?;
    let mut out = String::new();
    write_select(&mut out, &select, 0);
    out.push_str(";\n");
    Ok(out)
}

fn indent(depth: usize) -> String {
    "    ".repeat(depth)
}

fn write_select(out: &mut String, s: &Select, depth: usize) {
    let columns = if s.columns.is_empty() {
        "*".to_string()
    } else {
        s.columns
            .iter()
            .map(|(e, name)| match name {
                Some(n) => format!("{e} AS {n}"),
                None => e.clone(),
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let distinct = if s.distinct { "DISTINCT " } else { "" };
    let from: Vec<String> = s.from.iter().map(|(t, a)| format!("{t} {a}")).collect();
    let _ = write!(
        out,
        "SELECT {distinct}{columns}\n{}FROM {}",
        indent(depth),
        from.join(", ")
    );
    if !s.filter.is_empty() {
        let _ = write!(out, "\n{}WHERE ", indent(depth));
        write_conjunction(out, &s.filter, depth);
    }
}

fn write_conjunction(out: &mut String, conds: &[Cond], depth: usize) {
    for (i, c) in conds.iter().enumerate() {
        if i > 0 {
            let _ = write!(out, "\n{}AND ", indent(depth));
        }
        write_cond(out, c, depth, conds.len() > 1);
    }
}

fn write_cond(out: &mut String, c: &Cond, depth: usize, parenthesize_or: bool) {
    match c {
        Cond::Eq(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        Cond::False => out.push_str("FALSE"),
        Cond::Or(items) => {
            if parenthesize_or {
                out.push('(');
            }
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    let _ = write!(out, "\n{}OR ", indent(depth));
                }
                write_cond(out, item, depth, true);
            }
            if parenthesize_or {
                out.push(')');
            }
        }
        Cond::Exists { negated, query } => {
            let _ = write!(
                out,
                "{}EXISTS (\n{}",
                if *negated { "NOT " } else { "" },
                indent(depth + 1)
            );
            write_select(out, query, depth + 1);
            out.push(')');
        }
        Cond::NotIn { row, query } => {
            let _ = write!(out, "({}) NOT IN (\n{}", row.join(", "), indent(depth + 1));
            write_select(out, query, depth + 1);
            out.push(')');
        }
    }
}
