//! Evaluation of differences of conjunctive queries.
//!
//! Queries are classified on their hypergraphs (acyclic, free-connex,
//! linear-reducible) and a difference `Q1 - Q2` is routed to a strategy that
//! matches its class: a linear-time strategy for difference-linear pairs,
//! heuristics otherwise, plus bag, aggregate and signed-query variants.

pub mod aggregate;
pub mod bag;
pub mod engine;
pub mod error;
pub mod generic;
pub mod hypergraph;
pub mod instance;
pub mod metrics;
pub mod oracle;
pub mod par;
pub mod reduce;
pub mod ring;
pub mod schema;
pub mod scq;
pub mod yannakakis;

pub use aggregate::{
    annotated_eval, drop_zero, numerical_difference_agg, relational_difference_agg,
};
pub use bag::{
    bag_dcq, bag_dcq_2path, partition, BagMatch, BagNode, BagTree, CountedTuple,
    PartitionedRelation, Ratio,
};
pub use engine::{
    dcq_baseline, dcq_same_schema, dmcq, dmcq_conditions, easy_dcq, evaluate_cq, execute,
    heuristic_bool, heuristic_cap, join_of_dcqs, plan, push_projection, push_selection,
    CostEstimate, DcqPlan, Selection, Strategy,
};
pub use error::{DcqError, Result};
pub use generic::evaluate_generic;
pub use hypergraph::{
    classify, is_acyclic, is_difference_linear, is_free_connex, is_linear_reducible,
    Classification, DifferenceVerdict, JoinTree, Witness,
};
pub use metrics::{Counters, Metrics};
pub use oracle::{oracle_cq, oracle_dcq, oracle_dcq_bag};
pub use reduce::{reduce, schema_reduce, ReducedQuery};
pub use ring::{Pair, Ring, Semiring};
pub use schema::{attrs, Atom, Attr, Database, Dcq, Query, Relation, Tuple, Value};
pub use scq::{
    dcq_to_scq, dcq_to_scq_instance, decide_dcq, scq_to_dcq, Decision, ScqRewrite, SignedAtom,
    SignedQuery,
};
pub use yannakakis::{yannakakis, yannakakis_project};
