use dcq_cli::corpus::builtin_corpus;
use dcq_cli::dsl::{parse_program, parse_program_unchecked, DcqDecl, Program, QueryDecl, RelDecl};
use dcq_cli::error::DslError;
use dcq_core::{Atom, Attr, Query};
use proptest::prelude::*;

const TWO_PATH: &str = "\
# a comment line
rel R1(a, b)
rel R2(b, c)   # trailing comment
rel R3(a, b) from shared
query Q1(x1, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1,x3):-R3(x1,x3)
dcq D := Q1 - Q2
";

#[test]
fn parses_declarations() {
    let p = parse_program(TWO_PATH).unwrap();
    assert_eq!(p.relations.len(), 3);
    assert_eq!(p.relation("R3").unwrap().source(), "shared");
    assert_eq!(p.relation("R1").unwrap().source(), "R1");
    let q1 = p.query("Q1").unwrap();
    assert_eq!(q1.to_string(), "(x1,x3) :- R1(x1,x2), R2(x2,x3)");
    let d = p.dcq("D").unwrap();
    assert_eq!(d.operands.len(), 2);
    assert_eq!(d.operands[1].body, vec![Atom::new("R3", &["x1", "x3"])]);
}

#[test]
fn multi_operand_difference() {
    let text = "rel A(x)\nrel B(x)\nrel C(x)\nquery P(x) :- A(x)\nquery S(x) :- B(x)\nquery T(x) :- C(x)\ndcq D := P - S - T\n";
    let p = parse_program(text).unwrap();
    assert_eq!(p.dcq_decl("D").unwrap().operands, vec!["P", "S", "T"]);
}

#[test]
fn round_trips_corpus() {
    for entry in builtin_corpus() {
        let p = entry.program();
        let again = parse_program(&p.to_string()).unwrap();
        assert_eq!(again, p, "{}", entry.name);
    }
}

fn position(e: &DslError) -> Option<(usize, usize)> {
    match e {
        DslError::Syntax { line, col, .. }
        | DslError::UnknownRelation { line, col, .. }
        | DslError::UnknownQuery { line, col, .. }
        | DslError::Duplicate { line, col, .. }
        | DslError::Arity { line, col, .. } => Some((*line, *col)),
        _ => None,
    }
}

#[test]
fn errors_carry_positions() {
    let cases: &[(&str, (usize, usize))] = &[
        ("rel R(a, b)\nquery Q(x) :- S(x)\n", (2, 15)),
        ("rel R(a, b)\nquery Q(x) :- R(x)\n", (2, 15)),
        ("rel R(a)\nrel R(b)\n", (2, 5)),
        ("rel R(a)\nquery Q(x) :- R(x)\ndcq D := Q - P\n", (3, 14)),
        ("rel R(a\n", (1, 8)),
        ("rel R(a)\nquery Q(x) : R(x)\n", (2, 12)),
        ("rel 1R(a)\n", (1, 5)),
    ];
    for (text, expected) in cases {
        let err = parse_program(text).unwrap_err();
        assert_eq!(position(&err), Some(*expected), "{text:?}: {err}");
        assert!(
            err.to_string()
                .starts_with(&format!("{}:{}:", expected.0, expected.1)),
            "{err}"
        );
    }
}

#[test]
fn error_kinds() {
    assert!(matches!(
        parse_program("rel R(a, b)\nquery Q(x) :- R(x)\n"),
        Err(DslError::Arity {
            expected: 2,
            found: 1,
            ..
        })
    ));
    assert!(matches!(
        parse_program("rel R(a)\nrel R(b)\n"),
        Err(DslError::Duplicate { .. })
    ));
    assert!(matches!(
        parse_program(
            "rel R(a)\nrel S(a)\nquery P(x) :- R(x)\nquery Q(y) :- S(y)\ndcq D := P - Q\n"
        ),
        Err(DslError::HeadMismatch { .. })
    ));
    assert!(matches!(
        parse_program("rel R(a)\nquery P(y) :- R(x)\n"),
        Err(DslError::Invalid { .. })
    ));
    assert!(matches!(
        parse_program("rel R(a)\nquery P(x) :- R(x)\ndcq D := P\n"),
        Err(DslError::Syntax { .. })
    ));
}

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,5}".prop_filter("keyword", |s| {
        !matches!(s.as_str(), "rel" | "query" | "dcq" | "from")
    })
}

prop_compose! {
    fn program()(
        arities in prop::collection::vec(1usize..4, 1..4),
        sources in prop::collection::vec(prop::option::of(ident()), 3),
        atoms in prop::collection::vec(prop::collection::vec((0usize..3, prop::collection::vec(0usize..5, 3)), 1..4), 1..4),
        heads in prop::collection::vec(prop::collection::vec(0usize..5, 0..3), 4),
        columns in prop::collection::vec(ident(), 3),
    ) -> Program {
        let relations: Vec<RelDecl> = arities
            .iter()
            .enumerate()
            .map(|(i, &k)| RelDecl {
                name: format!("R{i}"),
                columns: columns.iter().take(k).cloned().collect(),
                source: sources[i].clone(),
            })
            .collect();
        let queries: Vec<QueryDecl> = atoms
            .iter()
            .enumerate()
            .map(|(qi, body)| {
                let body: Vec<Atom> = body
                    .iter()
                    .map(|(r, xs)| {
                        let r = r % relations.len();
                        Atom {
                            relation: relations[r].name.clone(),
                            attrs: xs.iter().take(relations[r].columns.len()).map(|x| Attr::new(&format!("x{x}"))).collect(),
                        }
                    })
                    .collect();
                let head = heads[qi].iter().map(|x| Attr::new(&format!("x{x}"))).collect();
                QueryDecl { name: format!("Q{qi}"), query: Query { head, body } }
            })
            .collect();
        let dcqs = if queries.len() > 1 {
            vec![DcqDecl { name: "D".into(), operands: queries.iter().map(|q| q.name.clone()).collect() }]
        } else {
            Vec::new()
        };
        Program { relations, queries, dcqs }
    }
}

proptest! {
    #[test]
    fn pretty_print_round_trips(p in program()) {
        prop_assert_eq!(parse_program_unchecked(&p.to_string()).unwrap(), p);
    }
}
