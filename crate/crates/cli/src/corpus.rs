//! Built-in programs: the graph workloads QG1 to QG6 and the classification
//! fixtures. Each entry declares one difference named `D`.

use dcq_core::Dcq;

use crate::dsl::{parse_program, Program};

pub struct CorpusEntry {
    pub name: &'static str,
    pub text: &'static str,
}

impl CorpusEntry {
    pub fn program(&self) -> Program {
        parse_program(self.text).unwrap_or_else(|e| panic!("corpus entry {}: {e}", self.name))
    }

    pub fn dcq(&self) -> Dcq {
        self.program().dcq("D").expect("corpus entries declare D")
    }
}

pub fn builtin_corpus() -> &'static [CorpusEntry] {
    CORPUS
}

pub fn corpus_entry(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

static CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "qg1",
        text: "\
# edges that start no path of length 3
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel G3(src, dst) from graph
rel G4(src, dst) from graph
query Q1(node1, node2) :- G1(node1, node2)
query Q2(node1, node2) :- G2(node1, node2), G3(node2, node3), G4(node3, node4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "qg2",
        text: "\
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel T1(node1, node2, node3) from Triple1
rel T2(node1, node2, node3) from Triple2
query Q1(node1, node2, node3, node4) :- G1(node1, node2), T1(node2, node3, node4)
query Q2(node1, node2, node3, node4) :- T2(node1, node2, node3), G2(node3, node4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "qg3",
        text: "\
# candidate triples that are not triangles
rel T(node1, node2, node3) from Triple
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel G3(src, dst) from graph
query Q1(node1, node2, node3) :- T(node1, node2, node3)
query Q2(node1, node2, node3) :- G1(node1, node2), G2(node2, node3), G3(node3, node1)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "qg4",
        text: "\
rel T(node1, node2, node3) from Triple
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel G3(src, dst) from graph
query Q1(node1, node2, node3) :- T(node1, node2, node3)
query Q2(node1, node2, node3) :- G1(node1, node2), G2(node2, node3), G3(node3, node4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "qg5",
        text: "\
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel G3(src, dst) from graph
rel G4(src, dst) from graph
rel G5(src, dst) from graph
rel G6(src, dst) from graph
query Q1(node1, node2, node3, node4) :- G1(node1, node2), G2(node2, node3), G3(node3, node4)
query Q2(node1, node2, node3, node4) :- G4(node2, node3), G5(node3, node4), G6(node4, node1)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "qg6",
        text: "\
rel G1(src, dst) from graph
rel G2(src, dst) from graph
rel G3(src, dst) from graph
rel G4(src, dst) from graph
rel G5(src, dst) from graph
rel G6(src, dst) from graph
query Q1(node1, node2, node3, node4) :- G1(node1, node2), G2(node3, node4)
query Q2(node1, node2, node3, node4) :- G3(node1, node2), G4(node2, node3), G5(node1, node3), G6(node3, node4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex3_1",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x2), R4(x2, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex3_4",
        text: "\
rel R1(a, b)
rel R2(a, b, c)
rel R3(a, b, c)
rel R4(a, b)
query Q1(x1, x2, x3, x4) :- R1(x1, x2), R2(x2, x3, x4)
query Q2(x1, x2, x3, x4) :- R3(x1, x2, x3), R4(x3, x4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex3_7",
        text: "\
rel R1(a, b, c)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x2, x3) :- R1(x1, x2, x3)
query Q2(x1, x2, x3) :- R2(x1, x2), R3(x2, x3), R4(x1, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex3_8",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
rel R5(a, b)
rel R6(a, b)
query Q1(x1, x2, x3, x4) :- R1(x1, x2), R2(x3, x4)
query Q2(x1, x2, x3, x4) :- R3(x1, x2), R4(x2, x3), R5(x1, x3), R6(x3, x4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex3_9",
        text: "\
rel A(a, b)
rel B(a, b)
rel C(a, b)
rel D3(a, b, c)
rel E3(a, b, c)
rel F3(a, b, c)
query Q1(x1, x2, x3, x4) :- A(x1, x2), B(x1, x3), C(x1, x4)
query Q2(x1, x2, x3, x4) :- D3(x1, x2, x3), E3(x1, x2, x4), F3(x1, x3, x4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex4_8",
        text: "\
rel R1(a, b)
rel R2(a, b, c)
rel R3(a, b)
rel R4(a, b)
rel R5(a, b)
rel R6(a, b)
query Q1(x1, x2, x3) :- R1(x1, x4), R2(x4, x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x2), R4(x2, x3), R5(x1, x3), R6(x3, x4)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex4_10",
        text: "\
rel R1(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x3) :- R1(x1, x3)
query Q2(x1, x3) :- R3(x1, x2), R4(x2, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "ex4_11",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x3) :- R3(x1, x2), R4(x2, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_2",
        text: "\
rel R1(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x3) :- R1(x1, x3)
query Q2(x1, x3) :- R3(x1, x2), R4(x2, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_3",
        text: "\
rel R1(a)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1) :- R1(x1)
query Q2(x1) :- R2(x1, x2), R3(x2, x3), R4(x1, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_5a",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x3), R4(x2)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_5b",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x3), R4(x2, x3)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_5c",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R5(a, b)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x3), R5(x1, x2)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "lemma4_5d",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
rel R5(a, b)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x3), R4(x2, x3), R5(x1, x2)
dcq D := Q1 - Q2
",
    },
    CorpusEntry {
        name: "chain3",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
rel R5(a, b, c)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x2), R4(x2, x3)
query Q3(x1, x2, x3) :- R5(x1, x2, x3)
dcq D := Q1 - Q2 - Q3
",
    },
    CorpusEntry {
        name: "chain4",
        text: "\
rel R1(a, b)
rel R2(a, b)
rel R3(a, b)
rel R4(a, b)
rel R5(a, b, c)
rel R6(a, b)
rel R7(a)
query Q1(x1, x2, x3) :- R1(x1, x2), R2(x2, x3)
query Q2(x1, x2, x3) :- R3(x1, x2), R4(x2, x3)
query Q3(x1, x2, x3) :- R5(x1, x2, x3)
query Q4(x1, x2, x3) :- R6(x2, x3), R7(x1)
dcq D := Q1 - Q2 - Q3 - Q4
",
    },
];
