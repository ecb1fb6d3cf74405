//! CSV loading and writing.
//!
//! The first line is the header. Two reserved columns may follow the
//! attributes: `#count` (positive multiplicity) and `#weight` (ring
//! annotation; pairs are written `a|b`). Values are integers when they parse
//! as such and strings otherwise.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use dcq_core::{Attr, Database, Pair, Relation, Semiring, Tuple, Value};

use crate::dsl::Program;
use crate::error::CsvError;

pub const COUNT_COLUMN: &str = "#count";
pub const WEIGHT_COLUMN: &str = "#weight";

/// How rows become tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadMode {
    /// Duplicates collapse; reserved columns are ignored.
    Set,
    /// Duplicates add up; `#count` gives the multiplicity of a row.
    Bag,
    /// Duplicates add up in the ring; `#weight` gives the annotation of a row.
    Annotated,
}

/// A ring value that can be read from and written to a CSV cell.
pub trait CsvWeight: Semiring {
    fn parse_cell(cell: &str) -> Result<Self, String>;
    fn format_cell(&self) -> String;
}

impl CsvWeight for u64 {
    fn parse_cell(cell: &str) -> Result<Self, String> {
        cell.trim()
            .parse()
            .map_err(|e| format!("bad count `{cell}`: {e}"))
    }
    fn format_cell(&self) -> String {
        self.to_string()
    }
}

impl CsvWeight for i64 {
    fn parse_cell(cell: &str) -> Result<Self, String> {
        cell.trim()
            .parse()
            .map_err(|e| format!("bad weight `{cell}`: {e}"))
    }
    fn format_cell(&self) -> String {
        self.to_string()
    }
}

impl CsvWeight for Pair {
    fn parse_cell(cell: &str) -> Result<Self, String> {
        let (a, b) = cell
            .split_once('|')
            .ok_or_else(|| format!("bad pair `{cell}`, expected a|b"))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad pair `{cell}`: {e}"))
        };
        Ok(Pair(parse(a)?, parse(b)?))
    }
    fn format_cell(&self) -> String {
        format!("{}|{}", self.0, self.1)
    }
}

struct Table {
    rows: Vec<(u64, Tuple, Option<String>, Option<String>)>,
}

fn read_table(path: &Path, columns: &[String]) -> Result<Table, CsvError> {
    let csv_err = |source| CsvError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let reserved = |h: &str| h == COUNT_COLUMN || h == WEIGHT_COLUMN;
    let attrs: Vec<&String> = header.iter().filter(|h| !reserved(h)).collect();
    if attrs.len() != columns.len() || attrs.iter().zip(columns).any(|(a, b)| *a != b) {
        return Err(CsvError::HeaderMismatch {
            path: path.to_path_buf(),
            expected: columns.to_vec(),
            found: header.clone(),
        });
    }
    let count_at = header.iter().position(|h| h == COUNT_COLUMN);
    let weight_at = header.iter().position(|h| h == WEIGHT_COLUMN);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let tuple: Tuple = header
            .iter()
            .zip(record.iter())
            .filter(|(h, _)| !reserved(h))
            .map(|(_, cell)| Value::parse(cell))
            .collect();
        rows.push((
            line,
            tuple,
            count_at.map(|i| record[i].to_string()),
            weight_at.map(|i| record[i].to_string()),
        ));
    }
    Ok(Table { rows })
}

fn schema(columns: &[String]) -> Vec<Attr> {
    columns.iter().map(|c| Attr::new(c)).collect()
}

/// Loads a relation under set semantics.
pub fn load_set(path: &Path, columns: &[String]) -> Result<Relation, CsvError> {
    let table = read_table(path, columns)?;
    Ok(Relation::from_rows(
        schema(columns),
        table.rows.into_iter().map(|(_, t, _, _)| t),
    ))
}

/// Loads a relation with multiplicities; repeated rows add up.
pub fn load_bag(path: &Path, columns: &[String]) -> Result<Relation<u64>, CsvError> {
    let table = read_table(path, columns)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, t, count, _) in table.rows {
        let count = match count {
            None => 1,
            Some(cell) => {
                let parsed: i64 = cell.trim().parse().map_err(|e| CsvError::BadValue {
                    path: path.to_path_buf(),
                    line,
                    message: format!("bad count `{cell}`: {e}"),
                })?;
                if parsed <= 0 {
                    return Err(CsvError::NonPositiveCount {
                        path: path.to_path_buf(),
                        line,
                    });
                }
                parsed as u64
            }
        };
        rows.push((t, count));
    }
    Ok(Relation::from_weighted(schema(columns), rows))
}

/// Loads an annotated relation; rows without `#weight` carry the ring's one.
pub fn load_annotated<W: CsvWeight>(
    path: &Path,
    columns: &[String],
) -> Result<Relation<W>, CsvError> {
    let table = read_table(path, columns)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, t, _, weight) in table.rows {
        let w = match weight {
            None => W::one(),
            Some(cell) => W::parse_cell(&cell).map_err(|message| CsvError::BadValue {
                path: path.to_path_buf(),
                line,
                message,
            })?,
        };
        rows.push((t, w));
    }
    Ok(Relation::from_weighted(schema(columns), rows))
}

fn write_rows(
    path: &Path,
    header: Vec<String>,
    rows: impl Iterator<Item = (Tuple, Option<String>)>,
) -> Result<(), CsvError> {
    let io = |source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut writer = csv::Writer::from_path(path).map_err(|source| CsvError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| CsvError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(&header).map_err(csv_err)?;
    for (t, extra) in rows {
        let mut record: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        record.extend(extra);
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(io)?;
    Ok(())
}

/// Writes a set relation, one row per tuple.
pub fn write_set(path: &Path, relation: &Relation) -> Result<(), CsvError> {
    let header = relation.schema().iter().map(|a| a.to_string()).collect();
    write_rows(
        path,
        header,
        relation.rows().iter().map(|t| (t.clone(), None)),
    )
}

/// Writes a relation with a reserved weight column.
pub fn write_weighted<W: CsvWeight>(
    path: &Path,
    relation: &Relation<W>,
    column: &str,
) -> Result<(), CsvError> {
    let mut header: Vec<String> = relation.schema().iter().map(|a| a.to_string()).collect();
    header.push(column.to_string());
    write_rows(
        path,
        header,
        relation
            .iter()
            .map(|(t, w)| (t.clone(), Some(w.format_cell()))),
    )
}

/// Renders a set relation as CSV text.
pub fn to_csv_string(relation: &Relation) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = relation.schema().iter().map(|a| a.to_string()).collect();
    writer.write_record(&header).expect("in-memory write");
    for t in relation.rows() {
        writer
            .write_record(t.iter().map(|v| v.to_string()))
            .expect("in-memory write");
    }
    writer.flush().expect("in-memory write");
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf-8")
}

/// Loads the tables behind every declared relation from `dir/<source>.csv`.
/// Relations sharing a source share one copy of the data.
pub fn load_database<W: Semiring>(
    program: &Program,
    dir: &Path,
    load: impl Fn(&Path, &[String]) -> Result<Relation<W>, CsvError>,
) -> Result<Database<W>, CsvError> {
    let mut by_source: HashMap<&str, Arc<Relation<W>>> = HashMap::new();
    let mut db = Database::new();
    for decl in &program.relations {
        let shared = match by_source.get(decl.source()) {
            Some(r) => r.clone(),
            None => {
                let path = dir.join(format!("{}.csv", decl.source()));
                let r = Arc::new(load(&path, &decl.columns)?);
                by_source.insert(decl.source(), r.clone());
                r
            }
        };
        db.insert_shared(&decl.name, shared);
    }
    Ok(db)
}
