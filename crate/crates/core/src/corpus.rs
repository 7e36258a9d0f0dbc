//! Directory-based corpus of relational databases.
//!
//! Layout: one directory per database, named by its zero-padded id, holding a
//! `schema.json` descriptor and one delimited data file per table:
//!
//! ```text
//! corpus/
//!   00000/schema.json
//!   00000/authors.csv
//!   00000/books.csv
//!   00001/...
//! ```
//!
//! Descriptors are parsed and validated eagerly; cell data is read lazily per
//! database on first access.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DESCRIPTOR_FILE: &str = "schema.json";

/// Declared column type, folded into a six-symbol alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    String,
    Integer,
    Float,
    Date,
    Boolean,
    Other,
}

impl ColumnType {
    pub const ALL: [ColumnType; 6] = [
        ColumnType::String,
        ColumnType::Integer,
        ColumnType::Float,
        ColumnType::Date,
        ColumnType::Boolean,
        ColumnType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::String => "string",
            ColumnType::Integer => "integer",
            ColumnType::Float => "float",
            ColumnType::Date => "date",
            ColumnType::Boolean => "boolean",
            ColumnType::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Categorical types for the `PropCat` node property.
    pub fn is_categorical(self) -> bool {
        matches!(self, ColumnType::String | ColumnType::Boolean | ColumnType::Other)
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a raw declared type to the alphabet. Never fails: unknown names fold
/// into [`ColumnType::Other`]. Length/precision suffixes such as
/// `VARCHAR(255)` are ignored.
pub fn parse_data_type(raw: &str) -> ColumnType {
    let lowered = raw.trim().to_ascii_lowercase();
    let base = lowered.split('(').next().unwrap_or("").trim();
    match base {
        "string" | "varchar" | "text" | "char" | "nvarchar" | "nchar" | "character varying"
        | "character" | "str" | "clob" => ColumnType::String,
        "int" | "integer" | "bigint" | "smallint" | "tinyint" | "int8" | "int16" | "int32"
        | "int64" | "long" => ColumnType::Integer,
        "float" | "double" | "double precision" | "real" | "decimal" | "numeric" | "number"
        | "float32" | "float64" | "quantity" => ColumnType::Float,
        "date" | "datetime" | "timestamp" | "timestamptz" | "time" => ColumnType::Date,
        "bool" | "boolean" => ColumnType::Boolean,
        _ => ColumnType::Other,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub data_type: ColumnType,
    pub ordinal: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnSchema>,
    /// Relative to the database directory.
    pub data_file: PathBuf,
}

impl TableSchema {
    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from_table: String,
    pub from_column: String,
    pub to_table: String,
    pub to_column: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseSchema {
    pub db_id: String,
    pub name: String,
    pub tid: Option<String>,
    pub tables: Vec<TableSchema>,
    pub foreign_keys: Vec<ForeignKey>,
}

impl DatabaseSchema {
    pub fn table(&self, name: &str) -> Option<&TableSchema> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    pub fn column_count(&self) -> usize {
        self.tables.iter().map(|t| t.columns.len()).sum()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&TableSchema, &ColumnSchema)> {
        self.tables
            .iter()
            .flat_map(|t| t.columns.iter().map(move |c| (t, c)))
    }

    /// Builds a schema from descriptor form and checks every invariant.
    pub fn from_descriptor(db_id: impl Into<String>, desc: Descriptor) -> Result<Self> {
        let tables = desc
            .tables
            .into_iter()
            .map(|t| {
                let data_file = t
                    .data_file
                    .unwrap_or_else(|| PathBuf::from(format!("{}.csv", t.name)));
                TableSchema {
                    columns: t
                        .columns
                        .into_iter()
                        .enumerate()
                        .map(|(ordinal, c)| ColumnSchema {
                            name: c.name,
                            data_type: parse_data_type(&c.data_type),
                            ordinal,
                        })
                        .collect(),
                    name: t.name,
                    data_file,
                }
            })
            .collect();
        let schema = DatabaseSchema {
            db_id: db_id.into(),
            name: desc.name,
            tid: desc.tid.filter(|t| !t.trim().is_empty()),
            tables,
            foreign_keys: desc.foreign_keys,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_descriptor(&self) -> Descriptor {
        Descriptor {
            name: self.name.clone(),
            tid: self.tid.clone(),
            tables: self
                .tables
                .iter()
                .map(|t| TableDescriptor {
                    name: t.name.clone(),
                    data_file: Some(t.data_file.clone()),
                    columns: t
                        .columns
                        .iter()
                        .map(|c| ColumnDescriptor {
                            name: c.name.clone(),
                            data_type: c.data_type.as_str().to_owned(),
                        })
                        .collect(),
                })
                .collect(),
            foreign_keys: self.foreign_keys.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tables.is_empty() {
            return Err(Error::Schema("database has no tables".into()));
        }
        let mut seen = HashSet::new();
        for table in &self.tables {
            if table.name.trim().is_empty() {
                return Err(Error::Schema("empty table name".into()));
            }
            if !seen.insert(table.name.as_str()) {
                return Err(Error::Schema(format!("duplicate table `{}`", table.name)));
            }
            let mut cols = HashSet::new();
            for (i, col) in table.columns.iter().enumerate() {
                if col.name.trim().is_empty() {
                    return Err(Error::Schema(format!(
                        "empty column name in table `{}`",
                        table.name
                    )));
                }
                if col.ordinal != i {
                    return Err(Error::Schema(format!(
                        "non-contiguous ordinal for column `{}.{}`",
                        table.name, col.name
                    )));
                }
                if !cols.insert(col.name.as_str()) {
                    return Err(Error::Schema(format!(
                        "duplicate column `{}` in table `{}`",
                        col.name, table.name
                    )));
                }
            }
        }
        for fk in &self.foreign_keys {
            for (table, column) in [(&fk.from_table, &fk.from_column), (&fk.to_table, &fk.to_column)]
            {
                let resolved = self.table(table).and_then(|t| t.column(column));
                if resolved.is_none() {
                    return Err(Error::Schema(format!(
                        "foreign key references unknown column `{table}.{column}`"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// On-disk descriptor form (`schema.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tid: Option<String>,
    pub tables: Vec<TableDescriptor>,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDescriptor {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    pub columns: Vec<ColumnDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDescriptor {
    pub name: String,
    #[serde(rename = "type")]
    pub data_type: String,
}

/// Column-major cell store for one table; `None` is NULL.
#[derive(Debug, Clone, PartialEq)]
pub struct TableData {
    pub table: String,
    pub columns: Vec<Vec<Option<String>>>,
    pub row_count: usize,
    /// Size of the backing file in bytes.
    pub file_size: u64,
}

impl TableData {
    pub fn column(&self, ordinal: usize) -> &[Option<String>] {
        &self.columns[ordinal]
    }
}

fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("tab") => b'\t',
        _ => b',',
    }
}

fn decode_cell(raw: &str) -> Option<String> {
    if raw.is_empty() || raw == "NULL" {
        None
    } else {
        Some(raw.to_owned())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_owned(),
        message: e.to_string(),
    }
}

fn check_header(header: &csv::StringRecord, schema: &TableSchema) -> Result<()> {
    let expected = schema.columns.len().max(header.len());
    for index in 0..expected {
        let want = schema.columns.get(index).map(|c| c.name.as_str());
        let got = header.get(index).map(str::trim);
        if want != got {
            return Err(Error::HeaderMismatch {
                index,
                expected: want.unwrap_or("<none>").to_owned(),
                found: got.unwrap_or("<none>").to_owned(),
            });
        }
    }
    Ok(())
}

fn open_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path))
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn read_header(reader: &mut csv::Reader<fs::File>, path: &Path) -> Result<csv::StringRecord> {
    let mut header = csv::StringRecord::new();
    let found = reader
        .read_record(&mut header)
        .map_err(|e| csv_error(path, e))?;
    if !found {
        return Err(Error::Csv {
            path: path.to_owned(),
            message: "missing header row".into(),
        });
    }
    Ok(header)
}

/// Reads one table file. Empty fields and the literal `NULL` decode to NULL.
pub fn scan_table(data_file: &Path, schema: &TableSchema) -> Result<TableData> {
    let mut reader = open_reader(data_file)?;
    let header = read_header(&mut reader, data_file)?;
    check_header(&header, schema)?;

    let width = schema.columns.len();
    let mut columns: Vec<Vec<Option<String>>> = vec![Vec::new(); width];
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    while reader
        .read_record(&mut record)
        .map_err(|e| csv_error(data_file, e))?
    {
        if record.len() != width {
            return Err(Error::RaggedRow {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            col.push(decode_cell(field));
        }
        row += 1;
    }
    let file_size = fs::metadata(data_file)
        .map_err(|e| Error::io(data_file, e))?
        .len();
    Ok(TableData {
        table: schema.name.clone(),
        columns,
        row_count: row,
        file_size,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    /// The database was skipped.
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub db_id: String,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "skipped",
        };
        write!(f, "{} [{}]: {}", self.db_id, level, self.message)
    }
}

#[derive(Debug)]
pub struct Database {
    pub schema: DatabaseSchema,
    pub dir: PathBuf,
    data: OnceLock<Vec<TableData>>,
}

impl Database {
    pub fn new(schema: DatabaseSchema, dir: PathBuf) -> Self {
        Database {
            schema,
            dir,
            data: OnceLock::new(),
        }
    }

    /// Table data in schema order, scanned on first call.
    pub fn data(&self) -> Result<&[TableData]> {
        if let Some(d) = self.data.get() {
            return Ok(d);
        }
        let loaded = self
            .schema
            .tables
            .iter()
            .map(|t| scan_table(&self.dir.join(&t.data_file), t))
            .collect::<Result<Vec<_>>>()?;
        // A concurrent loader may have won; both results are identical.
        let _ = self.data.set(loaded);
        Ok(self.data.get().expect("initialized above"))
    }
}

#[derive(Debug)]
pub struct Corpus {
    pub root: PathBuf,
    pub databases: Vec<Database>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Corpus {
    pub fn schemas(&self) -> impl Iterator<Item = &DatabaseSchema> {
        self.databases.iter().map(|d| &d.schema)
    }

    pub fn get(&self, db_id: &str) -> Option<&Database> {
        self.databases
            .binary_search_by(|d| d.schema.db_id.as_str().cmp(db_id))
            .ok()
            .map(|i| &self.databases[i])
    }

    pub fn skipped(&self) -> usize {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .count()
    }

    /// Writes `db_id  name  tid  n_tables  n_columns` as TSV.
    pub fn write_manifest(&self, path: &Path) -> Result<()> {
        let mut out = String::from("db_id\tname\ttid\tn_tables\tn_columns\n");
        for s in self.schemas() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                s.db_id,
                tsv_field(&s.name),
                s.tid.as_deref().map(tsv_field).unwrap_or_default(),
                s.tables.len(),
                s.column_count()
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

fn load_database(dir: &Path, db_id: &str) -> std::result::Result<(Database, Vec<Diagnostic>), String> {
    let desc_path = dir.join(DESCRIPTOR_FILE);
    let text = fs::read_to_string(&desc_path)
        .map_err(|e| format!("cannot read {DESCRIPTOR_FILE}: {e}"))?;
    let desc: Descriptor =
        serde_json::from_str(&text).map_err(|e| format!("malformed {DESCRIPTOR_FILE}: {e}"))?;
    let schema = DatabaseSchema::from_descriptor(db_id, desc).map_err(|e| e.to_string())?;

    for table in &schema.tables {
        let path = dir.join(&table.data_file);
        if !path.is_file() {
            return Err(format!(
                "missing data file `{}` for table `{}`",
                table.data_file.display(),
                table.name
            ));
        }
        let mut reader = open_reader(&path).map_err(|e| e.to_string())?;
        let header = read_header(&mut reader, &path).map_err(|e| e.to_string())?;
        check_header(&header, table).map_err(|e| format!("table `{}`: {e}", table.name))?;
    }

    let mut warnings = Vec::new();
    if schema.tables.len() == 1 {
        warnings.push(Diagnostic {
            db_id: db_id.to_owned(),
            severity: Severity::Warning,
            message: "single-table database".into(),
        });
    }
    Ok((Database::new(schema, dir.to_owned()), warnings))
}

/// Loads every database directory under `root`, in lexicographic `db_id`
/// order. A malformed database is skipped with a diagnostic; only an
/// unreadable root is fatal.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus> {
    let root = root.as_ref();
    let mut dirs: Vec<(String, PathBuf)> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_dir())
        .filter_map(|entry| {
            let name = entry.file_name().to_str()?.to_owned();
            (!name.starts_with('.')).then(|| (name, entry.path()))
        })
        .collect();
    dirs.sort();

    let results: Vec<_> = dirs
        .par_iter()
        .map(|(db_id, dir)| (db_id, load_database(dir, db_id)))
        .collect();

    let mut databases = Vec::new();
    let mut diagnostics = Vec::new();
    for (db_id, result) in results {
        match result {
            Ok((db, warnings)) => {
                databases.push(db);
                diagnostics.extend(warnings);
            }
            Err(message) => diagnostics.push(Diagnostic {
                db_id: db_id.clone(),
                severity: Severity::Error,
                message,
            }),
        }
    }
    Ok(Corpus {
        root: root.to_owned(),
        databases,
        diagnostics,
    })
}

/// Writes `schema` as `<dir>/schema.json`.
pub fn write_descriptor(schema: &DatabaseSchema, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(DESCRIPTOR_FILE);
    let mut text = serde_json::to_string_pretty(&schema.to_descriptor())
        .expect("descriptor serializes");
    text.push('\n');
    let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| Error::io(&path, e))
}

/// Distinct non-NULL values with their frequencies, in first-seen order.
pub fn value_counts<'a, I>(values: I) -> BTreeMap<&'a str, usize>
where
    I: IntoIterator<Item = &'a Option<String>>,
{
    let mut counts = BTreeMap::new();
    for v in values.into_iter().flatten() {
        *counts.entry(v.as_str()).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::create_dir_all(dir).unwrap();
        fs::write(dir.join(name), body).unwrap();
    }

    fn books_descriptor() -> &'static str {
        r#"{
  "name": "Books",
  "tid": "Q1",
  "tables": [
    {"name": "authors", "columns": [{"name": "id", "type": "INT"}, {"name": "name", "type": "VARCHAR(64)"}]},
    {"name": "books", "columns": [{"name": "id", "type": "bigint"}, {"name": "author_id", "type": "int"}, {"name": "title", "type": "text"}]}
  ],
  "foreign_keys": [{"from_table": "books", "from_column": "author_id", "to_table": "authors", "to_column": "id"}]
}"#
    }

    fn write_books(dir: &Path) {
        write(dir, DESCRIPTOR_FILE, books_descriptor());
        write(dir, "authors.csv", "id,name\n1,Ann\n2,Bob\n");
        write(dir, "books.csv", "id,author_id,title\n1,1,Dune\n2,2,NULL\n");
    }

    #[test]
    fn parse_data_type_aliases() {
        assert_eq!(parse_data_type("VARCHAR"), ColumnType::String);
        assert_eq!(parse_data_type("timestamp"), ColumnType::Date);
        assert_eq!(parse_data_type("geometry"), ColumnType::Other);
        assert_eq!(parse_data_type(" Double "), ColumnType::Float);
        assert_eq!(parse_data_type("bool"), ColumnType::Boolean);
        assert_eq!(parse_data_type("BIGINT"), ColumnType::Integer);
        assert_eq!(parse_data_type(""), ColumnType::Other);
    }

    #[test]
    fn loads_valid_corpus_in_order() {
        let tmp = tempfile::tempdir().unwrap();
        for id in ["00002", "00000", "00001"] {
            write_books(&tmp.path().join(id));
        }
        let corpus = load_corpus(tmp.path()).unwrap();
        assert_eq!(corpus.databases.len(), 3);
        assert!(corpus.diagnostics.is_empty());
        let ids: Vec<_> = corpus.schemas().map(|s| s.db_id.as_str()).collect();
        assert_eq!(ids, ["00000", "00001", "00002"]);
        let s = &corpus.databases[0].schema;
        assert_eq!(s.tables[0].columns[1].data_type, ColumnType::String);
        assert_eq!(s.column_count(), 5);
    }

    #[test]
    fn missing_data_file_is_diagnosed() {
        let tmp = tempfile::tempdir().unwrap();
        write_books(&tmp.path().join("00000"));
        write_books(&tmp.path().join("00001"));
        let bad = tmp.path().join("00002");
        write(&bad, DESCRIPTOR_FILE, books_descriptor());
        write(&bad, "authors.csv", "id,name\n");
        let corpus = load_corpus(tmp.path()).unwrap();
        assert_eq!(corpus.databases.len(), 2);
        assert_eq!(corpus.diagnostics.len(), 1);
        assert_eq!(corpus.diagnostics[0].db_id, "00002");
        assert!(corpus.diagnostics[0].message.contains("books.csv"));
    }

    #[test]
    fn duplicate_table_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("00000");
        write(
            &dir,
            DESCRIPTOR_FILE,
            r#"{"name": "X", "tables": [
                {"name": "t", "columns": [{"name": "a", "type": "int"}]},
                {"name": "t", "columns": [{"name": "b", "type": "int"}]}]}"#,
        );
        write(&dir, "t.csv", "a\n1\n");
        let corpus = load_corpus(tmp.path()).unwrap();
        assert!(corpus.databases.is_empty());
        assert!(corpus.diagnostics[0].message.contains("duplicate table"));
    }

    #[test]
    fn unresolved_foreign_key_rejected() {
        let desc: Descriptor = serde_json::from_str(
            r#"{"name": "X", "tables": [{"name": "t", "columns": [{"name": "a", "type": "int"}]}],
                "foreign_keys": [{"from_table": "t", "from_column": "a", "to_table": "u", "to_column": "a"}]}"#,
        )
        .unwrap();
        let err = DatabaseSchema::from_descriptor("0", desc).unwrap_err();
        assert!(err.to_string().contains("u.a"));
    }

    #[test]
    fn single_table_is_flagged_not_skipped() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("00000");
        write(
            &dir,
            DESCRIPTOR_FILE,
            r#"{"name": "X", "tables": [{"name": "t", "columns": [{"name": "a", "type": "int"}]}]}"#,
        );
        write(&dir, "t.csv", "a\n1\n");
        let corpus = load_corpus(tmp.path()).unwrap();
        assert_eq!(corpus.databases.len(), 1);
        assert_eq!(corpus.diagnostics[0].severity, Severity::Warning);
        assert_eq!(corpus.skipped(), 0);
    }

    #[test]
    fn directory_without_descriptor_is_counted() {
        let tmp = tempfile::tempdir().unwrap();
        write_books(&tmp.path().join("00000"));
        fs::create_dir_all(tmp.path().join("00001")).unwrap();
        let corpus = load_corpus(tmp.path()).unwrap();
        assert_eq!(corpus.databases.len() + corpus.skipped(), 2);
    }

    #[test]
    fn unreadable_root_is_fatal() {
        assert!(load_corpus("/nonexistent/corpus/root").is_err());
    }

    fn abc_table() -> TableSchema {
        TableSchema {
            name: "t".into(),
            columns: ["a", "b", "c"]
                .iter()
                .enumerate()
                .map(|(ordinal, n)| ColumnSchema {
                    name: (*n).into(),
                    data_type: ColumnType::String,
                    ordinal,
                })
                .collect(),
            data_file: "t.csv".into(),
        }
    }

    #[test]
    fn scan_reads_nulls() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("t.csv");
        fs::write(&path, "a,b,c\n1,2,3\n4,,6\n7,8,9\n1,1,1\n2,2,2\n").unwrap();
        let data = scan_table(&path, &abc_table()).unwrap();
        assert_eq!(data.row_count, 5);
        let nulls = data.columns.iter().flatten().filter(|v| v.is_none()).count();
        assert_eq!(nulls, 1);
        assert_eq!(data.column(1)[1], None);
    }

    #[test]
    fn scan_null_literal_and_header_only() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("t.csv");
        fs::write(&path, "a,b,c\n").unwrap();
        assert_eq!(scan_table(&path, &abc_table()).unwrap().row_count, 0);
        fs::write(&path, "a,b,c\nNULL,x,y\n").unwrap();
        assert_eq!(scan_table(&path, &abc_table()).unwrap().column(0)[0], None);
    }

    #[test]
    fn scan_ragged_row() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("t.csv");
        fs::write(&path, "a,b,c\n1,2,3\n1,2,3\n1,2\n").unwrap();
        let err = scan_table(&path, &abc_table()).unwrap_err();
        assert!(err.to_string().starts_with("row 2: expected 3 fields"), "{err}");
    }

    #[test]
    fn scan_header_mismatch_names_column() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("t.csv");
        fs::write(&path, "a,x,c\n").unwrap();
        match scan_table(&path, &abc_table()).unwrap_err() {
            Error::HeaderMismatch { index, expected, .. } => {
                assert_eq!((index, expected.as_str()), (1, "b"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn lazy_data_is_idempotent() {
        let tmp = tempfile::tempdir().unwrap();
        write_books(&tmp.path().join("00000"));
        let corpus = load_corpus(tmp.path()).unwrap();
        let db = &corpus.databases[0];
        let first = db.data().unwrap().to_vec();
        assert_eq!(first, db.data().unwrap());
        assert_eq!(first[1].column(2)[1], None);
    }

    #[test]
    fn descriptor_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        write_books(&tmp.path().join("a").join("00000"));
        let first = load_corpus(tmp.path().join("a")).unwrap();
        let schema = &first.databases[0].schema;
        let out = tmp.path().join("b").join("00000");
        write_descriptor(schema, &out).unwrap();
        for t in &schema.tables {
            fs::copy(
                first.databases[0].dir.join(&t.data_file),
                out.join(&t.data_file),
            )
            .unwrap();
        }
        let second = load_corpus(tmp.path().join("b")).unwrap();
        assert_eq!(&second.databases[0].schema, schema);
    }
}
