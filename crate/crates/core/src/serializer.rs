//! Textual database abstracts: schema names plus a few sampled values.
//!
//! ```text
//! Database: <database_name>
//! Table: <table_name>
//! - Column: <column_name> ; Samples: <v1> | <v2> | <v3>
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::corpus::{DatabaseSchema, TableData};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES_PER_COLUMN: usize = 3;
pub const MAX_SAMPLE_CHARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abstract {
    pub db_id: String,
    pub text: String,
    pub samples_per_column: usize,
}

impl Abstract {
    pub fn file_name(&self) -> String {
        format!("{}.abstract.txt", self.db_id)
    }
}

/// Line breaks inside names or values would break the line grammar.
fn single_line(s: &str) -> String {
    s.replace(['\r', '\n'], " ")
}

fn truncate_chars(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}

/// First `k` distinct non-NULL values in row order.
pub fn sample_values(values: &[Option<String>], k: usize) -> Vec<&str> {
    let mut seen = HashSet::new();
    values
        .iter()
        .flatten()
        .map(String::as_str)
        .filter(|v| seen.insert(*v))
        .take(k)
        .collect()
}

/// Serializes a database into its abstract. `data` must be in schema table
/// order.
pub fn serialize_abstract(
    db: &DatabaseSchema,
    data: &[TableData],
    samples_per_column: usize,
) -> Result<Abstract> {
    if samples_per_column == 0 {
        return Err(Error::InvalidInput("samples_per_column must be >= 1".into()));
    }
    if data.len() != db.tables.len() {
        return Err(Error::InvalidInput(format!(
            "{} tables in schema, {} data tables supplied",
            db.tables.len(),
            data.len()
        )));
    }
    let mut lines = vec![format!("Database: {}", single_line(&db.name))];
    for (table, table_data) in db.tables.iter().zip(data) {
        lines.push(format!("Table: {}", single_line(&table.name)));
        for column in &table.columns {
            let samples: Vec<String> = sample_values(table_data.column(column.ordinal), samples_per_column)
                .into_iter()
                .map(|v| single_line(truncate_chars(v, MAX_SAMPLE_CHARS)))
                .collect();
            let mut line = format!("- Column: {} ; Samples:", single_line(&column.name));
            if !samples.is_empty() {
                line.push(' ');
                line.push_str(&samples.join(" | "));
            }
            lines.push(line);
        }
    }
    Ok(Abstract {
        db_id: db.db_id.clone(),
        text: lines.join("\n"),
        samples_per_column,
    })
}

/// Writes `<db_id>.abstract.txt` per abstract plus `manifest.tsv`.
pub fn write_abstracts(abstracts: &[Abstract], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("db_id\tfile\tsamples_per_column\tlines\tbytes\n");
    for a in abstracts {
        let path = dir.join(a.file_name());
        fs::write(&path, &a.text).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            a.db_id,
            a.file_name(),
            a.samples_per_column,
            a.text.lines().count(),
            a.text.len()
        ));
    }
    let path = dir.join("manifest.tsv");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

/// Reads abstracts back in manifest order.
pub fn read_abstracts(dir: &Path) -> Result<Vec<Abstract>> {
    let path = dir.join("manifest.tsv");
    let manifest = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    manifest
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(Error::InvalidInput(format!("malformed manifest line `{line}`")));
            }
            let file = dir.join(fields[1]);
            Ok(Abstract {
                db_id: fields[0].to_owned(),
                text: fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?,
                samples_per_column: fields[2]
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad sample count in `{line}`")))?,
            })
        })
        .collect()
}
