//! Node (database) and edge (database pair) property profiles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::corpus::{value_counts, ColumnType, DatabaseSchema, TableData};
use crate::error::{Error, Result};
use crate::ged::{normalize_name, schema_ged, SchemaGraph, DEFAULT_EXACT_NODE_LIMIT};
use crate::metrics::{entropy_bits, hellinger, jaccard, kl_divergence, normalize};

pub const DEFAULT_KL_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeProfile {
    pub db_id: String,
    pub n_tables: usize,
    pub n_columns: usize,
    pub prop_cat: f64,
    pub fk_density: f64,
    pub avg_conn: f64,
    /// Bytes.
    pub data_vol: u64,
    pub all_join_size: f64,
    pub all_join_log10: Option<f64>,
    pub avg_card: f64,
    pub avg_sparsity: f64,
    pub avg_entropy: f64,
    /// Largest distinct non-NULL count of any column.
    pub max_card: usize,
    pub cluster_id: Option<i64>,
    pub community_id: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStructure {
    pub n_tables: usize,
    pub n_columns: usize,
    pub prop_cat: f64,
    pub fk_density: f64,
    pub avg_conn: f64,
}

pub fn node_structural(db: &DatabaseSchema) -> Result<NodeStructure> {
    let n_columns = db.column_count();
    if n_columns == 0 {
        return Err(Error::InvalidInput(format!("database {} has no columns", db.db_id)));
    }
    let n_tables = db.tables.len();
    let categorical = db.columns().filter(|(_, c)| c.data_type.is_categorical()).count();
    // each foreign key touches its source and its target table
    let fk_endpoints = 2 * db.foreign_keys.len();
    Ok(NodeStructure {
        n_tables,
        n_columns,
        prop_cat: categorical as f64 / n_columns as f64,
        fk_density: db.foreign_keys.len() as f64 / n_columns as f64,
        avg_conn: fk_endpoints as f64 / n_tables as f64,
    })
}

/// Shannon entropy (bits) of the non-NULL value distribution.
pub fn column_entropy(values: &[Option<String>]) -> f64 {
    let counts: Vec<usize> = value_counts(values).into_values().collect();
    entropy_bits(&counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinSizeEstimate {
    pub size: f64,
    /// `None` when the estimate is zero.
    pub log10: Option<f64>,
}

fn distinct_count(data: &TableData, ordinal: usize) -> usize {
    value_counts(data.column(ordinal)).len()
}

/// Estimated row count of joining every table.
///
/// Tables connected by foreign keys are joined breadth-first from the first
/// table of each component (keys visited in declaration order) with
/// `|R ⋈ S| = |R|·|S| / max(V(R,a), V(S,b))`; separate components multiply.
pub fn estimate_all_join_size(db: &DatabaseSchema, data: &[TableData]) -> JoinSizeEstimate {
    let n = db.tables.len();
    let rows: Vec<f64> = data.iter().map(|d| d.row_count as f64).collect();
    let fks: Vec<(usize, usize, usize, usize)> = db
        .foreign_keys
        .iter()
        .filter_map(|fk| {
            let ft = db.table_index(&fk.from_table)?;
            let tt = db.table_index(&fk.to_table)?;
            let fc = db.tables[ft].column(&fk.from_column)?.ordinal;
            let tc = db.tables[tt].column(&fk.to_column)?.ordinal;
            Some((ft, fc, tt, tc))
        })
        .collect();

    let mut visited = vec![false; n];
    let mut size = 1.0f64;
    let mut log10 = 0.0f64;
    let mut zero = false;
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        if rows[root] == 0.0 {
            zero = true;
        } else {
            size *= rows[root];
            log10 += rows[root].log10();
        }
        let mut queue = VecDeque::from([root]);
        while let Some(t) = queue.pop_front() {
            for &(ft, fc, tt, tc) in &fks {
                let (t_col, other, o_col) = if ft == t && !visited[tt] {
                    (fc, tt, tc)
                } else if tt == t && !visited[ft] {
                    (tc, ft, fc)
                } else {
                    continue;
                };
                visited[other] = true;
                queue.push_back(other);
                let v = distinct_count(&data[t], t_col).max(distinct_count(&data[other], o_col));
                if v == 0 || rows[other] == 0.0 {
                    zero = true;
                } else {
                    size *= rows[other] / v as f64;
                    log10 += rows[other].log10() - (v as f64).log10();
                }
            }
        }
    }
    if zero {
        JoinSizeEstimate {
            size: 0.0,
            log10: None,
        }
    } else {
        JoinSizeEstimate {
            size,
            log10: Some(log10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStatistics {
    pub data_vol: u64,
    pub all_join: JoinSizeEstimate,
    pub avg_card: f64,
    pub avg_sparsity: f64,
    pub avg_entropy: f64,
    pub max_card: usize,
}

pub fn node_statistical(db: &DatabaseSchema, data: &[TableData]) -> Result<NodeStatistics> {
    if data.len() != db.tables.len() {
        return Err(Error::InvalidInput(format!(
            "{}: {} tables, {} data tables",
            db.db_id,
            db.tables.len(),
            data.len()
        )));
    }
    let mut cards = Vec::new();
    let mut sparsities = Vec::new();
    let mut entropies = Vec::new();
    for (table, table_data) in db.tables.iter().zip(data) {
        for column in &table.columns {
            let values = table_data.column(column.ordinal);
            let counts = value_counts(values);
            cards.push(counts.len());
            let nulls = values.iter().filter(|v| v.is_none()).count();
            sparsities.push(if values.is_empty() {
                0.0
            } else {
                nulls as f64 / values.len() as f64
            });
            let freq: Vec<usize> = counts.into_values().collect();
            entropies.push(entropy_bits::<f64>(&freq));
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let card_f: Vec<f64> = cards.iter().map(|&c| c as f64).collect();
    Ok(NodeStatistics {
        data_vol: data.iter().map(|d| d.file_size).sum(),
        all_join: estimate_all_join_size(db, data),
        avg_card: mean(&card_f),
        avg_sparsity: mean(&sparsities),
        avg_entropy: mean(&entropies),
        max_card: cards.into_iter().max().unwrap_or(0),
    })
}

pub fn profile_node(db: &DatabaseSchema, data: &[TableData]) -> Result<NodeProfile> {
    let s = node_structural(db)?;
    let t = node_statistical(db, data)?;
    Ok(NodeProfile {
        db_id: db.db_id.clone(),
        n_tables: s.n_tables,
        n_columns: s.n_columns,
        prop_cat: s.prop_cat,
        fk_density: s.fk_density,
        avg_conn: s.avg_conn,
        data_vol: t.data_vol,
        all_join_size: t.all_join.size,
        all_join_log10: t.all_join.log10,
        avg_card: t.avg_card,
        avg_sparsity: t.avg_sparsity,
        avg_entropy: t.avg_entropy,
        max_card: t.max_card,
        cluster_id: None,
        community_id: None,
    })
}

fn unit_range(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")))
    }
}

impl NodeProfile {
    /// Checks every range invariant, including the entropy bound
    /// `avg_entropy <= log2(max_card)`.
    pub fn check(&self) -> Result<()> {
        unit_range("PropCat", self.prop_cat)?;
        unit_range("AvgSparsity", self.avg_sparsity)?;
        if self.fk_density < 0.0 || self.avg_entropy < 0.0 || self.all_join_size < 0.0 {
            return Err(Error::InvalidInput(format!("{}: negative property", self.db_id)));
        }
        if self.avg_entropy > self.entropy_bound() + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{}: AvgEntropy {} exceeds log2 of max cardinality {}",
                self.db_id, self.avg_entropy, self.max_card
            )));
        }
        Ok(())
    }

    pub fn entropy_bound(&self) -> f64 {
        if self.max_card <= 1 {
            0.0
        } else {
            (self.max_card as f64).log2()
        }
    }
}

pub const NODE_HEADER: [&str; 13] = [
    "db_id",
    "#Tables",
    "#Columns",
    "PropCat",
    "FKDensity",
    "AvgConn",
    "DataVol",
    "AllJoinSize",
    "AvgCard",
    "AvgSparsity",
    "AvgEntropy",
    "Cluster",
    "Community",
];

pub fn write_node_props(profiles: &[NodeProfile], path: &Path) -> Result<()> {
    let mut out = NODE_HEADER.join("\t");
    out.push('\n');
    for p in profiles {
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\n",
            p.db_id,
            p.n_tables,
            p.n_columns,
            p.prop_cat,
            p.fk_density,
            p.avg_conn,
            p.data_vol,
            p.all_join_size,
            p.avg_card,
            p.avg_sparsity,
            p.avg_entropy,
            p.cluster_id.map(|c| c.to_string()).unwrap_or_default(),
            p.community_id.map(|c| c.to_string()).unwrap_or_default(),
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads `db_id<TAB>cluster` labels; a non-numeric first line is a header.
pub fn read_cluster_labels(path: &Path) -> Result<BTreeMap<String, i64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = BTreeMap::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::InvalidInput(format!("malformed cluster line `{line}`")))?;
        match label.trim().parse() {
            Ok(v) => {
                labels.insert(id.to_owned(), v);
            }
            Err(_) if n == 0 => {}
            Err(_) => return Err(Error::InvalidInput(format!("bad cluster label `{label}`"))),
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KlDirection {
    /// `KL(src ‖ dst)`.
    #[default]
    SourceToTarget,
    /// Mean of both directions.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeOptions {
    pub ged_exact_node_limit: usize,
    pub kl_epsilon: f64,
    pub kl_direction: KlDirection,
}

impl Default for EdgeOptions {
    fn default() -> Self {
        EdgeOptions {
            ged_exact_node_limit: DEFAULT_EXACT_NODE_LIMIT,
            kl_epsilon: DEFAULT_KL_EPSILON,
            kl_direction: KlDirection::SourceToTarget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub src: String,
    pub dst: String,
    pub jacc_table: f64,
    pub jacc_col: f64,
    pub jacc_type: f64,
    pub hellinger: f64,
    pub ged: usize,
    pub ged_exact: bool,
    pub common_tables: usize,
    pub common_cols: usize,
    pub common_types: usize,
    pub embed_sim: f64,
    pub sim_conf: f64,
    pub dist_div: f64,
    pub overlap_ratio: f64,
    pub no_shared_columns: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStructure {
    pub jacc_table: f64,
    pub jacc_col: f64,
    pub jacc_type: f64,
    pub hellinger: f64,
    pub ged: usize,
    pub ged_exact: bool,
    pub common_tables: usize,
    pub common_cols: usize,
    pub common_types: usize,
}

fn type_counts(db: &DatabaseSchema) -> [usize; 6] {
    let mut counts = [0; 6];
    for (_, c) in db.columns() {
        counts[c.data_type.index()] += 1;
    }
    counts
}

fn type_set(db: &DatabaseSchema) -> BTreeSet<ColumnType> {
    db.columns().map(|(_, c)| c.data_type).collect()
}

pub fn edge_structural(a: &DatabaseSchema, b: &DatabaseSchema, ged_exact_node_limit: usize) -> Result<EdgeStructure> {
    let tables = |db: &DatabaseSchema| -> BTreeSet<String> {
        db.tables.iter().map(|t| normalize_name(&t.name)).collect()
    };
    let columns = |db: &DatabaseSchema| -> BTreeSet<String> {
        db.columns().map(|(_, c)| normalize_name(&c.name)).collect()
    };
    let (ta, tb) = (tables(a), tables(b));
    let (ca, cb) = (columns(a), columns(b));
    let (ya, yb) = (type_set(a), type_set(b));

    let (counts_a, counts_b) = (type_counts(a), type_counts(b));
    let hellinger = match (counts_a.iter().sum::<usize>(), counts_b.iter().sum::<usize>()) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => hellinger(&normalize::<f64>(&counts_a), &normalize::<f64>(&counts_b))?,
    };
    let ged = schema_ged(&SchemaGraph::from_schema(a), &SchemaGraph::from_schema(b), ged_exact_node_limit);
    Ok(EdgeStructure {
        jacc_table: jaccard(&ta, &tb),
        jacc_col: jaccard(&ca, &cb),
        jacc_type: jaccard(&ya, &yb),
        hellinger,
        ged: ged.distance,
        ged_exact: ged.exact,
        common_tables: ta.intersection(&tb).count(),
        common_cols: ca.intersection(&cb).count(),
        common_types: ya.intersection(&yb).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStatistics {
    pub dist_div: f64,
    pub overlap_ratio: f64,
    /// Shared column names with values on both sides.
    pub shared_columns: usize,
}

impl EdgeStatistics {
    pub fn no_shared_columns(&self) -> bool {
        self.shared_columns == 0
    }
}

/// Non-NULL value counts per normalized column name, pooled across tables.
fn column_values<'a>(db: &DatabaseSchema, data: &'a [TableData]) -> BTreeMap<String, BTreeMap<&'a str, usize>> {
    let mut pools: BTreeMap<String, BTreeMap<&'a str, usize>> = BTreeMap::new();
    for (table, table_data) in db.tables.iter().zip(data) {
        for column in &table.columns {
            let pool = pools.entry(normalize_name(&column.name)).or_default();
            for (v, c) in value_counts(table_data.column(column.ordinal)) {
                *pool.entry(v).or_insert(0) += c;
            }
        }
    }
    pools
}

/// Aligns two value-count tables on their union support.
fn aligned(a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>) -> (Vec<f64>, Vec<f64>) {
    let support: BTreeSet<&str> = a.keys().chain(b.keys()).copied().collect();
    let ca: Vec<usize> = support.iter().map(|k| a.get(k).copied().unwrap_or(0)).collect();
    let cb: Vec<usize> = support.iter().map(|k| b.get(k).copied().unwrap_or(0)).collect();
    (normalize(&ca), normalize(&cb))
}

pub fn edge_statistical(
    a: &DatabaseSchema,
    a_data: &[TableData],
    b: &DatabaseSchema,
    b_data: &[TableData],
    options: &EdgeOptions,
) -> Result<EdgeStatistics> {
    let pools_a = column_values(a, a_data);
    let pools_b = column_values(b, b_data);
    let mut divergences = Vec::new();
    let mut overlaps = Vec::new();
    for (name, va) in &pools_a {
        let Some(vb) = pools_b.get(name) else { continue };
        if va.is_empty() || vb.is_empty() {
            continue;
        }
        let (p, q) = aligned(va, vb);
        let eps = options.kl_epsilon;
        let kl = match options.kl_direction {
            KlDirection::SourceToTarget => kl_divergence(&p, &q, eps)?,
            KlDirection::Symmetric => (kl_divergence(&p, &q, eps)? + kl_divergence(&q, &p, eps)?) / 2.0,
        };
        divergences.push(kl);
        let ka: BTreeSet<&str> = va.keys().copied().collect();
        let kb: BTreeSet<&str> = vb.keys().copied().collect();
        overlaps.push(jaccard::<f64, _>(&ka, &kb));
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok(EdgeStatistics {
        dist_div: mean(&divergences),
        overlap_ratio: mean(&overlaps),
        shared_columns: divergences.len(),
    })
}

/// Empirical CDF rank: the share of edges with strictly lower similarity.
pub fn sim_conf(sims: &[f64]) -> Vec<f64> {
    let mut sorted = sims.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sims.len() as f64;
    sims.iter()
        .map(|&s| sorted.partition_point(|&x| x < s) as f64 / n)
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn profile_edge(
    a: &DatabaseSchema,
    a_data: &[TableData],
    b: &DatabaseSchema,
    b_data: &[TableData],
    embed_sim: f64,
    sim_conf: f64,
    options: &EdgeOptions,
) -> Result<EdgeProfile> {
    let s = edge_structural(a, b, options.ged_exact_node_limit)?;
    let t = edge_statistical(a, a_data, b, b_data, options)?;
    Ok(EdgeProfile {
        src: a.db_id.clone(),
        dst: b.db_id.clone(),
        jacc_table: s.jacc_table,
        jacc_col: s.jacc_col,
        jacc_type: s.jacc_type,
        hellinger: s.hellinger,
        ged: s.ged,
        ged_exact: s.ged_exact,
        common_tables: s.common_tables,
        common_cols: s.common_cols,
        common_types: s.common_types,
        embed_sim,
        sim_conf,
        dist_div: t.dist_div,
        overlap_ratio: t.overlap_ratio,
        no_shared_columns: t.no_shared_columns(),
    })
}

impl EdgeProfile {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("JaccTable", self.jacc_table),
            ("JaccCol", self.jacc_col),
            ("JaccType", self.jacc_type),
            ("HellingerDist", self.hellinger),
            ("SimConf", self.sim_conf),
            ("OverlapRatio", self.overlap_ratio),
        ] {
            unit_range(name, v)?;
        }
        if !(-1.0..=1.0).contains(&self.embed_sim) {
            return Err(Error::InvalidInput(format!("EmbedSim = {} outside [-1, 1]", self.embed_sim)));
        }
        if self.dist_div < 0.0 {
            return Err(Error::InvalidInput(format!("DistDiv = {} negative", self.dist_div)));
        }
        if self.common_types > ColumnType::ALL.len() {
            return Err(Error::InvalidInput("more common types than the type alphabet".into()));
        }
        Ok(())
    }
}

pub const EDGE_HEADER: [&str; 14] = [
    "src",
    "dst",
    "JaccTable",
    "JaccCol",
    "JaccType",
    "HellingerDist",
    "GED",
    "CommonTables",
    "CommonCols",
    "CommonTypes",
    "EmbedSim",
    "SimConf",
    "DistDiv",
    "OverlapRatio",
];

pub fn write_edge_props(profiles: &[EdgeProfile], path: &Path) -> Result<()> {
    let mut out = EDGE_HEADER.join("\t");
    out.push('\n');
    for p in profiles {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
            p.src,
            p.dst,
            p.jacc_table,
            p.jacc_col,
            p.jacc_type,
            p.hellinger,
            p.ged,
            p.common_tables,
            p.common_cols,
            p.common_types,
            p.embed_sim,
            p.sim_conf,
            p.dist_div,
            p.overlap_ratio,
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{ColumnSchema, ForeignKey, TableSchema};

    pub(crate) struct Fixture {
        pub schema: DatabaseSchema,
        pub data: Vec<TableData>,
    }

    /// (column, type, values).
    type Col<'a> = (&'a str, ColumnType, &'a [Option<&'a str>]);

    pub(crate) fn fixture(
        id: &str,
        tables: &[(&str, &[Col<'_>])],
        fks: &[(&str, &str, &str, &str)],
    ) -> Fixture {
        let mut schema_tables = Vec::new();
        let mut data = Vec::new();
        for (name, cols) in tables {
            schema_tables.push(TableSchema {
                name: (*name).into(),
                columns: cols
                    .iter()
                    .enumerate()
                    .map(|(ordinal, (c, t, _))| ColumnSchema {
                        name: (*c).into(),
                        data_type: *t,
                        ordinal,
                    })
                    .collect(),
                data_file: format!("{name}.csv").into(),
            });
            data.push(TableData {
                table: (*name).into(),
                columns: cols
                    .iter()
                    .map(|(_, _, vals)| vals.iter().map(|v| v.map(str::to_owned)).collect())
                    .collect(),
                row_count: cols.first().map_or(0, |c| c.2.len()),
                file_size: 10,
            });
        }
        Fixture {
            schema: DatabaseSchema {
                db_id: id.into(),
                name: id.into(),
                tid: None,
                tables: schema_tables,
                foreign_keys: fks
                    .iter()
                    .map(|(ft, fc, tt, tc)| ForeignKey {
                        from_table: (*ft).into(),
                        from_column: (*fc).into(),
                        to_table: (*tt).into(),
                        to_column: (*tc).into(),
                    })
                    .collect(),
            },
            data,
        }
    }

    use ColumnType::{Integer as I, String as S};

    #[test]
    fn structural_node_example() {
        let v: &[Option<&str>] = &[Some("1")];
        let f = fixture(
            "x",
            &[
                ("a", &[("id", I, v), ("n", S, v), ("m", S, v)]),
                ("b", &[("id", I, v), ("a_id", I, v), ("z", S, v)]),
            ],
            &[("b", "a_id", "a", "id")],
        );
        let s = node_structural(&f.schema).unwrap();
        assert_eq!((s.n_tables, s.n_columns), (2, 6));
        assert!((s.fk_density - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(s.avg_conn, 1.0);
        assert!((s.prop_cat - 0.5).abs() < 1e-15);
    }

    #[test]
    fn structural_node_edges() {
        let v: &[Option<&str>] = &[];
        let f = fixture("x", &[("a", &[("p", S, v), ("q", S, v)])], &[]);
        let s = node_structural(&f.schema).unwrap();
        assert_eq!((s.fk_density, s.avg_conn, s.prop_cat), (0.0, 0.0, 1.0));
        let empty = fixture("y", &[("a", &[])], &[]);
        assert!(node_structural(&empty.schema).is_err());
    }

    fn vals(v: &[&str]) -> Vec<Option<String>> {
        v.iter().map(|s| Some((*s).to_owned())).collect()
    }

    #[test]
    fn column_entropy_examples() {
        assert!((column_entropy(&vals(&["a", "b", "c", "d", "e", "f", "g", "h"])) - 3.0).abs() < 1e-12);
        assert_eq!(column_entropy(&vals(&["k", "k", "k"])), 0.0);
        assert!((column_entropy(&vals(&["a", "a", "b", "c"])) - 1.5).abs() < 1e-12);
        assert_eq!(column_entropy(&[None, None]), 0.0);
        assert_eq!(column_entropy(&[]), 0.0);
    }

    #[test]
    fn statistical_node_example() {
        let a: &[Option<&str>] = &[Some("k"); 4];
        let b: &[Option<&str>] = &[Some("1"), Some("2"), Some("3"), Some("4")];
        let f = fixture("x", &[("t", &[("a", S, a), ("b", S, b)])], &[]);
        let s = node_statistical(&f.schema, &f.data).unwrap();
        assert_eq!((s.avg_card, s.avg_sparsity, s.avg_entropy), (2.5, 0.0, 1.0));
        assert_eq!(s.data_vol, 10);
    }

    #[test]
    fn statistical_node_all_null_and_empty() {
        let nulls: &[Option<&str>] = &[None, None];
        let f = fixture("x", &[("t", &[("a", S, nulls), ("b", S, nulls)])], &[]);
        let s = node_statistical(&f.schema, &f.data).unwrap();
        assert_eq!((s.avg_card, s.avg_sparsity, s.avg_entropy), (0.0, 1.0, 0.0));

        let none: &[Option<&str>] = &[];
        let f = fixture("y", &[("t", &[("a", S, none)])], &[]);
        let s = node_statistical(&f.schema, &f.data).unwrap();
        assert_eq!((s.avg_card, s.avg_sparsity, s.avg_entropy), (0.0, 0.0, 0.0));
        assert_eq!(s.all_join.size, 0.0);
    }

    #[test]
    fn join_size_examples() {
        let two: &[Option<&str>] = &[Some("1"), Some("2")];
        let five: &[Option<&str>] = &[Some("1"), Some("2"), Some("3"), Some("4"), Some("5")];
        let f = fixture("x", &[("r", &[("a", I, two)]), ("s", &[("b", I, five)])], &[]);
        let j = estimate_all_join_size(&f.schema, &f.data);
        assert_eq!(j.size, 10.0);
        assert!((j.log10.unwrap() - 1.0).abs() < 1e-12);

        let r_key: &[Option<&str>] = &[Some("1"), Some("2"), Some("3"), Some("4")];
        let s_key: &[Option<&str>] =
            &[Some("1"), Some("1"), Some("2"), Some("2"), Some("3"), Some("3"), Some("4"), Some("4")];
        let f = fixture(
            "y",
            &[("r", &[("id", I, r_key)]), ("s", &[("r_id", I, s_key)])],
            &[("r", "id", "s", "r_id")],
        );
        assert_eq!(estimate_all_join_size(&f.schema, &f.data).size, 8.0);

        let empty: &[Option<&str>] = &[];
        let f = fixture(
            "z",
            &[("r", &[("id", I, r_key)]), ("s", &[("r_id", I, empty)])],
            &[("s", "r_id", "r", "id")],
        );
        let j = estimate_all_join_size(&f.schema, &f.data);
        assert_eq!((j.size, j.log10), (0.0, None));
    }

    fn two_table_db(id: &str, names: (&str, &str), cols: (&str, &str)) -> Fixture {
        let v: &[Option<&str>] = &[Some("x"), Some("y")];
        fixture(
            id,
            &[(names.0, &[(cols.0, S, v), ("k", I, v)]), (names.1, &[(cols.1, S, v)])],
            &[(names.0, cols.0, names.1, cols.1)],
        )
    }

    #[test]
    fn reflexive_edge_profile() {
        let f = two_table_db("x", ("a", "b"), ("c", "d"));
        let p = profile_edge(&f.schema, &f.data, &f.schema, &f.data, 1.0, 0.0, &EdgeOptions::default()).unwrap();
        assert_eq!((p.jacc_table, p.jacc_col, p.jacc_type), (1.0, 1.0, 1.0));
        assert_eq!((p.hellinger, p.ged, p.common_tables), (0.0, 0, 2));
        assert!(p.dist_div.abs() < 1e-9);
        assert_eq!(p.overlap_ratio, 1.0);
        p.check().unwrap();
    }

    #[test]
    fn disjoint_schemas_same_types() {
        let a = two_table_db("x", ("a", "b"), ("c", "d"));
        let b = two_table_db("y", ("e", "f"), ("g", "h"));
        let s = edge_structural(&a.schema, &b.schema, 6).unwrap();
        assert_eq!((s.jacc_table, s.jacc_type), (0.0, 1.0));
        // both share the column `k`
        assert!((s.jacc_col - 1.0 / 5.0).abs() < 1e-15);
        assert_eq!(s.common_types, 2);
        assert_eq!(s.ged, 0);
        assert!(s.ged_exact);
    }

    #[test]
    fn names_match_case_insensitively() {
        let a = two_table_db("x", ("Authors", "b"), ("Name", "d"));
        let b = two_table_db("y", (" authors", "q"), ("NAME", "z"));
        let s = edge_structural(&a.schema, &b.schema, 6).unwrap();
        assert_eq!(s.common_tables, 1);
        assert_eq!(s.common_cols, 2);
    }

    #[test]
    fn shared_column_statistics() {
        let va: &[Option<&str>] = &[Some("x"), Some("x"), Some("y")];
        let vb: &[Option<&str>] = &[Some("x"), Some("y"), Some("y"), Some("z")];
        let a = fixture("a", &[("t", &[("A", S, va)])], &[]);
        let b = fixture("b", &[("u", &[("a", S, vb)])], &[]);
        let s = edge_statistical(&a.schema, &a.data, &b.schema, &b.data, &EdgeOptions::default()).unwrap();
        assert!((s.overlap_ratio - 2.0 / 3.0).abs() < 1e-12);
        let expected = kl_divergence(&[2.0 / 3.0, 1.0 / 3.0, 0.0], &[0.25, 0.5, 0.25], 1e-10).unwrap();
        assert!((s.dist_div - expected).abs() < 1e-12);
        assert_eq!(s.shared_columns, 1);

        let sym = EdgeOptions {
            kl_direction: KlDirection::Symmetric,
            ..EdgeOptions::default()
        };
        let s2 = edge_statistical(&a.schema, &a.data, &b.schema, &b.data, &sym).unwrap();
        assert!(s2.dist_div > 0.0 && s2.dist_div != s.dist_div);
    }

    #[test]
    fn disjoint_values_and_no_shared_columns() {
        let va: &[Option<&str>] = &[Some("x")];
        let vb: &[Option<&str>] = &[Some("y")];
        let a = fixture("a", &[("t", &[("c", S, va)])], &[]);
        let b = fixture("b", &[("t", &[("c", S, vb)])], &[]);
        let s = edge_statistical(&a.schema, &a.data, &b.schema, &b.data, &EdgeOptions::default()).unwrap();
        assert_eq!(s.overlap_ratio, 0.0);
        let c = fixture("c", &[("t", &[("other", S, vb)])], &[]);
        let s = edge_statistical(&a.schema, &a.data, &c.schema, &c.data, &EdgeOptions::default()).unwrap();
        assert!(s.no_shared_columns());
        assert_eq!((s.dist_div, s.overlap_ratio), (0.0, 0.0));
    }

    #[test]
    fn sim_conf_examples() {
        assert_eq!(sim_conf(&[0.97]), [0.0]);
        assert_eq!(sim_conf(&[0.96, 0.95, 0.97]), [1.0 / 3.0, 0.0, 2.0 / 3.0]);
        assert_eq!(sim_conf(&[0.95; 4]), [0.0; 4]);
    }

    #[test]
    fn node_props_tsv_header() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("node_props.tsv");
        let v: &[Option<&str>] = &[Some("1")];
        let f = fixture("x", &[("t", &[("a", S, v)])], &[]);
        let mut p = profile_node(&f.schema, &f.data).unwrap();
        p.check().unwrap();
        p.cluster_id = Some(-1);
        write_node_props(&[p], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), NODE_HEADER.join("\t"));
        assert!(lines.next().unwrap().ends_with("\t-1\t"));
    }

    #[test]
    fn cluster_labels_with_header() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("clusters.tsv");
        fs::write(&path, "db_id\tcluster\n00000\t3\n00001\t-1\n").unwrap();
        let labels = read_cluster_labels(&path).unwrap();
        assert_eq!(labels["00000"], 3);
        assert_eq!(labels["00001"], -1);
    }
}
