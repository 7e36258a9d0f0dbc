//! Graph edit distance between schema graphs.
//!
//! A schema graph has one node per table and one directed edge per distinct
//! foreign-key table pair. Edits cost one each: node insertion, node
//! deletion, edge insertion, edge deletion. Mapping a node onto another is
//! free, so the distance is purely structural.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::DatabaseSchema;

pub const DEFAULT_EXACT_NODE_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SchemaGraph {
    /// Normalized table names.
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(usize, usize)>,
}

pub(crate) fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

impl SchemaGraph {
    pub fn from_schema(db: &DatabaseSchema) -> Self {
        let nodes = db.tables.iter().map(|t| normalize_name(&t.name)).collect();
        let edges = db
            .foreign_keys
            .iter()
            .filter_map(|fk| Some((db.table_index(&fk.from_table)?, db.table_index(&fk.to_table)?)))
            .collect();
        SchemaGraph { nodes, edges }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GedResult {
    pub distance: usize,
    /// False when the name-anchored upper bound was used.
    pub exact: bool,
}

/// Edit cost of a node mapping `a → b` (`None` deletes the `a` node).
pub fn mapping_cost(a: &SchemaGraph, b: &SchemaGraph, map: &[Option<usize>]) -> usize {
    let mapped = map.iter().flatten().count();
    let node_cost = (a.node_count() - mapped) + (b.node_count() - mapped);
    let preserved = a
        .edges
        .iter()
        .filter(|&&(u, v)| match (map[u], map[v]) {
            (Some(x), Some(y)) => b.edges.contains(&(x, y)),
            _ => false,
        })
        .count();
    node_cost + a.edge_count() + b.edge_count() - 2 * preserved
}

/// Upper bound: tables with equal normalized names are mapped onto each
/// other, everything else is deleted and re-inserted.
pub fn approximate_ged(a: &SchemaGraph, b: &SchemaGraph) -> usize {
    let by_name: HashMap<&str, usize> = b
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let map: Vec<Option<usize>> = a.nodes.iter().map(|n| by_name.get(n.as_str()).copied()).collect();
    mapping_cost(a, b, &map)
}

struct Search<'a> {
    a: &'a SchemaGraph,
    b: &'a SchemaGraph,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    best: usize,
}

impl Search<'_> {
    /// Cost added by fixing node `u` once nodes `0..u` are fixed: its
    /// deletion, plus each newly decided ordered pair whose edge exists on
    /// exactly one side of the mapping.
    fn step_cost(&self, u: usize) -> usize {
        let pair = |s: usize, t: usize| {
            let in_a = self.a.edges.contains(&(s, t));
            let in_b = match (self.map[s], self.map[t]) {
                (Some(x), Some(y)) => self.b.edges.contains(&(x, y)),
                _ => false,
            };
            usize::from(in_a != in_b)
        };
        let mut cost = usize::from(self.map[u].is_none()) + pair(u, u);
        for v in 0..u {
            cost += pair(u, v) + pair(v, u);
        }
        cost
    }

    /// Insertions for `b` nodes left unmapped and their incident edges.
    fn closing_cost(&self) -> usize {
        let unmapped = self.used.iter().filter(|u| !**u).count();
        let dangling = self
            .b
            .edges
            .iter()
            .filter(|&&(x, y)| !self.used[x] || !self.used[y])
            .count();
        unmapped + dangling
    }

    fn run(&mut self, u: usize, cost: usize) {
        let remaining = self.a.node_count() - u;
        let free = self.used.iter().filter(|x| !**x).count();
        if cost + remaining.abs_diff(free) >= self.best {
            return;
        }
        if u == self.a.node_count() {
            self.best = self.best.min(cost + self.closing_cost());
            return;
        }
        for x in 0..self.b.node_count() {
            if self.used[x] {
                continue;
            }
            self.used[x] = true;
            self.map[u] = Some(x);
            let c = self.step_cost(u);
            self.run(u + 1, cost + c);
            self.used[x] = false;
        }
        self.map[u] = None;
        let c = self.step_cost(u);
        self.run(u + 1, cost + c);
    }
}

/// Exact distance by depth-first branch and bound over partial node maps,
/// seeded with the name-anchored bound.
pub fn exact_ged(a: &SchemaGraph, b: &SchemaGraph) -> usize {
    let mut search = Search {
        a,
        b,
        map: vec![None; a.node_count()],
        used: vec![false; b.node_count()],
        best: approximate_ged(a, b) + 1,
    };
    search.run(0, 0);
    search.best
}

/// Exact when both graphs have at most `exact_node_limit` nodes, otherwise
/// the name-anchored upper bound.
pub fn schema_ged(a: &SchemaGraph, b: &SchemaGraph, exact_node_limit: usize) -> GedResult {
    if a.node_count().max(b.node_count()) <= exact_node_limit {
        GedResult {
            distance: exact_ged(a, b),
            exact: true,
        }
    } else {
        GedResult {
            distance: approximate_ged(a, b),
            exact: false,
        }
    }
}
