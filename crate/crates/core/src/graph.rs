//! Database graph: adjacency, connected components, degree statistics and
//! Louvain communities.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::EdgeList;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected weighted graph with sorted neighbor lists and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<W: Scalar = f64> {
    adjacency: Vec<Vec<(usize, W)>>,
    edge_count: usize,
}

impl<W: Scalar> Graph<W> {
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, W)>,
    {
        let mut adjacency: Vec<Vec<(usize, W)>> = vec![Vec::new(); node_count];
        let mut edge_count = 0;
        for (i, j, w) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::EdgeOutOfRange(i, j, node_count));
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
            edge_count += 1;
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(j, _)| j);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                let j = pair[0].0;
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
        }
        Ok(Graph {
            adjacency,
            edge_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, W)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn weighted_degree(&self, i: usize) -> W {
        self.adjacency[i].iter().map(|&(_, w)| w).sum()
    }

    /// Edges as `(i, j, w)` with `i < j`, in `(i, j)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, W)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    /// Same topology with every weight set to one.
    pub fn unit_weights(&self) -> Self {
        Graph {
            adjacency: self
                .adjacency
                .iter()
                .map(|l| l.iter().map(|&(j, _)| (j, W::one())).collect())
                .collect(),
            edge_count: self.edge_count,
        }
    }
}

/// Graph over `node_count` nodes weighted by edge similarity.
pub fn build_graph(edges: &EdgeList, node_count: usize) -> Result<Graph<f64>> {
    Graph::from_edges(node_count, edges.edges.iter().map(|e| (e.i, e.j, e.sim)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component label per node; labels are numbered by smallest member.
    pub labels: Vec<usize>,
    /// Size of each component, indexed by label.
    pub label_sizes: Vec<usize>,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    /// Degree-0 nodes.
    pub isolated: usize,
}

impl Components {
    pub fn count(&self) -> usize {
        self.label_sizes.len()
    }
}

pub fn connected_components<W: Scalar>(graph: &Graph<W>) -> Components {
    let n = graph.node_count();
    let mut uf = UnionFind::<usize>::new(n);
    for (i, j, _) in graph.edges() {
        uf.union(i, j);
    }
    let mut label_of_root = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    let mut label_sizes = Vec::new();
    for i in 0..n {
        let next = label_of_root.len();
        let label = *label_of_root.entry(uf.find(i)).or_insert(next);
        if label == label_sizes.len() {
            label_sizes.push(0);
        }
        label_sizes[label] += 1;
        labels.push(label);
    }
    let mut sizes = label_sizes.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let isolated = (0..n).filter(|&i| graph.degree(i) == 0).count();
    Components {
        labels,
        label_sizes,
        sizes,
        isolated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct Summary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    /// Lower-middle element for even counts.
    #[serde(rename = "Med")]
    pub median: usize,
}

impl Summary {
    pub fn of(values: &[usize]) -> Self {
        if values.is_empty() {
            return Summary {
                min: 0,
                max: 0,
                mean: 0.0,
                median: 0,
            };
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let total: usize = sorted.iter().sum();
        Summary {
            min: sorted[0],
            max: sorted[sorted.len() - 1],
            mean: total as f64 / sorted.len() as f64,
            median: sorted[(sorted.len() - 1) / 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    #[serde(rename = "tau", skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(rename = "#Nodes")]
    pub node_count: usize,
    #[serde(rename = "#Edges")]
    pub edge_count: usize,
    #[serde(rename = "#CCs")]
    pub cc_count: usize,
    #[serde(rename = "#INs")]
    pub isolated_count: usize,
    #[serde(rename = "Degree")]
    pub degree: Summary,
    #[serde(rename = "Connected Component")]
    pub cc_size: Summary,
}

impl GraphStats {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }
}

pub fn degree_stats<W: Scalar>(graph: &Graph<W>) -> GraphStats {
    let degrees: Vec<usize> = (0..graph.node_count()).map(|i| graph.degree(i)).collect();
    let cc = connected_components(graph);
    let mut degree = Summary::of(&degrees);
    // exact handshake form rather than a float sum
    if graph.node_count() > 0 {
        degree.mean = 2.0 * graph.edge_count() as f64 / graph.node_count() as f64;
    }
    GraphStats {
        threshold: None,
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        cc_count: cc.count(),
        isolated_count: cc.isolated,
        degree,
        cc_size: Summary::of(&cc.label_sizes),
    }
}

/// Weighted Newman modularity at resolution 1:
/// `Q = Σ_c [ in_c / 2m − (tot_c / 2m)² ]`, where `in_c` counts internal
/// weight from both endpoints. An edgeless graph has `Q = 0`.
pub fn modularity<W: Scalar>(graph: &Graph<W>, communities: &[usize]) -> Result<W> {
    if communities.len() != graph.node_count() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} of {} nodes",
            communities.len(),
            graph.node_count()
        )));
    }
    let mut internal: HashMap<usize, W> = HashMap::new();
    let mut total: HashMap<usize, W> = HashMap::new();
    let mut two_m = W::zero();
    for i in 0..graph.node_count() {
        let c = communities[i];
        for &(j, w) in graph.neighbors(i) {
            two_m = two_m + w;
            let t = total.entry(c).or_insert_with(W::zero);
            *t = *t + w;
            if communities[j] == c {
                let s = internal.entry(c).or_insert_with(W::zero);
                *s = *s + w;
            }
        }
    }
    if two_m == W::zero() {
        return Ok(W::zero());
    }
    let mut keys: Vec<usize> = total.keys().copied().collect();
    keys.sort_unstable();
    Ok(keys
        .into_iter()
        .map(|c| {
            let inside = internal.get(&c).copied().unwrap_or_else(W::zero) / two_m;
            let share = total[&c] / two_m;
            inside - share * share
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Community per node, numbered by first occurrence.
    pub communities: Vec<usize>,
    pub modularity: f64,
    /// Modularity of the singleton start followed by each accepted pass.
    pub pass_modularity: Vec<f64>,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.communities.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count()];
        for &c in &self.communities {
            sizes[c] += 1;
        }
        sizes
    }

    /// `node_id<TAB>community_id` lines.
    pub fn write_tsv(&self, ids: &[String], path: &Path) -> Result<()> {
        let mut out = String::new();
        for (id, c) in ids.iter().zip(&self.communities) {
            out.push_str(&format!("{id}\t{c}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Symmetric weighted graph whose diagonal carries collapsed internal weight.
struct Level<W> {
    adjacency: Vec<Vec<(usize, W)>>,
    strength: Vec<W>,
    two_m: W,
}

impl<W: Scalar> Level<W> {
    fn from_graph(graph: &Graph<W>) -> Self {
        let adjacency: Vec<Vec<(usize, W)>> =
            (0..graph.node_count()).map(|i| graph.neighbors(i).to_vec()).collect();
        Self::new(adjacency)
    }

    fn new(adjacency: Vec<Vec<(usize, W)>>) -> Self {
        let strength: Vec<W> = adjacency
            .iter()
            .map(|l| l.iter().map(|&(_, w)| w).sum())
            .collect();
        let two_m = strength.iter().copied().sum();
        Level {
            adjacency,
            strength,
            two_m,
        }
    }

    /// Greedy local moves until a sweep changes nothing. Returns the
    /// community per level node and whether anything moved.
    fn local_moving(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.adjacency.len();
        let mut community: Vec<usize> = (0..n).collect();
        let mut total: Vec<W> = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let eps = W::from_f64_lossy(1e-12);
        let mut moved_any = false;
        let mut link: Vec<W> = vec![W::zero(); n];
        let mut touched: Vec<usize> = Vec::new();

        loop {
            let mut moved = false;
            for &i in &order {
                let ci = community[i];
                let ki = self.strength[i];
                for &(j, w) in &self.adjacency[i] {
                    if j == i {
                        continue;
                    }
                    let cj = community[j];
                    if link[cj] == W::zero() {
                        touched.push(cj);
                    }
                    link[cj] = link[cj] + w;
                }
                total[ci] = total[ci] - ki;
                let gain = |c: usize, link_c: W| link_c - total[c] * ki / self.two_m;
                let mut best = ci;
                let mut best_gain = gain(ci, link[ci]);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain + eps {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] = total[best] + ki;
                for &c in &touched {
                    link[c] = W::zero();
                }
                touched.clear();
                if best != ci {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (compact(&community), moved_any)
    }

    fn aggregate(&self, community: &[usize]) -> Self {
        let k = community.iter().max().map_or(0, |&m| m + 1);
        let mut merged: Vec<BTreeMap<usize, W>> = vec![BTreeMap::new(); k];
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list {
                let e = merged[community[i]].entry(community[j]).or_insert_with(W::zero);
                *e = *e + w;
            }
        }
        Self::new(merged.into_iter().map(|m| m.into_iter().collect()).collect())
    }
}

/// Relabels to `0..k` by first occurrence.
fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Two-phase Louvain (local moving, then aggregation) at resolution 1.
///
/// Node visit order within each level comes from a generator seeded with
/// `seed`. A pass is kept only if it strictly raises modularity; at most
/// `max_passes` passes run.
pub fn louvain<W: Scalar>(graph: &Graph<W>, seed: u64, max_passes: usize) -> Partition {
    let n = graph.node_count();
    let mut membership: Vec<usize> = (0..n).collect();
    let start = modularity(graph, &membership)
        .expect("full cover")
        .to_f64_lossy();
    let mut pass_modularity = vec![start];
    if graph.edge_count() == 0 {
        return Partition {
            communities: membership,
            modularity: start,
            pass_modularity,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::from_graph(graph);
    let mut current = start;
    for _ in 0..max_passes {
        let (local, moved) = level.local_moving(&mut rng);
        if !moved {
            break;
        }
        let candidate: Vec<usize> = membership.iter().map(|&m| local[m]).collect();
        let q = modularity(graph, &candidate)
            .expect("full cover")
            .to_f64_lossy();
        if q <= current + 1e-12 {
            break;
        }
        level = level.aggregate(&local);
        membership = candidate;
        current = q;
        pass_modularity.push(q);
    }
    Partition {
        communities: compact(&membership),
        modularity: current,
        pass_modularity,
    }
}

/// Value → count histogram with a power-of-two binned view.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl IntHistogram {
    pub fn from_values<I: IntoIterator<Item = usize>>(values: I) -> Self {
        let mut counts = BTreeMap::new();
        for v in values {
            *counts.entry(v).or_insert(0) += 1;
        }
        IntHistogram { counts }
    }

    /// Non-empty bins `[0, 1)`, `[1, 2)`, `[2, 4)`, `[4, 8)`, ...
    pub fn log_bins(&self) -> Vec<(usize, usize, usize)> {
        let mut bins: BTreeMap<usize, usize> = BTreeMap::new();
        for (&v, &c) in &self.counts {
            let lo = if v == 0 { 0 } else { 1 << v.ilog2() };
            *bins.entry(lo).or_insert(0) += c;
        }
        bins.into_iter()
            .map(|(lo, c)| (lo, if lo == 0 { 1 } else { lo * 2 }, c))
            .collect()
    }

    /// `kind lo hi count`: linear rows have `lo == hi == value`, log rows
    /// cover `[lo, hi)`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("kind\tlo\thi\tcount\n");
        for (v, c) in &self.counts {
            out.push_str(&format!("linear\t{v}\t{v}\t{c}\n"));
        }
        for (lo, hi, c) in self.log_bins() {
            out.push_str(&format!("log\t{lo}\t{hi}\t{c}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distributions {
    pub degree: IntHistogram,
    pub cc_size: IntHistogram,
    pub community_size: IntHistogram,
}

pub fn export_distributions<W: Scalar>(graph: &Graph<W>, partition: &Partition) -> Distributions {
    let cc = connected_components(graph);
    Distributions {
        degree: IntHistogram::from_values((0..graph.node_count()).map(|i| graph.degree(i))),
        cc_size: IntHistogram::from_values(cc.label_sizes.iter().copied()),
        community_size: IntHistogram::from_values(partition.community_sizes()),
    }
}

impl Distributions {
    /// `degree.tsv`, `cc_size.tsv`, `community_size.tsv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, hist) in [
            ("degree.tsv", &self.degree),
            ("cc_size.tsv", &self.cc_size),
            ("community_size.tsv", &self.community_size),
        ] {
            let path = dir.join(name);
            fs::write(&path, hist.to_tsv()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn unweighted(n: usize, edges: &[(usize, usize)]) -> Graph<f64> {
        Graph::from_edges(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    pub(crate) fn two_cliques() -> Graph<f64> {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        edges.push((3, 4));
        unweighted(8, &edges)
    }

    /// Exhaustive maximum modularity over all set partitions.
    pub(crate) fn best_partition(graph: &Graph<f64>) -> (f64, Vec<usize>) {
        fn walk(g: &Graph<f64>, labels: &mut Vec<usize>, next: usize, best: &mut (f64, Vec<usize>)) {
            if labels.len() == g.node_count() {
                let q = modularity(g, labels).unwrap();
                if q > best.0 + 1e-12 {
                    *best = (q, labels.clone());
                }
                return;
            }
            for c in 0..=next {
                labels.push(c);
                walk(g, labels, next.max(c + 1), best);
                labels.pop();
            }
        }
        let mut best = (f64::NEG_INFINITY, vec![]);
        walk(graph, &mut Vec::new(), 0, &mut best);
        best
    }

    #[test]
    fn build_examples() {
        let g = unweighted(4, &[(0, 1), (1, 2)]);
        let degrees: Vec<_> = (0..4).map(|i| g.degree(i)).collect();
        assert_eq!(degrees, [1, 2, 1, 0]);
        let empty = unweighted(5, &[]);
        assert_eq!(connected_components(&empty).isolated, 5);
        assert!(matches!(
            Graph::from_edges(3, [(0, 1, 1.0), (0, 1, 1.0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(Graph::from_edges(2, [(0, 2, 1.0)]).is_err());
        assert!(Graph::from_edges(2, [(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn component_examples() {
        let path = unweighted(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(connected_components(&path).sizes, [4]);
        let cc = connected_components(&unweighted(5, &[]));
        assert_eq!((cc.count(), cc.isolated), (5, 5));
        let g = unweighted(8, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let cc = connected_components(&g);
        assert_eq!(cc.sizes, [3, 3, 1, 1]);
        assert_eq!((cc.count(), cc.isolated), (4, 2));
        assert_eq!(cc.labels, [0, 0, 0, 1, 1, 1, 2, 3]);
    }

    #[test]
    fn degree_examples() {
        let star = unweighted(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let s = degree_stats(&star);
        assert_eq!((s.degree.min, s.degree.max, s.degree.median), (1, 4, 1));
        assert!((s.degree.mean - 1.6).abs() < 1e-15);
        let s = degree_stats(&unweighted(3, &[]));
        assert_eq!((s.degree.min, s.degree.max, s.degree.median), (0, 0, 0));
        assert_eq!(s.degree.mean, 0.0);
        assert_eq!(Summary::of(&[4, 1, 3, 2]).median, 2);
    }

    #[test]
    fn stats_json_uses_table_headers() {
        let json = degree_stats(&unweighted(2, &[(0, 1)])).to_json();
        for key in ["\"#Nodes\"", "\"#Edges\"", "\"#CCs\"", "\"#INs\"", "\"Med\"", "\"Connected Component\""] {
            assert!(json.contains(key), "{key} missing from {json}");
        }
    }

    #[test]
    fn modularity_examples() {
        let g = two_cliques();
        assert_eq!(modularity(&g, &[0; 8]).unwrap(), 0.0);
        let singletons: Vec<usize> = (0..8).collect();
        assert!(modularity(&g, &singletons).unwrap() < 0.0);
        let q = modularity(&g, &[0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
        // frozen from `best_partition`: 11/26
        assert!((q - 0.423_076_923_076_923).abs() < 1e-12);
        assert_eq!(modularity(&unweighted(3, &[]), &[0, 1, 2]).unwrap(), 0.0);
        assert!(modularity(&g, &[0; 3]).is_err());
    }

    #[test]
    fn exhaustive_oracle_on_two_cliques() {
        let (q, labels) = best_partition(&two_cliques());
        assert_eq!(labels, [0, 0, 0, 0, 1, 1, 1, 1]);
        assert!((q - 11.0 / 26.0).abs() < 1e-12);
    }

    #[test]
    fn louvain_recovers_cliques() {
        let g = two_cliques();
        for seed in 0..10 {
            let p = louvain(&g, seed, 10);
            assert_eq!(p.communities, [0, 0, 0, 0, 1, 1, 1, 1]);
            assert!((p.modularity - 11.0 / 26.0).abs() < 1e-12);
        }
        assert_eq!(louvain(&g, 3, 10), louvain(&g, 3, 10));
    }

    #[test]
    fn louvain_edgeless_is_singletons() {
        let p = louvain(&unweighted(4, &[]), 0, 10);
        assert_eq!(p.communities, [0, 1, 2, 3]);
        assert_eq!(p.modularity, 0.0);
    }

    #[test]
    fn louvain_generic_over_f32() {
        let g: Graph<f32> = Graph::from_edges(
            8,
            two_cliques().edges().map(|(i, j, w)| (i, j, w as f32)),
        )
        .unwrap();
        assert_eq!(louvain(&g, 1, 10).communities, [0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn distributions_examples() {
        let g = two_cliques();
        let d = export_distributions(&g, &louvain(&g, 0, 10));
        assert_eq!(d.community_size.counts, BTreeMap::from([(4, 2)]));
        let path = unweighted(3, &[(0, 1), (1, 2)]);
        let d = export_distributions(&path, &louvain(&path, 0, 10));
        assert_eq!(d.cc_size.counts, BTreeMap::from([(3, 1)]));
        let empty = unweighted(4, &[]);
        let d = export_distributions(&empty, &louvain(&empty, 0, 10));
        assert_eq!(d.degree.counts, BTreeMap::from([(0, 4)]));
    }

    #[test]
    fn log_bins() {
        let h = IntHistogram::from_values([0, 1, 2, 3, 4, 7, 8]);
        assert_eq!(h.log_bins(), [(0, 1, 1), (1, 2, 1), (2, 4, 2), (4, 8, 2), (8, 16, 1)]);
        assert!(h.to_tsv().starts_with("kind\tlo\thi\tcount\nlinear\t0\t0\t1\n"));
    }

    fn random_graph(seed: u64, n: usize, p: f64) -> Graph<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((i, j, rng.gen_range(0.9..1.0)));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn louvain_matches_oracle_on_small_graphs() {
        // Louvain is greedy; on tiny graphs it should land near the optimum
        for seed in 0..10 {
            let g = random_graph(seed, 7, 0.4);
            let p = louvain(&g, seed, 10);
            let (best, _) = best_partition(&g);
            assert!(p.modularity <= best + 1e-12);
            assert!(p.modularity >= best - 0.1, "seed {seed}: {} vs {best}", p.modularity);
        }
    }

    proptest! {
        #[test]
        fn stats_self_consistent(seed in any::<u64>(), n in 1usize..40, p in 0.0f64..0.3) {
            let g = random_graph(seed, n, p);
            let s = degree_stats(&g);
            let cc = connected_components(&g);
            prop_assert_eq!(cc.sizes.iter().sum::<usize>(), n);
            prop_assert_eq!(s.isolated_count, (0..n).filter(|&i| g.degree(i) == 0).count());
            prop_assert!(s.isolated_count <= s.cc_count);
            let degree_sum: usize = (0..n).map(|i| g.degree(i)).sum();
            prop_assert!((s.degree.mean - degree_sum as f64 / n as f64).abs() < 1e-12);
        }

        #[test]
        fn components_invariant_under_edge_order(seed in any::<u64>(), n in 1usize..30) {
            let g = random_graph(seed, n, 0.1);
            let mut edges: Vec<_> = g.edges().collect();
            edges.reverse();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            edges.shuffle(&mut rng);
            let h = Graph::from_edges(n, edges.into_iter().map(|(i, j, w)| (j, i, w))).unwrap();
            prop_assert_eq!(connected_components(&g), connected_components(&h));
        }

        #[test]
        fn louvain_passes_non_decreasing(seed in any::<u64>(), n in 2usize..60) {
            let g = random_graph(seed, n, 0.15);
            let p = louvain(&g, seed, 20);
            prop_assert!(p.pass_modularity.windows(2).all(|w| w[1] > w[0]));
            prop_assert!((modularity(&g, &p.communities).unwrap() - p.modularity).abs() < 1e-9);
            prop_assert!(p.modularity >= p.pass_modularity[0]);
        }
    }
}
