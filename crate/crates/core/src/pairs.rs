//! Explicit TID pairs, leakage-free splits, triplet sampling and score
//! evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::DatabaseSchema;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Databases sharing a topic id, as unordered `(lo, hi)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairSet {
    pub positives: Vec<(String, String)>,
    /// Every database id, sorted.
    pub universe: Vec<String>,
    /// Topic ids of the databases that have one.
    pub tids: BTreeMap<String, String>,
}

impl PairSet {
    pub fn tid(&self, db_id: &str) -> Option<&str> {
        self.tids.get(db_id).map(String::as_str)
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (a, b) in &self.positives {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// All unordered pairs of distinct databases with equal, present TIDs.
pub fn extract_explicit_pairs<'a, I>(schemas: I) -> PairSet
where
    I: IntoIterator<Item = &'a DatabaseSchema>,
{
    let mut universe = Vec::new();
    let mut tids = BTreeMap::new();
    let mut by_tid: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let schemas: Vec<&DatabaseSchema> = schemas.into_iter().collect();
    for s in &schemas {
        universe.push(s.db_id.clone());
        if let Some(tid) = &s.tid {
            tids.insert(s.db_id.clone(), tid.clone());
            by_tid.entry(tid.as_str()).or_default().push(s.db_id.as_str());
        }
    }
    universe.sort();
    universe.dedup();

    let mut positives = Vec::new();
    for members in by_tid.values_mut() {
        members.sort_unstable();
        members.dedup();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                positives.push(((*a).to_owned(), (*b).to_owned()));
            }
        }
    }
    positives.sort();
    PairSet {
        positives,
        universe,
        tids,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidInput(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub splits: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn get(&self, db_id: &str) -> Option<Split> {
        self.splits.get(db_id).copied()
    }

    pub fn members(&self, split: Split) -> Vec<&str> {
        self.splits
            .iter()
            .filter(|(_, s)| **s == split)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// Sizes in `[train, val, test]` order.
    pub fn sizes(&self) -> [usize; 3] {
        let mut sizes = [0; 3];
        for s in self.splits.values() {
            sizes[*s as usize] += 1;
        }
        sizes
    }

    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (id, split) in &self.splits {
            out.push_str(&format!("{id}\t{split}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut splits = BTreeMap::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (id, split) = line
                .split_once('\t')
                .ok_or_else(|| Error::InvalidInput(format!("malformed split line `{line}`")))?;
            splits.insert(id.to_owned(), split.parse()?);
        }
        Ok(SplitAssignment { splits })
    }
}

/// Groups of databases connected through shared TIDs, each sorted, ordered by
/// smallest member.
pub fn tid_groups(pairs: &PairSet) -> Vec<Vec<usize>> {
    let index: HashMap<&str, usize> = pairs
        .universe
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut uf = UnionFind::<usize>::new(pairs.universe.len());
    for (a, b) in &pairs.positives {
        if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..pairs.universe.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| g[0]);
    groups
}

/// Assigns whole TID groups to train/val/test. Groups are placed largest
/// first, each into the split furthest below its ratio target; equal-sized
/// groups are ordered by a seeded shuffle.
pub fn split_pairs(pairs: &PairSet, ratios: [u32; 3], seed: u64) -> Result<SplitAssignment> {
    if ratios.contains(&0) {
        return Err(Error::InvalidInput("split ratios must be positive".into()));
    }
    let mut groups = tid_groups(pairs);
    if groups.len() < ratios.len() {
        return Err(Error::InvalidInput(format!(
            "{} groups cannot fill {} splits",
            groups.len(),
            ratios.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    groups.shuffle(&mut rng);
    groups.sort_by_key(|g| std::cmp::Reverse(g.len()));

    let total: f64 = ratios.iter().map(|&r| f64::from(r)).sum();
    let n = pairs.universe.len() as f64;
    let targets: Vec<f64> = ratios.iter().map(|&r| f64::from(r) / total * n).collect();
    let mut filled = [0usize; 3];
    let mut splits = BTreeMap::new();
    for group in groups {
        let mut best = 0;
        let mut best_deficit = f64::NEG_INFINITY;
        for (s, target) in targets.iter().enumerate() {
            let deficit = target - filled[s] as f64;
            if deficit > best_deficit {
                best = s;
                best_deficit = deficit;
            }
        }
        filled[best] += group.len();
        for i in group {
            splits.insert(pairs.universe[i].clone(), Split::ALL[best]);
        }
    }
    Ok(SplitAssignment { splits })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub anchor: String,
    pub positive: String,
    pub negatives: Vec<String>,
}

/// One triplet per ordered positive pair inside `split`, with `k` negatives
/// drawn without replacement from the split's databases whose TID is present
/// and differs from the anchor's. Anchor `i` uses the generator seeded with
/// `seed ^ i`.
pub fn sample_triplets(
    pairs: &PairSet,
    assignment: &SplitAssignment,
    split: Split,
    k: usize,
    seed: u64,
) -> Result<Vec<Triplet>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    let members = assignment.members(split);
    if members.is_empty() {
        return Err(Error::InvalidInput(format!("{split} split is empty")));
    }
    let candidates: Vec<(&str, &str)> = members
        .iter()
        .filter_map(|id| pairs.tid(id).map(|tid| (*id, tid)))
        .collect();

    let ordered: Vec<(&str, &str)> = pairs
        .positives
        .iter()
        .filter(|(a, b)| assignment.get(a) == Some(split) && assignment.get(b) == Some(split))
        .flat_map(|(a, b)| [(a.as_str(), b.as_str()), (b.as_str(), a.as_str())])
        .collect();

    ordered
        .par_iter()
        .enumerate()
        .map(|(idx, &(anchor, positive))| {
            let anchor_tid = pairs.tid(anchor);
            let pool: Vec<&str> = candidates
                .iter()
                .filter(|(_, tid)| Some(*tid) != anchor_tid)
                .map(|(id, _)| *id)
                .collect();
            if pool.len() < k {
                return Err(Error::NotEnoughNegatives {
                    anchor: anchor.to_owned(),
                    available: pool.len(),
                    requested: k,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ idx as u64);
            let negatives = rand::seq::index::sample(&mut rng, pool.len(), k)
                .into_iter()
                .map(|i| pool[i].to_owned())
                .collect();
            Ok(Triplet {
                anchor: anchor.to_owned(),
                positive: positive.to_owned(),
                negatives,
            })
        })
        .collect()
}

/// `anchor<TAB>positive<TAB>neg1,…,negk`, one triplet per line.
pub fn write_triplets(triplets: &[Triplet], path: &Path) -> Result<()> {
    let mut out = String::new();
    for t in triplets {
        out.push_str(&format!("{}\t{}\t{}\n", t.anchor, t.positive, t.negatives.join(",")));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_triplets(path: &Path) -> Result<Vec<Triplet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [anchor, positive, negatives] => Ok(Triplet {
                    anchor: (*anchor).to_owned(),
                    positive: (*positive).to_owned(),
                    negatives: negatives.split(',').map(str::to_owned).collect(),
                }),
                _ => Err(Error::InvalidInput(format!("malformed triplet line `{line}`"))),
            }
        })
        .collect()
}

/// Classification quality of similarity scores against pair labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreMetrics {
    pub auc_roc: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

/// AUC-ROC by the Mann-Whitney rank statistic (tied scores share the mean
/// rank, so a tied pos/neg pair counts 1/2), plus precision, recall and F1 of
/// the positive class at `score >= threshold`.
pub fn evaluate_scores<S: Scalar>(scored: &[(S, bool)], threshold: S) -> Result<ScoreMetrics> {
    let n_pos = scored.iter().filter(|(_, l)| *l).count();
    let n_neg = scored.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput(
            "score evaluation needs both positive and negative labels".into(),
        ));
    }
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }

    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.partial_cmp(&scored[b].0).expect("no NaN"));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scored[order[end]].0 == scored[order[start]].0 {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let pos_in_run = order[start..end].iter().filter(|&&i| scored[i].1).count();
        pos_rank_sum += mid_rank * pos_in_run as f64;
        start = end;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    let auc_roc = (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * q);

    let mut tp = 0usize;
    let mut fp = 0usize;
    for (score, label) in scored {
        if *score >= threshold {
            if *label {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = tp as f64 / p;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ScoreMetrics {
        auc_roc,
        f1,
        precision,
        recall,
    })
}
