//! Unit-normalized embedding storage and the all-pairs cosine threshold join.
//!
//! Rows are normalized once at construction so similarity is a plain dot
//! product. Products are accumulated in `f64` regardless of the storage
//! scalar: edge membership at the threshold boundary depends on it.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DIM: usize = 768;
pub const DEFAULT_THRESHOLD: f64 = 0.94;
/// Thresholds with published graph statistics.
pub const THRESHOLD_PRESETS: [f64; 3] = [0.93, 0.94, 0.96];
pub const DEFAULT_TILE: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<S: Scalar = f32> {
    ids: Vec<String>,
    dim: usize,
    data: Vec<S>,
    /// L2 norms of the rows as supplied, before normalization.
    source_norms: Vec<f64>,
}

impl<S: Scalar> EmbeddingMatrix<S> {
    /// Validates and normalizes a row-major `ids.len() × dim` buffer.
    pub fn from_rows(ids: Vec<String>, dim: usize, mut data: Vec<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        let expected = ids.len() * dim;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: data.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        let mut source_norms = Vec::with_capacity(ids.len());
        for (row, chunk) in data.chunks_mut(dim).enumerate() {
            if let Some(col) = chunk.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col });
            }
            let norm = dot(chunk, chunk).sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroNorm(row));
            }
            for v in chunk.iter_mut() {
                *v = S::from_f64_lossy(v.to_f64_lossy() / norm);
            }
            source_norms.push(norm);
        }
        Ok(EmbeddingMatrix {
            ids,
            dim,
            data,
            source_norms,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn source_norms(&self) -> &[f64] {
        &self.source_norms
    }

    /// Similarity of two stored rows.
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        clamp_unit(dot(self.row(i), self.row(j)))
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Sequential `f64` dot product; the fixed summation order makes tiled and
/// naive joins agree bitwise.
#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc + x.to_f64_lossy() * y.to_f64_lossy())
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

pub fn cosine_similarity<S: Scalar>(a: &[S], b: &[S]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 {
        return Err(Error::ZeroNorm(0));
    }
    if nb == 0.0 {
        return Err(Error::ZeroNorm(1));
    }
    Ok(clamp_unit(dot(a, b) / (na * nb)))
}

#[derive(Debug, Serialize, Deserialize)]
struct StoreMeta {
    ids: Vec<String>,
    dim: usize,
    count: usize,
}

/// `<prefix>.f32le` and `<prefix>.meta.json`.
pub fn store_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let base = prefix.as_os_str().to_owned();
    let mut data = base.clone();
    data.push(".f32le");
    let mut meta = base;
    meta.push(".meta.json");
    (PathBuf::from(data), PathBuf::from(meta))
}

/// Writes row-major little-endian `f32` values plus JSON metadata.
pub fn store_embeddings<S: Scalar>(matrix: &EmbeddingMatrix<S>, prefix: &Path) -> Result<()> {
    let (data_path, meta_path) = store_paths(prefix);
    if let Some(parent) = data_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut bytes = Vec::with_capacity(matrix.data.len() * 4);
    for v in &matrix.data {
        let v = v.to_f32().expect("float conversion");
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&data_path, bytes).map_err(|e| Error::io(&data_path, e))?;
    let meta = StoreMeta {
        ids: matrix.ids.clone(),
        dim: matrix.dim,
        count: matrix.len(),
    };
    let mut text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    text.push('\n');
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
}

pub fn load_embeddings<S: Scalar>(prefix: &Path) -> Result<EmbeddingMatrix<S>> {
    let (data_path, meta_path) = store_paths(prefix);
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: StoreMeta = serde_json::from_str(&text).map_err(|source| Error::Descriptor {
        path: meta_path.clone(),
        source,
    })?;
    if meta.count != meta.ids.len() {
        return Err(Error::InvalidInput(format!(
            "{}: count {} disagrees with {} ids",
            meta_path.display(),
            meta.count,
            meta.ids.len()
        )));
    }
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let expected = meta.count * meta.dim;
    if bytes.len() % 4 != 0 || bytes.len() / 4 != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: bytes.len() / 4,
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| S::from_f32(f32::from_le_bytes([c[0], c[1], c[2], c[3]])).expect("float conversion"))
        .collect();
    EmbeddingMatrix::from_rows(meta.ids, meta.dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub sim: f64,
}

/// Thresholded similarity edges with `i < j`, sorted by `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub edges: Vec<Edge>,
    pub threshold: f64,
}

impl EdgeList {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `src_id<TAB>dst_id<TAB>sim` with six decimals.
    pub fn write_tsv(&self, ids: &[String], path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.edges.len() * 32);
        for e in &self.edges {
            out.push_str(&format!("{}\t{}\t{:.6}\n", ids[e.i], ids[e.j], e.sim));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_tsv(path: &Path, ids: &[String], threshold: f64) -> Result<Self> {
        let index: std::collections::HashMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut edges = Vec::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let bad = || Error::InvalidInput(format!("malformed edge line `{line}`"));
            let mut fields = line.split('\t');
            let (Some(a), Some(b), Some(sim), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad());
            };
            let unknown = |id: &str| Error::InvalidInput(format!("edge references unknown id `{id}`"));
            let i = *index.get(a).ok_or_else(|| unknown(a))?;
            let j = *index.get(b).ok_or_else(|| unknown(b))?;
            let sim: f64 = sim.parse().map_err(|_| bad())?;
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            edges.push(Edge { i, j, sim });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        Ok(EdgeList { edges, threshold })
    }
}

fn check_join_args(threshold: f64, tile: usize) -> Result<()> {
    if !(threshold > -1.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!("threshold {threshold} outside (-1, 1]")));
    }
    if tile == 0 {
        return Err(Error::InvalidInput("tile size must be >= 1".into()));
    }
    Ok(())
}

/// Every pair `i < j` with cosine similarity `>= threshold`.
///
/// The upper triangle is cut into `tile × tile` blocks processed on the
/// current rayon pool; per-block buffers are merged and sorted at the end, so
/// the result does not depend on tile size or worker count.
pub fn threshold_join<S: Scalar>(
    matrix: &EmbeddingMatrix<S>,
    threshold: f64,
    tile: usize,
) -> Result<EdgeList> {
    check_join_args(threshold, tile)?;
    let n = matrix.len();
    let blocks = n.div_ceil(tile);
    let tiles: Vec<(usize, usize)> = (0..blocks)
        .flat_map(|bi| (bi..blocks).map(move |bj| (bi, bj)))
        .collect();

    let mut edges: Vec<Edge> = tiles
        .par_iter()
        .flat_map_iter(|&(bi, bj)| {
            let mut buf = Vec::new();
            let rows_i = bi * tile..((bi + 1) * tile).min(n);
            for i in rows_i {
                let a = matrix.row(i);
                let start_j = if bi == bj { i + 1 } else { bj * tile };
                for j in start_j..((bj + 1) * tile).min(n) {
                    let sim = clamp_unit(dot(a, matrix.row(j)));
                    if sim >= threshold {
                        buf.push(Edge { i, j, sim });
                    }
                }
            }
            buf
        })
        .collect();
    edges.sort_unstable_by_key(|e| (e.i, e.j));
    Ok(EdgeList { edges, threshold })
}

/// [`threshold_join`] on a dedicated pool of `workers` threads; `0` uses the
/// global pool.
pub fn threshold_join_with_workers<S: Scalar>(
    matrix: &EmbeddingMatrix<S>,
    threshold: f64,
    tile: usize,
    workers: usize,
) -> Result<EdgeList> {
    if workers == 0 {
        return threshold_join(matrix, threshold, tile);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| threshold_join(matrix, threshold, tile))
}

/// Histogram of pairwise cosines over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHistogram {
    pub counts: Vec<u64>,
}

impl SimilarityHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(sim: f64, bins: usize) -> usize {
        let idx = ((sim + 1.0) / 2.0 * bins as f64).floor();
        (idx.max(0.0) as usize).min(bins - 1)
    }

    /// Lower and upper edge of bin `b`.
    pub fn bin_range(&self, b: usize) -> (f64, f64) {
        let width = 2.0 / self.bins() as f64;
        (-1.0 + b as f64 * width, -1.0 + (b + 1) as f64 * width)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total().max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        self.fractions()
            .iter()
            .zip(other.fractions())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0
    }
}

/// Exact histogram over all `i < j` pairs, or `sample_pairs` uniformly drawn
/// pairs (with replacement) when given.
pub fn similarity_histogram<S: Scalar>(
    matrix: &EmbeddingMatrix<S>,
    bins: usize,
    sample_pairs: Option<usize>,
    seed: u64,
) -> Result<SimilarityHistogram> {
    if bins == 0 {
        return Err(Error::InvalidInput("bins must be >= 1".into()));
    }
    let n = matrix.len();
    let mut counts = vec![0u64; bins];
    if n < 2 {
        return Ok(SimilarityHistogram { counts });
    }
    match sample_pairs {
        None => {
            counts = (0..n)
                .into_par_iter()
                .fold(
                    || vec![0u64; bins],
                    |mut acc, i| {
                        for j in i + 1..n {
                            acc[SimilarityHistogram::bin_of(matrix.similarity(i, j), bins)] += 1;
                        }
                        acc
                    },
                )
                .reduce(
                    || vec![0u64; bins],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                );
        }
        Some(samples) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                counts[SimilarityHistogram::bin_of(matrix.similarity(i, j), bins)] += 1;
            }
        }
    }
    Ok(SimilarityHistogram { counts })
}
