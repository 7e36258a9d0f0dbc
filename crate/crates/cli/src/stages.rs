//! Pipeline stages. Each reads its inputs from the corpus or earlier stage
//! outputs, writes its artifacts under the output directory and records a
//! manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use rayon::prelude::*;

use dbgraph::corpus::{load_corpus, Corpus};
use dbgraph::embeddings::{load_embeddings, store_embeddings, store_paths, threshold_join_with_workers, EdgeList};
use dbgraph::graph::{build_graph, degree_stats, export_distributions, louvain};
use dbgraph::pairs::{extract_explicit_pairs, sample_triplets, split_pairs, write_triplets, Split};
use dbgraph::profiler::{
    profile_edge, profile_node, read_cluster_labels, sim_conf, write_edge_props, write_node_props, EdgeOptions,
    KlDirection,
};
use dbgraph::serializer::{read_abstracts, serialize_abstract, write_abstracts};
use dbgraph::{EmbeddingMatrixF32, SimilarityGraph};

use crate::config::Settings;
use crate::error::{CliError, Result};
use crate::fetch::{fetch_embeddings, Endpoint};
use crate::manifest::Manifest;

pub const CORPUS_MANIFEST: &str = "corpus_manifest.tsv";
pub const DIAGNOSTICS: &str = "diagnostics.tsv";
pub const ABSTRACTS: &str = "abstracts";
pub const PAIRS: &str = "pairs";
pub const EMBEDDINGS: &str = "embeddings";
pub const NODES: &str = "nodes.tsv";
pub const EDGES: &str = "edges.tsv";
pub const GRAPH_STATS: &str = "graph_stats.json";
pub const COMMUNITIES: &str = "communities.tsv";
pub const COMMUNITY_SUMMARY: &str = "communities.json";
pub const DISTRIBUTIONS: &str = "distributions";
pub const NODE_PROPS: &str = "node_props.tsv";
pub const EDGE_PROPS: &str = "edge_props.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Serialize,
    Pairs,
    Join,
    GraphStats,
    Communities,
    NodeProps,
    EdgeProps,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Serialize,
        Stage::Pairs,
        Stage::Join,
        Stage::GraphStats,
        Stage::Communities,
        Stage::NodeProps,
        Stage::EdgeProps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Serialize => "serialize",
            Stage::Pairs => "pairs",
            Stage::Join => "join",
            Stage::GraphStats => "graph-stats",
            Stage::Communities => "communities",
            Stage::NodeProps => "node-props",
            Stage::EdgeProps => "edge-props",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.to_owned()))
    }
}

fn write(path: &Path, text: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect())
}

pub struct Pipeline {
    pub settings: Settings,
    corpus: OnceLock<Corpus>,
}

impl Pipeline {
    pub fn new(settings: Settings) -> Self {
        Pipeline {
            settings,
            corpus: OnceLock::new(),
        }
    }

    fn out(&self) -> &Path {
        &self.settings.config.output_dir
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.out().join(name)
    }

    fn manifest(&self, stage: Stage) -> Manifest {
        Manifest::new(stage.name(), &self.settings.config_sha256)
    }

    fn corpus(&self, m: &mut Manifest) -> Result<&Corpus> {
        let root = &self.settings.config.corpus_root;
        require(root)?;
        if self.corpus.get().is_none() {
            let corpus = load_corpus(root)?;
            for d in &corpus.diagnostics {
                eprintln!("{d}");
            }
            let _ = self.corpus.set(corpus);
        }
        m.input_dir("corpus", root)?;
        Ok(self.corpus.get().expect("set above"))
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        fs::create_dir_all(self.out()).map_err(|e| CliError::io(self.out(), e))?;
        let mut m = self.manifest(stage);
        match stage {
            Stage::Ingest => self.ingest(&mut m)?,
            Stage::Serialize => self.serialize(&mut m)?,
            Stage::Pairs => self.pairs(&mut m)?,
            Stage::Join => self.join(&mut m)?,
            Stage::GraphStats => self.graph_stats(&mut m)?,
            Stage::Communities => self.communities(&mut m)?,
            Stage::NodeProps => self.node_props(&mut m)?,
            Stage::EdgeProps => self.edge_props(&mut m)?,
        }
        m.write(self.out())
    }

    pub fn run_all(&self) -> Result<()> {
        Stage::ALL.iter().try_for_each(|&s| self.run(s))
    }

    fn ingest(&self, m: &mut Manifest) -> Result<()> {
        let corpus = self.corpus(m)?;
        corpus.write_manifest(&self.out_path(CORPUS_MANIFEST))?;
        let mut diag = String::from("db_id\tseverity\tmessage\n");
        for d in &corpus.diagnostics {
            let severity = match d.severity {
                dbgraph::corpus::Severity::Warning => "warning",
                dbgraph::corpus::Severity::Error => "skipped",
            };
            diag.push_str(&format!("{}\t{severity}\t{}\n", d.db_id, d.message.replace(['\t', '\n'], " ")));
        }
        write(&self.out_path(DIAGNOSTICS), diag)?;
        m.output(self.out(), CORPUS_MANIFEST)?;
        m.output(self.out(), DIAGNOSTICS)
    }

    fn serialize(&self, m: &mut Manifest) -> Result<()> {
        let corpus = self.corpus(m)?;
        let k = self.settings.config.samples_per_column;
        let abstracts = corpus
            .databases
            .par_iter()
            .map(|db| Ok(serialize_abstract(&db.schema, db.data()?, k)?))
            .collect::<Result<Vec<_>>>()?;
        let dir = self.out_path(ABSTRACTS);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        }
        write_abstracts(&abstracts, &dir)?;
        m.output_dir(self.out(), ABSTRACTS)
    }

    fn pairs(&self, m: &mut Manifest) -> Result<()> {
        let corpus = self.corpus(m)?;
        let cfg = &self.settings.config;
        let pairs = extract_explicit_pairs(corpus.schemas());
        let splits = split_pairs(&pairs, cfg.split_ratios, cfg.seed)?;
        let triplets = sample_triplets(&pairs, &splits, Split::Train, cfg.negatives_k, cfg.seed)?;

        let dir = self.out_path(PAIRS);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        pairs.write_tsv(&dir.join("positives.tsv"))?;
        splits.write_tsv(&dir.join("splits.tsv"))?;
        write_triplets(&triplets, &dir.join("triplets.tsv"))?;
        m.output_dir(self.out(), PAIRS)
    }

    fn embeddings(&self, m: &mut Manifest) -> Result<EmbeddingMatrixF32> {
        let cfg = &self.settings.config;
        let store = cfg.embedding_store.clone().unwrap_or_else(|| self.out_path(EMBEDDINGS));
        let (data_path, meta_path) = store_paths(&store);
        let stored = data_path.exists() && meta_path.exists();

        if let Some(url) = &cfg.embedding_endpoint {
            let dir = self.out_path(ABSTRACTS);
            require(&dir.join("manifest.tsv"))?;
            let abstracts = read_abstracts(&dir)?;
            m.input_dir(ABSTRACTS, &dir)?;
            let endpoint = Endpoint {
                url: url.clone(),
                dim: cfg.embedding_dim,
                batch_size: cfg.batch_size,
                max_retries: cfg.max_retries,
                timeout: Duration::from_secs(cfg.request_timeout_secs),
            };
            match fetch_embeddings(&abstracts, &endpoint) {
                Ok(matrix) => {
                    let prefix = self.out_path(EMBEDDINGS);
                    store_embeddings(&matrix, &prefix)?;
                    m.output(self.out(), "embeddings.f32le")?;
                    m.output(self.out(), "embeddings.meta.json")?;
                    return Ok(matrix);
                }
                Err(CliError::Service(e)) if stored => {
                    eprintln!("warning: {e}; using {}", data_path.display());
                }
                Err(e) => return Err(e),
            }
        }

        require(&meta_path)?;
        require(&data_path)?;
        m.input("embeddings.f32le", &data_path)?;
        m.input("embeddings.meta.json", &meta_path)?;
        let matrix = load_embeddings::<f32>(&store)?;
        if matrix.dim() != cfg.embedding_dim {
            return Err(CliError::Invariant(format!(
                "{} holds {}-dim vectors, {} configured",
                data_path.display(),
                matrix.dim(),
                cfg.embedding_dim
            )));
        }
        Ok(matrix)
    }

    fn join(&self, m: &mut Manifest) -> Result<()> {
        let cfg = &self.settings.config;
        let matrix = self.embeddings(m)?;
        let edges = threshold_join_with_workers(&matrix, cfg.threshold, cfg.tile, cfg.workers)?;
        let mut nodes = matrix.ids().join("\n");
        nodes.push('\n');
        write(&self.out_path(NODES), nodes)?;
        edges.write_tsv(matrix.ids(), &self.out_path(EDGES))?;
        m.output(self.out(), NODES)?;
        m.output(self.out(), EDGES)
    }

    /// Node ids and the thresholded graph from the join outputs.
    fn graph(&self, m: &mut Manifest) -> Result<(Vec<String>, EdgeList, SimilarityGraph)> {
        let (nodes, edges) = (self.out_path(NODES), self.out_path(EDGES));
        require(&nodes)?;
        require(&edges)?;
        m.input(NODES, &nodes)?;
        m.input(EDGES, &edges)?;
        let ids = read_lines(&nodes)?;
        let list = EdgeList::read_tsv(&edges, &ids, self.settings.config.threshold)?;
        let graph = build_graph(&list, ids.len())?;
        Ok((ids, list, graph))
    }

    fn graph_stats(&self, m: &mut Manifest) -> Result<()> {
        let (_, _, graph) = self.graph(m)?;
        let mut stats = degree_stats(&graph);
        stats.threshold = Some(self.settings.config.threshold);
        let cc = dbgraph::graph::connected_components(&graph);
        let isolated = (0..graph.node_count()).filter(|&i| graph.degree(i) == 0).count();
        if cc.label_sizes.iter().sum::<usize>() != graph.node_count() || stats.isolated_count != isolated {
            return Err(CliError::Invariant("component sizes disagree with the node count".into()));
        }
        write(&self.out_path(GRAPH_STATS), stats.to_json())?;
        m.output(self.out(), GRAPH_STATS)
    }

    fn communities(&self, m: &mut Manifest) -> Result<()> {
        let cfg = &self.settings.config;
        let (ids, _, graph) = self.graph(m)?;
        let graph = if cfg.unit_weights { graph.unit_weights() } else { graph };
        let partition = louvain(&graph, cfg.seed, cfg.louvain_max_passes);
        if partition.pass_modularity.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Invariant("modularity decreased across passes".into()));
        }
        partition.write_tsv(&ids, &self.out_path(COMMUNITIES))?;
        let summary = serde_json::json!({
            "communities": partition.community_count(),
            "modularity": partition.modularity,
            "pass_modularity": partition.pass_modularity,
        });
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        write(&self.out_path(COMMUNITY_SUMMARY), text)?;
        export_distributions(&graph, &partition).write(&self.out_path(DISTRIBUTIONS))?;
        m.output(self.out(), COMMUNITIES)?;
        m.output(self.out(), COMMUNITY_SUMMARY)?;
        m.output_dir(self.out(), DISTRIBUTIONS)
    }

    fn node_props(&self, m: &mut Manifest) -> Result<()> {
        let cfg = &self.settings.config;
        let communities_path = self.out_path(COMMUNITIES);
        require(&communities_path)?;
        m.input(COMMUNITIES, &communities_path)?;
        let communities = read_communities(&communities_path)?;
        let clusters = match &cfg.cluster_labels {
            Some(path) => {
                require(path)?;
                m.input("cluster_labels", path)?;
                read_cluster_labels(path)?
            }
            None => BTreeMap::new(),
        };
        let corpus = self.corpus(m)?;
        let profiles = corpus
            .databases
            .par_iter()
            .map(|db| {
                let mut p = profile_node(&db.schema, db.data()?)?;
                p.community_id = communities.get(&p.db_id).copied();
                p.cluster_id = clusters.get(&p.db_id).copied();
                p.check().map_err(|e| CliError::Invariant(e.to_string()))?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        write_node_props(&profiles, &self.out_path(NODE_PROPS))?;
        m.output(self.out(), NODE_PROPS)
    }

    fn edge_props(&self, m: &mut Manifest) -> Result<()> {
        let cfg = &self.settings.config;
        let (ids, list, _) = self.graph(m)?;
        let corpus = self.corpus(m)?;
        let options = EdgeOptions {
            ged_exact_node_limit: cfg.ged_exact_node_limit,
            kl_epsilon: cfg.kl_epsilon,
            kl_direction: if cfg.symmetric_kl {
                KlDirection::Symmetric
            } else {
                KlDirection::SourceToTarget
            },
        };
        let sims: Vec<f64> = list.edges.iter().map(|e| e.sim).collect();
        let ranks = sim_conf(&sims);
        let lookup = |id: &str| {
            corpus
                .get(id)
                .ok_or_else(|| CliError::Invariant(format!("edge endpoint `{id}` is not in the corpus")))
        };
        let profiles = list
            .edges
            .par_iter()
            .zip(&ranks)
            .map(|(e, &rank)| {
                let (a, b) = (lookup(&ids[e.i])?, lookup(&ids[e.j])?);
                let p = profile_edge(&a.schema, a.data()?, &b.schema, b.data()?, e.sim, rank, &options)?;
                p.check().map_err(|err| CliError::Invariant(err.to_string()))?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        write_edge_props(&profiles, &self.out_path(EDGE_PROPS))?;
        m.output(self.out(), EDGE_PROPS)
    }
}

/// `node_id<TAB>community_id` lines.
pub fn read_communities(path: &Path) -> Result<BTreeMap<String, usize>> {
    read_lines(path)?
        .iter()
        .map(|line| {
            let bad = || CliError::Invariant(format!("malformed community line `{line}`"));
            let (id, c) = line.split_once('\t').ok_or_else(bad)?;
            Ok((id.to_owned(), c.parse().map_err(|_| bad())?))
        })
        .collect()
}
