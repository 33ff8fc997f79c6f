//! Replicate batches written as a binary tree file plus a JSON manifest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::compiled::CompiledFamily;
use super::exact::ExactSampler;
use super::rejection::{sample_by_type_counted, sample_conditioned_rejection_counted};
use super::rng::{RngStream, SampleBudget};
use super::spine::SpineSampler;
use super::unconditioned::sample_unconditioned;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::kernel::{parse_family, FamilyDoc, OffspringFamily};
use crate::tree::codec::{read_all_binary, write_binary};
use crate::tree::MultitypeTree;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TREES_FILE: &str = "trees.bin";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rejection,
    Exact,
    ByType,
    Unconditioned,
    Spine,
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rejection" => Method::Rejection,
            "exact" => Method::Exact,
            "by-type" => Method::ByType,
            "unconditioned" => Method::Unconditioned,
            "spine" => Method::Spine,
            _ => return None,
        })
    }
}

/// Everything that determines a batch besides the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchRequest {
    pub method: Method,
    /// Target `#_λ` (rejection, exact) or spine length (spine).
    pub n: Option<u64>,
    /// 1-based types conditioned on (by-type).
    #[serde(default)]
    pub types: Vec<usize>,
    #[serde(default)]
    pub targets: Vec<u64>,
    pub replicates: u64,
    pub seed: u64,
    #[serde(default)]
    pub first_stream: u64,
    pub budget: SampleBudget,
}

/// Per-replicate outcome in stream order.
#[derive(Clone, Debug)]
pub enum Outcome {
    Tree {
        tree: MultitypeTree,
        attempts: u64,
        /// Spine-tree mark (spine method only).
        mark: Option<u64>,
    },
    Overflow,
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub outcomes: Vec<Outcome>,
}

impl BatchResult {
    pub fn trees(&self) -> impl Iterator<Item = &MultitypeTree> {
        self.outcomes.iter().filter_map(|o| match o {
            Outcome::Tree { tree, .. } => Some(tree),
            Outcome::Overflow => None,
        })
    }

    pub fn into_trees(self) -> Vec<MultitypeTree> {
        self.outcomes
            .into_iter()
            .filter_map(|o| match o {
                Outcome::Tree { tree, .. } => Some(tree),
                Outcome::Overflow => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub family_hash: String,
    pub family: serde_json::Value,
    pub request: BatchRequest,
    /// Half-open range of stream ids used.
    pub streams: [u64; 2],
    pub trees_written: u64,
    pub total_attempts: u64,
    pub max_attempts_per_tree: u64,
    pub overflow_count: u64,
    /// Stream ids whose unconditioned draw overflowed.
    pub overflow_streams: Vec<u64>,
    /// Spine marks in tree order (spine method only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub marks: Vec<u64>,
    pub trees_file: String,
    pub trees_sha256: String,
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

/// Runs a batch; replicate i uses stream `first_stream + i` of `seed`.
pub fn run_batch(
    family: &OffspringFamily,
    req: &BatchRequest,
    exec: &Executor,
) -> Result<BatchResult> {
    let streams = req.first_stream..req.first_stream + req.replicates;
    let stream = |id: u64| RngStream::new(req.seed, id).rng();
    let cf = CompiledFamily::new(family);
    let tree = |tree, attempts| Outcome::Tree {
        tree,
        attempts,
        mark: None,
    };
    let outcomes = match req.method {
        Method::Rejection => {
            let n = req
                .n
                .ok_or_else(|| invalid("n", "required for rejection sampling"))?;
            exec.try_map(streams, |id| {
                let (t, a) =
                    sample_conditioned_rejection_counted(&cf, n, &mut stream(id), &req.budget)?;
                Ok(tree(t, a))
            })?
        }
        Method::Exact => {
            let n = req
                .n
                .ok_or_else(|| invalid("n", "required for exact sampling"))?;
            let sampler = ExactSampler::new(family, n)?;
            exec.try_map(streams, |id| {
                let parts = sampler.sample_parts(&mut stream(id))?;
                Ok(tree(sampler.assemble(&parts), parts.attempts))
            })?
        }
        Method::ByType => {
            if req.types.is_empty() || req.types.contains(&0) {
                return Err(invalid("types", "by-type sampling needs 1-based types"));
            }
            let types: Vec<usize> = req.types.iter().map(|t| t - 1).collect();
            exec.try_map(streams, |id| {
                let (t, a) = sample_by_type_counted(
                    &cf,
                    &types,
                    &req.targets,
                    &mut stream(id),
                    &req.budget,
                )?;
                Ok(tree(t, a))
            })?
        }
        Method::Unconditioned => exec.try_map(streams, |id| {
            match sample_unconditioned(&cf, 0, &mut stream(id), &req.budget) {
                Ok(t) => Ok(tree(t, 1)),
                Err(Error::Overflow { .. }) => Ok(Outcome::Overflow),
                Err(e) => Err(e),
            }
        })?,
        Method::Spine => {
            let ell = req.n.ok_or_else(|| invalid("n", "spine length required"))? as usize;
            let sampler = SpineSampler::new(family)?;
            exec.try_map(streams, |id| {
                match sampler.sample(ell, &mut stream(id), &req.budget) {
                    Ok(m) => Ok(Outcome::Tree {
                        tree: m.tree.into_tree(),
                        attempts: 1,
                        mark: Some(m.mark as u64),
                    }),
                    Err(Error::Overflow { .. }) => Ok(Outcome::Overflow),
                    Err(e) => Err(e),
                }
            })?
        }
    };
    Ok(BatchResult { outcomes })
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes `trees.bin` and `manifest.json` into `dir`.
pub fn write_batch(
    dir: &Path,
    family: &OffspringFamily,
    req: &BatchRequest,
    result: &BatchResult,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let trees_path = dir.join(TREES_FILE);
    let mut w = BufWriter::new(File::create(&trees_path)?);
    let mut written = 0u64;
    let (mut total, mut worst) = (0u64, 0u64);
    let mut overflow_streams = Vec::new();
    let mut marks = Vec::new();
    for (i, o) in result.outcomes.iter().enumerate() {
        match o {
            Outcome::Tree {
                tree,
                attempts,
                mark,
            } => {
                write_binary(&mut w, tree)?;
                written += 1;
                total += attempts;
                worst = worst.max(*attempts);
                if let Some(m) = mark {
                    marks.push(*m);
                }
            }
            Outcome::Overflow => overflow_streams.push(req.first_stream + i as u64),
        }
    }
    w.flush()?;
    drop(w);
    let doc = FamilyDoc::from_family(family, None);
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        family_hash: family.hash_hex(),
        family: serde_json::to_value(&doc).map_err(|e| Error::Codec(e.to_string()))?,
        request: req.clone(),
        streams: [req.first_stream, req.first_stream + req.replicates],
        trees_written: written,
        total_attempts: total,
        max_attempts_per_tree: worst,
        overflow_count: overflow_streams.len() as u64,
        overflow_streams,
        marks,
        trees_file: TREES_FILE.into(),
        trees_sha256: sha256_file(&trees_path)?,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Codec(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_batch_trees(dir: &Path) -> Result<Vec<MultitypeTree>> {
    let mut r = BufReader::new(File::open(dir.join(TREES_FILE))?);
    read_all_binary(&mut r)
}

/// Reruns the batch described by a manifest and checks the family hash.
pub fn replay(manifest: &Manifest, exec: &Executor) -> Result<(OffspringFamily, BatchResult)> {
    let text = serde_json::to_string(&manifest.family).map_err(|e| Error::Codec(e.to_string()))?;
    let family = parse_family(&text)?;
    if family.hash_hex() != manifest.family_hash {
        return Err(invalid(
            "family_hash",
            "embedded family does not match its hash",
        ));
    }
    let result = run_batch(&family, &manifest.request, exec)?;
    Ok((family, result))
}
