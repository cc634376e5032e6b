//! On-disk corpus: fixed-size binary shards plus a JSON manifest.
//!
//! ```text
//! out/
//!   manifest.json       written last; its presence marks a complete corpus
//!   shard-00000.bin     samples_per_shard records of record_bytes each
//!   shard-00001.bin
//!   progress.jsonl      journal of finished samples, removed on completion
//! ```
//!
//! Sample `i` lives in shard `i / samples_per_shard` at byte offset
//! `(i % samples_per_shard) * record_bytes`. Workers write disjoint record
//! regions and the manifest is assembled in index order after all of them
//! finish, so the bytes of a corpus do not depend on the worker count or on
//! how many times generation was interrupted and resumed.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    assign_splits, build_sample_substituted, decode_record, encode_record, split_counts,
    DatasetConfig, DatasetError, SampleMeta, SamplePair, Split, SplitCounts,
};
use crate::scenegen::SceneSpec;

pub const MANIFEST_FILE: &str = "manifest.json";
const JOURNAL_FILE: &str = "progress.jsonl";
pub const FORMAT_NAME: &str = "sonarsim-corpus";
pub const FORMAT_VERSION: u32 = 1;

/// Where one array sits inside a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub dtype: String,
    pub shape: [usize; 2],
    pub offset: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: usize,
    pub seed: u64,
    pub effective_seed: u64,
    pub split: Split,
    pub shard: String,
    pub offset: u64,
    pub scale_factor: f64,
    pub scene: SceneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub n_samples: usize,
    pub base_seed: u64,
    pub samples_per_shard: usize,
    pub record_bytes: usize,
    pub input: ArrayLayout,
    pub target: ArrayLayout,
    pub split_counts: SplitCounts,
    pub split_rule: String,
    pub fingerprint: String,
    pub config: DatasetConfig,
    pub samples: Vec<SampleEntry>,
}

const SPLIT_RULE: &str = "70/15/15 by largest remainder (ties to the earlier split); \
seeds ranked by (first 8 bytes big-endian of sha256(seed as u64 le), seed)";

impl DatasetManifest {
    /// Pretty JSON with one sample entry per line.
    pub fn to_json(&self) -> String {
        fn j<T: Serialize>(v: &T) -> String {
            serde_json::to_string(v).expect("manifest field serializes")
        }
        let mut out = String::from("{\n");
        let fields: [(&str, String); 12] = [
            ("format", j(&self.format)),
            ("version", j(&self.version)),
            ("n_samples", j(&self.n_samples)),
            ("base_seed", j(&self.base_seed)),
            ("samples_per_shard", j(&self.samples_per_shard)),
            ("record_bytes", j(&self.record_bytes)),
            ("input", j(&self.input)),
            ("target", j(&self.target)),
            ("split_counts", j(&self.split_counts)),
            ("split_rule", j(&self.split_rule)),
            ("fingerprint", j(&self.fingerprint)),
            ("config", j(&self.config)),
        ];
        for (k, v) in fields {
            out.push_str(&format!("  \"{k}\": {v},\n"));
        }
        if self.samples.is_empty() {
            out.push_str("  \"samples\": []\n}\n");
            return out;
        }
        out.push_str("  \"samples\": [\n");
        let lines: Vec<String> = self
            .samples
            .iter()
            .map(|s| format!("    {}", j(s)))
            .collect();
        out.push_str(&lines.join(",\n"));
        out.push_str("\n  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        let m: Self = serde_json::from_str(text)
            .map_err(|e| DatasetError::Format(format!("manifest: {e}")))?;
        if m.format != FORMAT_NAME || m.version != FORMAT_VERSION {
            return Err(DatasetError::Format(format!(
                "unsupported corpus format {} v{}",
                m.format, m.version
            )));
        }
        if m.samples.len() != m.n_samples {
            return Err(DatasetError::Format(format!(
                "manifest lists {} samples but n_samples is {}",
                m.samples.len(),
                m.n_samples
            )));
        }
        Ok(m)
    }

    pub fn indices(&self, split: Option<Split>) -> Vec<usize> {
        self.samples
            .iter()
            .filter(|s| split.is_none_or(|sp| s.split == sp))
            .map(|s| s.index)
            .collect()
    }
}

fn shard_name(shard: usize) -> String {
    format!("shard-{shard:05}.bin")
}

/// Identity of a corpus request; resuming requires an exact match.
fn fingerprint(cfg: &DatasetConfig, n: usize, base_seed: u64, per_shard: usize) -> String {
    let key = serde_json::json!({
        "version": FORMAT_VERSION,
        "config": cfg,
        "n": n,
        "base_seed": base_seed,
        "samples_per_shard": per_shard,
    });
    let digest = Sha256::digest(key.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct JournalHeader {
    fingerprint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JournalEntry {
    index: usize,
    meta: SampleMeta,
}

/// Outcome of a generation run that stopped before completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRun {
    pub completed: usize,
    pub remaining: usize,
}

type ProgressFn<'a> = dyn Fn(usize, usize, &SampleMeta) + Sync + 'a;

/// Generates a corpus of `n` samples with seeds `base_seed..base_seed + n`.
pub struct CorpusBuilder<'a> {
    cfg: DatasetConfig,
    out: PathBuf,
    n: usize,
    base_seed: u64,
    workers: usize,
    samples_per_shard: usize,
    progress: Option<Box<ProgressFn<'a>>>,
}

impl<'a> CorpusBuilder<'a> {
    pub fn new(cfg: DatasetConfig, out: impl Into<PathBuf>) -> Self {
        Self {
            cfg,
            out: out.into(),
            n: 0,
            base_seed: 0,
            workers: 1,
            samples_per_shard: 100,
            progress: None,
        }
    }

    pub fn samples(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn base_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn samples_per_shard(mut self, k: usize) -> Self {
        self.samples_per_shard = k;
        self
    }

    /// Called after each sample is stored with `(done, total, meta)`, where
    /// `done` counts samples finished so far including earlier runs.
    pub fn on_progress(mut self, f: impl Fn(usize, usize, &SampleMeta) + Sync + 'a) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    fn seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    fn location(&self, index: usize) -> (usize, u64) {
        let shard = index / self.samples_per_shard;
        let slot = index % self.samples_per_shard;
        (shard, (slot * self.cfg.record_bytes()) as u64)
    }

    /// Builds (or finishes) the corpus and writes the manifest.
    pub fn build(&self) -> Result<DatasetManifest, DatasetError> {
        match self.run(None)? {
            Ok(m) => Ok(m),
            Err(p) => unreachable!("unlimited run stopped early: {p:?}"),
        }
    }

    /// Generates at most `max_new` missing samples. Returns the manifest if
    /// that completes the corpus, or how far it got otherwise.
    pub fn build_partial(
        &self,
        max_new: usize,
    ) -> Result<Result<DatasetManifest, PartialRun>, DatasetError> {
        self.run(Some(max_new))
    }

    fn run(
        &self,
        limit: Option<usize>,
    ) -> Result<Result<DatasetManifest, PartialRun>, DatasetError> {
        self.cfg.validate()?;
        if self.workers == 0 || self.samples_per_shard == 0 {
            return Err(DatasetError::Config(
                "workers and samples_per_shard must be positive".into(),
            ));
        }
        let fp = fingerprint(&self.cfg, self.n, self.base_seed, self.samples_per_shard);
        fs::create_dir_all(&self.out).map_err(DatasetError::io(&self.out))?;

        let manifest_path = self.out.join(MANIFEST_FILE);
        if manifest_path.exists() {
            let text =
                fs::read_to_string(&manifest_path).map_err(DatasetError::io(&manifest_path))?;
            let m = DatasetManifest::from_json(&text)?;
            if m.fingerprint != fp {
                return Err(DatasetError::Mismatch(format!(
                    "{} already holds a different corpus",
                    self.out.display()
                )));
            }
            return Ok(Ok(m));
        }

        let mut done = self.load_journal(&fp)?;
        let pending: Vec<usize> = (0..self.n).filter(|i| done[*i].is_none()).collect();
        let todo = &pending[..limit.map_or(pending.len(), |k| k.min(pending.len()))];
        let already = self.n - pending.len();

        let journal_path = self.out.join(JOURNAL_FILE);
        let journal = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)
            .map_err(DatasetError::io(&journal_path))?;
        let journal = Mutex::new((journal, already));

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| DatasetError::Config(format!("worker pool: {e}")))?;
        let fresh: Vec<(usize, SampleMeta)> = pool.install(|| {
            todo.par_iter()
                .map(|&index| {
                    let sample = build_sample_substituted(self.seed(index), &self.cfg)?;
                    self.write_record(index, &sample)?;
                    let entry = JournalEntry {
                        index,
                        meta: sample.meta,
                    };
                    let mut guard = journal.lock().expect("journal lock");
                    let (file, count) = &mut *guard;
                    let line = serde_json::to_string(&entry).expect("journal entry serializes");
                    writeln!(file, "{line}")
                        .and_then(|_| file.flush())
                        .map_err(DatasetError::io(&journal_path))?;
                    *count += 1;
                    if let Some(f) = &self.progress {
                        f(*count, self.n, &entry.meta);
                    }
                    log::info!("sample {index} stored ({}/{})", *count, self.n);
                    Ok((index, entry.meta))
                })
                .collect::<Result<Vec<_>, DatasetError>>()
        })?;
        for (index, meta) in fresh {
            done[index] = Some(meta);
        }

        let completed = done.iter().filter(|d| d.is_some()).count();
        if completed < self.n {
            return Ok(Err(PartialRun {
                completed,
                remaining: self.n - completed,
            }));
        }
        let metas: Vec<SampleMeta> = done.into_iter().map(|m| m.expect("complete")).collect();
        let manifest = self.assemble(metas, fp);
        let tmp = self.out.join(format!("{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, manifest.to_json()).map_err(DatasetError::io(&tmp))?;
        fs::rename(&tmp, &manifest_path).map_err(DatasetError::io(&manifest_path))?;
        fs::remove_file(&journal_path).map_err(DatasetError::io(&journal_path))?;
        Ok(Ok(manifest))
    }

    /// Finished samples from an earlier interrupted run whose records are
    /// present on disk.
    fn load_journal(&self, fp: &str) -> Result<Vec<Option<SampleMeta>>, DatasetError> {
        let mut done = vec![None; self.n];
        let path = self.out.join(JOURNAL_FILE);
        if !path.exists() {
            let mut f = File::create(&path).map_err(DatasetError::io(&path))?;
            let header = JournalHeader {
                fingerprint: fp.to_string(),
            };
            writeln!(
                f,
                "{}",
                serde_json::to_string(&header).expect("header serializes")
            )
            .map_err(DatasetError::io(&path))?;
            return Ok(done);
        }
        let file = File::open(&path).map_err(DatasetError::io(&path))?;
        let mut lines = BufReader::new(file).lines();
        let header: JournalHeader = lines
            .next()
            .transpose()
            .map_err(DatasetError::io(&path))?
            .and_then(|l| serde_json::from_str(&l).ok())
            .ok_or_else(|| DatasetError::Format("unreadable progress journal header".into()))?;
        if header.fingerprint != fp {
            return Err(DatasetError::Mismatch(format!(
                "{} holds a partial corpus with a different configuration",
                self.out.display()
            )));
        }
        for line in lines {
            let line = line.map_err(DatasetError::io(&path))?;
            // a torn final line from an interrupted write is ignored
            let Ok(entry) = serde_json::from_str::<JournalEntry>(&line) else {
                continue;
            };
            if entry.index < self.n && self.record_present(entry.index)? {
                done[entry.index] = Some(entry.meta);
            }
        }
        Ok(done)
    }

    fn record_present(&self, index: usize) -> Result<bool, DatasetError> {
        let (shard, offset) = self.location(index);
        let path = self.out.join(shard_name(shard));
        Ok(match fs::metadata(&path) {
            Ok(m) => m.len() >= offset + self.cfg.record_bytes() as u64,
            Err(_) => false,
        })
    }

    fn write_record(&self, index: usize, sample: &SamplePair) -> Result<(), DatasetError> {
        let (shard, offset) = self.location(index);
        let path = self.out.join(shard_name(shard));
        let mut f = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(DatasetError::io(&path))?;
        f.seek(SeekFrom::Start(offset))
            .and_then(|_| f.write_all(&encode_record(sample)))
            .map_err(DatasetError::io(&path))
    }

    fn assemble(&self, metas: Vec<SampleMeta>, fingerprint: String) -> DatasetManifest {
        let seeds: Vec<u64> = metas.iter().map(|m| m.seed).collect();
        let splits = assign_splits(&seeds);
        let (rows, rcv) = self.cfg.input_shape();
        let (h, w) = self.cfg.target_shape();
        let samples = metas
            .into_iter()
            .zip(splits)
            .enumerate()
            .map(|(index, (meta, split))| {
                let (shard, offset) = self.location(index);
                SampleEntry {
                    index,
                    seed: meta.seed,
                    effective_seed: meta.effective_seed,
                    split,
                    shard: shard_name(shard),
                    offset,
                    scale_factor: meta.scale_factor,
                    scene: meta.scene,
                }
            })
            .collect();
        DatasetManifest {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            n_samples: self.n,
            base_seed: self.base_seed,
            samples_per_shard: self.samples_per_shard,
            record_bytes: self.cfg.record_bytes(),
            input: ArrayLayout {
                dtype: "float32-le".into(),
                shape: [rows, rcv],
                offset: 0,
                bytes: 4 * rows * rcv,
            },
            target: ArrayLayout {
                dtype: "uint8".into(),
                shape: [h, w],
                offset: 4 * rows * rcv,
                bytes: h * w,
            },
            split_counts: split_counts(self.n),
            split_rule: SPLIT_RULE.into(),
            fingerprint,
            config: self.cfg.clone(),
            samples,
        }
    }
}

/// Read access to a finished corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    dir: PathBuf,
    manifest: DatasetManifest,
}

impl Corpus {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let dir = dir.as_ref().to_path_buf();
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(DatasetError::io(&path))?;
        let manifest = DatasetManifest::from_json(&text)?;
        if manifest.record_bytes != manifest.input.bytes + manifest.target.bytes {
            return Err(DatasetError::Format("record layout does not add up".into()));
        }
        Ok(Self { dir, manifest })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.manifest.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.n_samples == 0
    }

    pub fn read_sample(&self, index: usize) -> Result<SamplePair, DatasetError> {
        let entry = self.manifest.samples.get(index).ok_or_else(|| {
            DatasetError::Format(format!("no sample {index} in a corpus of {}", self.len()))
        })?;
        let path = self.dir.join(&entry.shard);
        let mut f = File::open(&path).map_err(DatasetError::io(&path))?;
        let mut bytes = vec![0u8; self.manifest.record_bytes];
        f.seek(SeekFrom::Start(entry.offset))
            .and_then(|_| f.read_exact(&mut bytes))
            .map_err(DatasetError::io(&path))?;
        let [rows, rcv] = self.manifest.input.shape;
        let [h, w] = self.manifest.target.shape;
        let (input, target) = decode_record(&bytes, (rows, rcv), (h, w))?;
        Ok(SamplePair {
            input,
            input_shape: (rows, rcv),
            target,
            meta: SampleMeta {
                seed: entry.seed,
                effective_seed: entry.effective_seed,
                scene: entry.scene.clone(),
                scale_factor: entry.scale_factor,
            },
        })
    }
}
