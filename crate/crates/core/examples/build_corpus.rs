//! Builds a small corpus, interrupts it halfway, resumes it, and reads a
//! sample back.
//!
//! cargo run --release --example build_corpus -- [out_dir]

use std::path::PathBuf;

use sonarsim::dataset::{Corpus, CorpusBuilder, DatasetConfig, Split};

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/example-output/corpus".into()),
    );
    let builder = || {
        CorpusBuilder::new(DatasetConfig::default(), &out)
            .samples(12)
            .base_seed(1000)
            .workers(4)
            .samples_per_shard(5)
            .on_progress(|done, total, meta| {
                println!(
                    "  [{done}/{total}] seed {} ({} objects)",
                    meta.seed, meta.scene.n_objects
                )
            })
    };
    println!("first run, stopping after 5 samples");
    match builder().build_partial(5).unwrap() {
        Ok(_) => println!("corpus was already complete"),
        Err(p) => println!("stopped: {} done, {} remaining", p.completed, p.remaining),
    }
    println!("resuming");
    let manifest = builder().build().unwrap();
    let c = manifest.split_counts;
    println!(
        "{} samples, splits {}/{}/{}",
        manifest.n_samples, c.train, c.val, c.test
    );

    let corpus = Corpus::open(&out).unwrap();
    let test = corpus.manifest().indices(Some(Split::Test));
    let sample = corpus.read_sample(test[0]).unwrap();
    println!(
        "test sample {}: input {:?}, {} obstacle cells, scale factor {:e}",
        test[0],
        sample.input_shape,
        sample.target.count_ones(),
        sample.meta.scale_factor
    );
}
