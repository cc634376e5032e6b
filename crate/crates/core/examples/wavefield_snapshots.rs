//! Steps a scene by hand and exports wavefield snapshots as PGM images.
//!
//! cargo run --release --example wavefield_snapshots -- [out_dir]

use std::path::PathBuf;

use sonarsim::dataset::DatasetConfig;
use sonarsim::scenegen::{generate_scene, rasterize};
use sonarsim::wavesim::{export_snapshot, snapshot, Simulator};

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/example-output/snapshots".into()),
    );
    std::fs::create_dir_all(&out).unwrap();
    let cfg = DatasetConfig::default();
    let scene = generate_scene(3, &cfg.scene);
    let (model, _) = rasterize(&scene, &cfg.scene).unwrap();
    let mut sim = Simulator::new(&model, cfg.grid, cfg.source).unwrap();
    for n in (300..=1500).step_by(300) {
        sim.run_to(n).unwrap();
        let snap = snapshot(sim.state(), n);
        let path = out.join(format!("step-{n:04}.pgm"));
        export_snapshot(&snap, &path).unwrap();
        println!("{} (max |p| {:e})", path.display(), sim.state().max_abs());
    }
}
