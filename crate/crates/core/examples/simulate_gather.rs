//! Simulates one random scene at production scale and prints the receiver
//! gather summary and the first-arrival row of each trace.
//!
//! cargo run --release --example simulate_gather -- [seed]

use sonarsim::dataset::{rescale_gather, DatasetConfig};
use sonarsim::scenegen::{generate_scene, rasterize};
use sonarsim::wavesim::simulate;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(7, |s| s.parse().expect("seed"));
    let cfg = DatasetConfig::default();
    let scene = generate_scene(seed, &cfg.scene);
    println!("scene {}", scene.to_json_line());
    let (model, mask) = rasterize(&scene, &cfg.scene).unwrap();
    println!("obstacle cells: {}", mask.count_ones());

    let t = std::time::Instant::now();
    let gather = simulate(&model, &cfg.grid, &cfg.source, &cfg.receivers).unwrap();
    println!(
        "{} steps in {:.2?}: gather {}x{} (from step {}), max |p| {:e}",
        cfg.grid.n_steps,
        t.elapsed(),
        gather.n_rows(),
        gather.n_receivers(),
        gather.record_start(),
        gather.max_abs()
    );
    let (scaled, factor) = rescale_gather(&gather);
    println!("rescaled to [-50, 50] with factor {factor:e}");
    for (j, cell) in cfg.receivers.positions().iter().enumerate() {
        let trace: Vec<f32> = scaled.iter().skip(j).step_by(11).copied().collect();
        let peak = trace.iter().fold(0f32, |m, v| m.max(v.abs()));
        let onset = trace
            .iter()
            .position(|v| v.abs() >= 0.01 * peak)
            .unwrap_or(0);
        println!(
            "receiver {j:2} at col {:3}: peak {peak:6.2}, first row >= 1% of peak at step {}",
            cell.col,
            onset + gather.record_start()
        );
    }
}
