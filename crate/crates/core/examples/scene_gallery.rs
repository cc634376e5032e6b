//! Generates a few scenes, prints their shapes and object-count statistics,
//! and writes each target mask as a PGM.
//!
//! cargo run --release --example scene_gallery -- [out_dir]

use std::path::PathBuf;

use sonarsim::image::GrayImage;
use sonarsim::scenegen::{generate_scene, rasterize, SceneConfig};

fn main() {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/example-output/scenes".into()),
    );
    std::fs::create_dir_all(&out).unwrap();
    let cfg = SceneConfig::default();
    for seed in 0..6 {
        let scene = generate_scene(seed, &cfg);
        let (_, mask) = rasterize(&scene, &cfg).unwrap();
        let img = GrayImage {
            width: mask.width(),
            height: mask.height(),
            pixels: mask.as_bytes().iter().map(|&b| b * 255).collect(),
        };
        let path = out.join(format!("scene-{seed}.pgm"));
        img.save(&path).unwrap();
        println!(
            "seed {seed}: {} objects, {} obstacle cells -> {}",
            scene.n_objects,
            mask.count_ones(),
            path.display()
        );
        for s in &scene.shapes {
            println!(
                "  {:?} centre ({}, {}) size {}",
                s.kind, s.center.row, s.center.col, s.size
            );
        }
    }
    let mut counts = [0usize; 11];
    for seed in 0..11_000 {
        counts[generate_scene(seed, &cfg).n_objects] += 1;
    }
    println!("object counts over 11000 seeds: {counts:?}");
}
