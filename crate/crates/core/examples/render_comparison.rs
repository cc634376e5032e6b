//! Renders a target mask next to a noisy prediction as a PGM.
//!
//! cargo run --release --example render_comparison -- [out.pgm]

use sonarsim::image::render_comparison;
use sonarsim::scenegen::{generate_scene, rasterize, SceneConfig};

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/example-output/comparison.pgm".into());
    let out = std::path::Path::new(&out);
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir).unwrap();
    }
    let cfg = SceneConfig::default();
    let scene = generate_scene(11, &cfg);
    let (_, mask) = rasterize(&scene, &cfg).unwrap();
    let target = mask.to_f32();
    // a prediction that is right in the middle and unsure near the edges
    let pred: Vec<f32> = target
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (r, c) = (i / 256, i % 256);
            let edge = r.min(c).min(255 - r).min(255 - c) as f32 / 128.0;
            v * (0.5 + 0.5 * edge) + (1.0 - v) * 0.3 * (1.0 - edge)
        })
        .collect();
    let img = render_comparison(256, 256, &target, &pred);
    img.save(out).unwrap();
    println!("{}x{} -> {}", img.width, img.height, out.display());
}
