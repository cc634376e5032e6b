//! Scores synthetic predictions against scene masks with both IoU modes.
//!
//! cargo run --release --example evaluate_masks

use sonarsim::mask::Mask;
use sonarsim::metrics::{binarize, evaluate, IouMode};
use sonarsim::scenegen::{generate_scene, rasterize, SceneConfig};

fn main() {
    let cfg = SceneConfig::default();
    let mut pairs = Vec::new();
    for seed in 0..20 {
        let scene = generate_scene(seed, &cfg);
        let (_, target) = rasterize(&scene, &cfg).unwrap();
        // A blurred guess: each pixel's probability is the obstacle share of
        // its 5x5 neighbourhood shifted two cells down.
        let (w, h) = (target.width(), target.height());
        let probs: Vec<f32> = (0..h)
            .flat_map(|r| (0..w).map(move |c| (r, c)))
            .map(|(r, c)| {
                let mut on = 0;
                for dr in 0..5 {
                    for dc in 0..5 {
                        let (rr, cc) = ((r + dr).saturating_sub(4), (c + dc).saturating_sub(2));
                        on += target.get(rr.min(h - 1), cc.min(w - 1)) as u32;
                    }
                }
                on as f32 / 25.0
            })
            .collect();
        let pred = binarize(&probs, w, h, 0.5).unwrap();
        pairs.push((pred, target));
    }
    for mode in [IouMode::Foreground, IouMode::Agreement] {
        println!("{}", evaluate(&pairs, mode).unwrap().to_json());
    }
    let empty: Vec<(Mask, Mask)> = pairs
        .iter()
        .map(|(_, t)| (Mask::zeros(t.width(), t.height()), t.clone()))
        .collect();
    let r = evaluate(&empty, IouMode::Foreground).unwrap();
    println!(
        "all-zero predictions: sensitivity {:?}, specificity {:?}, precision {:?}",
        r.sensitivity, r.specificity, r.precision
    );
}
