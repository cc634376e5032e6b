use sonarsim::wavesim::{
    laplacian, GridSpec, ReceiverArray, SimError, Simulator, SourceSpec, VelocityModel, PAD,
};

/// Worst error of the discrete laplacian of `sin(k x)` against `-k^2 sin(k x)`
/// with `ppw` points per wavelength, in cell units.
fn sine_error(ppw: f64) -> f64 {
    let n = 64;
    let stride = n + 2 * PAD;
    let k = 2.0 * std::f64::consts::PI / ppw;
    let value = |c: usize| (k * (c as f64 - PAD as f64)).sin();
    let mut p = vec![0.0f32; stride * (n + 2 * PAD)];
    for r in 0..n + 2 * PAD {
        for c in 0..stride {
            p[r * stride + c] = value(c) as f32;
        }
    }
    let mut worst = 0.0f64;
    for r in PAD..PAD + n {
        for c in PAD..PAD + n {
            let got = laplacian(&p, stride, r * stride + c, 1.0, 1.0) as f64;
            worst = worst.max((got + k * k * value(c)).abs() / (k * k));
        }
    }
    worst
}

#[test]
fn laplacian_is_sixth_order() {
    let coarse = sine_error(6.0);
    let fine = sine_error(12.0);
    let order = (coarse / fine).log2();
    assert!((5.5..6.5).contains(&order), "observed order {order}");
}

#[test]
fn courant_limit_is_enforced_before_stepping() {
    let model = VelocityModel::uniform(32, 32, 3000.0).unwrap();
    let fast = GridSpec {
        dt: 4e-6,
        ..GridSpec::default()
    };
    let err = Simulator::new(
        &model,
        fast,
        SourceSpec {
            position: sonarsim::wavesim::Cell::new(16, 16),
            ..SourceSpec::default()
        },
    )
    .err()
    .unwrap();
    assert!(matches!(err, SimError::Unstable { .. }), "{err}");
    // production parameters with obstacles at 3000 m/s sit below the limit
    let grid = GridSpec::default();
    assert!(grid.courant_number(3000.0) < sonarsim::wavesim::STENCIL_STABILITY_LIMIT);
    assert!(ReceiverArray::default()
        .validate(256, 256, grid.n_steps)
        .is_ok());
}
