/// Sixth-order central second-difference weights for offsets 0, ±1, ±2, ±3.
pub const STENCIL: [f32; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Largest `c·dt·sqrt(1/dx² + 1/dz²)` for which leapfrog with [`STENCIL`]
/// stays bounded: `2 / sqrt(544/90)`, where 544/90 is the magnitude of the
/// stencil symbol at the Nyquist wavenumber.
pub const STENCIL_STABILITY_LIMIT: f64 = 0.813_489_216_819_960_6;

/// Undivided second difference along one axis: `p` is a padded field, `at`
/// the centre index and `stride` the index distance between neighbours.
///
/// Evaluated as `sum_j w_j ((p[+j] - p[0]) + (p[-j] - p[0]))`, which equals
/// the weighted sum with centre weight `-49/18` but maps constants to exactly
/// zero in floating point.
#[inline(always)]
pub fn second_difference(p: &[f32], at: usize, stride: usize) -> f32 {
    let c = p[at];
    let pair = |j: usize| (p[at + j * stride] - c) + (p[at - j * stride] - c);
    STENCIL[1] * pair(1) + STENCIL[2] * pair(2) + STENCIL[3] * pair(3)
}

/// `p_xx + p_zz` at flat index `at` of a padded row-major field with
/// `row_stride` cells per row. Columns are the `x` axis.
///
/// `at` must be at least three cells from every edge of the padded buffer;
/// anything closer panics on the slice bounds.
#[inline(always)]
pub fn laplacian(p: &[f32], row_stride: usize, at: usize, inv_dx2: f32, inv_dz2: f32) -> f32 {
    second_difference(p, at, 1) * inv_dx2 + second_difference(p, at, row_stride) * inv_dz2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn padded(w: usize, h: usize, f: impl Fn(isize, isize) -> f32) -> Vec<f32> {
        let pw = w + 6;
        let mut v = vec![0.0; pw * (h + 6)];
        for r in 0..h + 6 {
            for c in 0..pw {
                v[r * pw + c] = f(r as isize - 3, c as isize - 3);
            }
        }
        v
    }

    #[test]
    fn weights_sum_to_zero() {
        // exact rationals, in units of 1/180
        let w = [-490i64, 270, -27, 2];
        assert_eq!(w[0] + 2 * (w[1] + w[2] + w[3]), 0);
        for (wi, si) in w.iter().zip(STENCIL) {
            assert!((*wi as f32 / 180.0 - si).abs() <= f32::EPSILON * si.abs());
        }
    }

    #[test]
    fn constant_field_is_annihilated() {
        let p = padded(8, 8, |_, _| 7.0);
        let pw = 14;
        for r in 0..8 {
            for c in 0..8 {
                let at = (r + 3) * pw + c + 3;
                assert_eq!(laplacian(&p, pw, at, 4444.4, 4444.4), 0.0);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_six() {
        // Moments of the stencil: sum_j w_j j^m must be 0 for odd m, 2 for
        // m = 2 and 0 for m = 4, 6.
        let w = |j: i32| STENCIL[j.unsigned_abs() as usize] as f64;
        for m in 0..=7u32 {
            let moment: f64 = (-3..=3).map(|j| w(j) * (j as f64).powi(m as i32)).sum();
            let expected = if m == 2 { 2.0 } else { 0.0 };
            assert!((moment - expected).abs() < 1e-5, "moment {m} = {moment}");
        }
        let m8: f64 = (-3..=3).map(|j| w(j) * (j as f64).powi(8)).sum();
        assert!(m8.abs() > 1.0);
    }

    #[test]
    fn quadratic_along_rows_and_columns() {
        let dx = 0.015f32;
        let inv = 1.0 / (dx * dx);
        let pw = 16 + 6;
        let px = padded(16, 16, |_, c| ((c - 8) as f32 * dx).powi(2));
        let pz = padded(16, 16, |r, _| ((r - 8) as f32 * dx).powi(2));
        for r in 0..16 {
            for c in 0..16 {
                let at = (r + 3) * pw + c + 3;
                let lx = laplacian(&px, pw, at, inv, inv);
                let lz = laplacian(&pz, pw, at, inv, inv);
                assert!((lx - 2.0).abs() / 2.0 < 1e-4, "{lx}");
                assert!((lz - 2.0).abs() / 2.0 < 1e-4, "{lz}");
            }
        }
    }

    #[test]
    fn stability_limit_matches_nyquist_symbol() {
        // Max over wavenumbers of the (negated) stencil symbol, scanned
        // numerically rather than taken at theta = pi.
        let symbol = |t: f64| {
            -(STENCIL[0] as f64
                + 2.0
                    * (1..4)
                        .map(|j| STENCIL[j] as f64 * (j as f64 * t).cos())
                        .sum::<f64>())
        };
        let max = (0..=10_000)
            .map(|i| symbol(std::f64::consts::PI * i as f64 / 10_000.0))
            .fold(0.0, f64::max);
        // Leapfrog on u'' = -c^2 (S/dx^2 + S/dz^2) u is stable iff
        // dt^2 c^2 S (1/dx^2 + 1/dz^2) <= 4.
        let limit = 2.0 / max.sqrt();
        assert!((limit - STENCIL_STABILITY_LIMIT).abs() < 1e-6, "{limit}");
    }
}
