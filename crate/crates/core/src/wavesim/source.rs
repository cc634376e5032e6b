use super::SourceSpec;

/// Source term at timestep `n`: the time derivative of `exp(-(t f0)^2)`
/// centred on `spec.delay`,
///
/// ```text
/// s^n = -2 (n - delay) dt f0^2 exp(-((n - delay) dt f0)^2)
/// ```
pub fn source_amplitude(n: usize, spec: &SourceSpec, dt: f64) -> f64 {
    let tau = (n as f64 - spec.delay as f64) * dt;
    let arg = tau * spec.f0;
    -2.0 * tau * spec.f0 * spec.f0 * (-arg * arg).exp()
}
