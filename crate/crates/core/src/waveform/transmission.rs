use rand::Rng;

/// Free path `-ln(u) / sigma` for a uniform draw `u` in [0, 1).
///
/// `u = 0` and `sigma = 0` both give an infinite path.
pub fn transmissive_distance(sigma: f64, u: f64) -> f64 {
    if sigma <= 0.0 || u <= 0.0 {
        return f64::INFINITY;
    }
    -u.ln() / sigma
}

/// Decides whether a subray returns inside a transmissive voxel.
///
/// Returns the distance past the voxel entry where the echo is placed, or
/// `None` when the subray passes through the `path_length` metres of voxel.
pub fn sample_transmissive_return<R: Rng + ?Sized>(
    sigma: f64,
    path_length: f64,
    rng: &mut R,
) -> Option<f64> {
    if sigma <= 0.0 {
        return None;
    }
    let u: f64 = rng.random();
    let s = transmissive_distance(sigma, u);
    (s <= path_length).then_some(s)
}
