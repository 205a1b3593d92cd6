use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, RadialFunction};
use crate::error::{invalid, Result};

/// Seeded nonnegative piecewise-linear test function with `u(0) = 0`,
/// `n_pieces` linear pieces on `[0, radius]` and constant afterwards.
pub fn random_admissible(
    seed: u64,
    n_pieces: usize,
    radius: f64,
    amplitude: f64,
) -> Result<RadialFunction> {
    if n_pieces == 0 {
        return Err(invalid("n_pieces must be >= 1"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("radius must be > 0"));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(invalid("amplitude must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut breaks: Vec<f64> = (1..n_pieces)
        .map(|_| rng.gen_range(0.0..radius))
        .filter(|&x| x > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut nodes = Vec::with_capacity(breaks.len() + 3);
    nodes.push(0.0);
    nodes.extend(breaks);
    nodes.push(radius);
    if nodes.len() == 2 {
        // A single piece still needs a three-node grid.
        nodes.insert(1, 0.5 * radius);
    }

    let mut values = Vec::with_capacity(nodes.len());
    values.push(0.0);
    for _ in 1..nodes.len() {
        values.push(amplitude * rng.gen::<f64>());
    }
    if n_pieces == 1 {
        // Keep the single piece linear through the inserted midpoint.
        values[1] = 0.5 * values[2];
    }
    RadialFunction::new(Grid::new(nodes)?, values)
}

/// Seeded nonnegative test function for the Bliss quotient: a sum of three
/// Gaussian bumps with heights in `[0, 2)`, centres in `[0, 6)` and widths in
/// `[0.3, 3)`.
pub fn random_bliss_profile(seed: u64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(0.0..6.0), rng.gen_range(0.3..3.0)))
        .collect();
    move |x: f64| {
        bumps
            .iter()
            .map(|&(h, m, w)| h * (-((x - m) / w).powi(2)).exp())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bliss_profiles_are_seeded_and_nonnegative() {
        let f = random_bliss_profile(3);
        let g = random_bliss_profile(3);
        for x in [0.0, 0.7, 3.0, 12.0] {
            assert_eq!(f(x), g(x));
            assert!(f(x) >= 0.0);
        }
    }

    #[test]
    fn zero_amplitude_is_zero() {
        let u = random_admissible(4, 6, 5.0, 0.0).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_from_seed() {
        let a = random_admissible(1, 8, 10.0, 3.0).unwrap();
        let b = random_admissible(1, 8, 10.0, 3.0).unwrap();
        assert_eq!(a, b);
        let c = random_admissible(2, 8, 10.0, 3.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn admissible_shape() {
        for seed in 0..50 {
            let u = random_admissible(seed, 1 + (seed as usize % 9), 7.0, 2.0).unwrap();
            assert_eq!(u.values()[0], 0.0);
            assert!(u.is_nonnegative());
            assert_eq!(u.grid().radius(), 7.0);
            assert!(u.values().iter().all(|&v| v <= 2.0));
        }
    }

    #[test]
    fn single_piece_is_linear() {
        let u = random_admissible(3, 1, 4.0, 1.0).unwrap();
        let s: Vec<f64> = u.slopes().collect();
        assert_eq!(s.len(), 2);
        assert!((s[0] - s[1]).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(random_admissible(0, 0, 1.0, 1.0).is_err());
        assert!(random_admissible(0, 3, 0.0, 1.0).is_err());
        assert!(random_admissible(0, 3, 1.0, -1.0).is_err());
    }
}
