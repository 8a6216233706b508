use rand::Rng;

use crate::{Error, Result, TOL};

/// Draws an arm by inverse-CDF sampling, accumulating in arm order.
pub fn sample_arm<R: Rng + ?Sized>(distribution: &[f64], rng: &mut R) -> Result<usize> {
    let sum: f64 = distribution.iter().sum();
    if distribution.is_empty() || (sum - 1.0).abs() > TOL || distribution.iter().any(|&x| x < -TOL) {
        return Err(Error::NotNormalized { sum });
    }
    let u: f64 = rng.random::<f64>() * sum;
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &p) in distribution.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = a;
        if u < acc {
            return Ok(a);
        }
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(sample_arm(&[0.0, 0.0, 1.0, 0.0], &mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn uniform_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_arm(&[0.25; 4], &mut rng).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((0.24..=0.26).contains(&f), "{f}");
        }
    }

    #[test]
    fn seeded_sequence_is_reproducible() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample_arm(&[0.1, 0.2, 0.3, 0.4], &mut rng).unwrap())
                .collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn rejects_unnormalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            sample_arm(&[0.5, 0.4], &mut rng),
            Err(Error::NotNormalized { .. })
        ));
    }
}
