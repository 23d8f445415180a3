//! Thin wrappers over `rand_distr` that accept degenerate parameters.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};

use crate::rng::Rng;

/// Poisson draw; zero for `lambda <= 0`.
pub fn poisson(rng: &mut Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 || lambda.is_nan() {
        return 0;
    }
    let x: f64 = Poisson::new(lambda)
        .expect("finite positive Poisson mean")
        .sample(rng);
    x as u64
}

pub fn bernoulli(rng: &mut Rng, p: f64) -> bool {
    if p >= 1.0 {
        true
    } else if p <= 0.0 {
        false
    } else {
        rng.random::<f64>() < p
    }
}

pub fn binomial(rng: &mut Rng, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

/// Indices in `0..n` kept independently with probability `p`, in
/// increasing order, by geometric skipping.
pub fn bernoulli_subset(rng: &mut Rng, n: usize, p: f64) -> Vec<usize> {
    if p >= 1.0 {
        return (0..n).collect();
    }
    if p <= 0.0 || n == 0 {
        return Vec::new();
    }
    let geo = Geometric::new(p).expect("probability in (0,1)");
    let mut out = Vec::new();
    let mut i: u64 = 0;
    loop {
        i = i.saturating_add(geo.sample(rng));
        if i >= n as u64 {
            return out;
        }
        out.push(i as usize);
        i += 1;
    }
}

/// Uniform draw on `[0, s)`.
pub fn uniform(rng: &mut Rng, s: f64) -> f64 {
    rng.random::<f64>() * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn degenerate_parameters() {
        let mut rng = stream(0, "dist", 0);
        assert_eq!(poisson(&mut rng, 0.0), 0);
        assert!(bernoulli(&mut rng, 1.0));
        assert!(!bernoulli(&mut rng, 0.0));
        assert_eq!(binomial(&mut rng, 5, 1.0), 5);
        assert_eq!(bernoulli_subset(&mut rng, 4, 1.0), vec![0, 1, 2, 3]);
        assert!(bernoulli_subset(&mut rng, 4, 0.0).is_empty());
    }

    #[test]
    fn subset_inclusion_rate() {
        let mut rng = stream(1, "dist", 0);
        let reps = 20_000;
        let mut hits = [0u32; 5];
        for _ in 0..reps {
            for i in bernoulli_subset(&mut rng, 5, 0.3) {
                hits[i] += 1;
            }
        }
        let sd = (0.3 * 0.7 / reps as f64).sqrt();
        for h in hits {
            assert!((h as f64 / reps as f64 - 0.3).abs() < 4.0 * sd);
        }
    }
}
