//! Seeded random inputs: points on the fundamental annulus, unit vectors, admissible metrics.

use crate::invariant::{MetricCoefficients, MetricSlice};
use crate::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `k` derived from `seed`.
pub fn substream(seed: u64, k: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}

/// Standard complex Gaussian entries.
pub fn complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Uniform on the unit sphere of `ℂⁿ`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    loop {
        let v = complex_vector(rng, n);
        let r = v.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if r > 1e-8 {
            return v.into_iter().map(|w| w / r).collect();
        }
    }
}

/// Uniform direction with radius uniform in `[0.5, 1.5]`.
pub fn annulus_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let r = rng.gen_range(0.5..=1.5);
    unit_vector(rng, n).into_iter().map(|w| w * r).collect()
}

fn disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Admissible metric on `slice`: `r², s², t² ∈ [0.5, 2]`, off-diagonal terms in the disk of radius 0.4.
pub fn random_metric<R: Rng + ?Sized>(rng: &mut R, slice: &MetricSlice) -> MetricCoefficients {
    loop {
        let m = MetricCoefficients {
            r2: rng.gen_range(0.5..=2.0),
            s2: rng.gen_range(0.5..=2.0),
            t2: rng.gen_range(0.5..=2.0),
            u: disk(rng, 0.4),
            v: disk(rng, 0.4),
            z: disk(rng, 0.4),
        };
        let m = slice.apply(m);
        if m.validate().is_ok() {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = annulus_point(&mut seeded(7), 3);
        let b = annulus_point(&mut seeded(7), 3);
        assert_eq!(a, b);
        let c = annulus_point(&mut substream(7, 1), 3);
        assert_ne!(a, c);
    }

    #[test]
    fn ranges() {
        let mut rng = seeded(1);
        for _ in 0..500 {
            let z = annulus_point(&mut rng, 4);
            let r = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
            assert!((0.5 - 1e-12..=1.5 + 1e-12).contains(&r));
            let m = random_metric(&mut rng, &MetricSlice::GENERIC);
            assert!(m.validate().is_ok());
            let d = random_metric(&mut rng, &MetricSlice::DIAGONAL);
            assert_eq!((d.u, d.v, d.z), (C64::from(0.0), C64::from(0.0), C64::from(0.0)));
        }
    }
}
