//! Reproducible random streams.
//!
//! Every Monte-Carlo sample `i` under seed `s` draws from its own PCG32
//! (XSH-RR 64/32) stream constructed as `Pcg32::new(s, i)`. Draws are mapped
//! to values as follows, so other implementations can reproduce a run:
//!
//! - uniform `f64` in `[0, 1)`: two consecutive `u32` draws `hi, lo`, then
//!   `((hi << 32 | lo) >> 11) * 2^-53`;
//! - uniform child in `{0, 1, 2}`: a `u32` draw, rejected when it equals
//!   `u32::MAX`, otherwise taken modulo 3.

use rand_core::RngCore;
use rand_pcg::Pcg32;

use crate::shape_space::{from_halfplane, CotangentVector, HalfPlanePoint};

/// Real-part range of sampled half-plane points.
pub const SAMPLE_RE: (f64, f64) = (0.05, 0.95);
/// Imaginary-part range of sampled half-plane points.
pub const SAMPLE_IM: (f64, f64) = (0.05, 2.0);

pub fn stream(seed: u64, index: u64) -> Pcg32 {
    Pcg32::new(seed, index)
}

pub fn uniform(rng: &mut Pcg32) -> f64 {
    let hi = u64::from(rng.next_u32());
    let lo = u64::from(rng.next_u32());
    ((hi << 32 | lo) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn child(rng: &mut Pcg32) -> u8 {
    loop {
        let x = rng.next_u32();
        if x != u32::MAX {
            return (x % 3) as u8;
        }
    }
}

/// Half-plane point drawn uniformly from `SAMPLE_RE × SAMPLE_IM`.
pub fn halfplane_point(rng: &mut Pcg32) -> HalfPlanePoint {
    let re = SAMPLE_RE.0 + (SAMPLE_RE.1 - SAMPLE_RE.0) * uniform(rng);
    let im = SAMPLE_IM.0 + (SAMPLE_IM.1 - SAMPLE_IM.0) * uniform(rng);
    HalfPlanePoint { re, im }
}

/// The `index`-th random shape under `seed`.
pub fn random_shape(seed: u64, index: u64) -> CotangentVector {
    let z = halfplane_point(&mut stream(seed, index));
    from_halfplane(z).expect("sampling rectangle lies inside the upper half plane")
}

/// Maps `f` over `0..n` on a pool of `workers` threads, keeping index order.
/// `workers == 0` uses the global pool.
pub(crate) fn par_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect();
    if workers == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => (0..n).map(&f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u32> = (0..8).map({
            let mut r = stream(7, 3);
            move |_| r.next_u32()
        }).collect();
        let b: Vec<u32> = (0..8).map({
            let mut r = stream(7, 3);
            move |_| r.next_u32()
        }).collect();
        let c: Vec<u32> = (0..8).map({
            let mut r = stream(7, 4);
            move |_| r.next_u32()
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_and_child_ranges() {
        let mut r = stream(0, 0);
        let mut counts = [0usize; 3];
        for _ in 0..3000 {
            let u = uniform(&mut r);
            assert!((0.0..1.0).contains(&u));
            counts[child(&mut r) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| c > 900 && c < 1100), "{counts:?}");
    }

    #[test]
    fn par_map_is_worker_independent() {
        let f = |i: usize| random_shape(11, i as u64).as_array();
        assert_eq!(par_map(200, 1, f), par_map(200, 4, f));
        assert_eq!(par_map(200, 0, f), par_map(200, 3, f));
    }
}
