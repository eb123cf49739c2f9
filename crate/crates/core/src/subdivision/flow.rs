//! Random walks down the subdivision tree.
//!
//! At every step one of the three children is kept, each with probability
//! 1/3 (the children have equal area). The walk of sample `i` draws from the
//! stream `(seed, i)` of [`crate::sampling`], so the output does not depend
//! on how samples are spread over worker threads.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::child_matrix;
use crate::error::{Error, Result};
use crate::sampling::{child, par_map, stream};
use crate::shape_space::{flatness, CotangentVector, GroupElement};

/// Flatness distribution over all samples after `step` subdivisions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowStats {
    pub step: usize,
    pub samples: usize,
    pub min: f64,
    pub q50: f64,
    pub max: f64,
    pub mean_log_flatness: f64,
}

impl FlowStats {
    fn from_values(step: usize, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let q50 = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        let mean_log_flatness = values.iter().map(|f| f.ln()).sum::<f64>() / n as f64;
        Self { step, samples: n, min: values[0], q50, max: values[n - 1], mean_log_flatness }
    }
}

fn walk(a: &CotangentVector, steps: usize, children: &[GroupElement; 3], rng_seed: u64, index: u64) -> Result<Vec<f64>> {
    let mut rng = stream(rng_seed, index);
    let mut shape = *a;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(flatness(&shape));
    for _ in 0..steps {
        shape = children[child(&mut rng) as usize].apply(&shape)?;
        out.push(flatness(&shape));
    }
    Ok(out)
}

/// One [`FlowStats`] row per step `0..=steps`.
///
/// `workers == 0` uses the global thread pool; the result is the same for
/// every worker count.
pub fn random_flow(
    a: &CotangentVector,
    steps: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<FlowStats>> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let children = [child_matrix(0), child_matrix(1), child_matrix(2)];
    let walks = par_map(samples, workers, |i| walk(a, steps, &children, seed, i as u64))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok((0..=steps)
        .map(|s| FlowStats::from_values(s, walks.iter().map(|w| w[s]).collect()))
        .collect())
}

/// CSV with header `step,samples,min,q50,max,mean_log_flatness`.
pub fn write_flow_csv<W: Write>(rows: &[FlowStats], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()
}
