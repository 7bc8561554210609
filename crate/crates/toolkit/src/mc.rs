//! Parallel Monte Carlo driver and bound sweeps.

use rayon::prelude::*;
use stealth_core::verify::{mc_chunk, mc_report, McConfig, McCounts, McReport};

/// Same result as `stealth_core::verify::mc_event_probability`, with chunks
/// spread over the rayon pool. Counts merge by addition, so the outcome
/// depends only on the seed and the chunk size.
pub fn mc_parallel(cfg: &McConfig) -> stealth_core::Result<McReport> {
    cfg.validate()?;
    let counts = (0..cfg.chunk_count())
        .into_par_iter()
        .map(|c| mc_chunk(cfg, c))
        .try_reduce(McCounts::default, |a, b| Ok(a.merge(b)))?;
    Ok(mc_report(cfg, counts))
}

/// `count` evenly spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    end
                } else {
                    start + (end - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}
