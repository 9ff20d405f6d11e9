//! Seeded experiment sweeps written as CSV, one row per instance.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delta;
use crate::generators::{random_proper_graph, random_square, Seed};
use crate::graph::validate_rainbow_matching;
use crate::latin::{validate_transversal, ForbiddenCycles};
use crate::layered;
use crate::transversal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Theorem2,
    Theorem3,
    Theorem7,
    Cyclefree,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theorem2" => Ok(Suite::Theorem2),
            "theorem3" => Ok(Suite::Theorem3),
            "theorem7" => Ok(Suite::Theorem7),
            "cyclefree" => Ok(Suite::Cyclefree),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub suite: Suite,
    /// `δ` for `theorem2`, the square order otherwise. Instance `i` uses
    /// `sizes[i % sizes.len()]`.
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Cycle bound for `theorem7`.
    pub k: usize,
    /// Record wall-clock time; off by default so reruns are byte-identical.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance: usize,
    pub size: usize,
    pub k: Option<usize>,
    pub bound: usize,
    pub achieved: usize,
    pub valid: bool,
    pub augmentations: usize,
    pub millis: u64,
}

impl SweepRow {
    pub fn margin(&self) -> i64 {
        self.achieved as i64 - self.bound as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub valid: usize,
    pub min_margin: Option<i64>,
    pub mean_margin: Option<f64>,
}

impl std::fmt::Display for SweepSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "rows={} valid={}", self.rows, self.valid)?;
        match (self.min_margin, self.mean_margin) {
            (Some(min), Some(mean)) => write!(f, " min_margin={min} mean_margin={mean:.3}"),
            _ => write!(f, " min_margin=n/a mean_margin=n/a"),
        }
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("empty size list")]
    NoSizes,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses `a..b` (inclusive) or a comma-separated list such as `49,64,100`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>, String> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad range start in {text:?}"))?;
        let hi = hi.trim().trim_start_matches('=');
        let hi: usize = hi
            .parse()
            .map_err(|_| format!("bad range end in {text:?}"))?;
        if lo > hi {
            return Err(format!("empty range {text:?}"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("bad size {s:?}")))
        .collect()
}

/// Runs instance `index` of the sweep. Depends only on `(config, index)`.
pub fn run_instance(config: &SweepConfig, index: usize) -> SweepRow {
    let size = config.sizes[index % config.sizes.len()];
    let seed = Seed(config.seed).split(index as u64);
    let start = Instant::now();
    let mut row = SweepRow {
        instance: index,
        size,
        k: None,
        bound: 0,
        achieved: 0,
        valid: false,
        augmentations: 0,
        millis: 0,
    };
    match config.suite {
        Suite::Theorem2 => {
            let extra = (seed.split(u64::MAX).0 % 14) as usize;
            let n = (4 * size).saturating_sub(3).max(size + 1) + extra;
            row.bound = size;
            if let Ok(g) = random_proper_graph(n, size, seed) {
                row.bound = g.min_degree();
                if let Ok(sol) = delta::solve(&g, delta::DeltaOptions::default()) {
                    row.achieved = sol.matching.len();
                    row.valid = validate_rainbow_matching(&g, &sol.matching).is_ok();
                    row.augmentations = sol.log.len();
                }
            }
        }
        Suite::Theorem3 => {
            let g = random_square(size, seed).to_bipartite_factorization();
            row.bound = layered::size_bound(g.min_degree());
            if let Ok(sol) = layered::solve(&g) {
                row.achieved = sol.matching.len();
                row.valid = validate_rainbow_matching(&g, &sol.matching).is_ok();
                row.augmentations = sol.augmentations();
            }
        }
        Suite::Theorem7 => {
            let square = random_square(size, seed);
            row.k = Some(config.k);
            row.bound = transversal::theorem_bound(size, config.k.max(2));
            if let Ok(r) = transversal::build_short_cycle_free_transversal(&square, config.k) {
                row.achieved = r.transversal.len();
                row.valid =
                    validate_transversal(&square, &r.transversal, ForbiddenCycles::UpTo(config.k))
                        .is_ok();
                row.augmentations = r.stats.augmentations;
            }
        }
        Suite::Cyclefree => {
            let square = random_square(size, seed);
            row.k = Some(transversal::corollary_k(size));
            row.bound = transversal::corollary_bound(size);
            if let Ok(r) = transversal::cycle_free_transversal(&square) {
                row.achieved = r.transversal.len();
                row.valid =
                    validate_transversal(&square, &r.transversal, ForbiddenCycles::All).is_ok();
                row.augmentations = r.stats.augmentations;
            }
        }
    }
    if config.timing {
        row.millis = start.elapsed().as_millis() as u64;
    }
    row
}

const CHUNK: usize = 64;

/// Runs every instance, in parallel chunks, writing and flushing each chunk
/// in instance order.
pub fn run_sweep<W: Write>(config: &SweepConfig, out: W) -> Result<SweepSummary, SweepError> {
    if config.sizes.is_empty() {
        return Err(SweepError::NoSizes);
    }
    let mut writer = csv::Writer::from_writer(out);
    let mut margins = Vec::new();
    let mut valid = 0;
    let mut wrote_header = false;
    for lo in (0..config.trials).step_by(CHUNK) {
        let hi = (lo + CHUNK).min(config.trials);
        let rows: Vec<SweepRow> = (lo..hi)
            .into_par_iter()
            .map(|i| run_instance(config, i))
            .collect();
        for row in &rows {
            writer.serialize(row)?;
            wrote_header = true;
            if row.valid {
                valid += 1;
                margins.push(row.margin());
            }
        }
        writer.flush()?;
    }
    if !wrote_header {
        writer.write_record([
            "instance",
            "size",
            "k",
            "bound",
            "achieved",
            "valid",
            "augmentations",
            "millis",
        ])?;
        writer.flush()?;
    }
    let mean_margin =
        (!margins.is_empty()).then(|| margins.iter().sum::<i64>() as f64 / margins.len() as f64);
    Ok(SweepSummary {
        rows: config.trials,
        valid,
        min_margin: margins.iter().copied().min(),
        mean_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(suite: Suite, sizes: &[usize], trials: usize) -> SweepConfig {
        SweepConfig {
            suite,
            sizes: sizes.to_vec(),
            trials,
            seed: 11,
            k: 2,
            timing: false,
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_sizes("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_sizes("49, 64,100").unwrap(), vec![49, 64, 100]);
        assert!(parse_sizes("6..2").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let c = config(Suite::Theorem2, &[2, 3, 4], 70);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let sa = run_sweep(&c, &mut a).unwrap();
        run_sweep(&c, &mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa.rows, 70);
        assert_eq!(sa.valid, 70);
        assert_eq!(sa.min_margin, Some(0));
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("instance,size,k,bound,achieved,valid,augmentations,millis\n"));
        assert_eq!(text.lines().count(), 71);
    }

    #[test]
    fn every_suite_runs() {
        for (suite, sizes) in [
            (Suite::Theorem3, vec![8]),
            (Suite::Theorem7, vec![10]),
            (Suite::Cyclefree, vec![1, 4, 9]),
        ] {
            let mut out = Vec::new();
            let s = run_sweep(&config(suite, &sizes, 3), &mut out).unwrap();
            assert_eq!(s.valid, 3, "{suite:?}");
            assert!(s.min_margin.unwrap() >= 0);
        }
    }

    #[test]
    fn empty_sweep_has_header() {
        let mut out = Vec::new();
        run_sweep(&config(Suite::Theorem3, &[4], 0), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1);
    }
}
