//! Block partition of the observation window, block-wise minima of the
//! observations, their consecutive differences, and the quadratic
//! noise-level estimator.

use crate::error::{Error, Result};
use crate::sim::ObservationSeries;
use crate::stats::CompensatedSum;
use std::ops::Range;

/// Which observations belong to block k covering (k h, (k+1) h).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockMembership {
    /// Strictly interior points: i with k h < i/n < (k+1) h. Observations on
    /// a block boundary (including i = 0) belong to no block.
    Interior,
    /// Half-open blocks (k h, (k+1) h]: the right-boundary observation is
    /// included, so aligned grids (n divisible by the block count) place
    /// exactly n/inv_h points in every block. This is the convention under
    /// which differences of block minima follow the bias map used for
    /// correction, and it is what the estimation experiments use.
    RightClosed,
}

/// Partition of {0, .., n} into inv_h blocks of length h = 1/inv_h.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub n: usize,
    pub inv_h: usize,
    pub membership: BlockMembership,
    /// Per-block index ranges (contiguous by construction).
    pub index_sets: Vec<Range<usize>>,
}

impl BlockPartition {
    /// Block length h.
    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.inv_h as f64
    }

    /// Indices of block k.
    pub fn block(&self, k: usize) -> Range<usize> {
        self.index_sets[k].clone()
    }
}

/// Open-interval partition (the default convention).
///
/// i belongs to block k iff k h < i/n < (k+1) h, evaluated in exact integer
/// arithmetic: k n < i inv_h < (k+1) n.
pub fn partition(n: usize, inv_h: usize) -> Result<BlockPartition> {
    partition_with(n, inv_h, BlockMembership::Interior)
}

/// Partition with an explicit membership convention.
pub fn partition_with(
    n: usize,
    inv_h: usize,
    membership: BlockMembership,
) -> Result<BlockPartition> {
    if inv_h < 2 {
        return Err(Error::InvalidPartition(format!(
            "need at least 2 blocks, got inv_h = {inv_h}"
        )));
    }
    if n / inv_h < 2 {
        return Err(Error::InvalidPartition(format!(
            "blocks too short: n = {n}, inv_h = {inv_h} leaves fewer than 2 observations per block"
        )));
    }
    let (n64, m64) = (n as u64, inv_h as u64);
    let mut index_sets = Vec::with_capacity(inv_h);
    for k in 0..m64 {
        // smallest i with i * inv_h > k * n
        let lo = (k * n64) / m64 + 1;
        let hi = match membership {
            // largest i with i * inv_h < (k+1) * n, exclusive end
            BlockMembership::Interior => {
                let b = (k + 1) * n64;
                if b % m64 == 0 {
                    b / m64
                } else {
                    b / m64 + 1
                }
            }
            // largest i with i * inv_h <= (k+1) * n, exclusive end
            BlockMembership::RightClosed => (k + 1) * n64 / m64 + 1,
        };
        if lo >= hi {
            return Err(Error::InvalidPartition(format!(
                "block {k} of {inv_h} is empty for n = {n}"
            )));
        }
        index_sets.push(lo as usize..hi as usize);
    }
    Ok(BlockPartition {
        n,
        inv_h,
        membership,
        index_sets,
    })
}

/// Block-wise minima m_k and their consecutive differences D_k.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinima {
    pub partition: BlockPartition,
    /// m[k] = min of observations in block k, length inv_h.
    pub m: Vec<f64>,
    /// diffs[k-1] = m[k] - m[k-1] for k = 1, .., inv_h - 1.
    pub diffs: Vec<f64>,
}

impl LocalMinima {
    /// Difference D_k = m_k - m_{k-1} for k in [1, inv_h - 1].
    #[inline]
    pub fn diff(&self, k: usize) -> f64 {
        self.diffs[k - 1]
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.partition.h()
    }
}

/// Compute block minima and differences of an observation series.
pub fn local_minima(obs: &ObservationSeries, partition: &BlockPartition) -> Result<LocalMinima> {
    if obs.n != partition.n {
        return Err(Error::Mismatch(format!(
            "observation count {} != partition n {}",
            obs.n, partition.n
        )));
    }
    let m: Vec<f64> = partition
        .index_sets
        .iter()
        .map(|r| obs.y[r.clone()].iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let diffs = m.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(LocalMinima {
        partition: partition.clone(),
        m,
        diffs,
    })
}

/// Quadratic estimator of the noise level eta from raw increments:
/// eta_hat = ( (1/2n) sum (Y_i - Y_{i-1})^2 )^{-1/2}.
///
/// Consistent (eta_hat = eta + O_P(n^{-1/2})) for noise with finite fourth
/// moments; the squared price increments contribute an O(eta^2/n) relative
/// distortion that matters when the noise is very small.
pub fn estimate_noise_level(obs: &ObservationSeries) -> Result<f64> {
    if obs.n < 1 || obs.y.len() < 2 {
        return Err(Error::DegenerateData("need at least one increment".into()));
    }
    let mut acc = CompensatedSum::new();
    for w in obs.y.windows(2) {
        let d = w[1] - w[0];
        acc.add(d * d);
    }
    let s = acc.value();
    if s <= 0.0 {
        return Err(Error::DegenerateData(
            "all observations equal; noise level not identified".into(),
        ));
    }
    Ok((s / (2.0 * obs.n as f64)).powf(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::NoiseConfig;
    use approx::assert_relative_eq;

    fn obs(y: Vec<f64>) -> ObservationSeries {
        ObservationSeries {
            n: y.len() - 1,
            y,
            noise: NoiseConfig::none(),
        }
    }

    #[test]
    fn open_interval_partition_n6() {
        let p = partition(6, 2).unwrap();
        assert_eq!(p.block(0), 1..3); // {1, 2}
        assert_eq!(p.block(1), 4..6); // {4, 5}; i = 3 sits on the boundary
    }

    #[test]
    fn right_closed_partition_n6() {
        let p = partition_with(6, 2, BlockMembership::RightClosed).unwrap();
        assert_eq!(p.block(0), 1..4); // {1, 2, 3}
        assert_eq!(p.block(1), 4..7); // {4, 5, 6}
    }

    #[test]
    fn aligned_partition_counts() {
        // n = 23,400 and inv_h = 1,560: 15 observations per span; the open
        // convention keeps the 14 interior ones.
        let p = partition(23_400, 1_560).unwrap();
        let mut total = 0usize;
        for k in 0..1_560 {
            let r = p.block(k);
            assert_eq!(r.len(), 14, "block {k}");
            total += r.len();
        }
        assert!(total >= 23_400 - 1_560 - 1);
        // pairwise disjoint and increasing
        for w in p.index_sets.windows(2) {
            assert!(w[0].end <= w[1].start);
        }

        let rc = partition_with(23_400, 1_560, BlockMembership::RightClosed).unwrap();
        for k in 0..1_560 {
            assert_eq!(rc.block(k).len(), 15);
        }
    }

    #[test]
    fn misaligned_partition_varies_by_one() {
        // nh = n/inv_h not integer: per-block interior counts differ by at
        // most 1 and boundary multiples are excluded.
        let (n, inv_h) = (100, 7);
        let p = partition(n, inv_h).unwrap();
        let sizes: Vec<usize> = p.index_sets.iter().map(|r| r.len()).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1, "sizes {sizes:?}");
        // exhaustive cross-check against the defining inequality
        for k in 0..inv_h {
            for i in 0..=n {
                let inside = k * n < i * inv_h && i * inv_h < (k + 1) * n;
                assert_eq!(p.block(k).contains(&i), inside, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn degenerate_partition_rejected() {
        assert!(partition(4, 4).is_err());
        assert!(partition(100, 1).is_err());
        assert!(partition(23_400, 20_000).is_err());
    }

    #[test]
    fn minima_example() {
        let series = obs(vec![9.0, 5.0, 3.0, 7.0, 2.0, 6.0, 8.0]);
        let p = partition(6, 2).unwrap();
        let lm = local_minima(&series, &p).unwrap();
        assert_eq!(lm.m, vec![3.0, 2.0]);
        assert_eq!(lm.diffs, vec![-1.0]);
        assert_eq!(lm.diff(1), -1.0);
    }

    #[test]
    fn minima_constant_and_monotone_series() {
        let p = partition(12, 3).unwrap();
        let lm = local_minima(&obs(vec![5.0; 13]), &p).unwrap();
        assert!(lm.m.iter().all(|&m| m == 5.0));
        assert!(lm.diffs.iter().all(|&d| d == 0.0));

        let increasing = obs((0..=12).map(|i| i as f64).collect());
        let lm = local_minima(&increasing, &p).unwrap();
        for k in 0..3 {
            assert_eq!(lm.m[k], p.block(k).start as f64);
        }
        assert!(lm.diffs.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn minima_bound_by_brute_scan() {
        let y: Vec<f64> = (0..=60)
            .map(|i| ((i * 37 % 61) as f64).sin() * 3.0 + 10.0)
            .collect();
        let series = obs(y.clone());
        let p = partition(60, 5).unwrap();
        let lm = local_minima(&series, &p).unwrap();
        for k in 0..5 {
            let brute = p.block(k).map(|i| y[i]).fold(f64::INFINITY, f64::min);
            assert_eq!(lm.m[k], brute);
            for i in p.block(k) {
                assert!(lm.m[k] <= y[i]);
            }
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let series = obs(vec![0.0; 13]);
        let p = partition(60, 5).unwrap();
        assert!(local_minima(&series, &p).is_err());
    }

    #[test]
    fn noise_level_alternating_closed_form() {
        // y alternates 0, c: every squared increment is c^2, so
        // eta_hat = sqrt(2)/c.
        let c = 0.02;
        let y: Vec<f64> = (0..=100).map(|i| if i % 2 == 0 { 0.0 } else { c }).collect();
        let eh = estimate_noise_level(&obs(y)).unwrap();
        assert_relative_eq!(eh, 2.0f64.sqrt() / c, max_relative = 1e-12);
    }

    #[test]
    fn noise_level_degenerate_rejected() {
        assert!(estimate_noise_level(&obs(vec![3.0; 50])).is_err());
        assert!(estimate_noise_level(&obs(vec![1.0])).is_err());
    }

    #[test]
    fn noise_level_scale_and_translation() {
        let y: Vec<f64> = (0..=200).map(|i| ((i * 29 % 83) as f64) * 1e-4).collect();
        let base = estimate_noise_level(&obs(y.clone())).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 3.0 * v).collect();
        assert_relative_eq!(
            estimate_noise_level(&obs(scaled)).unwrap(),
            base / 3.0,
            max_relative = 1e-12
        );
        let shifted: Vec<f64> = y.iter().map(|v| v + 7.0).collect();
        assert_relative_eq!(
            estimate_noise_level(&obs(shifted)).unwrap(),
            base,
            max_relative = 1e-9
        );
    }
}
