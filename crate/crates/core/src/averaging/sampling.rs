use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// `t = 1 + i/count` for `i = 0..=count`.
    Dense { count: usize },
    /// Blocks `τ ∈ [2^{k−m−1}, 2^{k−m}]` for `k_min ≤ k ≤ k_max` in the
    /// reparametrized time `τ = t^{a_min}`, each with `per_block`
    /// geometrically spaced steps.
    DyadicBlocks {
        k_min: i32,
        k_max: i32,
        per_block: usize,
        offset: i32,
    },
}

/// A finite set of dilation parameters standing in for a supremum over `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSampling {
    mode: SamplingMode,
    samples: Vec<f64>,
}

impl TimeSampling {
    /// Uniform samples of `[1, 2]`. Doubling `count` gives a superset.
    pub fn dense(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("dense sampling needs a positive count"));
        }
        let samples = (0..=count).map(|i| 1.0 + i as f64 / count as f64).collect();
        Ok(TimeSampling {
            mode: SamplingMode::Dense { count },
            samples,
        })
    }

    /// Default density: 2^9 steps per unit interval.
    pub fn default_dense() -> Self {
        TimeSampling::dense(512).expect("positive count")
    }

    /// Dyadic blocks with block offset `offset` (the `m` of the support
    /// rule). `time_power` is the smallest dilation exponent.
    pub fn dyadic_blocks(
        k_min: i32,
        k_max: i32,
        per_block: usize,
        offset: i32,
        time_power: f64,
    ) -> Result<Self> {
        if k_max < k_min {
            return Err(invalid("empty block range"));
        }
        if k_max - k_min > 256 {
            return Err(invalid("block range too long"));
        }
        if per_block == 0 {
            return Err(invalid("blocks need at least one step"));
        }
        if !(time_power > 0.0) {
            return Err(invalid("time power must be positive"));
        }
        let mut samples = Vec::with_capacity((k_max - k_min + 1) as usize * per_block + 1);
        for k in k_min..=k_max {
            let start = (k - offset - 1) as f64;
            let steps = if k == k_max { per_block + 1 } else { per_block };
            for i in 0..steps {
                let tau = (start + i as f64 / per_block as f64).exp2();
                samples.push(tau.powf(1.0 / time_power));
            }
        }
        Ok(TimeSampling {
            mode: SamplingMode::DyadicBlocks {
                k_min,
                k_max,
                per_block,
                offset,
            },
            samples,
        })
    }

    /// Arbitrary sorted positive samples.
    pub fn explicit(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(invalid("time samples must be positive and finite"));
        }
        samples.sort_by(f64::total_cmp);
        samples.dedup();
        let count = samples.len();
        Ok(TimeSampling {
            mode: SamplingMode::Dense { count },
            samples,
        })
    }

    pub fn mode(&self) -> &SamplingMode {
        &self.mode
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_doubling_is_superset() {
        let a = TimeSampling::dense(16).unwrap();
        let b = TimeSampling::dense(32).unwrap();
        assert!(a.samples().iter().all(|t| b.samples().contains(t)));
        assert_eq!(a.samples()[0], 1.0);
        assert_eq!(*a.samples().last().unwrap(), 2.0);
    }

    #[test]
    fn blocks_cover_their_ranges() {
        let s = TimeSampling::dyadic_blocks(-1, 2, 8, 3, 1.0).unwrap();
        assert_eq!(s.samples()[0], 2f64.powi(-5));
        assert_eq!(*s.samples().last().unwrap(), 2f64.powi(-1));
        assert!(s.samples().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.len(), 4 * 8 + 1);
    }
}
