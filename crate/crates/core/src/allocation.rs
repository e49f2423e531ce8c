//! Entropy-tiered sampling budget allocation.
//!
//! A probe entropy in `[0, ln M]` maps onto one of three budget tiers:
//! a single path below `tau1`, half the budget between `tau1` and `tau2`,
//! and the full budget otherwise. Thresholds are fractions of `ln M`, so
//! the decision is invariant to the log base as long as entropy and
//! thresholds use the same one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold fractions of `ln M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub tau1_fraction: f64,
    pub tau2_fraction: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            tau1_fraction: 0.1,
            tau2_fraction: 1.0 / 3.0,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tau1_fraction > 0.0
            && self.tau2_fraction < 1.0
            && self.tau1_fraction < self.tau2_fraction;
        if ok {
            Ok(())
        } else {
            Err(Error::BadThresholdFractions {
                tau1: self.tau1_fraction,
                tau2: self.tau2_fraction,
            })
        }
    }
}

/// Derived entropy thresholds, in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau1: f64,
    pub tau2: f64,
}

/// Budget tier for one problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetTier {
    Single,
    Half,
    Full,
}

impl std::fmt::Display for BudgetTier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BudgetTier::Single => write!(f, "single"),
            BudgetTier::Half => write!(f, "half"),
            BudgetTier::Full => write!(f, "full"),
        }
    }
}

/// The tier chosen for a problem and the sample count it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetDecision {
    pub problem_id: String,
    pub entropy_nats: f64,
    pub tier: BudgetTier,
    pub samples: usize,
}

/// Derive `(tau1, tau2)` from the probe sample count `M`.
pub fn compute_thresholds(m: usize, cfg: &ThresholdConfig) -> Result<Thresholds> {
    if m < 2 {
        return Err(Error::DegenerateEntropyRange(m));
    }
    cfg.validate()?;
    let ln_m = (m as f64).ln();
    Ok(Thresholds {
        tau1: cfg.tau1_fraction * ln_m,
        tau2: cfg.tau2_fraction * ln_m,
    })
}

/// Map an entropy score to a budget tier under the three-branch rule with
/// closed-left boundaries: `single` below `tau1`, `half` on `[tau1, tau2)`,
/// `full` otherwise. Half of an odd budget rounds up.
pub fn allocate_budget(
    problem_id: &str,
    entropy_nats: f64,
    n: usize,
    thresholds: &Thresholds,
) -> Result<BudgetDecision> {
    if entropy_nats < 0.0 {
        return Err(Error::NegativeEntropy(entropy_nats));
    }
    if n == 0 {
        return Err(Error::ZeroBudget);
    }
    let (tier, samples) = if entropy_nats < thresholds.tau1 {
        (BudgetTier::Single, 1)
    } else if entropy_nats < thresholds.tau2 {
        (BudgetTier::Half, n.div_ceil(2))
    } else {
        (BudgetTier::Full, n)
    };
    Ok(BudgetDecision {
        problem_id: problem_id.to_string(),
        entropy_nats,
        tier,
        samples,
    })
}
