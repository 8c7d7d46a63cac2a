//! Goal self-generation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::tree::RegionTree;
use crate::env::{Outcome, TASK_SPACE};
use crate::error::{Error, Result};

/// Mixing weights of the three goal modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoalModes {
    /// Uniform goal in a region drawn by interest.
    pub region: f64,
    /// Uniform goal anywhere in the task space.
    pub global: f64,
    /// Goal near the worst attempt of a region drawn by interest.
    pub worst: f64,
    /// Standard deviation of the jitter around the worst attempt.
    pub worst_sigma: f64,
}

impl Default for GoalModes {
    fn default() -> Self {
        GoalModes {
            region: 0.7,
            global: 0.2,
            worst: 0.1,
            worst_sigma: 0.05,
        }
    }
}

impl GoalModes {
    pub fn validate(&self) -> Result<()> {
        let w = [self.region, self.global, self.worst];
        if w.iter().any(|p| !(*p >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(
                "goal mode weights must be non-negative and sum to 1".into(),
            ));
        }
        if !(self.worst_sigma >= 0.0) {
            return Err(Error::Config("worst_sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// Selection probability of each region: interest above the minimum,
/// normalized. Uniform when every interest is equal.
pub fn selection_probabilities(interests: &[f64]) -> Vec<f64> {
    if interests.is_empty() {
        return Vec::new();
    }
    let min = interests.iter().copied().fold(f64::INFINITY, f64::min);
    let excess: Vec<f64> = interests.iter().map(|i| i - min).collect();
    let total: f64 = excess.iter().sum();
    if total > 0.0 {
        excess.iter().map(|e| e / total).collect()
    } else {
        vec![1.0 / interests.len() as f64; interests.len()]
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left `acc` just under 1; take the last index with mass.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Index into `interests` drawn with the interest-proportional law.
pub fn select_index<R: Rng + ?Sized>(interests: &[f64], rng: &mut R) -> usize {
    sample_index(&selection_probabilities(interests), rng)
}

/// A leaf of `tree` drawn by interest; returns its node id.
pub fn select_region<R: Rng + ?Sized>(tree: &RegionTree, rng: &mut R) -> usize {
    let ids = tree.leaf_ids();
    let zeta = tree.params().zeta;
    let interests: Vec<f64> = ids.iter().map(|&id| tree.region(id).interest(zeta)).collect();
    ids[select_index(&interests, rng)]
}

pub fn generate_goal<R: Rng + ?Sized>(tree: &RegionTree, modes: &GoalModes, rng: &mut R) -> Outcome {
    let mode = sample_index(&[modes.region, modes.global, modes.worst], rng);
    match mode {
        1 => TASK_SPACE.sample_uniform(rng),
        2 => {
            let region = tree.region(select_region(tree, rng));
            let worst = region
                .attempts()
                .iter()
                .rev()
                .min_by(|a, b| a.competence.total_cmp(&b.competence));
            match worst {
                Some(a) => {
                    let nx: f64 = rng.sample(StandardNormal);
                    let ny: f64 = rng.sample(StandardNormal);
                    region.bounds.clamp(Outcome::new(
                        a.goal.x + modes.worst_sigma * nx,
                        a.goal.y + modes.worst_sigma * ny,
                    ))
                }
                None => region.bounds.sample_uniform(rng),
            }
        }
        _ => tree.region(select_region(tree, rng)).bounds.sample_uniform(rng),
    }
}
