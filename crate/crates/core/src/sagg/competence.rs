use serde::{Deserialize, Serialize};

use crate::env::{Outcome, TASK_SPACE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompetenceParams {
    /// Similarity above this counts as reached.
    pub eps_sim: f64,
    /// Landing point of the rest pose; filled from the environment when left unset.
    #[serde(skip)]
    pub origin: Outcome,
    pub y_diameter: f64,
}

impl Default for CompetenceParams {
    fn default() -> Self {
        CompetenceParams {
            eps_sim: -0.02,
            origin: Outcome::default(),
            y_diameter: TASK_SPACE.diameter(),
        }
    }
}

impl CompetenceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_sim > -1.0 && self.eps_sim < 0.0) {
            return Err(Error::Config("eps_sim must lie in (-1, 0)".into()));
        }
        if !(self.y_diameter > 0.0) {
            return Err(Error::Config("y_diameter must be positive".into()));
        }
        Ok(())
    }

    /// Euclidean distance rescaled by the task-space diameter.
    pub fn scaled_distance(&self, a: &Outcome, b: &Outcome) -> f64 {
        a.distance(b) / self.y_diameter
    }
}

/// Distance to the goal relative to the goal's distance from the origin,
/// negated and floored at -1.
pub fn similarity(goal: &Outcome, final_outcome: &Outcome, params: &CompetenceParams) -> f64 {
    let to_origin = params.scaled_distance(goal, &params.origin);
    let miss = params.scaled_distance(goal, final_outcome);
    if to_origin == 0.0 {
        return if miss == 0.0 { 0.0 } else { -1.0 };
    }
    let ratio = miss / to_origin;
    if ratio > 1.0 {
        -1.0
    } else {
        -ratio
    }
}

pub fn competence_from_similarity(sim: f64, eps_sim: f64) -> f64 {
    if sim <= eps_sim {
        sim
    } else {
        0.0
    }
}

pub fn competence(goal: &Outcome, final_outcome: &Outcome, params: &CompetenceParams) -> f64 {
    competence_from_similarity(similarity(goal, final_outcome, params), params.eps_sim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> CompetenceParams {
        CompetenceParams {
            eps_sim: -0.05,
            origin: Outcome::new(0.0, 0.0),
            ..CompetenceParams::default()
        }
    }

    #[test]
    fn similarity_examples() {
        let p = params();
        let g = Outcome::new(1.0, 0.0);
        assert_eq!(similarity(&g, &g, &p), 0.0);
        assert_eq!(similarity(&g, &Outcome::new(0.0, 0.0), &p), -1.0);
        assert!((similarity(&g, &Outcome::new(0.5, 0.0), &p) + 0.5).abs() < 1e-15);
        assert_eq!(similarity(&g, &Outcome::new(-1.0, 0.5), &p), -1.0);
    }

    #[test]
    fn degenerate_goal_at_origin() {
        let p = params();
        let o = p.origin;
        assert_eq!(similarity(&o, &o, &p), 0.0);
        assert_eq!(similarity(&o, &Outcome::new(1e-9, 0.0), &p), -1.0);
    }

    #[test]
    fn competence_threshold() {
        assert_eq!(competence_from_similarity(-0.5, -0.05), -0.5);
        assert_eq!(competence_from_similarity(-0.01, -0.05), 0.0);
        assert_eq!(competence_from_similarity(-0.05, -0.05), -0.05);
    }

    #[test]
    fn validation() {
        assert!(CompetenceParams::default().validate().is_ok());
        let bad = CompetenceParams {
            eps_sim: 0.1,
            ..CompetenceParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
