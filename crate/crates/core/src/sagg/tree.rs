//! Recursive partition of the task space into regions of distinct interest.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::env::{Outcome, Rect, TASK_SPACE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalAttempt {
    pub goal: Outcome,
    pub final_outcome: Outcome,
    pub competence: f64,
    pub t: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterestParams {
    /// Sliding window length; even.
    pub zeta: usize,
    /// A leaf holding more attempts than this is split.
    pub g_max: usize,
    /// Evenly spaced cut positions tried per dimension.
    pub split_candidates: usize,
    pub min_child: usize,
}

impl Default for InterestParams {
    fn default() -> Self {
        InterestParams {
            zeta: 20,
            g_max: 50,
            split_candidates: 9,
            min_child: 5,
        }
    }
}

impl InterestParams {
    pub fn validate(&self) -> Result<()> {
        if self.zeta < 2 || self.zeta % 2 != 0 {
            return Err(Error::Config("zeta must be an even integer >= 2".into()));
        }
        if self.min_child < 1 {
            return Err(Error::Config("min_child must be >= 1".into()));
        }
        if self.g_max < self.zeta {
            return Err(Error::Config("g_max must be >= zeta".into()));
        }
        if self.split_candidates < 1 {
            return Err(Error::Config("split_candidates must be >= 1".into()));
        }
        Ok(())
    }
}

/// Absolute competence progress over the `zeta` most recent competences.
///
/// With fewer than `zeta` values all of them are used, the older half being
/// the first `n / 2`. The divisor stays `zeta`.
pub fn interest_of(competences: &[f64], zeta: usize) -> f64 {
    let window = &competences[competences.len().saturating_sub(zeta)..];
    if window.len() < 2 {
        return 0.0;
    }
    let (older, recent) = window.split_at(window.len() / 2);
    (older.iter().sum::<f64>() - recent.iter().sum::<f64>()).abs() / zeta as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub bounds: Rect,
    attempts: Vec<GoalAttempt>,
    children: Option<(usize, usize)>,
    cut: Option<Cut>,
    depth: usize,
}

impl Region {
    fn leaf(bounds: Rect, depth: usize) -> Self {
        Region {
            bounds,
            attempts: Vec::new(),
            children: None,
            cut: None,
            depth,
        }
    }

    pub fn attempts(&self) -> &[GoalAttempt] {
        &self.attempts
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn interest(&self, zeta: usize) -> f64 {
        let c: Vec<f64> = self.attempts.iter().map(|a| a.competence).collect();
        interest_of(&c, zeta)
    }

    /// Half-open membership `[lo, hi)`, closed at the outer edge of the task space.
    pub fn contains(&self, p: &Outcome) -> bool {
        (0..2).all(|d| {
            let v = p.coord(d);
            v >= self.bounds.lo[d]
                && (v < self.bounds.hi[d] || (v == self.bounds.hi[d] && v == TASK_SPACE.hi[d]))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cut {
    pub dim: usize,
    pub position: f64,
}

/// Everything needed to re-check one split after the fact.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitRecord {
    pub bounds: Rect,
    pub attempts: Vec<GoalAttempt>,
    pub cut: Cut,
    pub score: f64,
}

/// Cut positions tried along `dim` of `bounds`.
pub fn candidate_cuts(bounds: &Rect, dim: usize, count: usize) -> impl Iterator<Item = f64> + '_ {
    (1..=count).map(move |i| bounds.lo[dim] + bounds.width(dim) * i as f64 / (count + 1) as f64)
}

/// Best admissible cut of `attempts` inside `bounds`, with its score.
/// Ties keep the first candidate in (dimension, position) order.
pub fn best_cut(bounds: &Rect, attempts: &[GoalAttempt], params: &InterestParams) -> Option<(Cut, f64)> {
    let mut best: Option<(Cut, f64)> = None;
    for dim in 0..2 {
        for position in candidate_cuts(bounds, dim, params.split_candidates) {
            let (left, right): (Vec<f64>, Vec<f64>) = {
                let mut l = Vec::new();
                let mut r = Vec::new();
                for a in attempts {
                    if a.goal.coord(dim) < position {
                        l.push(a.competence);
                    } else {
                        r.push(a.competence);
                    }
                }
                (l, r)
            };
            if left.len() < params.min_child || right.len() < params.min_child {
                continue;
            }
            let score = (interest_of(&left, params.zeta) - interest_of(&right, params.zeta)).abs();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((Cut { dim, position }, score));
            }
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct RegionTree {
    nodes: Vec<Region>,
    params: InterestParams,
    clock: u64,
    splits: Vec<SplitRecord>,
}

impl RegionTree {
    pub fn new(params: InterestParams) -> Result<Self> {
        params.validate()?;
        Ok(RegionTree {
            nodes: vec![Region::leaf(TASK_SPACE, 0)],
            params,
            clock: 0,
            splits: Vec::new(),
        })
    }

    pub fn params(&self) -> &InterestParams {
        &self.params
    }

    pub fn region(&self, id: usize) -> &Region {
        &self.nodes[id]
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Region> {
        self.nodes.iter().filter(|r| r.is_leaf())
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn total_attempts(&self) -> usize {
        self.leaves().map(|r| r.attempts.len()).sum()
    }

    pub fn splits(&self) -> &[SplitRecord] {
        &self.splits
    }

    /// The leaf whose box holds `p`, or `None` outside the task space.
    pub fn leaf_for(&self, p: &Outcome) -> Option<usize> {
        if !TASK_SPACE.contains_closed(p) {
            return None;
        }
        let mut id = 0;
        while let (Some((l, r)), Some(cut)) = (self.nodes[id].children, self.nodes[id].cut) {
            id = if p.coord(cut.dim) < cut.position { l } else { r };
        }
        Some(id)
    }

    /// Timestamp the next recorded attempt will receive.
    pub fn next_timestamp(&self) -> u64 {
        self.clock
    }

    /// Stamps and files an attempt.
    pub fn record(&mut self, goal: Outcome, final_outcome: Outcome, competence: f64) -> Result<()> {
        self.record_attempt(GoalAttempt {
            goal,
            final_outcome,
            competence,
            t: self.clock,
        })
    }

    /// Appends `attempt` to the leaf holding its goal and splits that leaf
    /// once it holds more than `g_max` attempts.
    pub fn record_attempt(&mut self, attempt: GoalAttempt) -> Result<()> {
        let id = self
            .leaf_for(&attempt.goal)
            .ok_or_else(|| Error::Domain(format!("goal {:?} outside the task space", attempt.goal)))?;
        if attempt.t < self.clock {
            return Err(Error::Domain(format!(
                "attempt time {} precedes {}",
                attempt.t, self.clock
            )));
        }
        if !(-1.0..=0.0).contains(&attempt.competence) {
            return Err(Error::Domain(format!(
                "competence {} outside [-1, 0]",
                attempt.competence
            )));
        }
        self.clock = attempt.t + 1;
        self.nodes[id].attempts.push(attempt);
        if self.nodes[id].attempts.len() > self.params.g_max {
            self.split(id);
        }
        Ok(())
    }

    fn split(&mut self, id: usize) {
        let node = &self.nodes[id];
        let Some((cut, score)) = best_cut(&node.bounds, &node.attempts, &self.params) else {
            return;
        };
        let bounds = node.bounds;
        let depth = node.depth;
        let attempts = std::mem::take(&mut self.nodes[id].attempts);
        let mut left_box = bounds;
        let mut right_box = bounds;
        left_box.hi[cut.dim] = cut.position;
        right_box.lo[cut.dim] = cut.position;
        let mut left = Region::leaf(left_box, depth + 1);
        let mut right = Region::leaf(right_box, depth + 1);
        for a in &attempts {
            if a.goal.coord(cut.dim) < cut.position {
                left.attempts.push(*a);
            } else {
                right.attempts.push(*a);
            }
        }
        let l = self.nodes.len();
        self.nodes.push(left);
        self.nodes.push(right);
        let parent = &mut self.nodes[id];
        parent.children = Some((l, l + 1));
        parent.cut = Some(cut);
        self.splits.push(SplitRecord {
            bounds,
            attempts,
            cut,
            score,
        });
    }

    fn subtree_attempts(&self, id: usize, out: &mut Vec<GoalAttempt>) {
        let node = &self.nodes[id];
        out.extend_from_slice(&node.attempts);
        if let Some((l, r)) = node.children {
            self.subtree_attempts(l, out);
            self.subtree_attempts(r, out);
        }
    }

    /// One line per node, depth-first:
    /// `depth lo_x lo_y hi_x hi_y n_attempts interest`.
    /// Internal nodes report the merged, time-ordered attempts of their subtree.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let mut attempts = Vec::new();
            self.subtree_attempts(id, &mut attempts);
            attempts.sort_by_key(|a| a.t);
            let comps: Vec<f64> = attempts.iter().map(|a| a.competence).collect();
            let b = node.bounds;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                node.depth,
                b.lo[0],
                b.lo[1],
                b.hi[0],
                b.hi[1],
                attempts.len(),
                interest_of(&comps, self.params.zeta)
            );
            if let Some((l, r)) = node.children {
                stack.push(r);
                stack.push(l);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attempt(x: f64, y: f64, c: f64, t: u64) -> GoalAttempt {
        let g = Outcome::new(x, y);
        GoalAttempt {
            goal: g,
            final_outcome: g,
            competence: c,
            t,
        }
    }

    #[test]
    fn interest_examples() {
        assert!((interest_of(&[-1.0, -1.0, -0.5, -0.5], 4) - 0.25).abs() < 1e-15);
        assert_eq!(interest_of(&[-0.3; 12], 4), 0.0);
        assert_eq!(interest_of(&[-0.3], 4), 0.0);
        assert_eq!(interest_of(&[], 4), 0.0);
        // Three values: older half is the first one.
        assert!((interest_of(&[-1.0, 0.0, 0.0], 4) - 0.25).abs() < 1e-15);
        // Only the last zeta count.
        assert!((interest_of(&[-1.0, -1.0, 0.0, 0.0, -1.0, 0.0], 4) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn split_threshold() {
        let params = InterestParams {
            zeta: 2,
            g_max: 4,
            split_candidates: 3,
            min_child: 1,
        };
        let mut tree = RegionTree::new(params).unwrap();
        let xs = [-0.8, -0.4, 0.4, 0.8, 0.1];
        for (i, x) in xs.iter().take(4).enumerate() {
            tree.record(Outcome::new(*x, 0.0), Outcome::new(*x, 0.0), -(i as f64) / 4.0)
                .unwrap();
            assert_eq!(tree.node_count(), 1);
        }
        tree.record(Outcome::new(xs[4], 0.0), Outcome::new(0.0, 0.0), -1.0)
            .unwrap();
        assert_eq!(tree.node_count(), 3);
        assert_eq!(tree.splits().len(), 1);
        let (l, r) = tree.nodes[0].children.unwrap();
        assert_eq!(
            tree.region(l).attempts().len() + tree.region(r).attempts().len(),
            5
        );
        assert!(tree.region(0).attempts().is_empty());
    }

    #[test]
    fn outside_goal_is_rejected() {
        let mut tree = RegionTree::new(InterestParams::default()).unwrap();
        let err = tree.record(Outcome::new(1.5, 0.0), Outcome::default(), -1.0);
        assert!(matches!(err, Err(Error::Domain(_))));
        assert_eq!(tree.total_attempts(), 0);
    }

    #[test]
    fn no_admissible_cut_means_no_split() {
        let params = InterestParams {
            zeta: 2,
            g_max: 2,
            split_candidates: 1,
            min_child: 2,
        };
        let mut tree = RegionTree::new(params).unwrap();
        for t in 0..3 {
            tree.record_attempt(attempt(0.5, 0.5, -1.0, t)).unwrap();
        }
        assert_eq!(tree.node_count(), 1);
    }

    #[test]
    fn split_separates_failing_and_improving_halves() {
        let params = InterestParams {
            zeta: 8,
            g_max: 16,
            split_candidates: 9,
            min_child: 2,
        };
        let mut tree = RegionTree::new(params).unwrap();
        let mut t = 0;
        for i in 0..8 {
            // Left half: constant failure; right half: improving competence.
            tree.record_attempt(attempt(-0.7 + 0.05 * i as f64, 0.0, -1.0, t)).unwrap();
            t += 1;
            let c = -1.0 + i as f64 / 7.0;
            tree.record_attempt(attempt(0.3 + 0.05 * i as f64, 0.0, c, t)).unwrap();
            t += 1;
        }
        tree.record_attempt(attempt(0.9, 0.0, 0.0, t)).unwrap();
        let split = &tree.splits()[0];
        assert_eq!(split.cut.dim, 0);
        assert!(split.cut.position > -0.35 && split.cut.position <= 0.3);
    }

    #[test]
    fn upper_edge_belongs_to_a_leaf() {
        let tree = RegionTree::new(InterestParams::default()).unwrap();
        let p = Outcome::new(1.0, 1.0);
        let id = tree.leaf_for(&p).unwrap();
        assert!(tree.region(id).contains(&p));
    }

    #[test]
    fn snapshot_lists_every_node() {
        let params = InterestParams {
            zeta: 2,
            g_max: 2,
            split_candidates: 1,
            min_child: 1,
        };
        let mut tree = RegionTree::new(params).unwrap();
        for (t, x) in [-0.5, 0.5, 0.6].iter().enumerate() {
            tree.record_attempt(attempt(*x, 0.0, -0.5, t as u64)).unwrap();
        }
        let snap = tree.snapshot();
        assert_eq!(snap.lines().count(), tree.node_count());
        assert!(snap.starts_with("0 -1 -1 1 1 3 "));
    }
}
