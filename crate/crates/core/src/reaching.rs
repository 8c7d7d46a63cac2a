//! Lower level of the learner: reaching one self-generated goal.
//!
//! Each movement either explores (a uniformly random action) or exploits the
//! memory as a local inverse model, then refines with a simplex search whose
//! every probe is a real movement.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{random_action, Action, ActionBounds, Environment, Outcome, ACTION_DIM};
use crate::error::{Error, Result};
use crate::memory::{reliability, Memory, Source};
use crate::nelder_mead::{minimize_with, NelderMeadConfig, Seed};
use crate::sagg::{competence, CompetenceParams, RegionTree};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachingConfig {
    /// Candidates drawn around the goal.
    pub l_max: usize,
    /// Neighborhood used for reliability and blending.
    pub k_max: usize,
    /// Weight of the local outcome variance in the reliability score.
    pub alpha: f64,
    /// Bandwidth of the Gaussian blend over neighbor actions.
    pub kernel_width: f64,
    /// Cap on simplex evaluations; the remaining budget when unset.
    pub nm_max_iters: Option<usize>,
    pub nm_tol: f64,
    /// Movements allotted per goal.
    pub budget: usize,
}

impl Default for ReachingConfig {
    fn default() -> Self {
        ReachingConfig {
            l_max: 6,
            k_max: 6,
            alpha: 0.5,
            kernel_width: 0.1,
            nm_max_iters: None,
            nm_tol: 1e-3,
            budget: 4,
        }
    }
}

impl ReachingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 || self.k_max < 2 || self.budget < 1 {
            return Err(Error::Config(
                "need l_max >= 1, k_max >= 2 and budget >= 1".into(),
            ));
        }
        if !(self.nm_tol > 0.0) || !(self.kernel_width > 0.0) || !(self.alpha >= 0.0) {
            return Err(Error::Config(
                "nm_tol and kernel_width must be positive, alpha non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Explore,
    Exploit,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Explore => "explore",
            Regime::Exploit => "exploit",
        })
    }
}

/// Explores with probability equal to the rescaled distance between the
/// goal and the closest outcome reached so far.
pub fn explore_probability(memory: &Memory, goal: &Outcome, params: &CompetenceParams) -> f64 {
    match memory.nearest(goal, 1).first() {
        Some(n) => (n.distance / params.y_diameter).min(1.0),
        None => 1.0,
    }
}

pub fn choose_regime<R: Rng + ?Sized>(
    memory: &Memory,
    goal: &Outcome,
    params: &CompetenceParams,
    rng: &mut R,
) -> Regime {
    let p = explore_probability(memory, goal, params);
    if p >= 1.0 {
        return Regime::Explore;
    }
    let u: f64 = rng.random();
    if u < p {
        Regime::Explore
    } else {
        Regime::Exploit
    }
}

pub fn explore_action<R: Rng + ?Sized>(rng: &mut R, bounds: &ActionBounds) -> Action {
    random_action(bounds, rng)
}

/// Inverse-model query result: the blended action and the neighborhood it
/// was blended from.
#[derive(Clone, Debug, PartialEq)]
pub struct ExploitPlan {
    pub action: Action,
    /// Seq of the most reliable candidate.
    pub anchor_seq: u64,
    /// `(action, outcome)` of the blended neighborhood, nearest first.
    pub neighbors: Vec<(Action, Outcome)>,
    /// Normalized blend weights, aligned with `neighbors`.
    pub weights: Vec<f64>,
}

/// Normalized Gaussian weights of the distances `d`.
pub fn gaussian_weights(distances: &[f64], width: f64) -> Vec<f64> {
    let d2_min = distances.iter().map(|d| d * d).fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = distances
        .iter()
        .map(|d| (-(d * d - d2_min) / (2.0 * width * width)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

pub fn exploit_action(
    memory: &Memory,
    goal: &Outcome,
    cfg: &ReachingConfig,
    bounds: &ActionBounds,
) -> Result<ExploitPlan> {
    let candidates = memory.nearest(goal, cfg.l_max);
    let best = candidates
        .iter()
        .map(|c| {
            let score = reliability(memory, c.exemplar, goal, cfg.k_max, cfg.alpha);
            (score, c.exemplar)
        })
        .min_by(|(sa, ea), (sb, eb)| sa.total_cmp(sb).then(ea.seq.cmp(&eb.seq)))
        .map(|(_, e)| e)
        .ok_or(Error::EmptyMemory)?;
    let local = memory.nearest(&best.outcome, cfg.k_max);
    let distances: Vec<f64> = local
        .iter()
        .map(|n| n.exemplar.outcome.distance(goal))
        .collect();
    let weights = gaussian_weights(&distances, cfg.kernel_width);
    let mut blended = [0.0; crate::env::ACTION_DIM];
    for (n, w) in local.iter().zip(&weights) {
        for (b, a) in blended.iter_mut().zip(&n.exemplar.action.0) {
            *b += w * a;
        }
    }
    Ok(ExploitPlan {
        action: bounds.clamp(&Action(blended)),
        anchor_seq: best.seq,
        neighbors: local
            .iter()
            .map(|n| (n.exemplar.action, n.exemplar.outcome))
            .collect(),
        weights,
    })
}

/// Why a movement was made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Movement {
    Reach(Regime),
    Imitation,
}

impl Movement {
    pub fn source(&self) -> Source {
        match self {
            Movement::Reach(_) => Source::Autonomous,
            Movement::Imitation => Source::Imitation,
        }
    }
}

/// Where movements go: the executor runs them in the world, memorizes
/// them, and may refuse once the run's movement budget is spent.
pub trait Executor {
    fn memory(&self) -> &Memory;

    fn bounds(&self) -> &ActionBounds;

    /// Executes one movement toward `goal`, storing it in memory.
    /// `None` means no movement could be made.
    fn execute(&mut self, action: &Action, goal: &Outcome, kind: Movement) -> Option<Outcome>;

    /// Memorizes an association seen rather than performed.
    fn observe(&mut self, action: &Action, outcome: &Outcome);

    fn tree_mut(&mut self) -> &mut RegionTree;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachingOutcomeRecord {
    pub goal: Outcome,
    pub best_final: Outcome,
    pub best_action: Action,
    pub competence: f64,
    pub movements_used: usize,
    pub regime_trace: Vec<Regime>,
    /// Outcome of every executed movement, in order.
    pub outcomes: Vec<Outcome>,
}

struct Attempt {
    goal: Outcome,
    best: Option<(Action, Outcome, f64)>,
    trace: Vec<Regime>,
    outcomes: Vec<Outcome>,
}

impl Attempt {
    fn note(&mut self, action: &Action, outcome: Outcome, regime: Regime) -> f64 {
        let d = outcome.distance(&self.goal);
        if self.best.is_none_or(|(_, _, bd)| d < bd) {
            self.best = Some((*action, outcome, d));
        }
        self.trace.push(regime);
        self.outcomes.push(outcome);
        d
    }

    fn reached(&self, params: &CompetenceParams) -> bool {
        self.best
            .is_some_and(|(_, y, _)| competence(&self.goal, &y, params) == 0.0)
    }
}

/// Tries to reach `goal` within `cfg.budget` movements, then files the
/// attempt's competence in the region tree. Returns `None` when the
/// executor refused the very first movement.
pub fn reach<X: Executor, R: Rng + ?Sized>(
    exec: &mut X,
    goal: Outcome,
    cfg: &ReachingConfig,
    params: &CompetenceParams,
    rng: &mut R,
) -> Result<Option<ReachingOutcomeRecord>> {
    let mut attempt = Attempt {
        goal,
        best: None,
        trace: Vec::new(),
        outcomes: Vec::new(),
    };
    'moves: while attempt.trace.len() < cfg.budget && !attempt.reached(params) {
        match choose_regime(exec.memory(), &goal, params, rng) {
            Regime::Explore => {
                let a = explore_action(rng, exec.bounds());
                let Some(y) = exec.execute(&a, &goal, Movement::Reach(Regime::Explore)) else {
                    break 'moves;
                };
                attempt.note(&a, y, Regime::Explore);
            }
            Regime::Exploit => {
                let bounds = *exec.bounds();
                let plan = exploit_action(exec.memory(), &goal, cfg, &bounds)?;
                let Some(y) = exec.execute(&plan.action, &goal, Movement::Reach(Regime::Exploit)) else {
                    break 'moves;
                };
                let d0 = attempt.note(&plan.action, y, Regime::Exploit);
                let remaining = cfg.budget - attempt.trace.len();
                if attempt.reached(params) || remaining == 0 {
                    continue;
                }
                let nm = NelderMeadConfig {
                    max_evals: cfg.nm_max_iters.map_or(remaining, |m| m.min(remaining)),
                    tol: cfg.nm_tol,
                    ..NelderMeadConfig::default()
                };
                // The simplex starts from memorized actions whose outcomes are
                // already known, so building it costs no movements.
                let neighbors: Vec<Seed> = exec
                    .memory()
                    .nearest(&goal, ACTION_DIM)
                    .iter()
                    .map(|n| {
                        let e = n.exemplar;
                        Seed::known(e.action.0.to_vec(), e.outcome.distance(&goal))
                    })
                    .collect();
                let mut stopped = false;
                minimize_with(
                    |x| {
                        if attempt.reached(params) {
                            return None;
                        }
                        let a = Action::from_slice(x).expect("simplex works in action space");
                        match exec.execute(&a, &goal, Movement::Reach(Regime::Exploit)) {
                            Some(y) => Some(attempt.note(&a, y, Regime::Exploit)),
                            None => {
                                stopped = true;
                                None
                            }
                        }
                    },
                    Seed::known(plan.action.0.to_vec(), d0),
                    &neighbors,
                    &bounds.lo,
                    &bounds.hi,
                    &nm,
                );
                if stopped {
                    break 'moves;
                }
            }
        }
    }
    let Some((best_action, best_final, _)) = attempt.best else {
        return Ok(None);
    };
    let gamma = competence(&goal, &best_final, params);
    exec.tree_mut().record(goal, best_final, gamma)?;
    Ok(Some(ReachingOutcomeRecord {
        goal,
        best_final,
        best_action,
        competence: gamma,
        movements_used: attempt.trace.len(),
        regime_trace: attempt.trace,
        outcomes: attempt.outcomes,
    }))
}

/// Executor that runs movements straight in an environment with no
/// movement cap beyond each goal's budget.
pub struct DirectExecutor<'a, E, R> {
    pub env: &'a E,
    pub memory: &'a mut Memory,
    pub tree: &'a mut RegionTree,
    pub rng: &'a mut R,
    pub movements: usize,
}

impl<'a, E: Environment, R: Rng> DirectExecutor<'a, E, R> {
    pub fn new(env: &'a E, memory: &'a mut Memory, tree: &'a mut RegionTree, rng: &'a mut R) -> Self {
        DirectExecutor {
            env,
            memory,
            tree,
            rng,
            movements: 0,
        }
    }
}

impl<E: Environment, R: Rng> Executor for DirectExecutor<'_, E, R> {
    fn memory(&self) -> &Memory {
        self.memory
    }

    fn bounds(&self) -> &ActionBounds {
        self.env.bounds()
    }

    fn execute(&mut self, action: &Action, _goal: &Outcome, kind: Movement) -> Option<Outcome> {
        let y = self.env.simulate(action, self.rng);
        self.memory.record(*action, y, kind.source());
        self.movements += 1;
        Some(y)
    }

    fn observe(&mut self, action: &Action, outcome: &Outcome) {
        self.memory.record(*action, *outcome, Source::Demonstration);
    }

    fn tree_mut(&mut self) -> &mut RegionTree {
        self.tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{ArmEnv, EnvConfig, ACTION_DIM};
    use crate::sagg::InterestParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless_env() -> ArmEnv {
        ArmEnv::new(EnvConfig {
            noise_sigma: 0.0,
            ..EnvConfig::default()
        })
        .unwrap()
    }

    fn params(env: &ArmEnv) -> CompetenceParams {
        CompetenceParams {
            origin: env.origin(),
            ..CompetenceParams::default()
        }
    }

    #[test]
    fn empty_memory_explores() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = CompetenceParams::default();
        for _ in 0..20 {
            assert_eq!(
                choose_regime(&Memory::new(), &Outcome::default(), &p, &mut rng),
                Regime::Explore
            );
        }
    }

    #[test]
    fn goal_already_reached_exploits() {
        let mut m = Memory::new();
        let g = Outcome::new(0.2, 0.1);
        m.record(Action([0.0; ACTION_DIM]), g, Source::Autonomous);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = CompetenceParams::default();
        for _ in 0..100 {
            assert_eq!(choose_regime(&m, &g, &p, &mut rng), Regime::Exploit);
        }
    }

    #[test]
    fn collapsed_bounds_give_that_action() {
        let a = Action(std::array::from_fn(|i| i as f64 * 0.01));
        let bounds = ActionBounds { lo: a.0, hi: a.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(explore_action(&mut rng, &bounds), a);
    }

    #[test]
    fn identical_neighbors_blend_to_themselves() {
        let env = noiseless_env();
        let mut m = Memory::new();
        let a = Action(std::array::from_fn(|i| if i % 4 == 3 { 1.0 } else { 0.1 * (i % 4) as f64 }));
        let g = Outcome::new(0.3, -0.2);
        for _ in 0..6 {
            m.record(a, g, Source::Autonomous);
        }
        let plan = exploit_action(&m, &g, &ReachingConfig::default(), env.bounds()).unwrap();
        for (x, y) in plan.action.0.iter().zip(&a.0) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn equidistant_pair_blends_to_midpoint() {
        let env = noiseless_env();
        let mut m = Memory::new();
        let a1 = Action(std::array::from_fn(|i| if i % 4 == 3 { 1.0 } else { 0.2 }));
        let a2 = Action(std::array::from_fn(|i| if i % 4 == 3 { 1.5 } else { -0.4 }));
        m.record(a1, Outcome::new(0.1, 0.0), Source::Autonomous);
        m.record(a2, Outcome::new(-0.1, 0.0), Source::Autonomous);
        let cfg = ReachingConfig {
            k_max: 2,
            ..ReachingConfig::default()
        };
        let plan = exploit_action(&m, &Outcome::new(0.0, 0.0), &cfg, env.bounds()).unwrap();
        for i in 0..ACTION_DIM {
            assert!((plan.action.0[i] - 0.5 * (a1.0[i] + a2.0[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn exploit_on_empty_memory_is_an_error() {
        let env = noiseless_env();
        let r = exploit_action(&Memory::new(), &Outcome::default(), &ReachingConfig::default(), env.bounds());
        assert!(matches!(r, Err(Error::EmptyMemory)));
    }

    #[test]
    fn origin_goal_reached_by_one_exploit() {
        let env = noiseless_env();
        let mut memory = Memory::new();
        let rest = Action::rest(env.bounds().lo[3]);
        memory.record(rest, env.origin(), Source::Autonomous);
        let mut tree = RegionTree::new(InterestParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params(&env);
        let mut exec = DirectExecutor::new(&env, &mut memory, &mut tree, &mut rng);
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let rec = reach(&mut exec, env.origin(), &ReachingConfig::default(), &p, &mut rng2)
            .unwrap()
            .unwrap();
        assert_eq!(rec.movements_used, 1);
        assert_eq!(rec.regime_trace, vec![Regime::Exploit]);
        assert_eq!(rec.competence, 0.0);
        assert_eq!(tree.total_attempts(), 1);
    }

    #[test]
    fn single_movement_budget_on_empty_memory() {
        let env = noiseless_env();
        let mut memory = Memory::new();
        let mut tree = RegionTree::new(InterestParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = params(&env);
        let cfg = ReachingConfig {
            budget: 1,
            ..ReachingConfig::default()
        };
        let mut exec = DirectExecutor::new(&env, &mut memory, &mut tree, &mut rng);
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let rec = reach(&mut exec, Outcome::new(0.5, 0.5), &cfg, &p, &mut rng2)
            .unwrap()
            .unwrap();
        assert_eq!(exec.movements, 1);
        assert_eq!(rec.regime_trace, vec![Regime::Explore]);
        assert_eq!(memory.len(), 1);
        assert_eq!(tree.total_attempts(), 1);
    }

    #[test]
    fn weights_are_normalized() {
        let w = gaussian_weights(&[0.0, 0.1, 5.0], 0.1);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w[0] > w[1] && w[1] > w[2]);
    }
}
