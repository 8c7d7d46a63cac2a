use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::env::{random_action, Action, ActionBounds, ArmEnv, Environment, Outcome, TASK_SPACE};
use crate::error::{Error, Result};
use crate::memory::Memory;
use crate::reaching::{reach, Executor, Movement, Regime};
use crate::sagg::{generate_goal, CompetenceParams, RegionTree};
use crate::teacher::{build_demo_set, imitate, load_demos, perturb, DemoCycle, Demonstration};

use super::benchmark::{build_benchmark, reachable_box, Benchmark};
use super::config::ExperimentConfig;
use super::eval::{evaluate, Checkpoint, Coverage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    RandomExplore,
    DemosOnly,
    SaggRiac,
    SgimD,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::RandomExplore,
        Strategy::DemosOnly,
        Strategy::SaggRiac,
        Strategy::SgimD,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RandomExplore => "random_explore",
            Strategy::DemosOnly => "demos_only",
            Strategy::SaggRiac => "sagg_riac",
            Strategy::SgimD => "sgim_d",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts the short names `random`, `demos`, `sagg`, `sgim` and the
    /// full names.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_explore" => Ok(Strategy::RandomExplore),
            "demos" | "demos_only" => Ok(Strategy::DemosOnly),
            "sagg" | "sagg_riac" => Ok(Strategy::SaggRiac),
            "sgim" | "sgim_d" => Ok(Strategy::SgimD),
            _ => Err(Error::Config(format!("unknown strategy '{s}'"))),
        }
    }
}

/// What a movement was for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Random exploration without a goal.
    Random,
    /// Perturbed replay of the latest demonstration.
    Replay,
    /// Reaching a self-generated goal.
    Reach,
    /// Teacher-triggered imitation.
    Imitation,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Random => "random",
            Phase::Replay => "replay",
            Phase::Reach => "reach",
            Phase::Imitation => "imitation",
        }
    }
}

/// One executed movement.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    /// Movements performed including this one.
    pub t: usize,
    pub phase: Phase,
    pub goal: Option<Outcome>,
    pub action: Action,
    pub outcome: Outcome,
    pub kind: Movement,
}

impl Event {
    pub fn regime_label(&self) -> &'static str {
        match self.kind {
            Movement::Reach(Regime::Explore) => "explore",
            Movement::Reach(Regime::Exploit) => "exploit",
            Movement::Imitation => "imitation",
        }
    }
}

/// State captured at each checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub checkpoint: Checkpoint,
    /// Counts of every memorized outcome, on the coverage grid over Y.
    pub coverage: Coverage,
    pub regions: String,
}

/// Everything one run produced.
#[derive(Clone, Debug)]
pub struct RunLog {
    pub strategy: Strategy,
    pub seed: u64,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<Event>,
    /// Demonstrations shown, in order.
    pub demos_shown: Vec<Demonstration>,
    pub memory: Memory,
    pub tree: RegionTree,
    pub movements: usize,
    /// Demonstrations memorized without moving.
    pub observations: usize,
    /// Memory size and tree unchanged by every evaluation.
    pub evaluation_pure: bool,
}

impl RunLog {
    pub fn final_error(&self) -> f64 {
        self.snapshots
            .last()
            .map_or(f64::NAN, |s| s.checkpoint.mean_error)
    }

    pub fn error_at(&self, movement_count: usize) -> Option<f64> {
        self.snapshots
            .iter()
            .find(|s| s.checkpoint.movement_count == movement_count)
            .map(|s| s.checkpoint.mean_error)
    }
}

/// Benchmark and teaching set shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct Fixtures {
    pub env: ArmEnv,
    pub benchmark: Benchmark,
    pub demos: Vec<Demonstration>,
}

impl Fixtures {
    /// Loads the configured files, building whatever is not supplied.
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let env = ArmEnv::new(cfg.env.clone())?;
        let benchmark = match &cfg.benchmark_file {
            Some(p) => Benchmark::load(p)?,
            None => default_benchmark(&env, cfg),
        };
        let demos = match &cfg.demo_file {
            Some(p) => load_demos(p)?,
            None => default_demos(&env, cfg),
        };
        Ok(Fixtures {
            env,
            benchmark,
            demos,
        })
    }
}

pub fn default_benchmark<E: Environment>(env: &E, cfg: &ExperimentConfig) -> Benchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.benchmark_seed);
    build_benchmark(env, cfg.benchmark_grid, cfg.benchmark_pool, &mut rng)
}

pub fn default_demos<E: Environment>(env: &E, cfg: &ExperimentConfig) -> Vec<Demonstration> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.demo_seed);
    let area = reachable_box(env, cfg.teacher.demo_pool, &mut rng);
    build_demo_set(env, &cfg.teacher, &area, &mut rng)
}

/// Independent random streams of one run.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TeacherMode {
    /// Emulation plus imitation replays.
    Imitate,
    /// Memorize and hand over to the replay loop.
    Show,
}

struct Teacher<'a> {
    demos: &'a [Demonstration],
    order: DemoCycle,
    /// Draws demonstrations only, so every strategy sees the same sequence.
    rng: ChaCha8Rng,
    /// Imitation perturbations.
    replay_rng: ChaCha8Rng,
    mode: TeacherMode,
}

/// Executor enforcing the run's movement cap, the teacher's schedule and
/// the evaluation cadence.
struct Session<'a, E> {
    env: &'a E,
    cfg: &'a ExperimentConfig,
    benchmark: &'a Benchmark,
    params: CompetenceParams,
    memory: Memory,
    tree: RegionTree,
    noise: ChaCha8Rng,
    teacher: Option<Teacher<'a>>,
    current_demo: Option<Demonstration>,
    last_lesson: Option<usize>,
    phase: Phase,
    count: usize,
    observations: usize,
    events: Vec<Event>,
    demos_shown: Vec<Demonstration>,
    snapshots: Vec<Snapshot>,
    evaluation_pure: bool,
    failure: Option<Error>,
}

impl<E: Environment> Session<'_, E> {
    fn done(&self) -> bool {
        self.count >= self.cfg.total_movements
    }

    fn checkpoint(&mut self) {
        let before = (self.memory.len(), self.tree.node_count(), self.tree.total_attempts());
        let checkpoint = evaluate(&self.memory, self.benchmark, self.env, &self.cfg.reaching, self.count);
        let after = (self.memory.len(), self.tree.node_count(), self.tree.total_attempts());
        self.evaluation_pure &= before == after;
        let coverage = Coverage::from_outcomes(
            &TASK_SPACE,
            self.cfg.coverage_grid,
            self.memory.exemplars().iter().map(|e| &e.outcome),
        );
        self.snapshots.push(Snapshot {
            checkpoint,
            coverage,
            regions: self.tree.snapshot(),
        });
    }

    /// Lets the teacher step in if a lesson is due at the current count.
    fn lesson(&mut self) {
        if self.done() || self.last_lesson == Some(self.count) || self.count % self.cfg.teacher.period_p != 0 {
            return;
        }
        // Taking the teacher out also blocks nested lessons during imitation.
        let Some(mut teacher) = self.teacher.take() else {
            return;
        };
        if teacher.mode == TeacherMode::Imitate && self.count == 0 {
            self.teacher = Some(teacher);
            return;
        }
        self.last_lesson = Some(self.count);
        let demo = match teacher.order.next(teacher.demos, &mut teacher.rng) {
            Ok(d) => *d,
            Err(e) => {
                self.failure = Some(e);
                self.teacher = Some(teacher);
                return;
            }
        };
        self.demos_shown.push(demo);
        match teacher.mode {
            TeacherMode::Show => {
                self.observe(&demo.action, &demo.outcome);
                self.current_demo = Some(demo);
            }
            TeacherMode::Imitate => {
                let resumed = self.phase;
                self.phase = Phase::Imitation;
                let params = self.params;
                let cfg = self.cfg.teacher;
                if let Err(e) = imitate(&demo, self, &cfg, &params, &mut teacher.replay_rng) {
                    self.failure = Some(e);
                }
                self.phase = resumed;
            }
        }
        self.teacher = Some(teacher);
    }

    fn perform(&mut self, action: &Action, goal: Option<Outcome>, kind: Movement) -> Option<Outcome> {
        self.lesson();
        if self.done() || self.failure.is_some() {
            return None;
        }
        let outcome = self.env.simulate(action, &mut self.noise);
        self.memory.record(*action, outcome, kind.source());
        self.count += 1;
        self.events.push(Event {
            t: self.count,
            phase: self.phase,
            goal,
            action: *action,
            outcome,
            kind,
        });
        if self.count % self.cfg.eval_every == 0 {
            self.checkpoint();
        }
        Some(outcome)
    }
}

impl<E: Environment> Executor for Session<'_, E> {
    fn memory(&self) -> &Memory {
        &self.memory
    }

    fn bounds(&self) -> &ActionBounds {
        self.env.bounds()
    }

    fn execute(&mut self, action: &Action, goal: &Outcome, kind: Movement) -> Option<Outcome> {
        self.perform(action, Some(*goal), kind)
    }

    fn observe(&mut self, action: &Action, outcome: &Outcome) {
        self.memory
            .record(*action, *outcome, crate::memory::Source::Demonstration);
        self.observations += 1;
    }

    fn tree_mut(&mut self) -> &mut RegionTree {
        &mut self.tree
    }
}

/// Runs one strategy for `cfg.total_movements` movements.
pub fn run_strategy(strategy: Strategy, cfg: &ExperimentConfig, fixtures: &Fixtures, seed: u64) -> Result<RunLog> {
    cfg.validate()?;
    let env = &fixtures.env;
    if matches!(strategy, Strategy::DemosOnly | Strategy::SgimD) && fixtures.demos.is_empty() {
        return Err(Error::EmptyDemoSet);
    }
    let params = CompetenceParams {
        origin: env.origin(),
        ..cfg.competence
    };
    let mut learner = stream(seed, 1);
    let teacher = match strategy {
        Strategy::DemosOnly => Some(TeacherMode::Show),
        Strategy::SgimD => Some(TeacherMode::Imitate),
        _ => None,
    }
    .map(|mode| Teacher {
        demos: &fixtures.demos,
        order: DemoCycle::new(),
        rng: stream(seed, 3),
        replay_rng: stream(seed, 4),
        mode,
    });
    let mut s = Session {
        env,
        cfg,
        benchmark: &fixtures.benchmark,
        params,
        memory: Memory::new(),
        tree: RegionTree::new(cfg.interest)?,
        noise: stream(seed ^ cfg.env.rng_seed, 2),
        teacher,
        current_demo: None,
        last_lesson: None,
        phase: Phase::Random,
        count: 0,
        observations: 0,
        events: Vec::with_capacity(cfg.total_movements),
        demos_shown: Vec::new(),
        snapshots: Vec::new(),
        evaluation_pure: true,
        failure: None,
    };
    s.checkpoint();

    match strategy {
        Strategy::RandomExplore => {
            s.phase = Phase::Random;
            while !s.done() {
                let a = random_action(env.bounds(), &mut learner);
                s.perform(&a, None, Movement::Reach(Regime::Explore));
            }
        }
        Strategy::DemosOnly => {
            s.phase = Phase::Replay;
            while !s.done() && s.failure.is_none() {
                s.lesson();
                let demo = s.current_demo.expect("a demonstration is shown at movement 0");
                let a = perturb(&demo.action, env.bounds(), cfg.teacher.imitation_eps, &mut learner);
                s.perform(&a, Some(demo.outcome), Movement::Imitation);
            }
        }
        Strategy::SaggRiac | Strategy::SgimD => {
            s.phase = Phase::Reach;
            while !s.done() && s.failure.is_none() {
                let goal = generate_goal(&s.tree, &cfg.modes, &mut learner);
                reach(&mut s, goal, &cfg.reaching, &params, &mut learner)?;
            }
        }
    }
    if let Some(e) = s.failure {
        return Err(e);
    }
    Ok(RunLog {
        strategy,
        seed,
        snapshots: s.snapshots,
        events: s.events,
        demos_shown: s.demos_shown,
        memory: s.memory,
        tree: s.tree,
        movements: s.count,
        observations: s.observations,
        evaluation_pure: s.evaluation_pure,
    })
}

/// Runs every `(strategy, seed)` pair, in parallel. Results come back in
/// strategy-major order.
pub fn run_batch(
    strategies: &[Strategy],
    seeds: &[u64],
    cfg: &ExperimentConfig,
    fixtures: &Fixtures,
) -> Result<Vec<RunLog>> {
    let jobs: Vec<(Strategy, u64)> = strategies
        .iter()
        .flat_map(|&st| seeds.iter().map(move |&seed| (st, seed)))
        .collect();
    jobs.par_iter()
        .map(|&(st, seed)| run_strategy(st, cfg, fixtures, seed))
        .collect()
}
