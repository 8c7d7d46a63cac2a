//! Scripted teacher: a fixed set of reliable demonstrations, one shown at
//! random every `period_p` movements, and the learner's imitation and
//! emulation responses to it.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{random_action, Action, ActionBounds, Environment, Outcome, Rect, ACTION_DIM};
use crate::error::{Error, Result};
use crate::memory::mean_variance;
use crate::reaching::{Executor, Movement};
use crate::sagg::{competence, CompetenceParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Demonstration {
    pub action: Action,
    /// Noiseless landing point of `action`.
    pub outcome: Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeacherConfig {
    /// A demonstration every `period_p` movements.
    pub period_p: usize,
    /// Cells `(nx, ny)` laid over the reachable box.
    pub demo_grid: (usize, usize),
    /// Random actions drawn when building the demonstration set.
    pub demo_pool: usize,
    pub screening_reps: usize,
    pub candidates_per_cell: usize,
    pub imitation_reps: usize,
    /// Bound on each perturbation component, as a fraction of that
    /// parameter's range.
    pub imitation_eps: f64,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        TeacherConfig {
            period_p: 150,
            demo_grid: (7, 4),
            demo_pool: 20_000,
            screening_reps: 10,
            candidates_per_cell: 10,
            imitation_reps: 5,
            imitation_eps: 0.05,
        }
    }
}

impl TeacherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.period_p < 1 {
            return Err(Error::Config("period_p must be >= 1".into()));
        }
        if !(self.imitation_eps > 0.0) {
            return Err(Error::Config("imitation_eps must be positive".into()));
        }
        if self.demo_grid.0 < 1 || self.demo_grid.1 < 1 || self.candidates_per_cell < 1 {
            return Err(Error::Config(
                "demo_grid and candidates_per_cell must be >= 1".into(),
            ));
        }
        if self.screening_reps < 2 {
            return Err(Error::Config("screening_reps must be >= 2".into()));
        }
        Ok(())
    }
}

/// Cell of `p` on an `(nx, ny)` grid over `area`; `None` outside it.
pub fn grid_cell(area: &Rect, grid: (usize, usize), p: &Outcome) -> Option<(usize, usize)> {
    if !area.contains_closed(p) {
        return None;
    }
    let idx = |d: usize, n: usize| {
        let w = area.width(d);
        if w <= 0.0 {
            return 0;
        }
        let c = ((p.coord(d) - area.lo[d]) / w * n as f64).floor() as usize;
        c.min(n - 1)
    };
    Some((idx(0, grid.0), idx(1, grid.1)))
}

/// For every non-empty cell of the demonstration grid, the candidate whose
/// noisy repetitions vary least. Cells are visited row by row.
pub fn build_demo_set<E: Environment, R: Rng + ?Sized>(
    env: &E,
    cfg: &TeacherConfig,
    reachable_box: &Rect,
    rng: &mut R,
) -> Vec<Demonstration> {
    let (nx, ny) = cfg.demo_grid;
    let mut cells: Vec<Vec<(Action, Outcome)>> = vec![Vec::new(); nx * ny];
    for _ in 0..cfg.demo_pool {
        let a = random_action(env.bounds(), rng);
        let y = env.simulate_noiseless(&a);
        if let Some((cx, cy)) = grid_cell(reachable_box, cfg.demo_grid, &y) {
            let cell = &mut cells[cy * nx + cx];
            if cell.len() < cfg.candidates_per_cell {
                cell.push((a, y));
            }
        }
    }
    let mut demos = Vec::new();
    for candidates in cells.iter().filter(|c| !c.is_empty()) {
        let mut best: Option<(f64, Demonstration)> = None;
        for (a, y) in candidates {
            let var = screening_variance(env, a, cfg.screening_reps, rng);
            if best.is_none_or(|(v, _)| var < v) {
                best = Some((
                    var,
                    Demonstration {
                        action: *a,
                        outcome: *y,
                    },
                ));
            }
        }
        demos.extend(best.map(|(_, d)| d));
    }
    demos
}

/// Mean per-axis variance of `reps` noisy executions of `action`.
pub fn screening_variance<E: Environment, R: Rng + ?Sized>(
    env: &E,
    action: &Action,
    reps: usize,
    rng: &mut R,
) -> f64 {
    let outcomes: Vec<Outcome> = (0..reps).map(|_| env.simulate(action, rng)).collect();
    mean_variance(&outcomes)
}

pub fn next_demo<'a, R: Rng + ?Sized>(
    demos: &'a [Demonstration],
    rng: &mut R,
) -> Result<&'a Demonstration> {
    if demos.is_empty() {
        return Err(Error::EmptyDemoSet);
    }
    Ok(&demos[rng.random_range(0..demos.len())])
}

/// Random teaching order over a fixed set: every demonstration is shown
/// once, in shuffled order, before any is repeated.
#[derive(Clone, Debug, Default)]
pub struct DemoCycle {
    pending: Vec<usize>,
    set_len: usize,
}

impl DemoCycle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next<'a, R: Rng + ?Sized>(
        &mut self,
        demos: &'a [Demonstration],
        rng: &mut R,
    ) -> Result<&'a Demonstration> {
        if demos.is_empty() {
            return Err(Error::EmptyDemoSet);
        }
        if self.pending.is_empty() || self.set_len != demos.len() {
            self.set_len = demos.len();
            self.pending = (0..demos.len()).collect();
            self.pending.shuffle(rng);
        }
        let i = self.pending.pop().expect("refilled above");
        Ok(&demos[i])
    }
}

/// `action` plus a uniform perturbation in `[-eps * range, eps * range]`
/// per parameter, clamped into `bounds`.
pub fn perturb<R: Rng + ?Sized>(action: &Action, bounds: &ActionBounds, eps: f64, rng: &mut R) -> Action {
    let mut a = *action;
    for (i, v) in a.0.iter_mut().enumerate() {
        let u: f64 = rng.random();
        *v += (2.0 * u - 1.0) * eps * bounds.width(i);
    }
    bounds.clamp(&a)
}

/// Emulation then imitation of one demonstration.
///
/// The demonstration is memorized and filed in the region tree as a reached
/// goal; then `imitation_reps` perturbed replays are executed, each filed as
/// an attempt at the demonstrated outcome. Returns the replays performed.
pub fn imitate<X: Executor, R: Rng + ?Sized>(
    demo: &Demonstration,
    exec: &mut X,
    cfg: &TeacherConfig,
    params: &CompetenceParams,
    rng: &mut R,
) -> Result<usize> {
    exec.observe(&demo.action, &demo.outcome);
    exec.tree_mut().record(demo.outcome, demo.outcome, 0.0)?;
    let bounds = *exec.bounds();
    for done in 0..cfg.imitation_reps {
        let a = perturb(&demo.action, &bounds, cfg.imitation_eps, rng);
        let Some(y) = exec.execute(&a, &demo.outcome, Movement::Imitation) else {
            return Ok(done);
        };
        let gamma = competence(&demo.outcome, &y, params);
        exec.tree_mut().record(demo.outcome, y, gamma)?;
    }
    Ok(cfg.imitation_reps)
}

/// One demonstration per line: `a1..a24, y1, y2`.
pub fn save_demos(demos: &[Demonstration], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for d in demos {
        let fields: Vec<String> = d
            .action
            .0
            .iter()
            .chain([&d.outcome.x, &d.outcome.y])
            .map(|v| v.to_string())
            .collect();
        writeln!(w, "{}", fields.join(", ")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_demos(path: &Path) -> Result<Vec<Demonstration>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut demos = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let nums = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(e.to_string()))?;
        if nums.len() != ACTION_DIM + 2 {
            return Err(parse_err(format!(
                "expected {} fields, found {}",
                ACTION_DIM + 2,
                nums.len()
            )));
        }
        demos.push(Demonstration {
            action: Action::from_slice(&nums[..ACTION_DIM]).expect("length checked"),
            outcome: Outcome::new(nums[ACTION_DIM], nums[ACTION_DIM + 1]),
        });
    }
    Ok(demos)
}
