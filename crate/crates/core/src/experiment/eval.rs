use crate::env::{Environment, Outcome, Rect};
use crate::memory::Memory;
use crate::reaching::{exploit_action, ReachingConfig};
use crate::teacher::grid_cell;

use super::benchmark::Benchmark;

/// Benchmark errors of one learner state.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub movement_count: usize,
    pub mean_error: f64,
    pub errors: Vec<f64>,
}

/// Noiseless distance reached on each benchmark point by a single inverse
/// model query, without refinement and without touching the memory.
pub fn evaluate<E: Environment>(
    memory: &Memory,
    benchmark: &Benchmark,
    env: &E,
    cfg: &ReachingConfig,
    movement_count: usize,
) -> Checkpoint {
    let bounds = *env.bounds();
    let errors: Vec<f64> = benchmark
        .points
        .iter()
        .map(|p| match exploit_action(memory, p, cfg, &bounds) {
            Ok(plan) => env.simulate_noiseless(&plan.action).distance(p),
            Err(_) => env.origin().distance(p),
        })
        .collect();
    let mean_error = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    Checkpoint {
        movement_count,
        mean_error,
        errors,
    }
}

/// Outcome counts on a fixed grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub grid: (usize, usize),
    /// Row-major counts, `iy * nx + ix`.
    pub counts: Vec<u64>,
}

impl Coverage {
    pub fn new(grid: (usize, usize)) -> Self {
        Coverage {
            grid,
            counts: vec![0; grid.0 * grid.1],
        }
    }

    /// Adds `p` if it lies in `area`; returns whether it did.
    pub fn add(&mut self, area: &Rect, p: &Outcome) -> bool {
        match grid_cell(area, self.grid, p) {
            Some((ix, iy)) => {
                self.counts[iy * self.grid.0 + ix] += 1;
                true
            }
            None => false,
        }
    }

    pub fn from_outcomes<'a>(area: &Rect, grid: (usize, usize), points: impl IntoIterator<Item = &'a Outcome>) -> Self {
        let mut c = Coverage::new(grid);
        for p in points {
            c.add(area, p);
        }
        c
    }

    pub fn count(&self, (ix, iy): (usize, usize)) -> u64 {
        self.counts[iy * self.grid.0 + ix]
    }

    pub fn occupied(&self) -> usize {
        self.counts.iter().filter(|c| **c > 0).count()
    }
}
