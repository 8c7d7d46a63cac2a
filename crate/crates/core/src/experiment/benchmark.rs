use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::env::{random_action, Environment, Outcome, Rect};
use crate::error::{Error, Result};
use crate::teacher::grid_cell;

/// Fixed evaluation targets spread over the reachable part of the task space.
#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub points: Vec<Outcome>,
}

/// Noiseless outcomes of `pool` uniformly random actions.
pub fn sample_outcomes<E: Environment, R: Rng + ?Sized>(env: &E, pool: usize, rng: &mut R) -> Vec<Outcome> {
    (0..pool)
        .map(|_| env.simulate_noiseless(&random_action(env.bounds(), rng)))
        .collect()
}

/// Bounding box of `pool` random noiseless outcomes.
pub fn reachable_box<E: Environment, R: Rng + ?Sized>(env: &E, pool: usize, rng: &mut R) -> Rect {
    let outcomes = sample_outcomes(env, pool.max(1), rng);
    Rect::bounding(&outcomes).expect("pool is non-empty")
}

/// Sub-box `(ix, iy)` of `area` cut into an `(nx, ny)` grid.
pub fn cell_rect(area: &Rect, grid: (usize, usize), (ix, iy): (usize, usize)) -> Rect {
    let edge = |d: usize, i: usize, n: usize| area.lo[d] + area.width(d) * i as f64 / n as f64;
    Rect {
        lo: [edge(0, ix, grid.0), edge(1, iy, grid.1)],
        hi: [edge(0, ix + 1, grid.0), edge(1, iy + 1, grid.1)],
    }
}

/// One uniform point in every grid cell, over the outcomes' bounding box,
/// that some random action reaches. Cells are visited row by row.
pub fn build_benchmark<E: Environment, R: Rng + ?Sized>(
    env: &E,
    grid: (usize, usize),
    pool_size: usize,
    rng: &mut R,
) -> Benchmark {
    let outcomes = sample_outcomes(env, pool_size.max(1), rng);
    let area = Rect::bounding(&outcomes).expect("pool is non-empty");
    let mut occupied = vec![false; grid.0 * grid.1];
    for y in &outcomes {
        let (ix, iy) = grid_cell(&area, grid, y).expect("inside its own bounding box");
        occupied[iy * grid.0 + ix] = true;
    }
    let points = occupied
        .iter()
        .enumerate()
        .filter(|(_, o)| **o)
        .map(|(i, _)| cell_rect(&area, grid, (i % grid.0, i / grid.0)).sample_uniform(rng))
        .collect();
    Benchmark { points }
}

impl Benchmark {
    /// One point per line: `x, y`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for p in &self.points {
            writeln!(w, "{}, {}", p.x, p.y).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg,
            };
            let v = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(e.to_string()))?;
            match v.as_slice() {
                [x, y] => points.push(Outcome::new(*x, *y)),
                _ => return Err(err(format!("expected 2 fields, found {}", v.len()))),
            }
        }
        Ok(Benchmark { points })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Action, ActionBounds, ArmEnv, EnvConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Every action lands on the same spot.
    struct PointEnv(ActionBounds);

    impl Environment for PointEnv {
        fn bounds(&self) -> &ActionBounds {
            &self.0
        }
        fn noise_sigma(&self) -> f64 {
            0.0
        }
        fn simulate_noiseless(&self, _: &Action) -> Outcome {
            Outcome::new(0.3, -0.2)
        }
        fn origin(&self) -> Outcome {
            Outcome::new(0.3, -0.2)
        }
    }

    #[test]
    fn single_point_reachable_set() {
        let env = PointEnv(ActionBounds::from_ranges((-1.0, 1.0), (0.5, 2.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let b = build_benchmark(&env, (26, 16), 500, &mut rng);
        assert_eq!(b.points, vec![Outcome::new(0.3, -0.2)]);
    }

    #[test]
    fn points_sit_in_distinct_occupied_cells() {
        let env = ArmEnv::new(EnvConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = build_benchmark(&env, (26, 16), 5000, &mut rng);
        assert!(b.points.len() > 20);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pool = sample_outcomes(&env, 5000, &mut rng);
        let area = Rect::bounding(&pool).unwrap();
        let mut cells: Vec<_> = b.points.iter().map(|p| grid_cell(&area, (26, 16), p).unwrap()).collect();
        let n = cells.len();
        cells.dedup();
        assert_eq!(cells.len(), n);
        for c in cells {
            assert!(pool.iter().any(|y| grid_cell(&area, (26, 16), y) == Some(c)));
        }
    }

    #[test]
    fn file_round_trip() {
        let b = Benchmark {
            points: vec![Outcome::new(0.1, 1.0 / 3.0), Outcome::new(-0.7, 2e-17)],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("benchmark.txt");
        b.save(&path).unwrap();
        assert_eq!(Benchmark::load(&path).unwrap(), b);
    }
}
