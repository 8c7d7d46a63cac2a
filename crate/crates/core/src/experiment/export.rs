use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::env::ACTION_DIM;
use crate::error::{Error, Result};

use super::run::RunLog;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_all(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// `seed,strategy,movement_count,mean_error`, one row per checkpoint.
pub fn write_errors(path: &Path, runs: &[RunLog]) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "seed,strategy,movement_count,mean_error")?;
        for r in runs {
            for s in &r.snapshots {
                writeln!(w, "{},{},{},{}", r.seed, r.strategy, s.checkpoint.movement_count, s.checkpoint.mean_error)?;
            }
        }
        Ok(())
    })
}

/// Per-movement log of one run. Goal fields are empty for goal-free moves.
pub fn write_events(path: &Path, run: &RunLog) -> Result<()> {
    write_all(path, |w| {
        let actions: Vec<String> = (1..=ACTION_DIM).map(|i| format!("a{i}")).collect();
        writeln!(
            w,
            "t,strategy_phase,goal_x,goal_y,{},outcome_x,outcome_y,regime",
            actions.join(",")
        )?;
        for e in &run.events {
            let (gx, gy) = e
                .goal
                .map_or((String::new(), String::new()), |g| (g.x.to_string(), g.y.to_string()));
            let a: Vec<String> = e.action.0.iter().map(f64::to_string).collect();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                e.t,
                e.phase.as_str(),
                gx,
                gy,
                a.join(","),
                e.outcome.x,
                e.outcome.y,
                e.regime_label()
            )?;
        }
        Ok(())
    })
}

/// Non-empty coverage cells at each checkpoint.
pub fn write_coverage(path: &Path, runs: &[RunLog]) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "seed,strategy,movement_count,ix,iy,count")?;
        for r in runs {
            for s in &r.snapshots {
                let (nx, _) = s.coverage.grid;
                for (i, c) in s.coverage.counts.iter().enumerate().filter(|(_, c)| **c > 0) {
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        r.seed,
                        r.strategy,
                        s.checkpoint.movement_count,
                        i % nx,
                        i / nx,
                        c
                    )?;
                }
            }
        }
        Ok(())
    })
}

/// Region-tree snapshots, each introduced by a `#` header line.
pub fn write_regions(path: &Path, runs: &[RunLog]) -> Result<()> {
    write_all(path, |w| {
        for r in runs {
            for s in &r.snapshots {
                writeln!(w, "# seed {} strategy {} movement_count {}", r.seed, r.strategy, s.checkpoint.movement_count)?;
                w.write_all(s.regions.as_bytes())?;
            }
        }
        Ok(())
    })
}
