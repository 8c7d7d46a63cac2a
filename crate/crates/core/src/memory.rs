//! Episodic memory of `(action, outcome)` exemplars.
//!
//! Outcomes are bucketed in a uniform grid over the task box; points that
//! fall outside (sensor noise can push them there) go to the border cells.
//! Nearest-neighbor queries scan rings of cells outward and stop once no
//! unvisited cell can hold a closer point, so results are exact.

use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::env::{Action, Outcome, ACTION_DIM, TASK_SPACE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Autonomous,
    Demonstration,
    Imitation,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Autonomous => "autonomous",
            Source::Demonstration => "demonstration",
            Source::Imitation => "imitation",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "autonomous" => Ok(Source::Autonomous),
            "demonstration" => Ok(Source::Demonstration),
            "imitation" => Ok(Source::Imitation),
            other => Err(format!("unknown source `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exemplar {
    pub action: Action,
    pub outcome: Outcome,
    pub source: Source,
    pub seq: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor<'a> {
    pub exemplar: &'a Exemplar,
    pub distance: f64,
}

/// Neighbors sorted by ascending distance, ties broken by `seq`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborSet<'a> {
    pub entries: Vec<Neighbor<'a>>,
}

impl<'a> NeighborSet<'a> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Neighbor<'a>> {
        self.entries.iter()
    }

    pub fn first(&self) -> Option<&Neighbor<'a>> {
        self.entries.first()
    }
}

const GRID_CELLS: usize = 32;

#[derive(Clone, Debug)]
pub struct Memory {
    exemplars: Vec<Exemplar>,
    cells: Vec<Vec<u32>>,
    next_seq: u64,
}

impl Default for Memory {
    fn default() -> Self {
        Self::new()
    }
}

impl Memory {
    pub fn new() -> Self {
        Memory {
            exemplars: Vec::new(),
            cells: vec![Vec::new(); GRID_CELLS * GRID_CELLS],
            next_seq: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.exemplars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exemplars.is_empty()
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    /// Stores a new association and returns its sequence number.
    pub fn record(&mut self, action: Action, outcome: Outcome, source: Source) -> u64 {
        let seq = self.next_seq;
        self.insert(Exemplar {
            action,
            outcome,
            source,
            seq,
        })
        .expect("fresh sequence numbers always increase");
        seq
    }

    /// Inserts an exemplar whose `seq` must exceed every stored one.
    pub fn insert(&mut self, exemplar: Exemplar) -> Result<()> {
        if exemplar.seq < self.next_seq {
            return Err(Error::Domain(format!(
                "sequence number {} is not above {}",
                exemplar.seq,
                self.next_seq.saturating_sub(1)
            )));
        }
        if !exemplar.outcome.is_finite() || exemplar.action.0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("exemplar holds non-finite values".into()));
        }
        let (cx, cy) = cell_of(&exemplar.outcome);
        self.cells[cy * GRID_CELLS + cx].push(self.exemplars.len() as u32);
        self.next_seq = exemplar.seq + 1;
        self.exemplars.push(exemplar);
        Ok(())
    }

    /// Exact `k` nearest exemplars to `query` in task space.
    pub fn nearest(&self, query: &Outcome, k: usize) -> NeighborSet<'_> {
        if k == 0 || self.exemplars.is_empty() {
            return NeighborSet::default();
        }
        let k = k.min(self.exemplars.len());
        let (qx, qy) = cell_of(query);
        let cell = cell_size();
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        let max_ring = GRID_CELLS;
        for ring in 0..=max_ring {
            self.visit_ring(qx, qy, ring, |idx| {
                let d = self.exemplars[idx as usize].outcome.distance(query);
                push_bounded(&mut best, k, d, idx, &self.exemplars);
            });
            // Cells in ring r+1 and beyond are at least r cell widths away.
            if best.len() == k && best[k - 1].0 < ring as f64 * cell {
                break;
            }
        }
        NeighborSet {
            entries: best
                .into_iter()
                .map(|(distance, idx)| Neighbor {
                    exemplar: &self.exemplars[idx as usize],
                    distance,
                })
                .collect(),
        }
    }

    fn visit_ring(&self, qx: usize, qy: usize, ring: usize, mut f: impl FnMut(u32)) {
        let r = ring as isize;
        let (qx, qy) = (qx as isize, qy as isize);
        let n = GRID_CELLS as isize;
        let mut visit = |x: isize, y: isize| {
            if (0..n).contains(&x) && (0..n).contains(&y) {
                for &idx in &self.cells[(y * n + x) as usize] {
                    f(idx);
                }
            }
        };
        if r == 0 {
            visit(qx, qy);
            return;
        }
        for x in (qx - r)..=(qx + r) {
            visit(x, qy - r);
            visit(x, qy + r);
        }
        for y in (qy - r + 1)..=(qy + r - 1) {
            visit(qx - r, y);
            visit(qx + r, y);
        }
    }

    /// Writes one exemplar per line: `seq, source, a1..a24, y1, y2`.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for e in &self.exemplars {
            let mut line = format!("{}, {}", e.seq, e.source);
            for v in &e.action.0 {
                line.push_str(&format!(", {v}"));
            }
            line.push_str(&format!(", {}, {}", e.outcome.x, e.outcome.y));
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut memory = Memory::new();
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
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != ACTION_DIM + 4 {
                return Err(parse_err(format!(
                    "expected {} fields, found {}",
                    ACTION_DIM + 4,
                    fields.len()
                )));
            }
            let seq: u64 = fields[0].parse().map_err(|e| parse_err(format!("{e}")))?;
            let source: Source = fields[1].parse().map_err(parse_err)?;
            let nums = fields[2..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(format!("{e}")))?;
            let action = Action::from_slice(&nums[..ACTION_DIM]).expect("length checked");
            let outcome = Outcome::new(nums[ACTION_DIM], nums[ACTION_DIM + 1]);
            memory
                .insert(Exemplar {
                    action,
                    outcome,
                    source,
                    seq,
                })
                .map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(memory)
    }
}

fn cell_size() -> f64 {
    TASK_SPACE.width(0) / GRID_CELLS as f64
}

fn cell_of(p: &Outcome) -> (usize, usize) {
    let idx = |v: f64, lo: f64| {
        let c = ((v - lo) / cell_size()).floor();
        c.clamp(0.0, (GRID_CELLS - 1) as f64) as usize
    };
    debug_assert_eq!(TASK_SPACE.width(0), TASK_SPACE.width(1));
    (idx(p.x, TASK_SPACE.lo[0]), idx(p.y, TASK_SPACE.lo[1]))
}

/// Keeps `best` sorted by `(distance, seq)` and at most `k` long.
fn push_bounded(best: &mut Vec<(f64, u32)>, k: usize, d: f64, idx: u32, ex: &[Exemplar]) {
    let key = |(d, i): (f64, u32)| (d, ex[i as usize].seq);
    if best.len() == k && key(best[k - 1]) <= (d, ex[idx as usize].seq) {
        return;
    }
    let pos = best.partition_point(|&b| key(b) < (d, ex[idx as usize].seq));
    best.insert(pos, (d, idx));
    best.truncate(k);
}

/// Mean per-dimension population variance of a set of outcomes.
pub fn mean_variance<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> f64 {
    let pts: Vec<&Outcome> = outcomes.into_iter().collect();
    let Some(first) = pts.first() else {
        return 0.0;
    };
    let n = pts.len() as f64;
    // Shifted by the first point so identical outcomes give exactly zero.
    let axis_var = |coord: fn(&Outcome) -> f64| {
        let shift = coord(first);
        let (s, s2) = pts.iter().fold((0.0, 0.0), |(s, s2), p| {
            let d = coord(p) - shift;
            (s + d, s2 + d * d)
        });
        let m = s / n;
        (s2 / n - m * m).max(0.0)
    };
    0.5 * (axis_var(|p| p.x) + axis_var(|p| p.y))
}

/// `dist(candidate, goal) + alpha * var` where `var` is the mean variance of
/// the outcomes of the `k_max` nearest neighbors of the candidate's outcome.
/// Lower is more reliable.
pub fn reliability(
    memory: &Memory,
    candidate: &Exemplar,
    goal: &Outcome,
    k_max: usize,
    alpha: f64,
) -> f64 {
    let local = memory.nearest(&candidate.outcome, k_max);
    let var = mean_variance(local.iter().map(|n| &n.exemplar.outcome));
    candidate.outcome.distance(goal) + alpha * var
}
