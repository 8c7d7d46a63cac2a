//! Synthetic arm-and-rod world.
//!
//! Six joints follow quadratic Bezier primitives. Joint 1 turns the arm about
//! the vertical axis; joints 2..6 bend a five-link chain inside the resulting
//! vertical plane, their angles accumulating from the vertical. Link 1 is a
//! horizontal boom, so the rest pose puts the rod tip at `(L1, 0)` on the
//! ground plane. The hook lands under the tip, pushed further along the tip's
//! ground velocity at the final time (the "fling"), then the landing point is
//! clamped into the task box and corrupted by isotropic Gaussian noise.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_JOINTS: usize = 6;
pub const PARAMS_PER_JOINT: usize = 4;
pub const ACTION_DIM: usize = N_JOINTS * PARAMS_PER_JOINT;

/// One joint's motor primitive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub q_start: f64,
    pub q_mid: f64,
    pub q_end: f64,
    pub duration: f64,
}

impl Primitive {
    /// Angle at normalized phase `s` in `[0, 1]`.
    fn at_phase(&self, s: f64) -> f64 {
        let u = 1.0 - s;
        u * u * self.q_start + 2.0 * s * u * self.q_mid + s * s * self.q_end
    }

    /// Angle at time `t`, holding the final angle once the primitive is over.
    fn held_at(&self, t: f64) -> f64 {
        if t >= self.duration {
            self.q_end
        } else {
            self.at_phase((t / self.duration).max(0.0))
        }
    }
}

/// Quadratic Bezier joint trajectory evaluated at `t` seconds.
pub fn bezier_eval(primitive: &Primitive, t: f64) -> Result<f64> {
    if !(primitive.duration > 0.0) || !(0.0..=primitive.duration).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} outside [0, {}]",
            primitive.duration
        )));
    }
    Ok(primitive.at_phase(t / primitive.duration))
}

/// 24 motor parameters, joint-major: `(q_start, q_mid, q_end, duration)` per joint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Action(pub [f64; ACTION_DIM]);

impl Action {
    pub fn from_primitives(primitives: &[Primitive; N_JOINTS]) -> Self {
        let mut a = [0.0; ACTION_DIM];
        for (chunk, p) in a.chunks_exact_mut(PARAMS_PER_JOINT).zip(primitives) {
            chunk.copy_from_slice(&[p.q_start, p.q_mid, p.q_end, p.duration]);
        }
        Action(a)
    }

    pub fn joint(&self, j: usize) -> Primitive {
        let c = &self.0[j * PARAMS_PER_JOINT..(j + 1) * PARAMS_PER_JOINT];
        Primitive {
            q_start: c[0],
            q_mid: c[1],
            q_end: c[2],
            duration: c[3],
        }
    }

    pub fn primitives(&self) -> [Primitive; N_JOINTS] {
        std::array::from_fn(|j| self.joint(j))
    }

    /// All angles zero; every joint lasts `duration`.
    pub fn rest(duration: f64) -> Self {
        let p = Primitive {
            q_start: 0.0,
            q_mid: 0.0,
            q_end: 0.0,
            duration,
        };
        Self::from_primitives(&[p; N_JOINTS])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        <[f64; ACTION_DIM]>::try_from(v).ok().map(Action)
    }

    pub fn distance(&self, other: &Action) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A point of the 2-D task space.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Outcome {
    pub x: f64,
    pub y: f64,
}

impl Outcome {
    pub const fn new(x: f64, y: f64) -> Self {
        Outcome { x, y }
    }

    pub fn distance(&self, other: &Outcome) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn coord(&self, dim: usize) -> f64 {
        match dim {
            0 => self.x,
            1 => self.y,
            _ => panic!("task space is 2-D, got dimension {dim}"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned rectangle in task space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub const fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Rect { lo, hi }
    }

    pub fn width(&self, dim: usize) -> f64 {
        self.hi[dim] - self.lo[dim]
    }

    /// Closed-box membership.
    pub fn contains_closed(&self, p: &Outcome) -> bool {
        (0..2).all(|d| p.coord(d) >= self.lo[d] && p.coord(d) <= self.hi[d])
    }

    pub fn clamp(&self, p: Outcome) -> Outcome {
        Outcome::new(
            p.x.clamp(self.lo[0], self.hi[0]),
            p.y.clamp(self.lo[1], self.hi[1]),
        )
    }

    pub fn diameter(&self) -> f64 {
        self.width(0).hypot(self.width(1))
    }

    pub fn center(&self) -> Outcome {
        Outcome::new(
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        )
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        Outcome::new(
            self.lo[0] + u * self.width(0),
            self.lo[1] + v * self.width(1),
        )
    }

    /// Smallest rectangle holding every point; `None` for an empty iterator.
    pub fn bounding<'a>(points: impl IntoIterator<Item = &'a Outcome>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new([first.x, first.y], [first.x, first.y]);
        for p in it {
            r.lo[0] = r.lo[0].min(p.x);
            r.lo[1] = r.lo[1].min(p.y);
            r.hi[0] = r.hi[0].max(p.x);
            r.hi[1] = r.hi[1].max(p.y);
        }
        Some(r)
    }
}

/// The task space `Y = [-1, 1]^2`.
pub const TASK_SPACE: Rect = Rect::new([-1.0, -1.0], [1.0, 1.0]);

/// Per-parameter box constraints on actions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionBounds {
    pub lo: [f64; ACTION_DIM],
    pub hi: [f64; ACTION_DIM],
}

impl ActionBounds {
    pub fn from_ranges(angle: (f64, f64), duration: (f64, f64)) -> Self {
        let mut lo = [0.0; ACTION_DIM];
        let mut hi = [0.0; ACTION_DIM];
        for i in 0..ACTION_DIM {
            let (l, h) = if i % PARAMS_PER_JOINT == 3 {
                duration
            } else {
                angle
            };
            lo[i] = l;
            hi[i] = h;
        }
        ActionBounds { lo, hi }
    }

    pub fn width(&self, i: usize) -> f64 {
        self.hi[i] - self.lo[i]
    }

    pub fn contains(&self, a: &Action) -> bool {
        a.0.iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lo[i] && *v <= self.hi[i])
    }

    pub fn clamp(&self, a: &Action) -> Action {
        Action(std::array::from_fn(|i| a.0[i].clamp(self.lo[i], self.hi[i])))
    }

    pub fn midpoint(&self) -> Action {
        Action(std::array::from_fn(|i| 0.5 * (self.lo[i] + self.hi[i])))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Raw link lengths; rescaled so that they sum to `reach`.
    pub link_lengths: [f64; N_JOINTS],
    /// Total arm length after normalization.
    pub reach: f64,
    pub noise_sigma: f64,
    pub fling_gain: f64,
    pub trajectory_samples: usize,
    /// Mixed into every run seed to derive the sensor-noise stream.
    pub rng_seed: u64,
    pub q_min: f64,
    pub q_max: f64,
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            link_lengths: [0.30, 0.20, 0.18, 0.14, 0.10, 0.08],
            reach: 0.85,
            noise_sigma: 0.073,
            fling_gain: 0.1,
            trajectory_samples: 20,
            rng_seed: 0x5EED,
            q_min: -FRAC_PI_2,
            q_max: FRAC_PI_2,
            d_min: 0.5,
            d_max: 2.0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.link_lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        if !(self.reach > 0.0) {
            return Err(Error::Config("reach must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) || !(self.fling_gain >= 0.0) {
            return Err(Error::Config(
                "noise_sigma and fling_gain must be non-negative".into(),
            ));
        }
        if self.trajectory_samples < 2 {
            return Err(Error::Config("trajectory_samples must be >= 2".into()));
        }
        if !(self.q_min <= self.q_max) || !(0.0 < self.d_min && self.d_min <= self.d_max) {
            return Err(Error::Config("invalid angle or duration bounds".into()));
        }
        Ok(())
    }
}

/// What the learner can do with a world: act in it, noisily or not.
pub trait Environment: Sync {
    fn bounds(&self) -> &ActionBounds;

    fn noise_sigma(&self) -> f64;

    fn simulate_noiseless(&self, action: &Action) -> Outcome;

    /// Executes `action` once. Draws from `rng` only when noise is on.
    fn simulate<R: Rng + ?Sized>(&self, action: &Action, rng: &mut R) -> Outcome {
        let clean = self.simulate_noiseless(action);
        let sigma = self.noise_sigma();
        if sigma > 0.0 {
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            Outcome::new(clean.x + sigma * nx, clean.y + sigma * ny)
        } else {
            clean
        }
    }

    /// Landing point of the rest pose.
    fn origin(&self) -> Outcome;
}

#[derive(Clone, Debug)]
pub struct ArmEnv {
    cfg: EnvConfig,
    links: [f64; N_JOINTS],
    bounds: ActionBounds,
    origin: Outcome,
}

impl ArmEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let total: f64 = cfg.link_lengths.iter().sum();
        let links = cfg.link_lengths.map(|l| l / total * cfg.reach);
        let bounds = ActionBounds::from_ranges((cfg.q_min, cfg.q_max), (cfg.d_min, cfg.d_max));
        let mut env = ArmEnv {
            cfg,
            links,
            bounds,
            origin: Outcome::default(),
        };
        env.origin = origin_outcome(&env);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn links(&self) -> &[f64; N_JOINTS] {
        &self.links
    }

    /// Ground projection of the rod tip for a joint configuration.
    fn tip_on_ground(&self, q: &[f64; N_JOINTS]) -> [f64; 2] {
        let azimuth = q[0];
        let mut elevation = 0.0;
        let mut horizontal = self.links[0];
        for k in 1..N_JOINTS {
            elevation += q[k];
            horizontal += self.links[k] * elevation.sin();
        }
        [horizontal * azimuth.cos(), horizontal * azimuth.sin()]
    }
}

impl Environment for ArmEnv {
    fn bounds(&self) -> &ActionBounds {
        &self.bounds
    }

    fn noise_sigma(&self) -> f64 {
        self.cfg.noise_sigma
    }

    fn simulate_noiseless(&self, action: &Action) -> Outcome {
        let prims = action.primitives();
        let final_time = prims.iter().map(|p| p.duration).fold(0.0, f64::max);
        let n = self.cfg.trajectory_samples;
        let dt = final_time / (n - 1) as f64;
        // Only the last two samples of the trajectory enter the outcome.
        let t_prev = (n - 2) as f64 * dt;
        let q_final: [f64; N_JOINTS] = std::array::from_fn(|j| prims[j].held_at(final_time));
        let q_prev: [f64; N_JOINTS] = std::array::from_fn(|j| prims[j].held_at(t_prev));
        let p_final = self.tip_on_ground(&q_final);
        let p_prev = self.tip_on_ground(&q_prev);
        let throw = self.cfg.fling_gain * prims[N_JOINTS - 1].duration / dt;
        let landing = Outcome::new(
            p_final[0] + throw * (p_final[0] - p_prev[0]),
            p_final[1] + throw * (p_final[1] - p_prev[1]),
        );
        TASK_SPACE.clamp(landing)
    }

    fn origin(&self) -> Outcome {
        self.origin
    }
}

/// Noiseless landing point of the rest pose.
pub fn origin_outcome<E: Environment + ?Sized>(env: &E) -> Outcome {
    env.simulate_noiseless(&Action::rest(env.bounds().lo[PARAMS_PER_JOINT - 1]))
}

/// Uniform random action inside `bounds`.
pub fn random_action<R: Rng + ?Sized>(bounds: &ActionBounds, rng: &mut R) -> Action {
    Action(std::array::from_fn(|i| {
        let u: f64 = rng.random();
        bounds.lo[i] + u * bounds.width(i)
    }))
}
