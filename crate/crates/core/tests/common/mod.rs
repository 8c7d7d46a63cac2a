//! Straight-line reimplementations of the learner's formulas, written
//! independently of the library code, plus random instance generators.

#![allow(dead_code)]

use rand::Rng;
use sgim_core::env::{Action, ActionBounds, Outcome, ACTION_DIM};
use sgim_core::memory::{Memory, Source};

pub const REL_TOL: f64 = 1e-9;
/// Below this magnitude two values are compared absolutely.
pub const ABS_FLOOR: f64 = 1e-12;

pub fn close(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= REL_TOL * a.abs().max(b.abs()) || diff <= ABS_FLOOR
}

pub fn similarity(goal: (f64, f64), fin: (f64, f64), origin: (f64, f64), diameter: f64) -> f64 {
    let d = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() / diameter;
    let denom = d(goal, origin);
    let num = d(goal, fin);
    if denom == 0.0 {
        return if num == 0.0 { 0.0 } else { -1.0 };
    }
    if num / denom > 1.0 {
        -1.0
    } else {
        -(num / denom)
    }
}

pub fn competence(sim: f64, eps: f64) -> f64 {
    if sim <= eps {
        sim
    } else {
        0.0
    }
}

pub fn interest(competences: &[f64], zeta: usize) -> f64 {
    let n = competences.len();
    let window: Vec<f64> = if n > zeta {
        competences[n - zeta..].to_vec()
    } else {
        competences.to_vec()
    };
    if window.len() < 2 {
        return 0.0;
    }
    let half = window.len() / 2;
    let mut first = 0.0;
    let mut second = 0.0;
    for (i, c) in window.iter().enumerate() {
        if i < half {
            first += c;
        } else {
            second += c;
        }
    }
    (first - second).abs() / zeta as f64
}

pub fn region_probabilities(interests: &[f64]) -> Vec<f64> {
    let mut min = interests[0];
    for &i in interests {
        if i < min {
            min = i;
        }
    }
    let mut denom = 0.0;
    for &i in interests {
        denom += i - min;
    }
    interests
        .iter()
        .map(|&i| {
            if denom == 0.0 {
                1.0 / interests.len() as f64
            } else {
                (i - min) / denom
            }
        })
        .collect()
}

fn dist(a: &Outcome, b: &Outcome) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Indices of the `k` outcomes nearest `q`, ties to the earlier index.
pub fn brute_nearest(outcomes: &[Outcome], q: &Outcome, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..outcomes.len()).collect();
    idx.sort_by(|&i, &j| {
        dist(&outcomes[i], q)
            .partial_cmp(&dist(&outcomes[j], q))
            .unwrap()
            .then(i.cmp(&j))
    });
    idx.truncate(k);
    idx
}

/// Two-pass mean per-axis population variance.
pub fn variance(points: &[Outcome]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;
    let vx = points.iter().map(|p| (p.x - mx).powi(2)).sum::<f64>() / n;
    let vy = points.iter().map(|p| (p.y - my).powi(2)).sum::<f64>() / n;
    (vx + vy) / 2.0
}

pub fn reliability(outcomes: &[Outcome], candidate: usize, goal: &Outcome, k: usize, alpha: f64) -> f64 {
    let near = brute_nearest(outcomes, &outcomes[candidate], k);
    let pts: Vec<Outcome> = near.iter().map(|&i| outcomes[i]).collect();
    dist(&outcomes[candidate], goal) + alpha * variance(&pts)
}

/// The exploitation query, step by step: candidates, most reliable one,
/// its neighborhood, Gaussian blend, clamp.
pub fn blended_action(
    actions: &[Action],
    outcomes: &[Outcome],
    goal: &Outcome,
    l_max: usize,
    k_max: usize,
    alpha: f64,
    width: f64,
    bounds: &ActionBounds,
) -> [f64; ACTION_DIM] {
    let candidates = brute_nearest(outcomes, goal, l_max);
    let mut best = candidates[0];
    let mut best_score = reliability(outcomes, best, goal, k_max, alpha);
    for &c in &candidates[1..] {
        let s = reliability(outcomes, c, goal, k_max, alpha);
        if s < best_score || (s == best_score && c < best) {
            best = c;
            best_score = s;
        }
    }
    let local = brute_nearest(outcomes, &outcomes[best], k_max);
    let raw: Vec<f64> = local
        .iter()
        .map(|&i| (-dist(&outcomes[i], goal).powi(2) / (2.0 * width * width)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    let mut out = [0.0; ACTION_DIM];
    for (w, &i) in raw.iter().zip(&local) {
        for d in 0..ACTION_DIM {
            out[d] += w / total * actions[i].0[d];
        }
    }
    for d in 0..ACTION_DIM {
        out[d] = out[d].max(bounds.lo[d]).min(bounds.hi[d]);
    }
    out
}

pub fn random_outcome<R: Rng>(rng: &mut R) -> Outcome {
    Outcome::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// A memory of `n` random associations; outcomes and actions returned
/// alongside in insertion order.
pub fn random_memory<R: Rng>(rng: &mut R, n: usize, bounds: &ActionBounds) -> (Memory, Vec<Action>, Vec<Outcome>) {
    let mut memory = Memory::new();
    let mut actions = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    for _ in 0..n {
        let a = Action(std::array::from_fn(|i| rng.random_range(bounds.lo[i]..=bounds.hi[i])));
        let y = random_outcome(rng);
        memory.record(a, y, Source::Autonomous);
        actions.push(a);
        outcomes.push(y);
    }
    (memory, actions, outcomes)
}

pub struct OracleReport {
    pub name: &'static str,
    pub instances: usize,
    pub mismatches: usize,
}

fn report(name: &'static str, results: impl Iterator<Item = bool>) -> OracleReport {
    let mut instances = 0;
    let mut mismatches = 0;
    for ok in results {
        instances += 1;
        if !ok {
            mismatches += 1;
        }
    }
    OracleReport {
        name,
        instances,
        mismatches,
    }
}

/// Runs every formula against its oracle on `n` random instances each.
pub fn check_formulas(n: usize, seed: u64) -> Vec<OracleReport> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sgim_core::env::{ArmEnv, EnvConfig, Environment};
    use sgim_core::memory;
    use sgim_core::reaching::{self, ReachingConfig};
    use sgim_core::sagg::{self, CompetenceParams};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diameter = 8f64.sqrt();
    let bounds = *ArmEnv::new(EnvConfig::default()).unwrap().bounds();
    let mut out = Vec::new();

    out.push(report(
        "similarity",
        (0..n).map(|i| {
            let goal = random_outcome(&mut rng);
            let fin = random_outcome(&mut rng);
            // Every tenth instance exercises the degenerate normalizer.
            let origin = if i % 10 == 0 { goal } else { random_outcome(&mut rng) };
            let params = CompetenceParams {
                origin,
                ..CompetenceParams::default()
            };
            close(
                sagg::similarity(&goal, &fin, &params),
                similarity((goal.x, goal.y), (fin.x, fin.y), (origin.x, origin.y), diameter),
            )
        }),
    ));

    out.push(report(
        "competence",
        (0..n).map(|i| {
            let eps = -rng.random_range(0.001..0.999);
            let goal = random_outcome(&mut rng);
            let fin = if i % 2 == 0 {
                random_outcome(&mut rng)
            } else {
                Outcome::new(goal.x + rng.random_range(-0.05..0.05), goal.y + rng.random_range(-0.05..0.05))
            };
            let origin = random_outcome(&mut rng);
            let params = CompetenceParams {
                eps_sim: eps,
                origin,
                y_diameter: diameter,
            };
            let sim = similarity((goal.x, goal.y), (fin.x, fin.y), (origin.x, origin.y), diameter);
            let boundary = sagg::competence_from_similarity(eps, eps) == eps;
            boundary && close(sagg::competence(&goal, &fin, &params), competence(sim, eps))
        }),
    ));

    out.push(report(
        "interest",
        (0..n).map(|_| {
            let zeta = 2 * rng.random_range(1..=15);
            let len = rng.random_range(0..=60);
            let comps: Vec<f64> = (0..len).map(|_| -rng.random::<f64>()).collect();
            close(sagg::interest_of(&comps, zeta), interest(&comps, zeta))
        }),
    ));

    out.push(report(
        "region_probabilities",
        (0..n).map(|i| {
            let len = rng.random_range(1..=20);
            let interests: Vec<f64> = if i % 10 == 0 {
                vec![rng.random::<f64>(); len]
            } else {
                (0..len).map(|_| rng.random::<f64>()).collect()
            };
            let got = sagg::selection_probabilities(&interests);
            let want = region_probabilities(&interests);
            got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| close(*a, *b))
        }),
    ));

    out.push(report(
        "reliability",
        (0..n).map(|_| {
            let size = rng.random_range(5..=200);
            let (mem, _, outcomes) = random_memory(&mut rng, size, &bounds);
            let c = rng.random_range(0..size);
            let goal = random_outcome(&mut rng);
            let k = rng.random_range(2..=10);
            let alpha = rng.random_range(0.0..2.0);
            let got = memory::reliability(&mem, &mem.exemplars()[c], &goal, k, alpha);
            close(got, reliability(&outcomes, c, &goal, k, alpha))
        }),
    ));

    out.push(report(
        "gaussian_blend",
        (0..n).map(|_| {
            let size = rng.random_range(10..=200);
            let (mem, actions, outcomes) = random_memory(&mut rng, size, &bounds);
            let goal = random_outcome(&mut rng);
            let cfg = ReachingConfig {
                l_max: rng.random_range(1..=10),
                k_max: rng.random_range(2..=10),
                alpha: rng.random_range(0.0..2.0),
                kernel_width: rng.random_range(0.05..1.0),
                ..ReachingConfig::default()
            };
            let got = reaching::exploit_action(&mem, &goal, &cfg, &bounds).unwrap();
            let want = blended_action(
                &actions,
                &outcomes,
                &goal,
                cfg.l_max,
                cfg.k_max,
                cfg.alpha,
                cfg.kernel_width,
                &bounds,
            );
            got.action.0.iter().zip(&want).all(|(a, b)| close(*a, *b))
        }),
    ));

    out
}

/// Runs the simplex search on `n` random objectives and returns how many
/// results were worse than the best vertex it started from.
pub fn nelder_mead_regressions(n: usize, seed: u64) -> usize {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sgim_core::nelder_mead::{minimize, NelderMeadConfig, Seed};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worse = 0;
    for _ in 0..n {
        let dim = rng.random_range(1..=ACTION_DIM);
        let lo: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.1..3.0)).collect();
        let center: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        let scale: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..10.0)).collect();
        let freq = rng.random_range(0.0..5.0);
        let objective = |x: &[f64]| -> f64 {
            x.iter()
                .zip(&center)
                .zip(&scale)
                .map(|((v, c), s)| s * (v - c).powi(2) + (freq * v).sin())
                .sum()
        };
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..*h)).collect()
        };
        // Known values are taken at face value, so give them the true ones.
        let seed_at = |rng: &mut ChaCha8Rng| {
            let p = point(rng);
            if rng.random_bool(0.5) {
                let f = objective(&p);
                Seed::known(p, f)
            } else {
                Seed::new(p)
            }
        };
        let initial = seed_at(&mut rng);
        let neighbors: Vec<Seed> = (0..rng.random_range(0..=dim + 2)).map(|_| seed_at(&mut rng)).collect();
        let cfg = NelderMeadConfig {
            max_evals: rng.random_range(0..=300),
            tol: 10f64.powf(rng.random_range(-12.0..-1.0)),
            ..NelderMeadConfig::default()
        };
        let mut first_value = None;
        let result = minimize(
            |x| {
                let f = objective(x);
                first_value.get_or_insert(f);
                f
            },
            initial.clone(),
            &neighbors,
            &lo,
            &hi,
            &cfg,
        );
        // Only the first `dim` neighbors join the simplex.
        let known_best = std::iter::once(&initial)
            .chain(neighbors.iter().take(dim))
            .filter_map(|s| s.value)
            .fold(f64::INFINITY, f64::min);
        // The first evaluation is always an initial vertex.
        let best_initial = known_best.min(first_value.unwrap_or(f64::INFINITY));
        if result.value > best_initial {
            worse += 1;
        }
    }
    worse
}
