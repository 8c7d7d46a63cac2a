//! Box-constrained Nelder-Mead simplex search.
//!
//! Vertices are clamped into the box before evaluation. Vertices may come
//! with a known objective value, which is used instead of evaluating them;
//! this lets callers seed the simplex with points whose cost was already paid.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadConfig {
    /// Objective evaluations allowed, including those building the simplex.
    pub max_evals: usize,
    /// Stop once `f(worst) - f(best) < tol`.
    pub tol: f64,
    /// Size of the coordinate perturbations, as a fraction of each box width.
    pub step: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            max_evals: 1000,
            tol: 1e-3,
            step: 0.05,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

/// A starting point, optionally with its objective value already known.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub point: Vec<f64>,
    pub value: Option<f64>,
}

impl Seed {
    pub fn new(point: Vec<f64>) -> Self {
        Seed { point, value: None }
    }

    pub fn known(point: Vec<f64>, value: f64) -> Self {
        Seed {
            point,
            value: Some(value),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub best: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
struct Vertex {
    x: Vec<f64>,
    f: f64,
}

enum Stop {
    Budget,
    Aborted,
}

struct Search<'a, F> {
    objective: F,
    lo: &'a [f64],
    hi: &'a [f64],
    evals: usize,
    max_evals: usize,
    best: Option<Vertex>,
}

impl<F: FnMut(&[f64]) -> Option<f64>> Search<'_, F> {
    fn clamp(&self, mut x: Vec<f64>) -> Vec<f64> {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i], self.hi[i]);
        }
        x
    }

    fn note(&mut self, v: &Vertex) {
        if self.best.as_ref().is_none_or(|b| v.f < b.f) {
            self.best = Some(v.clone());
        }
    }

    fn eval(&mut self, x: Vec<f64>) -> Result<Vertex, Stop> {
        if self.evals >= self.max_evals {
            return Err(Stop::Budget);
        }
        let x = self.clamp(x);
        let f = (self.objective)(&x).ok_or(Stop::Aborted)?;
        self.evals += 1;
        let v = Vertex { x, f };
        self.note(&v);
        Ok(v)
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

/// Minimizes `objective` over the box `[lo, hi]`.
///
/// The simplex is `initial` plus the first `n` distinct `neighbors`, topped
/// up with `initial + step * width_i * e_i` along successive coordinates.
/// The objective may return `None` to end the search at once.
pub fn minimize_with<F>(
    objective: F,
    initial: Seed,
    neighbors: &[Seed],
    lo: &[f64],
    hi: &[f64],
    cfg: &NelderMeadConfig,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let n = initial.point.len();
    assert!(lo.len() == n && hi.len() == n, "bounds must match the dimension");
    let mut search = Search {
        objective,
        lo,
        hi,
        evals: 0,
        max_evals: cfg.max_evals,
        best: None,
    };

    let mut seeds: Vec<Seed> = vec![Seed {
        point: search.clamp(initial.point),
        value: initial.value,
    }];
    for s in neighbors {
        if seeds.len() > n {
            break;
        }
        let p = search.clamp(s.point.clone());
        if seeds.iter().all(|v| !close(&v.point, &p)) {
            seeds.push(Seed {
                point: p,
                value: s.value,
            });
        }
    }
    let origin = seeds[0].point.clone();
    let mut coord = 0;
    while seeds.len() <= n && coord < n {
        let mut p = origin.clone();
        let delta = cfg.step * (hi[coord] - lo[coord]);
        p[coord] = if p[coord] + delta <= hi[coord] {
            p[coord] + delta
        } else {
            p[coord] - delta
        };
        coord += 1;
        if delta > 0.0 && seeds.iter().all(|v| !close(&v.point, &p)) {
            seeds.push(Seed::new(p));
        }
    }

    // Known values cost nothing; record them before spending evaluations.
    let mut simplex: Vec<Vertex> = Vec::with_capacity(n + 1);
    let mut pending = Vec::new();
    for s in seeds {
        match s.value {
            Some(f) => {
                let v = Vertex { x: s.point, f };
                search.note(&v);
                simplex.push(v);
            }
            None => pending.push(s.point),
        }
    }
    let mut converged = false;
    let outcome = (|| -> Result<(), Stop> {
        for p in pending {
            let v = search.eval(p)?;
            simplex.push(v);
        }
        if simplex.len() < 2 {
            return Ok(());
        }
        loop {
            simplex.sort_by(|a, b| a.f.total_cmp(&b.f));
            let worst = simplex.len() - 1;
            if simplex[worst].f - simplex[0].f < cfg.tol {
                converged = true;
                return Ok(());
            }
            let mut centroid = vec![0.0; n];
            for v in &simplex[..worst] {
                for (c, x) in centroid.iter_mut().zip(&v.x) {
                    *c += x / worst as f64;
                }
            }
            let along = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(from)
                    .map(|(c, x)| c + t * (c - x))
                    .collect()
            };
            let reflected = search.eval(along(cfg.reflection, &simplex[worst].x))?;
            if reflected.f < simplex[0].f {
                let expanded =
                    search.eval(along(cfg.reflection * cfg.expansion, &simplex[worst].x))?;
                simplex[worst] = if expanded.f < reflected.f {
                    expanded
                } else {
                    reflected
                };
                continue;
            }
            if reflected.f < simplex[worst - 1].f {
                simplex[worst] = reflected;
                continue;
            }
            if reflected.f < simplex[worst].f {
                let outside =
                    search.eval(along(cfg.reflection * cfg.contraction, &simplex[worst].x))?;
                if outside.f <= reflected.f {
                    simplex[worst] = outside;
                    continue;
                }
            } else {
                let inside = search.eval(along(-cfg.contraction, &simplex[worst].x))?;
                if inside.f < simplex[worst].f {
                    simplex[worst] = inside;
                    continue;
                }
            }
            let anchor = simplex[0].x.clone();
            for i in 1..simplex.len() {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&simplex[i].x)
                    .map(|(b, x)| b + cfg.shrink * (x - b))
                    .collect();
                simplex[i] = search.eval(x)?;
            }
        }
    })();
    if let Err(Stop::Budget | Stop::Aborted) = outcome {
        converged = false;
    }
    // Nothing known and nothing evaluated: hand back the starting point.
    let best = search.best.unwrap_or(Vertex {
        x: origin,
        f: f64::INFINITY,
    });
    NelderMeadResult {
        best: best.x,
        value: best.f,
        evaluations: search.evals,
        converged,
    }
}

/// Convenience wrapper for an infallible objective.
pub fn minimize<F>(
    mut objective: F,
    initial: Seed,
    neighbors: &[Seed],
    lo: &[f64],
    hi: &[f64],
    cfg: &NelderMeadConfig,
) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    minimize_with(|x| Some(objective(x)), initial, neighbors, lo, hi, cfg)
}
