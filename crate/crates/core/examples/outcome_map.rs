//! Prints an ASCII density map of where random actions land.
//!
//! Usage: `cargo run --release --example outcome_map [samples]`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sgim_core::env::{random_action, ArmEnv, EnvConfig, Environment, TASK_SPACE};
use sgim_core::teacher::grid_cell;

fn main() {
    let samples: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("samples must be a positive integer"))
        .unwrap_or(20_000);
    let env = ArmEnv::new(EnvConfig::default()).expect("default config is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (nx, ny) = (52, 26);
    let mut counts = vec![0usize; nx * ny];
    for _ in 0..samples {
        let y = env.simulate_noiseless(&random_action(env.bounds(), &mut rng));
        if let Some((ix, iy)) = grid_cell(&TASK_SPACE, (nx, ny), &y) {
            counts[iy * nx + ix] += 1;
        }
    }
    let per_cell = samples as f64 / (nx * ny) as f64;
    for iy in (0..ny).rev() {
        let row: String = (0..nx)
            .map(|ix| match counts[iy * nx + ix] as f64 / per_cell {
                r if r == 0.0 => ' ',
                r if r < 0.5 => '.',
                r if r < 2.0 => ':',
                r if r < 8.0 => 'o',
                _ => '#',
            })
            .collect();
        println!("|{row}|");
    }
    let origin = env.origin();
    println!(
        "{samples} random actions over [-1, 1]^2; rest pose lands at ({}, {}); {} of {} cells reached",
        origin.x,
        origin.y,
        counts.iter().filter(|c| **c > 0).count(),
        nx * ny
    );
}
